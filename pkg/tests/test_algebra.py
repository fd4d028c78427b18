import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from hasimoto import CPN, DimensionError

ns = st.integers(min_value=1, max_value=4)
seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def test_rejects_bad_n():
    with pytest.raises(DimensionError):
        CPN(0)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_killing_of_A(n):
    al = CPN(n)
    assert al.killing(al.A, al.A) == pytest.approx(-2 * n, abs=1e-13)
    assert al.efac == 2 * n


@pytest.mark.parametrize("n", [1, 2, 3])
def test_killing_matches_trace_of_ad(n):
    al = CPN(n)
    k = al.killing_from_constants()
    e = al.basis
    direct = al.killing(e[:, None], e[None, :])
    assert np.max(np.abs(k - direct)) < 1e-12


def test_embed_layout_n2():
    al = CPN(2)
    a = np.array([1 + 2j, -1j])
    x = al.embed_m(a)
    assert x[0, 1:] == pytest.approx(a)
    assert x[1:, 0] == pytest.approx(-np.conj(a))
    assert np.all(x[1:, 1:] == 0)
    b = np.array([[1j, 0.5], [-0.5, 0]])
    y = al.embed_h(b)
    assert y[0, 0] == pytest.approx(-np.trace(b))
    assert np.trace(y) == pytest.approx(0)


def test_inner_m_is_minus_killing():
    al = CPN(3)
    a, b = al.random_element("m", 1), al.random_element("m", 2)
    assert al.inner_m(a, b) == pytest.approx(-al.killing(al.embed_m(a), al.embed_m(b)))


def test_ad_squared_n1_scalar():
    # for N = 1, ad(u)^2 v = (2 conj(v) u - conj(u) v) u - |u|^2 v; with v = u this is 0
    al = CPN(1)
    u = np.array([0.3 - 0.4j])
    assert np.abs(al.ad_squared_m(u, u)).max() < 1e-15
    v = np.array([1.0 + 0j])
    dense = al.commutator(al.embed_m(u), al.commutator(al.embed_m(u), al.embed_m(v)))
    assert np.abs(al.embed_m(al.ad_squared_m(u, v)) - dense).max() < 1e-15


def test_exp_of_zero_is_identity():
    al = CPN(2)
    assert np.allclose(al.exp_m(np.zeros(2)), np.eye(3))


def test_random_element_is_deterministic():
    al = CPN(2)
    assert np.array_equal(al.random_element("g", 7, size=3), al.random_element("g", 7, size=3))
    with pytest.raises(ValueError):
        al.random_element("x", 0)


@settings(max_examples=40, deadline=None)
@given(n=ns, seed=seeds)
def test_jacobi_and_block_bracket(n, seed):
    al = CPN(n)
    x, y, z = (al.random_element("g", seed + i) for i in range(3))
    br = al.commutator
    assert np.abs(br(x, br(y, z)) + br(y, br(z, x)) + br(z, br(x, y))).max() < 1e-12
    assert np.abs(al.bracket(x, y) - br(x, y)).max() < 1e-13


@settings(max_examples=40, deadline=None)
@given(n=ns, seed=seeds)
def test_symmetric_space_inclusions(n, seed):
    al = CPN(n)
    rng = np.random.default_rng(seed)
    m1, m2 = al.embed_m(al.random_element("m", rng)), al.embed_m(al.random_element("m", rng))
    h1 = al.embed_h(al.random_element("h", rng))
    mm = al.commutator(m1, m2)
    assert np.abs(al.project_m(mm)).max() < 1e-13
    hm = al.commutator(h1, m1)
    assert np.abs(hm - al.embed_m(al.project_m(hm))).max() < 1e-13
    assert np.abs(al.commutator(al.A, h1)).max() < 1e-13


@settings(max_examples=40, deadline=None)
@given(n=ns, seed=seeds, scale=st.floats(min_value=0.0, max_value=3.0))
def test_exp_m_closed_form(n, seed, scale):
    al = CPN(n)
    a = al.random_element("m", seed, scale=scale)
    g = al.exp_m(a)
    assert np.abs(g - expm(al.embed_m(a))).max() < 1e-12
    assert np.abs(g @ g.conj().T - np.eye(n + 1)).max() < 1e-13
    assert abs(np.linalg.det(g) - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(n=ns, seed=seeds)
def test_j_is_a_complex_structure(n, seed):
    al = CPN(n)
    a = al.random_element("m", seed)
    assert np.abs(al.j_apply(al.j_apply(a)) + a).max() < 1e-14
    assert np.abs(al.j_inv(al.j_apply(a)) - a).max() < 1e-14
    # J is an isometry of <,>_m
    assert al.inner_m(al.j_apply(a), al.j_apply(a)) == pytest.approx(al.inner_m(a, a))


@settings(max_examples=30, deadline=None)
@given(n=ns, seed=seeds)
def test_coords_round_trip(n, seed):
    al = CPN(n)
    x = al.random_element("g", seed)
    assert np.abs(al.from_coords(al.coords(x)) - x).max() < 1e-13


@settings(max_examples=30, deadline=None)
@given(n=ns, seed=seeds)
def test_adjoint_preserves_killing(n, seed):
    al = CPN(n)
    rng = np.random.default_rng(seed)
    g = al.exp_m(al.random_element("m", rng))
    x, y = al.random_element("g", rng), al.random_element("g", rng)
    assert al.killing(al.adjoint(g, x), al.adjoint(g, y)) == pytest.approx(al.killing(x, y), abs=1e-11)
