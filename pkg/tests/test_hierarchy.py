import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hasimoto import CPN, Grid, HasimotoState, plane_wave
from hasimoto import hierarchy as H
from hasimoto.verify import random_band_q

seeds = st.integers(0, 10 ** 6)


def _state(n=2, m=128, seed=0, kmax=5, amp=0.4):
    al, g = CPN(n), Grid(m)
    return HasimotoState(random_band_q(al, g, seed, kmax, amp), g, al)


def test_q_to_Q_round_trip():
    s = _state()
    Q = H.q_to_Q(s.q, s.algebra)
    assert np.abs(Q + s.algebra.kappa * s.q).max() < 1e-15
    assert np.abs(H.Q_to_q(Q, s.algebra) - s.q).max() < 1e-15


@pytest.mark.parametrize("n", [1, 2, 3])
def test_plane_wave_dispersion(n):
    # RHS of the NLS flow on a plane wave is i omega q, omega = efac (k^2 - 2|a|^2)
    al, g = CPN(n), Grid(64)
    s = plane_wave(al, g, 0.7, 3, n - 1)
    w = H.plane_wave_frequency(al, 0.7, 3.0)
    assert w == pytest.approx(2 * n * (9 - 2 * 0.49))
    assert np.abs(H.nls_rhs(s) - 1j * w * s.q).max() < 1e-10


def test_plane_wave_h1_analytic():
    al, g = CPN(2), Grid(64)
    s = plane_wave(al, g, 0.5, 1)
    # 1/2 L <q, q>_m with <q, q>_m = 4 (N + 1) |a|^2
    assert H.hamiltonian(1, s) == pytest.approx(0.5 * 2 * np.pi * 4 * 3 * 0.25, rel=1e-13)


def test_zero_field_hamiltonians_vanish():
    al, g = CPN(2), Grid(32)
    s = HasimotoState(np.zeros((32, 2), complex), g, al)
    assert all(H.hamiltonian(k, s) == 0 for k in (1, 2, 3, 4))


def test_nls_lie_form_matches_vector_form():
    s = _state(3)
    assert np.abs(H.nls_rhs_lie(s) - H.nls_rhs(s)).max() < 1e-10
    assert np.abs(H.mkdv_rhs_lie(s) - H.mkdv_rhs(s)).max() < 1e-9


@pytest.mark.parametrize("n", [2, 3])
def test_resolvent_reproduces_local_flows(n):
    s = _state(2)
    ref = H.nls_rhs(s) if n == 2 else H.mkdv_rhs(s)
    assert np.abs(H.local_flow(n, s) - ref).max() < 1e-8


def test_flow_index_out_of_range():
    with pytest.raises(ValueError):
        H.flow_rhs(9, _state(1))


def test_flow_one_is_translation():
    s = _state(2)
    assert np.abs(H.flow_rhs(1, s) - s.algebra.efac * s.d(1)).max() < 1e-10
    assert np.abs(H.local_flow(1, s) - s.algebra.efac * s.d(1)).max() < 1e-10


def test_higher_flow_conserves_h1():
    s = _state(2, m=32, kmax=3, amp=0.2)
    s1 = H.evolve(s, 4, dt=1e-3, t_final=0.01, integrator="rk4")
    assert abs(H.hamiltonian(1, s1) - H.hamiltonian(1, s)) < 1e-9


@pytest.mark.parametrize("n", [2, 3, 4])
def test_frame_data_structure_equations(n):
    s = _state(2)
    d = H.flow_frame_data(n, s)
    res = H.frame_residuals(d, s, H.flow_rhs(n, s))
    assert max(res.values()) < 1e-8
    if n == 2:
        assert np.all(d.h_par == 0)


def test_lax_residual_on_exact_plane_wave_is_second_order():
    al, g = CPN(2), Grid(32)
    out = []
    for dt in (2e-3, 1e-3):
        s0 = plane_wave(al, g, 0.5, 1, 0, 0.1)
        s1 = plane_wave(al, g, 0.5, 1, 0, 0.1 + dt)
        out.append(H.lax_residual(s0, s1, 1.0))
    assert np.log2(out[0] / out[1]) > 1.9


def test_lax_residual_rejects_order():
    al, g = CPN(1), Grid(32)
    s = plane_wave(al, g, 0.5, 1)
    with pytest.raises(ValueError):
        H.lax_residual(s, s, 0.0)


def test_plane_wave_evolution_ifrk4_and_rk4():
    al, g = CPN(2), Grid(32)
    s = plane_wave(al, g, 0.5, 1)
    for integ in ("ifrk4", "rk4"):
        s1 = H.evolve(s, "nls", dt=1e-3, t_final=0.1, integrator=integ)
        assert np.abs(s1.q - plane_wave(al, g, 0.5, 1, 0, 0.1).q).max() < 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=seeds, n=st.integers(1, 3))
def test_recursion_of_jq_is_qx(seed, n):
    s = _state(n, m=64, seed=seed, kmax=4)
    assert np.abs(H.recursion_apply(s, s.algebra.j_apply(s.q)) - s.d(1)).max() < 1e-10


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_hamiltonians_are_symmetry_invariant(seed):
    s = _state(2, m=64, seed=seed, kmax=4)
    al = s.algebra
    rng = np.random.default_rng(seed)
    # constant H-rotation acts on m-vectors as q -> e^{i a} q U for U in U(N)
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    u, _ = np.linalg.qr(z)
    rot = s.with_q(np.exp(0.7j) * s.q @ u)
    shifted = s.with_q(np.roll(s.q, 5, axis=0))
    for k in (1, 2, 3, 4):
        h = H.hamiltonian(k, s)
        assert H.hamiltonian(k, rot) == pytest.approx(h, abs=1e-10)
        assert H.hamiltonian(k, shifted) == pytest.approx(h, abs=1e-10)
