import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hasimoto import CPN, FrameError, Grid, MapCoords, SingularityError
from hasimoto import mapping as M
from hasimoto import geometry as G


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 3), seed=st.integers(0, 10 ** 5))
def test_embed_matches_adjoint_orbit(n, seed):
    al, g = CPN(n), Grid(16)
    rng = np.random.default_rng(seed)
    th = rng.uniform(0, np.pi, 16)
    big = rng.standard_normal((16, n)) + 1j * rng.standard_normal((16, n))
    big /= np.linalg.norm(big, axis=1)[:, None]
    ms = M.embed(MapCoords(th, big, g), al)
    psi = al.exp_m(th[:, None] * big)
    assert np.abs(ms.gamma_map - psi @ al.A @ np.conj(np.swapaxes(psi, -1, -2))).max() < 1e-12
    assert M.map_spectrum_deviation(ms) < 1e-12


def test_embed_rejects_non_unit_theta():
    g = Grid(16)
    with pytest.raises(FrameError):
        M.embed(MapCoords(np.ones(16), 2 * np.ones((16, 1)), g))


def test_great_circle_arclength():
    # theta = x/2 with constant Theta: g(gamma_x, gamma_x) = (N + 1) / ... = 2 for N = 1
    al, g = CPN(1), Grid(64)
    c = MapCoords(g.x / 2, np.ones((64, 1), complex), g)
    ms = M.embed(c, al)
    assert M.total_arclength(ms) == pytest.approx(np.sqrt(2) * 2 * np.pi, rel=1e-12)


def test_constant_map_has_zero_arclength():
    al, g = CPN(2), Grid(16)
    ms = M.MapState(np.broadcast_to(al.A, (16, 3, 3)).copy(), g, al)
    assert M.total_arclength(ms) == 0.0


def test_schrodinger_map_is_locally_stretching_but_conserves_energy():
    al, g = CPN(2), Grid(128)
    ms = M.MapState(al.kappa * G.random_spin(al, g, 0, 3, 0.5).t_field, g, al)
    st = M.local_stretch(ms, M.schrodinger_map_rhs_matrix(ms))
    assert np.abs(st).max() > 1e-3
    assert abs(np.sum(st) * g.spacing) < 1e-10


@pytest.mark.parametrize("n", [1, 2])
def test_coordinate_forms_agree_with_matrix_equation(n):
    g = Grid(128)
    c = M.random_coords(n, g, seed=3, amplitude=0.15, theta0=0.75)
    al = CPN(n)
    t1, b1 = M.coord_evolution_rhs(c, form="closed")
    t2, b2 = M.coord_evolution_rhs(c, form="derived")
    assert np.abs(t1 - t2).max() < 1e-9 and np.abs(b1 - b2).max() < 1e-9
    eps = 1e-5

    def shifted(s):
        big = c.big_theta + s * b1
        big /= np.linalg.norm(big, axis=1)[:, None]
        return M.embed(MapCoords(c.theta + s * t1, big, g), al).gamma_map

    fd = (shifted(eps) - shifted(-eps)) / (2 * eps)
    rhs = M.schrodinger_map_rhs_matrix(M.embed(c, al))
    assert np.abs(fd - rhs).max() < 1e-7


def test_coordinate_chart_singularity():
    g = Grid(32)
    c = MapCoords(np.pi / 2 + 0.05 * np.sin(g.x), np.ones((32, 1), complex), g)
    with pytest.raises(SingularityError) as err:
        M.coord_evolution_rhs(c, theta_margin=0.1)
    assert err.value.margin == 0.1


def test_coordinate_and_matrix_paths_agree():
    n, g = 1, Grid(64)
    al = CPN(n)
    c = M.random_coords(n, g, seed=2, amplitude=0.1, theta0=0.75)
    c1 = M.evolve_coords(c, dt=2e-4, t_final=0.02)
    ms1 = M.evolve_map(M.embed(c, al), dt=2e-4, t_final=0.02)
    assert np.abs(M.embed(c1, al, tol=1e-6).gamma_map - ms1.gamma_map).max() < 1e-9


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10 ** 5))
def test_stereographic_round_trip(seed):
    g = Grid(16)
    c = M.random_coords(2, g, seed=seed, amplitude=0.2, theta0=0.7)
    back = M.inverse_stereographic(M.stereographic(c), g)
    assert np.abs(back.theta - c.theta).max() < 1e-10
    assert np.abs(back.big_theta - c.big_theta).max() < 1e-10
