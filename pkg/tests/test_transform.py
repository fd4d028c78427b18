import numpy as np
import pytest

from hasimoto import CPN, Grid, HasimotoState
from hasimoto import geometry as G
from hasimoto import hierarchy as H
from hasimoto import mapping as M
from hasimoto import transform as T
from hasimoto.verify import random_band_q

from helpers import closing_data


def _q(n=2, m=128, seed=0):
    al, g = CPN(n), Grid(m)
    return HasimotoState(random_band_q(al, g, seed, 4, 0.4), g, al)


def test_frame_round_trip_and_unitarity():
    s = _q()
    fr = T.integrate_frame(s)
    assert fr.unitarity_defect() < 1e-12
    assert np.abs(T.q_from_frame(fr) - s.q).max() < 1e-8
    assert T.frame_residual(fr, s) < 1e-8
    # a generic q has a nontrivial holonomy, recorded but allowed
    assert np.abs(fr.holonomy - np.eye(3)).max() > 1e-3


@pytest.mark.parametrize("n", [1, 2, 3])
def test_hasimoto_closed_form_matches_connection(n):
    g = Grid(128)
    c = M.random_coords(n, g, seed=n, amplitude=0.2, theta0=0.7)
    q, fixed, gauge, info = T.hasimoto_from_map(c, CPN(n), return_frame=True)
    assert info["closed_vs_connection"] < 1e-9
    gm = gauge.big_gamma_matrix
    assert np.abs(gm @ np.conj(np.swapaxes(gm, -1, -2)) - np.eye(n)).max() < 1e-10
    assert np.abs(np.linalg.det(gm) - 1).max() < 1e-10
    assert gauge.big_gamma_scalar[0] == 0 and np.allclose(gm[0], np.eye(n))
    # the gauge-fixed frame reproduces the map
    assert np.abs(T.map_field(fixed) - M.embed(c).gamma_map).max() < 1e-10


def test_gauge_fix_of_parallel_frame_is_identity():
    s = _q()
    fr = T.integrate_frame(s)
    _, gauge = T.gauge_fix(fr)
    assert np.abs(gauge.g - np.eye(3)).max() < 1e-9


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("flow,order", [("nls", 2), ("mkdv", 3)])
def test_time_scales_between_representations(n, flow, order):
    al, q, frame, spin = closing_data(n, evolve_nls=0.2)
    d = H.flow_frame_data(order, q)
    w = al.embed_m(d.w_perp) + al.embed_h(d.w_par)
    psi = frame.psi
    t_t = psi @ (w @ al.A - al.A @ w) @ np.conj(np.swapaxes(psi, -1, -2)) / al.kappa
    ms = M.MapState(al.kappa * spin.t_field, spin.grid, al)
    spin_rhs = G.heisenberg_rhs(spin) if flow == "nls" else G.spin_mkdv_rhs(spin)
    map_rhs = M.schrodinger_map_rhs_matrix(ms) if flow == "nls" else M.map_mkdv_rhs(ms)
    assert np.abs(t_t - T.time_scale(flow, "spin", al) * spin_rhs).max() < 1e-6
    assert np.abs(al.kappa * t_t - T.time_scale(flow, "map", al) * map_rhs).max() < 1e-5
    h = al.embed_m(d.h_perp) + al.embed_h(d.h_par)
    g_t = psi @ h @ np.conj(np.swapaxes(psi, -1, -2))
    curve = T.curve_from_spin(spin)
    crhs = G.vfe_rhs(curve) if flow == "nls" else G.vfe_axial_rhs(curve)
    assert np.abs(g_t - T.time_scale(flow, "curve", al) * crhs).max() < 1e-6


def test_time_scale_rejects_unknown():
    with pytest.raises(ValueError):
        T.time_scale("kdv", "spin", CPN(1))


def test_equivalence_zero_data_passes():
    rep = T.equivalence_run(T.EquivalenceConfig(n=1, m_points=32), zero=True)
    assert rep["passed"]


def test_equivalence_small_run_and_sensitivity():
    cfg = T.EquivalenceConfig(n=1, m_points=64, t_final=0.1, dt=2e-3, refine=False)
    rep = T.equivalence_run(cfg)
    assert rep["passed"], rep.get("quantities")
    assert len(rep["config_hash"]) == 16
    strict = T.equivalence_run(T.EquivalenceConfig(n=1, m_points=64, t_final=0.1, dt=2e-3,
                                                   refine=False, tolerance=1e-14))
    assert not strict["passed"]
