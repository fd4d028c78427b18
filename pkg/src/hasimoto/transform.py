"""Moving frames and the passage between q, spin, curve and map variables.

A frame psi(x) in SU(N+1) solves psi_x = psi [q].  Then
    spin  T = Ad(psi) A / kappa,   map  gamma_map = Ad(psi) A,
    curve gamma = integral of T.
"""
from __future__ import annotations

import hashlib
import json
import time as _time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur

from .algebra import CPN
from .calculus import Grid, ZERO_MEAN, dx_inv, shift
from .errors import FrameError, HasimotoError
from .geometry import (CurveState, SpinState, curvature, evolve_curve, evolve_spin,
                       SPIN_H_SCALE, spectrum_deviation, spin_hamiltonian, sqnorm)
from . import hierarchy
from .hierarchy import HasimotoState
from .mapping import MapCoords, MapState, embed, evolve_map, map_hamiltonian, total_arclength


def _dag(x):
    return np.conj(np.swapaxes(x, -1, -2))


def polar_su(u):
    """Nearest special-unitary matrix (polar factor with determinant fixed)."""
    w, _, vh = np.linalg.svd(u)
    p = w @ vh
    det = np.linalg.det(p)
    n = p.shape[-1]
    return p / (det ** (1.0 / n))[..., None, None]


@dataclass
class FrameState:
    psi: np.ndarray
    grid: Grid
    algebra: CPN
    psi_end: np.ndarray = None
    meta: dict = field(default_factory=dict)

    @property
    def holonomy(self):
        """psi(L) psi(0)^{-1}; the identity when the frame closes."""
        if self.psi_end is None:
            return None
        return self.psi_end @ _dag(self.psi[0])

    @property
    def monodromy(self):
        """psi(0)^{-1} psi(L)."""
        if self.psi_end is None:
            return None
        return _dag(self.psi[0]) @ self.psi_end

    def unitarity_defect(self):
        eye = np.eye(self.algebra.size)
        u = np.max(np.abs(_dag(self.psi) @ self.psi - eye))
        d = np.max(np.abs(np.linalg.det(self.psi) - 1.0))
        return float(max(u, d))


@dataclass
class GaugeData:
    big_gamma_scalar: np.ndarray
    big_gamma_matrix: np.ndarray
    g: np.ndarray


# ----------------------------------------------------------------------
# frame integration

def _rk4_linear(y, a0, am, a1, h, right=True):
    """One RK4 step of y' = y a(x) (right) or y' = a(x) y (left)."""
    if right:
        f = lambda y_, a: y_ @ a
    else:
        f = lambda y_, a: a @ y_
    k1 = f(y, a0)
    k2 = f(y + 0.5 * h * k1, am)
    k3 = f(y + 0.5 * h * k2, am)
    k4 = f(y + h * k3, a1)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _march(samples, y0, h, nsub, right=True, project=polar_su):
    """March a linear matrix ODE across the grid.

    ``samples(j)`` returns the coefficient at x + j * h / (2 nsub) for all
    grid points at once.  Returns values at the grid points and at x = L.
    """
    m = samples(0).shape[0]
    coef = [samples(j) for j in range(2 * nsub + 1)]
    out = np.empty((m,) + y0.shape, dtype=complex)
    y = np.array(y0, dtype=complex)
    hs = h / nsub
    for i in range(m):
        out[i] = y
        for s in range(nsub):
            a0 = coef[2 * s][i]
            am = coef[2 * s + 1][i]
            a1 = coef[2 * s + 2][i]
            y = _rk4_linear(y, a0, am, a1, hs, right)
        y = project(y)
    return out, y


def integrate_frame(state: HasimotoState, psi0=None, substeps: int = 4,
                    unitarity_tol: float = 1e-6) -> FrameState:
    """Solve psi_x = psi [q] from psi(0) = psi0 with RK4 and polar projection."""
    al, grid = state.algebra, state.grid
    psi0 = np.eye(al.size, dtype=complex) if psi0 is None else np.asarray(psi0, dtype=complex)
    h = grid.spacing
    qm = al.embed_m(state.q)
    cache = {}

    def samples(j):
        if j not in cache:
            delta = j * h / (2 * substeps)
            cache[j] = qm if j == 0 else al.embed_m(shift(state.q, grid, delta))
        return cache[j]

    def project(y):
        defect = np.max(np.abs(_dag(y) @ y - np.eye(al.size)))
        if not np.isfinite(defect) or defect > unitarity_tol:
            raise FrameError("frame integration lost unitarity", float(defect))
        return polar_su(y)

    psi, end = _march(samples, psi0, h, substeps, right=True, project=project)
    return FrameState(psi, grid, al, end)


def _connection_parts(frame: FrameState):
    """Split psi = E(x) R(x) with E(x) = exp(x Xi / L), exp(Xi) the holonomy.

    For a frame of a periodic connection psi(x + L) = H psi(x), so R is
    periodic and smooth and can be differentiated spectrally.
    """
    grid = frame.grid
    hol = frame.holonomy
    # the holonomy is unitary, so its complex Schur form is diagonal
    tri, v = schur(hol, output="complex")
    mu = np.angle(np.diag(tri))
    L = grid.length

    def e_of(xs):
        ph = np.exp(1j * np.outer(xs, mu) / L)
        return (v[None] * ph[:, None, :]) @ _dag(v)[None]

    xi = (v * (1j * mu / L)[None, :]) @ _dag(v)
    r = _dag(e_of(grid.x)) @ frame.psi
    return r, xi


def connection(frame: FrameState):
    """psi^{-1} psi_x on the grid, also for frames with holonomy."""
    grid = frame.grid
    if frame.psi_end is None:
        psi = frame.psi
        return _dag(psi) @ grid.dx(psi)
    r, xi = _connection_parts(frame)
    return _dag(r) @ grid.dx(r) + _dag(r) @ xi @ r


def _connection_sampler(frame: FrameState, nsub: int):
    grid = frame.grid
    h = grid.spacing
    a = connection(frame)

    def samples(j):
        return a if j == 0 else shift(a, grid, j * h / (2 * nsub))

    return samples


def q_from_frame(frame: FrameState):
    """m-part of the connection; equals q for a parallel frame."""
    return frame.algebra.project_m(connection(frame))


def frame_residual(frame: FrameState, state: HasimotoState):
    """max |psi^{-1} psi_x - [q]| over the grid."""
    a = connection(frame)
    return float(np.max(np.abs(a - frame.algebra.embed_m(state.q))))


def gauge_fix(frame: FrameState, substeps: int = 4):
    """Right-multiply the frame by g(x) in H so that the h-part of the
    connection vanishes; g(0) = identity.

    Returns the gauge-fixed frame and the gauge data (Gamma, Gamma matrix)
    with g = diag(exp(i Gamma), exp(-i Gamma / N) Gamma_matrix).
    """
    al, grid = frame.algebra, frame.grid
    samp = _connection_sampler(frame, substeps)

    def hpart(j):
        a = samp(j)
        return al.embed_h(al.project_h(a))

    def project(y):
        return polar_su(y)

    g, g_end = _march(lambda j: -hpart(j), np.eye(al.size, dtype=complex), grid.spacing,
                      substeps, right=False, project=project)
    psi = frame.psi @ g
    end = frame.psi_end @ g_end
    gam = np.unwrap(np.angle(g[:, 0, 0]))
    gmat = np.exp(1j * gam / al.n)[:, None, None] * g[:, 1:, 1:]
    fixed = FrameState(psi, grid, al, end, meta={"gauge_initial": "Gamma(0)=0, Gamma_matrix(0)=I"})
    return fixed, GaugeData(gam, gmat, g)


def frame_from_coords(coords: MapCoords, algebra: CPN | None = None):
    """psi~ = exp_m(theta Theta), a (generally non-parallel) frame of the map."""
    al = algebra or CPN(coords.n)
    psi = al.exp_m(coords.theta[:, None] * coords.big_theta)
    return FrameState(psi, coords.grid, al, psi[0].copy())


def hasimoto_closed_form(coords: MapCoords, gauge: GaugeData):
    """q from (theta, Theta) and the gauge data Gamma, Gamma matrix."""
    grid = coords.grid
    n = coords.n
    th, big = coords.theta, coords.big_theta
    thx = grid.dx(th)
    bigx = grid.dx(big)
    phi = np.real(np.sum(np.conj(1j * bigx) * big, axis=-1))
    vec = (thx[:, None] * big + np.sin(th)[:, None] * bigx
           + (np.sin(th) * (1 - np.cos(th)) * phi)[:, None] * 1j * big)
    # Ad(g^{-1}) of an m-vector picks up the phase exp(-i(1 + 1/N) Gamma)
    ph = np.exp(-1j * (1 + 1.0 / n) * gauge.big_gamma_scalar)
    return ph[:, None] * np.einsum("xi,xij->xj", vec, gauge.big_gamma_matrix)


def hasimoto_from_map(coords: MapCoords, algebra: CPN | None = None, substeps: int = 4,
                      return_frame=False):
    """Hasimoto variable of the map with coordinates (theta, Theta).

    The q returned is the closed form evaluated with the numerically
    integrated gauge data; its agreement with the connection of the
    gauge-fixed frame is recorded in ``meta``.
    """
    al = algebra or CPN(coords.n)
    frame = frame_from_coords(coords, al)
    fixed, gauge = gauge_fix(frame, substeps)
    q = hasimoto_closed_form(coords, gauge)
    q_conn = al.project_m(_dag(gauge.g) @ connection(frame) @ gauge.g)
    state = HasimotoState(q, coords.grid, al, coords.time)
    info = {"closed_vs_connection": float(np.max(np.abs(q - q_conn))),
            "gauge_holonomy": fixed.psi_end @ _dag(fixed.psi[0])}
    if return_frame:
        return state, fixed, gauge, info
    return state


# ----------------------------------------------------------------------
# spin, map and curve from a frame

def map_field(frame: FrameState):
    al = frame.algebra
    return frame.psi @ al.A @ _dag(frame.psi)


def spin_field(frame: FrameState):
    return map_field(frame) / frame.algebra.kappa


def spin_from_q(state: HasimotoState, frame: FrameState | None = None) -> SpinState:
    frame = frame or integrate_frame(state)
    return SpinState(spin_field(frame), state.grid, state.algebra, state.time)


def map_from_q(state: HasimotoState, frame: FrameState | None = None) -> MapState:
    frame = frame or integrate_frame(state)
    return MapState(map_field(frame), state.grid, state.algebra, state.time)


def curve_from_spin(spin: SpinState, tol=1e-8) -> CurveState:
    """gamma = Dx^{-1} T; a nonzero mean tangent is kept as the slope."""
    t = spin.t_field
    mean = np.mean(t, axis=0)
    gamma = dx_inv(t - mean, spin.grid, ZERO_MEAN)
    c = CurveState(gamma, spin.grid, spin.algebra, slope=mean, time=spin.time)
    c.meta["open"] = bool(np.max(np.abs(mean)) > tol)
    return c


def curve_from_q(state: HasimotoState, frame: FrameState | None = None) -> CurveState:
    return curve_from_spin(spin_from_q(state, frame))


# ----------------------------------------------------------------------
# time scales between representations

# With q_t = efac R^n(Jq), the other variables move with the listed
# multiples of their own normalised right-hand sides.
def time_scale(flow: str, representation: str, algebra: CPN) -> float:
    ef = algebra.efac
    table = {
        "nls": {"q": 1.0, "spin": ef ** 1.5, "curve": ef ** 1.5, "map": ef},
        "mkdv": {"q": 1.0, "spin": ef, "curve": ef, "map": ef},
    }
    try:
        return table[flow][representation]
    except KeyError as err:
        raise ValueError(f"no time scale for flow {flow!r} / representation {representation!r}") from err


REP_FLOWS = {
    "nls": {"spin": "heisenberg", "curve": "vfe", "map": "schrodinger_map"},
    "mkdv": {"spin": "spin_mkdv", "curve": "vfe_axial", "map": "map_mkdv"},
}


# ----------------------------------------------------------------------
# equivalence run

@dataclass
class EquivalenceConfig:
    n: int = 1
    m_points: int = 256
    length: float = 2 * np.pi
    flow: str = "nls"
    t_final: float = 0.5
    dt: float = 1e-3
    theta0: float = 0.3
    amplitude: float = 0.25
    modes: tuple = (1, 2)
    phase_seed: int = 0
    tolerance: float = 1e-5
    dealias: bool = True
    refine: bool = True

    def as_dict(self):
        d = dict(self.__dict__)
        d["modes"] = list(self.modes)
        return d


def reference_coords(cfg: EquivalenceConfig, grid: Grid | None = None) -> MapCoords:
    """Smooth initial map with constant Theta, which makes the parallel
    frame close on the circle (no holonomy) and q periodic."""
    grid = grid or Grid(cfg.m_points, cfg.length)
    rng = np.random.default_rng(cfg.phase_seed)
    x = grid.x
    k0 = 2 * np.pi / grid.length
    th = np.full(grid.m_points, cfg.theta0)
    for j, k in enumerate(cfg.modes):
        th += cfg.amplitude / (j + 1) * np.sin(k * k0 * x + rng.uniform(0, 2 * np.pi))
    big = rng.standard_normal(cfg.n) + 1j * rng.standard_normal(cfg.n)
    big = np.broadcast_to(big / np.linalg.norm(big), (grid.m_points, cfg.n)).copy()
    return MapCoords(th, big, grid)


def _initial_representations(cfg: EquivalenceConfig, grid: Grid):
    al = CPN(cfg.n)
    coords = reference_coords(cfg, grid)
    qstate, fixed, gauge, info = hasimoto_from_map(coords, al, return_frame=True)
    ms = embed(coords, al)
    spin = SpinState(ms.gamma_map / al.kappa, grid, al)
    curve = curve_from_spin(spin)
    return al, qstate, spin, curve, ms, info


def _scalars(al, qs, spin, curve, ms):
    """Gauge-invariant scalar fields, all normalised to <q, q>_m."""
    grid = qs.grid
    out = {
        "q_norm": al.inner_m(qs.q, qs.q),
        "spin_norm": al.efac * sqnorm(al, spin.d(1)),
        "curve_norm": al.efac * curvature(curve, unit_tol=1e-4) ** 2,
        "map_norm": sqnorm(al, ms.d(1)),
    }
    del grid
    return out


def _hamiltonians(al, qs, spin, ms):
    """H_k of every representation, rescaled to the q-side normalisation."""
    out = {}
    for k in (1, 2, 3, 4):
        out[f"H{k}_q"] = hierarchy.hamiltonian(k, qs)
        out[f"H{k}_spin"] = spin_hamiltonian(k, spin) * SPIN_H_SCALE[k](al.efac)
    for k in (1, 2):
        out[f"H{k}_map"] = map_hamiltonian(k, ms)
    return out


def _run_once(cfg: EquivalenceConfig, m_points: int, dt: float):
    grid = Grid(m_points, cfg.length)
    al, qs, spin, curve, ms, info = _initial_representations(cfg, grid)
    h0 = _hamiltonians(al, qs, spin, ms)
    flow = cfg.flow
    reps = REP_FLOWS[flow]
    t = cfg.t_final
    qs1 = hierarchy.evolve(qs, flow, dt=dt, t_final=t, dealias=cfg.dealias)
    spin1 = evolve_spin(spin, reps["spin"], dt=dt, t_final=t,
                        time_scale=time_scale(flow, "spin", al), dealias=cfg.dealias)
    curve1 = evolve_curve(curve, reps["curve"], dt=dt, t_final=t,
                          time_scale=time_scale(flow, "curve", al), dealias=cfg.dealias)
    ms1 = evolve_map(ms, reps["map"], dt=dt, t_final=t,
                     time_scale=time_scale(flow, "map", al), dealias=cfg.dealias)
    sc = _scalars(al, qs1, spin1, curve1, ms1)
    h1 = _hamiltonians(al, qs1, spin1, ms1)
    disc = {}
    ref = sc["q_norm"]
    for key in ("spin_norm", "curve_norm", "map_norm"):
        disc[f"{key}_vs_q"] = float(np.max(np.abs(sc[key] - ref)))
    # direct field comparisons between gauge-invariant matrix variables
    disc["map_vs_spin"] = float(np.max(np.abs(ms1.gamma_map - al.kappa * spin1.t_field)))
    disc["curve_tangent_vs_spin"] = float(np.max(np.abs(curve1.d(1) - spin1.t_field)))
    for k in (1, 2, 3, 4):
        disc[f"H{k}_spin_vs_q"] = abs(h1[f"H{k}_spin"] - h1[f"H{k}_q"])
    for k in (1, 2):
        disc[f"H{k}_map_vs_q"] = abs(h1[f"H{k}_map"] - h1[f"H{k}_q"])
    for k in (1, 2, 3, 4):
        disc[f"H{k}_q_drift"] = abs(h1[f"H{k}_q"] - h0[f"H{k}_q"])
    disc["spin_spectrum"] = spectrum_deviation(al, spin1.t_field, 1.0 / al.kappa)
    disc["map_spectrum"] = spectrum_deviation(al, ms1.gamma_map)
    disc["curve_spectrum"] = spectrum_deviation(al, curve1.d(1), 1.0 / al.kappa)
    extra = {"hasimoto_closed_vs_connection": info["closed_vs_connection"],
             "arclength_map": total_arclength(ms1),
             "hamiltonians_initial": h0, "hamiltonians_final": h1}
    return disc, extra


def config_hash(d: dict) -> str:
    blob = json.dumps(d, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def equivalence_run(cfg: EquivalenceConfig | None = None, zero=False) -> dict:
    """Evolve one initial condition as q, spin, curve and map and compare
    gauge-invariant quantities at the final time.

    With ``cfg.refine`` a second run at (dt/2, 2m) gives the observed
    self-convergence order of every discrepancy.  Discrepancies already
    below ``floor`` on the coarse run are reported as converged.
    """
    cfg = cfg or EquivalenceConfig()
    report = {"config": cfg.as_dict(), "config_hash": config_hash(cfg.as_dict()),
              "seeds": {"phase_seed": cfg.phase_seed},
              "gauge_initial_data": "Gamma(0)=0, Gamma_matrix(0)=I",
              "tolerance": cfg.tolerance}
    if zero:
        report.update(discrepancies={}, passed=True, note="zero data")
        return report
    t0 = _time.time()
    try:
        disc, extra = _run_once(cfg, cfg.m_points, cfg.dt)
    except HasimotoError as err:
        report.update(passed=False, failure=f"{type(err).__name__}: {err}")
        return report
    floor = 1e-9
    quantities = {}
    for key, val in disc.items():
        tol = cfg.tolerance
        quantities[key] = {"max": float(val), "tolerance": tol, "pass": bool(val <= tol)}
    report["extra"] = {k: v for k, v in extra.items()}
    if cfg.refine:
        try:
            disc2, _ = _run_once(cfg, 2 * cfg.m_points, cfg.dt / 2)
        except HasimotoError as err:
            report.update(passed=False, failure=f"refined run: {type(err).__name__}: {err}")
            return report
        for key, val in disc2.items():
            coarse = disc[key]
            entry = quantities[key]
            entry["refined"] = float(val)
            if coarse <= floor and val <= floor:
                entry["order"] = None
                entry["converged"] = True
            else:
                entry["order"] = float(np.log2(coarse / max(val, 1e-300)))
                entry["converged"] = bool(entry["order"] >= 2.0)
            entry["pass"] = entry["pass"] and entry["converged"] and val <= cfg.tolerance
    report["quantities"] = quantities
    report["passed"] = bool(all(q["pass"] for q in quantities.values()))
    report["runtime_seconds"] = _time.time() - t0
    return report
