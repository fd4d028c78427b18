"""Schrodinger maps into CP^N, realised on the adjoint orbit of A.

The production path works with the matrix gamma_map = Ad(psi) A.  The
(theta, Theta) chart is kept as a validation path; it is singular where
sin(2 theta) vanishes.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .algebra import CPN
from .calculus import Grid, quadrature
from .errors import DimensionError, FrameError, SingularityError
from .geometry import metric, spectrum_deviation, sqnorm
from .timestep import integrate, step_rk4, substeps_for

log = logging.getLogger(__name__)


def _comm(x, y):
    return x @ y - y @ x


@dataclass
class MapCoords:
    theta: np.ndarray
    big_theta: np.ndarray
    grid: Grid
    time: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.big_theta = np.asarray(self.big_theta, dtype=complex)
        if self.big_theta.ndim != 2 or self.big_theta.shape[0] != self.grid.m_points:
            raise DimensionError("Theta must have shape (m_points, N)")
        if self.theta.shape != (self.grid.m_points,):
            raise DimensionError("theta must have shape (m_points,)")

    @property
    def n(self):
        return self.big_theta.shape[1]

    def norm_defect(self):
        return float(np.max(np.abs(np.linalg.norm(self.big_theta, axis=1) - 1.0)))


@dataclass
class MapState:
    gamma_map: np.ndarray
    grid: Grid
    algebra: CPN
    time: float = 0.0

    def __post_init__(self):
        self.gamma_map = np.asarray(self.gamma_map, dtype=complex)
        s = self.algebra.size
        if self.gamma_map.shape != (self.grid.m_points, s, s):
            raise DimensionError(f"map must have shape ({self.grid.m_points}, {s}, {s})")

    def d(self, order=1):
        return self.grid.dx(self.gamma_map, order)

    def with_map(self, g, time=None):
        return replace(self, gamma_map=g, time=self.time if time is None else time)


def embed(coords: MapCoords, algebra: CPN | None = None, tol=1e-8) -> MapState:
    """Ad(exp_m(theta Theta)) A in closed form."""
    al = algebra or CPN(coords.n)
    if al.n != coords.n:
        raise DimensionError(f"coordinates have N={coords.n} but the algebra has N={al.n}")
    dev = coords.norm_defect()
    if dev > tol:
        raise FrameError("Theta is not unit norm", dev)
    th, big = coords.theta, coords.big_theta
    s2 = np.sin(th) ** 2
    outer = np.conj(big)[:, :, None] * big[:, None, :]
    blk = al.a_block + 1j * s2[:, None, None] * outer
    vec = -0.5 * np.sin(2 * th)[:, None] * 1j * big
    g = al.embed_h(blk) + al.embed_m(vec)
    return MapState(g, coords.grid, al, coords.time)


def tangent_projection(ms: MapState, x):
    """Orthogonal projection onto the tangent space of the orbit, -ad(gamma)^2."""
    g = ms.gamma_map
    return -_comm(g, _comm(g, x))


def check_frame(ms: MapState, frame, tol=1e-8):
    g = frame.psi @ ms.algebra.A @ np.conj(np.swapaxes(frame.psi, -1, -2))
    dev = float(np.max(np.abs(g - ms.gamma_map)))
    if dev > tol:
        raise FrameError("frame is inconsistent with the map", dev)


def schrodinger_map_rhs_matrix(ms: MapState):
    """-[gamma, gamma_xx]."""
    return -_comm(ms.gamma_map, ms.d(2))


def map_mkdv_rhs(ms: MapState, frame=None, tol=1e-8):
    """-(nabla_x)^2 gamma_x + 1/2 ad(J gamma_x)^2 gamma_x.

    Covariant derivatives are tangential projections of flat derivatives.
    If a frame is given it is only checked for consistency.
    """
    if frame is not None:
        check_frame(ms, frame, tol)
    g = ms.gamma_map
    y = ms.d(1)
    grid = ms.grid
    ny = tangent_projection(ms, grid.dx(y))
    nny = tangent_projection(ms, grid.dx(ny))
    jy = _comm(g, y)
    return -nny + 0.5 * _comm(jy, _comm(jy, y))


def covariant_dx(ms: MapState, v):
    return tangent_projection(ms, ms.grid.dx(v))


def total_arclength(ms: MapState) -> float:
    al = ms.algebra
    return float(quadrature(np.sqrt(np.maximum(sqnorm(al, ms.d(1)), 0.0)), ms.grid))


def local_stretch(ms: MapState, rhs):
    """d/dt g(gamma_x, gamma_x) for the motion gamma_t = rhs."""
    return 2 * metric(ms.algebra, ms.d(1), ms.grid.dx(rhs))


def map_hamiltonian_density(k: int, ms: MapState):
    al = ms.algebra
    y = ms.d(1)
    if k == 1:
        return 0.5 * sqnorm(al, y)
    if k == 2:
        return 0.5 * metric(al, covariant_dx(ms, y), _comm(ms.gamma_map, y))
    raise ValueError("map Hamiltonians are implemented for k = 1, 2 only")


def map_hamiltonian(k: int, ms: MapState) -> float:
    return float(quadrature(map_hamiltonian_density(k, ms), ms.grid))


def map_spectrum_deviation(ms: MapState):
    return spectrum_deviation(ms.algebra, ms.gamma_map)


# ----------------------------------------------------------------------
# (theta, Theta) chart

def _phi(big, big_x):
    """<i Theta_x, Theta> for the real inner product Re(conj(a).b)."""
    return np.real(np.sum(np.conj(1j * big_x) * big, axis=-1))


def check_margin(coords: MapCoords, margin: float):
    th = coords.theta
    dist = np.min(np.abs(th[:, None] - np.array([0.0, np.pi / 2, np.pi])[None, :]), axis=1)
    i = int(np.argmin(dist))
    if dist[i] < margin:
        raise SingularityError(float(coords.grid.x[i]), float(th[i]), margin)


def coord_evolution_rhs(coords: MapCoords, theta_margin: float = 0.1, form: str = "closed"):
    """(theta_t, Theta_t) of the Schrodinger map in the (theta, Theta) chart.

    form='closed' evaluates the explicit expressions in sec(2 theta) and
    csc(2 theta); form='derived' instead splits the m-part of the
    conservation law gamma_t = -([gamma, gamma_x])_x into its component
    along i Theta and the rest.  Both agree with the matrix equation.
    """
    check_margin(coords, theta_margin)
    grid = coords.grid
    th, big = coords.theta, coords.big_theta
    thx = grid.dx(th)
    bigx = grid.dx(big)
    phi = _phi(big, bigx)
    s2, c2 = np.sin(2 * th), np.cos(2 * th)
    if form == "closed":
        theta_t = -(thx * phi + grid.dx(0.5 * s2 * c2 * phi)) / c2
        ibig_t = (2 / s2)[:, None] * (
            (thx * phi)[:, None] * 1j * big
            - (0.5 * s2 * c2 * phi)[:, None] * 1j * bigx
            + grid.dx((0.5 * s2 * phi)[:, None] * 1j * big)
            + grid.dx(thx[:, None] * big + (0.5 * s2)[:, None] * bigx)
        )
        return theta_t, -1j * ibig_t
    if form != "derived":
        raise ValueError(f"unknown coordinate form {form!r}")
    # m-part of [gamma, gamma_x] for gamma = embed(theta, Theta), then the
    # m-part of the conservation law reads
    #   cos(2 th) th_t i Theta + 1/2 sin(2 th) i Theta_t = (F)_x
    al = CPN(coords.n)
    ms = embed(coords, al, tol=1e-6)
    flux = al.project_m(_comm(ms.gamma_map, ms.d(1)))
    r = grid.dx(flux)
    along = np.real(np.sum(np.conj(1j * big) * r, axis=-1))
    theta_t = along / c2
    ibig_t = (2 / s2)[:, None] * (r - (c2 * theta_t)[:, None] * 1j * big)
    return theta_t, -1j * ibig_t


def stereographic(coords: MapCoords):
    """s = sin(theta) Theta."""
    return np.sin(coords.theta)[:, None] * coords.big_theta


def inverse_stereographic(s, grid: Grid, upper=False):
    """Recover (theta, Theta) from s; ``upper`` picks theta in [pi/2, pi]."""
    s = np.asarray(s, dtype=complex)
    r = np.linalg.norm(s, axis=1)
    th = np.arcsin(np.clip(r, 0.0, 1.0))
    if upper:
        th = np.pi - th
    big = np.zeros_like(s)
    nz = r > 0
    big[nz] = s[nz] / r[nz, None]
    big[~nz, 0] = 1.0
    return MapCoords(th, big, grid)


# ----------------------------------------------------------------------
# evolution

MAP_FLOWS = {
    "schrodinger_map": (lambda ms, frame=None: schrodinger_map_rhs_matrix(ms), 2),
    "map_mkdv": (map_mkdv_rhs, 3),
}


def evolve_map(ms: MapState, flow="schrodinger_map", dt=2e-4, t_final=1.0, time_scale=1.0,
               dealias=True, callback=None, every=1):
    fn, order = MAP_FLOWS[flow]
    grid = ms.grid
    nsub = substeps_for(grid, dt, order, speed=time_scale)

    def rhs(g):
        r = time_scale * fn(ms.with_map(g))
        return grid.dealias(r) if dealias else r

    def step(g, h, tm):
        for _ in range(nsub):
            g = step_rk4(g, rhs, h / nsub, tm)
        return g

    cb = None
    if callback is not None:
        def cb(tm, g):
            callback(ms.with_map(g, tm))
    g, tm = integrate(ms.gamma_map, step, dt, t_final, t0=ms.time, callback=cb, every=every)
    return ms.with_map(g, tm)


def evolve_coords(coords: MapCoords, dt=1e-4, t_final=0.2, theta_margin=0.1, form="closed",
                  dealias=True, callback=None, every=1):
    """RK4 in the (theta, Theta) chart with Theta renormalised after each step.

    The removed radial component is accumulated in ``meta['radial_removed']``.
    """
    grid = coords.grid
    n = coords.n
    removed = [0.0]

    def pack(th, big):
        return np.concatenate([th[:, None].astype(complex), big], axis=1)

    def unpack(y):
        return np.real(y[:, 0]), y[:, 1:]

    def rhs(y):
        th, big = unpack(y)
        big = big / np.linalg.norm(big, axis=1)[:, None]
        tt, bt = coord_evolution_rhs(MapCoords(th, big, grid), theta_margin, form)
        # keep only the part tangent to the unit sphere
        bt = bt - np.real(np.sum(np.conj(big) * bt, axis=1))[:, None] * big
        out = pack(tt, bt)
        return grid.dealias(out) if dealias else out

    nsub = substeps_for(grid, dt, 2)

    def step(y, h, tm):
        for _ in range(nsub):
            y = step_rk4(y, rhs, h / nsub, tm)
        th, big = unpack(y)
        nrm = np.linalg.norm(big, axis=1)
        removed[0] = max(removed[0], float(np.max(np.abs(nrm - 1.0))))
        return pack(th, big / nrm[:, None])

    cb = None
    if callback is not None:
        def cb(tm, y):
            callback(MapCoords(*unpack(y), grid, tm))
    y, tm = integrate(pack(coords.theta, coords.big_theta), step, dt, t_final, t0=coords.time,
                      callback=cb, every=every)
    th, big = unpack(y)
    if removed[0] > 0:
        log.info("coordinate evolution removed radial Theta component up to %.3e", removed[0])
    out = MapCoords(th, big, grid, tm, meta={"radial_removed": removed[0]})
    assert out.n == n
    return out


def random_coords(n: int, grid: Grid, seed=0, kmax: int = 2, amplitude: float = 0.2,
                  theta0: float = 0.6) -> MapCoords:
    """Smooth periodic chart data: theta = theta0 + band-limited noise and
    Theta a normalised perturbation of a random constant unit vector."""
    rng = np.random.default_rng(seed)
    x = grid.x
    k0 = 2 * np.pi / grid.length
    th = np.full(grid.m_points, float(theta0))
    big = np.broadcast_to(rng.standard_normal(n) + 1j * rng.standard_normal(n), (grid.m_points, n)).copy()
    for k in range(1, kmax + 1):
        th += amplitude / k * np.sin(k * k0 * x + rng.uniform(0, 2 * np.pi))
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        big += (amplitude / k) * np.cos(k * k0 * x + rng.uniform(0, 2 * np.pi))[:, None] * v[None, :]
    big /= np.linalg.norm(big, axis=1)[:, None]
    return MapCoords(th, big, grid)
