"""Curve flows and spin models in su(N+1).

The metric on the algebra is g(X, Y) = -Killing(X, Y).  A spin field T
has g(T, T) = 1 and lies on the adjoint orbit of A / kappa; a curve
gamma is arclength parametrised with tangent gamma_x = T.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .algebra import CPN
from .calculus import Grid, quadrature
from .errors import DimensionError, FrameError
from .timestep import integrate, step_rk4, substeps_for


def _comm(x, y):
    return x @ y - y @ x


@dataclass
class SpinState:
    t_field: np.ndarray
    grid: Grid
    algebra: CPN
    time: float = 0.0

    def __post_init__(self):
        self.t_field = np.asarray(self.t_field, dtype=complex)
        s = self.algebra.size
        if self.t_field.shape != (self.grid.m_points, s, s):
            raise DimensionError(f"spin field must have shape ({self.grid.m_points}, {s}, {s})")

    def d(self, order=1):
        return self.grid.dx(self.t_field, order)

    def with_field(self, t_field, time=None):
        return replace(self, t_field=t_field, time=self.time if time is None else time)


@dataclass
class CurveState:
    """Curve gamma(x) = slope * x + gamma (the stored part is periodic).

    A nonzero ``slope`` is the mean tangent; such a curve does not close
    on the periodic domain and is kept on the covering line.
    """

    gamma: np.ndarray
    grid: Grid
    algebra: CPN
    slope: np.ndarray = None
    time: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=complex)
        s = self.algebra.size
        if self.gamma.shape != (self.grid.m_points, s, s):
            raise DimensionError(f"curve must have shape ({self.grid.m_points}, {s}, {s})")
        if self.slope is None:
            self.slope = np.zeros((s, s), dtype=complex)

    @property
    def is_open(self):
        return bool(np.max(np.abs(self.slope)) > 1e-8)

    def d(self, order=1):
        out = self.grid.dx(self.gamma, order)
        if order == 1:
            out = out + self.slope
        return out

    def full(self):
        """Curve samples including the linear part."""
        return self.gamma + self.grid.x[:, None, None] * self.slope

    def with_gamma(self, gamma, time=None):
        return replace(self, gamma=gamma, time=self.time if time is None else time)


def metric(algebra: CPN, x, y):
    return -algebra.killing(x, y)


def sqnorm(algebra: CPN, x):
    return -algebra.killing(x, x)


# ----------------------------------------------------------------------
# right-hand sides

def vfe_rhs(c: CurveState):
    """-[gamma_x, gamma_xx]."""
    return -_comm(c.d(1), c.d(2))


def vfe_axial_rhs(c: CurveState):
    """-gamma_xxx + 3/2 efac [gamma_xx, [gamma_xx, gamma_x]]."""
    g1, g2, g3 = c.d(1), c.d(2), c.d(3)
    return -g3 + 1.5 * c.algebra.efac * _comm(g2, _comm(g2, g1))


def heisenberg_rhs(spin: SpinState):
    """-[T, T_xx]."""
    return -_comm(spin.t_field, spin.d(2))


def spin_mkdv_rhs(spin: SpinState):
    """-T_xxx + 3/2 efac ([T_x, [T_x, T]])_x, the x-derivative of the axial curve flow."""
    t, t1 = spin.t_field, spin.d(1)
    return -spin.d(3) + 1.5 * spin.algebra.efac * spin.grid.dx(_comm(t1, _comm(t1, t)))


# ----------------------------------------------------------------------
# conserved quantities and Frenet data

# H_k(q) = SPIN_H_SCALE[k](efac) * H_k(T) for the spin built from q
SPIN_H_SCALE = {1: lambda e: e, 2: lambda e: e ** 1.5, 3: lambda e: e, 4: lambda e: e ** 1.5}


def spin_hamiltonian_density(k: int, spin: SpinState):
    al = spin.algebra
    ef = al.efac
    t, t1, t2 = spin.t_field, spin.d(1), spin.d(2)
    if k == 1:
        return 0.5 * sqnorm(al, t1)
    if k == 2:
        return 0.5 * metric(al, t2, _comm(t, t1))
    if k == 3:
        c = _comm(t1, _comm(t1, t))
        return 0.5 * sqnorm(al, t2) - 0.625 * ef ** 2 * sqnorm(al, c)
    if k == 4:
        t3 = spin.d(3)
        c = _comm(t1, _comm(t1, t))
        return 0.5 * metric(al, _comm(t, t2), t3) + 0.875 * ef * metric(al, c, _comm(t1, t2))
    raise ValueError(f"spin Hamiltonian index must be 1..4, got {k}")


def spin_hamiltonian(k: int, spin: SpinState) -> float:
    return float(quadrature(spin_hamiltonian_density(k, spin), spin.grid))


def spin_norm_drift(spin: SpinState):
    """max |sqrt(g(T, T)) - 1| over the grid."""
    return float(np.max(np.abs(np.sqrt(sqnorm(spin.algebra, spin.t_field)) - 1.0)))


def orbit_spectrum(algebra: CPN, scale=1.0):
    """Sorted eigenvalues of -i * scale * A."""
    return np.sort(np.real(np.diag(-1j * scale * algebra.A)))


def spectrum_deviation(algebra: CPN, field_values, scale=1.0):
    """Pointwise max deviation of the spectrum of -i X from that of -i scale A."""
    h = -1j * field_values
    h = 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
    ev = np.linalg.eigvalsh(h)
    return float(np.max(np.abs(ev - orbit_spectrum(algebra, scale))))


@dataclass
class Frenet:
    kappa: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    binormal: np.ndarray
    undefined: np.ndarray


def curvature(c: CurveState, kappa_min: float = 1e-8, frenet: bool = False, unit_tol=1e-6):
    """Curvature |T_x| of an arclength-parametrised curve.

    With ``frenet=True`` a :class:`Frenet` record is returned; N and B are
    set to zero and flagged where the curvature falls below ``kappa_min``.
    B = ad(T)^{-1} N, which on the normal space equals -efac ad(T) N.
    """
    al = c.algebra
    t = c.d(1)
    dev = np.max(np.abs(np.sqrt(sqnorm(al, t)) - 1.0))
    if dev > unit_tol:
        raise FrameError("curve is not arclength parametrised", dev)
    tx = c.grid.dx(t)
    kap = np.sqrt(np.maximum(sqnorm(al, tx), 0.0))
    if not frenet:
        return kap
    bad = kap < kappa_min
    safe = np.where(bad, 1.0, kap)
    nrm = np.where(bad[:, None, None], 0.0, tx / safe[:, None, None])
    bin_ = -al.efac * _comm(t, nrm)
    return Frenet(kap, t, nrm, bin_, bad)


def ad_t_inverse(spin: SpinState, x):
    """ad(T)^{-1} on the tangent space of the orbit, -efac ad(T)."""
    return -spin.algebra.efac * _comm(spin.t_field, x)


def spin_recursion(spin: SpinState, frame, p, tol=1e-8):
    """Recursion operator on spin-side vectors via frame conjugation.

    p is pulled back with Ad(psi^{-1}), its m-part is fed to the
    q-side recursion operator and the result is pushed forward again,
    with the factor kappa that makes R_T(T_x) = ad(T)^{-1} T_xx.
    """
    from . import hierarchy, transform

    al = spin.algebra
    psi = frame.psi
    expected = transform.spin_field(frame)
    dev = float(np.max(np.abs(expected - spin.t_field)))
    if dev > tol:
        raise FrameError("frame is inconsistent with the spin field", dev)
    if frame.psi_end is not None:
        hol = frame.holonomy
        gap = float(np.max(np.abs(hol - hol[0, 0] * np.eye(al.size))))
        if gap > tol:
            raise FrameError("frame does not close on the circle; spin and q cannot both be periodic", gap)
    qstate = hierarchy.HasimotoState(transform.q_from_frame(frame), spin.grid, al)
    pulled = al.project_m(np.conj(np.swapaxes(psi, -1, -2)) @ p @ psi)
    r = hierarchy.recursion_apply(qstate, pulled)
    return al.kappa * (psi @ al.embed_m(r) @ np.conj(np.swapaxes(psi, -1, -2)))


# ----------------------------------------------------------------------
# evolution

SPIN_FLOWS = {"heisenberg": (heisenberg_rhs, 2), "spin_mkdv": (spin_mkdv_rhs, 3)}
CURVE_FLOWS = {"vfe": (vfe_rhs, 2), "vfe_axial": (vfe_axial_rhs, 3)}


def _speed(al, order):
    # largest linearised frequency factor for unit-norm T
    return 1.0 / al.kappa if order == 2 else 1.0


def evolve_spin(spin: SpinState, flow="heisenberg", dt=2e-4, t_final=1.0, time_scale=1.0,
                dealias=True, project=False, callback=None, every=1):
    """RK4 evolution of T_t = time_scale * rhs(T) with automatic substeps."""
    fn, order = SPIN_FLOWS[flow]
    al, grid = spin.algebra, spin.grid
    nsub = substeps_for(grid, dt, order, speed=time_scale * _speed(al, order))

    def rhs(t):
        r = time_scale * fn(spin.with_field(t))
        return grid.dealias(r) if dealias else r

    def step(t, h, tm):
        for _ in range(nsub):
            t = step_rk4(t, rhs, h / nsub, tm)
        if project:
            t = t / np.sqrt(sqnorm(al, t))[:, None, None]
        return t

    cb = None
    if callback is not None:
        def cb(tm, t):
            callback(spin.with_field(t, tm))
    t, tm = integrate(spin.t_field, step, dt, t_final, t0=spin.time, callback=cb, every=every)
    return spin.with_field(t, tm)


def evolve_curve(curve: CurveState, flow="vfe", dt=2e-4, t_final=1.0, time_scale=1.0,
                 dealias=True, callback=None, every=1):
    """RK4 evolution of the periodic part of a curve; the slope is constant."""
    fn, order = CURVE_FLOWS[flow]
    al, grid = curve.algebra, curve.grid
    nsub = substeps_for(grid, dt, order, speed=time_scale * _speed(al, order))

    def rhs(g):
        r = time_scale * fn(curve.with_gamma(g))
        return grid.dealias(r) if dealias else r

    def step(g, h, tm):
        for _ in range(nsub):
            g = step_rk4(g, rhs, h / nsub, tm)
        return g

    cb = None
    if callback is not None:
        def cb(tm, g):
            callback(curve.with_gamma(g, tm))
    g, tm = integrate(curve.gamma, step, dt, t_final, t0=curve.time, callback=cb, every=every)
    return curve.with_gamma(g, tm)


def random_spin(algebra: CPN, grid: Grid, seed=0, kmax: int = 3, amplitude: float = 0.5) -> SpinState:
    """Generic smooth periodic spin field T = Ad(exp X) A / kappa.

    X is a band-limited su(N+1)-valued field with modes |k| <= kmax and
    sup norm ``amplitude`` in the coordinate basis.
    """
    from scipy.linalg import expm

    rng = np.random.default_rng(seed)
    dim = algebra.basis.shape[0]
    m = grid.m_points
    spec = np.zeros((m, dim), dtype=complex)
    idx = np.r_[0:kmax + 1, m - kmax:m]
    spec[idx] = rng.standard_normal((idx.size, dim)) + 1j * rng.standard_normal((idx.size, dim))
    c = np.real(np.fft.ifft(spec, axis=0))
    c *= amplitude / max(np.max(np.abs(c)), 1e-300)
    g = expm(algebra.from_coords(c))
    t = g @ algebra.A @ np.conj(np.swapaxes(g, -1, -2)) / algebra.kappa
    return SpinState(t, grid, algebra)
