"""Isospectral flows on the Hasimoto variable q.

Covers the Hamiltonian operators H and J, the recursion operator
R = H J^{-1}, the NLS and mKdV right-hand sides, the Hamiltonians
H1..H4, the zero-curvature residual and the flow frame data.

The flow time is normalised so that the n-th flow reads
q_t = efac * R^n(Jq).  Lax and resolvent constructions use the rescaled
variables Q = -kappa q and s = x / kappa with kappa = sqrt(efac); all of
them go through :func:`q_to_Q`.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .algebra import CPN
from .calculus import Grid, ZERO_MEAN, as_policy, dx_inv, quadrature
from .errors import DimensionError
from .timestep import integrate, step_ifrk4, step_rk4, substeps_for


@dataclass
class HasimotoState:
    q: np.ndarray
    grid: Grid
    algebra: CPN
    time: float = 0.0

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=complex)
        if self.q.shape != (self.grid.m_points, self.algebra.n):
            raise DimensionError(
                f"q must have shape ({self.grid.m_points}, {self.algebra.n}), got {self.q.shape}"
            )
        if not np.all(np.isfinite(self.q)):
            raise ValueError("q contains non-finite values")

    def d(self, order=1):
        return self.grid.dx(self.q, order)

    def with_q(self, q, time=None):
        return replace(self, q=q, time=self.time if time is None else time)


@dataclass
class LaxPair:
    u: np.ndarray
    v: np.ndarray
    lam: float


@dataclass
class FlowFrameData:
    h_perp: np.ndarray
    h_par: np.ndarray
    w_perp: np.ndarray
    w_par: np.ndarray


def q_to_Q(q, algebra: CPN):
    """Rescaled Lax variable Q = -kappa q (with d/ds = kappa d/dx)."""
    return -algebra.kappa * np.asarray(q)


def Q_to_q(Q, algebra: CPN):
    return -np.asarray(Q) / algebra.kappa


def _ad_q(al, q, b):
    """[q, B] for an m-field q and h-field B, as an m-field."""
    return -al.bracket_hm(b, q)


# ----------------------------------------------------------------------
# Hamiltonian and recursion operators

def hop_apply(state: HasimotoState, v, policy=ZERO_MEAN, offset=None, tol=1e-8):
    """H(v) = v_x - ad(q) Dx^{-1}(ad(q) v).

    ``offset`` is an optional constant h-block added to the primitive,
    on top of whatever the policy produces.
    """
    al, grid = state.algebra, state.grid
    v = np.asarray(v, dtype=complex)
    integrand = al.bracket_mm(state.q, v)
    prim = dx_inv(integrand, grid, as_policy(policy), a_element=al.a_block, tol=tol)
    if offset is not None:
        prim = prim + offset
    return grid.dx(v) - _ad_q(al, state.q, prim)


def recursion_apply(state: HasimotoState, v, policy=ZERO_MEAN, offset=None, tol=1e-8):
    """R(v) = H(J^{-1} v)."""
    return hop_apply(state, state.algebra.j_inv(v), policy, offset, tol)


def nls_primitive(state: HasimotoState):
    """Local primitive 1/2 [q, Jq] selected by the NLS flow."""
    al = state.algebra
    return 0.5 * al.bracket_mm(state.q, al.j_apply(state.q))


def mkdv_primitive(state: HasimotoState):
    """Local primitive [q, q_x] selected by the mKdV flow."""
    return state.algebra.bracket_mm(state.q, state.d(1))


def nls_correction(state: HasimotoState):
    """ad(q) mean(1/2 [q, Jq]); R^2(Jq) + this = nls_rhs / efac."""
    m = np.mean(nls_primitive(state), axis=0)
    return _ad_q(state.algebra, state.q, np.broadcast_to(m, (state.grid.m_points,) + m.shape))


def mkdv_correction(state: HasimotoState):
    """ad(q) mean([q, q_x]); R(nls_rhs / efac) + this = mkdv_rhs / efac."""
    m = np.mean(mkdv_primitive(state), axis=0)
    return _ad_q(state.algebra, state.q, np.broadcast_to(m, (state.grid.m_points,) + m.shape))


def recursion_power(state: HasimotoState, n: int, corrected=True):
    """R^n(Jq) by repeated application of the recursion operator.

    With ``corrected`` the zero-mean primitive at stages 2 and 3 is
    shifted by the mean of the local primitive, so the output coincides
    with the local flow.  Higher stages are returned as computed.
    """
    al = state.algebra
    v = al.j_apply(state.q)
    for k in range(1, n + 1):
        v = recursion_apply(state, v)
        if corrected and k == 2:
            v = v + nls_correction(state)
        elif corrected and k == 3:
            v = v + mkdv_correction(state)
    return v


# ----------------------------------------------------------------------
# flows

def nls_rhs(state: HasimotoState):
    """efac (-i q_xx - 2 i |q|^2 q)."""
    q = state.q
    mod2 = np.sum(np.abs(q) ** 2, axis=-1, keepdims=True)
    return state.algebra.efac * (-1j * state.d(2) - 2j * mod2 * q)


def nls_rhs_lie(state: HasimotoState):
    """efac (-J q_xx + 1/2 ad(q)^2 Jq)."""
    al, q = state.algebra, state.q
    return al.efac * (-al.j_apply(state.d(2)) + 0.5 * al.ad_squared_m(q, al.j_apply(q)))


def mkdv_rhs(state: HasimotoState):
    """efac (-q_xxx - 3 |q|^2 q_x - 3 (q_x . conj q) q)."""
    q = state.q
    qx = state.d(1)
    mod2 = np.sum(np.abs(q) ** 2, axis=-1, keepdims=True)
    cross = np.sum(qx * np.conj(q), axis=-1, keepdims=True)
    return state.algebra.efac * (-state.d(3) - 3 * mod2 * qx - 3 * cross * q)


def mkdv_rhs_lie(state: HasimotoState):
    """efac (-q_xxx + ad(q)^2 q_x + 1/2 (ad(Jq)^2 q)_x)."""
    al, q = state.algebra, state.q
    cubic = al.ad_squared_m(al.j_apply(q), q)
    return al.efac * (
        -state.d(3) + al.ad_squared_m(q, state.d(1)) + 0.5 * state.grid.dx(cubic)
    )


def resolvent_coefficients(state: HasimotoState, kmax: int):
    """Local coefficients W_0..W_kmax of the formal resolvent.

    W = sum_k W_k lam^{-k} solves W_s = [lam A + Q, W] with W_0 = A and
    stays on the adjoint orbit of A, so (W - a)(W - b) = 0 where a and b
    are the two eigenvalues of A.  The m-parts follow from the s-equation
    and the h-parts algebraically from the quadratic relation, which
    avoids every constant of integration.  Returns lists of m-fields and
    h-fields in the (Q, s) variables.
    """
    al, grid = state.algebra, state.grid
    kap = al.kappa
    Q = q_to_Q(state.q, al)
    mp = grid.m_points
    wm = [np.zeros((mp, al.n), dtype=complex)]
    wh = [np.broadcast_to(al.a_block, (mp, al.n, al.n)).astype(complex)]
    full = [al.embed_h(wh[0])]
    gap = 1j  # a - b for A = diag(iN/(N+1), -i/(N+1) I)
    for k in range(kmax):
        rhs = kap * grid.dx(wm[k]) + al.bracket_hm(wh[k], Q)
        m_next = al.j_inv(rhs)
        s = np.zeros((mp, al.size, al.size), dtype=complex)
        for j in range(1, k + 1):
            s += full[j] @ full[k + 1 - j]
        h_next = s[:, 1:, 1:] / gap
        wm.append(m_next)
        wh.append(h_next)
        full.append(al.embed_m(m_next) + al.embed_h(h_next))
    return wm, wh


def local_flow(n: int, state: HasimotoState):
    """efac R^n(Jq) with the local primitives produced by the resolvent."""
    al = state.algebra
    wm, _ = resolvent_coefficients(state, n + 1)
    return -al.kappa ** (1 - n) * al.j_apply(wm[n + 1])


def flow_rhs(n: int, state: HasimotoState, max_n: int = 5):
    """Right-hand side of the n-th flow, q_t = efac R^n(Jq)."""
    n = int(n)
    if n < 0 or n > max_n:
        raise ValueError(f"flow index must lie in [0, {max_n}], got {n}")
    al = state.algebra
    if n == 0:
        return al.efac * al.j_apply(state.q)
    if n == 1:
        return al.efac * state.d(1)
    if n == 2:
        return nls_rhs(state)
    if n == 3:
        return mkdv_rhs(state)
    return local_flow(n, state)


# ----------------------------------------------------------------------
# Hamiltonians

def hamiltonian_density(k: int, state: HasimotoState):
    al, q = state.algebra, state.q
    jq = al.j_apply(q)
    if k == 1:
        return 0.5 * al.inner_m(q, q)
    if k == 2:
        return 0.5 * al.inner_m(jq, state.d(1))
    if k == 3:
        qx = state.d(1)
        c = al.bracket_mm(q, jq)
        return 0.5 * al.inner_m(qx, qx) - 0.125 * al.inner_h(c, c)
    if k == 4:
        qx, qxx = state.d(1), state.d(2)
        c = al.bracket_mm(q, jq)
        return 0.5 * al.inner_m(al.j_apply(qx), qxx) - 0.375 * al.inner_h(c, al.bracket_mm(q, qx))
    raise ValueError(f"Hamiltonian index must be 1..4, got {k}")


def hamiltonian(k: int, state: HasimotoState) -> float:
    return float(quadrature(hamiltonian_density(k, state), state.grid))


# ----------------------------------------------------------------------
# zero curvature

def lax_pair(state: HasimotoState, lam: float) -> LaxPair:
    """U = lam A + Q and V = -1/2 [Q, JQ] - J Q_s + lam Q + lam^2 A."""
    al, grid = state.algebra, state.grid
    Q = q_to_Q(state.q, al)
    Qs = al.kappa * grid.dx(Q)
    A = np.broadcast_to(al.A, (grid.m_points,) + al.A.shape)
    u = lam * A + al.embed_m(Q)
    v = (
        al.embed_h(-0.5 * al.bracket_mm(Q, al.j_apply(Q)))
        + al.embed_m(-al.j_apply(Qs) + lam * Q)
        + lam ** 2 * A
    )
    return LaxPair(u, v, lam)


def lax_residual(s0: HasimotoState, s1: HasimotoState, lam: float) -> float:
    """max |U_t - V_s + [U, V]| at the midpoint of two states.

    Time derivative by centred differencing, the other terms averaged
    over both ends, so the residual is O(dt^2) on exact trajectories.
    """
    if s0.grid != s1.grid or s0.algebra != s1.algebra:
        raise DimensionError("Lax residual needs two states on the same grid and algebra")
    dt = s1.time - s0.time
    if dt <= 0:
        raise ValueError("second state must be later than the first")
    al, grid = s0.algebra, s0.grid
    p0, p1 = lax_pair(s0, lam), lax_pair(s1, lam)
    ut = (p1.u - p0.u) / dt

    def rest(p):
        return -al.kappa * grid.dx(p.v) + (p.u @ p.v - p.v @ p.u)

    res = ut + 0.5 * (rest(p0) + rest(p1))
    return float(np.max(np.abs(res)))


# ----------------------------------------------------------------------
# frame data

def flow_frame_data(n: int, state: HasimotoState) -> FlowFrameData:
    """Flow-vector components (h_perp, h_par) and (w_perp, w_par) of flow n.

    n = 2 and n = 3 use closed forms; higher n comes from the resolvent.
    """
    al, grid, q = state.algebra, state.grid, state.q
    kap = al.kappa
    if n < 2:
        raise ValueError("flow frame data is defined for n >= 2")
    jq = al.j_apply(q)
    if n == 2:
        return FlowFrameData(
            h_perp=-kap * q,
            h_par=np.zeros((grid.m_points, al.n, al.n), dtype=complex),
            w_perp=-al.efac * al.j_apply(state.d(1)),
            w_par=0.5 * al.efac * al.bracket_mm(q, jq),
        )
    if n == 3:
        qx = state.d(1)
        return FlowFrameData(
            h_perp=kap * al.j_apply(qx),
            h_par=-0.5 * kap * al.bracket_mm(q, jq),
            w_perp=al.efac * (-state.d(2) + 0.5 * al.ad_squared_m(jq, q)),
            w_par=al.efac * al.bracket_mm(q, qx),
        )
    wm, wh = resolvent_coefficients(state, n)
    c = kap ** (2 - n)
    return FlowFrameData(c * wm[n - 1], c * wh[n - 1], -c * wm[n], -c * wh[n])


def frame_residuals(data: FlowFrameData, state: HasimotoState, q_t):
    """Max residuals of the four structure equations linking q, h and w."""
    al, grid, q = state.algebra, state.grid, state.q
    hpar_eq = grid.dx(data.h_par) + al.bracket_mm(q, data.h_perp)
    hperp_eq = grid.dx(data.h_perp) + _ad_q(al, q, data.h_par) + al.j_apply(data.w_perp) / al.kappa
    wpar_eq = grid.dx(data.w_par) + al.bracket_mm(q, data.w_perp)
    wperp_eq = grid.dx(data.w_perp) - q_t + _ad_q(al, q, data.w_par)
    return {
        "h_par": float(np.max(np.abs(hpar_eq))),
        "h_perp": float(np.max(np.abs(hperp_eq))),
        "w_par": float(np.max(np.abs(wpar_eq))),
        "w_perp": float(np.max(np.abs(wperp_eq))),
    }


# ----------------------------------------------------------------------
# time stepping

def linear_split(flow: str, state: HasimotoState):
    """(linear Fourier symbol, nonlinear part) for the IF-RK4 stepper."""
    al, grid = state.algebra, state.grid
    ef = al.efac
    if flow == "nls":
        lsym = -1j * ef * grid.symbol(2)

        def nonlin(q):
            return -2j * ef * np.sum(np.abs(q) ** 2, axis=-1, keepdims=True) * q

        return lsym, nonlin
    if flow == "mkdv":
        lsym = -ef * grid.symbol(3)

        def nonlin(q):
            qx = grid.dx(q)
            mod2 = np.sum(np.abs(q) ** 2, axis=-1, keepdims=True)
            cross = np.sum(qx * np.conj(q), axis=-1, keepdims=True)
            return ef * (-3 * mod2 * qx - 3 * cross * q)

        return lsym, nonlin
    raise ValueError(f"no linear/nonlinear split for flow {flow!r}")


def flow_function(flow, state: HasimotoState):
    """Map a flow name ('nls', 'mkdv' or an integer n) to q -> q_t."""
    if flow == "nls":
        n = 2
    elif flow == "mkdv":
        n = 3
    else:
        n = int(flow)

    def rhs(q):
        return flow_rhs(n, state.with_q(q))

    return rhs, n


def evolve(state: HasimotoState, flow="nls", dt=1e-4, t_final=1.0, integrator="ifrk4",
           dealias=True, callback=None, every=1):
    """Integrate a q-flow from ``state.time`` to ``t_final``.

    Returns the final state.  ``callback(state)`` is invoked at the
    start, every ``every`` steps and at the end.
    """
    grid = state.grid
    mask = grid.dealias_mask() if dealias else None
    cb = None
    if callback is not None:
        def cb(t, q):
            callback(state.with_q(q, t))

    if integrator == "ifrk4" and flow in ("nls", "mkdv"):
        lsym, nonlin = linear_split(flow, state)

        def step(q, h, t):
            return step_ifrk4(q, lsym, nonlin, h, t, mask=mask)
    else:
        rhs, n = flow_function(flow, state)
        nsub = substeps_for(grid, dt, max(n, 1), speed=state.algebra.efac)

        def filtered(q):
            r = rhs(q)
            return grid.dealias(r) if dealias else r

        def step(q, h, t):
            for _ in range(nsub):
                q = step_rk4(q, filtered, h / nsub, t)
            return q

    q, t = integrate(state.q, step, dt, t_final, t0=state.time, callback=cb, every=every)
    return state.with_q(q, t)


# ----------------------------------------------------------------------
# exact solutions

def plane_wave_frequency(algebra: CPN, a: float, k: float) -> float:
    """omega = efac (k^2 - 2 |a|^2) for the NLS flow."""
    return algebra.efac * (k ** 2 - 2 * abs(a) ** 2)


def plane_wave(algebra: CPN, grid: Grid, a: float, k: int, direction=0, t: float = 0.0):
    """Exact NLS solution q = a exp(i(k x + omega t)) d with a unit vector d.

    ``direction`` is either a component index or a vector in C^N.
    """
    if np.ndim(direction) == 0:
        d = np.zeros(algebra.n, dtype=complex)
        d[int(direction)] = 1.0
    else:
        d = np.asarray(direction, dtype=complex)
        if d.shape != (algebra.n,):
            raise DimensionError(f"direction must have {algebra.n} components")
        d = d / np.linalg.norm(d)
    k0 = 2 * np.pi / grid.length
    w = plane_wave_frequency(algebra, a, k * k0)
    phase = np.exp(1j * (k * k0 * grid.x + w * t))
    return HasimotoState(a * phase[:, None] * d[None, :], grid, algebra, t)
