"""Identity suites for the algebra, the spectral calculus and the recursion operator.

Every check returns a max-abs residual that is compared with a fixed
tolerance.  The dense bracket used by the algebra suite can be corrupted
on purpose (one structure constant shifted by ``eps``) to confirm that the
suite notices.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import CPN
from .calculus import Grid, ZERO_MEAN, dx_inv
from . import hierarchy
from .hierarchy import HasimotoState

ALGEBRA_TOL = 1e-12
CALCULUS_TOL = 1e-10
RECURSION_TOLS = {"recursion_Jq": 1e-10, "recursion_nls": 1e-8, "recursion_mkdv": 1e-7}


@dataclass(frozen=True)
class Corruption:
    """Shift of the structure constant f[a, b, c] (and f[b, a, c]) by eps."""

    a: int = 0
    b: int = 1
    c: int = 2
    eps: float = 1e-6


@dataclass
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)

    def as_dict(self):
        return {"name": self.name, "residual": self.residual,
                "tolerance": self.tolerance, "pass": self.passed}


@dataclass
class SuiteReport:
    n: int
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c.name for c in self.checks if not c.passed]

    def as_dict(self):
        return {"n": self.n, "passed": self.passed, "checks": [c.as_dict() for c in self.checks]}


def _amax(x) -> float:
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def dense_bracket(al: CPN, corruption: Corruption | None = None):
    """Matrix commutator, optionally with one structure constant perturbed."""
    if corruption is None:
        return al.commutator
    e = al.basis
    dim = e.shape[0]
    for idx in (corruption.a, corruption.b, corruption.c):
        if not 0 <= idx < dim:
            raise ValueError(f"structure constant index {idx} out of range for dim {dim}")
    ec = e[corruption.c]

    def br(x, y):
        cx, cy = al.coords(x), al.coords(y)
        w = cx[..., corruption.a] * cy[..., corruption.b] - cx[..., corruption.b] * cy[..., corruption.a]
        return al.commutator(x, y) + corruption.eps * w[..., None, None] * ec

    return br


def _constants_from(al: CPN, br):
    e = al.basis
    dim = e.shape[0]
    pairs = br(np.repeat(e, dim, axis=0), np.tile(e, (dim, 1, 1)))
    return al.coords(pairs).reshape(dim, dim, dim)


def algebra_suite(al: CPN, samples: int = 1000, seed: int = 0,
                  corruption: Corruption | None = None, tol: float = ALGEBRA_TOL) -> list:
    rng = np.random.default_rng(seed)
    br = dense_bracket(al, corruption)
    x, y, z = (al.random_element("g", rng, size=samples) for _ in range(3))
    a1, a2 = al.random_element("m", rng, size=samples), al.random_element("m", rng, size=samples)
    b1, b2 = al.random_element("h", rng, size=samples), al.random_element("h", rng, size=samples)
    m1, m2 = al.embed_m(a1), al.embed_m(a2)
    h1, h2 = al.embed_h(b1), al.embed_h(b2)
    A = np.broadcast_to(al.A, m1.shape)

    def m_part(v):
        return v - al.embed_h(al.project_h(v))

    def h_part(v):
        return v - al.embed_m(al.project_m(v))

    res = {}
    res["bracket_hh_in_h"] = _amax(m_part(br(h1, h2)))
    res["bracket_hm_in_m"] = _amax(h_part(br(h1, m1)))
    res["bracket_mm_in_h"] = _amax(m_part(br(m1, m2)))
    res["antisymmetry"] = _amax(br(x, y) + br(y, x))
    res["jacobi"] = _amax(br(x, br(y, z)) + br(y, br(z, x)) + br(z, br(x, y)))
    res["centralizer_of_A"] = _amax(br(A, h1))
    res["ad_A_squared_on_m"] = _amax(br(A, br(A, m1)) + m1)
    f = _constants_from(al, br)
    kill = al.killing_from_constants(f)
    ca = al.coords(al.A)
    res["killing_A_A"] = abs(float(ca @ kill @ ca) + al.efac)
    cx, cy = al.coords(x), al.coords(y)
    res["killing_trace_formula"] = _amax(np.einsum("sa,ab,sb->s", cx, kill, cy) - al.killing(x, y))
    res["killing_invariance"] = _amax(al.killing(br(x, y), z) - al.killing(x, br(y, z)))
    res["ad_squared_closed_form"] = _amax(al.embed_m(al.ad_squared_m(a1, a2)) - br(m1, br(m1, m2)))
    jm = al.embed_m(al.j_apply(a1))
    res["cubic_identity"] = _amax(
        al.embed_m(al.j_apply(al.project_m(br(m1, br(m1, jm))))) + br(jm, br(jm, m1)))
    res["block_vs_dense_bracket"] = _amax(al.bracket(x, y) - br(x, y))
    res["J_squared"] = _amax(al.j_apply(al.j_apply(a1)) + a1)
    res["J_is_ad_A"] = _amax(al.embed_m(al.j_apply(a1)) - br(A, m1))
    from scipy.linalg import expm
    few = min(samples, 50)
    res["exp_m_closed_form"] = _amax(al.exp_m(a1[:few]) - np.array([expm(v) for v in m1[:few]]))
    return [CheckResult(k, float(v), tol) for k, v in res.items()]


def calculus_suite(grid: Grid | None = None, seed: int = 0, tol: float = CALCULUS_TOL) -> list:
    grid = grid or Grid(128)
    rng = np.random.default_rng(seed)
    x = grid.x
    k0 = 2 * np.pi / grid.length
    f = np.zeros_like(x)
    fx = np.zeros_like(x)
    for k in range(1, 9):
        a, b = rng.standard_normal(2) / k
        f += a * np.cos(k * k0 * x) + b * np.sin(k * k0 * x)
        fx += k * k0 * (-a * np.sin(k * k0 * x) + b * np.cos(k * k0 * x))
    res = {
        "spectral_derivative": _amax(grid.dx(f) - fx),
        "dx_of_dx_inv": _amax(grid.dx(dx_inv(fx, grid, ZERO_MEAN)) - fx),
        "quadrature_of_mode": abs(float(grid.quadrature(np.cos(k0 * x) ** 2)) - grid.length / 2),
    }
    return [CheckResult(k, float(v), tol) for k, v in res.items()]


def random_band_q(al: CPN, grid: Grid, seed=0, kmax: int = 6, amplitude: float = 0.3):
    """Seeded band-limited m-valued field with modes |k| <= kmax."""
    rng = np.random.default_rng(seed)
    m = grid.m_points
    spec = np.zeros((m, al.n), dtype=complex)
    idx = np.r_[0:kmax + 1, m - kmax:m]
    spec[idx] = rng.standard_normal((idx.size, al.n)) + 1j * rng.standard_normal((idx.size, al.n))
    q = np.fft.ifft(spec, axis=0)
    q *= amplitude / np.max(np.abs(q))
    return q


def recursion_suite(al: CPN, grid: Grid | None = None, seed: int = 0) -> list:
    grid = grid or Grid(256)
    st = HasimotoState(random_band_q(al, grid, seed), grid, al)
    jq = al.j_apply(st.q)
    r1 = hierarchy.recursion_apply(st, jq)
    r2 = hierarchy.recursion_apply(st, r1)
    corr2 = hierarchy.nls_correction(st)
    r3 = hierarchy.recursion_apply(st, r2)
    # R^2(q_x) + R(nls correction) + mkdv correction is the mKdV flow
    corr3 = hierarchy.recursion_apply(st, corr2) + hierarchy.mkdv_correction(st)
    res = {
        "recursion_Jq": _amax(r1 - st.d(1)),
        "recursion_nls": _amax(r2 + corr2 - hierarchy.nls_rhs(st) / al.efac),
        "recursion_mkdv": _amax(r3 + corr3 - hierarchy.mkdv_rhs(st) / al.efac),
    }
    return [CheckResult(k, float(v), RECURSION_TOLS[k]) for k, v in res.items()]


def run_suite(ns=(1, 2, 3), samples: int = 1000, seed: int = 0,
              corruption: Corruption | None = None, grid_points: int = 256) -> list:
    """One :class:`SuiteReport` per N."""
    out = []
    for n in ns:
        al = CPN(n)
        rep = SuiteReport(n)
        rep.checks += algebra_suite(al, samples, seed, corruption)
        rep.checks += calculus_suite(Grid(128), seed)
        rep.checks += recursion_suite(al, Grid(grid_points), seed)
        out.append(rep)
    return out
