"""Periodic grids, Fourier spectral derivatives and the antiderivative Dx^{-1}.

Fields are plain numpy arrays whose first axis runs over the grid points;
trailing axes hold the algebra components (m-vector, h-block or full
matrix).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DimensionError, IntegrabilityError


@dataclass(frozen=True)
class Grid:
    m_points: int
    length: float = 2 * np.pi

    def __post_init__(self):
        m = int(self.m_points)
        if m < 16 or m & (m - 1):
            raise DimensionError(f"m_points must be a power of two >= 16, got {self.m_points}")
        if not self.length > 0:
            raise DimensionError(f"grid length must be positive, got {self.length}")
        object.__setattr__(self, "m_points", m)
        object.__setattr__(self, "length", float(self.length))

    @property
    def spacing(self) -> float:
        return self.length / self.m_points

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.m_points) * self.spacing

    @property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers 2 pi j / L in numpy fft order."""
        return 2 * np.pi * np.fft.fftfreq(self.m_points, d=self.spacing)

    @property
    def mode_index(self) -> np.ndarray:
        return np.fft.fftfreq(self.m_points, d=1.0 / self.m_points)

    def symbol(self, order: int) -> np.ndarray:
        """Fourier symbol (ik)^order; the Nyquist entry is dropped for odd orders."""
        k = self.wavenumbers
        s = (1j * k) ** order
        if order % 2:
            s[self.m_points // 2] = 0.0
        return s

    def dealias_mask(self) -> np.ndarray:
        return np.abs(self.mode_index) <= self.m_points / 3

    def check(self, f):
        f = np.asarray(f)
        if f.shape[0] != self.m_points:
            raise DimensionError(
                f"field has {f.shape[0]} samples but the grid has {self.m_points}"
            )
        return f

    def dx(self, f, order: int = 1):
        return dx(f, self, order)

    def dx_inv(self, f, policy="zero_mean", **kw):
        return dx_inv(f, self, policy, **kw)

    def quadrature(self, f):
        return quadrature(f, self)

    def dealias(self, f):
        return dealias(f, self)


def _bcast(sym, f):
    return sym.reshape((-1,) + (1,) * (f.ndim - 1))


def fft(f):
    return np.fft.fft(f, axis=0)


def ifft(fh):
    return np.fft.ifft(fh, axis=0)


def dx(f, grid: Grid, order: int = 1):
    """Spectral derivative of order ``order`` along the grid axis."""
    f = grid.check(f)
    out = ifft(_bcast(grid.symbol(order), f) * fft(f))
    return out if np.iscomplexobj(f) else out.real


@dataclass(frozen=True)
class Policy:
    """Constant-of-integration rule for :func:`dx_inv`.

    kind is one of ``zero_mean``, ``base_point_zero`` or ``cokernel_A``;
    for the last one ``c`` multiplies the element A that is added.
    """

    kind: str = "zero_mean"
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero_mean", "base_point_zero", "cokernel_A"):
            raise ValueError(f"unknown antiderivative policy {self.kind!r}")


ZERO_MEAN = Policy("zero_mean")
BASE_POINT_ZERO = Policy("base_point_zero")


def cokernel_A(c: float = 1.0) -> Policy:
    return Policy("cokernel_A", float(c))


def as_policy(policy) -> Policy:
    if isinstance(policy, Policy):
        return policy
    if isinstance(policy, str):
        if policy.startswith("cokernel_A"):
            inner = policy[len("cokernel_A"):].strip("() ")
            return cokernel_A(float(inner) if inner else 1.0)
        return Policy(policy)
    raise TypeError(f"cannot interpret {policy!r} as an antiderivative policy")


def dx_inv(f, grid: Grid, policy: Any = ZERO_MEAN, a_element=None, tol: float = 1e-10):
    """Periodic antiderivative of a mean-zero field.

    ``a_element`` is the element A in the same representation as ``f``
    and is only needed for the ``cokernel_A`` policy.  ``tol`` bounds the
    admissible mean, relative to max(1, max|f|).
    """
    policy = as_policy(policy)
    f = grid.check(f)
    fh = fft(f)
    mean = fh[0] / grid.m_points
    scale = max(1.0, float(np.max(np.abs(f))) if f.size else 1.0)
    bad = np.abs(mean) > tol * scale
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(np.atleast_1d(bad))[0])
        val = np.atleast_1d(mean)[idx]
        raise IntegrabilityError(idx, abs(val), tol * scale)
    sym = grid.symbol(1)
    inv = np.zeros_like(sym)
    nz = sym != 0
    inv[nz] = 1.0 / sym[nz]
    g = ifft(_bcast(inv, f) * fh)
    if not np.iscomplexobj(f):
        g = g.real
    if policy.kind == "base_point_zero":
        g = g - g[0]
    elif policy.kind == "cokernel_A":
        if a_element is None:
            raise ValueError("cokernel_A policy needs the element A in the field's representation")
        a = np.asarray(a_element)
        if a.shape != f.shape[1:]:
            raise DimensionError(f"A has shape {a.shape} but field components have {f.shape[1:]}")
        g = g + policy.c * a
    return g


def quadrature(f, grid: Grid) -> float | np.ndarray:
    """Periodic trapezoid rule, i.e. spacing times the sum over samples."""
    f = grid.check(f)
    return grid.spacing * np.sum(f, axis=0)


def dealias(f, grid: Grid):
    """Zero all Fourier modes above two thirds of the Nyquist index."""
    f = grid.check(f)
    out = ifft(_bcast(grid.dealias_mask(), f) * fft(f))
    return out if np.iscomplexobj(f) else out.real


def mean(f, grid: Grid):
    return np.mean(grid.check(f), axis=0)


def shift(f, grid: Grid, delta: float):
    """Trigonometric interpolant of f evaluated at x + delta."""
    f = grid.check(f)
    ph = np.exp(1j * grid.wavenumbers * delta)
    ph[grid.m_points // 2] = np.cos(np.pi * grid.m_points * delta / grid.length)
    out = ifft(_bcast(ph, f) * fft(f))
    return out if np.iscomplexobj(f) else out.real


@dataclass
class PeriodicField:
    """Samples of an algebra-valued function on a periodic grid.

    ``kind`` names the representation: ``m`` (N-vectors), ``h`` (N x N
    blocks), ``g`` (full matrices) or ``real``.
    """

    grid: Grid
    values: np.ndarray
    kind: str = "m"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        self.grid.check(self.values)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("periodic field contains non-finite entries")
        if self.kind not in ("m", "h", "g", "real"):
            raise ValueError(f"unknown field kind {self.kind!r}")
