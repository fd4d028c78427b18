"""Explicit RK4 and integrating-factor RK4 steppers for periodic fields."""
from __future__ import annotations

import warnings

import numpy as np

from .calculus import Grid, fft, ifft
from .errors import BlowUpError


def _finite_or_raise(y, t):
    if not np.all(np.isfinite(y)):
        raise BlowUpError(t)


def step_rk4(y, rhs_fn, dt, t=0.0):
    """One classical RK4 step of y' = rhs_fn(y)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    def f(v):
        _finite_or_raise(v, t)
        return rhs_fn(v)

    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    out = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    _finite_or_raise(out, t)
    return out


def step_ifrk4(y, linear_symbol, nonlinear_fn, dt, t=0.0, mask=None):
    """One integrating-factor (Lawson) RK4 step of y' = L y + N(y).

    ``linear_symbol`` holds the Fourier multiplier of L over the grid
    axis; the linear part is then propagated exactly.  ``mask`` (optional)
    is applied to every nonlinear evaluation in Fourier space, which is
    how 2/3-rule dealiasing enters.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    shape = (-1,) + (1,) * (np.ndim(y) - 1)
    lsym = np.asarray(linear_symbol).reshape(shape)
    e_half = np.exp(0.5 * dt * lsym)
    e_full = e_half * e_half
    m = None if mask is None else np.asarray(mask).reshape(shape)

    def nhat(yhat):
        _finite_or_raise(yhat, t)
        val = fft(nonlinear_fn(ifft(yhat)))
        return val if m is None else val * m

    yh = fft(y)
    k1 = nhat(yh)
    k2 = nhat(e_half * (yh + 0.5 * dt * k1))
    k3 = nhat(e_half * yh + 0.5 * dt * k2)
    k4 = nhat(e_full * yh + dt * e_half * k3)
    out = e_full * yh + (dt / 6.0) * (e_full * k1 + 2 * e_half * (k2 + k3) + k4)
    out = ifft(out)
    _finite_or_raise(out, t)
    return out


def stability_number(grid: Grid, dt, order, speed=1.0):
    """dt * speed * k_max^order, the quantity limited by explicit RK4."""
    kmax = np.pi * grid.m_points / grid.length
    return dt * speed * kmax ** order


def check_rk4_stability(grid: Grid, dt, order, speed=1.0, limit=2.8):
    num = stability_number(grid, dt, order, speed)
    if num > limit:
        warnings.warn(
            f"explicit RK4 step dt={dt:g} exceeds the stability guard "
            f"({num:.3g} > {limit}) for derivative order {order}",
            RuntimeWarning,
            stacklevel=2,
        )
    return num


def substeps_for(grid: Grid, dt, order, speed=1.0, limit=2.5):
    """Number of equal substeps that bring dt under the RK4 stability guard."""
    return max(1, int(np.ceil(stability_number(grid, dt, order, speed) / limit)))


def integrate(y0, step, dt, t_final, t0=0.0, callback=None, every=1):
    """Advance ``y0`` by repeated ``step(y, dt, t)`` to ``t_final``.

    The final step is shortened so that ``t_final`` is hit exactly.
    ``callback(t, y)`` runs at t0, every ``every`` steps and at the end.
    """
    y, t = y0, t0
    nsteps = int(np.ceil((t_final - t0) / dt - 1e-9)) if t_final > t0 else 0
    if callback is not None:
        callback(t, y)
    for i in range(nsteps):
        h = min(dt, t_final - t)
        if h <= 0:
            break
        try:
            # overflow shows up as a BlowUpError from the finiteness checks
            with np.errstate(over="ignore", invalid="ignore"):
                y = step(y, h, t)
        except BlowUpError as err:
            raise BlowUpError(t) from err
        t = t0 + (i + 1) * dt if i + 1 < nsteps else t_final
        if callback is not None and ((i + 1) % every == 0 or i + 1 == nsteps):
            callback(t, y)
    return y, t
