"""The Hermitian symmetric Lie algebra su(N+1) = m + h behind CP^N.

Elements of m are stored as complex row vectors ``a`` of length N and
embedded as the block matrix ``[[0, a], [-conj(a).T, 0]]``.  Elements of
h are stored as anti-Hermitian N x N blocks ``B`` and embedded as
``diag(-tr B, B)``.  Every function accepts arbitrary leading batch axes,
so a field sampled on a grid is just an array with one extra axis in
front.
"""
from __future__ import annotations

from functools import cached_property

import numpy as np

from .errors import DimensionError


def _dagger(x):
    return np.conj(np.swapaxes(x, -1, -2))


def _trace(x):
    return np.trace(x, axis1=-2, axis2=-1)


def _outer(u, v):
    # batched outer product u^T v of row vectors
    return u[..., :, None] * v[..., None, :]


class SymmetricAlgebra:
    """Interface shared by Hermitian symmetric algebra instances.

    Only CP^N is implemented; the hierarchy, geometry and transform code
    is written against the methods below.
    """

    n: int
    efac: float
    killing_scale: float

    def embed_m(self, a): raise NotImplementedError
    def embed_h(self, b): raise NotImplementedError
    def project_m(self, x): raise NotImplementedError
    def project_h(self, x): raise NotImplementedError
    def j_apply(self, a): raise NotImplementedError
    def bracket_mm(self, a1, a2): raise NotImplementedError
    def bracket_hm(self, b, a): raise NotImplementedError
    def bracket_hh(self, b1, b2): raise NotImplementedError


class CPN(SymmetricAlgebra):
    """su(N+1) with complex structure J = ad(A), A = [[-i/(N+1) I_N]].

    Attributes
    ----------
    n : the N of CP^N
    efac : dim(m) = 2N, equal to -Killing(A, A)
    kappa : sqrt(efac); A/kappa is the unit-norm element of the centre of h
    killing_scale : 2(N+1), so Killing(x, y) = killing_scale * tr(xy)
    """

    def __init__(self, n: int):
        n = int(n)
        if n < 1:
            raise DimensionError(f"N must be a positive integer, got {n}")
        self.n = n
        self.size = n + 1
        self.efac = float(2 * n)
        self.kappa = float(np.sqrt(2 * n))
        self.killing_scale = float(2 * (n + 1))
        self.a_block = (-1j / (n + 1)) * np.eye(n)
        self.A = self.embed_h(self.a_block)

    def __repr__(self):
        return f"CPN(n={self.n})"

    def __eq__(self, other):
        return isinstance(other, CPN) and other.n == self.n

    def __hash__(self):
        return hash(("CPN", self.n))

    # ------------------------------------------------------------------
    # embeddings and projections

    def _check_vec(self, a):
        a = np.asarray(a)
        if a.shape[-1:] != (self.n,):
            raise DimensionError(f"expected m-vector of length {self.n}, got shape {a.shape}")
        return a

    def _check_block(self, b):
        b = np.asarray(b)
        if b.shape[-2:] != (self.n, self.n):
            raise DimensionError(f"expected {self.n}x{self.n} h-block, got shape {b.shape}")
        return b

    def _check_full(self, x):
        x = np.asarray(x)
        if x.shape[-2:] != (self.size, self.size):
            raise DimensionError(
                f"expected {self.size}x{self.size} algebra element, got shape {x.shape}"
            )
        return x

    def embed_m(self, a):
        a = self._check_vec(a)
        out = np.zeros(a.shape[:-1] + (self.size, self.size), dtype=complex)
        out[..., 0, 1:] = a
        out[..., 1:, 0] = -np.conj(a)
        return out

    def embed_h(self, b):
        b = self._check_block(b)
        out = np.zeros(b.shape[:-2] + (self.size, self.size), dtype=complex)
        out[..., 0, 0] = -_trace(b)
        out[..., 1:, 1:] = b
        return out

    def embed(self, a=None, b=None):
        if a is None and b is None:
            raise ValueError("nothing to embed")
        if a is None:
            return self.embed_h(b)
        if b is None:
            return self.embed_m(a)
        return self.embed_m(a) + self.embed_h(b)

    def project_m(self, x):
        x = self._check_full(x)
        # average the two off-diagonal blocks so that the anti-Hermitian
        # part is extracted even from slightly perturbed input
        return 0.5 * (x[..., 0, 1:] - np.conj(x[..., 1:, 0]))

    def project_h(self, x):
        x = self._check_full(x)
        blk = x[..., 1:, 1:]
        return blk.copy()

    # ------------------------------------------------------------------
    # brackets

    def bracket_hm(self, b, a):
        """[[B], [a]] = [-tr(B) a - a B]."""
        b = self._check_block(b)
        a = self._check_vec(a)
        return -_trace(b)[..., None] * a - np.einsum("...i,...ij->...j", a, b)

    def bracket_mm(self, a1, a2):
        """[[a1], [a2]] as an h-block: conj(a2)^T a1 - conj(a1)^T a2."""
        a1 = self._check_vec(a1)
        a2 = self._check_vec(a2)
        return _outer(np.conj(a2), a1) - _outer(np.conj(a1), a2)

    def bracket_hh(self, b1, b2):
        return b1 @ b2 - b2 @ b1

    def bracket(self, x, y):
        """Lie bracket of two full algebra elements through the block formulas."""
        x = self._check_full(x)
        y = self._check_full(y)
        a1, b1 = self.project_m(x), self.project_h(x)
        a2, b2 = self.project_m(y), self.project_h(y)
        hpart = self.bracket_hh(b1, b2) + self.bracket_mm(a1, a2)
        mpart = self.bracket_hm(b1, a2) - self.bracket_hm(b2, a1)
        return self.embed_h(hpart) + self.embed_m(mpart)

    def commutator(self, x, y):
        """Dense xy - yx; the oracle for :meth:`bracket`."""
        x = self._check_full(x)
        y = self._check_full(y)
        return x @ y - y @ x

    def j_apply(self, a):
        return 1j * self._check_vec(a)

    def j_inv(self, a):
        return -1j * self._check_vec(a)

    def ad_squared_m(self, a, b):
        """ad(a)^2 b for a, b in m, closed form."""
        a = self._check_vec(a)
        b = self._check_vec(b)
        ba = np.sum(np.conj(b) * a, axis=-1)
        ab = np.sum(np.conj(a) * b, axis=-1)
        aa = np.sum(np.conj(a) * a, axis=-1)
        return (2 * ba - ab)[..., None] * a - aa[..., None] * b

    # ------------------------------------------------------------------
    # invariant forms

    def killing(self, x, y):
        x = self._check_full(x)
        y = self._check_full(y)
        return self.killing_scale * np.real(np.einsum("...ij,...ji->...", x, y))

    def inner_m(self, a, b):
        """<a, b>_m = -Killing([a], [b]) = 4(N+1) Re(conj(a).b)."""
        return 2 * self.killing_scale * np.real(np.sum(np.conj(a) * b, axis=-1))

    def inner_h(self, b1, b2):
        """-Killing([B1], [B2]) for h-blocks."""
        tt = _trace(b1) * _trace(b2) + np.einsum("...ij,...ji->...", b1, b2)
        return -self.killing_scale * np.real(tt)

    def norm_g(self, x):
        """sqrt(-Killing(x, x)) for full elements."""
        return np.sqrt(np.maximum(-self.killing(x, x), 0.0))

    # ------------------------------------------------------------------
    # group level

    def exp_m(self, a):
        """exp([a]) in SU(N+1), closed form in sin|a| and cos|a|."""
        a = self._check_vec(a)
        r = np.sqrt(np.sum(np.abs(a) ** 2, axis=-1))
        safe = np.where(r > 0, r, 1.0)
        ahat = np.where((r > 0)[..., None], a / safe[..., None], 0.0)
        p = _outer(np.conj(ahat), ahat)
        eye = np.broadcast_to(np.eye(self.n), p.shape)
        c = np.cos(r)[..., None, None]
        s = np.sin(r)[..., None, None]
        out = np.zeros(a.shape[:-1] + (self.size, self.size), dtype=complex)
        out[..., 1:, 1:] = eye - p + c * p
        out[..., 0, 0] = np.cos(r)
        out += s * self.embed_m(ahat)
        return out

    def adjoint(self, g, x):
        """Ad(g) x = g x g^{-1} for unitary g."""
        return g @ x @ _dagger(g)

    # ------------------------------------------------------------------
    # random sampling

    def random_element(self, kind="g", seed=None, scale=1.0, size=None):
        """Seeded random element of g, m or h.

        ``size`` adds leading batch axes.  ``seed`` may be an int or a
        numpy Generator.
        """
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        lead = () if size is None else tuple(np.atleast_1d(size))
        sig = scale / np.sqrt(2)

        def cnormal(shape):
            return sig * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

        if kind == "m":
            return cnormal(lead + (self.n,))
        if kind == "h":
            z = cnormal(lead + (self.n, self.n))
            return 0.5 * (z - _dagger(z)) * np.sqrt(2)
        if kind == "g":
            z = cnormal(lead + (self.size, self.size))
            x = 0.5 * (z - _dagger(z)) * np.sqrt(2)
            tr = _trace(x) / self.size
            return x - tr[..., None, None] * np.eye(self.size)
        raise ValueError(f"unknown element kind {kind!r}; expected 'g', 'm' or 'h'")

    # ------------------------------------------------------------------
    # a real basis and structure constants

    @cached_property
    def basis(self):
        """Basis of su(N+1) orthonormal for Re tr(x^H y)."""
        d = self.size
        out = []
        for i in range(d):
            for j in range(i + 1, d):
                e = np.zeros((d, d), dtype=complex)
                e[i, j], e[j, i] = 1, -1
                out.append(e / np.sqrt(2))
                e = np.zeros((d, d), dtype=complex)
                e[i, j] = e[j, i] = 1j
                out.append(e / np.sqrt(2))
        for k in range(1, d):
            diag = np.zeros(d)
            diag[:k] = 1.0
            diag[k] = -k
            out.append(np.diag(1j * diag / np.sqrt(k * (k + 1))))
        return np.array(out)

    def coords(self, x):
        """Real coordinates of x in :attr:`basis`."""
        return np.real(np.einsum("aij,...ij->...a", np.conj(self.basis), x))

    def from_coords(self, c):
        return np.einsum("...a,aij->...ij", c, self.basis)

    @cached_property
    def structure_constants(self):
        """f[a, b, c] with [e_a, e_b] = sum_c f[a, b, c] e_c."""
        e = self.basis
        br = np.einsum("aij,bjk->abik", e, e) - np.einsum("bij,ajk->abik", e, e)
        return self.coords(br)

    def killing_from_constants(self, f=None):
        """Killing matrix tr(ad e_a ad e_b) computed from structure constants."""
        f = self.structure_constants if f is None else f
        return np.einsum("acd,bdc->ab", f, f)
