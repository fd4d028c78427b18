"""Shared fixtures for the geometric tests."""
import numpy as np
from scipy.linalg import expm, logm

from hasimoto import CPN, Grid, HasimotoState, MapCoords
from hasimoto import transform as T


def closing_data(n, m=128, seed=0, evolve_nls=0.0):
    """q, its parallel frame and spin for map data with constant Theta.

    The frame closes on the circle, so q and T are both periodic.  With
    ``evolve_nls`` the q is first moved along the NLS flow, which makes it
    genuinely complex while the frame still closes.
    """
    from hasimoto import hierarchy as H

    al = CPN(n)
    cfg = T.EquivalenceConfig(n=n, m_points=m, phase_seed=seed)
    coords = T.reference_coords(cfg)
    q = T.hasimoto_from_map(coords, al)
    if evolve_nls:
        q = H.evolve(q, "nls", dt=1e-3, t_final=evolve_nls)
    frame = T.integrate_frame(q)
    spin = T.spin_from_q(q, frame)
    return al, q, frame, spin


class TwistedState(HasimotoState):
    """q that is periodic only up to a constant H-rotation exp(xi).

    Derivatives use D = d/dx - ad(xi / L) on the untwisted field, which is
    enough for every H-invariant density.
    """

    xi = None

    def d(self, order=1):
        al, g = self.algebra, self.grid
        p = al.embed_m(self.q)
        gen = self.xi / g.length
        for _ in range(order):
            p = g.dx(p) - (gen @ p - p @ gen)
        return al.project_m(p)


def generic_map_data(n, m=256, seed=0):
    """Generic periodic (theta, Theta), its spin, map and twisted q."""
    from hasimoto import geometry as G, mapping as M

    g = Grid(m)
    x = g.x
    r = np.random.default_rng(seed)
    th = np.full(m, 0.7)
    for k in (1, 2):
        th += 0.2 / k * np.sin(k * x + r.uniform(0, 6))
    v0 = r.standard_normal(n) + 1j * r.standard_normal(n)
    big = np.ones((m, n)) * v0
    for k in (1, 2):
        big = big + 0.4 / k * np.cos(k * x + r.uniform(0, 6))[:, None] * (
            r.standard_normal(n) + 1j * r.standard_normal(n))
    big /= np.linalg.norm(big, axis=1)[:, None]
    al = CPN(n)
    c = MapCoords(th, big, g)
    q, fr, gauge, info = T.hasimoto_from_map(c, al, return_frame=True)
    hol = fr.psi[0].conj().T @ fr.psi_end
    xi = logm(hol)
    e = np.array([expm(t * xi / g.length) for t in x])
    p = e @ al.embed_m(q.q) @ np.conj(np.swapaxes(e, -1, -2))
    tq = TwistedState(al.project_m(p), g, al)
    tq.xi = xi
    ms = M.embed(c, al)
    spin = G.SpinState(ms.gamma_map / al.kappa, g, al)
    return al, tq, spin, ms
