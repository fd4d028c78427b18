# %% [markdown]
# From a map into CP^N to the Hasimoto variable and back
#
# Start from chart data (theta, Theta), build the parallel frame, read off
# q, then rebuild the spin field and the curve from q alone.

# %%
import numpy as np

from hasimoto import CPN, Grid
from hasimoto import geometry as G
from hasimoto import mapping as M
from hasimoto import transform as T

n = 2
al = CPN(n)
grid = Grid(128)
coords = M.random_coords(n, grid, seed=4, amplitude=0.2, theta0=0.7)

q, frame, gauge, info = T.hasimoto_from_map(coords, al, return_frame=True)
print("closed form vs connection:", info["closed_vs_connection"])

# %%
# the gauge-fixed frame carries A to the map
ms = M.embed(coords, al)
print("map from frame vs embedding:", np.abs(T.map_field(frame) - ms.gamma_map).max())

# %%
# Theta is not constant here, so the frame picks up holonomy and q is only
# periodic up to a rigid rotation
hol = frame.psi[0].conj().T @ frame.psi_end
print("holonomy distance from identity:", np.abs(hol - np.eye(n + 1)).max())

# %%
# with constant Theta the frame closes and q is periodic
cfg = T.EquivalenceConfig(n=n, m_points=128)
qc = T.hasimoto_from_map(T.reference_coords(cfg), al)
spin = T.spin_from_q(qc)
curve = T.curve_from_spin(spin)
kappa = G.curvature(curve)
print("curvature^2 * efac vs <q, q>:",
      np.abs(al.efac * kappa ** 2 - al.inner_m(qc.q, qc.q)).max())
# the frame closing does not make the curve close: a nonzero mean tangent
# leaves it on the covering line
print("curve is open:", curve.is_open, "with slope norm", np.abs(curve.slope).max())
