# %% [markdown]
# Heisenberg spin model and the Schrodinger map
#
# The spin field stays on the adjoint orbit, and the map keeps its energy
# while individual arclength elements stretch and shrink.

# %%
import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from hasimoto import CPN, Grid
from hasimoto import geometry as G
from hasimoto import mapping as M

al = CPN(1)
grid = Grid(128)
spin = G.random_spin(al, grid, seed=0, kmax=3, amplitude=0.5)

# %%
end = G.evolve_spin(spin, "heisenberg", dt=2e-4, t_final=0.5)
print("|T| drift:", G.spin_norm_drift(end))
print("spectrum drift:", G.spectrum_deviation(al, end.t_field, 1 / al.kappa))

# %%
ms = M.MapState(al.kappa * spin.t_field, grid, al)
stretch = M.local_stretch(ms, M.schrodinger_map_rhs_matrix(ms))
ms1 = M.evolve_map(ms, dt=2e-4, t_final=0.5)


def energy(x):
    return grid.quadrature(G.sqnorm(al, x.d(1)))


print("energy drift:", abs(energy(ms1) / energy(ms) - 1))
print("arclength before/after:", M.total_arclength(ms), M.total_arclength(ms1))

# %%
fig, ax = plt.subplots(figsize=(5, 3))
ax.plot(grid.x, stretch)
ax.set_xlabel("x")
ax.set_ylabel("local stretch rate")
fig.tight_layout()
fig.savefig("map_stretch.png", dpi=120)
