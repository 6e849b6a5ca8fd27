"""Map error, disturbance and the relation sides over all apparatus axes.

Scans the whole Bloch sphere of output directions o_a for the standard
configuration and reports where each quantity is extremal.  The product
eps*eta dips below the bound 1 in pockets around the a and b axes; the
sum-form left side never does.
"""

import math

import numpy as np

from errdisturb import qmcore, sweep

a, b = qmcore.X_AXIS, qmcore.Y_AXIS
psi = qmcore.state_from_angles(0.0, 0.0)
shape = (91, 181)

maps = {}
for quantity in sweep.QUANTITIES:
    thetas, phis, values = sweep.bloch_scan(quantity, a, b, psi, shape=shape)
    maps[quantity] = values
    i, j = np.unravel_index(np.argmin(values), values.shape)
    k, l = np.unravel_index(np.argmax(values), values.shape)
    print(f"{quantity:12s} min {values[i, j]:.4f} at theta={math.degrees(thetas[i]):6.1f}"
          f" phi={math.degrees(phis[j]):6.1f}   max {values[k, l]:.4f}"
          f" at theta={math.degrees(thetas[k]):6.1f} phi={math.degrees(phis[l]):6.1f}")

below = np.count_nonzero(maps["product"] < 1.0 - 1e-12)
print(f"\nproduct < bound on {below}/{maps['product'].size} grid points"
      f" ({100.0 * below / maps['product'].size:.1f}% of the sphere grid)")
print(f"sum form minimum {maps['ozawa_sum'].min():.6f} (bound is 1)")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(2, 2, figsize=(10, 6), sharex=True, sharey=True)
    for ax, quantity in zip(axes.ravel(), sweep.QUANTITIES):
        im = ax.imshow(maps[quantity], origin="lower", aspect="auto",
                       extent=(0, 360, 0, 180), cmap="viridis")
        ax.set_title(quantity, fontsize=10)
        fig.colorbar(im, ax=ax, shrink=0.85)
    for ax in axes[1]:
        ax.set_xlabel("phi_OA [deg]")
    for ax in axes[:, 0]:
        ax.set_ylabel("theta_OA [deg]")
    fig.tight_layout()
    fig.savefig("bloch_maps.png", dpi=120)
    print("wrote bloch_maps.png")
except ImportError:
    pass
