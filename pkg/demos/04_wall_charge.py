"""Finding charged domain walls from both ends of the utility scale.

A curved 180-degree wall changes its charge state continuously with its
orientation relative to the polarization axis: where polarization diverges
from the wall it is tail-to-tail (+1), where it converges, head-to-head
(-1).  Training the preference loop toward tail-to-tail character makes
the TOP of the learned utility highlight tail-to-tail segments and, as a
byproduct, the BOTTOM highlight head-to-head segments.

Run:  python demos/04_wall_charge.py
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from prefscan.analysis import wall_charge_map
from prefscan.dataset import Dataset, PayloadKind
from prefscan.session import ExperimentConfig, run_experiment

# Circular 180-degree domain: inside polarization points outward, so the
# wall is tail-to-tail where it runs perpendicular to +/-x and the charge
# character varies continuously along it.
h = w = 32
rr, cc = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
inside = (rr - 16.0) ** 2 + (cc - 16.0) ** 2 <= 10.0 ** 2
vectors = np.zeros((h, w, 3))
vectors[:, :, 0] = np.where(inside, 1.0, -1.0)   # P = +x in, -x out
structure = np.where(inside, 1.0, 0.0)
ds = Dataset(name="circular-domain", structure=structure,
             payload_kind=PayloadKind.VECTOR3, vectors=vectors)

charge = wall_charge_map(ds.vectors, radius=4)
print(f"charge map range: [{charge.min():+.2f}, {charge.max():+.2f}]")

cfg = ExperimentConfig(n_initial_random=10, n_steps=20, epochs=1000, seed=2,
                       oracle_scalar="wall_charge", angle_radius=4,
                       window=7)
trace = run_experiment(cfg, dataset=ds)
utility = trace.mean_map

k = 40
order = np.argsort(utility, kind="stable")
top = order[::-1][:k]
bottom = order[:k]
print(f"mean true charge at top-{k} utility:    "
      f"{charge.ravel()[top].mean():+.3f} (tail-to-tail is +1)")
print(f"mean true charge at bottom-{k} utility: "
      f"{charge.ravel()[bottom].mean():+.3f} (head-to-head is -1)")

fig, axes = plt.subplots(1, 3, figsize=(12, 4))
im = axes[0].imshow(charge, cmap="coolwarm", vmin=-1, vmax=1)
axes[0].set_title("wall charge character")
fig.colorbar(im, ax=axes[0], shrink=0.8)
axes[1].imshow(utility.reshape(h, w), cmap="viridis")
axes[1].set_title("learned utility")
axes[2].imshow(structure, cmap="gray")
axes[2].scatter([i % w for i in top], [i // w for i in top], c="red", s=14,
                label=f"top {k}")
axes[2].scatter([i % w for i in bottom], [i // w for i in bottom], c="blue",
                s=14, label=f"bottom {k}")
axes[2].legend(loc="lower right", fontsize=8)
axes[2].set_title("utility extremes")
for ax in axes:
    ax.set_xticks([])
    ax.set_yticks([])
fig.tight_layout()
fig.savefig("demo_wall_charge.png", dpi=120)
print("wrote demo_wall_charge.png")
