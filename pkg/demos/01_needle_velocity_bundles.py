"""Needle velocity bundles for a two-momentum measurement.

Every trajectory starts from a Born-sampled configuration and ends with
the needle moving at one of the two eigen-velocities, -1 or +1.  Three
panels: equal weights, weights 0.9/0.1, and the light-particle case
where the pre-locking velocities fluctuate visibly harder.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from bohm_measure import exp_momentum_basic

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

panels = [
    ("a", "equal weights, m = 1"),
    ("b", "weights 0.9 / 0.1, m = 1"),
    ("c", "weights 0.9 / 0.1, m = 0.01"),
]

fig, axes = plt.subplots(1, 3, figsize=(12, 3.6), sharey=True)
for ax, (variant, title) in zip(axes, panels):
    result = exp_momentum_basic(variant, samples=60, bundle=60, seed=0)
    table = result.series["trajectories"]
    for k in np.unique(table["trajectory_id"]):
        pick = table["trajectory_id"] == k
        ax.plot(table["t"][pick], table["v_r"][pick], lw=0.6, alpha=0.5)
    ax.axhline(1.0, color="k", ls=":", lw=0.8)
    ax.axhline(-1.0, color="k", ls=":", lw=0.8)
    ax.set_title(title, fontsize=10)
    ax.set_xlabel("t")
    counts = result.manifest["counts"]
    print(f"variant {variant}: {counts['resolved']}/{counts['samples']} "
          f"resolved, split "
          f"{[int(c) for c in result.series['outcomes']['count']]}")
axes[0].set_ylabel("needle velocity $v_r$")
fig.tight_layout()
fig.savefig(OUT / "needle_velocity_bundles.png", dpi=150)
print(f"wrote {OUT / 'needle_velocity_bundles.png'}")
