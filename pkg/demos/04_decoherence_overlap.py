"""How fast the needle packets stop interfering.

The packet overlap for two outcomes falls off as a Gaussian in time;
by T = 6 sigma / (lam dp) the branches are six widths apart and the
overlap has dropped to exp(-4.5), about 1.1%.  Stronger coupling or
larger momentum separation shortens T.  The right panel shows when
individual trajectories actually lock onto an outcome: typically well
before T.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from bohm_measure import exp_decoherence

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

result = exp_decoherence(samples=800, seed=0)
curves = result.series["overlap_curves"]
grid = result.series["grid"]

fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
shown = [(1.0, 1.0, 2.0), (1.0, 0.5, 2.0), (1.0, 3.0, 2.0), (2.0, 1.0, 2.0)]
for s, l, d in shown:
    pick = ((curves["sigma"] == s) & (curves["lambda"] == l)
            & (curves["dp"] == d))
    row = (grid["sigma"] == s) & (grid["lambda"] == l) & (grid["dp"] == d)
    T = grid["T"][row][0]
    line, = left.plot(curves["t"][pick], curves["overlap"][pick],
                      label=f"$\\sigma$={s:g}, $\\lambda$={l:g}: T={T:g}")
    left.axvline(T, color=line.get_color(), ls=":", lw=0.8)
left.axhline(np.exp(-4.5), color="k", lw=0.8, ls="--")
left.set_xlabel("t")
left.set_ylabel("packet overlap")
left.set_xlim(0, 8)
left.legend(frameon=False, fontsize=8)
left.set_title("overlap decay, $\\Delta p = 2$")

locks = result.series["lock_times"]["t_lock"]
right.hist(locks, bins=40, color="#2e7fba")
right.axvline(float(np.median(locks)), color="k", ls="--",
              label=f"median {np.median(locks):.2f}")
right.axvline(3.0, color="#b2182b", ls=":", label="T = 3")
right.set_xlabel("outcome lock time")
right.set_ylabel("trajectories")
right.legend(frameon=False)
right.set_title("when trajectories commit ($\\sigma=\\lambda=1$)")
fig.tight_layout()
fig.savefig(OUT / "decoherence_overlap.png", dpi=150)

print(f"median lock time {np.median(locks):.2f} vs T = 3")
print(f"wrote {OUT / 'decoherence_overlap.png'}")
