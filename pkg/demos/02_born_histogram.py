"""Outcome statistics against squared amplitudes.

Seven momentum branches with lopsided amplitudes.  Counting which
branch each trajectory locks onto reproduces the squared-amplitude
weights without ever invoking them as a postulate: the sampler only
uses the initial configuration density.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from bohm_measure import exp_born

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

result = exp_born(samples=4000, seed=0)
table = result.series["outcomes"]

x = np.arange(len(table["momentum"]))
width = 0.38
fig, ax = plt.subplots(figsize=(7, 4))
ax.bar(x - width / 2, table["born_probability"], width,
       label="squared amplitude", color="#777777")
ax.bar(x + width / 2, table["frequency"], width,
       label="trajectory frequency", color="#2e7fba")
ax.set_xticks(x, [f"{p:g}" for p in table["momentum"]])
ax.set_xlabel("outcome momentum")
ax.set_ylabel("probability")
chi = result.check("chi_square")
ax.set_title(f"chi-square {chi.value:.2f} (6 dof, "
             f"critical {chi.threshold:.2f} at 0.01)")
ax.legend(frameon=False)
fig.tight_layout()
fig.savefig(OUT / "born_histogram.png", dpi=150)

print("counts:", table["count"].tolist())
print(f"chi-square {chi.value:.3f} < {chi.threshold:.3f}: {chi.passed}")
print(f"wrote {OUT / 'born_histogram.png'}")
