"""Position measurement: the needle velocity is the reading.

With the position coupling the needle moves at lam * q0 from the very
first instant, so r(T) = r0 + lam q0 T exactly and inverting the
linear law recovers q0 to floating-point accuracy.  The regime is only
projective while T * lam stays small; pushing it past the bound is
rejected with a report instead of producing quietly wrong numbers.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from bohm_measure import ProjectiveLimitError, exp_coordinate

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

result = exp_coordinate(samples=300, seed=0)
table = result.series["readout"]

fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
left.plot(table["q0"], table["readout"], ".", ms=4)
left.plot([-3, 3], [-3, 3], "k--", lw=0.8)
left.set_xlabel("true $q_0$")
left.set_ylabel("readout $(r(T) - r_0) / (\\lambda T)$")
left.set_title("linear readout, $\\lambda = 0.01$, T = 1")
right.hist(table["abs_error"], bins=30, color="#2e7fba")
right.set_xlabel("absolute readout error")
right.set_ylabel("samples")
right.set_title(f"worst error {table['abs_error'].max():.2e}")
fig.tight_layout()
fig.savefig(OUT / "coordinate_readout.png", dpi=150)
print(f"worst readout error: {table['abs_error'].max():.3e}")

# past the projective regime the configuration is refused outright
try:
    exp_coordinate(lam=1.0, T=3.0)
except ProjectiveLimitError as err:
    print(f"over-limit configuration rejected: {err}")
print(f"wrote {OUT / 'coordinate_readout.png'}")
