"""Same particle, different needle, different outcome.

The particle always starts at q0 = 0 in a superposition weighted
0.2 / 0.8 toward p = +1.  Sweeping only the needle's starting position
r0 flips the recorded outcome, so the result is not a function of the
measured system alone.  A classical average would sit at the dashed
line 0.6 for every r0 and never equal either eigen-velocity.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from bohm_measure import exp_contextuality

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

result = exp_contextuality(sweep=81, samples=800, seed=0)
sweep = result.series["sweep"]

fig, ax = plt.subplots(figsize=(7, 4))
resolved = sweep["outcome_index"] >= 0
colors = ["#b2182b" if o == 0 else "#2166ac"
          for o in sweep["outcome_index"][resolved]]
ax.scatter(sweep["r0"][resolved], sweep["final_v_r"][resolved],
           c=colors, s=18)
ax.plot(sweep["r0"], sweep["classical_v_r"], "k--", lw=1,
        label="classical mean velocity 0.6")
ax.set_xlabel("initial needle position $r_0$")
ax.set_ylabel("final needle velocity")
ax.set_title("outcome vs needle starting point at fixed $q_0 = 0$")
ax.legend(frameon=False)
fig.tight_layout()
fig.savefig(OUT / "contextual_outcomes.png", dpi=150)

hist = result.series["outcomes"]
print("sweep outcomes (first 20):",
      sweep["outcome_index"][:20].tolist())
print("random-needle ensemble frequencies:",
      [round(float(f), 3) for f in hist["frequency"]],
      "vs weights", [round(float(p), 3) for p in hist["born_probability"]])
print(f"wrote {OUT / 'contextual_outcomes.png'}")
