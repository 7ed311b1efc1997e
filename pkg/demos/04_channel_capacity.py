"""From trial records to a channel-capacity curve.

Runs a small Monte Carlo sweep on the 20 um square channel (the rectangle
optimum for T=160 s), estimates the conditional delivery PMF f(y|x), and
computes capacity with Blahut-Arimoto for growing input alphabets.  Desk
scale: this uses modest trial counts, so expect +-0.1 bit wiggle.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from kinesim import Rectangle, blahut_arimoto, estimate_pmf, write_pmf_json
from kinesim.experiments import (
    ExperimentConfig,
    capacity_rows,
    records_to_pairs,
    run_trials,
    write_csv,
)

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

config = ExperimentConfig(
    shape=Rectangle(20.0, 20.0),
    T_s=160.0,
    x_max=12,
    trials_per_x=150,
    seed=11,
)
print(f"simulating {config.trials_per_x * (config.x_max + 1)} channel uses "
      f"({config.resolved_mt_count()} MTs per use)...")
records = run_trials(config)

pmf = estimate_pmf(records_to_pairs(records), config.x_max)
write_pmf_json(pmf, OUT / "square20_pmf.json")

rows = capacity_rows(records, list(range(1, config.x_max + 1)))
write_csv(OUT / "square20_capacity.csv",
          ["x_max", "capacity_bits", "iters", "gap_bits"], rows)
res = blahut_arimoto(pmf)
print(f"capacity at x_max={config.x_max}: {res.capacity_bits:.3f} bits "
      f"({res.iterations} BA iterations, bracket gap "
      f"{res.upper_bound_bits - res.lower_bound_bits:.1e} bits)")

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))
im = ax1.imshow(pmf.matrix, origin="lower", cmap="viridis", aspect="auto")
ax1.set_xlabel("delivered y")
ax1.set_ylabel("released x")
ax1.set_title("estimated f(y|x)")
fig.colorbar(im, ax=ax1)
ax2.plot([r["x_max"] for r in rows], [r["capacity_bits"] for r in rows], "o-")
ax2.set_xlabel("maximum released particles")
ax2.set_ylabel("capacity (bits/channel use)")
ax2.set_title("capacity vs input alphabet")
ax2.grid(alpha=0.3)
fig.tight_layout()
fig.savefig(OUT / "square20_capacity.png", dpi=120)
print(f"wrote {OUT / 'square20_capacity.csv'} and .png")
