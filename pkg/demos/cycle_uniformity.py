# %% [markdown]
# On a directed n-cycle a weight vector is consistent exactly when its sum is
# non-negative, so the state space can be counted and sampled exactly.

# %%
import numpy as np

import negweights as nw

trit = nw.WeightDomain(-1, 1)
for n in (8, 12, 16):
    s = nw.enumerate_consistent_cycle(n, trit)
    print(f"n={n:2d}: {s:>9} consistent of {3**n:>9}  rate {s / 3**n:.3f}")

# %% Runs until 99% of the 3834 states (n=8) have been seen.
rng = nw.make_rng(7)
base = nw.coverage_experiment(8, trit, 0, rng, source="exact")
print("exact sampler:", round(base.normalized, 2), "x |S|")
for tau in (8, 16, 32, 48, 64):
    r = nw.coverage_experiment(8, trit, tau, rng)
    print(f"tau={tau:3d}:", f"{r.normalized:.2f} x |S|" if r.reached else "not reached within 10 |S|")

# %% Edge-weight histogram on a long cycle, started from all-maximum weights.
n = 1000
dom = nw.WeightDomain(-100, 100)
hist = nw.weight_histogram(n, dom, [n // 2, 2 * n, 10 * n], "maximum", rng, reps=200)
uniform = n * 200 / dom.size
for steps, counts in hist.items():
    print(f"after {steps:>6} steps: top bin {counts[-1] / uniform:6.1f}x uniform, worst rel. dev {np.abs(counts / uniform - 1).max():.2f}")
