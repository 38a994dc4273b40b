# %% [markdown]
# Sampling consistent signed weights on a random digraph.
# Run top to bottom; each cell prints what it computed.

# %%
import numpy as np

import negweights as nw

rng = nw.make_rng(2024)
g = nw.largest_scc_subgraph(nw.gen_gnp(1000, 10, rng))
print(g)

# %% Integer weights in [-100, 100], 20 proposals per edge.
domain = nw.WeightDomain(-100, 100)
w, stats = nw.run_chain(g, domain, steps=20 * g.m, checker="bidijkstra", init="uniform", seed=1)
print("acceptance rate:", round(stats.final.acc_rate, 3))
print("fraction negative:", round(stats.final.frac_negative, 3))
print("mean weight:", round(float(w.mean()), 2))

# %% The chain never leaves the consistent set.
print("consistent:", nw.is_consistent_oracle(g, w))

# %% Acceptance rate over time (cumulative, at power-of-two checkpoints).
for steps, rate in zip(stats.column("steps")[::3], stats.column("acc_rate")[::3]):
    print(f"{int(steps):>8}  {rate:.3f}")

# %% Same proposals, three checkers: identical verdicts, very different work.
rep = nw.compare_checkers(g, domain, 2000, burn_in=5 * g.m, seed=3)
for kind in ("bf", "dijkstra", "bidijkstra"):
    print(f"{kind:>10}: {rep.mean_insertions(kind, True):9.1f} per accept, {rep.mean_insertions(kind, False):9.1f} per reject")

# %% Real-valued weights work the same way.
wr, sr = nw.run_chain(g, nw.WeightDomain(-100, 100, discrete=False), steps=5 * g.m, seed=2)
print(wr.dtype, round(sr.final.acc_rate, 3), nw.is_consistent_oracle(g, wr))
