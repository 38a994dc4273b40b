# %% [markdown]
# Shortest paths with negative weights: restore negative edges one target
# node at a time while keeping a feasible potential.

# %%
import numpy as np

import negweights as nw

rng = nw.make_rng(11)
g = nw.largest_scc_subgraph(nw.gen_gnp(300, 5, rng))
w, _ = nw.run_chain(g, nw.WeightDomain(-10, 10), steps=20 * g.m, seed=4)
print(g, "negative edges:", int((w < 0).sum()))

# %%
work = {}
d = nw.sssp_general(g, w, 0, work=work)
ref = nw.spfa_distances(g, w, 0)
print("equal to SPFA:", np.array_equal(d, ref))
print("restoration rounds:", work["rounds"], "queue insertions:", work["insertions"])

# %% A single edge can close a negative cycle; the result is a marker, not an error.
# Edge (u, v) closes a negative cycle once its weight drops below -dist(v, u).
u, v = g.edges()[0]
back = nw.spfa_distances(g, w, v)[u]
bad = w.copy()
bad[0] = -int(back) - 1
print("dist(v, u) =", back, "-> set w(u, v) =", bad[0], "->", nw.sssp_general(g, bad, 0))
