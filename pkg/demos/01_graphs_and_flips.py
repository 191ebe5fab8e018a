"""Graph containers and edge-flip mechanics.

Builds a small graph, applies single and batched flips, and samples
non-edges from the complement. Everything is immutable: each flip
returns a new graph.
"""

import numpy as np

from netpoison import (
    add_flip,
    apply_flip,
    apply_flips,
    build_graph,
    degrees,
    remove_flip,
    sample_complement,
)

g = build_graph(6, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)])
print("clean graph:   ", g, "degrees:", degrees(g))

# a flip toggles exactly one unordered pair
bridge_cut = apply_flip(g, remove_flip(2, 3))
print("bridge removed:", bridge_cut, "degrees:", degrees(bridge_cut))
print("original intact:", g.edge_count == 7)

# flips validate against the current graph
try:
    apply_flip(g, add_flip(0, 1))
except ValueError as exc:
    print("inconsistent flip rejected:", exc)

# complement sampling is uniform, without replacement, and seeded
candidates = sample_complement(g, 4, seed=11)
print("sampled non-edges:", [f.pair for f in candidates])
assert all(not g.has_edge(*f.pair) for f in candidates)

# batch application: all flips validated against the same base graph
poisoned = apply_flips(g, candidates[:2])
diff = np.abs(g.dense_adjacency() - poisoned.dense_adjacency()).sum()
print("entries changed by a 2-flip batch:", int(diff), "(= 2 per flip)")
