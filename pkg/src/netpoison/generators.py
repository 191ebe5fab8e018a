"""Synthetic benchmark graphs and community labeling.

Two generators (a planted-community power-law benchmark and a forest
fire growth model) plus Louvain community detection for graphs that do
not come with ground-truth labels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, LabelAssignment, build_graph

__all__ = [
    "LfrParams",
    "ForestFireParams",
    "GenerationError",
    "generate_lfr",
    "generate_forest_fire",
    "louvain",
    "modularity",
]

_RETRY_CAP = 100


class GenerationError(RuntimeError):
    """A generator phase could not satisfy its constraints."""


@dataclass(frozen=True)
class LfrParams:
    """Planted-partition benchmark parameters.

    ``mu`` is the fraction of each node's edges that cross community
    boundaries; ``tau_degree``/``tau_community`` are power-law exponents
    for the degree and community-size distributions.
    """

    n: int
    tau_degree: float
    tau_community: float
    avg_degree: float
    min_community: int
    mu: float
    max_degree: int | None = None
    max_community: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError("mu must be in [0, 1]")
        if self.min_community > self.n:
            raise ValueError("min_community must not exceed n")
        if self.avg_degree >= self.n:
            raise ValueError("avg_degree must be below n")
        if self.tau_degree <= 1 or self.tau_community <= 1:
            raise ValueError("power-law exponents must exceed 1")


@dataclass(frozen=True)
class ForestFireParams:
    n: int
    p_forward: float
    p_backward: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_forward < 1.0 and 0.0 <= self.p_backward < 1.0):
            raise ValueError("burning probabilities must lie in [0, 1)")
        if self.n < 1:
            raise ValueError("n must be at least 1")


# ---------------------------------------------------------------------------
# LFR benchmark
# ---------------------------------------------------------------------------

def _bounded_powerlaw_probs(tau: float, low: int, high: int) -> np.ndarray:
    ks = np.arange(low, high + 1, dtype=np.float64)
    w = ks ** (-tau)
    return w / w.sum()


def _solve_min_degree(tau: float, avg_degree: float, max_degree: int) -> int:
    """Smallest integer cutoff whose truncated power law best matches avg_degree."""
    best, best_err = 1, np.inf
    for low in range(1, max_degree):
        probs = _bounded_powerlaw_probs(tau, low, max_degree)
        mean = float(np.arange(low, max_degree + 1) @ probs)
        err = abs(mean - avg_degree)
        if err < best_err:
            best, best_err = low, err
        if mean > avg_degree:
            break
    return best


def _sample_degree_sequence(p: LfrParams, rng: np.random.Generator) -> np.ndarray:
    max_degree = p.max_degree or p.n - 1
    low = _solve_min_degree(p.tau_degree, p.avg_degree, max_degree)
    probs = _bounded_powerlaw_probs(p.tau_degree, low, max_degree)
    support = np.arange(low, max_degree + 1)
    for _ in range(_RETRY_CAP):
        seq = rng.choice(support, size=p.n, p=probs)
        if seq.sum() % 2 == 0:
            return seq.astype(np.int64)
    raise GenerationError("degree sequence: could not reach an even stub total")


def _sample_community_sizes(p: LfrParams, rng: np.random.Generator) -> list[int]:
    max_community = p.max_community or p.n
    if p.min_community > max_community:
        raise GenerationError("community sizes: min_community exceeds max_community")
    probs = _bounded_powerlaw_probs(p.tau_community, p.min_community, max_community)
    support = np.arange(p.min_community, max_community + 1)
    for _ in range(_RETRY_CAP):
        sizes: list[int] = []
        while sum(sizes) < p.n:
            sizes.append(int(rng.choice(support, p=probs)))
        excess = sum(sizes) - p.n
        if excess:
            if sizes[-1] - excess >= p.min_community:
                sizes[-1] -= excess
            else:
                continue
        if p.mu > 0 and len(sizes) < 2:
            continue
        return sizes
    constraint = ">=2 communities" if p.mu > 0 else "sizes summing to n"
    raise GenerationError(f"community sizes: could not satisfy {constraint} "
                          f"with min_community={p.min_community}")


def _assign_communities(deg: np.ndarray, sizes: list[int], mu: float,
                        rng: np.random.Generator) -> np.ndarray:
    """Place each node in a community large enough for its internal degree."""
    n = len(deg)
    membership = np.full(n, -1, dtype=np.int64)
    counts = np.zeros(len(sizes), dtype=np.int64)
    members: list[list[int]] = [[] for _ in sizes]
    free = list(rng.permutation(n))
    for _ in range(10 * _RETRY_CAP * n):
        if not free:
            return membership
        v = free.pop()
        c = int(rng.integers(0, len(sizes)))
        internal = int(round(deg[v] * (1 - mu)))
        if internal < sizes[c]:
            membership[v] = c
            members[c].append(v)
            counts[c] += 1
        else:
            free.append(v)
        if counts[c] > sizes[c]:
            evicted = members[c].pop(int(rng.integers(0, len(members[c]))))
            membership[evicted] = -1
            counts[c] -= 1
            free.append(evicted)
    raise GenerationError("community assignment: a node's internal degree exceeds "
                          "every community size; increase min_community or mu")


def _pair_stubs(stubs: np.ndarray, forbidden: set[tuple[int, int]],
                same_group: np.ndarray | None, rng: np.random.Generator) -> set[tuple[int, int]]:
    """Configuration-model pairing with rejection repair.

    ``forbidden`` holds pairs that must not be (re)created. When
    ``same_group`` is given, endpoints sharing a group are also illegal
    (used for the inter-community phase). Unpairable leftover stubs are
    dropped, which the mixing tolerance absorbs.
    """
    edges: set[tuple[int, int]] = set()
    pool = stubs.copy()
    for _ in range(_RETRY_CAP):
        if pool.size < 2:
            break
        rng.shuffle(pool)
        if pool.size % 2 == 1:
            pool = pool[:-1]
        left, right = pool[0::2], pool[1::2]
        bad: list[int] = []
        for a, b in zip(left.tolist(), right.tolist()):
            if a == b:
                bad.extend((a, b))
                continue
            p = (a, b) if a < b else (b, a)
            if p in edges or p in forbidden or (same_group is not None and same_group[a] == same_group[b]):
                bad.extend((a, b))
                continue
            edges.add(p)
        if not bad:
            return edges
        pool = np.asarray(bad, dtype=np.int64)
    return edges


def generate_lfr(p: LfrParams, seed: int) -> tuple[Graph, LabelAssignment]:
    """Generate a benchmark graph with planted power-law communities.

    Nodes get power-law degrees; each node spends a ``1 - mu`` fraction
    of its stubs inside its community and the rest across communities.
    Community membership doubles as the node label.
    """
    rng = np.random.default_rng(seed)
    last_error: GenerationError | None = None
    for _ in range(_RETRY_CAP):
        try:
            deg = _sample_degree_sequence(p, rng)
            sizes = _sample_community_sizes(p, rng)
            membership = _assign_communities(deg, sizes, p.mu, rng)
        except GenerationError as exc:
            last_error = exc
            continue

        internal = np.round(deg * (1 - p.mu)).astype(np.int64)
        for c in range(len(sizes)):
            in_c = np.flatnonzero(membership == c)
            if internal[in_c].sum() % 2 == 1:
                # Shift one stub outward to make the intra total pairable.
                cand = in_c[internal[in_c] > 0]
                u = int(rng.choice(cand)) if cand.size else int(rng.choice(in_c))
                if internal[u] > 0:
                    internal[u] -= 1

        edges: set[tuple[int, int]] = set()
        for c in range(len(sizes)):
            in_c = np.flatnonzero(membership == c)
            stubs = np.repeat(in_c, internal[in_c])
            edges |= _pair_stubs(stubs, edges, None, rng)

        external = deg - internal
        stubs = np.repeat(np.arange(p.n), external)
        edges |= _pair_stubs(stubs, edges, membership, rng)

        g = build_graph(p.n, edges)
        labels = LabelAssignment(membership, num_labels=len(sizes))
        realized = _mean_mixing(g, labels)
        if abs(realized - p.mu) <= 0.05:
            return g, labels
        last_error = GenerationError(
            f"mixing: realized mean {realized:.3f} outside {p.mu}+-0.05")
    raise last_error or GenerationError("lfr generation failed")


def _mean_mixing(g: Graph, labels: LabelAssignment) -> float:
    """Mean over non-isolated nodes of the cross-community edge fraction."""
    fractions = []
    for u in range(g.node_count):
        nbrs = g.neighbors(u)
        if nbrs.size == 0:
            continue
        cross = int((labels.labels[nbrs] != labels.labels[u]).sum())
        fractions.append(cross / nbrs.size)
    return float(np.mean(fractions)) if fractions else 0.0


# ---------------------------------------------------------------------------
# forest fire
# ---------------------------------------------------------------------------

def generate_forest_fire(p: ForestFireParams, seed: int) -> Graph:
    """Grow a graph by the forest fire process, then symmetrize.

    Each arriving node picks a uniform ambassador, links to it, and
    recursively "burns" geometric numbers of the frontier's out- and
    in-neighbors (means p/(1-p)), linking to every burned node. The
    ambassador link keeps the graph connected.
    """
    rng = np.random.default_rng(seed)
    out_links: list[list[int]] = [[] for _ in range(p.n)]
    in_links: list[list[int]] = [[] for _ in range(p.n)]

    def geometric(prob: float) -> int:
        if prob <= 0.0:
            return 0
        return int(rng.geometric(1.0 - prob)) - 1

    for v in range(1, p.n):
        w = int(rng.integers(0, v))
        visited = {v, w}
        burned = [w]
        frontier = [w]
        while frontier:
            x = frontier.pop(0)
            for pool, count in ((out_links[x], geometric(p.p_forward)),
                                (in_links[x], geometric(p.p_backward))):
                fresh = [y for y in pool if y not in visited]
                if count and fresh:
                    picked = rng.permutation(len(fresh))[:count]
                    for i in picked.tolist():
                        y = fresh[i]
                        visited.add(y)
                        burned.append(y)
                        frontier.append(y)
        for y in burned:
            out_links[v].append(y)
            in_links[y].append(v)

    edges = {(min(u, y), max(u, y)) for u in range(p.n) for y in out_links[u]}
    return build_graph(p.n, edges)


# ---------------------------------------------------------------------------
# modularity and Louvain
# ---------------------------------------------------------------------------

def modularity(g: Graph, labels: LabelAssignment) -> float:
    """Newman modularity of a partition; in [-0.5, 1]."""
    if len(labels) != g.node_count:
        raise ValueError(f"labels cover {len(labels)} nodes, graph has {g.node_count}")
    m = g.edge_count
    if m == 0:
        raise ValueError("modularity is undefined on an edgeless graph")
    lab = labels.labels
    intra = np.zeros(labels.num_labels)
    for u, v in g.edge_set():
        if lab[u] == lab[v]:
            intra[lab[u]] += 1
    deg_tot = np.zeros(labels.num_labels)
    indptr, _ = g.csr()
    np.add.at(deg_tot, lab, np.diff(indptr))
    return float((intra / m - (deg_tot / (2 * m)) ** 2).sum())


def louvain(g: Graph, seed: int, restarts: int = 5) -> LabelAssignment:
    """Greedy modularity maximization, returning the final flat partition.

    Alternates local moving and community aggregation until no move
    improves modularity; the best of ``restarts`` seeded visit orders is
    returned. Deterministic given the seed: node visit order is a seeded
    shuffle, ties go to the lowest community id.
    """
    if g.edge_count == 0:
        raise ValueError("louvain requires at least one edge")
    seeds = np.random.SeedSequence(seed).generate_state(max(restarts, 1))
    best: LabelAssignment | None = None
    best_q = -np.inf
    for sub_seed in seeds.tolist():
        labels = _louvain_once(g, np.random.default_rng(sub_seed))
        q = modularity(g, labels)
        if q > best_q + 1e-12:
            best, best_q = labels, q
    return best


def _louvain_once(g: Graph, rng: np.random.Generator) -> LabelAssignment:
    n = g.node_count
    adj: list[dict[int, float]] = [dict() for _ in range(n)]
    for u, v in g.edge_set():
        adj[u][v] = adj[u].get(v, 0.0) + 1.0
        adj[v][u] = adj[v].get(u, 0.0) + 1.0
    self_w = np.zeros(n)
    node_of: np.ndarray = np.arange(n)  # original node -> current level node

    while True:
        comm, moved = _local_move(adj, self_w, rng)
        groups = sorted(set(comm.tolist()))
        remap = {c: i for i, c in enumerate(groups)}
        comm = np.asarray([remap[c] for c in comm.tolist()], dtype=np.int64)
        node_of = comm[node_of]
        if not moved or len(groups) == len(adj):
            break
        adj, self_w = _aggregate(adj, self_w, comm, len(groups))
    return LabelAssignment(node_of, num_labels=int(node_of.max()) + 1)


def _local_move(adj: list[dict[int, float]], self_w: np.ndarray,
                rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    n = len(adj)
    strength = np.array([sum(w.values()) for w in adj]) + 2.0 * self_w
    two_m = strength.sum()
    if two_m == 0:
        return np.arange(n), False
    comm = np.arange(n)
    comm_tot = strength.copy()
    moved_any = False
    order = np.arange(n)
    for _ in range(10_000):
        rng.shuffle(order)
        moved = 0
        for u in order.tolist():
            cu = int(comm[u])
            k_u = strength[u]
            comm_tot[cu] -= k_u
            # weight from u into each adjacent community
            w_in: dict[int, float] = {cu: 0.0}
            for v, w in adj[u].items():
                w_in[int(comm[v])] = w_in.get(int(comm[v]), 0.0) + w
            best_c, best_gain = cu, w_in.get(cu, 0.0) - comm_tot[cu] * k_u / two_m
            for c, w in sorted(w_in.items()):
                gain = w - comm_tot[c] * k_u / two_m
                if gain > best_gain + 1e-12 or (abs(gain - best_gain) <= 1e-12 and c < best_c):
                    best_c, best_gain = c, gain
            comm[u] = best_c
            comm_tot[best_c] += k_u
            if best_c != cu:
                moved += 1
        if moved == 0:
            break
        moved_any = True
    return comm, moved_any


def _aggregate(adj: list[dict[int, float]], self_w: np.ndarray,
               comm: np.ndarray, n_comms: int) -> tuple[list[dict[int, float]], np.ndarray]:
    new_adj: list[dict[int, float]] = [dict() for _ in range(n_comms)]
    new_self = np.zeros(n_comms)
    for u in range(len(adj)):
        cu = int(comm[u])
        new_self[cu] += self_w[u]
        for v, w in adj[u].items():
            if v < u:
                continue
            cv = int(comm[v])
            if cu == cv:
                new_self[cu] += w
            else:
                new_adj[cu][cv] = new_adj[cu].get(cv, 0.0) + w
                new_adj[cv][cu] = new_adj[cv].get(cu, 0.0) + w
    return new_adj, new_self
