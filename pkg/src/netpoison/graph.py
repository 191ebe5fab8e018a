"""Core graph container, label handling and edge-flip mechanics.

Graphs are simple, undirected, unweighted and unattributed, with dense
integer node ids 0..n-1. Instances are immutable after construction:
every mutation produces a new ``Graph``, so concurrent readers are safe.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "Graph",
    "LabelAssignment",
    "FlipKind",
    "FlipCandidate",
    "add_flip",
    "remove_flip",
    "build_graph",
    "apply_flip",
    "apply_flips",
    "sample_complement",
    "degrees",
    "read_edge_list",
    "write_edge_list",
    "read_labels",
    "write_labels",
]


class FlipKind(enum.Enum):
    """The two legal perturbations of a plain graph."""

    ADD = "add"
    REMOVE = "remove"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class FlipCandidate:
    """A proposed edge flip on the unordered pair (u, v), u < v."""

    u: int
    v: int
    kind: FlipKind

    def __post_init__(self) -> None:
        if self.u == self.v:
            raise ValueError(f"flip touches a self-loop ({self.u}, {self.v})")
        if self.u > self.v:
            raise ValueError(f"flip endpoints must satisfy u < v, got ({self.u}, {self.v})")

    @property
    def pair(self) -> tuple[int, int]:
        return (self.u, self.v)

    def inverse(self) -> "FlipCandidate":
        other = FlipKind.REMOVE if self.kind is FlipKind.ADD else FlipKind.ADD
        return FlipCandidate(self.u, self.v, other)

    def sort_key(self) -> tuple[str, int, int]:
        """Deterministic tie-break order: (kind, u, v) lexicographic."""
        return (self.kind.value, self.u, self.v)


def add_flip(u: int, v: int) -> FlipCandidate:
    """ADD candidate with endpoints put in canonical order."""
    return FlipCandidate(min(u, v), max(u, v), FlipKind.ADD)


def remove_flip(u: int, v: int) -> FlipCandidate:
    """REMOVE candidate with endpoints put in canonical order."""
    return FlipCandidate(min(u, v), max(u, v), FlipKind.REMOVE)


class Graph:
    """Immutable simple undirected graph over nodes 0..node_count-1.

    Adjacency is kept as sorted neighbor arrays (set semantics) plus a
    hash set of canonical pairs for O(1) membership; a dense adjacency
    view is materialized only on demand.
    """

    __slots__ = ("node_count", "_pairs", "_indptr", "_indices")

    def __init__(self, node_count: int, pairs: frozenset[tuple[int, int]],
                 indptr: np.ndarray, indices: np.ndarray):
        self.node_count = node_count
        self._pairs = pairs
        self._indptr = indptr
        self._indices = indices

    # -- construction -------------------------------------------------

    @staticmethod
    def _from_pairs(node_count: int, pairs: frozenset[tuple[int, int]]) -> "Graph":
        deg = np.zeros(node_count, dtype=np.int64)
        for u, v in pairs:
            deg[u] += 1
            deg[v] += 1
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        indices = np.empty(indptr[-1], dtype=np.int64)
        cursor = indptr[:-1].copy()
        for u, v in pairs:
            indices[cursor[u]] = v
            cursor[u] += 1
            indices[cursor[v]] = u
            cursor[v] += 1
        for i in range(node_count):
            indices[indptr[i]:indptr[i + 1]].sort()
        return Graph(node_count, pairs, indptr, indices)

    # -- queries ------------------------------------------------------

    @property
    def edge_count(self) -> int:
        return len(self._pairs)

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self._pairs

    def neighbors(self, u: int) -> np.ndarray:
        """Sorted neighbor ids of ``u`` (a read-only view)."""
        return self._indices[self._indptr[u]:self._indptr[u + 1]]

    def degree(self, u: int) -> int:
        return int(self._indptr[u + 1] - self._indptr[u])

    def edges(self) -> list[tuple[int, int]]:
        """Canonical (u < v) edge list in sorted order."""
        return sorted(self._pairs)

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return self._pairs

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) arrays of the symmetric adjacency."""
        return self._indptr, self._indices

    def dense_adjacency(self, dtype=np.float64) -> np.ndarray:
        """Materialize A as a dense symmetric 0/1 matrix."""
        a = np.zeros((self.node_count, self.node_count), dtype=dtype)
        for u, v in self._pairs:
            a[u, v] = 1
            a[v, u] = 1
        return a

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.edges())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.node_count == other.node_count and self._pairs == other._pairs

    def __hash__(self) -> int:
        return hash((self.node_count, self._pairs))

    def __repr__(self) -> str:
        return f"Graph(|V|={self.node_count}, |E|={self.edge_count})"


class LabelAssignment:
    """One label per node, values in 0..num_labels-1.

    ``num_labels`` may exceed the number of labels actually used; unused
    ids are permitted and reported via :attr:`unused_labels`.
    """

    __slots__ = ("labels", "num_labels")

    def __init__(self, labels: Sequence[int] | np.ndarray, num_labels: int | None = None):
        arr = np.asarray(labels, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("labels must be a flat vector")
        if arr.size and arr.min() < 0:
            raise ValueError("labels must be non-negative")
        inferred = int(arr.max()) + 1 if arr.size else 1
        if num_labels is None:
            num_labels = inferred
        elif num_labels < inferred:
            raise ValueError(f"num_labels={num_labels} but labels reach {inferred - 1}")
        arr.setflags(write=False)
        self.labels = arr
        self.num_labels = int(num_labels)

    def __len__(self) -> int:
        return int(self.labels.size)

    def __getitem__(self, i: int) -> int:
        return int(self.labels[i])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelAssignment):
            return NotImplemented
        return self.num_labels == other.num_labels and np.array_equal(self.labels, other.labels)

    @property
    def used_labels(self) -> np.ndarray:
        return np.unique(self.labels)

    @property
    def unused_labels(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.num_labels), self.labels)

    def one_hot(self) -> np.ndarray:
        """The |V| x D indicator matrix; every row sums to one."""
        f = np.zeros((len(self), self.num_labels))
        f[np.arange(len(self)), self.labels] = 1.0
        return f

    def relabeled(self, permutation: Sequence[int]) -> "LabelAssignment":
        """Apply a permutation of label ids (id d becomes permutation[d])."""
        perm = np.asarray(permutation, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.num_labels)):
            raise ValueError("permutation must rearrange 0..num_labels-1")
        return LabelAssignment(perm[self.labels], self.num_labels)

    def __repr__(self) -> str:
        return f"LabelAssignment(n={len(self)}, D={self.num_labels})"


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def build_graph(node_count: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Build a graph from an edge list.

    Reversed duplicates collapse to one undirected edge. Endpoints out of
    0..node_count-1 and self-loops are rejected.
    """
    if node_count < 0:
        raise ValueError("node_count must be non-negative")
    pairs = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if not (0 <= u < node_count and 0 <= v < node_count):
            raise ValueError(f"edge endpoint out of range: ({u}, {v}) with node_count={node_count}")
        if u == v:
            raise ValueError(f"self-loop rejected: ({u}, {v})")
        if u > v:
            u, v = v, u
        pairs.add((u, v))
    return Graph._from_pairs(node_count, frozenset(pairs))


def apply_flip(g: Graph, f: FlipCandidate) -> Graph:
    """Return a new graph equal to ``g`` with exactly ``f`` toggled."""
    return apply_flips(g, [f])


def apply_flips(g: Graph, flips: Sequence[FlipCandidate]) -> Graph:
    """Apply a batch of flips at once (all validated against ``g``).

    The batch must touch pairwise-distinct pairs, so order is irrelevant
    and the result differs from ``g`` in exactly 2*len(flips) adjacency
    entries.
    """
    pairs = set(g.edge_set())
    seen: set[tuple[int, int]] = set()
    for f in flips:
        if f.pair in seen:
            raise ValueError(f"duplicate pair in flip batch: {f.pair}")
        seen.add(f.pair)
        if f.u >= g.node_count or f.v >= g.node_count:
            raise ValueError(f"flip endpoint out of range: {f.pair}")
        if f.kind is FlipKind.ADD:
            if f.pair in pairs:
                raise ValueError(f"inconsistent flip: ADD on existing edge {f.pair}")
            pairs.add(f.pair)
        else:
            if f.pair not in pairs:
                raise ValueError(f"inconsistent flip: REMOVE on non-edge {f.pair}")
            pairs.remove(f.pair)
    return Graph._from_pairs(g.node_count, frozenset(pairs))


def sample_complement(g: Graph, count: int, seed: int) -> list[FlipCandidate]:
    """Sample ``count`` distinct non-edges uniformly, without replacement.

    Returns ADD candidates with u < v. Deterministic for a given seed.
    """
    n = g.node_count
    total = n * (n - 1) // 2
    available = total - g.edge_count
    if count < 0:
        raise ValueError("count must be non-negative")
    if count > available:
        raise ValueError(f"requested {count} non-edges but only {available} exist")
    if count == 0:
        return []
    rng = np.random.default_rng(seed)
    edge_set = g.edge_set()

    # Rejection sampling is cheap while the complement is large; fall back
    # to full enumeration when most pairs are requested.
    if count <= available // 2 and n > 3:
        chosen: set[tuple[int, int]] = set()
        out: list[FlipCandidate] = []
        while len(out) < count:
            batch = max(64, 2 * (count - len(out)))
            us = rng.integers(0, n, size=batch)
            vs = rng.integers(0, n, size=batch)
            for u, v in zip(us.tolist(), vs.tolist()):
                if u == v:
                    continue
                if u > v:
                    u, v = v, u
                p = (u, v)
                if p in edge_set or p in chosen:
                    continue
                chosen.add(p)
                out.append(FlipCandidate(u, v, FlipKind.ADD))
                if len(out) == count:
                    break
        return out

    non_edges = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edge_set]
    idx = rng.choice(len(non_edges), size=count, replace=False)
    return [FlipCandidate(*non_edges[i], FlipKind.ADD) for i in sorted(idx.tolist())]


def degrees(g: Graph) -> np.ndarray:
    """Per-node neighbor counts."""
    indptr, _ = g.csr()
    return np.diff(indptr)


# ---------------------------------------------------------------------------
# text formats
# ---------------------------------------------------------------------------
# Edge list: one edge per line, two whitespace-separated 0-based ids;
# lines starting with '#' are ignored. Label file: "node_id label_id".

def read_edge_list(path: str) -> list[tuple[int, int]]:
    edges: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'u v', got {line!r}")
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer id in {line!r}") from None
    return edges


def write_edge_list(path: str, g: Graph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def read_labels(path: str) -> dict[int, int]:
    labels: dict[int, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'node_id label_id', got {line!r}")
            try:
                node, lab = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer id in {line!r}") from None
            labels[node] = lab
    return labels


def write_labels(path: str, labels: LabelAssignment) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for node, lab in enumerate(labels.labels.tolist()):
            fh.write(f"{node} {lab}\n")
