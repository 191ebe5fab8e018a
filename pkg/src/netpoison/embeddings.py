"""Unsupervised node embeddings: random-walk skipgram and SVD variants.

``embed_graph`` dispatches on a params dataclass so the evaluators can
treat every embedder uniformly; an already-built :class:`Embedding` is
accepted too, which is how externally produced embedding files enter
the pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph import Graph

__all__ = [
    "WalkCorpus",
    "Embedding",
    "SkipgramParams",
    "SvdParams",
    "generate_walks",
    "sgns_train",
    "sgns_pair_loss",
    "sgns_pair_gradient",
    "svd_deepwalk",
    "cosine",
    "embed_graph",
    "is_deterministic",
    "read_embedding",
    "write_embedding",
]


@dataclass(frozen=True)
class SkipgramParams:
    """Random-walk skipgram settings; p = q = 1 is the unbiased walker."""

    dim: int = 128
    walks_per_node: int = 10
    walk_length: int = 80
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    p: float = 1.0
    q: float = 1.0

    @property
    def name(self) -> str:
        return "skipgram" if self.p == 1.0 and self.q == 1.0 else "node2vec"


@dataclass(frozen=True)
class SvdParams:
    """Matrix-factorization variant: log of the window-averaged walk matrix."""

    dim: int = 128
    window: int = 10
    negatives: float = 1.0

    @property
    def name(self) -> str:
        return "svd"


class Embedding:
    """A |V| x K matrix of node vectors, K < |V|, all entries finite."""

    __slots__ = ("vectors",)

    def __init__(self, vectors: np.ndarray):
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise ValueError("embedding must be a 2-D matrix")
        if vectors.shape[1] >= vectors.shape[0]:
            raise ValueError(f"embedding dim {vectors.shape[1]} must be below "
                             f"the node count {vectors.shape[0]}")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("embedding contains non-finite entries")
        self.vectors = vectors

    @property
    def node_count(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __getitem__(self, u: int) -> np.ndarray:
        return self.vectors[u]

    def __repr__(self) -> str:
        return f"Embedding(n={self.node_count}, K={self.dim})"


class WalkCorpus:
    """Padded walk matrix: row i is a walk, -1 pads past its length."""

    __slots__ = ("walks", "lengths", "node_count", "params")

    def __init__(self, walks: np.ndarray, lengths: np.ndarray, node_count: int,
                 params: SkipgramParams):
        self.walks = walks
        self.lengths = lengths
        self.node_count = node_count
        self.params = params

    def __len__(self) -> int:
        return self.walks.shape[0]

    def walk_list(self) -> list[np.ndarray]:
        return [self.walks[i, :self.lengths[i]] for i in range(len(self))]

    def token_count(self) -> int:
        return int(self.lengths.sum())


# ---------------------------------------------------------------------------
# random walks
# ---------------------------------------------------------------------------

@njit(cache=True)
def _walk_kernel(indptr, indices, walks_per_node, walk_length, p, q, seeds,
                 out, lengths):
    n = indptr.shape[0] - 1
    biased = not (p == 1.0 and q == 1.0)
    for root in range(n):
        np.random.seed(seeds[root])
        for w in range(walks_per_node):
            row = root * walks_per_node + w
            out[row, 0] = root
            length = 1
            cur = root
            prev = -1
            for step in range(1, walk_length):
                lo, hi = indptr[cur], indptr[cur + 1]
                deg = hi - lo
                if deg == 0:
                    break
                if not biased or prev < 0:
                    nxt = indices[lo + np.random.randint(0, deg)]
                else:
                    # second-order weights: 1/p back to prev, 1 to prev's
                    # neighbors, 1/q otherwise
                    total = 0.0
                    plo, phi = indptr[prev], indptr[prev + 1]
                    for j in range(lo, hi):
                        x = indices[j]
                        if x == prev:
                            wgt = 1.0 / p
                        elif _binary_contains(indices, plo, phi, x):
                            wgt = 1.0
                        else:
                            wgt = 1.0 / q
                        total += wgt
                    rtarget = np.random.random() * total
                    acc = 0.0
                    nxt = indices[hi - 1]
                    for j in range(lo, hi):
                        x = indices[j]
                        if x == prev:
                            wgt = 1.0 / p
                        elif _binary_contains(indices, plo, phi, x):
                            wgt = 1.0
                        else:
                            wgt = 1.0 / q
                        acc += wgt
                        if acc >= rtarget:
                            nxt = x
                            break
                out[row, step] = nxt
                prev = cur
                cur = nxt
                length += 1
            lengths[row] = length


@njit(cache=True)
def _binary_contains(arr, lo, hi, x):
    while lo < hi:
        mid = (lo + hi) // 2
        if arr[mid] == x:
            return True
        if arr[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return False


def generate_walks(g: Graph, walks_per_node: int = 10, walk_length: int = 80,
                   p: float = 1.0, q: float = 1.0, seed: int = 0) -> WalkCorpus:
    """Run ``walks_per_node`` (p, q)-biased walks from every node.

    Each root gets an independently derived seed, so results do not
    depend on traversal order. Isolated roots yield length-1 walks.
    """
    if walk_length < 1:
        raise ValueError("walk_length must be at least 1")
    if p <= 0 or q <= 0:
        raise ValueError("p and q must be positive")
    indptr, indices = g.csr()
    seeds = np.random.SeedSequence(seed).generate_state(max(g.node_count, 1)).astype(np.int64)
    out = np.full((g.node_count * walks_per_node, walk_length), -1, dtype=np.int64)
    lengths = np.zeros(g.node_count * walks_per_node, dtype=np.int64)
    if g.node_count:
        _walk_kernel(indptr, indices, walks_per_node, walk_length,
                     float(p), float(q), seeds, out, lengths)
    params = SkipgramParams(walks_per_node=walks_per_node, walk_length=walk_length,
                            p=p, q=q)
    return WalkCorpus(out, lengths, g.node_count, params)


# ---------------------------------------------------------------------------
# skipgram with negative sampling
# ---------------------------------------------------------------------------

def sgns_pair_loss(u: np.ndarray, v_pos: np.ndarray, v_negs: np.ndarray) -> float:
    """Negative-sampling loss of one (center, context) pair."""
    def log_sigmoid(x):
        return -np.logaddexp(0.0, -x)
    loss = -log_sigmoid(u @ v_pos)
    for vn in v_negs:
        loss -= log_sigmoid(-(u @ vn))
    return float(loss)


def sgns_pair_gradient(u: np.ndarray, v_pos: np.ndarray,
                       v_negs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Analytic gradients of :func:`sgns_pair_loss` w.r.t. all inputs."""
    sig = lambda x: 1.0 / (1.0 + np.exp(-x))
    g_pos = sig(u @ v_pos) - 1.0
    gu = g_pos * v_pos
    gv_pos = g_pos * u
    gv_negs = np.empty_like(v_negs)
    for i, vn in enumerate(v_negs):
        g_neg = sig(u @ vn)
        gu = gu + g_neg * vn
        gv_negs[i] = g_neg * u
    return gu, gv_pos, gv_negs


@njit(cache=True)
def _sgns_kernel(walks, lengths, w_in, w_out, window, negatives, lr0, epochs,
                 neg_cdf, total_tokens, seed):
    np.random.seed(seed)
    dim = w_in.shape[1]
    lr_floor = lr0 * 1e-4
    epoch_losses = np.zeros(epochs)
    processed = 0
    for epoch in range(epochs):
        loss_sum = 0.0
        pair_count = 0
        for row in range(walks.shape[0]):
            length = lengths[row]
            for i in range(length):
                center = walks[row, i]
                span = 1 + np.random.randint(0, window)
                lo = i - span if i - span > 0 else 0
                hi = i + span + 1 if i + span + 1 < length else length
                for j in range(lo, hi):
                    if j == i:
                        continue
                    context = walks[row, j]
                    lr = lr0 * (1.0 - processed / (epochs * total_tokens + 1.0))
                    if lr < lr_floor:
                        lr = lr_floor
                    # positive target then `negatives` unigram^(3/4) draws
                    for s in range(negatives + 1):
                        if s == 0:
                            target = context
                            label = 1.0
                        else:
                            r = np.random.random()
                            target = np.searchsorted(neg_cdf, r)
                            if target == context:
                                continue
                            label = 0.0
                        dot = 0.0
                        for k in range(dim):
                            dot += w_in[center, k] * w_out[target, k]
                        if dot > 30.0:
                            sig = 1.0
                        elif dot < -30.0:
                            sig = 0.0
                        else:
                            sig = 1.0 / (1.0 + np.exp(-dot))
                        if label > 0.5:
                            loss_sum += 30.0 if dot < -30.0 else np.log(1.0 + np.exp(-dot))
                        else:
                            loss_sum += 30.0 if dot > 30.0 else np.log(1.0 + np.exp(dot))
                        grad = (label - sig) * lr
                        for k in range(dim):
                            tmp = w_in[center, k]
                            w_in[center, k] += grad * w_out[target, k]
                            w_out[target, k] += grad * tmp
                    pair_count += 1
                processed += 1
        epoch_losses[epoch] = loss_sum / pair_count if pair_count > 0 else 0.0
    return epoch_losses


def sgns_train(corpus: WalkCorpus, dim: int = 128, window: int = 10,
               negatives: int = 5, epochs: int = 5, learning_rate: float = 0.025,
               seed: int = 0, loss_history: list[float] | None = None) -> Embedding:
    """Train skipgram-with-negative-sampling vectors over a walk corpus.

    Center/context pairs come from a per-position window of size drawn
    uniformly in 1..window; negatives follow the unigram^(3/4) node
    distribution of the corpus. Single-threaded and deterministic for a
    given seed; returns the center vectors. Per-epoch mean pair losses
    are appended to ``loss_history`` when a list is passed.
    """
    if len(corpus) == 0 or corpus.token_count() == 0:
        raise ValueError("corpus is empty")
    n = corpus.node_count
    if dim >= n:
        raise ValueError(f"dim {dim} must be below the node count {n}")

    counts = np.bincount(corpus.walks[corpus.walks >= 0].ravel(), minlength=n).astype(np.float64)
    weights = counts ** 0.75
    if weights.sum() == 0:
        raise ValueError("corpus has no tokens")
    neg_cdf = np.cumsum(weights / weights.sum())
    neg_cdf[-1] = 1.0 + 1e-12

    rng = np.random.default_rng(seed)
    w_in = (rng.random((n, dim)) - 0.5) / dim
    w_out = np.zeros((n, dim))
    if epochs == 0:
        return Embedding(w_in)

    kernel_seed = int(rng.integers(0, 2 ** 31 - 1))
    losses = _sgns_kernel(corpus.walks, corpus.lengths, w_in, w_out,
                          window, negatives, learning_rate, epochs,
                          neg_cdf, corpus.token_count(), kernel_seed)
    for epoch, loss in enumerate(losses.tolist()):
        if not np.isfinite(loss):
            raise FloatingPointError(
                f"non-finite loss at epoch {epoch} (learning_rate={learning_rate})")
    if loss_history is not None:
        loss_history.extend(losses.tolist())
    return Embedding(w_in)


# ---------------------------------------------------------------------------
# SVD variant
# ---------------------------------------------------------------------------

def deepwalk_matrix(g: Graph, window: int = 10, negatives: float = 1.0) -> np.ndarray:
    """Dense log-max matrix whose factorization approximates the walk objective.

    M = log(max(1, vol(G)/(b*T) * (sum_{r=1..T} (D^-1 A)^r) D^-1)). Rows
    and columns of isolated nodes are zero. Memory is |V|^2 reals.
    """
    if g.edge_count == 0:
        raise ValueError("graph has no edges")
    n = g.node_count
    deg = np.diff(g.csr()[0]).astype(np.float64)
    vol = deg.sum()
    inv_deg = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)

    import scipy.sparse as sp

    rows, cols = [], []
    for u, v in g.edge_set():
        rows.extend((u, v))
        cols.extend((v, u))
    a = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    p = sp.diags(inv_deg) @ a

    acc = np.zeros((n, n))
    power = np.eye(n)
    for _ in range(window):
        power = p @ power
        acc += power
    m = (vol / (negatives * window)) * acc * inv_deg[np.newaxis, :]
    return np.log(np.maximum(m, 1.0))


def _svd_factors(g: Graph, dim: int, window: int, negatives: float):
    m = deepwalk_matrix(g, window, negatives)
    n = m.shape[0]
    if dim >= n:
        raise ValueError(f"dim {dim} must be below the node count {n}")
    if dim <= n // 4 and n > 64:
        import scipy.sparse.linalg as spla
        v0 = np.full(n, 1.0 / np.sqrt(n))
        u, s, vt = spla.svds(m, k=dim, v0=v0)
        order = np.argsort(-s)
        u, s, vt = u[:, order], s[order], vt[order]
    else:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
        u, s, vt = u[:, :dim], s[:dim], vt[:dim]
    tol = max(m.shape) * np.finfo(float).eps * (s[0] if s.size else 1.0)
    if s.size and s[-1] <= tol:
        rank = int((s > tol).sum())
        raise ValueError(f"dim {dim} exceeds the matrix rank (~{rank})")
    return m, u, s, vt


def svd_deepwalk(g: Graph, dim: int = 128, window: int = 10,
                 negatives: float = 1.0) -> Embedding:
    """Rank-``dim`` factorization embedding: U_K sqrt(S_K) of the log matrix.

    Deterministic; column signs are canonicalized so the entry of
    largest magnitude in each column is positive.
    """
    _, u, s, _ = _svd_factors(g, dim, window, negatives)
    z = u * np.sqrt(s)[np.newaxis, :]
    flip = np.sign(z[np.abs(z).argmax(axis=0), np.arange(z.shape[1])])
    flip[flip == 0] = 1.0
    return Embedding(z * flip[np.newaxis, :])


# ---------------------------------------------------------------------------
# utilities
# ---------------------------------------------------------------------------

def cosine(zu: np.ndarray, zv: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; zero if either vector is zero."""
    zu = np.asarray(zu, dtype=np.float64)
    zv = np.asarray(zv, dtype=np.float64)
    if zu.shape != zv.shape:
        raise ValueError(f"dimension mismatch: {zu.shape} vs {zv.shape}")
    nu, nv = np.linalg.norm(zu), np.linalg.norm(zv)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(zu @ zv / (nu * nv), -1.0, 1.0))


def embed_graph(g: Graph, config, seed: int = 0) -> Embedding:
    """Embed ``g`` according to a params dataclass or pass through an Embedding."""
    if isinstance(config, Embedding):
        if config.node_count != g.node_count:
            raise ValueError(f"embedding covers {config.node_count} nodes, "
                             f"graph has {g.node_count}")
        return config
    if isinstance(config, SvdParams):
        return svd_deepwalk(g, dim=config.dim, window=config.window,
                            negatives=config.negatives)
    if isinstance(config, SkipgramParams):
        corpus = generate_walks(g, config.walks_per_node, config.walk_length,
                                config.p, config.q, seed=seed)
        return sgns_train(corpus, dim=config.dim, window=config.window,
                          negatives=config.negatives, epochs=config.epochs,
                          learning_rate=config.learning_rate, seed=seed)
    raise TypeError(f"unsupported embedder config: {config!r}")


def is_deterministic(config) -> bool:
    """True when re-embedding with any seed reproduces identical vectors."""
    return isinstance(config, (SvdParams, Embedding))


def write_embedding(path: str, emb: Embedding) -> None:
    """Text format: header '|V| K', then 'node_id v1 ... vK' per line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{emb.node_count} {emb.dim}\n")
        for i in range(emb.node_count):
            vals = " ".join(repr(float(x)) for x in emb.vectors[i])
            fh.write(f"{i} {vals}\n")


def read_embedding(path: str) -> Embedding:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: malformed header, expected '|V| K'")
        n, k = int(header[0]), int(header[1])
        vectors = np.zeros((n, k))
        seen = np.zeros(n, dtype=bool)
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != k + 1:
                raise ValueError(f"{path}:{lineno}: expected node id plus {k} values")
            node = int(parts[0])
            if not 0 <= node < n:
                raise ValueError(f"{path}:{lineno}: node id {node} out of range")
            vectors[node] = [float(x) for x in parts[1:]]
            seen[node] = True
    if not seen.all():
        missing = np.flatnonzero(~seen)[:5].tolist()
        raise ValueError(f"{path}: missing vectors for nodes {missing}...")
    return Embedding(vectors)
