"""Downstream tasks measuring embedding damage.

Node classification: multinomial logistic regression on node vectors,
scored by micro-F1. Link prediction: cosine scores on held-out edges
against sampled non-edges, scored by average precision. Plus the
adversarial-edge diagnostics (endpoint degrees, edge betweenness).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .attack import AttackResult
from .embeddings import Embedding, cosine, embed_graph, is_deterministic
from .graph import FlipKind, Graph, LabelAssignment, apply_flips, remove_flip, sample_complement
from .seeding import derive_seed

__all__ = [
    "ClassifierModel",
    "EvalStats",
    "LinkPredictionSplit",
    "DiagnosticsReport",
    "stratified_split",
    "logreg_loss_grad",
    "train_logreg",
    "micro_f1",
    "node_classification_eval",
    "make_lp_split",
    "average_precision",
    "link_prediction_eval",
    "edge_betweenness",
    "ks_statistic",
    "adversarial_edge_diagnostics",
]


# ---------------------------------------------------------------------------
# logistic regression
# ---------------------------------------------------------------------------

@dataclass
class ClassifierModel:
    weights: np.ndarray  # D x K
    bias: np.ndarray  # D
    iterations: int
    lam: float
    final_loss: float

    def predict_proba(self, z: Embedding | np.ndarray) -> np.ndarray:
        x = z.vectors if isinstance(z, Embedding) else np.asarray(z)
        logits = x @ self.weights.T + self.bias
        logits -= logits.max(axis=1, keepdims=True)
        e = np.exp(logits)
        return e / e.sum(axis=1, keepdims=True)

    def predict(self, z: Embedding | np.ndarray) -> np.ndarray:
        return self.predict_proba(z).argmax(axis=1)


def logreg_loss_grad(x: np.ndarray, y: np.ndarray, w: np.ndarray, b: np.ndarray,
                     lam: float) -> tuple[float, np.ndarray, np.ndarray]:
    """Regularized softmax cross-entropy and its gradients w.r.t. (w, b)."""
    n = x.shape[0]
    logits = x @ w.T + b
    logits -= logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    p = e / e.sum(axis=1, keepdims=True)
    nll = -np.log(np.maximum(p[np.arange(n), y], 1e-300)).mean()
    loss = nll + 0.5 * lam * (w ** 2).sum()
    y_hot = np.zeros_like(p)
    y_hot[np.arange(n), y] = 1.0
    diff = (p - y_hot) / n
    return float(loss), diff.T @ x + lam * w, diff.sum(axis=0)


def stratified_split(labels: LabelAssignment, n_train: int, seed: int) -> np.ndarray:
    """Pick ``n_train`` node indices covering every class when possible.

    Classes with fewer than 2 members go entirely to training; the rest
    contribute proportionally, at least one node each.
    """
    n = len(labels)
    if not 0 < n_train <= n:
        raise ValueError(f"n_train={n_train} out of range for {n} nodes")
    rng = np.random.default_rng(seed)
    mandatory: list[np.ndarray] = []
    picked: list[np.ndarray] = []
    for c in labels.used_labels:
        idx = rng.permutation(np.flatnonzero(labels.labels == c))
        if idx.size < 2:
            mandatory.append(idx)
        else:
            take = min(idx.size, max(1, int(round(n_train * idx.size / n))))
            picked.append(idx[:take])
    must = np.concatenate(mandatory) if mandatory else np.zeros(0, dtype=np.int64)
    rest = np.concatenate(picked) if picked else np.zeros(0, dtype=np.int64)
    # tiny classes stay in training even when the quota is tight
    room = max(n_train - must.size, 0)
    if rest.size > room:
        rest = rng.permutation(rest)[:room]
    chosen = np.concatenate([must, rest])
    if chosen.size < n_train:
        pool = np.setdiff1d(np.arange(n), chosen)
        extra = rng.permutation(pool)[:n_train - chosen.size]
        chosen = np.concatenate([chosen, extra])
    return np.sort(chosen)


def train_logreg(z: Embedding, labels: LabelAssignment, train_fraction: float = 0.1,
                 lam: float = 1e-4, seed: int = 0, max_iter: int = 500,
                 train_idx: np.ndarray | None = None) -> ClassifierModel:
    """Fit multinomial logistic regression by full-batch descent.

    Trains on a seeded stratified ``train_fraction`` sample (or the
    explicit ``train_idx``). Backtracking line search keeps the
    regularized loss monotonically non-increasing; if no step below the
    backtracking floor decreases it, training aborts with diagnostics.
    """
    if not 0.0 < train_fraction <= 1.0:
        raise ValueError("train_fraction must lie in (0, 1]")
    if train_idx is None:
        n_train = max(1, int(np.ceil(train_fraction * len(labels))))
        train_idx = stratified_split(labels, n_train, seed)
    x = z.vectors[train_idx]
    y = labels.labels[train_idx]
    d = labels.num_labels
    n, k = x.shape

    w = np.zeros((d, k))
    b = np.zeros(d)

    def loss_and_grad(w, b):
        return logreg_loss_grad(x, y, w, b, lam)

    loss, gw, gb = loss_and_grad(w, b)
    step = 1.0
    it = 0
    for it in range(1, max_iter + 1):
        gnorm2 = (gw ** 2).sum() + (gb ** 2).sum()
        if gnorm2 < 1e-14:
            break
        step = min(step * 2.0, 1e4)
        while True:
            w_new = w - step * gw
            b_new = b - step * gb
            new_loss, gw_new, gb_new = loss_and_grad(w_new, b_new)
            if new_loss <= loss - 1e-4 * step * gnorm2:
                break
            step *= 0.5
            if step < 1e-10:
                raise FloatingPointError(
                    f"logistic regression diverged at iteration {it}: "
                    f"loss {loss:.6g}, gradient norm {np.sqrt(gnorm2):.3g}, "
                    f"step floor reached")
        if loss - new_loss < 1e-9 * max(1.0, abs(loss)):
            w, b, loss = w_new, b_new, new_loss
            break
        w, b, loss, gw, gb = w_new, b_new, new_loss, gw_new, gb_new
    return ClassifierModel(weights=w, bias=b, iterations=it, lam=lam, final_loss=float(loss))


def micro_f1(pred: np.ndarray, truth: np.ndarray) -> float:
    """Micro-averaged F1 over classes.

    Aggregates per-class true/false positives and false negatives; for
    single-label multiclass predictions this equals plain accuracy.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {truth.shape}")
    classes = np.union1d(pred, truth)
    tp = fp = fn = 0
    for c in classes.tolist():
        tp += int(((pred == c) & (truth == c)).sum())
        fp += int(((pred == c) & (truth != c)).sum())
        fn += int(((pred != c) & (truth == c)).sum())
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class EvalStats:
    mean: float
    stddev: float
    runs: int
    scores: tuple[float, ...] = field(default=())

    @staticmethod
    def from_scores(scores: list[float]) -> "EvalStats":
        arr = np.asarray(scores, dtype=np.float64)
        sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        return EvalStats(mean=float(arr.mean()), stddev=sd, runs=arr.size,
                         scores=tuple(float(s) for s in scores))


def node_classification_eval(g: Graph, labels: LabelAssignment, embedder,
                             runs: int = 10, seed: int = 0,
                             train_fraction: float = 0.1,
                             lam: float = 1e-4) -> EvalStats:
    """Mean/stddev micro-F1 of logistic regression over ``runs`` repetitions.

    Each run embeds the graph (once overall for deterministic
    embedders), takes a fresh stratified train split, and scores the
    held-out nodes.
    """
    scores = []
    cached = embed_graph(g, embedder, seed=derive_seed(seed, "nc-embed")) \
        if is_deterministic(embedder) else None
    for run in range(runs):
        emb = cached if cached is not None else embed_graph(
            g, embedder, seed=derive_seed(seed, "nc-embed", run))
        split_seed = derive_seed(seed, "nc-split", run)
        n_train = max(1, int(np.ceil(train_fraction * len(labels))))
        train_idx = stratified_split(labels, n_train, split_seed)
        model = train_logreg(emb, labels, train_fraction, lam,
                             seed=split_seed, train_idx=train_idx)
        test_idx = np.setdiff1d(np.arange(len(labels)), train_idx)
        if test_idx.size == 0:
            test_idx = train_idx
        pred = model.predict(emb.vectors[test_idx])
        scores.append(micro_f1(pred, labels.labels[test_idx]))
    return EvalStats.from_scores(scores)


# ---------------------------------------------------------------------------
# link prediction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinkPredictionSplit:
    residual: Graph
    test_pos: list[tuple[int, int]]
    test_neg: list[tuple[int, int]]


def make_lp_split(g: Graph, holdout_fraction: float = 0.1,
                  seed: int = 0) -> LinkPredictionSplit:
    """Hold out a fraction of edges (plus equal non-edges) for scoring.

    Held-out edges are chosen so their removal leaves both endpoints
    non-isolated; sampling retries with a fresh shuffle if a pass cannot
    collect enough.
    """
    n_test = int(holdout_fraction * g.edge_count)
    if n_test < 1:
        raise ValueError(f"holdout_fraction {holdout_fraction} selects no edges "
                         f"(|E|={g.edge_count})")
    rng = np.random.default_rng(seed)
    edges = g.edges()
    deg = np.diff(g.csr()[0]).copy()
    for _ in range(100):
        order = rng.permutation(len(edges))
        local_deg = deg.copy()
        test_pos: list[tuple[int, int]] = []
        for i in order.tolist():
            u, v = edges[i]
            if local_deg[u] > 1 and local_deg[v] > 1:
                test_pos.append((u, v))
                local_deg[u] -= 1
                local_deg[v] -= 1
                if len(test_pos) == n_test:
                    break
        if len(test_pos) == n_test:
            break
    else:
        raise ValueError("could not hold out edges without isolating nodes")
    neg_seed = int(rng.integers(0, 2 ** 31 - 1))
    test_neg = [f.pair for f in sample_complement(g, n_test, seed=neg_seed)]
    residual = apply_flips(g, [remove_flip(u, v) for u, v in test_pos])
    return LinkPredictionSplit(residual=residual, test_pos=sorted(test_pos),
                               test_neg=sorted(test_neg))


def average_precision(scores: list[tuple[tuple[int, int], float]],
                      positives) -> float:
    """Mean of precision at each true positive's rank.

    Ranking is by score descending; ties keep the stable order in which
    pairs were supplied. Every positive pair must carry a score.
    """
    positive_set = {tuple(p) for p in positives}
    scored_pairs = {tuple(pair) for pair, _ in scores}
    missing = positive_set - scored_pairs
    if missing:
        raise ValueError(f"positives missing from scores: {sorted(missing)[:5]}")
    if not positive_set:
        raise ValueError("no positive pairs supplied")
    ranked = sorted(scores, key=lambda item: -item[1])
    hits = 0
    precision_sum = 0.0
    for rank, (pair, _) in enumerate(ranked, start=1):
        if tuple(pair) in positive_set:
            hits += 1
            precision_sum += hits / rank
    return precision_sum / len(positive_set)


def link_prediction_eval(g: Graph, embedder, runs: int = 10, seed: int = 0,
                         holdout_fraction: float = 0.1) -> EvalStats:
    """Mean average precision of cosine scoring over ``runs`` fresh splits."""
    scores = []
    for run in range(runs):
        split = make_lp_split(g, holdout_fraction, seed=derive_seed(seed, "lp-split", run))
        emb = embed_graph(split.residual, embedder, seed=derive_seed(seed, "lp-embed", run))
        pairs = split.test_pos + split.test_neg
        pair_scores = [((u, v), cosine(emb[u], emb[v])) for u, v in pairs]
        scores.append(average_precision(pair_scores, split.test_pos))
    return EvalStats.from_scores(scores)


# ---------------------------------------------------------------------------
# adversarial edge diagnostics
# ---------------------------------------------------------------------------

@njit(cache=True)
def _edge_betweenness_kernel(indptr, indices):
    n = indptr.shape[0] - 1
    acc = np.zeros(indices.shape[0])
    dist = np.empty(n, dtype=np.int64)
    sigma = np.empty(n)
    delta = np.empty(n)
    queue = np.empty(n, dtype=np.int64)
    for s in range(n):
        for i in range(n):
            dist[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        queue[0] = s
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            for j in range(indptr[u], indptr[u + 1]):
                v = indices[j]
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue[tail] = v
                    tail += 1
                if dist[v] == dist[u] + 1:
                    sigma[v] += sigma[u]
        for qi in range(tail - 1, 0, -1):
            w = queue[qi]
            for j in range(indptr[w], indptr[w + 1]):
                v = indices[j]
                if dist[v] == dist[w] - 1:
                    c = sigma[v] / sigma[w] * (1.0 + delta[w])
                    acc[j] += c
                    delta[v] += c
    return acc


def edge_betweenness(g: Graph, normalized: bool = True) -> dict[tuple[int, int], float]:
    """Shortest-path betweenness of every edge (Brandes accumulation).

    Normalized values divide the raw pair count by n(n-1)/2.
    """
    indptr, indices = g.csr()
    n = g.node_count
    acc = _edge_betweenness_kernel(indptr, indices)
    out: dict[tuple[int, int], float] = {}
    for u in range(n):
        for j in range(indptr[u], indptr[u + 1]):
            v = int(indices[j])
            if u < v:
                out[(u, v)] = acc[j]
            else:
                out[(v, u)] = out.get((v, u), 0.0) + acc[j]
    scale = 0.5
    if normalized and n > 1:
        scale /= n * (n - 1) / 2
    return {e: val * scale for e, val in out.items()}


def ks_statistic(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic (sup ECDF distance)."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    grid = np.concatenate([a, b])
    grid.sort()
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


@dataclass
class DiagnosticsReport:
    """Per-flip properties plus distribution comparisons for the clean graph."""

    flip_rows: list[dict]
    adversarial_betweenness: list[float]
    other_edges: dict[tuple[int, int], float]
    clean_degrees: np.ndarray
    ks: float | None
    degree_bins: list[tuple[int, int, int, int]]  # (lo, hi, adversarial, total)
    normalization: str

    @property
    def other_betweenness(self) -> list[float]:
        return list(self.other_edges.values())

    def write_csv(self, prefix: str) -> list[str]:
        deg_path = f"{prefix}_degrees.csv"
        bet_path = f"{prefix}_betweenness.csv"
        with open(deg_path, "w", newline="", encoding="utf-8") as fh:
            fh.write("# logarithmic degree bins [lo, hi); counts of edge endpoints\n")
            writer = csv.writer(fh)
            writer.writerow(["bin_lo", "bin_hi", "adversarial_endpoints",
                             "all_endpoints", "fraction"])
            for lo, hi, adv, total in self.degree_bins:
                frac = adv / total if total else 0.0
                writer.writerow([lo, hi, adv, total, f"{frac:.6f}"])
        with open(bet_path, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# edge betweenness, normalization: {self.normalization}\n")
            writer = csv.writer(fh)
            writer.writerow(["u", "v", "kind", "deg_u", "deg_v", "betweenness",
                             "adversarial"])
            for row in self.flip_rows:
                writer.writerow([row["u"], row["v"], row["kind"], row["deg_u"],
                                 row["deg_v"],
                                 "" if row["betweenness"] is None else f"{row['betweenness']:.8f}",
                                 1])
            for (u, v), val in sorted(self.other_edges.items()):
                writer.writerow([u, v, "edge", int(self.clean_degrees[u]),
                                 int(self.clean_degrees[v]), f"{val:.8f}", 0])
        return [deg_path, bet_path]


def adversarial_edge_diagnostics(clean: Graph, result: AttackResult) -> DiagnosticsReport:
    """Compare selected flips against the rest of the clean graph.

    Endpoint degrees and edge betweenness are measured on the clean
    graph; ADD flips have no betweenness (the pair is absent there).
    The KS statistic contrasts adversarial REMOVE-edge betweenness with
    the untouched edges' distribution.
    """
    deg = np.diff(clean.csr()[0])
    ebc = edge_betweenness(clean, normalized=True) if clean.edge_count else {}
    flips = result.flip_candidates()
    flip_pairs = {f.pair for f in flips}

    rows = []
    adversarial_b = []
    for f in flips:
        bet = ebc.get(f.pair) if f.kind is FlipKind.REMOVE else None
        if bet is not None:
            adversarial_b.append(bet)
        rows.append({"u": f.u, "v": f.v, "kind": f.kind.value,
                     "deg_u": int(deg[f.u]), "deg_v": int(deg[f.v]),
                     "betweenness": bet})
    other = {e: val for e, val in ebc.items() if e not in flip_pairs}
    ks = ks_statistic(adversarial_b, list(other.values())) \
        if adversarial_b and other else None

    max_deg = int(deg.max()) if deg.size else 0
    bins: list[tuple[int, int, int, int]] = []
    adv_endpoints = [d for f in flips for d in (int(deg[f.u]), int(deg[f.v]))]
    all_endpoints = [int(deg[w]) for e in clean.edges() for w in e]
    lo = 1
    while lo <= max(max_deg, 1):
        hi = lo * 2
        adv = sum(1 for d in adv_endpoints if lo <= d < hi)
        total = sum(1 for d in all_endpoints if lo <= d < hi)
        bins.append((lo, hi, adv, total))
        lo = hi

    return DiagnosticsReport(
        flip_rows=rows,
        adversarial_betweenness=adversarial_b,
        other_edges=other,
        clean_degrees=deg,
        ks=ks,
        degree_bins=bins,
        normalization="raw pair count / (n*(n-1)/2), each unordered pair once",
    )
