"""Experiment orchestration: configs, dataset loading, reports.

An :class:`ExperimentConfig` plus its master seed fully determines every
pipeline output; seeds fan out per stage and run via
:func:`netpoison.seeding.derive_seed`. Serialized reports are therefore
byte-identical across repeats (wall-clock timings are kept on the
in-memory report and excluded from the deterministic JSON by default).
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import asdict, dataclass, field

from . import attack as attack_mod
from .attack import AttackBudget, AttackResult, CandidateMode, build_candidates, homophily_state
from .downstream import EvalStats, link_prediction_eval, node_classification_eval
from .embeddings import SkipgramParams, SvdParams
from .generators import ForestFireParams, LfrParams, generate_forest_fire, generate_lfr, louvain
from .graph import Graph, LabelAssignment, build_graph, read_edge_list, read_labels
from .seeding import derive_seed

__all__ = [
    "DEFAULT_BUDGETS",
    "ExperimentConfig",
    "MetricRow",
    "Report",
    "StageError",
    "load_dataset",
    "build_embedder",
    "run_experiment",
    "budget_sweep",
    "metrics_to_csv",
]

DEFAULT_BUDGETS = {
    "lfr": 1000,
    "cora": 1000,
    "forest_fire": 500,
    "polblogs": 1000,
    "citeseer": 1000,
}

ATTACKS = ("clean", "random", "viking", "viking_s")
TASKS = ("node_classification", "link_prediction")
EMBEDDERS = ("skipgram", "node2vec", "svd")


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name and config echo."""

    def __init__(self, stage: str, cfg: "ExperimentConfig", cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause} "
                         f"(config: {json.dumps(cfg.to_dict(), sort_keys=True)})")
        self.stage = stage


@dataclass
class ExperimentConfig:
    """One experiment; every field has a default so configs stay minimal.

    ``dataset`` either names files ({"name", "edges", "labels"}) or a
    generator ({"name", "generator": "lfr"|"forest_fire", "params",
    optionally "labeling": "louvain"}). A null budget resolves from the
    per-dataset defaults.
    """

    dataset: dict = field(default_factory=lambda: {
        "name": "lfr",
        "generator": "lfr",
        "params": {"n": 1000, "tau_degree": 3.0, "tau_community": 2.0,
                   "avg_degree": 20.0, "min_community": 200, "mu": 0.3},
    })
    attack: str = "viking"
    mode: str = "combined"
    budget: int | None = None
    k: float = 2.0
    known_fraction: float = 0.1
    embedder: str = "skipgram"
    embedder_params: dict = field(default_factory=dict)
    tasks: tuple[str, ...] = TASKS
    runs: int = 10
    seed: int = 0
    lp_holdout: float = 0.1

    def __post_init__(self) -> None:
        if self.attack not in ATTACKS:
            raise ValueError(f"attack must be one of {ATTACKS}, got {self.attack!r}")
        if self.mode not in (m.value for m in CandidateMode):
            raise ValueError(f"mode must be add/remove/combined, got {self.mode!r}")
        if self.embedder not in EMBEDDERS:
            raise ValueError(f"embedder must be one of {EMBEDDERS}, got {self.embedder!r}")
        unknown = set(self.tasks) - set(TASKS)
        if unknown:
            raise ValueError(f"unknown tasks: {sorted(unknown)}")
        if self.budget is not None and self.budget < 0:
            raise ValueError("budget must be non-negative")
        self.tasks = tuple(self.tasks)

    @property
    def dataset_name(self) -> str:
        return self.dataset.get("name", "dataset")

    def resolved_budget(self) -> int:
        if self.budget is not None:
            return self.budget
        return DEFAULT_BUDGETS.get(self.dataset_name, 1000)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tasks"] = list(self.tasks)
        return d

    @staticmethod
    def from_dict(payload: dict) -> "ExperimentConfig":
        known = {f for f in ExperimentConfig.__dataclass_fields__}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        if "tasks" in payload:
            payload = dict(payload, tasks=tuple(payload["tasks"]))
        return ExperimentConfig(**payload)

    @staticmethod
    def from_json(path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return ExperimentConfig.from_dict(json.load(fh))


@dataclass(frozen=True)
class MetricRow:
    dataset: str
    attack: str
    mode: str
    budget: int
    embedder: str
    task: str
    mean: float
    stddev: float
    runs: int
    seed: int

    def as_csv(self) -> list:
        return [self.dataset, self.attack, self.mode, self.budget, self.embedder,
                self.task, f"{self.mean:.6f}", f"{self.stddev:.6f}", self.runs, self.seed]


CSV_HEADER = ["dataset", "attack", "mode", "budget", "embedder", "task",
              "mean", "stddev", "runs", "seed"]


@dataclass
class Report:
    config: dict
    rows: list[MetricRow]
    theta_before: float | None
    theta_after: float | None
    flip_count: int
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self, include_timings: bool = False) -> dict:
        d = {
            "config": self.config,
            "metrics": [asdict(r) for r in self.rows],
            "theta_before": self.theta_before,
            "theta_after": self.theta_after,
            "flip_count": self.flip_count,
        }
        if include_timings:
            d["timings"] = self.timings
        return d

    def write_json(self, path: str, include_timings: bool = False) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(include_timings), fh, indent=2, sort_keys=True)
            fh.write("\n")


def metrics_to_csv(path: str, rows: list[MetricRow]) -> None:
    import csv as _csv
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = _csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.as_csv())


# ---------------------------------------------------------------------------
# dataset loading / generation
# ---------------------------------------------------------------------------

def load_dataset(edge_path: str, label_path: str,
                 id_map_path: str | None = None) -> tuple[Graph, LabelAssignment]:
    """Load edge-list + label files, compacting ids to 0..|V|-1.

    Every edge endpoint must carry a label; label ids are likewise
    compacted to 0..D-1. When ``id_map_path`` is given, lines of
    "new_id original_id" record the node compaction.
    """
    raw_edges = read_edge_list(edge_path)
    raw_labels = read_labels(label_path)
    endpoints = {u for e in raw_edges for u in e}
    unlabeled = sorted(endpoints - set(raw_labels))
    if unlabeled:
        shown = ", ".join(map(str, unlabeled[:10]))
        more = "..." if len(unlabeled) > 10 else ""
        raise ValueError(f"{len(unlabeled)} nodes lack labels: {shown}{more}")
    original_ids = sorted(set(raw_labels) | endpoints)
    to_new = {orig: i for i, orig in enumerate(original_ids)}
    label_values = sorted(set(raw_labels.values()))
    label_map = {orig: i for i, orig in enumerate(label_values)}
    g = build_graph(len(original_ids), [(to_new[u], to_new[v]) for u, v in raw_edges])
    labels = LabelAssignment([label_map[raw_labels[orig]] for orig in original_ids],
                             num_labels=len(label_values))
    if id_map_path:
        with open(id_map_path, "w", encoding="utf-8") as fh:
            for new, orig in enumerate(original_ids):
                fh.write(f"{new} {orig}\n")
    return g, labels


def _materialize_dataset(cfg: ExperimentConfig) -> tuple[Graph, LabelAssignment]:
    ds = cfg.dataset
    if "generator" in ds:
        gen_seed = derive_seed(cfg.seed, "generate")
        if ds["generator"] == "lfr":
            params = LfrParams(**ds["params"])
            return generate_lfr(params, seed=gen_seed)
        if ds["generator"] == "forest_fire":
            params = ForestFireParams(**ds["params"])
            g = generate_forest_fire(params, seed=gen_seed)
            labels = louvain(g, seed=derive_seed(cfg.seed, "louvain"))
            return g, labels
        raise ValueError(f"unknown generator {ds['generator']!r}")
    if "edges" in ds and "labels" in ds:
        return load_dataset(ds["edges"], ds["labels"], ds.get("id_map"))
    raise ValueError("dataset must name a generator or edges/labels files")


def build_embedder(cfg: ExperimentConfig):
    """Instantiate the embedder params named by the config."""
    params = dict(cfg.embedder_params)
    if cfg.embedder == "svd":
        return SvdParams(**params)
    return SkipgramParams(**params)


# ---------------------------------------------------------------------------
# experiment pipeline
# ---------------------------------------------------------------------------

def _run_attack(cfg: ExperimentConfig, g: Graph,
                labels: LabelAssignment) -> AttackResult:
    if cfg.attack == "clean":
        theta = homophily_state(g, labels).theta
        return AttackResult(poisoned=g, flips=[], theta_before=theta,
                            theta_after=theta)
    cs = build_candidates(g, CandidateMode(cfg.mode), k=cfg.k,
                          seed=derive_seed(cfg.seed, "candidates"))
    budget = AttackBudget(cfg.resolved_budget())
    if cfg.attack == "viking":
        return attack_mod.viking_attack(g, labels, budget, cs)
    if cfg.attack == "viking_s":
        return attack_mod.viking_s_attack(
            g, labels, cfg.known_fraction, budget, cs,
            seed=derive_seed(cfg.seed, "surrogate"),
            embed_params=build_embedder(cfg) if cfg.embedder != "svd" else None)
    return attack_mod.random_attack(g, budget, cs,
                                    seed=derive_seed(cfg.seed, "random-attack"))


def run_experiment(cfg: ExperimentConfig) -> Report:
    """Load or generate, attack, evaluate each task; fully seed-determined."""
    timings: dict[str, float] = {}

    def staged(stage: str, fn):
        t0 = time.perf_counter()
        try:
            value = fn()
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, cfg, exc) from exc
        timings[stage] = time.perf_counter() - t0
        return value

    g, labels = staged("dataset", lambda: _materialize_dataset(cfg))
    result = staged("attack", lambda: _run_attack(cfg, g, labels))
    embedder = staged("embedder", lambda: build_embedder(cfg))

    rows: list[MetricRow] = []
    budget = cfg.resolved_budget() if cfg.attack != "clean" else 0
    for task in cfg.tasks:
        if task == "node_classification":
            stats: EvalStats = staged(task, lambda: node_classification_eval(
                result.poisoned, labels, embedder, runs=cfg.runs,
                seed=derive_seed(cfg.seed, "eval-nc")))
        else:
            stats = staged(task, lambda: link_prediction_eval(
                result.poisoned, embedder, runs=cfg.runs,
                seed=derive_seed(cfg.seed, "eval-lp"),
                holdout_fraction=cfg.lp_holdout))
        rows.append(MetricRow(
            dataset=cfg.dataset_name, attack=cfg.attack, mode=cfg.mode,
            budget=budget, embedder=cfg.embedder, task=task,
            mean=stats.mean, stddev=stats.stddev, runs=stats.runs, seed=cfg.seed))
    return Report(config=cfg.to_dict(), rows=rows,
                  theta_before=result.theta_before,
                  theta_after=result.theta_after,
                  flip_count=len(result.flips), timings=timings)


def budget_sweep(cfg: ExperimentConfig, budgets: list[int]) -> list[Report]:
    """Repeat the experiment across budgets (see also ``metrics_to_csv``)."""
    if not budgets:
        raise ValueError("budget list must not be empty")
    reports = []
    for b in budgets:
        sub = dataclasses.replace(cfg, budget=int(b))
        reports.append(run_experiment(sub))
    return reports
