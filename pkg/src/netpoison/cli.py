"""Command-line front end; stages compose through the documented text formats."""

from __future__ import annotations

import argparse
import json
import sys

from .attack import (
    AttackBudget,
    AttackResult,
    CandidateMode,
    build_candidates,
    random_attack,
    viking_attack,
    viking_s_attack,
)
from .downstream import (
    adversarial_edge_diagnostics,
    link_prediction_eval,
    node_classification_eval,
)
from .embeddings import (
    SkipgramParams,
    SvdParams,
    embed_graph,
    read_embedding,
    write_embedding,
)
from .generators import ForestFireParams, LfrParams, generate_forest_fire, generate_lfr, louvain
from .graph import Graph, build_graph, read_edge_list, write_edge_list, write_labels
from .harness import (
    ExperimentConfig,
    MetricRow,
    StageError,
    budget_sweep,
    load_dataset,
    metrics_to_csv,
    run_experiment,
)
from .seeding import derive_seed


def _graph_from_edges(path: str) -> Graph:
    edges = read_edge_list(path)
    n = max((max(u, v) for u, v in edges), default=-1) + 1
    return build_graph(n, edges)


def _add_embedder_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--embedder", choices=["skipgram", "node2vec", "svd"],
                   default="skipgram")
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--walks", type=int, default=10)
    p.add_argument("--walk-length", type=int, default=80)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--q", type=float, default=1.0)


def _embedder_from_args(args) -> SkipgramParams | SvdParams:
    if args.embedder == "svd":
        return SvdParams(dim=args.dim, window=args.window)
    return SkipgramParams(dim=args.dim, walks_per_node=args.walks,
                          walk_length=args.walk_length, window=args.window,
                          negatives=args.negatives, epochs=args.epochs,
                          learning_rate=args.lr, p=args.p, q=args.q)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_generate(args) -> int:
    if args.model == "lfr":
        params = LfrParams(n=args.n, tau_degree=args.tau_degree,
                           tau_community=args.tau_community,
                           avg_degree=args.avg_degree,
                           min_community=args.min_community, mu=args.mu)
        g, labels = generate_lfr(params, seed=args.seed)
    else:
        params = ForestFireParams(n=args.n, p_forward=args.p_forward,
                                  p_backward=args.p_backward)
        g = generate_forest_fire(params, seed=args.seed)
        labels = louvain(g, seed=derive_seed(args.seed, "louvain"))
    write_edge_list(args.out_edges, g)
    write_labels(args.out_labels, labels)
    print(f"generated {args.model}: |V|={g.node_count} |E|={g.edge_count} "
          f"D={labels.num_labels}")
    return 0


def _cmd_attack(args) -> int:
    g, labels = load_dataset(args.edges, args.labels, args.id_map)
    cs = build_candidates(g, CandidateMode(args.mode), k=args.k,
                          seed=derive_seed(args.seed, "candidates"))
    budget = AttackBudget(args.budget)
    if args.attack == "viking":
        result = viking_attack(g, labels, budget, cs)
    elif args.attack == "viking_s":
        result = viking_s_attack(g, labels, args.known_fraction, budget, cs,
                                 seed=derive_seed(args.seed, "surrogate"))
    else:
        result = random_attack(g, budget, cs, seed=derive_seed(args.seed, "random-attack"))
    write_edge_list(args.out_edges, result.poisoned)
    if args.out_flips:
        with open(args.out_flips, "w", encoding="utf-8") as fh:
            json.dump(result.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    theta = ("" if result.theta_before is None else
             f" theta {result.theta_before:.4f} -> {result.theta_after:.4f}")
    print(f"{args.attack}/{args.mode}: applied {len(result.flips)} flips"
          f" (|E| {g.edge_count} -> {result.poisoned.edge_count}){theta}")
    return 0


def _cmd_embed(args) -> int:
    g = _graph_from_edges(args.edges)
    emb = embed_graph(g, _embedder_from_args(args), seed=args.seed)
    write_embedding(args.out, emb)
    print(f"embedded |V|={emb.node_count} K={emb.dim} -> {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    if args.task == "node_classification" and not args.labels:
        raise ValueError("node_classification requires --labels")
    if args.labels:
        g, labels = load_dataset(args.edges, args.labels)
    else:
        g, labels = _graph_from_edges(args.edges), None
    embedder = read_embedding(args.embedding) if args.embedding \
        else _embedder_from_args(args)
    if args.task == "node_classification":
        stats = node_classification_eval(g, labels, embedder, runs=args.runs,
                                         seed=args.seed,
                                         train_fraction=args.train_fraction)
    else:
        stats = link_prediction_eval(g, embedder, runs=args.runs, seed=args.seed,
                                     holdout_fraction=args.holdout)
    name = "external" if args.embedding else args.embedder
    row = MetricRow(dataset=args.dataset_name, attack="n/a", mode="n/a", budget=0,
                    embedder=name, task=args.task, mean=stats.mean,
                    stddev=stats.stddev, runs=stats.runs, seed=args.seed)
    if args.out_csv:
        metrics_to_csv(args.out_csv, [row])
    print(f"{args.task}: mean={stats.mean:.4f} stddev={stats.stddev:.4f} "
          f"runs={stats.runs}")
    return 0


def _cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    overrides = {k: getattr(args, k) for k in
                 ("attack", "mode", "budget", "runs", "seed", "embedder")
                 if getattr(args, k) is not None}
    if overrides:
        import dataclasses
        cfg = dataclasses.replace(cfg, **overrides)
    report = run_experiment(cfg)
    if args.out:
        report.write_json(args.out)
    if args.csv:
        metrics_to_csv(args.csv, report.rows)
    for row in report.rows:
        print(f"{row.task}: mean={row.mean:.4f} stddev={row.stddev:.4f}")
    print("timings: " + " ".join(f"{k}={v:.2f}s" for k, v in report.timings.items()),
          file=sys.stderr)
    return 0


def _cmd_sweep(args) -> int:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    budgets = [int(b) for b in args.budgets.split(",") if b.strip() != ""]
    reports = budget_sweep(cfg, budgets)
    rows = [row for rep in reports for row in rep.rows]
    metrics_to_csv(args.out, rows)
    for rep in reports:
        for row in rep.rows:
            print(f"budget={row.budget} {row.task}: mean={row.mean:.4f}")
    return 0


def _cmd_diagnose(args) -> int:
    g = _graph_from_edges(args.edges)
    with open(args.flips, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    flips = AttackResult.flips_from_dict(payload)
    from .graph import apply_flips
    result = AttackResult(poisoned=apply_flips(g, flips),
                          flips=[(f, None) for f in flips],
                          theta_before=payload.get("theta_before"),
                          theta_after=payload.get("theta_after"))
    report = adversarial_edge_diagnostics(g, result)
    paths = report.write_csv(args.out_prefix)
    ks = "n/a" if report.ks is None else f"{report.ks:.4f}"
    print(f"diagnostics written to {', '.join(paths)}; KS statistic {ks}")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netpoison",
                                     description="Edge-flip poisoning toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize a benchmark graph")
    p.add_argument("--model", choices=["lfr", "forest_fire"], required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--mu", type=float, default=0.3)
    p.add_argument("--tau-degree", type=float, default=3.0)
    p.add_argument("--tau-community", type=float, default=2.0)
    p.add_argument("--avg-degree", type=float, default=20.0)
    p.add_argument("--min-community", type=int, default=200)
    p.add_argument("--p-forward", type=float, default=0.4)
    p.add_argument("--p-backward", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-edges", required=True)
    p.add_argument("--out-labels", required=True)
    p.set_defaults(fn=_cmd_generate)

    p = sub.add_parser("attack", help="poison a graph under a flip budget")
    p.add_argument("--edges", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--attack", choices=["viking", "viking_s", "random"],
                   default="viking")
    p.add_argument("--mode", choices=["add", "remove", "combined"],
                   default="combined")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--k", type=float, default=2.0)
    p.add_argument("--known-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--id-map", default=None)
    p.add_argument("--out-edges", required=True)
    p.add_argument("--out-flips", default=None)
    p.set_defaults(fn=_cmd_attack)

    p = sub.add_parser("embed", help="embed a graph to the text format")
    p.add_argument("--edges", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_embedder_args(p)
    p.set_defaults(fn=_cmd_embed)

    p = sub.add_parser("evaluate", help="run a downstream task")
    p.add_argument("--edges", required=True)
    p.add_argument("--labels", default=None)
    p.add_argument("--task", choices=["node_classification", "link_prediction"],
                   required=True)
    p.add_argument("--embedding", default=None,
                   help="externally produced embedding file; overrides --embedder")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.1)
    p.add_argument("--holdout", type=float, default=0.1)
    p.add_argument("--dataset-name", default="dataset")
    p.add_argument("--out-csv", default=None)
    _add_embedder_args(p)
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("experiment", help="full pipeline from a JSON config")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--csv", default=None)
    p.add_argument("--attack", choices=list(("clean", "random", "viking", "viking_s")))
    p.add_argument("--mode", choices=["add", "remove", "combined"])
    p.add_argument("--budget", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--embedder", choices=["skipgram", "node2vec", "svd"])
    p.set_defaults(fn=_cmd_experiment)

    p = sub.add_parser("sweep", help="experiment across a budget list")
    p.add_argument("--config", default=None)
    p.add_argument("--budgets", required=True, help="comma-separated, e.g. 250,500,1000")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("diagnose", help="adversarial-edge property report")
    p.add_argument("--edges", required=True, help="clean graph edge list")
    p.add_argument("--flips", required=True, help="flip JSON from `attack`")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(fn=_cmd_diagnose)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except StageError as exc:
        print(f"error[{exc.stage}]: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, FloatingPointError) as exc:
        print(f"error[{args.command}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
