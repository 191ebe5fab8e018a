import dataclasses
import json

import pytest

from netpoison.cli import main as cli_main
from netpoison.downstream import node_classification_eval
from netpoison.embeddings import SvdParams
from netpoison.harness import (
    DEFAULT_BUDGETS,
    ExperimentConfig,
    StageError,
    budget_sweep,
    load_dataset,
    metrics_to_csv,
    run_experiment,
)
from netpoison.seeding import derive_seed

SMALL_LFR = {
    "name": "lfr",
    "generator": "lfr",
    "params": {"n": 300, "tau_degree": 3.0, "tau_community": 2.0,
               "avg_degree": 10.0, "min_community": 60, "mu": 0.3},
}
FAST_SKIPGRAM = {"dim": 16, "walks_per_node": 4, "walk_length": 15,
                 "window": 3, "epochs": 2}


def small_cfg(**overrides):
    base = dict(dataset=SMALL_LFR, attack="viking", mode="combined", budget=100,
                runs=2, seed=3, embedder="skipgram", embedder_params=FAST_SKIPGRAM,
                tasks=("node_classification",))
    base.update(overrides)
    return ExperimentConfig(**base)


class TestLoadDataset:
    def write_files(self, tmp_path, edges_text, labels_text):
        e = tmp_path / "g.edges"
        l = tmp_path / "g.labels"
        e.write_text(edges_text)
        l.write_text(labels_text)
        return str(e), str(l)

    def test_compaction(self, tmp_path):
        e, l = self.write_files(tmp_path,
                                "# comment\n10 20\n20 30\n",
                                "10 7\n20 7\n30 9\n40 9\n")
        g, labels = load_dataset(e, l)
        assert g.node_count == 4  # ids 10,20,30,40 -> 0..3
        assert g.edge_count == 2
        assert labels.num_labels == 2
        assert labels.labels.tolist() == [0, 0, 1, 1]

    def test_unlabeled_node_listed(self, tmp_path):
        e, l = self.write_files(tmp_path, "0 1\n1 2\n", "0 0\n1 1\n")
        with pytest.raises(ValueError, match="lack labels: 2"):
            load_dataset(e, l)

    def test_malformed_line_number(self, tmp_path):
        e, l = self.write_files(tmp_path, "0 1\nbroken\n", "0 0\n1 0\n")
        with pytest.raises(ValueError, match=":2:"):
            load_dataset(e, l)

    def test_id_map_emitted(self, tmp_path):
        e, l = self.write_files(tmp_path, "5 9\n", "5 0\n9 1\n")
        out = tmp_path / "ids.map"
        load_dataset(e, l, id_map_path=str(out))
        assert out.read_text() == "0 5\n1 9\n"


class TestExperimentConfig:
    def test_defaults_are_recorded(self):
        cfg = ExperimentConfig()
        assert cfg.attack == "viking"
        assert cfg.resolved_budget() == DEFAULT_BUDGETS["lfr"]
        assert set(cfg.tasks) == {"node_classification", "link_prediction"}

    def test_per_dataset_default_budgets(self):
        for name, budget in DEFAULT_BUDGETS.items():
            cfg = ExperimentConfig(dataset={"name": name, "edges": "x", "labels": "y"})
            assert cfg.resolved_budget() == budget

    def test_unknown_field_rejected(self):
        with pytest.raises(ValueError, match="unknown config fields"):
            ExperimentConfig.from_dict({"attak": "viking"})

    def test_bad_values_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(attack="nope")
        with pytest.raises(ValueError):
            ExperimentConfig(mode="sideways")
        with pytest.raises(ValueError):
            ExperimentConfig(tasks=("node_classification", "clustering"))
        with pytest.raises(ValueError):
            ExperimentConfig(budget=-1)

    def test_json_round_trip(self, tmp_path):
        cfg = small_cfg()
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        assert ExperimentConfig.from_json(str(path)) == cfg


class TestRunExperiment:
    def test_clean_equals_direct_evaluation(self):
        cfg = small_cfg(attack="clean", embedder="svd",
                        embedder_params={"dim": 16, "window": 4})
        report = run_experiment(cfg)
        from netpoison.harness import _materialize_dataset
        g, labels = _materialize_dataset(cfg)
        direct = node_classification_eval(
            g, labels, SvdParams(dim=16, window=4), runs=cfg.runs,
            seed=derive_seed(cfg.seed, "eval-nc"))
        assert report.rows[0].mean == pytest.approx(direct.mean)
        assert report.rows[0].stddev == pytest.approx(direct.stddev)

    def test_reports_byte_identical(self):
        cfg = small_cfg()
        a = json.dumps(run_experiment(cfg).to_dict(), sort_keys=True)
        b = json.dumps(run_experiment(cfg).to_dict(), sort_keys=True)
        assert a == b

    def test_clean_metric_ignores_budget_and_mode(self):
        base = small_cfg(attack="clean", embedder="svd",
                         embedder_params={"dim": 16, "window": 4})
        variants = [dataclasses.replace(base, budget=500, mode="add"),
                    dataclasses.replace(base, budget=7, mode="remove")]
        rows = [run_experiment(c).rows[0] for c in [base] + variants]
        assert len({(r.mean, r.stddev) for r in rows}) == 1
        assert all(r.budget == 0 for r in rows)

    def test_viking_hurts_more_than_clean(self):
        clean = run_experiment(small_cfg(attack="clean")).rows[0].mean
        poisoned = run_experiment(small_cfg(attack="viking", budget=300)).rows[0].mean
        assert poisoned < clean

    def test_stage_error_names_stage(self):
        cfg = small_cfg(dataset={"name": "missing", "edges": "/nonexistent.edges",
                                 "labels": "/nonexistent.labels"})
        with pytest.raises(StageError, match="stage 'dataset'"):
            run_experiment(cfg)

    def test_report_json_excludes_timings_by_default(self, tmp_path):
        report = run_experiment(small_cfg(runs=1))
        path = tmp_path / "report.json"
        report.write_json(str(path))
        payload = json.loads(path.read_text())
        assert "timings" not in payload
        assert report.timings  # still available in memory
        assert payload["theta_before"] >= payload["theta_after"]


class TestBudgetSweep:
    def test_zero_budget_equals_clean(self):
        cfg = small_cfg(embedder="svd", embedder_params={"dim": 16, "window": 4})
        sweep = budget_sweep(cfg, [0])
        clean = run_experiment(dataclasses.replace(cfg, attack="clean"))
        assert sweep[0].rows[0].mean == pytest.approx(clean.rows[0].mean)

    def test_empty_budget_list_rejected(self):
        with pytest.raises(ValueError, match="must not be empty"):
            budget_sweep(small_cfg(), [])

    def test_csv_schema(self, tmp_path):
        cfg = small_cfg(embedder="svd", embedder_params={"dim": 16, "window": 4},
                        runs=1)
        rows = [r for rep in budget_sweep(cfg, [0, 50]) for r in rep.rows]
        path = tmp_path / "sweep.csv"
        metrics_to_csv(str(path), rows)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "dataset,attack,mode,budget,embedder,task,mean,stddev,runs,seed"
        assert len(lines) == 3


class TestCli:
    def generate(self, tmp_path, seed=2):
        edges = tmp_path / "g.edges"
        labels = tmp_path / "g.labels"
        rc = cli_main(["generate", "--model", "lfr", "--n", "300",
                       "--avg-degree", "10", "--min-community", "60",
                       "--mu", "0.3", "--seed", str(seed),
                       "--out-edges", str(edges), "--out-labels", str(labels)])
        assert rc == 0
        return edges, labels

    def test_generate_attack_diagnose_pipeline(self, tmp_path):
        edges, labels = self.generate(tmp_path)
        poisoned = tmp_path / "poisoned.edges"
        flips = tmp_path / "flips.json"
        rc = cli_main(["attack", "--edges", str(edges), "--labels", str(labels),
                       "--attack", "viking", "--mode", "combined",
                       "--budget", "80", "--seed", "1",
                       "--out-edges", str(poisoned), "--out-flips", str(flips)])
        assert rc == 0
        payload = json.loads(flips.read_text())
        assert len(payload["flips"]) == 80
        assert payload["theta_after"] < payload["theta_before"]

        rc = cli_main(["diagnose", "--edges", str(edges), "--flips", str(flips),
                       "--out-prefix", str(tmp_path / "diag")])
        assert rc == 0
        assert (tmp_path / "diag_degrees.csv").exists()
        assert (tmp_path / "diag_betweenness.csv").exists()

    def test_embed_and_external_evaluate(self, tmp_path):
        edges, labels = self.generate(tmp_path)
        emb = tmp_path / "emb.txt"
        rc = cli_main(["embed", "--edges", str(edges), "--embedder", "svd",
                       "--dim", "16", "--window", "4", "--out", str(emb)])
        assert rc == 0
        out_csv = tmp_path / "eval.csv"
        rc = cli_main(["evaluate", "--edges", str(edges), "--labels", str(labels),
                       "--task", "node_classification", "--embedding", str(emb),
                       "--runs", "2", "--out-csv", str(out_csv)])
        assert rc == 0
        assert out_csv.read_text().count("\n") == 2

    def test_experiment_and_sweep(self, tmp_path):
        cfg = small_cfg(runs=1)
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg.to_dict()))
        report = tmp_path / "report.json"
        rc = cli_main(["experiment", "--config", str(cfg_path),
                       "--out", str(report), "--budget", "50"])
        assert rc == 0
        payload = json.loads(report.read_text())
        assert payload["config"]["budget"] == 50

        sweep_csv = tmp_path / "sweep.csv"
        rc = cli_main(["sweep", "--config", str(cfg_path),
                       "--budgets", "0,50", "--out", str(sweep_csv)])
        assert rc == 0
        assert len(sweep_csv.read_text().strip().splitlines()) == 3

    def test_failure_is_stage_tagged(self, tmp_path, capsys):
        rc = cli_main(["attack", "--edges", "/no/such.edges", "--labels",
                       "/no/such.labels", "--budget", "5",
                       "--out-edges", str(tmp_path / "o.edges")])
        assert rc == 1
        assert "error[attack]" in capsys.readouterr().err

    def test_evaluate_requires_labels_for_nc(self, tmp_path, capsys):
        edges, _ = self.generate(tmp_path)
        rc = cli_main(["evaluate", "--edges", str(edges),
                       "--task", "node_classification", "--runs", "1"])
        assert rc == 1
        assert "requires --labels" in capsys.readouterr().err


class TestSeeding:
    def test_derive_seed_stable_and_distinct(self):
        a = derive_seed(7, "walks", 0)
        assert a == derive_seed(7, "walks", 0)
        assert a != derive_seed(7, "walks", 1)
        assert a != derive_seed(7, "sgns", 0)
        assert a != derive_seed(8, "walks", 0)
