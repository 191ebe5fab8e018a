import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netpoison.attack import AttackBudget, AttackResult, CandidateMode, build_candidates, viking_attack
from netpoison.downstream import (
    adversarial_edge_diagnostics,
    average_precision,
    edge_betweenness,
    ks_statistic,
    link_prediction_eval,
    logreg_loss_grad,
    make_lp_split,
    micro_f1,
    node_classification_eval,
    stratified_split,
    train_logreg,
)
from netpoison.embeddings import Embedding, SvdParams
from netpoison.graph import LabelAssignment, build_graph

from conftest import random_graph


def blobs(n_per_class=30, gap=4.0, seed=0):
    rng = np.random.default_rng(seed)
    x0 = rng.standard_normal((n_per_class, 2)) + [-gap, 0]
    x1 = rng.standard_normal((n_per_class, 2)) + [gap, 0]
    z = Embedding(np.vstack([x0, x1]))
    labels = LabelAssignment([0] * n_per_class + [1] * n_per_class)
    return z, labels


class TestLogreg:
    def test_separable_blobs_perfect_train_accuracy(self):
        z, labels = blobs()
        model = train_logreg(z, labels, train_fraction=1.0, lam=1e-6, seed=0)
        assert micro_f1(model.predict(z), labels.labels) == 1.0

    def test_single_class_predicts_it(self):
        rng = np.random.default_rng(1)
        z = Embedding(rng.standard_normal((20, 3)))
        labels = LabelAssignment(np.zeros(20, dtype=int), num_labels=1)
        model = train_logreg(z, labels, train_fraction=0.5, seed=0)
        assert np.all(model.predict(z) == 0)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((15, 4))
        y = rng.integers(0, 3, 15)
        w = rng.standard_normal((3, 4)) * 0.5
        b = rng.standard_normal(3) * 0.5
        lam = 1e-3
        _, gw, gb = logreg_loss_grad(x, y, w, b, lam)
        h = 1e-6
        worst = 0.0
        for arr, grad in ((w, gw), (b, gb)):
            for idx in np.ndindex(arr.shape):
                orig = arr[idx]
                arr[idx] = orig + h
                lp, _, _ = logreg_loss_grad(x, y, w, b, lam)
                arr[idx] = orig - h
                lm, _, _ = logreg_loss_grad(x, y, w, b, lam)
                arr[idx] = orig
                num = (lp - lm) / (2 * h)
                denom = max(abs(num), abs(grad[idx]), 1e-8)
                worst = max(worst, abs(num - grad[idx]) / denom)
        assert worst < 1e-5

    def test_loss_monotone_non_increasing(self):
        # the backtracking rule only ever accepts a lower loss, so the
        # final loss must not exceed the initial one
        z, labels = blobs(seed=3)
        model = train_logreg(z, labels, train_fraction=1.0, lam=1e-4, seed=0)
        init_loss, _, _ = logreg_loss_grad(z.vectors, labels.labels,
                                           np.zeros((2, 2)), np.zeros(2), 1e-4)
        assert model.final_loss <= init_loss

    def test_invalid_fraction(self):
        z, labels = blobs()
        with pytest.raises(ValueError):
            train_logreg(z, labels, train_fraction=0.0)


class TestStratifiedSplit:
    def test_every_class_represented(self):
        labels = LabelAssignment([0] * 50 + [1] * 30 + [2] * 20)
        idx = stratified_split(labels, 10, seed=0)
        assert len(idx) == 10
        assert set(labels.labels[idx]) == {0, 1, 2}

    def test_tiny_classes_go_to_training(self):
        labels = LabelAssignment([0] * 30 + [1])
        idx = stratified_split(labels, 4, seed=1)
        assert 30 in idx.tolist()

    def test_deterministic(self):
        labels = LabelAssignment(np.random.default_rng(0).integers(0, 3, 40))
        assert np.array_equal(stratified_split(labels, 8, seed=5),
                              stratified_split(labels, 8, seed=5))


class TestMicroF1:
    def test_perfect(self):
        assert micro_f1(np.array([0, 1, 2]), np.array([0, 1, 2])) == 1.0

    def test_all_wrong(self):
        assert micro_f1(np.array([1, 2, 0]), np.array([0, 1, 2])) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            micro_f1(np.array([0]), np.array([0, 1]))

    @given(st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_equals_accuracy_for_single_label(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 60))
        d = int(rng.integers(1, 6))
        pred = rng.integers(0, d, n)
        truth = rng.integers(0, d, n)
        assert micro_f1(pred, truth) == pytest.approx(float((pred == truth).mean()))


class TestLpSplit:
    def test_minimal_holdout_rounds_to_one_edge(self):
        # a bare triangle has an empty complement, so the smallest graph
        # admitting one negative pair is the triangle plus a pendant node
        g = build_graph(4, [(0, 1), (1, 2), (0, 2), (2, 3)])
        split = make_lp_split(g, holdout_fraction=0.25, seed=0)
        assert split.residual.edge_count == 3
        assert len(split.test_pos) == len(split.test_neg) == 1
        assert not split.residual.has_edge(*split.test_pos[0])
        assert not g.has_edge(*split.test_neg[0])

    def test_deterministic(self):
        g = random_graph(np.random.default_rng(4), 30, 0.2)
        a = make_lp_split(g, 0.1, seed=3)
        b = make_lp_split(g, 0.1, seed=3)
        assert a.test_pos == b.test_pos and a.test_neg == b.test_neg

    def test_invariants_over_random_graphs(self):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            g = random_graph(rng, 20, 0.25)
            if g.edge_count < 10:
                continue
            split = make_lp_split(g, 0.1, seed=seed)
            edge_set = g.edge_set()
            assert all(p in edge_set for p in split.test_pos)
            assert all(p not in edge_set for p in split.test_neg)
            assert len(split.test_pos) == len(split.test_neg)
            assert split.residual.edge_count == g.edge_count - len(split.test_pos)
            deg = np.diff(split.residual.csr()[0])
            before = np.diff(g.csr()[0])
            assert np.all(deg[before > 0] >= 1)

    def test_empty_holdout_rejected(self):
        g = build_graph(3, [(0, 1), (1, 2), (0, 2)])
        with pytest.raises(ValueError, match="selects no edges"):
            make_lp_split(g, 0.01, seed=0)


class TestAveragePrecision:
    def test_all_positives_first(self):
        scores = [((0, 1), 0.9), ((0, 2), 0.8), ((1, 2), 0.2), ((1, 3), 0.1)]
        assert average_precision(scores, [(0, 1), (0, 2)]) == 1.0

    def test_interleaved_hand_case(self):
        scores = [((0, 1), 4.0), ((0, 2), 3.0), ((1, 2), 2.0), ((1, 3), 1.0)]
        assert average_precision(scores, [(0, 1), (1, 2)]) == pytest.approx(
            0.5 * (1.0 + 2.0 / 3.0))

    def test_random_scores_near_half(self):
        vals = []
        for seed in range(20):
            rng = np.random.default_rng(seed)
            pairs = [(0, i + 1) for i in range(200)]
            scores = [(p, float(rng.random())) for p in pairs]
            vals.append(average_precision(scores, pairs[:100]))
        assert abs(float(np.mean(vals)) - 0.5) < 0.1

    def test_missing_positive_rejected(self):
        with pytest.raises(ValueError, match="missing"):
            average_precision([((0, 1), 0.5)], [(0, 1), (9, 9)])

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(8)
        pairs = [(0, i + 1) for i in range(50)]
        scores = [(p, float(rng.standard_normal())) for p in pairs]
        positives = pairs[::3]
        base = average_precision(scores, positives)
        squashed = [(p, float(np.tanh(s) * 3 + 7)) for p, s in scores]
        assert average_precision(squashed, positives) == pytest.approx(base)

    def test_tie_break_stable_by_input_order(self):
        scores = [((0, 1), 1.0), ((0, 2), 1.0)]
        assert average_precision(scores, [(0, 1)]) == 1.0
        assert average_precision(list(reversed(scores)), [(0, 1)]) == pytest.approx(0.5)


class TestEvals:
    def test_single_label_graph_scores_one(self):
        g = random_graph(np.random.default_rng(0), 30, 0.2)
        labels = LabelAssignment(np.zeros(30, dtype=int), num_labels=1)
        stats = node_classification_eval(g, labels, SvdParams(dim=4, window=3),
                                         runs=2, seed=0)
        assert stats.mean == 1.0

    def test_lp_eval_deterministic(self):
        g = random_graph(np.random.default_rng(5), 40, 0.25)
        a = link_prediction_eval(g, SvdParams(dim=6, window=3), runs=2, seed=7)
        b = link_prediction_eval(g, SvdParams(dim=6, window=3), runs=2, seed=7)
        assert a == b

    def test_variance_shrinks_with_more_runs(self):
        from netpoison.embeddings import SkipgramParams
        g = random_graph(np.random.default_rng(6), 40, 0.2)
        labels = LabelAssignment(np.random.default_rng(6).integers(0, 2, 40))
        stats = node_classification_eval(
            g, labels, SkipgramParams(dim=8, walks_per_node=4, walk_length=15,
                                      window=3, epochs=2),
            runs=10, seed=3)
        scores = np.asarray(stats.scores)
        stderr_of_10run_mean = scores.std(ddof=1) / np.sqrt(10)
        two_run_means = scores.reshape(5, 2).mean(axis=1)
        assert stderr_of_10run_mean < two_run_means.std(ddof=1)


class TestEdgeBetweenness:
    def test_path_standard_normalization(self):
        g = build_graph(3, [(0, 1), (1, 2)])
        ebc = edge_betweenness(g)
        assert ebc[(0, 1)] == pytest.approx(2 / 3)
        assert ebc[(1, 2)] == pytest.approx(2 / 3)

    def test_raw_counts_on_path(self):
        g = build_graph(3, [(0, 1), (1, 2)])
        raw = edge_betweenness(g, normalized=False)
        assert raw[(0, 1)] == pytest.approx(2.0)

    def test_matches_networkx(self):
        import networkx as nx
        for seed in (1, 2, 3):
            nxg = nx.gnp_random_graph(30, 0.15, seed=seed)
            g = build_graph(30, list(nxg.edges()))
            mine = edge_betweenness(g)
            ref = nx.edge_betweenness_centrality(nxg)
            for e, val in ref.items():
                assert mine[tuple(sorted(e))] == pytest.approx(val, abs=1e-12)


class TestKs:
    def test_identical_samples_zero(self):
        a = np.arange(10.0)
        assert ks_statistic(a, a) == 0.0

    def test_disjoint_samples_one(self):
        assert ks_statistic([1.0, 2.0], [5.0, 6.0]) == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ks_statistic([], [1.0])


class TestDiagnostics:
    def test_empty_flip_list(self, two_triangles):
        result = AttackResult(poisoned=two_triangles, flips=[], theta_before=1.0,
                              theta_after=1.0)
        report = adversarial_edge_diagnostics(two_triangles, result)
        assert report.flip_rows == []
        assert report.ks is None
        assert all(adv == 0 for _, _, adv, _ in report.degree_bins)

    def test_flip_rows_and_csv(self, karate, tmp_path):
        labels = LabelAssignment((np.arange(karate.node_count) > 16).astype(int))
        cs = build_candidates(karate, CandidateMode.COMBINED, k=1.0, seed=0)
        result = viking_attack(karate, labels, AttackBudget(10), cs)
        report = adversarial_edge_diagnostics(karate, result)
        assert len(report.flip_rows) == 10
        for row in report.flip_rows:
            if row["kind"] == "add":
                assert row["betweenness"] is None
            else:
                assert row["betweenness"] is not None
        paths = report.write_csv(str(tmp_path / "diag"))
        for p in paths:
            text = open(p).read()
            assert text.startswith("#")
        assert "normalization" in open(paths[1]).readline()

    def test_degree_bins_are_logarithmic(self, karate):
        result = AttackResult(poisoned=karate, flips=[], theta_before=0.0,
                              theta_after=0.0)
        report = adversarial_edge_diagnostics(karate, result)
        bounds = [(lo, hi) for lo, hi, _, _ in report.degree_bins]
        assert all(hi == 2 * lo for lo, hi in bounds)
        assert bounds[0][0] == 1
