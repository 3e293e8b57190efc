"""Candidate enumeration, scoring, ranking, and recommendation sets."""

from __future__ import annotations

import numpy as np
import pytest

import oracles
from clusterscout.engines import ModelCandidate
from clusterscout.errors import EmptySpaceError
from clusterscout.features import user_features
from clusterscout.metrics import GroundTruthLabels
from clusterscout.search import describe, enumerate_space, search
from conftest import matrix_from, planted_blobs


def spec_for(matrix):
    return user_features([(dim.column, 1.0) for dim in matrix.feature_map])


def all_results(recs):
    return [recs.current_shown] + list(recs.ranked)


class TestEnumerateSpace:
    def test_default_grid_size_cap(self):
        points, _ = planted_blobs(n_per=40, n_blobs=3, d=5, seed=90)
        cands = enumerate_space(matrix_from(points))
        assert len(cands) <= 49
        by_algo = {}
        for c in cands:
            by_algo.setdefault(c.algorithm, []).append(c)
        assert len(by_algo["kmeans"]) == 9
        assert len(by_algo["agglomerative"]) == 27
        assert len(by_algo["spectral"]) == 7
        assert 2 <= len(by_algo["dbscan"]) <= 6

    def test_desired_k_pins_k_algorithms(self):
        points, _ = planted_blobs(n_per=20, n_blobs=3, d=3, seed=91)
        cands = enumerate_space(matrix_from(points), desired_k=3)
        for c in cands:
            if c.algorithm != "dbscan":
                assert c.hyperparameters["k"] == 3

    def test_tiny_dataset_truncates_k(self):
        cands = enumerate_space(matrix_from([0.0, 5.0, 9.0]))
        for c in cands:
            if c.algorithm != "dbscan":
                assert c.hyperparameters["k"] == 2

    def test_seeds_are_offsets_from_base(self):
        points, _ = planted_blobs(n_per=10, n_blobs=2, d=2, seed=92)
        cands = enumerate_space(matrix_from(points), base_seed=100)
        assert [c.seed for c in cands] == list(range(100, 100 + len(cands)))

    def test_spectral_row_limit(self):
        rng = np.random.default_rng(93)
        big = matrix_from(rng.normal(size=(40, 2)))
        none_allowed = enumerate_space(big, spectral_max_rows=30)
        assert all(c.algorithm != "spectral" for c in none_allowed)
        allowed = enumerate_space(big, spectral_max_rows=40)
        assert any(c.algorithm == "spectral" for c in allowed)

    def test_two_row_dataset_has_no_spectral(self):
        cands = enumerate_space(matrix_from([0.0, 1.0]))
        assert all(c.algorithm != "spectral" for c in cands)


class TestSearch:
    def test_planted_blobs_recovered_without_truth(self):
        points, labels = planted_blobs(n_per=40, n_blobs=3, d=5, seed=94)
        m = matrix_from(points)
        recs = search(m, enumerate_space(m), feature_spec=spec_for(m))
        top = recs.current_shown.assignment
        ari = oracles.ari(top.labels.tolist(), labels.tolist())
        assert ari >= 0.9

    def test_full_truth_pins_homogeneity(self):
        points, labels = planted_blobs(n_per=40, n_blobs=3, d=5, seed=95)
        m = matrix_from(points)
        truth = GroundTruthLabels({i: int(lab) for i, lab in enumerate(labels)})
        recs = search(m, enumerate_space(m), truth=truth, feature_spec=spec_for(m))
        top = recs.current_shown
        assert top.metrics.homogeneity == 1.0
        assert oracles.ari(top.assignment.labels.tolist(), labels.tolist()) >= 0.99
        assert not top.mismatch
        assert not recs.mismatch

    def test_single_candidate_has_empty_ranked(self):
        points, _ = planted_blobs(n_per=15, n_blobs=2, d=2, seed=96)
        m = matrix_from(points)
        only = [ModelCandidate("kmeans", {"k": 2}, seed=0)]
        recs = search(m, only, feature_spec=spec_for(m))
        assert recs.ranked == []
        assert recs.current_shown.candidate.algorithm == "kmeans"

    def test_no_candidates_rejected(self):
        m = matrix_from([0.0, 1.0])
        with pytest.raises(EmptySpaceError):
            search(m, [], feature_spec=spec_for(m))

    def test_all_failures_carry_reasons(self):
        rng = np.random.default_rng(97)
        m = matrix_from(rng.normal(size=(20, 2)) * 10)
        lonely = [ModelCandidate("dbscan", {"eps": 1e-6, "min_pts": 8}, seed=0)]
        with pytest.raises(EmptySpaceError) as err:
            search(m, lonely, feature_spec=spec_for(m))
        assert len(err.value.failures) == 1
        assert "noise" in next(iter(err.value.failures.values()))

    def test_deterministic_ordering(self):
        points, _ = planted_blobs(n_per=25, n_blobs=3, d=3, seed=98)
        m = matrix_from(points)

        def run():
            recs = search(m, enumerate_space(m, base_seed=7), feature_spec=spec_for(m))
            return [
                (r.candidate.label(), r.assignment.labels.tolist(), r.metrics.score)
                for r in all_results(recs)
            ]

        assert run() == run()

    def test_current_excluded_and_partitions_distinct(self):
        points, _ = planted_blobs(n_per=30, n_blobs=2, d=3, seed=99)
        m = matrix_from(points)
        recs = search(m, enumerate_space(m), feature_spec=spec_for(m))
        signatures = [r.assignment.signature() for r in all_results(recs)]
        assert len(set(signatures)) == len(signatures)

    def test_scores_non_increasing(self):
        points, _ = planted_blobs(n_per=25, n_blobs=3, d=3, seed=100)
        m = matrix_from(points)
        recs = search(m, enumerate_space(m), feature_spec=spec_for(m))
        scores = [r.metrics.score for r in all_results(recs)]
        for a, b in zip(scores, scores[1:]):
            assert a >= b - 1e-12

    def test_scores_stay_in_unit_interval(self):
        points, _ = planted_blobs(n_per=20, n_blobs=2, d=2, seed=101)
        m = matrix_from(points)
        recs = search(m, enumerate_space(m), feature_spec=spec_for(m))
        for r in all_results(recs):
            assert 0.0 <= r.metrics.score <= 1.0
            assert r.description.n_clusters == r.assignment.n_clusters

    def test_top_f_honored(self):
        points, _ = planted_blobs(n_per=25, n_blobs=3, d=3, seed=102)
        m = matrix_from(points)
        recs = search(m, enumerate_space(m), feature_spec=spec_for(m), f=2)
        assert len(recs.ranked) <= 2

    def test_generation_echoed(self):
        points, _ = planted_blobs(n_per=15, n_blobs=2, d=2, seed=103)
        m = matrix_from(points)
        recs = search(m, enumerate_space(m), feature_spec=spec_for(m), generation=42)
        assert recs.generation == 42
        assert recs.stale is False

    def test_infeasible_demonstration_flags_mismatch(self):
        # One tight blob, labels alternating along the first axis: no
        # geometric split in the grid can reproduce that, so the best
        # result comes back flagged rather than suppressed.
        rng = np.random.default_rng(104)
        points = rng.normal(0, 0.05, size=(24, 2))
        order = np.argsort(points[:, 0])
        labels = {int(item): int(rank % 2) for rank, item in enumerate(order)}
        m = matrix_from(points)
        truth = GroundTruthLabels(labels)
        recs = search(m, enumerate_space(m), truth=truth, feature_spec=spec_for(m))
        assert recs.current_shown.mismatch
        assert recs.mismatch
        assert recs.current_shown.metrics.homogeneity is not None
        assert recs.current_shown.metrics.homogeneity < 0.99

    def test_desired_k_filters_dbscan_by_outcome(self):
        points, _ = planted_blobs(n_per=20, n_blobs=3, d=2, seed=105)
        m = matrix_from(points)
        eps_grid = [
            c for c in enumerate_space(m) if c.algorithm == "dbscan"
        ]
        natural = search(m, eps_grid, feature_spec=spec_for(m))
        found = natural.current_shown.assignment.n_clusters
        impossible = m.n_rows + 1
        with pytest.raises(EmptySpaceError) as err:
            search(m, eps_grid, feature_spec=spec_for(m), desired_k=impossible)
        assert any("wanted" in reason for reason in err.value.failures.values())
        kept = search(m, eps_grid, feature_spec=spec_for(m), desired_k=found)
        for r in all_results(kept):
            assert r.assignment.n_clusters == found


class TestDescribe:
    def test_sentence_mentions_count_and_features(self):
        points, _ = planted_blobs(n_per=20, n_blobs=3, d=3, seed=106)
        m = matrix_from(points)
        spec = user_features([("chr", 1.0), ("risk", 2.0), ("region", 1.5)])
        recs = search(m, enumerate_space(m), feature_spec=spec)
        desc = recs.current_shown.description
        assert f"{desc.n_clusters} clusters" in desc.sentence
        for name in desc.top_features:
            assert name in desc.sentence
        assert set(desc.top_features) == {"chr", "risk", "region"}

    def test_no_quality_numbers_in_sentence(self):
        points, _ = planted_blobs(n_per=15, n_blobs=2, d=2, seed=107)
        m = matrix_from(points)
        recs = search(m, enumerate_space(m), feature_spec=spec_for(m))
        sentence = recs.current_shown.description.sentence
        for word in ("silhouette", "score", "davies", "0."):
            assert word not in sentence

    def test_single_feature_spec(self):
        points, _ = planted_blobs(n_per=15, n_blobs=2, d=2, seed=108)
        m = matrix_from(points)
        spec = user_features([("only", 1.0)])
        recs = search(m, enumerate_space(m), feature_spec=spec)
        assert recs.current_shown.description.top_features == ["only"]

    def test_sizes_conserve_items(self):
        points, _ = planted_blobs(n_per=20, n_blobs=2, d=2, seed=109)
        m = matrix_from(points)
        recs = search(m, enumerate_space(m), feature_spec=spec_for(m))
        for r in all_results(recs):
            noise = len(r.assignment.noise_items())
            assert sum(r.description.cluster_sizes) + noise == 40

    def test_describe_direct_template(self):
        m = matrix_from([0.0, 1.0, 10.0, 11.0])
        from clusterscout.engines import run_kmeans

        assignment = run_kmeans(m, k=2, seed=0)
        payload = describe(assignment, user_features([("alpha", 1.0), ("beta", 0.5)]))
        assert payload.sentence == "2 clusters based on alpha, beta; sizes 2, 2."
