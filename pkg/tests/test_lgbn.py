"""Tests for the linear-Gaussian baseline learner."""

import numpy as np
import pytest

from semibn import (
    ExpertGraph,
    LgbnModel,
    NodeCpd,
    fit_expert_graph,
    lgbn_test_loglik,
    load_lgbn_json,
    save_lgbn_json,
    total_test_loglik,
    validate_dag,
)
from semibn.graph import GpEdgeSet


def single_node_model(intercept=0.0, variance=1.0):
    return LgbnModel(
        graph=ExpertGraph(np.zeros((1, 1), dtype=bool)),
        weights={0: np.empty(0)},
        intercepts=np.array([intercept]),
        residual_variances=np.array([variance]),
    )


class TestModelValidation:
    def test_rejects_nonpositive_variance(self):
        with pytest.raises(ValueError, match="positive"):
            single_node_model(variance=0.0)

    def test_rejects_weight_count_mismatch(self):
        linear = np.zeros((2, 2), dtype=bool)
        linear[1, 0] = True
        with pytest.raises(ValueError, match="weight count"):
            LgbnModel(graph=ExpertGraph(linear), weights={0: np.empty(0), 1: np.empty(0)},
                      intercepts=np.zeros(2), residual_variances=np.ones(2))


class TestFitExpertGraph:
    def test_independent_columns_stay_disconnected(self):
        empty = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            data = rng.normal(size=(300, 4))
            model = fit_expert_graph(data)
            empty += not model.graph.linear.any()
        assert empty >= 19

    def test_strong_chain_recovers_skeleton(self):
        rng = np.random.default_rng(0)
        x1 = rng.normal(size=500)
        x2 = 5.0 * x1 + rng.normal(size=500)
        x3 = 5.0 * x2 + rng.normal(size=500)
        model = fit_expert_graph(np.column_stack([x1, x2, x3]))
        skeleton = model.graph.linear.astype(bool)
        skeleton = skeleton | skeleton.T
        expected = np.zeros((3, 3), dtype=bool)
        expected[1, 0] = expected[0, 1] = True
        expected[2, 1] = expected[1, 2] = True
        assert np.array_equal(skeleton, expected)

    def test_fit_is_deterministic(self):
        rng = np.random.default_rng(4)
        data = rng.normal(size=(200, 5))
        data[:, 3] += 2.0 * data[:, 1]
        a = fit_expert_graph(data)
        b = fit_expert_graph(data)
        assert np.array_equal(a.graph.linear, b.graph.linear)
        assert np.array_equal(a.residual_variances, b.residual_variances)

    def test_output_is_acyclic(self):
        rng = np.random.default_rng(8)
        base = rng.normal(size=(250, 5))
        data = base.copy()
        data[:, 2] += base[:, 0] + base[:, 1]
        data[:, 4] += 3.0 * data[:, 2]
        model = fit_expert_graph(data)
        assert validate_dag(model.graph, GpEdgeSet.empty(5)) is None

    def test_rejects_constant_column(self):
        data = np.random.default_rng(1).normal(size=(50, 3))
        data[:, 1] = 7.0
        with pytest.raises(ValueError, match="constant column"):
            fit_expert_graph(data)

    def test_rejects_single_column(self):
        with pytest.raises(ValueError, match="two columns"):
            fit_expert_graph(np.random.default_rng(0).normal(size=(50, 1)))

    def test_node_names_attach(self):
        data = np.random.default_rng(2).normal(size=(100, 2))
        model = fit_expert_graph(data, node_names=["alk", "sgpt"])
        assert model.graph.node_names == ["alk", "sgpt"]


class TestTestLoglik:
    def test_single_node_standard_normal_at_mean(self):
        model = single_node_model(intercept=1.5, variance=1.0)
        assert lgbn_test_loglik(model, np.array([[1.5]])) == pytest.approx(
            -0.918939, abs=1e-6)

    def test_empty_test_set(self):
        model = single_node_model()
        assert lgbn_test_loglik(model, np.empty((0, 1))) == 0.0

    def test_matches_gp_model_with_zero_amplitudes(self):
        rng = np.random.default_rng(3)
        data = rng.normal(size=(150, 3))
        data[:, 2] += 1.2 * data[:, 0] - 0.7 * data[:, 1]
        model = fit_expert_graph(data)
        test = rng.normal(size=(40, 3))
        cpds = {}
        for i in range(3):
            parents = model.graph.parents(i)
            cpds[i] = NodeCpd(
                node=i,
                linear_parents=parents,
                weights=np.asarray(model.weights[i], dtype=np.float64),
                intercept=float(model.intercepts[i]),
                gp_candidates=(),
                gp_params={},
                noise_variance=float(model.residual_variances[i]),
            )
        via_gp = total_test_loglik(cpds, data, test)
        assert lgbn_test_loglik(model, test) == pytest.approx(via_gp, rel=1e-10)

    def test_rejects_wrong_column_count(self):
        model = single_node_model()
        with pytest.raises(ValueError):
            lgbn_test_loglik(model, np.zeros((5, 2)))


class TestJsonRoundTrip:
    def test_round_trip_preserves_model(self, tmp_path):
        rng = np.random.default_rng(6)
        data = rng.normal(size=(200, 4))
        data[:, 3] += 2.0 * data[:, 0]
        model = fit_expert_graph(data, node_names=["a", "b", "c", "d"])
        path = tmp_path / "lgbn.json"
        save_lgbn_json(model, path)
        loaded = load_lgbn_json(path)
        assert np.array_equal(loaded.graph.linear, model.graph.linear)
        assert loaded.graph.node_names == model.graph.node_names
        np.testing.assert_allclose(loaded.intercepts, model.intercepts, rtol=1e-15)
        np.testing.assert_allclose(loaded.residual_variances,
                                   model.residual_variances, rtol=1e-15)
        for i in range(4):
            np.testing.assert_allclose(loaded.weights[i], model.weights[i], rtol=1e-15)

    def test_saved_payload_is_expert_input(self, tmp_path):
        # the harness reads the same file as --expert plus noise variances
        rng = np.random.default_rng(7)
        data = rng.normal(size=(120, 2))
        model = fit_expert_graph(data, node_names=["u", "v"])
        path = tmp_path / "lgbn.json"
        save_lgbn_json(model, path)
        import json

        payload = json.loads(path.read_text())
        assert set(payload["noise_variances"]) == {"u", "v"}
        assert payload["gp_edges"] == []
