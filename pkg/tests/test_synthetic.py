"""Tests for random structure generation and ancestral sampling."""

import numpy as np
import pytest

from semibn import (
    GenConfig,
    GroundTruth,
    ExpertGraph,
    GpEdgeSet,
    gen_structure,
    load_truth,
    sample_dataset,
    save_truth,
    validate_dag,
)


def tri(n, fill):
    out = np.zeros((n, n), dtype=bool)
    out[np.tril_indices(n, k=-1)] = fill
    return out


class TestGenConfig:
    def test_mode_defaults_for_p_add(self):
        assert GenConfig(n=4, mode="id").p_add == 0.5
        assert GenConfig(n=4, mode="ed").p_add == 0.01

    def test_explicit_p_add_wins(self):
        assert GenConfig(n=4, mode="ed", p_add=0.3).p_add == 0.3

    def test_rejects_small_n(self):
        with pytest.raises(ValueError, match="at least 2"):
            GenConfig(n=1)

    def test_rejects_unknown_mode(self):
        with pytest.raises(ValueError, match="mode"):
            GenConfig(n=4, mode="interpolate")

    @pytest.mark.parametrize("kw", [{"p_linear": 1.5}, {"p_modify": -0.1}, {"p_add": 2.0}])
    def test_rejects_bad_probability(self, kw):
        with pytest.raises(ValueError, match="in \\[0, 1\\]"):
            GenConfig(n=4, **kw)

    @pytest.mark.parametrize("kw", [{"root_variance": 0.0}, {"noise_variance": -1.0}])
    def test_rejects_bad_variance(self, kw):
        with pytest.raises(ValueError):
            GenConfig(n=4, **kw)

    def test_rejects_empty_split(self):
        with pytest.raises(ValueError, match="positive"):
            GenConfig(n=4, n_val=0)


class TestGroundTruth:
    def test_rejects_upper_triangular_edge(self):
        linear = np.zeros((3, 3), dtype=bool)
        linear[0, 2] = True
        with pytest.raises(ValueError, match="lower to higher"):
            GroundTruth(expert=ExpertGraph(linear), gp=GpEdgeSet(np.zeros((3, 3), dtype=bool)))

    def test_edge_kind_counts(self, worked_example):
        truth = GroundTruth(expert=worked_example.expert, gp=worked_example.gp_edges)
        assert truth.modification_count == 4  # (2,0), (2,1), (3,0), (4,0)
        assert truth.addition_count == 2  # (4,1), (4,3)

    def test_oracle_params_are_unit_weights(self, worked_example):
        truth = GroundTruth(expert=worked_example.expert, gp=worked_example.gp_edges)
        params = truth.oracle_params()
        assert set(params) == {0, 1, 2, 3, 4}
        weights, intercept = params[3]
        assert weights.tolist() == [1.0, 1.0, 1.0]
        assert intercept == 0.0
        assert params[0][0].size == 0


class TestGenStructure:
    def test_deterministic_in_seed(self):
        config = GenConfig(n=7, seed=11)
        a = gen_structure(config)
        b = gen_structure(config)
        assert np.array_equal(a.expert.linear, b.expert.linear)
        assert np.array_equal(a.gp.gp, b.gp.gp)

    def test_seeds_give_distinct_structures(self):
        drawn = {gen_structure(GenConfig(n=7, seed=s)).expert.linear.tobytes()
                 for s in range(8)}
        assert len(drawn) > 1

    def test_zero_probabilities_give_empty_graphs(self):
        truth = gen_structure(GenConfig(n=6, p_linear=0.0, p_modify=0.7, p_add=0.0, seed=3))
        assert not truth.expert.linear.any()
        assert not truth.gp.gp.any()

    def test_unit_probabilities_give_complete_lower_triangle(self):
        truth = gen_structure(GenConfig(n=6, p_linear=1.0, p_modify=1.0, p_add=1.0, seed=3))
        assert np.array_equal(truth.expert.linear.astype(bool), tri(6, True))
        assert np.array_equal(truth.gp.gp.astype(bool), tri(6, True))

    def test_addition_only_regime(self):
        truth = gen_structure(GenConfig(n=6, p_linear=0.0, p_add=1.0, seed=3))
        assert not truth.expert.linear.any()
        assert np.array_equal(truth.gp.gp.astype(bool), tri(6, True))

    def test_modes_share_the_linear_draw(self):
        # p_add only affects non-linear pairs, so switching regimes must not
        # perturb the expert graph or the modification edges for a seed
        for seed in range(10):
            id_truth = gen_structure(GenConfig(n=6, mode="id", seed=seed))
            ed_truth = gen_structure(GenConfig(n=6, mode="ed", seed=seed))
            assert np.array_equal(id_truth.expert.linear, ed_truth.expert.linear)
            linear = id_truth.expert.linear.astype(bool)
            assert np.array_equal(id_truth.gp.gp[linear], ed_truth.gp.gp[linear])

    def test_structures_are_always_valid_dags(self):
        for seed in range(20):
            truth = gen_structure(GenConfig(n=8, p_linear=0.8, p_add=0.8, seed=seed))
            assert validate_dag(truth.expert, truth.gp) is None

    def test_ed_gp_edges_are_mostly_modifications(self):
        # expected modification share 0.25 / (0.25 + 0.005), far above 0.9
        modifications = additions = 0
        for seed in range(1000):
            truth = gen_structure(GenConfig(n=8, mode="ed", seed=seed))
            modifications += truth.modification_count
            additions += truth.addition_count
        assert modifications / (modifications + additions) >= 0.9

    def test_ed_adds_fewer_edges_than_id(self):
        id_mean = np.mean([gen_structure(GenConfig(n=6, mode="id", seed=s)).addition_count
                           for s in range(200)])
        ed_mean = np.mean([gen_structure(GenConfig(n=6, mode="ed", seed=s)).addition_count
                           for s in range(200)])
        assert ed_mean < id_mean


class TestSampleDataset:
    def test_deterministic_and_splits_differ(self):
        config = GenConfig(n=5, seed=21, n_train=40, n_val=30, n_test=20)
        truth = gen_structure(config)
        a = sample_dataset(truth, config)
        b = sample_dataset(truth, config)
        assert np.array_equal(a.train, b.train)
        assert np.array_equal(a.val, b.val)
        assert np.array_equal(a.test, b.test)
        assert a.train.shape == (40, 5)
        assert a.val.shape == (30, 5)
        assert a.test.shape == (20, 5)
        assert not np.array_equal(a.train[:20], a.test)

    def test_root_column_moments(self):
        config = GenConfig(n=4, p_linear=0.0, p_add=0.0, n_train=2000, seed=5)
        data = sample_dataset(gen_structure(config), config).train
        assert abs(data[:, 0].mean()) < 3.0 * np.sqrt(config.root_variance / 2000)
        assert data[:, 0].var() == pytest.approx(config.root_variance, rel=0.2)

    def test_single_linear_parent_residual_variance(self):
        linear = np.zeros((2, 2), dtype=bool)
        linear[1, 0] = True
        truth = GroundTruth(expert=ExpertGraph(linear), gp=GpEdgeSet(np.zeros((2, 2), dtype=bool)))
        config = GenConfig(n=2, seed=9)
        data = sample_dataset(truth, config).train
        residual = data[:, 1] - data[:, 0]
        assert residual.var() == pytest.approx(config.noise_variance, rel=0.2)

    def test_example_system_equations(self, worked_example):
        truth = GroundTruth(expert=worked_example.expert, gp=worked_example.gp_edges)
        config = GenConfig(n=5, seed=17)
        x = sample_dataset(truth, config).train
        cos = lambda col: np.cos(2.0 * np.pi * col)
        residuals = {
            2: x[:, 2] - (x[:, 0] + x[:, 1] + cos(x[:, 0]) + cos(x[:, 1])),
            3: x[:, 3] - (x[:, 0] + x[:, 1] + x[:, 2] + cos(x[:, 0])),
            4: x[:, 4] - (x[:, 0] + cos(x[:, 0]) + cos(x[:, 1]) + cos(x[:, 3])),
        }
        for residual in residuals.values():
            assert abs(residual.mean()) < 0.02
            assert residual.var() == pytest.approx(config.noise_variance, rel=0.2)


class TestTruthIo:
    def test_round_trip_with_config_echo(self, tmp_path):
        config = GenConfig(n=6, mode="ed", seed=33)
        truth = gen_structure(config)
        path = tmp_path / "truth.json"
        save_truth(truth, config, path)
        loaded, echo = load_truth(path)
        assert np.array_equal(loaded.expert.linear, truth.expert.linear)
        assert np.array_equal(loaded.gp.gp, truth.gp.gp)
        assert echo == config

    def test_load_without_generator_echo(self, tmp_path, worked_example):
        truth = GroundTruth(expert=worked_example.expert, gp=worked_example.gp_edges)
        config = GenConfig(n=5)
        path = tmp_path / "truth.json"
        save_truth(truth, config, path)
        import json

        payload = json.loads(path.read_text())
        del payload["generator"]
        path.write_text(json.dumps(payload))
        loaded, echo = load_truth(path)
        assert echo is None
        assert np.array_equal(loaded.expert.linear, truth.expert.linear)
