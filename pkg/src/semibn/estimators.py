"""Scikit-learn style estimators wrapping the learning pipeline.

Both estimators are density models: ``score(X)`` returns the total test
log-likelihood of ``X`` (not a per-sample mean), so model comparisons read
directly off the score.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .cpd import TrainConfig, total_test_loglik
from .graph import ExpertGraph
from .horseshoe import HsScaleMap
from .lgbn import fit_expert_graph, lgbn_test_loglik
from .search import SearchConfig, search_structure
from .validation import check_data_matrix

__all__ = ["SemiParametricBN", "LinearGaussianBN"]


class SemiParametricBN(BaseEstimator):
    """Semi-parametric Bayesian network learner.

    Learns minimal GP additions to a fixed linear expert graph by exact
    ordering search, with optional Horseshoe shrinkage on the kernel
    amplitudes. ``hs_expert``/``hs_nonexpert`` both None disables the
    prior; setting only one of them is an error.

    Parameters mirror the training loop defaults; ``noise_variance`` may
    be a scalar or a per-node vector. When ``fit`` is not given an
    explicit validation block, ``val_fraction`` of the rows is carved off
    using ``random_state``.
    """

    def __init__(self, expert_graph=None, mode="one-step", hs_expert=None,
                 hs_nonexpert=None, hs_weight=1.0, amplitude_threshold=0.2,
                 noise_variance=0.01, max_iterations=200, patience=20,
                 init_amplitude=0.2, init_lengthscale=0.4, step_size=0.05,
                 val_fraction=0.1, random_state=0):
        self.expert_graph = expert_graph
        self.mode = mode
        self.hs_expert = hs_expert
        self.hs_nonexpert = hs_nonexpert
        self.hs_weight = hs_weight
        self.amplitude_threshold = amplitude_threshold
        self.noise_variance = noise_variance
        self.max_iterations = max_iterations
        self.patience = patience
        self.init_amplitude = init_amplitude
        self.init_lengthscale = init_lengthscale
        self.step_size = step_size
        self.val_fraction = val_fraction
        self.random_state = random_state

    def _hs_scales(self):
        if self.hs_expert is None and self.hs_nonexpert is None:
            return None
        if self.hs_expert is None or self.hs_nonexpert is None:
            raise ValueError("set both hs_expert and hs_nonexpert, or neither")
        return HsScaleMap(tau_expert=self.hs_expert, tau_nonexpert=self.hs_nonexpert)

    def fit(self, X, y=None, X_val=None, oracle_params=None):
        """Fit on training rows X, using X_val (or a carved-off fraction)
        for early stopping and structure scoring."""
        X = check_data_matrix(X, name="X")
        self.n_features_in_ = X.shape[1]
        expert = self.expert_graph
        if expert is None:
            expert = ExpertGraph.empty(self.n_features_in_)
        if X_val is None:
            rng = np.random.default_rng(self.random_state)
            order = rng.permutation(X.shape[0])
            n_val = max(1, int(np.floor(self.val_fraction * X.shape[0])))
            if n_val >= X.shape[0]:
                raise ValueError("too few rows to carve a validation block")
            X_train, X_val = X[order[n_val:]], X[order[:n_val]]
        else:
            X_train = X
            X_val = check_data_matrix(X_val, n_columns=self.n_features_in_, name="X_val")
        config = SearchConfig(
            amplitude_threshold=self.amplitude_threshold,
            train_config=TrainConfig(
                mode=self.mode, hs_weight=self.hs_weight, hs_scales=self._hs_scales(),
                max_iterations=self.max_iterations, patience=self.patience,
                init_amplitude=self.init_amplitude,
                init_lengthscale=self.init_lengthscale,
                step_size=self.step_size, seed=self.random_state,
            ),
        )
        result = search_structure(X_train, X_val, expert, config,
                                  self.noise_variance, oracle_params)
        self.graph_ = result.graph
        self.cpds_ = result.cpds
        self.search_score_ = result.score
        self.n_fits_ = result.context.fit_count
        self.train_data_ = X_train
        return self

    def score(self, X, y=None) -> float:
        """Total posterior-predictive log-likelihood of the rows of X."""
        check_is_fitted(self, "cpds_")
        X = check_data_matrix(X, n_columns=self.n_features_in_, allow_empty=True,
                              name="X")
        return total_test_loglik(self.cpds_, self.train_data_, X)


class LinearGaussianBN(BaseEstimator):
    """Linear-Gaussian baseline learned by BIC hill-climbing."""

    def __init__(self, max_moves=500):
        self.max_moves = max_moves

    def fit(self, X, y=None):
        X = check_data_matrix(X, name="X")
        self.n_features_in_ = X.shape[1]
        self.model_ = fit_expert_graph(X, max_moves=self.max_moves)
        self.graph_ = self.model_.graph
        return self

    def score(self, X, y=None) -> float:
        """Total Gaussian log-likelihood of the rows of X."""
        check_is_fitted(self, "model_")
        X = check_data_matrix(X, n_columns=self.n_features_in_, allow_empty=True,
                              name="X")
        return lgbn_test_loglik(self.model_, X)
