"""Per-node semi-parametric conditional density fitting.

A node's conditional density is Normal(w . x_lin + b + sum_j f_j(x_j),
sigma_n^2) with one zero-mean SE-kernel GP f_j per GP candidate parent and
a known, never-fitted noise variance. Training maximizes the GP marginal
likelihood of the mean residuals, optionally plus a weighted Horseshoe
log-prior over the kernel amplitudes; early stopping tracks the unpenalized
validation likelihood and the best validation iterate is returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import ExpertGraph
from .horseshoe import HsScaleMap, hs_log_prior, hs_log_prior_grad
from .kernels import (
    LOG_2PI,
    CovarianceModel,
    GpGradient,
    NonPositiveDefiniteError,
    SeKernelParams,
    _factor_spd,
    additive_covariance,
    gp_marginal_grad,
    gp_marginal_loglik,
    gp_posterior_predictive_loglik,
)
from .validation import check_data_matrix, check_node_index, check_positive_scalar

__all__ = [
    "MODES",
    "NodeCpd",
    "TrainConfig",
    "FitResult",
    "ols_fit",
    "candidate_scales",
    "node_marginal_loglik",
    "node_objective",
    "node_objective_grad",
    "node_test_loglik",
    "total_test_loglik",
    "fit_node",
]

MODES = ("oracle-linear", "two-step", "one-step")

_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8


@dataclass
class NodeCpd:
    """Fitted conditional density of one node.

    ``linear_parents`` and ``gp_candidates`` are column indices into the
    data matrix; ``weights`` aligns with ``linear_parents`` and
    ``gp_params`` with ``gp_candidates``.
    """

    node: int
    linear_parents: list[int]
    weights: np.ndarray
    intercept: float
    gp_candidates: list[int]
    gp_params: list[SeKernelParams]
    noise_variance: float

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (len(self.linear_parents),):
            raise ValueError(
                f"{self.weights.size} weights for {len(self.linear_parents)} linear parents"
            )
        if len(self.gp_params) != len(self.gp_candidates):
            raise ValueError(
                f"{len(self.gp_params)} kernel parameter sets for "
                f"{len(self.gp_candidates)} GP candidates"
            )
        self.noise_variance = check_positive_scalar(self.noise_variance, "noise_variance")

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([p.amplitude for p in self.gp_params])

    def covariance_model(self) -> CovarianceModel:
        return CovarianceModel(per_parent=list(self.gp_params), noise_variance=self.noise_variance)

    def mean(self, data) -> np.ndarray:
        data = np.asarray(data, dtype=np.float64)
        return data[:, self.linear_parents] @ self.weights + self.intercept

    def residual(self, data) -> np.ndarray:
        data = np.asarray(data, dtype=np.float64)
        return data[:, self.node] - self.mean(data)


@dataclass
class TrainConfig:
    """Knobs of the per-node training loop.

    ``hs_scales`` of None disables the Horseshoe term entirely; otherwise
    ``hs_weight`` multiplies the log-prior in the training objective only
    (validation scoring is always unpenalized).
    """

    mode: str = "one-step"
    hs_weight: float = 1.0
    hs_scales: HsScaleMap | None = None
    max_iterations: int = 200
    patience: int = 20
    init_amplitude: float = 0.2
    init_lengthscale: float = 0.4
    step_size: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (self.hs_weight >= 0.0 and np.isfinite(self.hs_weight)):
            raise ValueError(f"hs_weight must be finite and >= 0, got {self.hs_weight}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not 1 <= self.patience <= self.max_iterations:
            raise ValueError("patience must be in [1, max_iterations]")
        for name in ("init_amplitude", "init_lengthscale", "step_size"):
            check_positive_scalar(getattr(self, name), name)


@dataclass
class FitResult:
    """Outcome of :func:`fit_node`: best-validation CPD and its trace."""

    cpd: NodeCpd
    val_loglik: float
    val_trace: np.ndarray
    n_iterations: int


def ols_fit(x, y) -> tuple[np.ndarray, float]:
    """Least-squares weights and intercept of y on the columns of x."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=np.float64)
    design = np.column_stack([x, np.ones(y.size)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return coef[:-1], float(coef[-1])


def candidate_scales(cpd: NodeCpd, scales: HsScaleMap) -> np.ndarray:
    """Per-candidate Horseshoe scales: expert scale iff the candidate is
    also a linear parent of the node (a modification-type component)."""
    flags = [c in cpd.linear_parents for c in cpd.gp_candidates]
    return scales.scale_vector(flags)


def node_marginal_loglik(cpd: NodeCpd, data) -> float:
    """Unpenalized GP marginal log-likelihood of the node's residuals."""
    data = check_data_matrix(data, name="data")
    cov = additive_covariance(data[:, cpd.gp_candidates], cpd.covariance_model())
    return gp_marginal_loglik(cpd.residual(data), cov)


def node_objective(cpd: NodeCpd, data, config: TrainConfig) -> float:
    """Training objective: marginal log-likelihood plus the weighted
    Horseshoe log-prior over amplitudes (omitted when hs_scales is None)."""
    loglik = node_marginal_loglik(cpd, data)
    if config.hs_scales is None:
        return loglik
    prior = hs_log_prior(cpd.amplitudes, candidate_scales(cpd, config.hs_scales))
    return loglik + config.hs_weight * prior


def node_objective_grad(cpd: NodeCpd, data, config: TrainConfig) -> GpGradient:
    """Gradient of :func:`node_objective`; kernel parameters in log-space."""
    data = check_data_matrix(data, name="data")
    grad = gp_marginal_grad(
        cpd.residual(data),
        data[:, cpd.gp_candidates],
        cpd.covariance_model(),
        data[:, cpd.linear_parents],
    )
    if config.hs_scales is not None and cpd.gp_candidates:
        amps = cpd.amplitudes
        prior_grad = hs_log_prior_grad(amps, candidate_scales(cpd, config.hs_scales))
        grad.log_amplitude = grad.log_amplitude + config.hs_weight * prior_grad * amps
    return grad


def node_test_loglik(cpd: NodeCpd, data_train, data_test) -> float:
    """Posterior-predictive log-likelihood of test rows given train rows.

    Reduces to the plain Gaussian test log-likelihood of the linear model
    when every amplitude is zero, and to 0.0 on an empty test set.
    """
    data_test = check_data_matrix(data_test, allow_empty=True, name="test data")
    if data_test.shape[0] == 0:
        return 0.0
    data_train = check_data_matrix(data_train, name="train data")
    return gp_posterior_predictive_loglik(
        cpd.residual(data_train),
        cpd.residual(data_test),
        data_train[:, cpd.gp_candidates],
        data_test[:, cpd.gp_candidates],
        cpd.covariance_model(),
    )


def total_test_loglik(cpds: dict[int, NodeCpd], data_train, data_test) -> float:
    """Sum of per-node posterior-predictive test log-likelihoods, in node
    order (the model's total test log-density by likelihood decomposition)."""
    return sum(node_test_loglik(cpds[node], data_train, data_test)
               for node in sorted(cpds))


class _NodeEngine:
    """Fused objective/gradient/validation math for one node's fit.

    Squared-distance matrices per candidate are computed once; each
    iteration costs one batched exp, one Cholesky, and one inverse.
    """

    def __init__(self, y, lin, gp, y_val, lin_val, gp_val, noise_variance,
                 free_mean, frozen_weights, frozen_intercept, hs_scale_vec, hs_weight):
        self.y = y
        self.lin = lin
        self.y_val = y_val
        self.lin_val = lin_val
        self.n = y.size
        self.n_val = y_val.size
        self.m = gp.shape[1]
        self.k = lin.shape[1]
        self.noise = noise_variance
        self.free_mean = free_mean
        self.w0 = frozen_weights
        self.b0 = frozen_intercept
        self.hs_vec = hs_scale_vec
        self.hs_weight = hs_weight
        self.sq = self._sq_dists(gp)
        self.sq_val = self._sq_dists(gp_val)

    @staticmethod
    def _sq_dists(columns: np.ndarray) -> np.ndarray:
        m = columns.shape[1]
        n = columns.shape[0]
        out = np.empty((m, n, n))
        for j in range(m):
            diff = columns[:, j][:, None] - columns[:, j][None, :]
            out[j] = diff * diff
        return out

    def pack(self, log_amp, log_ls, weights, intercept) -> np.ndarray:
        parts = [log_amp, log_ls]
        if self.free_mean:
            parts += [weights, [intercept]]
        return np.concatenate(parts) if parts else np.empty(0)

    def unpack(self, theta):
        log_amp = theta[: self.m]
        log_ls = theta[self.m : 2 * self.m]
        if self.free_mean:
            weights = theta[2 * self.m : 2 * self.m + self.k]
            intercept = theta[-1]
        else:
            weights, intercept = self.w0, self.b0
        return log_amp, log_ls, weights, intercept

    def _kernels(self, sq, amp, ls):
        scale = (-0.5 / (ls * ls))[:, None, None]
        return amp[:, None, None] * np.exp(sq * scale)

    def objective_and_grad(self, theta):
        log_amp, log_ls, weights, intercept = self.unpack(theta)
        amp = np.exp(log_amp)
        ls = np.exp(log_ls)
        r = self.y - self.lin @ weights - intercept

        if self.m == 0:
            # noise-only covariance; everything is closed form
            alpha = r / self.noise
            obj = -0.5 * (r @ alpha + self.n * np.log(self.noise) + self.n * LOG_2PI)
            grad = self.pack(np.empty(0), np.empty(0), self.lin.T @ alpha, alpha.sum())
            return obj, grad

        kernels = self._kernels(self.sq, amp, ls)
        cov = kernels.sum(axis=0)
        cov[np.diag_indices_from(cov)] += self.noise
        factor = _factor_spd(cov)
        alpha = factor.solve(r)
        loglik = -0.5 * (float(r @ alpha) + factor.logdet + self.n * LOG_2PI)
        inner = np.outer(alpha, alpha) - factor.inverse()

        g_amp = np.empty(self.m)
        g_ls = np.empty(self.m)
        for j in range(self.m):
            weighted = inner * kernels[j]
            g_amp[j] = 0.5 * weighted.sum()
            g_ls[j] = 0.5 * (weighted * self.sq[j]).sum() / ls[j] ** 2

        obj = loglik
        if self.hs_vec is not None:
            obj += self.hs_weight * hs_log_prior(amp, self.hs_vec)
            g_amp += self.hs_weight * hs_log_prior_grad(amp, self.hs_vec) * amp

        grad = self.pack(g_amp, g_ls, self.lin.T @ alpha, alpha.sum())
        return obj, grad

    def val_loglik(self, theta) -> float:
        log_amp, log_ls, weights, intercept = self.unpack(theta)
        r = self.y_val - self.lin_val @ weights - intercept
        if self.m == 0:
            return -0.5 * (float(r @ r) / self.noise
                           + self.n_val * np.log(self.noise) + self.n_val * LOG_2PI)
        cov = self._kernels(self.sq_val, np.exp(log_amp), np.exp(log_ls)).sum(axis=0)
        cov[np.diag_indices_from(cov)] += self.noise
        factor = _factor_spd(cov)
        alpha = factor.solve(r)
        return -0.5 * (float(r @ alpha) + factor.logdet + self.n_val * LOG_2PI)


def _resolve_candidates(node, candidates, expert: ExpertGraph) -> list[int]:
    resolved = sorted({check_node_index(c, expert.n, "candidate") for c in candidates})
    if node in resolved:
        raise ValueError(f"node {node} cannot be its own GP candidate")
    blocked = expert.descendants(node)
    for c in resolved:
        if c in blocked:
            raise ValueError(
                f"candidate {c} cannot precede node {node} under the expert graph"
            )
    return resolved


def fit_node(node, data_train, data_val, expert: ExpertGraph, candidates,
             config: TrainConfig, noise_variance,
             oracle_weights=None, oracle_intercept=0.0) -> FitResult:
    """Fit one node's CPD by adaptive gradient ascent with early stopping.

    Linear parents come from the expert graph; ``candidates`` are the GP
    parent columns. Mode semantics: oracle-linear freezes the supplied
    weights and intercept, two-step freezes a least-squares fit, one-step
    co-trains mean and kernel parameters from a zero mean start. The
    returned CPD is the iterate with the highest unpenalized validation
    log-likelihood.
    """
    data_train = check_data_matrix(data_train, n_columns=expert.n, name="train data")
    data_val = check_data_matrix(data_val, n_columns=expert.n, name="validation data")
    node = check_node_index(node, expert.n)
    noise_variance = check_positive_scalar(noise_variance, "noise_variance")
    cand = _resolve_candidates(node, candidates, expert)
    linear_parents = expert.parents(node)

    if config.mode == "oracle-linear":
        if oracle_weights is None:
            raise ValueError("oracle-linear mode requires oracle_weights")
        weights = np.asarray(oracle_weights, dtype=np.float64)
        if weights.shape != (len(linear_parents),):
            raise ValueError(
                f"{weights.size} oracle weights for {len(linear_parents)} linear parents"
            )
        intercept = float(oracle_intercept)
        free_mean = False
    elif config.mode == "two-step":
        weights, intercept = ols_fit(data_train[:, linear_parents], data_train[:, node])
        free_mean = False
    else:
        weights = np.zeros(len(linear_parents))
        intercept = 0.0
        free_mean = True

    def build_cpd(log_amp, log_ls, w, b) -> NodeCpd:
        params = [SeKernelParams(float(np.exp(a)), float(np.exp(l)))
                  for a, l in zip(log_amp, log_ls)]
        return NodeCpd(node, list(linear_parents), np.array(w, dtype=np.float64),
                       float(b), list(cand), params, noise_variance)

    m = len(cand)
    if m == 0 and not free_mean:
        cpd = build_cpd([], [], weights, intercept)
        val = node_marginal_loglik(cpd, data_val)
        return FitResult(cpd=cpd, val_loglik=val, val_trace=np.array([val]), n_iterations=0)

    hs_vec = None
    if config.hs_scales is not None and m:
        flags = [c in linear_parents for c in cand]
        hs_vec = config.hs_scales.scale_vector(flags)

    engine = _NodeEngine(
        y=data_train[:, node], lin=data_train[:, linear_parents], gp=data_train[:, cand],
        y_val=data_val[:, node], lin_val=data_val[:, linear_parents], gp_val=data_val[:, cand],
        noise_variance=noise_variance, free_mean=free_mean,
        frozen_weights=weights, frozen_intercept=intercept,
        hs_scale_vec=hs_vec, hs_weight=config.hs_weight,
    )

    theta = engine.pack(np.full(m, np.log(config.init_amplitude)),
                        np.full(m, np.log(config.init_lengthscale)),
                        weights, intercept)
    best_theta = theta.copy()
    best_val = engine.val_loglik(theta)
    trace = [best_val]
    since_improve = 0
    mom = np.zeros_like(theta)
    sec = np.zeros_like(theta)
    iterations = 0

    for t in range(1, config.max_iterations + 1):
        try:
            _, grad = engine.objective_and_grad(theta)
        except NonPositiveDefiniteError:
            break
        if not np.isfinite(grad).all():
            break
        mom = _ADAM_BETA1 * mom + (1.0 - _ADAM_BETA1) * grad
        sec = _ADAM_BETA2 * sec + (1.0 - _ADAM_BETA2) * grad * grad
        mom_hat = mom / (1.0 - _ADAM_BETA1**t)
        sec_hat = sec / (1.0 - _ADAM_BETA2**t)
        theta = theta + config.step_size * mom_hat / (np.sqrt(sec_hat) + _ADAM_EPS)
        iterations = t
        try:
            val = engine.val_loglik(theta)
        except NonPositiveDefiniteError:
            break
        trace.append(val)
        if val > best_val:
            best_val = val
            best_theta = theta.copy()
            since_improve = 0
        else:
            since_improve += 1
        if since_improve >= config.patience:
            break

    log_amp, log_ls, w, b = engine.unpack(best_theta)
    cpd = build_cpd(log_amp, log_ls, w, b)
    return FitResult(cpd=cpd, val_loglik=best_val, val_trace=np.array(trace),
                     n_iterations=iterations)
