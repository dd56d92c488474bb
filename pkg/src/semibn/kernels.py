"""Squared-exponential kernels and Gaussian-process likelihood numerics.

The covariance of a node given its GP parents is additive: one SE kernel per
parent, evaluated on that parent's column alone, plus fixed observation
noise. All factorizations go through a Cholesky with a small escalating
jitter retry; genuinely non-positive-definite matrices raise
:class:`NonPositiveDefiniteError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

__all__ = [
    "SeKernelParams",
    "CovarianceModel",
    "NonPositiveDefiniteError",
    "se_kernel_matrix",
    "se_kernel_cross",
    "additive_covariance",
    "gp_marginal_loglik",
    "gp_marginal_grad",
    "gp_posterior_predictive_loglik",
    "GpGradient",
]

LOG_2PI = float(np.log(2.0 * np.pi))

# Jitter schedule applied when a covariance fails to factor: relative to the
# mean diagonal, escalating tenfold, at most three retries.
_JITTER_REL = 1e-8
_JITTER_GROWTH = 10.0
_JITTER_TRIES = 3


class NonPositiveDefiniteError(np.linalg.LinAlgError):
    """A covariance matrix is numerically not positive definite."""


@dataclass
class SeKernelParams:
    """Squared-exponential kernel hyperparameters for a single parent.

    ``amplitude`` is the output variance (child-variable units squared) and
    ``lengthscale`` the input smoothness scale (parent-variable units).
    Positivity during optimization comes from working in log-space; a
    zero amplitude is tolerated for evaluating pruned-away components.
    """

    amplitude: float
    lengthscale: float

    def __post_init__(self):
        if not (self.amplitude >= 0.0 and np.isfinite(self.amplitude)):
            raise ValueError(f"amplitude must be finite and >= 0, got {self.amplitude}")
        if not (self.lengthscale > 0.0 and np.isfinite(self.lengthscale)):
            raise ValueError(f"lengthscale must be finite and > 0, got {self.lengthscale}")


@dataclass
class CovarianceModel:
    """Additive per-parent SE kernels plus fixed observation noise."""

    per_parent: list[SeKernelParams] = field(default_factory=list)
    noise_variance: float = 0.01

    def __post_init__(self):
        if not (self.noise_variance > 0.0 and np.isfinite(self.noise_variance)):
            raise ValueError(f"noise_variance must be finite and > 0, got {self.noise_variance}")

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([p.amplitude for p in self.per_parent])

    @property
    def lengthscales(self) -> np.ndarray:
        return np.array([p.lengthscale for p in self.per_parent])


def _check_finite_vector(x, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{what} must be a 1-D vector, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{what} contains non-finite values")
    return arr


def se_kernel_matrix(x, params: SeKernelParams) -> np.ndarray:
    """Gram matrix of the SE kernel on a single input column.

    Entry (p, q) is ``amplitude * exp(-(x_p - x_q)^2 / (2 * lengthscale^2))``;
    the result is symmetric with the amplitude on the diagonal.
    """
    x = _check_finite_vector(x, "kernel input")
    if x.size < 1:
        raise ValueError("kernel input must have at least one sample")
    diff = x[:, None] - x[None, :]
    return params.amplitude * np.exp(diff * diff * (-0.5 / params.lengthscale**2))


def se_kernel_cross(x1, x2, params: SeKernelParams) -> np.ndarray:
    """SE kernel between two input columns; shape (len(x1), len(x2))."""
    x1 = _check_finite_vector(x1, "kernel input")
    x2 = _check_finite_vector(x2, "kernel input")
    diff = x1[:, None] - x2[None, :]
    return params.amplitude * np.exp(diff * diff * (-0.5 / params.lengthscale**2))


def _parent_matrix(parent_values, n_parents: int) -> np.ndarray:
    values = np.asarray(parent_values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2:
        raise ValueError(f"parent values must be 2-D (n_samples, n_parents), got shape {values.shape}")
    if values.shape[1] != n_parents:
        raise ValueError(
            f"got {values.shape[1]} parent columns for {n_parents} kernel parameter sets"
        )
    return values


def additive_covariance(parent_values, model: CovarianceModel) -> np.ndarray:
    """Sum of per-parent SE Gram matrices plus noise on the diagonal.

    ``parent_values`` has one column per entry of ``model.per_parent``
    (shape (N, m); m may be zero, leaving noise only).
    """
    values = _parent_matrix(parent_values, len(model.per_parent))
    n = values.shape[0]
    cov = np.zeros((n, n))
    for j, params in enumerate(model.per_parent):
        cov += se_kernel_matrix(values[:, j], params)
    cov[np.diag_indices_from(cov)] += model.noise_variance
    return cov


class _CholFactor:
    """Lower Cholesky factor with solve / inverse / logdet helpers."""

    def __init__(self, lower: np.ndarray):
        self.lower = lower

    @property
    def logdet(self) -> float:
        return 2.0 * float(np.log(np.diagonal(self.lower)).sum())

    def solve(self, b: np.ndarray) -> np.ndarray:
        x, info = lapack.dpotrs(self.lower, b, lower=1)
        if info != 0:
            raise NonPositiveDefiniteError(f"triangular solve failed (info={info})")
        return x

    def inverse(self) -> np.ndarray:
        inv, info = lapack.dpotri(self.lower.copy(order="F"), lower=1)
        if info != 0:
            raise NonPositiveDefiniteError(f"inverse from factor failed (info={info})")
        # dpotri fills one triangle only
        return inv + np.tril(inv, -1).T


def _factor_spd(cov: np.ndarray) -> _CholFactor:
    """Cholesky with escalating-jitter retries; raises when genuinely non-PD."""
    if not np.isfinite(cov).all():
        raise ValueError("covariance matrix contains non-finite values")
    work = np.asarray(cov, dtype=np.float64)
    jitter = _JITTER_REL * float(np.diagonal(work).mean())
    for attempt in range(_JITTER_TRIES + 1):
        lower, info = lapack.dpotrf(work, lower=1, overwrite_a=0)
        if info == 0:
            return _CholFactor(lower)
        if attempt < _JITTER_TRIES:
            work = work + jitter * np.eye(work.shape[0])
            jitter *= _JITTER_GROWTH
    raise NonPositiveDefiniteError(
        f"matrix of shape {cov.shape} is numerically non-positive-definite "
        f"(Cholesky failed after {_JITTER_TRIES} jitter retries)"
    )


def gp_marginal_loglik(residual, cov) -> float:
    """Log marginal likelihood of a zero-mean GP: the multivariate-normal
    log-density of ``residual`` under covariance ``cov``.

    Computed through a symmetric positive-definite factorization as
    ``-(r' C^-1 r + log det C + N log 2pi) / 2``.
    """
    r = _check_finite_vector(residual, "residual")
    cov = np.asarray(cov, dtype=np.float64)
    if cov.shape != (r.size, r.size):
        raise ValueError(f"covariance shape {cov.shape} does not match residual length {r.size}")
    factor = _factor_spd(cov)
    alpha = factor.solve(r)
    return -0.5 * (float(r @ alpha) + factor.logdet + r.size * LOG_2PI)


@dataclass
class GpGradient:
    """Partial derivatives of the GP marginal log-likelihood.

    Kernel hyperparameters are differentiated in log-space; mean parameters
    (linear weights and intercept) in their natural space.
    """

    log_amplitude: np.ndarray
    log_lengthscale: np.ndarray
    weight: np.ndarray
    intercept: float


def gp_marginal_grad(residual, parent_values, model: CovarianceModel, linear_values=None) -> GpGradient:
    """Gradient of :func:`gp_marginal_loglik` at the model's parameters.

    ``parent_values`` are the GP parent columns (N, m); ``linear_values``
    the columns the mean term is linear in (N, k), used for the weight
    gradients. The residual must already have the mean subtracted, so the
    mean-parameter gradients are ``C^-1 r`` projected onto each input.
    """
    r = _check_finite_vector(residual, "residual")
    values = _parent_matrix(parent_values, len(model.per_parent))
    n, m = values.shape
    if linear_values is None:
        linear = np.empty((n, 0))
    else:
        linear = np.asarray(linear_values, dtype=np.float64)
        if linear.ndim == 1:
            linear = linear[:, None]

    kernels = np.empty((m, n, n))
    sq_dists = np.empty((m, n, n))
    for j, params in enumerate(model.per_parent):
        diff = values[:, j][:, None] - values[:, j][None, :]
        sq_dists[j] = diff * diff
        kernels[j] = params.amplitude * np.exp(sq_dists[j] * (-0.5 / params.lengthscale**2))
    cov = kernels.sum(axis=0) if m else np.zeros((n, n))
    cov[np.diag_indices_from(cov)] += model.noise_variance

    factor = _factor_spd(cov)
    alpha = factor.solve(r)
    inner = np.outer(alpha, alpha) - factor.inverse()

    g_log_amp = np.empty(m)
    g_log_ls = np.empty(m)
    for j, params in enumerate(model.per_parent):
        weighted = inner * kernels[j]
        g_log_amp[j] = 0.5 * weighted.sum()
        g_log_ls[j] = 0.5 * (weighted * sq_dists[j]).sum() / params.lengthscale**2

    return GpGradient(
        log_amplitude=g_log_amp,
        log_lengthscale=g_log_ls,
        weight=linear.T @ alpha,
        intercept=float(alpha.sum()),
    )


def gp_posterior_predictive_loglik(
    train_residual,
    test_residual,
    train_values,
    test_values,
    model: CovarianceModel,
) -> float:
    """Log-density of test residuals under the GP posterior predictive.

    Conditions the joint additive-SE Gaussian over train and test points on
    the training residuals. With no training points this is the marginal
    likelihood of the test block; with all amplitudes zero it reduces to
    independent Gaussians with the noise variance.
    """
    r_test = _check_finite_vector(test_residual, "test residual")
    if r_test.size == 0:
        return 0.0
    m = len(model.per_parent)
    if m == 0 or all(p.amplitude == 0.0 for p in model.per_parent):
        # diagonal covariance; avoids dense N x N work for large test sets
        var = model.noise_variance
        return -0.5 * float(r_test @ r_test / var + r_test.size * (np.log(var) + LOG_2PI))
    test_vals = _parent_matrix(test_values, m)
    r_train = _check_finite_vector(train_residual, "train residual")
    if r_train.size == 0:
        return gp_marginal_loglik(r_test, additive_covariance(test_vals, model))
    train_vals = _parent_matrix(train_values, m)

    cov_train = additive_covariance(train_vals, model)
    cov_test = additive_covariance(test_vals, model)
    cross = np.zeros((r_train.size, r_test.size))
    for j, params in enumerate(model.per_parent):
        cross += se_kernel_cross(train_vals[:, j], test_vals[:, j], params)

    factor = _factor_spd(cov_train)
    solved_cross = factor.solve(cross)
    mean = solved_cross.T @ r_train
    cond_cov = cov_test - cross.T @ solved_cross
    return gp_marginal_loglik(r_test - mean, cond_cov)
