"""Horseshoe shrinkage log-prior over GP amplitudes.

The closed form below approximates the Horseshoe marginal density; it is
used verbatim as the regularization term of the training objective. Each
amplitude carries its own scale, so expert-edge and non-expert-edge
components can be shrunk differently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["HsScaleMap", "hs_log_prior", "hs_log_prior_grad"]

_HALF_LOG_2PI = 0.5 * float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class HsScaleMap:
    """Shrinkage scales keyed by whether a GP sits on an expert linear edge."""

    tau_expert: float
    tau_nonexpert: float

    def __post_init__(self):
        for name in ("tau_expert", "tau_nonexpert"):
            value = getattr(self, name)
            if not (value > 0.0 and np.isfinite(value)):
                raise ValueError(f"{name} must be finite and > 0, got {value}")

    @classmethod
    def uniform(cls, tau: float) -> "HsScaleMap":
        return cls(tau_expert=tau, tau_nonexpert=tau)

    def scale_vector(self, on_expert_edge) -> np.ndarray:
        """Per-component scale vector from expert-edge membership flags."""
        flags = np.asarray(on_expert_edge, dtype=bool)
        return np.where(flags, self.tau_expert, self.tau_nonexpert)


def _check_pair(amplitudes, scales):
    s = np.asarray(amplitudes, dtype=np.float64)
    tau = np.asarray(scales, dtype=np.float64)
    if s.ndim != 1 or tau.ndim != 1:
        raise ValueError("amplitudes and scales must be 1-D vectors")
    if s.shape != tau.shape:
        raise ValueError(f"length mismatch: {s.shape[0]} amplitudes, {tau.shape[0]} scales")
    if not np.isfinite(s).all() or (s < 0.0).any():
        raise ValueError("amplitudes must be finite and >= 0")
    if not np.isfinite(tau).all() or (tau <= 0.0).any():
        raise ValueError("scales must be finite and > 0")
    return s, tau


def hs_log_prior(amplitudes, scales) -> float:
    """Horseshoe log-density of amplitude variances under per-entry scales.

    Evaluates ``sum_i log(tau_i / sqrt(s_i^2 + tau_i^2))
    - sum_i log(1 + tau_i^2 / s_i^2) - (p/2) log 2pi`` where ``s_i`` is the
    i-th amplitude. A zero amplitude yields ``-inf`` (the density's pole at
    the origin), never an exception.
    """
    s, tau = _check_pair(amplitudes, scales)
    if s.size == 0:
        return 0.0
    if (s == 0.0).any():
        return float("-inf")
    first = np.log(tau) - 0.5 * np.log(s * s + tau * tau)
    second = np.log1p(tau * tau / (s * s))
    return float(first.sum() - second.sum() - s.size * _HALF_LOG_2PI)


def hs_log_prior_grad(amplitudes, scales) -> np.ndarray:
    """Derivative of :func:`hs_log_prior` with respect to each amplitude.

    Entry i is ``-s_i/(s_i^2 + tau_i^2) + 2 tau_i^2 / (s_i (s_i^2 + tau_i^2))``;
    requires strictly positive amplitudes.
    """
    s, tau = _check_pair(amplitudes, scales)
    if (s == 0.0).any():
        raise ValueError("gradient undefined at zero amplitude")
    denom = s * s + tau * tau
    return -s / denom + 2.0 * tau * tau / (s * denom)
