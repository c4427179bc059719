"""Observable calibration of the sensitivity parameters.

Two routes map data onto (eta, gamma):

* benchmark: an observed proxy W plays the role of the missing confounder.
  eta_hat is the W coefficient in an augmented outcome regression times the
  within-arm range of W; gamma_hat is the largest fitted-density ratio of
  W | (arm, mediator, bridge) against W | (arm, bridge) over the arm's observed
  W values. Raw W is standardized internally (full-sample sd) so the result is
  invariant under linear rescaling of W while remaining sensitive to genuine
  re-expression; rank scale replaces W with its within-arm fractional rank and
  is invariant under any strictly increasing transform.
* residual budget: sigma_eta is the root mean squared treated-arm residual;
  the user budgets a fraction k of it (eta <= 2 * sigma_eta * sqrt(k)) and a
  selection ratio cap g.

Amplification (lambda, kappa) >= 1 scales the benchmark estimates toward "the
unobserved confounder is this many times stronger than W".
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .data import Dataset, fractional_ranks
from .envelope import xi_pointwise
from .errors import DegenerateBenchmark, InvalidSensitivityParam, NoBenchmark
from .linear_bayes import default_prior, nig_update, posterior_sigma2_mean

DEFAULT_GAMMA_CAP = 20.0
DEFAULT_G_GRID = (1.25, 1.5, 2.0, 3.0)
DEFAULT_K_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class BenchmarkContext:
    """Draw-independent benchmark preprocessing for one dataset."""

    scale: str
    wprime: np.ndarray
    arm_rows: tuple
    arm_values: tuple     # row order, aligned with arm_rows
    arm_sorted: tuple     # ascending, for the sup kernel
    arm_ranges: tuple


def prepare_benchmark(data: Dataset, scale: str) -> BenchmarkContext:
    if data.benchmark is None:
        raise NoBenchmark("calibration route requires a benchmark column")
    if scale == "rank":
        wprime = fractional_ranks(data)
    elif scale == "raw":
        sd = float(np.std(data.benchmark))
        if sd == 0.0:
            warnings.warn("benchmark variable is constant", DegenerateBenchmark)
            wprime = np.array(data.benchmark, dtype=np.float64)
        else:
            wprime = data.benchmark / sd
    else:
        raise InvalidSensitivityParam(f"unknown benchmark scale {scale!r}")
    rows = tuple(data.arm_indices(arm) for arm in (0, 1))
    values = tuple(np.ascontiguousarray(wprime[idx]) for idx in rows)
    sorted_vals = tuple(np.sort(v) for v in values)
    ranges = tuple(float(v.max() - v.min()) for v in values)
    return BenchmarkContext(scale, wprime, rows, values, sorted_vals, ranges)


def estimate_benchmark_eta(outcome_design: np.ndarray, response: np.ndarray,
                           context: BenchmarkContext):
    """Per-arm eta_hat from one augmented conjugate outcome regression.

    The regression adds W' to the outcome regressors; eta_hat_a is the
    posterior-mean |coefficient| times the within-arm empirical range of W'.
    """
    design = np.column_stack([outcome_design, context.wprime])
    post = nig_update(default_prior(design.shape[1]), design, response)
    coef = abs(float(post.mean[-1]))
    out = []
    for arm in (0, 1):
        rng_a = context.arm_ranges[arm]
        if rng_a == 0.0:
            warnings.warn(f"benchmark constant within arm {arm}", DegenerateBenchmark)
        out.append(coef * rng_a)
    return out[0], out[1]


def estimate_benchmark_gamma(obs_m: np.ndarray, obs_l0: np.ndarray, obs_l1: np.ndarray,
                             context: BenchmarkContext, arm: int,
                             pts_m: np.ndarray, pts_l0: np.ndarray, pts_l1: np.ndarray,
                             cap: float = DEFAULT_GAMMA_CAP,
                             pooled: bool = False) -> np.ndarray:
    """gamma_hat at each evaluation point, for one arm.

    Fits W' | (m, l0, l1) and W' | (l0, l1) on the arm's rows as conjugate
    Gaussian regressions (posterior-mean coefficients and variances), then
    maximizes the fitted-density ratio over the arm's observed W' values.
    Clamped to [1, cap]; `pooled` replaces the per-point values with their
    maximum.
    """
    if cap < 1.0 or not np.isfinite(cap):
        raise InvalidSensitivityParam(f"gamma cap must be finite and >= 1, got {cap}")
    idx = context.arm_rows[arm]
    w_arm = context.arm_values[arm]
    ones = np.ones(idx.size)
    design_c = np.column_stack([ones, obs_m[idx], obs_l0[idx], obs_l1[idx]])
    design_r = np.column_stack([ones, obs_l0[idx], obs_l1[idx]])
    post_c = nig_update(default_prior(4), design_c, w_arm)
    post_r = nig_update(default_prior(3), design_r, w_arm)
    sig2_c = posterior_sigma2_mean(post_c)
    sig2_r = posterior_sigma2_mean(post_r)
    bc = post_c.mean
    br = post_r.mean
    mu_c = bc[0] + bc[1] * pts_m + bc[2] * pts_l0 + bc[3] * pts_l1
    mu_r = br[0] + br[1] * pts_l0 + br[2] * pts_l1
    log_sup = _kernels.gamma_sup_logratio(
        np.ascontiguousarray(mu_c), sig2_c,
        np.ascontiguousarray(mu_r), sig2_r, context.arm_sorted[arm]
    )
    gamma = np.clip(np.exp(log_sup), 1.0, cap)
    if pooled:
        gamma = np.full_like(gamma, gamma.max())
    return gamma


def benchmark_envelope(eta_hat: float, gamma_hat, lam: float, kappa: float):
    """Pointwise bound under amplification: xi(lambda * eta_hat, kappa * gamma_hat)."""
    if lam < 1.0 or kappa < 1.0:
        raise InvalidSensitivityParam(
            f"amplification factors must be >= 1, got lambda={lam}, kappa={kappa}"
        )
    return xi_pointwise(lam * eta_hat, kappa * np.asarray(gamma_hat))


def estimate_sigma_eta(treated_response: np.ndarray, treated_prediction: np.ndarray) -> float:
    """Root mean squared treated-arm residual under the current outcome draw."""
    resid = np.ascontiguousarray(treated_response - treated_prediction)
    if resid.size == 0:
        raise NoBenchmark("no treated rows to estimate the residual scale")
    return float(np.sqrt(_kernels.comp_mean(resid * resid)))


def residual_envelope(sigma_eta: float, k: float, g: float) -> float:
    """Bound 2 * sigma_eta * sqrt(k) * (g - 1) / g from the residual budget.

    k in [0, 1] is the share of residual variance attributed to confounding
    (range bound via the variance-of-a-bounded-variable inequality); g >= 1
    caps the selection ratio. Exactly zero at k = 0 or g = 1.
    """
    if not 0.0 <= k <= 1.0:
        raise InvalidSensitivityParam(f"k must lie in [0, 1], got {k}")
    if sigma_eta < 0.0 or not np.isfinite(sigma_eta):
        raise InvalidSensitivityParam(f"sigma_eta must be finite and >= 0, got {sigma_eta}")
    return xi_pointwise(2.0 * sigma_eta * np.sqrt(k), g)
