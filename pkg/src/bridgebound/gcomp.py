"""Posterior g-computation with sensitivity envelopes.

Each posterior draw runs the same six steps: sample the mediator model, rebuild
the bridge regressors and sample the outcome model conditionally, push
counterfactual mediator draws through both models, turn the chosen calibration
route into an aggregated envelope Xi_bar per arm, draw the shift Delta_bar from
its prior on [-Xi_bar, +Xi_bar], and assemble theta and the effect contrasts.
Draws are i.i.d. (conjugate models), each driven by its own seed substream, so
results are byte-identical regardless of thread count, and a sweep can evaluate
a whole grid of sensitivity settings against shared model draws.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .bridge import bridge_log_pair, mediator_means, outcome_design
from .calibration import (
    DEFAULT_GAMMA_CAP,
    benchmark_envelope,
    estimate_benchmark_eta,
    estimate_benchmark_gamma,
    estimate_sigma_eta,
    prepare_benchmark,
    residual_envelope,
)
from .data import Dataset
from .envelope import (
    ScalarDecomposition,
    aggregate_xi_bar,
    mediation_effects,
)
from .errors import ConfigError, InvalidSensitivityParam, VerificationFailure
from .linear_bayes import default_prior, nig_update, sample_draw

ROUTES = ("si_anchor", "benchmark_raw", "benchmark_rank", "residual_budget")
PRIOR_KINDS = ("uniform", "beta", "endpoint_lower", "endpoint_upper")

DEFAULT_DRAWS = 2000
DEFAULT_BURN_IN = 500
DEFAULT_MEDIATOR_DRAWS = 50


@dataclass(frozen=True)
class DeltaPrior:
    """Prior for the shift Delta_bar on [-xi_bar, +xi_bar]."""

    kind: str = "uniform"
    shape1: float = 1.0
    shape2: float = 1.0

    def __post_init__(self):
        if self.kind not in PRIOR_KINDS:
            raise ConfigError(f"unknown delta prior kind {self.kind!r}")
        if self.kind == "beta" and not (self.shape1 > 0 and self.shape2 > 0):
            raise ConfigError("beta prior needs positive shape parameters")


@dataclass(frozen=True)
class SensitivitySetting:
    """One point in sensitivity-parameter space plus the prior for the shift."""

    route: str = "si_anchor"
    lambda0: float = 1.0
    lambda1: float = 1.0
    kappa0: float = 1.0
    kappa1: float = 1.0
    k0: float = 0.0
    k1: float = 0.0
    g0: float = 1.0
    g1: float = 1.0
    delta_prior: DeltaPrior = field(default_factory=DeltaPrior)
    comonotone: bool = False
    pooled_gamma: bool = False
    gamma_cap: float = DEFAULT_GAMMA_CAP

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ConfigError(f"unknown route {self.route!r}")
        for name in ("lambda0", "lambda1", "kappa0", "kappa1"):
            if getattr(self, name) < 1.0:
                raise InvalidSensitivityParam(f"{name} must be >= 1")
        for name in ("k0", "k1"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidSensitivityParam(f"{name} must lie in [0, 1]")
        for name in ("g0", "g1"):
            if getattr(self, name) < 1.0:
                raise InvalidSensitivityParam(f"{name} must be >= 1")
        if self.gamma_cap < 1.0:
            raise InvalidSensitivityParam("gamma_cap must be >= 1")


def delta_bar_draw(xi_bar: float, prior: DeltaPrior, rng: np.random.Generator) -> float:
    """One draw of Delta_bar from the prior supported on [-xi_bar, +xi_bar]."""
    return xi_bar * _delta_base(prior, rng)


def _delta_base(prior: DeltaPrior, rng: Optional[np.random.Generator]) -> float:
    # base variate on [-1, 1]; scaled by xi_bar afterwards so a sweep can share
    # one base draw across every grid point
    if prior.kind == "uniform":
        return float(rng.uniform(-1.0, 1.0))
    if prior.kind == "beta":
        return float(2.0 * rng.beta(prior.shape1, prior.shape2) - 1.0)
    return -1.0 if prior.kind == "endpoint_lower" else 1.0


def counterfactual_mediator_draws(mean0: np.ndarray, treat_shift: float, sigma2: float,
                                  arm: int, n_per_unit: int, rng: np.random.Generator):
    """Sample n_per_unit mediator values per unit from arm's fitted law.

    Returns (m, l0, l1) flattened unit-major; the bridge pair is evaluated at
    the drawn values with the control-arm mean, whichever arm generated them.
    """
    mean_rep = np.repeat(mean0, n_per_unit)
    z = rng.standard_normal(mean_rep.shape[0])
    m = (mean_rep + treat_shift * arm) + np.sqrt(sigma2) * z
    l0, l1 = bridge_log_pair(m, mean_rep, treat_shift, sigma2)
    return m, l0, l1


_CORE_FIELDS = (
    "theta_si", "delta0", "delta1", "xi_bar_0", "xi_bar_1",
    "delta_bar_0", "delta_bar_1", "theta", "nde", "nie", "te",
    "theta_lower", "theta_upper", "nde_lower", "nde_upper",
    "nie_lower", "nie_upper",
)
_ROUTE_FIELDS = {
    "si_anchor": (),
    "benchmark_raw": ("eta_hat_0", "eta_hat_1", "gamma_max_0", "gamma_max_1"),
    "benchmark_rank": ("eta_hat_0", "eta_hat_1", "gamma_max_0", "gamma_max_1"),
    "residual_budget": ("sigma_eta",),
}

_QUANTILES = ((2.5, 0.025), (25.0, 0.25), (50.0, 0.50), (75.0, 0.75), (97.5, 0.975))


@dataclass(frozen=True)
class RunResult:
    """Per-draw records plus metadata for one sensitivity setting."""

    setting: SensitivitySetting
    records: dict
    n_units: int
    n_draws: int
    burn_in: int
    mediator_draws_per_unit: int
    seed: int
    backend: str

    @property
    def field_order(self):
        return _CORE_FIELDS + _ROUTE_FIELDS[self.setting.route]

    def summary(self) -> dict:
        out = {}
        for name in self.field_order:
            arr = self.records[name]
            entry = {"mean": _kernels.comp_mean(arr)}
            for label, q in _QUANTILES:
                entry[f"q{label:g}"] = float(np.quantile(arr, q))
            out[name] = entry
        return out


class _Engine:
    """Dataset-level state shared by every draw of one run or sweep."""

    def __init__(self, data: Dataset, settings: Sequence[SensitivitySetting],
                 mediator_draws_per_unit: int):
        if not settings:
            raise ConfigError("need at least one sensitivity setting")
        first = settings[0]
        for s in settings[1:]:
            same = (s.route == first.route and s.delta_prior == first.delta_prior
                    and s.comonotone == first.comonotone
                    and s.pooled_gamma == first.pooled_gamma
                    and s.gamma_cap == first.gamma_cap)
            if not same:
                raise ConfigError(
                    "settings evaluated against shared draws must agree on "
                    "route, delta prior, comonotone, pooled_gamma, gamma_cap"
                )
        if mediator_draws_per_unit < 1:
            raise ConfigError("mediator_draws_per_unit must be >= 1")
        self.data = data
        self.settings = list(settings)
        self.route = first.route
        self.prior = first.delta_prior
        self.comonotone = first.comonotone
        self.n_per_unit = mediator_draws_per_unit
        self.fields = _CORE_FIELDS + _ROUTE_FIELDS[self.route]

        n = data.n
        self.design_med = np.column_stack([np.ones(n), data.treatment.astype(np.float64),
                                           data.covariates])
        self.med_post = nig_update(default_prior(data.p + 2), self.design_med, data.mediator)
        self.outcome_prior = default_prior(8)
        self.treated = data.arm_indices(1)
        self.treat_col = data.treatment.astype(np.float64)
        self.bench = None
        if self.route in ("benchmark_raw", "benchmark_rank"):
            scale = "raw" if self.route == "benchmark_raw" else "rank"
            self.bench = prepare_benchmark(data, scale)

    def run_draw(self, rng: np.random.Generator, t: int, storage):
        data = self.data
        # 1) mediator model draw, then the outcome model conditional on it
        med = sample_draw(self.med_post, rng)
        mean0, shift = mediator_means(data.covariates, med.beta)
        l0_obs, l1_obs = bridge_log_pair(data.mediator, mean0, shift, med.sigma2)
        design_y = outcome_design(data.mediator, self.treat_col, l0_obs, l1_obs)
        out_post = nig_update(self.outcome_prior, design_y, data.outcome)
        out = sample_draw(out_post, rng)
        beta_y = np.ascontiguousarray(out.beta)

        # 2) counterfactual mediator draws, control then treated law
        m0, l0_cf, l1_cf = counterfactual_mediator_draws(
            mean0, shift, med.sigma2, 0, self.n_per_unit, rng)
        m1, l0_cf1, l1_cf1 = counterfactual_mediator_draws(
            mean0, shift, med.sigma2, 1, self.n_per_unit, rng)
        n_pts = m0.shape[0]

        # 3) anchor and the two reference arms, averaged over (unit, draw)
        theta_si = _kernels.outcome_mean_sum(m0, l0_cf, l1_cf, 1.0, beta_y) / n_pts
        delta0 = _kernels.outcome_mean_sum(m0, l0_cf, l1_cf, 0.0, beta_y) / n_pts
        delta1 = _kernels.outcome_mean_sum(m1, l0_cf1, l1_cf1, 1.0, beta_y) / n_pts

        # 4) route-specific calibration, shared by every setting in the grid
        diag = {}
        eta_hat = gamma_pts = sigma_eta = None
        if self.route in ("benchmark_raw", "benchmark_rank"):
            eta_hat = estimate_benchmark_eta(design_y, data.outcome, self.bench)
            first = self.settings[0]
            gamma_pts = tuple(
                estimate_benchmark_gamma(
                    data.mediator, l0_obs, l1_obs, self.bench, arm,
                    m0, l0_cf, l1_cf, cap=first.gamma_cap, pooled=first.pooled_gamma)
                for arm in (0, 1))
            diag["eta_hat_0"], diag["eta_hat_1"] = eta_hat
            diag["gamma_max_0"] = float(gamma_pts[0].max())
            diag["gamma_max_1"] = float(gamma_pts[1].max())
        elif self.route == "residual_budget":
            pred = design_y[self.treated] @ beta_y
            sigma_eta = estimate_sigma_eta(data.outcome[self.treated], pred)
            diag["sigma_eta"] = sigma_eta

        # 5) prior base variates, drawn once so grid points share them
        base0 = _delta_base(self.prior, rng)
        base1 = base0 if self.comonotone else _delta_base(self.prior, rng)

        # 6) assemble each setting from the shared pieces
        for j, setting in enumerate(self.settings):
            if self.route == "si_anchor":
                xi0 = xi1 = 0.0
            elif self.route == "residual_budget":
                xi0 = residual_envelope(sigma_eta, setting.k0, setting.g0)
                xi1 = residual_envelope(sigma_eta, setting.k1, setting.g1)
            else:
                xi0 = aggregate_xi_bar(benchmark_envelope(
                    eta_hat[0], gamma_pts[0], setting.lambda0, setting.kappa0))
                xi1 = aggregate_xi_bar(benchmark_envelope(
                    eta_hat[1], gamma_pts[1], setting.lambda1, setting.kappa1))
            dec = ScalarDecomposition.assemble(theta_si, xi0 * base0, xi1 * base1, xi0, xi1)
            eff = mediation_effects(dec.theta, delta0, delta1)
            theta_lower = (theta_si - xi0) - xi1
            theta_upper = (theta_si + xi0) + xi1
            rec = storage[j]
            rec["theta_si"][t] = theta_si
            rec["delta0"][t] = delta0
            rec["delta1"][t] = delta1
            rec["xi_bar_0"][t] = xi0
            rec["xi_bar_1"][t] = xi1
            rec["delta_bar_0"][t] = dec.delta_bar_0
            rec["delta_bar_1"][t] = dec.delta_bar_1
            rec["theta"][t] = dec.theta
            rec["nde"][t] = eff.nde
            rec["nie"][t] = eff.nie
            rec["te"][t] = eff.te
            rec["theta_lower"][t] = theta_lower
            rec["theta_upper"][t] = theta_upper
            rec["nde_lower"][t] = theta_lower - delta0
            rec["nde_upper"][t] = theta_upper - delta0
            rec["nie_lower"][t] = delta1 - theta_upper
            rec["nie_upper"][t] = delta1 - theta_lower
            for key, val in diag.items():
                rec[key][t] = val


def _run_grid(data: Dataset, settings: Sequence[SensitivitySetting], *,
              draws: int, burn_in: int, mediator_draws_per_unit: int,
              seed: int, threads: int = 1):
    if draws < 1:
        raise ConfigError("draws must be >= 1")
    if burn_in < 0:
        raise ConfigError("burn_in must be >= 0")
    engine = _Engine(data, settings, mediator_draws_per_unit)
    # draws are i.i.d.; burn-in is honored as a substream offset so configs
    # that specify it stay reproducible
    children = np.random.SeedSequence(seed).spawn(burn_in + draws)[burn_in:]
    storage = [{name: np.empty(draws) for name in engine.fields} for _ in settings]

    def task(t: int):
        rng = np.random.default_rng(children[t])
        engine.run_draw(rng, t, storage)

    if threads <= 1:
        for t in range(draws):
            task(t)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(task, range(draws)))

    return [
        RunResult(setting, storage[j], data.n, draws, burn_in,
                  mediator_draws_per_unit, seed, _kernels.backend_name())
        for j, setting in enumerate(settings)
    ]


def run(data: Dataset, setting: SensitivitySetting, *,
        draws: int = DEFAULT_DRAWS, burn_in: int = DEFAULT_BURN_IN,
        mediator_draws_per_unit: int = DEFAULT_MEDIATOR_DRAWS,
        seed: int, threads: int = 1) -> RunResult:
    """One posterior run at a single sensitivity setting."""
    return _run_grid(data, [setting], draws=draws, burn_in=burn_in,
                     mediator_draws_per_unit=mediator_draws_per_unit,
                     seed=seed, threads=threads)[0]


_AXIS_FIELDS = {
    "kappa": ("kappa0", "kappa1"),
    "lambda": ("lambda0", "lambda1"),
    "k": ("k0", "k1"),
    "g": ("g0", "g1"),
}


@dataclass(frozen=True)
class SweepResult:
    axis: str
    grid: tuple
    base_setting: SensitivitySetting
    results: tuple
    rows: tuple
    seed: int


def sweep(data: Dataset, base_setting: SensitivitySetting, axis: str,
          grid: Sequence[float], *, draws: int = DEFAULT_DRAWS,
          burn_in: int = DEFAULT_BURN_IN,
          mediator_draws_per_unit: int = DEFAULT_MEDIATOR_DRAWS,
          seed: int, threads: int = 1) -> SweepResult:
    """Evaluate a grid of one sensitivity axis against shared model draws.

    The swept axis sets both arms. Model draws, calibration quantities, and
    prior base variates are computed once per draw, so grid points differ only
    through the envelope; a grid of length one reproduces run() exactly.
    """
    if axis not in _AXIS_FIELDS:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {sorted(_AXIS_FIELDS)}")
    if len(grid) == 0:
        raise ConfigError("sweep grid is empty")
    benchmark_axis = axis in ("kappa", "lambda")
    if benchmark_axis != base_setting.route.startswith("benchmark"):
        raise ConfigError(f"axis {axis!r} does not apply to route {base_setting.route!r}")
    f0, f1 = _AXIS_FIELDS[axis]
    settings = [dataclasses.replace(base_setting, **{f0: v, f1: v}) for v in grid]
    results = _run_grid(data, settings, draws=draws, burn_in=burn_in,
                        mediator_draws_per_unit=mediator_draws_per_unit,
                        seed=seed, threads=threads)
    rows = []
    for value, res in zip(grid, results):
        rec = res.records
        si_center = _kernels.comp_mean(rec["delta1"] - rec["theta_si"])
        row = {
            "axis": axis,
            "value": float(value),
            "si_center": si_center,
            "nie_lower": _kernels.comp_mean(rec["nie_lower"]),
            "nie_upper": _kernels.comp_mean(rec["nie_upper"]),
            "nie_lower_q2.5": float(np.quantile(rec["nie_lower"], 0.025)),
            "nie_upper_q97.5": float(np.quantile(rec["nie_upper"], 0.975)),
            "nde_lower": _kernels.comp_mean(rec["nde_lower"]),
            "nde_upper": _kernels.comp_mean(rec["nde_upper"]),
            "half_width": _kernels.comp_mean(rec["xi_bar_0"] + rec["xi_bar_1"]),
            "theta_si_mean": _kernels.comp_mean(rec["theta_si"]),
        }
        rows.append(row)
    check_sweep_rows(rows)
    return SweepResult(axis, tuple(float(v) for v in grid), base_setting,
                       tuple(results), tuple(rows), seed)


def check_sweep_rows(rows) -> None:
    """Mechanical contract on a sweep table before it is written anywhere.

    The SI center must be bit-identical across grid points (it never touches
    the swept parameter) and the envelope half-width must be nondecreasing in
    the swept parameter, up to 1e-12 rounding slack.
    """
    if not rows:
        raise VerificationFailure("empty sweep table")
    center = rows[0]["si_center"]
    for row in rows[1:]:
        if row["si_center"] != center:
            raise VerificationFailure(
                f"SI center moved across grid points: {center} vs {row['si_center']}")
    ordered = sorted(rows, key=lambda r: r["value"])
    for prev, cur in zip(ordered, ordered[1:]):
        slack = 1e-12 * max(1.0, abs(prev["half_width"]))
        if cur["half_width"] < prev["half_width"] - slack:
            raise VerificationFailure(
                "envelope half-width decreased in the swept parameter: "
                f"{prev['half_width']} -> {cur['half_width']}")
