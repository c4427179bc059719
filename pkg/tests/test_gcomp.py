import numpy as np
import pytest

from bridgebound.errors import (ConfigError, InvalidSensitivityParam,
                                VerificationFailure)
from bridgebound.gcomp import (DeltaPrior, SensitivitySetting,
                               counterfactual_mediator_draws, delta_bar_draw,
                               run, sweep, check_sweep_rows)

from conftest import rng


class TestCounterfactualDraws:
    def test_arm_means(self):
        mean0 = np.array([1.5])
        m0, _, _ = counterfactual_mediator_draws(mean0, 0.7, 0.25, 0, 10_000, rng(1))
        m1, _, _ = counterfactual_mediator_draws(mean0, 0.7, 0.25, 1, 10_000, rng(2))
        assert abs(m0.mean() - 1.5) <= 0.03
        assert abs(m1.mean() - 2.2) <= 0.03

    def test_concentrates_at_tiny_variance(self):
        mean0 = np.array([0.4, -0.6, 2.0])
        m, _, _ = counterfactual_mediator_draws(mean0, 1.0, 1e-12, 1, 4, rng(3))
        assert np.allclose(m, np.repeat(mean0 + 1.0, 4), atol=1e-5)

    def test_bridge_pair_orders_by_proximity(self):
        mean0 = np.full(50, 0.2)
        shift, sig2 = 0.9, 0.5
        m, l0, l1 = counterfactual_mediator_draws(mean0, shift, sig2, 0, 3, rng(4))
        d0 = np.abs(m - np.repeat(mean0, 3))
        d1 = np.abs(m - np.repeat(mean0 + shift, 3))
        assert np.array_equal(d0 < d1, l0 > l1)

    def test_unit_major_layout(self):
        mean0 = np.array([0.0, 100.0])
        m, _, _ = counterfactual_mediator_draws(mean0, 0.0, 1e-4, 0, 3, rng(5))
        assert np.all(np.abs(m[:3]) < 1.0) and np.all(np.abs(m[3:] - 100.0) < 1.0)


class TestDeltaPrior:
    def test_zero_envelope_kills_every_kind(self):
        for kind in ("uniform", "beta", "endpoint_lower", "endpoint_upper"):
            assert delta_bar_draw(0.0, DeltaPrior(kind=kind), rng(6)) == 0.0

    def test_endpoints_are_exact(self):
        assert delta_bar_draw(0.7, DeltaPrior(kind="endpoint_upper"), rng(7)) == 0.7
        assert delta_bar_draw(0.7, DeltaPrior(kind="endpoint_lower"), rng(7)) == -0.7

    def test_uniform_moments_and_support(self):
        r = rng(8)
        prior = DeltaPrior()
        draws = np.array([delta_bar_draw(2.0, prior, r) for _ in range(100_000)])
        assert np.all(np.abs(draws) <= 2.0)
        assert abs(draws.mean()) <= 0.02
        assert abs(draws.std() - 2.0 / np.sqrt(3.0)) <= 0.02

    def test_beta_mean(self):
        r = rng(9)
        prior = DeltaPrior(kind="beta", shape1=2.0, shape2=5.0)
        draws = np.array([delta_bar_draw(1.0, prior, r) for _ in range(50_000)])
        assert abs(draws.mean() - (2.0 * 2.0 / 7.0 - 1.0)) <= 0.01

    def test_validation(self):
        with pytest.raises(ConfigError):
            DeltaPrior(kind="gaussian")
        with pytest.raises(ConfigError):
            DeltaPrior(kind="beta", shape1=0.0)


class TestSettingValidation:
    def test_route_checked(self):
        with pytest.raises(ConfigError):
            SensitivitySetting(route="anchor")

    def test_parameter_ranges(self):
        with pytest.raises(InvalidSensitivityParam):
            SensitivitySetting(lambda0=0.5)
        with pytest.raises(InvalidSensitivityParam):
            SensitivitySetting(kappa1=0.99)
        with pytest.raises(InvalidSensitivityParam):
            SensitivitySetting(k0=1.5)
        with pytest.raises(InvalidSensitivityParam):
            SensitivitySetting(g1=0.0)
        with pytest.raises(InvalidSensitivityParam):
            SensitivitySetting(gamma_cap=0.9)


def run_small(data, setting, seed=5, draws=20, **kw):
    kw.setdefault("burn_in", 3)
    kw.setdefault("mediator_draws_per_unit", 8)
    return run(data, setting, draws=draws, seed=seed, **kw)


class TestRun:
    def test_deterministic_and_thread_invariant(self, bench_data):
        setting = SensitivitySetting(route="benchmark_raw", kappa0=1.5, kappa1=1.5)
        a = run_small(bench_data, setting)
        b = run_small(bench_data, setting)
        c = run_small(bench_data, setting, threads=4)
        for name in a.field_order:
            assert np.array_equal(a.records[name], b.records[name])
            assert np.array_equal(a.records[name], c.records[name])

    def test_burn_in_is_a_substream_offset(self, null_data):
        setting = SensitivitySetting()
        head = run_small(null_data, setting, draws=12, burn_in=0)
        tail = run_small(null_data, setting, draws=8, burn_in=4)
        for name in head.field_order:
            assert np.array_equal(head.records[name][4:], tail.records[name])

    def test_si_anchor_has_zero_envelope(self, null_data):
        res = run_small(null_data, SensitivitySetting())
        rec = res.records
        assert np.all(rec["xi_bar_0"] == 0.0) and np.all(rec["xi_bar_1"] == 0.0)
        assert np.array_equal(rec["theta"], rec["theta_si"])
        assert np.array_equal(rec["nie"], rec["delta1"] - rec["theta"])
        assert res.field_order[-1] == "nie_upper"

    def test_per_draw_identity_holds_bitwise(self, bench_run):
        rec = bench_run.records
        assert np.array_equal(
            rec["theta"], (rec["theta_si"] + rec["delta_bar_0"]) - rec["delta_bar_1"])
        assert np.array_equal(
            rec["theta_lower"], (rec["theta_si"] - rec["xi_bar_0"]) - rec["xi_bar_1"])
        assert np.array_equal(rec["nde"], rec["theta"] - rec["delta0"])
        assert np.array_equal(rec["te"], rec["nde"] + rec["nie"])
        assert np.all(np.abs(rec["delta_bar_0"]) <= rec["xi_bar_0"])
        assert np.all(np.abs(rec["delta_bar_1"]) <= rec["xi_bar_1"])

    def test_route_diagnostic_fields(self, bench_data, null_data, bench_run):
        assert {"eta_hat_0", "eta_hat_1", "gamma_max_0", "gamma_max_1"} \
            <= set(bench_run.records)
        assert np.all(bench_run.records["gamma_max_0"] >= 1.0)
        resid = run_small(null_data, SensitivitySetting(
            route="residual_budget", k0=0.5, k1=0.5, g0=2.0, g1=2.0))
        assert np.all(resid.records["sigma_eta"] > 0.0)
        anchor = run_small(null_data, SensitivitySetting())
        assert "sigma_eta" not in anchor.records

    def test_residual_route_exact_zero_budget(self, null_data):
        for zeroed in (dict(k0=0.0, k1=0.0, g0=2.0, g1=2.0),
                       dict(k0=1.0, k1=1.0, g0=1.0, g1=1.0)):
            res = run_small(null_data, SensitivitySetting(
                route="residual_budget", **zeroed))
            assert np.all(res.records["xi_bar_0"] == 0.0)
            assert np.all(res.records["xi_bar_1"] == 0.0)
            assert np.array_equal(res.records["theta"], res.records["theta_si"])

    def test_null_effect_recovered(self, null_data):
        res = run(null_data, SensitivitySetting(), draws=150, burn_in=10,
                  mediator_draws_per_unit=25, seed=42)
        nie = res.records["nie"]
        assert abs(nie.mean()) <= 2.0 * nie.std()

    def test_comonotone_ties_the_two_shifts(self, bench_data):
        setting = SensitivitySetting(route="benchmark_raw", kappa0=2.0,
                                     kappa1=2.0, comonotone=True)
        res = run_small(bench_data, setting)
        prod = res.records["delta_bar_0"] * res.records["delta_bar_1"]
        assert np.all(prod >= 0.0)
        free = run_small(bench_data, SensitivitySetting(
            route="benchmark_raw", kappa0=2.0, kappa1=2.0), draws=40)
        prod_free = free.records["delta_bar_0"] * free.records["delta_bar_1"]
        assert np.any(prod_free < 0.0)

    def test_pooled_gamma_widens(self, bench_data):
        base = SensitivitySetting(route="benchmark_raw", kappa0=1.5, kappa1=1.5)
        unpooled = run_small(bench_data, base)
        pooled = run_small(bench_data,
                           SensitivitySetting(route="benchmark_raw", kappa0=1.5,
                                              kappa1=1.5, pooled_gamma=True))
        for arm in ("xi_bar_0", "xi_bar_1"):
            assert np.all(pooled.records[arm] >= unpooled.records[arm] - 1e-12)

    def test_summary_structure(self, bench_run):
        summ = bench_run.summary()
        assert set(summ) == set(bench_run.field_order)
        entry = summ["nie_lower"]
        assert set(entry) == {"mean", "q2.5", "q25", "q50", "q75", "q97.5"}
        assert entry["q2.5"] <= entry["q50"] <= entry["q97.5"]

    def test_config_validation(self, null_data):
        with pytest.raises(ConfigError):
            run_small(null_data, SensitivitySetting(), draws=0)
        with pytest.raises(ConfigError):
            run_small(null_data, SensitivitySetting(), burn_in=-1)
        with pytest.raises(ConfigError):
            run_small(null_data, SensitivitySetting(), mediator_draws_per_unit=0)


class TestSweep:
    def test_singleton_grid_matches_run(self, bench_data):
        base = SensitivitySetting(route="benchmark_raw", kappa0=1.5, kappa1=1.5)
        single = run_small(bench_data, base)
        swept = sweep(bench_data, base, "kappa", [1.5], draws=20, burn_in=3,
                      mediator_draws_per_unit=8, seed=5)
        for name in single.field_order:
            assert np.array_equal(single.records[name],
                                  swept.results[0].records[name])

    def test_kappa_sweep_contracts(self, bench_data):
        base = SensitivitySetting(route="benchmark_raw")
        swept = sweep(bench_data, base, "kappa", [1.0, 1.5, 2.0, 3.0], draws=20,
                      burn_in=3, mediator_draws_per_unit=8, seed=5)
        widths = [row["half_width"] for row in swept.rows]
        centers = {row["si_center"] for row in swept.rows}
        assert widths == sorted(widths)
        assert len(centers) == 1

    def test_g_sweep_zero_at_unit_ratio(self, null_data):
        base = SensitivitySetting(route="residual_budget", k0=0.5, k1=0.5)
        swept = sweep(null_data, base, "g", [1.0, 1.5, 2.0], draws=15, burn_in=2,
                      mediator_draws_per_unit=6, seed=5)
        assert swept.rows[0]["half_width"] == 0.0
        assert swept.rows[-1]["half_width"] > 0.0

    def test_axis_route_compatibility(self, bench_data, null_data):
        with pytest.raises(ConfigError):
            sweep(null_data, SensitivitySetting(route="residual_budget"),
                  "kappa", [1.0, 2.0], draws=5, seed=1)
        with pytest.raises(ConfigError):
            sweep(bench_data, SensitivitySetting(route="benchmark_raw"),
                  "k", [0.0, 0.5], draws=5, seed=1)
        with pytest.raises(ConfigError):
            sweep(bench_data, SensitivitySetting(route="benchmark_raw"),
                  "slope", [1.0], draws=5, seed=1)
        with pytest.raises(ConfigError):
            sweep(bench_data, SensitivitySetting(route="benchmark_raw"),
                  "kappa", [], draws=5, seed=1)

    def test_check_sweep_rows_catches_violations(self):
        rows = [{"value": 1.0, "si_center": 0.3, "half_width": 0.1},
                {"value": 2.0, "si_center": 0.3, "half_width": 0.05}]
        with pytest.raises(VerificationFailure, match="half-width"):
            check_sweep_rows(rows)
        rows = [{"value": 1.0, "si_center": 0.3, "half_width": 0.1},
                {"value": 2.0, "si_center": 0.3 + 1e-9, "half_width": 0.2}]
        with pytest.raises(VerificationFailure, match="center"):
            check_sweep_rows(rows)
        with pytest.raises(VerificationFailure):
            check_sweep_rows([])
