import math
from dataclasses import replace

import numpy as np
import pytest

from fdnet.config import ConfigError, SimConfig
from fdnet.engine import (
    ALL_VARIANTS,
    Variant,
    apply_axis,
    cdf_at,
    empirical_cdf,
    parse_antennas,
    run,
    run_realization,
    run_variants,
    sweep,
    sweep_variants,
)
from fdnet.phy import rates, sinr
from fdnet.sched import Mode

BASE = SimConfig()


def test_isolated_cell_has_no_intercell_terms():
    cfg = replace(BASE, lambda_bs=0.0, sic_capability=300.0)
    res = run_realization(cfg, 0)
    bd = res.breakdown
    assert (bd.ul.I_bs, bd.ul.I_ulmt, bd.dl.I_bs, bd.dl.I_ulmt) == (0.0, 0.0, 0.0, 0.0)
    s_ul, s_dl = sinr(bd)
    assert s_ul == pytest.approx(bd.ul.S / (bd.ul.I_si + bd.ul.noise), rel=1e-15)
    assert s_dl == pytest.approx(bd.dl.S / (bd.dl.I_intra_mt + bd.dl.noise), rel=1e-15)


def test_realization_deterministic_and_consistent():
    cfg = replace(BASE, algorithm="ALG3", opa_enabled=True)
    a, b = run_realization(cfg, 17), run_realization(cfg, 17)
    assert a == b
    assert rates(*sinr(a.breakdown), cfg.bandwidth) == a.rates
    assert run_realization(cfg, 18) != a


def test_single_realization_report():
    cfg = replace(BASE, realizations=1)
    rep = run(cfg)
    res = run_realization(cfg, 0)
    assert rep.mean_ul == res.rates.r_ul and rep.mean_sum == res.rates.r_sum
    assert rep.se_sum == 0.0 and rep.n == 1


@pytest.fixture(scope="module")
def reports():
    return run_variants(replace(BASE, realizations=2000), ALL_VARIANTS)


def test_report_invariants(reports):
    for v, rep in reports.items():
        for samples in (rep.ul_rates, rep.dl_rates, rep.sum_rates):
            assert (np.diff(samples) >= 0).all()
            xs = np.linspace(samples[0] - 1, samples[-1] + 1, 50)
            c = [cdf_at(samples, x) for x in xs]
            assert all(0 <= y <= 1 for y in c) and (np.diff(c) >= 0).all()
        assert rep.mean_sum == pytest.approx(rep.mean_ul + rep.mean_dl, rel=1e-9)
        assert sum(rep.mode_fractions.values()) == pytest.approx(1.0, abs=1e-12)
        if not v.opa_enabled:
            assert rep.mode_fractions["FD"] == 1.0
        assert rep.config.algorithm == v.algorithm and rep.config.opa_enabled == v.opa_enabled


def test_decomposition_is_mean_of_linear_powers():
    cfg = replace(BASE, realizations=200)
    rep = run(cfg)
    results = [run_realization(cfg, i) for i in range(200)]
    ul_total = np.mean([r.breakdown.ul.S + r.breakdown.ul.interference + r.breakdown.ul.noise for r in results])
    agg = sum(rep.mean_breakdown[("ul", t)] for t in ("S", "I_si", "I_bs", "I_ulmt", "noise"))
    assert agg == pytest.approx(ul_total, rel=1e-9)
    rows = {(t, d): v for t, d, v in rep.decomposition_dbm()}
    assert rows[("noise", "ul")] == pytest.approx(-174 + 10 * math.log10(20e6) + 5, abs=1e-9)
    assert rows[("I_si", "ul")] == pytest.approx(-86.0, abs=1e-9)


def test_opa_modes_and_rate_orderings(reports):
    # moderate-size run: orderings with generous margin, full-size checks live in the acceptance suite
    off = {v.algorithm: r for v, r in reports.items() if not v.opa_enabled}
    on = {v.algorithm: r for v, r in reports.items() if v.opa_enabled}
    assert off["ALG3"].mean_sum > off["ALG1"].mean_sum
    assert off["ALG2"].mean_dl > off["ALG1"].mean_dl
    for a in off:
        assert on[a].mean_sum >= off[a].mean_sum - 2 * off[a].se_sum
        assert on[a].mode_fractions["FD"] < 1.0


def test_parallel_determinism():
    cfg = replace(BASE, realizations=120, algorithm="ALG2", opa_enabled=True)
    ref = run(cfg, workers=1)
    for w in (2, 8):
        rep = run(cfg, workers=w)
        assert rep.summary() == ref.summary()
        assert np.array_equal(rep.sum_rates, ref.sum_rates)


def test_workers_env_fallback(monkeypatch):
    cfg = replace(BASE, realizations=30)
    monkeypatch.setenv("FDNET_WORKERS", "2")
    assert run(cfg).summary() == run(cfg, workers=1).summary()
    monkeypatch.setenv("FDNET_WORKERS", "zero")
    with pytest.raises(ConfigError):
        run(cfg)


def test_standard_error_shrinks():
    a = run(replace(BASE, realizations=2000))
    b = run(replace(BASE, realizations=4000))
    assert a.se_sum / b.se_sum == pytest.approx(math.sqrt(2), rel=0.10)


def test_density_sweep_counts_increase():
    out = sweep(replace(BASE, realizations=100), "density", [1e-5, 2.5e-5, 1e-4])
    counts = [rep.mean_interferers for _, rep in out]
    assert len(out) == 3 and counts[0] < counts[1] < counts[2]


def test_sweep_point_equals_standalone_run():
    cfg = replace(BASE, realizations=50, algorithm="ALG3", opa_enabled=True)
    (value, rep), = sweep(cfg, "sic", [80])
    assert rep.summary() == run(replace(cfg, sic_capability=80.0)).summary()


def test_sweep_errors_name_position():
    with pytest.raises(ConfigError, match="#1"):
        sweep(BASE, "sic", [60, -5])
    with pytest.raises(ConfigError, match="#0"):
        sweep(BASE, "antennas", ["0x2"])
    with pytest.raises(ConfigError):
        sweep(BASE, "power", [1])
    with pytest.raises(ConfigError):
        sweep_variants(BASE, "sic", [], [Variant("ALG1", False)])


def test_axis_helpers():
    assert parse_antennas("2x4") == (2, 4)
    assert parse_antennas(3) == (3, 3)
    assert parse_antennas((1, 2)) == (1, 2)
    cfg = apply_axis(BASE, "antennas", "2x2")
    assert (cfg.n_tx, cfg.n_rx) == (2, 2)
    assert apply_axis(BASE, "sic", 60).sic_capability == 60.0


def test_empirical_cdf_examples():
    assert empirical_cdf([5]).tolist() == [[5.0, 1.0]]
    assert empirical_cdf([3, 1, 2]) == pytest.approx(np.array([[1, 1 / 3], [2, 2 / 3], [3, 1.0]]))
    with pytest.raises(ValueError):
        empirical_cdf([])
    x = np.random.default_rng(0).exponential(size=100_000)
    assert cdf_at(np.sort(x), 1.0) == pytest.approx(1 - math.exp(-1), abs=0.01)


def test_hd_mode_recomputed_at_zero_power():
    cfg = replace(BASE, sic_capability=40.0, algorithm="ALG1", opa_enabled=True)
    seen = set()
    for i in range(40):
        res = run_realization(cfg, i)
        seen.add(res.decision.mode)
        if res.decision.mode == Mode.HD_DL:
            assert res.rates.r_ul == 0.0 and res.breakdown.dl.I_intra_mt == 0.0
            assert res.decision.rescheduled
        if res.decision.mode == Mode.HD_UL:
            assert res.rates.r_dl == 0.0 and res.breakdown.ul.I_si == 0.0
    assert seen & {Mode.HD_DL, Mode.HD_UL}
