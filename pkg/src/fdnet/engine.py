"""Monte Carlo orchestration, aggregation and parameter sweeps.

Each realization index owns an independent random stream derived from the
root seed, so results do not depend on execution order or worker count.
All scheduling variants evaluated in one call share the same sampled
networks (topology, fading, shadowing, interferer precoders).
"""
from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .chan import draw_channels, make_beamformers, random_unit_vector
from .config import ConfigError, SimConfig, watt_to_dbm
from .geom import Topology, sample_topology
from .phy import BREAKDOWN_TERMS, RatePair, SinrBreakdown, compute_breakdown, rates, sinr
from .sched import (
    SCHEDULERS,
    CandidateMetrics,
    Mode,
    ScheduleDecision,
    SumRateObjective,
    candidate_metrics,
    opa,
    opa_with_rescheduling,
    reschedule_after_opa,
)

log = logging.getLogger(__name__)

MODES = (Mode.FD, Mode.HD_UL, Mode.HD_DL)
_MODE_CODE = {m: i for i, m in enumerate(MODES)}
AXES = ("density", "sic", "antennas")


class Variant(NamedTuple):
    algorithm: str
    opa_enabled: bool
    opa_knowledge: str = "GENIE"

    @property
    def label(self) -> str:
        opa_tag = self.opa_knowledge.lower() if self.opa_enabled else "off"
        return f"{self.algorithm.lower()}_opa-{opa_tag}"

    @property
    def opa_flag(self) -> str:
        return self.opa_knowledge.lower() if self.opa_enabled else "off"


def variant_of(config: SimConfig) -> Variant:
    return Variant(config.algorithm, config.opa_enabled, config.opa_knowledge)


def with_variant(config: SimConfig, variant: Variant) -> SimConfig:
    return replace(
        config, algorithm=variant.algorithm, opa_enabled=variant.opa_enabled, opa_knowledge=variant.opa_knowledge
    )


ALL_VARIANTS = tuple(Variant(a, o) for a in ("ALG1", "ALG2", "ALG3") for o in (False, True))


@dataclass(frozen=True)
class RealizationResult:
    rates: RatePair
    breakdown: SinrBreakdown
    decision: ScheduleDecision
    num_interferers: int
    saturated: bool


@dataclass
class Network:
    """One sampled network instance plus everything derived from it that is
    shared between scheduling variants."""

    topology: Topology
    channels: object
    w_int: np.ndarray
    metrics: CandidateMetrics


def realization_rngs(seed: int, index: int) -> tuple[np.random.Generator, ...]:
    """Independent geometry, channel and precoder streams for one realization."""
    root = np.random.SeedSequence(seed, spawn_key=(index,))
    return tuple(np.random.Generator(np.random.PCG64(s)) for s in root.spawn(3))


def sample_network(config: SimConfig, index: int) -> Network:
    geo_rng, chan_rng, bf_rng = realization_rngs(config.seed, index)
    topology = sample_topology(config, geo_rng)
    channels = draw_channels(topology, config, chan_rng)
    w_int = random_unit_vector(config.n_tx, bf_rng, size=topology.num_interferers)
    metrics = candidate_metrics(topology, channels, config, config.p_ul_w, config.p_dl_w)
    return Network(topology, channels, w_int, metrics)


def evaluate_variant(config: SimConfig, net: Network, variant: Variant) -> RealizationResult:
    p_ul_max, p_dl_max = config.p_ul_w, config.p_dl_w
    u0, d0 = SCHEDULERS[variant.algorithm](net.metrics)
    decision = ScheduleDecision(u0, d0, p_ul_max, p_dl_max)

    def breakdown_for(dec: ScheduleDecision) -> SinrBreakdown:
        bf = make_beamformers(net.channels, dec.u0, dec.d0, net.w_int)
        return compute_breakdown(net.topology, net.channels, bf, dec.u0, dec.d0, dec.p_ul, dec.p_dl, config)

    full = breakdown_for(decision)
    if variant.opa_enabled:

        def objective_for(u: int, d: int) -> SumRateObjective:
            bd = full if (u, d) == (u0, d0) else breakdown_for(ScheduleDecision(u, d, p_ul_max, p_dl_max))
            return SumRateObjective.from_breakdown(bd, p_ul_max, p_dl_max, variant.opa_knowledge, config.bandwidth)

        if config.opa_reschedule_aware:
            decision = opa_with_rescheduling(decision, objective_for, net.metrics, p_ul_max, p_dl_max)
        else:
            decision = opa(decision, objective_for(u0, d0), p_ul_max, p_dl_max)
            if decision.mode != Mode.FD:
                decision = reschedule_after_opa(decision, net.metrics)
        if decision.mode != Mode.FD:
            full = breakdown_for(decision)
    sinr_ul, sinr_dl = sinr(full)
    return RealizationResult(
        rates=rates(sinr_ul, sinr_dl, config.bandwidth),
        breakdown=full,
        decision=decision,
        num_interferers=net.topology.num_interferers,
        saturated=net.topology.saturated,
    )


def run_realization(config: SimConfig, realization_index: int) -> RealizationResult:
    return evaluate_variant(config, sample_network(config, realization_index), variant_of(config))


# --- aggregation -----------------------------------------------------------

_COLUMNS = ("r_ul", "r_dl", "r_sum") + tuple(f"{d}_{t}" for d, t in BREAKDOWN_TERMS) + (
    "mode",
    "num_interferers",
    "saturated",
)


def _result_row(res: RealizationResult) -> list[float]:
    return (
        [res.rates.r_ul, res.rates.r_dl, res.rates.r_sum]
        + list(res.breakdown.as_row())
        + [_MODE_CODE[res.decision.mode], res.num_interferers, float(res.saturated)]
    )


def _simulate_chunk(args) -> dict[Variant, np.ndarray]:
    config, variants, indices = args
    out = {v: np.empty((len(indices), len(_COLUMNS))) for v in variants}
    for row, index in enumerate(indices):
        net = sample_network(config, index)
        for v in variants:
            out[v][row] = _result_row(evaluate_variant(config, net, v))
    return out


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        env = os.environ.get("FDNET_WORKERS", "").strip()
        try:
            workers = int(env) if env else 1
        except ValueError:
            raise ConfigError(f"FDNET_WORKERS must be an integer, got {env!r}") from None
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return workers


def _simulate(config: SimConfig, variants: Sequence[Variant], workers: int) -> dict[Variant, np.ndarray]:
    n = config.realizations
    if workers == 1:
        return _simulate_chunk((config, variants, range(n)))
    bounds = np.linspace(0, n, min(n, 4 * workers) + 1).astype(int)
    jobs = [(config, variants, range(a, b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_simulate_chunk, jobs))
    return {v: np.concatenate([p[v] for p in parts]) for v in variants}


@dataclass
class Report:
    config: SimConfig
    ul_rates: np.ndarray  # sorted ascending
    dl_rates: np.ndarray
    sum_rates: np.ndarray
    mean_ul: float
    mean_dl: float
    mean_sum: float
    se_ul: float
    se_dl: float
    se_sum: float
    mean_breakdown: dict[tuple[str, str], float]
    mode_fractions: dict[str, float]
    saturated_fraction: float
    mean_interferers: float
    runtime_s: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.sum_rates)

    def decomposition_dbm(self) -> list[tuple[str, str, float]]:
        """Mean linear power per term, rendered in dBm (average first, then convert)."""
        return [(term, direction, watt_to_dbm(p)) for (direction, term), p in self.mean_breakdown.items()]

    def summary(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "realizations": self.n,
            "mean_ul_bps": self.mean_ul,
            "mean_dl_bps": self.mean_dl,
            "mean_sum_bps": self.mean_sum,
            "se_ul_bps": self.se_ul,
            "se_dl_bps": self.se_dl,
            "se_sum_bps": self.se_sum,
            "mode_fractions": dict(self.mode_fractions),
            "saturated_fraction": self.saturated_fraction,
            "mean_interferers": self.mean_interferers,
            "mean_power_dbm": {f"{d}.{t}": watt_to_dbm(p) for (d, t), p in self.mean_breakdown.items()},
        }


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    return mean, se


def build_report(config: SimConfig, table: np.ndarray, runtime_s: float = 0.0) -> Report:
    col = {name: table[:, i] for i, name in enumerate(_COLUMNS)}
    mean_ul, se_ul = _mean_se(col["r_ul"])
    mean_dl, se_dl = _mean_se(col["r_dl"])
    mean_sum, se_sum = _mean_se(col["r_sum"])
    modes = col["mode"].astype(int)
    n = len(table)
    return Report(
        config=config,
        ul_rates=np.sort(col["r_ul"]),
        dl_rates=np.sort(col["r_dl"]),
        sum_rates=np.sort(col["r_sum"]),
        mean_ul=mean_ul,
        mean_dl=mean_dl,
        mean_sum=mean_sum,
        se_ul=se_ul,
        se_dl=se_dl,
        se_sum=se_sum,
        mean_breakdown={(d, t): float(np.mean(col[f"{d}_{t}"])) for d, t in BREAKDOWN_TERMS},
        mode_fractions={m.value: float(np.count_nonzero(modes == _MODE_CODE[m]) / n) for m in MODES},
        saturated_fraction=float(np.mean(col["saturated"])),
        mean_interferers=float(np.mean(col["num_interferers"])),
        runtime_s=runtime_s,
    )


def run_variants(
    config: SimConfig, variants: Iterable[Variant], workers: int | None = None
) -> dict[Variant, Report]:
    """One Report per variant, all computed on the same sampled networks."""
    variants = list(dict.fromkeys(variants))
    for v in variants:
        if v.algorithm not in SCHEDULERS:
            raise ConfigError(f"unknown algorithm {v.algorithm!r}")
    start = time.perf_counter()
    tables = _simulate(config, variants, resolve_workers(workers))
    elapsed = time.perf_counter() - start
    return {v: build_report(with_variant(config, v), tables[v], elapsed) for v in variants}


def run(config: SimConfig, workers: int | None = None) -> Report:
    return run_variants(config, [variant_of(config)], workers)[variant_of(config)]


def apply_axis(config: SimConfig, axis: str, value, position: int | None = None) -> SimConfig:
    """Return ``config`` with the sweep ``axis`` set to ``value``."""
    where = f"{axis} value #{position} ({value!r})" if position is not None else f"{axis} value {value!r}"
    try:
        if axis == "density":
            return replace(config, lambda_bs=float(value))
        if axis == "sic":
            return replace(config, sic_capability=float(value))
        if axis == "antennas":
            n_tx, n_rx = parse_antennas(value)
            return replace(config, n_tx=n_tx, n_rx=n_rx)
    except (ConfigError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid {where}: {exc}") from exc
    raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {AXES}")


def parse_antennas(value) -> tuple[int, int]:
    """``2``, ``"2"``, ``"2x4"`` or ``(2, 4)`` -> ``(n_tx, n_rx)``."""
    if isinstance(value, (tuple, list)):
        n_tx, n_rx = (int(v) for v in value)
    elif isinstance(value, str) and "x" in value.lower():
        a, b = value.lower().split("x")
        n_tx, n_rx = int(a), int(b)
    else:
        n_tx = n_rx = int(value)
    return n_tx, n_rx


def sweep_variants(
    config: SimConfig,
    axis: str,
    values: Sequence,
    variants: Iterable[Variant],
    workers: int | None = None,
) -> list[tuple[object, dict[Variant, Report]]]:
    if not len(values):
        raise ConfigError("sweep needs at least one value")
    configs = [apply_axis(config, axis, v, i) for i, v in enumerate(values)]
    variants = list(variants)
    out = []
    for value, cfg in zip(values, configs):
        reports = run_variants(cfg, variants, workers)
        first = next(iter(reports.values()))
        log.info("%s=%s done: %d realizations, %.1f s", axis, value, first.n, first.runtime_s)
        out.append((value, reports))
    return out


def sweep(config: SimConfig, axis: str, values: Sequence, workers: int | None = None) -> list[tuple[object, Report]]:
    """One Report per axis value for the configured variant.

    Every point reuses the root seed, so each row equals a standalone
    :func:`run` of that point's config and neighbouring points see common
    random numbers.
    """
    v = variant_of(config)
    return [(value, reports[v]) for value, reports in sweep_variants(config, axis, values, [v], workers)]


def empirical_cdf(samples) -> np.ndarray:
    """Sorted ``(value, k/n)`` rows."""
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("empirical CDF of an empty sample")
    return np.column_stack((x, np.arange(1, x.size + 1) / x.size))


def cdf_at(sorted_samples: np.ndarray, x: float) -> float:
    return float(np.searchsorted(sorted_samples, x, side="right") / len(sorted_samples))
