"""Simulation parameters, pathloss profiles and unit conversions.

All dB/dBm quantities live only on :class:`SimConfig`; everything downstream
reads the linear properties (W, ratios) exposed here.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from typing import Any, Mapping

import numpy as np

THERMAL_NOISE_DBM_PER_HZ = -174.0

LINK_CLASSES = ("bs_mt", "mt_bs", "bs_bs", "mt_mt")
ALGORITHMS = ("ALG1", "ALG2", "ALG3")
KNOWLEDGE_MODES = ("LOCAL", "GENIE")
DEFAULT_PROFILE_RESOURCE = "pathloss_tr36828.json"


class ConfigError(ValueError):
    """Raised for malformed or invalid configuration documents."""

    def __init__(self, problems: list[str] | str):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def db_to_linear(x):
    return 10.0 ** (x / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)


def dbm_to_watt(x):
    return 10.0 ** ((x - 30.0) / 10.0)


def watt_to_dbm(x: float) -> float:
    if x <= 0.0:
        return -math.inf
    return 10.0 * math.log10(x) + 30.0


def noise_power(bandwidth: float, noise_figure: float) -> float:
    """Thermal noise power in W for ``bandwidth`` Hz and ``noise_figure`` dB."""
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    return dbm_to_watt(THERMAL_NOISE_DBM_PER_HZ + 10.0 * math.log10(bandwidth) + noise_figure)


LOS_PROBABILITY_MODELS = ("small_cell",)


def los_probability(model: str, distance_m):
    """LOS probability vs distance for the named model.

    ``small_cell``: 0.5 - min(0.5, 5 exp(-0.156/R)) + min(0.5, 5 exp(-R/0.03)),
    R in km.
    """
    if model != "small_cell":
        raise ValueError(f"unknown LOS probability model {model!r}")
    r_km = np.maximum(np.asarray(distance_m, dtype=float), 1e-9) / 1000.0
    return 0.5 - np.minimum(0.5, 5.0 * np.exp(-0.156 / r_km)) + np.minimum(0.5, 5.0 * np.exp(-r_km / 0.03))


@dataclass(frozen=True)
class LosBranch:
    intercept_db: float
    slope_db_per_decade: float
    shadowing_sigma_db: float
    probability_model: str = "small_cell"


@dataclass(frozen=True)
class LinkPathloss:
    """Pathloss of one link class: PL(d) = intercept + slope * log10(d / 1 km).

    The base law applies to every link unless ``los`` is set, in which case a
    link is LOS with the branch's distance-dependent probability and the base
    law is the NLOS law.
    """

    intercept_db: float
    slope_db_per_decade: float
    shadowing_sigma_db: float
    min_distance_m: float
    los: LosBranch | None = None

    def pathloss_db(self, distance_m):
        d = np.maximum(np.asarray(distance_m, dtype=float), self.min_distance_m)
        return self.intercept_db + self.slope_db_per_decade * np.log10(d / 1000.0)

    def los_pathloss_db(self, distance_m):
        d = np.maximum(np.asarray(distance_m, dtype=float), self.min_distance_m)
        return self.los.intercept_db + self.los.slope_db_per_decade * np.log10(d / 1000.0)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        if self.los is None:
            del out["los"]
        return out

    def problems(self, name: str) -> list[str]:
        out = []
        slopes = [("slope_db_per_decade", self.slope_db_per_decade)]
        sigmas = [("shadowing_sigma_db", self.shadowing_sigma_db)]
        values = [self.intercept_db, self.slope_db_per_decade, self.shadowing_sigma_db, self.min_distance_m]
        if self.los is not None:
            slopes.append(("los.slope_db_per_decade", self.los.slope_db_per_decade))
            sigmas.append(("los.shadowing_sigma_db", self.los.shadowing_sigma_db))
            values += [self.los.intercept_db, self.los.slope_db_per_decade, self.los.shadowing_sigma_db]
            if self.los.probability_model not in LOS_PROBABILITY_MODELS:
                out.append(f"pathloss_profile.{name}.los.probability_model must be one of {LOS_PROBABILITY_MODELS}")
        for key, v in slopes:
            if not v > 0:
                out.append(f"pathloss_profile.{name}.{key} must be > 0")
        for key, v in sigmas:
            if not v >= 0:
                out.append(f"pathloss_profile.{name}.{key} must be >= 0")
        if not self.min_distance_m > 0:
            out.append(f"pathloss_profile.{name}.min_distance_m must be > 0")
        if not all(math.isfinite(v) for v in values):
            out.append(f"pathloss_profile.{name} values must be finite")
        return out


def _link_from_dict(name: str, entry: Any) -> LinkPathloss:
    if not isinstance(entry, Mapping):
        raise ConfigError(f"pathloss_profile.{name} must be an object")
    required = {"intercept_db", "slope_db_per_decade", "shadowing_sigma_db", "min_distance_m"}
    problems = [f"unknown key pathloss_profile.{name}.{k}" for k in sorted(set(entry) - required - {"los"})]
    problems += [f"missing key pathloss_profile.{name}.{k}" for k in sorted(required - set(entry))]
    if problems:
        raise ConfigError(problems)
    values = {k: _as_float(entry[k], f"pathloss_profile.{name}.{k}") for k in sorted(required)}
    los = entry.get("los")
    if los is not None:
        if not isinstance(los, Mapping):
            raise ConfigError(f"pathloss_profile.{name}.los must be an object")
        los_req = {"intercept_db", "slope_db_per_decade", "shadowing_sigma_db"}
        problems = [
            f"unknown key pathloss_profile.{name}.los.{k}" for k in sorted(set(los) - los_req - {"probability_model"})
        ]
        problems += [f"missing key pathloss_profile.{name}.los.{k}" for k in sorted(los_req - set(los))]
        if problems:
            raise ConfigError(problems)
        model = los.get("probability_model", "small_cell")
        if not isinstance(model, str):
            raise ConfigError(f"pathloss_profile.{name}.los.probability_model must be a string")
        los = LosBranch(
            probability_model=model,
            **{k: _as_float(los[k], f"pathloss_profile.{name}.los.{k}") for k in sorted(los_req)},
        )
    return LinkPathloss(los=los, **values)


@dataclass(frozen=True)
class PathlossProfile:
    bs_mt: LinkPathloss
    mt_bs: LinkPathloss
    bs_bs: LinkPathloss
    mt_mt: LinkPathloss
    version: str = "custom"

    def link(self, name: str) -> LinkPathloss:
        return getattr(self, name)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"version": self.version}
        for name in LINK_CLASSES:
            out[name] = self.link(name).to_dict()
        return out

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "PathlossProfile":
        if not isinstance(doc, Mapping):
            raise ConfigError("pathloss_profile must be an object")
        unknown = sorted(set(doc) - set(LINK_CLASSES) - {"version"})
        if unknown:
            raise ConfigError([f"unknown pathloss_profile key {k!r}" for k in unknown])
        base = default_profile() if set(LINK_CLASSES) - set(doc) else None
        links = {}
        problems = []
        for name in LINK_CLASSES:
            if name not in doc:
                links[name] = base.link(name)
                continue
            try:
                links[name] = _link_from_dict(name, doc[name])
            except ConfigError as exc:
                problems += exc.problems
        if problems:
            raise ConfigError(problems)
        version = doc.get("version", "custom")
        if not isinstance(version, str):
            raise ConfigError("pathloss_profile.version must be a string")
        return cls(version=version, **links)


_DEFAULT_PROFILE: PathlossProfile | None = None


def default_profile() -> PathlossProfile:
    global _DEFAULT_PROFILE
    if _DEFAULT_PROFILE is None:
        text = resources.files("fdnet.data").joinpath(DEFAULT_PROFILE_RESOURCE).read_text("utf-8")
        doc = json.loads(text)
        # The shipped file is complete, so from_dict never falls back to it.
        _DEFAULT_PROFILE = PathlossProfile.from_dict(doc)
    return _DEFAULT_PROFILE


@dataclass(frozen=True)
class SimConfig:
    """Every physical, layout and run parameter of one simulation.

    Defaults reproduce the baseline setting used for the rate CDFs: SISO,
    10 UL and 10 DL candidates in a 40 m cell, 23/24 dBm, 110 dB SIC, 20 MHz.
    """

    lambda_bs: float = 2.5e-5
    window_radius: float = 1000.0
    r0: float = 40.0
    num_ul_candidates: int = 10
    num_dl_candidates: int = 10
    n_tx: int = 1
    n_rx: int = 1
    p_ul_max: float = 23.0
    p_dl_max: float = 24.0
    sic_capability: float = 110.0
    bandwidth: float = 20e6
    noise_figure_bs: float = 5.0
    noise_figure_mt: float = 9.0
    algorithm: str = "ALG1"
    opa_enabled: bool = False
    opa_knowledge: str = "GENIE"
    opa_reschedule_aware: bool = True
    realizations: int = 10_000
    seed: int = 0
    mark_radius_sq: float | None = None
    attempt_budget: int = 10_000
    pathloss_profile: PathlossProfile = field(default_factory=default_profile)

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigError(problems)

    def problems(self) -> list[str]:
        out = []
        for name in ("window_radius", "r0", "bandwidth"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                out.append(f"{name} must be a positive finite number")
        if not (math.isfinite(self.lambda_bs) and self.lambda_bs >= 0):
            out.append("lambda_bs must be >= 0")
        for name in ("num_ul_candidates", "num_dl_candidates", "n_tx", "n_rx", "realizations", "attempt_budget"):
            if getattr(self, name) < 1:
                out.append(f"{name} must be >= 1")
        for name in ("p_ul_max", "p_dl_max", "noise_figure_bs", "noise_figure_mt"):
            if not math.isfinite(getattr(self, name)):
                out.append(f"{name} must be finite")
        if not (math.isfinite(self.sic_capability) and self.sic_capability >= 0):
            out.append("sic_capability must be >= 0 dB")
        if math.isfinite(self.window_radius) and math.isfinite(self.r0) and self.window_radius < 4 * self.r0:
            out.append("window_radius must be >= 4 * r0")
        if self.algorithm not in ALGORITHMS:
            out.append(f"algorithm must be one of {ALGORITHMS}")
        if self.opa_knowledge not in KNOWLEDGE_MODES:
            out.append(f"opa_knowledge must be one of {KNOWLEDGE_MODES}")
        if not 0 <= self.seed < 2**64:
            out.append("seed must be an unsigned 64-bit integer")
        if self.mark_radius_sq is not None and not (math.isfinite(self.mark_radius_sq) and self.mark_radius_sq > 0):
            out.append("mark_radius_sq must be > 0")
        for name in LINK_CLASSES:
            out += self.pathloss_profile.link(name).problems(name)
        return out

    # linear views

    @property
    def p_ul_w(self) -> float:
        return dbm_to_watt(self.p_ul_max)

    @property
    def p_dl_w(self) -> float:
        return dbm_to_watt(self.p_dl_max)

    @property
    def sic_linear(self) -> float:
        return db_to_linear(self.sic_capability)

    @property
    def noise_bs_w(self) -> float:
        return noise_power(self.bandwidth, self.noise_figure_bs)

    @property
    def noise_mt_w(self) -> float:
        return noise_power(self.bandwidth, self.noise_figure_mt)

    @property
    def mark_radius_sq_effective(self) -> float:
        return self.r0**2 if self.mark_radius_sq is None else self.mark_radius_sq

    def to_dict(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["pathloss_profile"] = self.pathloss_profile.to_dict()
        return out


_INT_FIELDS = {"num_ul_candidates", "num_dl_candidates", "n_tx", "n_rx", "realizations", "seed", "attempt_budget"}
_STR_FIELDS = {"algorithm", "opa_knowledge"}
_BOOL_FIELDS = {"opa_enabled", "opa_reschedule_aware"}


def _as_float(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number")
    return float(value)


def _as_int(value: Any, name: str) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be an integer")
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer")
    return value


def normalize_algorithm(value: Any) -> str:
    if isinstance(value, int) and not isinstance(value, bool):
        value = f"ALG{value}"
    if isinstance(value, str) and value.upper() in ALGORITHMS:
        return value.upper()
    if isinstance(value, str) and value in ("1", "2", "3"):
        return f"ALG{value}"
    raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {value!r}")


def config_from_dict(doc: Mapping[str, Any]) -> SimConfig:
    if not isinstance(doc, Mapping):
        raise ConfigError("config document must be a JSON object")
    known = {f.name for f in fields(SimConfig)}
    problems = [f"unknown config key {k!r}" for k in sorted(set(doc) - known)]
    kwargs: dict[str, Any] = {}
    for key, value in doc.items():
        if key not in known:
            continue
        try:
            if key == "pathloss_profile":
                kwargs[key] = PathlossProfile.from_dict(value)
            elif key == "algorithm":
                kwargs[key] = normalize_algorithm(value)
            elif key == "opa_knowledge":
                if not isinstance(value, str):
                    raise ConfigError("opa_knowledge must be a string")
                kwargs[key] = value.upper()
            elif key in _BOOL_FIELDS:
                if not isinstance(value, bool):
                    raise ConfigError(f"{key} must be a boolean")
                kwargs[key] = value
            elif key in _INT_FIELDS:
                kwargs[key] = _as_int(value, key)
            elif key == "mark_radius_sq" and value is None:
                kwargs[key] = None
            else:
                kwargs[key] = _as_float(value, key)
        except ConfigError as exc:
            problems += exc.problems
    if problems:
        raise ConfigError(problems)
    return SimConfig(**kwargs)


def load_config(text: str) -> SimConfig:
    """Parse a JSON config document; empty text yields the baseline defaults."""
    if not text.strip():
        return SimConfig()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config document: {exc}") from exc
    return config_from_dict(doc)


def dump_config(config: SimConfig) -> str:
    return json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"
