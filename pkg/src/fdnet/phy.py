"""Received power terms, SINRs and Shannon rates for the reference cell."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .chan import Beamformers, ChannelSet
from .config import SimConfig
from .geom import Topology

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class UplinkTerms:
    S: float
    I_si: float
    I_bs: float
    I_ulmt: float
    noise: float

    @property
    def interference(self) -> float:
        return self.I_si + self.I_bs + self.I_ulmt


@dataclass(frozen=True)
class DownlinkTerms:
    S: float
    I_intra_mt: float
    I_bs: float
    I_ulmt: float
    noise: float

    @property
    def interference(self) -> float:
        return self.I_intra_mt + self.I_bs + self.I_ulmt


@dataclass(frozen=True)
class SinrBreakdown:
    """Linear powers (W) of every desired, interfering and noise term."""

    ul: UplinkTerms
    dl: DownlinkTerms

    def as_row(self) -> tuple[float, ...]:
        ul, dl = self.ul, self.dl
        return (ul.S, ul.I_si, ul.I_bs, ul.I_ulmt, ul.noise, dl.S, dl.I_intra_mt, dl.I_bs, dl.I_ulmt, dl.noise)


BREAKDOWN_TERMS: tuple[tuple[str, str], ...] = tuple(
    [("ul", f.name) for f in fields(UplinkTerms)] + [("dl", f.name) for f in fields(DownlinkTerms)]
)


@dataclass(frozen=True)
class RatePair:
    r_ul: float
    r_dl: float
    r_sum: float


def compute_breakdown(
    topology: Topology,
    channels: ChannelSet,
    beamformers: Beamformers,
    u0: int,
    d0: int,
    p_ul: float,
    p_dl: float,
    config: SimConfig,
    interferer_p_ul: float | None = None,
    interferer_p_dl: float | None = None,
) -> SinrBreakdown:
    """Evaluate every term for the scheduled pair ``(u0, d0)``.

    Interfering cells transmit at maximum power unless ``interferer_p_ul`` /
    ``interferer_p_dl`` override them (used for network-wide HD checks).
    """
    n_ul, n_dl = len(channels.h_bs_ul), len(channels.h_dl_bs)
    if not 0 <= u0 < n_ul:
        raise IndexError(f"UL index {u0} out of range [0, {n_ul})")
    if not 0 <= d0 < n_dl:
        raise IndexError(f"DL index {d0} out of range [0, {n_dl})")
    if len(channels.H_bs_bs) != topology.num_interferers:
        raise ValueError("channel set does not match topology")
    q_ul = config.p_ul_w if interferer_p_ul is None else interferer_p_ul
    q_dl = config.p_dl_w if interferer_p_dl is None else interferer_p_dl
    v0, w0, w_int = beamformers.v0, beamformers.w0, beamformers.w_int
    v0c = v0.conj()

    s_ul = p_ul * channels.g_bs_ul[u0] * abs(v0c @ channels.h_bs_ul[u0]) ** 2
    i_si = p_dl / config.sic_linear
    if topology.num_interferers:
        # v0^H H_{0,b} w_b for every interferer b
        leak_bs = np.einsum("r,krt,kt->k", v0c, channels.H_bs_bs, w_int)
        i_bs_ul = q_dl * float(channels.g_bs_bs @ np.abs(leak_bs) ** 2)
        i_mt_ul = q_ul * float(channels.g_bs_ulmark @ np.abs(channels.h_bs_ulmark @ v0c) ** 2)
        leak_dl = np.einsum("kt,kt->k", channels.h_dl_intbs[d0].conj(), w_int)
        i_bs_dl = q_dl * float(channels.g_dl_intbs[d0] @ np.abs(leak_dl) ** 2)
        i_mt_dl = q_ul * float(channels.g_dl_ulmark[d0] @ np.abs(channels.h_dl_ulmark[d0]) ** 2)
    else:
        i_bs_ul = i_mt_ul = i_bs_dl = i_mt_dl = 0.0
    s_dl = p_dl * channels.g_dl_bs[d0] * abs(channels.h_dl_bs[d0].conj() @ w0) ** 2
    i_intra = p_ul * channels.g_mt_mt[d0, u0] * abs(channels.h_mt_mt[d0, u0]) ** 2

    return SinrBreakdown(
        ul=UplinkTerms(float(s_ul), float(i_si), i_bs_ul, i_mt_ul, config.noise_bs_w),
        dl=DownlinkTerms(float(s_dl), float(i_intra), i_bs_dl, i_mt_dl, config.noise_mt_w),
    )


def sinr(breakdown: SinrBreakdown) -> tuple[float, float]:
    ul, dl = breakdown.ul, breakdown.dl
    if not (ul.noise > 0 and dl.noise > 0):
        raise ValueError("noise power must be positive")
    return (
        ul.S / (ul.I_si + ul.I_bs + ul.I_ulmt + ul.noise),
        dl.S / (dl.I_intra_mt + dl.I_bs + dl.I_ulmt + dl.noise),
    )


def shannon_rate(sinr_value, bandwidth: float):
    return bandwidth * np.log1p(sinr_value) / _LN2


def rates(sinr_ul: float, sinr_dl: float, bandwidth: float) -> RatePair:
    if sinr_ul < 0 or sinr_dl < 0:
        raise ValueError("SINR must be nonnegative")
    r_ul = float(shannon_rate(sinr_ul, bandwidth))
    r_dl = float(shannon_rate(sinr_dl, bandwidth))
    return RatePair(r_ul, r_dl, r_ul + r_dl)
