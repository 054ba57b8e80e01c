"""User scheduling (three low-complexity rules) and binary power allocation.

Selections use only intra-cell quantities evaluated at maximum powers. The
power allocation then picks the best corner of the power box and, when a
half-duplex corner wins, re-selects the active user by its own gain.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .chan import ChannelSet
from .config import SimConfig
from .geom import Topology
from .phy import SinrBreakdown, shannon_rate


class Mode(str, Enum):
    FD = "FD"
    HD_UL = "HD_UL"
    HD_DL = "HD_DL"


@dataclass(frozen=True)
class ScheduleDecision:
    u0: int
    d0: int
    p_ul: float
    p_dl: float
    mode: Mode = Mode.FD
    rescheduled: bool = False


@dataclass(frozen=True)
class CandidateMetrics:
    s_ul: np.ndarray  # (U0,) S_{0,u} with per-candidate MRC
    s_dl: np.ndarray  # (D0,) S_{d,0} with per-candidate MRT
    i_cross: np.ndarray  # (D0, U0) I_{d,u}
    noise_bs: float
    noise_mt: float


def candidate_metrics(
    topology: Topology, channels: ChannelSet, config: SimConfig, p_ul: float, p_dl: float
) -> CandidateMetrics:
    if not (p_ul > 0 and p_dl > 0):
        raise ValueError("selection metrics need positive powers")
    return CandidateMetrics(
        s_ul=p_ul * channels.g_bs_ul * np.sum(np.abs(channels.h_bs_ul) ** 2, axis=1),
        s_dl=p_dl * channels.g_dl_bs * np.sum(np.abs(channels.h_dl_bs) ** 2, axis=1),
        i_cross=p_ul * channels.g_mt_mt * np.abs(channels.h_mt_mt) ** 2,
        noise_bs=config.noise_bs_w,
        noise_mt=config.noise_mt_w,
    )


def _argmax(values: np.ndarray) -> int:
    # np.argmax returns the first maximum: lowest-index tie-break.
    if len(values) == 0:
        raise ValueError("empty candidate set")
    return int(np.argmax(values))


def schedule_alg1(m: CandidateMetrics) -> tuple[int, int]:
    """Strongest UL and strongest DL candidate, chosen independently."""
    return _argmax(m.s_ul), _argmax(m.s_dl)


def schedule_alg2(m: CandidateMetrics) -> tuple[int, int]:
    """Strongest UL first, then the DL candidate with the best intra-cell SINR."""
    u0 = _argmax(m.s_ul)
    d0 = _argmax(m.s_dl / (m.i_cross[:, u0] + m.noise_mt))
    return u0, d0


def schedule_alg3(m: CandidateMetrics) -> tuple[int, int]:
    """Strongest DL first, then the UL candidate with the best SLNR.

    The leakage ratio's noise term is the BS noise power, as in the rule's
    original statement.
    """
    d0 = _argmax(m.s_dl)
    u0 = _argmax(m.s_ul / (m.i_cross[d0, :] + m.noise_bs))
    return u0, d0


SCHEDULERS = {"ALG1": schedule_alg1, "ALG2": schedule_alg2, "ALG3": schedule_alg3}


@dataclass(frozen=True)
class SumRateObjective:
    """Sum rate of the scheduled pair as a function of ``(p_ul, p_dl)``.

    Gains are per watt of the corresponding transmit power; ``*_external``
    is inter-cell interference, zero when only local knowledge is assumed.
    Works elementwise on arrays.
    """

    ul_gain: float
    si_gain: float
    ul_external: float
    noise_bs: float
    dl_gain: float
    cross_gain: float
    dl_external: float
    noise_mt: float
    bandwidth: float = 1.0

    def __call__(self, p_ul, p_dl):
        sinr_ul = p_ul * self.ul_gain / (p_dl * self.si_gain + self.ul_external + self.noise_bs)
        sinr_dl = p_dl * self.dl_gain / (p_ul * self.cross_gain + self.dl_external + self.noise_mt)
        return shannon_rate(sinr_ul, self.bandwidth) + shannon_rate(sinr_dl, self.bandwidth)

    @classmethod
    def from_breakdown(
        cls,
        breakdown: SinrBreakdown,
        p_ul: float,
        p_dl: float,
        knowledge: str = "LOCAL",
        bandwidth: float = 1.0,
    ) -> "SumRateObjective":
        """Build from a breakdown evaluated at powers ``(p_ul, p_dl)``, both > 0."""
        ul, dl = breakdown.ul, breakdown.dl
        genie = knowledge == "GENIE"
        return cls(
            ul_gain=ul.S / p_ul,
            si_gain=ul.I_si / p_dl,
            ul_external=(ul.I_bs + ul.I_ulmt) if genie else 0.0,
            noise_bs=ul.noise,
            dl_gain=dl.S / p_dl,
            cross_gain=dl.I_intra_mt / p_ul,
            dl_external=(dl.I_bs + dl.I_ulmt) if genie else 0.0,
            noise_mt=dl.noise,
            bandwidth=bandwidth,
        )


def opa(decision: ScheduleDecision, objective, p_ul_max: float, p_dl_max: float) -> ScheduleDecision:
    """Pick the corner of [0, P_UL] x [0, P_DL] with the largest objective.

    Ties resolve in the order FD, HD_DL, HD_UL, off; since the FD corner is
    evaluated first and only a strict improvement displaces it, the all-off
    corner is never returned.
    """
    corners = (
        (Mode.FD, p_ul_max, p_dl_max),
        (Mode.HD_DL, 0.0, p_dl_max),
        (Mode.HD_UL, p_ul_max, 0.0),
    )
    best = None
    best_value = -np.inf
    for mode, pu, pd in corners:
        value = float(objective(pu, pd))
        if value > best_value:
            best, best_value = (mode, pu, pd), value
    # all-off corner has sum rate 0 <= any of the above
    mode, pu, pd = best
    return replace(decision, p_ul=pu, p_dl=pd, mode=mode)


def reschedule_after_opa(decision: ScheduleDecision, m: CandidateMetrics) -> ScheduleDecision:
    if decision.mode == Mode.HD_UL:
        return replace(decision, u0=_argmax(m.s_ul), rescheduled=True)
    if decision.mode == Mode.HD_DL:
        return replace(decision, d0=_argmax(m.s_dl), rescheduled=True)
    raise ValueError("rescheduling applies only to half-duplex decisions")


def opa_with_rescheduling(
    decision: ScheduleDecision, objective_for, m: CandidateMetrics, p_ul_max: float, p_dl_max: float
) -> ScheduleDecision:
    """Mode selection that scores each half-duplex corner at the user the
    rescheduling step would activate, then reschedules.

    ``objective_for(u, d)`` returns the sum-rate objective of pair ``(u, d)``.
    The FD corner uses the scheduled pair; HD_UL uses the strongest UL
    candidate and HD_DL the strongest DL candidate.
    """
    fd = objective_for(decision.u0, decision.d0)
    hd_ul = objective_for(_argmax(m.s_ul), decision.d0)
    hd_dl = objective_for(decision.u0, _argmax(m.s_dl))

    def objective(p_ul, p_dl):
        if p_ul > 0 and p_dl > 0:
            return fd(p_ul, p_dl)
        return hd_dl(p_ul, p_dl) if p_dl > 0 else hd_ul(p_ul, p_dl)

    out = opa(decision, objective, p_ul_max, p_dl_max)
    return out if out.mode == Mode.FD else reschedule_after_opa(out, m)
