"""Small-scale fading, large-scale gains and matched-filter beamformers.

The residual self-interference channel is not drawn: its projected power is
the constant 1/Omega applied in :mod:`fdnet.phy`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import LinkPathloss, SimConfig, los_probability
from .geom import Topology


@dataclass(frozen=True)
class ChannelSet:
    h_bs_ul: np.ndarray  # (U0, N_R)        h_{0,u}
    h_dl_bs: np.ndarray  # (D0, N_T)        h_{d,0}
    h_mt_mt: np.ndarray  # (D0, U0)         h_{d,u}
    H_bs_bs: np.ndarray  # (K, N_R, N_T)    H_{0,b}
    h_bs_ulmark: np.ndarray  # (K, N_R)     h_{0,u_b}
    h_dl_intbs: np.ndarray  # (D0, K, N_T)  h_{d,b}
    h_dl_ulmark: np.ndarray  # (D0, K)      h_{d,u_b}
    g_bs_ul: np.ndarray
    g_dl_bs: np.ndarray
    g_mt_mt: np.ndarray
    g_bs_bs: np.ndarray
    g_bs_ulmark: np.ndarray
    g_dl_intbs: np.ndarray
    g_dl_ulmark: np.ndarray


@dataclass(frozen=True)
class Beamformers:
    v0: np.ndarray  # (N_R,) MRC at the reference BS
    w0: np.ndarray  # (N_T,) MRT at the reference BS
    w_int: np.ndarray  # (K, N_T) interferers' precoders


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) entries."""
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def large_scale_gain(link: LinkPathloss, distance_m, rng: np.random.Generator) -> np.ndarray:
    """Linear pathloss-times-shadowing gain, clamped to at most 1 (0 dB).

    With a LOS branch, each link independently draws its LOS state first.
    """
    distance_m = np.asarray(distance_m, dtype=float)
    shadow = rng.standard_normal(distance_m.shape)
    pathloss = link.pathloss_db(distance_m)
    sigma = link.shadowing_sigma_db
    if link.los is not None:
        los = rng.random(distance_m.shape) < los_probability(link.los.probability_model, distance_m)
        pathloss = np.where(los, link.los_pathloss_db(distance_m), pathloss)
        sigma = np.where(los, link.los.shadowing_sigma_db, sigma)
    gain_db = np.minimum(-pathloss - sigma * shadow, 0.0)
    return 10.0 ** (gain_db / 10.0)


def _dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1))


def draw_channels(topology: Topology, config: SimConfig, rng: np.random.Generator) -> ChannelSet:
    ul, dl = topology.ul_candidates, topology.dl_candidates
    bs, marks = topology.interferer_bs, topology.interferer_ul_mt
    if len(ul) != config.num_ul_candidates or len(dl) != config.num_dl_candidates:
        raise ValueError(
            f"topology has {len(ul)} UL / {len(dl)} DL candidates, config expects "
            f"{config.num_ul_candidates} / {config.num_dl_candidates}"
        )
    if marks.shape != bs.shape:
        raise ValueError("one UL mark per interfering BS required")
    nt, nr = config.n_tx, config.n_rx
    u0, d0, k = len(ul), len(dl), len(bs)
    prof = config.pathloss_profile

    h_bs_ul = complex_normal(rng, (u0, nr))
    h_dl_bs = complex_normal(rng, (d0, nt))
    h_mt_mt = complex_normal(rng, (d0, u0))
    H_bs_bs = complex_normal(rng, (k, nr, nt))
    h_bs_ulmark = complex_normal(rng, (k, nr))
    h_dl_intbs = complex_normal(rng, (d0, k, nt))
    h_dl_ulmark = complex_normal(rng, (d0, k))

    return ChannelSet(
        h_bs_ul=h_bs_ul,
        h_dl_bs=h_dl_bs,
        h_mt_mt=h_mt_mt,
        H_bs_bs=H_bs_bs,
        h_bs_ulmark=h_bs_ulmark,
        h_dl_intbs=h_dl_intbs,
        h_dl_ulmark=h_dl_ulmark,
        g_bs_ul=large_scale_gain(prof.mt_bs, np.hypot(ul[:, 0], ul[:, 1]), rng),
        g_dl_bs=large_scale_gain(prof.bs_mt, np.hypot(dl[:, 0], dl[:, 1]), rng),
        g_mt_mt=large_scale_gain(prof.mt_mt, _dist(dl, ul), rng),
        g_bs_bs=large_scale_gain(prof.bs_bs, np.hypot(bs[:, 0], bs[:, 1]), rng),
        g_bs_ulmark=large_scale_gain(prof.mt_bs, np.hypot(marks[:, 0], marks[:, 1]), rng),
        g_dl_intbs=large_scale_gain(prof.bs_mt, _dist(dl, bs), rng),
        g_dl_ulmark=large_scale_gain(prof.mt_mt, _dist(dl, marks), rng),
    )


def matched_filter(h) -> np.ndarray:
    """Unit-norm matched filter h / ||h|| (MRC on receive, MRT on transmit)."""
    h = np.asarray(h, dtype=complex)
    norm = np.linalg.norm(h)
    if norm == 0.0:
        raise ValueError("matched filter of a zero vector is undefined")
    return h / norm


def random_unit_vector(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform draw(s) from the complex unit sphere in C^n."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    shape = (n,) if size is None else (size, n)
    z = complex_normal(rng, shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def make_beamformers(channels: ChannelSet, u0: int, d0: int, w_int: np.ndarray) -> Beamformers:
    return Beamformers(
        v0=matched_filter(channels.h_bs_ul[u0]),
        w0=matched_filter(channels.h_dl_bs[d0]),
        w_int=w_int,
    )
