"""Shared builders for hand-made scalar instances."""
import numpy as np

from fdnet.chan import Beamformers, ChannelSet
from fdnet.geom import Topology


def scalar_instance(rng, k, n_ul=3, n_dl=3, n_tx=1, n_rx=1):
    """Random topology/channels with ``k`` interferers, gains drawn on (0, 1]."""

    def cn(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    def g(*shape):
        return 10 ** rng.uniform(-14, -6, shape)

    topo = Topology(
        interferer_bs=rng.uniform(-500, 500, (k, 2)),
        interferer_ul_mt=rng.uniform(-500, 500, (k, 2)),
        ul_candidates=rng.uniform(-20, 20, (n_ul, 2)),
        dl_candidates=rng.uniform(-20, 20, (n_dl, 2)),
    )
    ch = ChannelSet(
        h_bs_ul=cn(n_ul, n_rx),
        h_dl_bs=cn(n_dl, n_tx),
        h_mt_mt=cn(n_dl, n_ul),
        H_bs_bs=cn(k, n_rx, n_tx),
        h_bs_ulmark=cn(k, n_rx),
        h_dl_intbs=cn(n_dl, k, n_tx),
        h_dl_ulmark=cn(n_dl, k),
        g_bs_ul=g(n_ul),
        g_dl_bs=g(n_dl),
        g_mt_mt=g(n_dl, n_ul),
        g_bs_bs=g(k),
        g_bs_ulmark=g(k),
        g_dl_intbs=g(n_dl, k),
        g_dl_ulmark=g(n_dl, k),
    )
    w = cn(k, n_tx)
    w_int = w / np.linalg.norm(w, axis=1, keepdims=True)
    return topo, ch, w_int


def beamformers_for(ch, u0, d0, w_int):
    h_u = ch.h_bs_ul[u0]
    h_d = ch.h_dl_bs[d0]
    return Beamformers(v0=h_u / np.linalg.norm(h_u), w0=h_d / np.linalg.norm(h_d), w_int=w_int)
