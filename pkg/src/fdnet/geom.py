"""Network layout sampling.

The reference BS sits at the origin. Interfering BSs follow a hard-core
process built by sequential inhibition inside a disc window; each carries one
mark, the UL MT it schedules. Reference-cell UL/DL candidates are uniform on
the cell disc.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .config import SimConfig

_CHUNK = 256


@dataclass(frozen=True)
class Topology:
    interferer_bs: np.ndarray  # (K, 2)
    interferer_ul_mt: np.ndarray  # (K, 2)
    ul_candidates: np.ndarray  # (U0, 2)
    dl_candidates: np.ndarray  # (D0, 2)
    saturated: bool = False
    target_count: int = 0

    @property
    def num_interferers(self) -> int:
        return len(self.interferer_bs)

    def rows(self):
        """Yield ``(kind, x_m, y_m)`` rows for a topology dump."""
        yield ("bs", 0.0, 0.0)
        for kind, pts in (
            ("bs", self.interferer_bs),
            ("ul_mark", self.interferer_ul_mt),
            ("ul_cand", self.ul_candidates),
            ("dl_cand", self.dl_candidates),
        ):
            for x, y in pts:
                yield (kind, float(x), float(y))


def uniform_disc(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    u = rng.random((n, 2))
    rho = radius * np.sqrt(u[:, 0])
    phi = 2.0 * np.pi * u[:, 1]
    return np.column_stack((rho * np.cos(phi), rho * np.sin(phi)))


def hardcore_points(
    rng: np.random.Generator,
    target: int,
    window_radius: float,
    min_distance: float,
    attempt_budget: int,
) -> tuple[np.ndarray, bool]:
    """Sequential simple inhibition in a disc, with the origin pre-occupied.

    Proposals are uniform on the window and accepted when at least
    ``min_distance`` away from the origin and from every accepted point.
    Placement stops early (``saturated=True``) once ``attempt_budget``
    consecutive proposals fail for the same point.
    """
    placed = np.empty((target, 2))
    if target == 0:
        return placed, False
    n = 0
    failures = 0
    d2 = min_distance * min_distance
    while True:
        cand = uniform_disc(rng, _CHUNK, window_radius)
        ok = np.einsum("ij,ij->i", cand, cand) >= d2
        if n:
            ok &= cdist(cand, placed[:n], "sqeuclidean").min(axis=1) >= d2
        # proposals that conflict with each other inside this chunk
        close = cdist(cand, cand, "sqeuclidean") < d2
        blocked = np.zeros(_CHUNK, dtype=bool)
        last = -1
        for i in np.flatnonzero(ok):
            step = int(i) - last
            if failures + step > attempt_budget:
                return placed[:n].copy(), True
            if blocked[i]:
                failures += step
            else:
                placed[n] = cand[i]
                n += 1
                failures = 0
                if n == target:
                    return placed, False
                blocked |= close[i]
            last = int(i)
        failures += _CHUNK - 1 - last
        if failures >= attempt_budget:
            return placed[:n].copy(), True


def sample_topology(config: SimConfig, rng: np.random.Generator) -> Topology:
    ul = uniform_disc(rng, config.num_ul_candidates, config.r0)
    dl = uniform_disc(rng, config.num_dl_candidates, config.r0)
    mean_count = config.lambda_bs * math.pi * config.window_radius**2
    target = int(rng.poisson(mean_count)) if mean_count > 0 else 0
    bs, saturated = hardcore_points(rng, target, config.window_radius, 2.0 * config.r0, config.attempt_budget)
    k = len(bs)
    r_mark = rng.uniform(0.0, config.mark_radius_sq_effective, size=k)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=k)
    marks = bs + np.sqrt(r_mark)[:, None] * np.column_stack((np.cos(phi), np.sin(phi)))
    return Topology(
        interferer_bs=bs,
        interferer_ul_mt=marks,
        ul_candidates=ul,
        dl_candidates=dl,
        saturated=saturated,
        target_count=target,
    )


def min_pairwise_distance(points) -> float:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise ValueError("need at least two points")
    dist, _ = cKDTree(pts).query(pts, k=2)
    return float(dist[:, 1].min())
