"""Capacity-aware routing and the swarm objective.

Links are weighted by inverse capacity and routed with Dijkstra on the
directed capacity graph. The end-to-end capacity of a route is the
capacity of its weakest link. Note that the minimum-weight route is not
always the widest (max-bottleneck) route; this module deliberately
implements the inverse-capacity rule.

Among routes of exactly equal weight, the lexicographically smallest
node sequence wins.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import lanewise
from .errors import ConfigurationError


@dataclass(frozen=True)
class ObjectiveWeights:
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ConfigurationError("objective weights must be >= 0")
        if self.alpha == 0 and self.beta == 0:
            raise ConfigurationError("objective weights alpha and beta cannot both be 0")


@dataclass(frozen=True)
class RoutingResult:
    """All-pairs routes. ``paths[i][j]`` is empty when j is unreachable or i == j."""

    e2e_capacity: np.ndarray
    paths: list[list[list[int]]]
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.e2e_capacity.shape[0]

    def pair_capacities(self) -> np.ndarray:
        mask = ~np.eye(self.n, dtype=bool)
        return self.e2e_capacity[mask]

    @property
    def avg_capacity(self) -> float:
        return float(self.pair_capacities().mean())

    @property
    def min_capacity(self) -> float:
        return float(self.pair_capacities().min())


def link_weight(capacity: float) -> float:
    return 1.0 / capacity if capacity > 0 else math.inf


def _dijkstra_batch(cap: np.ndarray):
    """Vectorized all-pairs Dijkstra over a batch of capacity matrices.

    cap: (B, N, N). Returns (dist, paths, lens) with shapes (B, N, N),
    (B, N, N, N) and (B, N, N); ``paths[b, s, t, :lens[b, s, t]]`` is the
    route s -> t (padded with -1).
    """
    bsz, n, _ = cap.shape
    with np.errstate(divide="ignore", over="ignore"):
        w = np.where(cap > 0, 1.0 / np.where(cap > 0, cap, 1.0), np.inf)
    w[:, np.arange(n), np.arange(n)] = np.inf

    nodes = np.arange(n)
    src = nodes
    dist = np.full((bsz, n, n), np.inf)
    dist[:, src, src] = 0.0
    paths = np.full((bsz, n, n, n), -1, dtype=np.int64)
    paths[:, src, src, 0] = src
    lens = np.zeros((bsz, n, n), dtype=np.int64)
    lens[:, src, src] = 1
    visited = np.zeros((bsz, n, n), dtype=bool)
    bidx = np.arange(bsz)[:, None]
    slot = nodes[None, None, None, :]
    vcol = nodes[None, None, :, None]

    for _ in range(n):
        masked = np.where(visited, np.inf, dist)
        u = masked.argmin(axis=-1)  # (B, S)
        du = np.take_along_axis(masked, u[..., None], -1)[..., 0]
        active = np.isfinite(du)
        if not active.any():
            break
        visited |= (nodes == u[..., None]) & active[..., None]

        pu = np.take_along_axis(paths, u[..., None, None], axis=2)[..., 0, :]  # (B, S, N)
        lu = np.take_along_axis(lens, u[..., None], -1)[..., 0]  # (B, S)
        nd = du[..., None] + w[bidx, u]  # (B, S, N)

        cand = np.where(slot == lu[..., None, None], vcol, pu[..., None, :])
        diff = cand != paths
        first = diff.argmax(axis=-1)[..., None]
        less = diff.any(axis=-1) & (
            np.take_along_axis(cand, first, -1)[..., 0] < np.take_along_axis(paths, first, -1)[..., 0]
        )
        upd = (
            ~visited
            & active[..., None]
            & np.isfinite(nd)
            & ((nd < dist) | ((nd == dist) & less))
        )
        dist = np.where(upd, nd, dist)
        paths = np.where(upd[..., None], cand, paths)
        lens = np.where(upd, lu[..., None] + 1, lens)

    return dist, paths, lens


# Up to this swarm size e2e_batch scores every simple path instead of
# running Dijkstra; both give the same route (same float sums, same ties).
ENUMERATION_MAX_N = 5


@lru_cache(maxsize=None)
def _path_table(n: int):
    """Link indices (into a flattened n*n matrix, n*n = padding) of every
    simple path, grouped by ordered pair and sorted lexicographically."""
    pad = n * n
    rows = []
    for s in range(n):
        for t in range(n):
            if s == t:
                continue
            others = [v for v in range(n) if v not in (s, t)]
            routes = []
            for k in range(len(others) + 1):
                for mid in itertools.permutations(others, k):
                    routes.append((s, *mid, t))
            for route in sorted(routes):
                links = [a * n + b for a, b in zip(route, route[1:])]
                rows.append(links + [pad] * (n - 1 - len(links)))
    per_pair = len(rows) // (n * (n - 1))
    return np.array(rows, dtype=np.int64), per_pair


def _e2e_enumerated(cap: np.ndarray) -> np.ndarray:
    bsz, n, _ = cap.shape
    table, per_pair = _path_table(n)
    flat = cap.reshape(bsz, n * n)
    with np.errstate(divide="ignore", over="ignore"):
        w = np.where(flat > 0, 1.0 / np.where(flat > 0, flat, 1.0), np.inf)
    w = np.concatenate([w, np.zeros((bsz, 1))], axis=1)
    c = np.concatenate([flat, np.full((bsz, 1), np.inf)], axis=1)

    wl = w[:, table]  # (B, P, H)
    total = wl[..., 0]
    for h in range(1, wl.shape[-1]):
        total = total + wl[..., h]  # left to right, as Dijkstra accumulates
    bott = c[:, table].min(axis=-1)

    total = total.reshape(bsz, n * (n - 1), per_pair)
    bott = bott.reshape(bsz, n * (n - 1), per_pair)
    best = total.argmin(axis=-1)[..., None]
    reach = np.isfinite(np.take_along_axis(total, best, -1)[..., 0])
    pair_e2e = np.where(reach, np.take_along_axis(bott, best, -1)[..., 0], 0.0)

    out = np.zeros((bsz, n, n))
    out[:, ~np.eye(n, dtype=bool)] = pair_e2e
    return out


def e2e_batch(cap) -> np.ndarray:
    """End-to-end (bottleneck) capacities of the routed paths, shape (B, N, N).

    Unreachable pairs and the diagonal are 0.
    """
    cap = np.asarray(cap, dtype=float)
    if cap.shape[-1] <= ENUMERATION_MAX_N:
        return _e2e_enumerated(cap)
    _, paths, lens = _dijkstra_batch(cap)
    return _bottleneck(cap, paths, lens)


def _bottleneck(cap, paths, lens):
    bsz, n, _ = cap.shape
    if n < 2:
        return np.zeros_like(cap)
    a = np.maximum(paths[..., :-1], 0)
    b = np.maximum(paths[..., 1:], 0)
    hop = np.arange(n - 1)
    valid = hop < (lens[..., None] - 1)
    link = cap[np.arange(bsz)[:, None, None, None], a, b]
    e2e = np.where(valid, link, np.inf).min(axis=-1)
    e2e = np.where(lens >= 2, e2e, 0.0)
    return e2e


def shortest_paths(matrix) -> RoutingResult:
    """Route every ordered pair of a single capacity matrix."""
    cap = np.asarray(matrix, dtype=float)
    if cap.ndim != 2 or cap.shape[0] != cap.shape[1] or cap.shape[0] < 2:
        raise ValueError("capacity matrix must be square with n >= 2")
    dist, paths, lens = _dijkstra_batch(cap[None])
    e2e = _bottleneck(cap[None], paths, lens)[0]
    n = cap.shape[0]
    plist = [
        [paths[0, s, t, : lens[0, s, t]].tolist() if s != t else [] for t in range(n)]
        for s in range(n)
    ]
    return RoutingResult(e2e_capacity=e2e, paths=plist, weights=dist[0])


def objective_from_e2e(e2e, weights: ObjectiveWeights) -> np.ndarray:
    """Objective for a batch of E2E matrices (..., N, N) over ordered pairs i != j."""
    e2e = np.asarray(e2e, dtype=float)
    n = e2e.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    vals = e2e[..., mask]
    total = vals[..., 0].copy()
    for k in range(1, vals.shape[-1]):
        total += vals[..., k]  # fixed order; numpy's sum reduction varies with layout
    avg = total / vals.shape[-1]
    low = vals.min(axis=-1)
    return lanewise(np.power, avg, weights.alpha) * lanewise(np.power, low, weights.beta)


def objective(routing: RoutingResult, weights: ObjectiveWeights) -> float:
    return float(objective_from_e2e(routing.e2e_capacity, weights))
