"""Quasi-geodesic quality of discrete paths and quasi-convexity of vertex subsets.

Subsets are handled as tuples of point ids listed in the ambient space's
order; every function accepts any iterable of ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import config
from .errors import InvalidInput
from .metric_core import FiniteMetricSpace

SubsetHandle = tuple


def as_subset(space: FiniteMetricSpace, ids: Iterable) -> SubsetHandle:
    idx = sorted(set(int(i) for i in space.indices(ids)))
    return tuple(space.points[i] for i in idx)


def _idx(space: FiniteMetricSpace, ids: Iterable) -> np.ndarray:
    return np.array(sorted(set(int(i) for i in space.indices(ids))), dtype=np.int64)


@dataclass(frozen=True)
class DiscretePath:
    points: tuple[str, ...]
    params: tuple[float, ...]

    def __post_init__(self):
        if len(self.points) == 0 or len(self.points) != len(self.params):
            raise InvalidInput("a path needs as many parameters as points, and at least one point")
        if any(b < a for a, b in zip(self.params, self.params[1:])):
            raise InvalidInput("path parameters must be non-decreasing")

    @classmethod
    def through(cls, space: FiniteMetricSpace, ids: Sequence[str], start: float = 0.0) -> "DiscretePath":
        """Arclength-parametrised path visiting ``ids`` in order along shortest routes."""
        params = [start]
        for a, b in zip(ids, ids[1:]):
            params.append(params[-1] + space.d(a, b))
        return cls(tuple(ids), tuple(params))

    def to_json(self) -> dict:
        return {"points": list(self.points), "params": list(self.params)}


@dataclass(frozen=True)
class QuasiParams:
    k: float
    l: float
    k_at_zero_l: float = 1.0
    local_scale: float | None = None

    def to_json(self) -> dict:
        return {"k": self.k, "l": self.l, "k_at_zero_l": self.k_at_zero_l, "local_scale": self.local_scale}


def _pair_arrays(space: FiniteMetricSpace, path: DiscretePath):
    idx = space.indices(path.points)
    t = np.asarray(path.params, dtype=float)
    return space.dist[np.ix_(idx, idx)], np.abs(t[:, None] - t[None, :])


def path_quality(space: FiniteMetricSpace, path: DiscretePath) -> QuasiParams:
    """Smallest additive constant l making the path a (1, l)-quasi-geodesic.

    Also reports the smallest k making it a (k, 0)-quasi-geodesic (possibly
    infinite when two parameters map to the same point).
    """
    if len(path.points) == 1:
        return QuasiParams(1.0, 0.0, 1.0)
    d, dt = _pair_arrays(space, path)
    l = max(0.0, float(np.max(dt - d)), float(np.max(d - dt)))
    off = ~np.eye(len(path.points), dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(d[off] > 0, dt[off] / d[off], np.where(dt[off] > 0, np.inf, 1.0))
        down = np.where(dt[off] > 0, d[off] / dt[off], np.where(d[off] > 0, np.inf, 1.0))
    k = max(1.0, float(np.max(up)), float(np.max(down)))
    return QuasiParams(1.0, l, k)


def _quasi_ok(d, dt, k, l, eps):
    return bool(np.all(d <= k * dt + l + eps) and np.all(dt <= k * d + l + eps))


def is_quasi_geodesic(space: FiniteMetricSpace, path: DiscretePath, k: float, l: float,
                      tolerance: float | None = None) -> bool:
    d, dt = _pair_arrays(space, path)
    return _quasi_ok(d, dt, k, l, config.tol(tolerance))


def is_local_quasi_geodesic(space: FiniteMetricSpace, path: DiscretePath, L: float, k: float, l: float,
                            tolerance: float | None = None) -> bool:
    """The (k, l) inequality restricted to parameter pairs at most ``L`` apart."""
    if not L > 0:
        raise InvalidInput("local scale L must be positive")
    eps = config.tol(tolerance)
    d, dt = _pair_arrays(space, path)
    window = dt <= L + eps
    return _quasi_ok(d[window], dt[window], k, l, eps)


def distance_to_set(space: FiniteMetricSpace, ids: Iterable) -> np.ndarray:
    idx = _idx(space, ids)
    if idx.size == 0:
        return np.full(space.n, np.inf)
    return space.dist[:, idx].min(axis=1)


def quasi_convexity_constant(space: FiniteMetricSpace, Y: Iterable, workers: int | None = None) -> float:
    """Smallest alpha with d(x, Y) <= (y|y')_x + alpha for all x and y, y' in Y."""
    idx = _idx(space, Y)
    if idx.size == 0:
        raise InvalidInput("quasi-convexity needs a non-empty subset")
    d = space.dist
    to_y = d[:, idx].min(axis=1)
    dyy = d[np.ix_(idx, idx)]

    def worst_at(x):
        row = d[x, idx]
        smallest = float(np.min(0.5 * (row[:, None] + row[None, :] - dyy)))
        return float(to_y[x]) - smallest

    return max(0.0, max(config.parallel_map(worst_at, range(space.n), workers)))


class StrongQC(NamedTuple):
    ok: bool
    gap: float
    alpha: float
    connected: bool


def strong_quasi_convexity_check(space: FiniteMetricSpace, Y: Iterable, delta: float,
                                 tolerance: float | None = None) -> StrongQC:
    """Compare the induced length metric on Y with the ambient one.

    Strongly quasi-convex means alpha(Y) <= 2 delta and d_Y <= d_X + 8 delta.
    A disconnected induced subgraph gives an infinite gap and a negative answer.
    """
    eps = config.tol(tolerance)
    idx = _idx(space, Y)
    inner = space.induced_metric(idx)
    gap = float(np.max(inner - space.dist[np.ix_(idx, idx)]))
    connected = math.isfinite(gap)
    alpha = quasi_convexity_constant(space, [space.points[i] for i in idx])
    ok = connected and gap <= 8 * delta + eps and alpha <= 2 * delta + eps
    return StrongQC(ok, gap, alpha, connected)


def ball(space: FiniteMetricSpace, center, radius: float, tolerance: float | None = None) -> SubsetHandle:
    row = space.dist[space.idx(center)]
    return tuple(space.points[i] for i in np.flatnonzero(row <= radius + config.tol(tolerance)))


def neighborhood(space: FiniteMetricSpace, Y: Iterable, A: float, tolerance: float | None = None) -> SubsetHandle:
    """Closed A-neighborhood {x : d(x, Y) <= A}."""
    if A < 0:
        raise InvalidInput("neighborhood radius must be non-negative")
    reach = distance_to_set(space, Y)
    return tuple(space.points[i] for i in np.flatnonzero(reach <= A + config.tol(tolerance)))


def hull(space: FiniteMetricSpace, Y: Iterable, delta: float, tolerance: float | None = None) -> SubsetHandle:
    """Points z with d(y, z) + d(z, y') <= d(y, y') + delta for some y, y' in Y."""
    if delta < 0:
        raise InvalidInput("hull defect must be non-negative")
    eps = config.tol(tolerance)
    idx = _idx(space, Y)
    d = space.dist
    member = np.zeros(space.n, dtype=bool)
    for a in idx:
        excess = d[a][None, :] + d[idx] - d[a, idx][:, None]
        member |= np.any(excess <= delta + eps, axis=0)
    return tuple(space.points[i] for i in np.flatnonzero(member))


class Diameter(NamedTuple):
    value: float
    empty: bool


def diameter(space: FiniteMetricSpace, ids: Iterable) -> Diameter:
    idx = _idx(space, ids)
    if idx.size == 0:
        return Diameter(0.0, True)
    return Diameter(float(np.max(space.dist[np.ix_(idx, idx)])), False)


def intersection_diameter(space: FiniteMetricSpace, subsets: Sequence[Iterable], A: float,
                          tolerance: float | None = None) -> Diameter:
    """Diameter of the intersection of the closed A-neighborhoods; 0 and ``empty`` if none."""
    if A < 0:
        raise InvalidInput("neighborhood radius must be non-negative")
    eps = config.tol(tolerance)
    inside = np.ones(space.n, dtype=bool)
    for Y in subsets:
        inside &= distance_to_set(space, Y) <= A + eps
    return diameter(space, [space.points[i] for i in np.flatnonzero(inside)])


def intersection_diameter_varied(space: FiniteMetricSpace, subsets: Sequence[Iterable], radii: Sequence[float],
                                 tolerance: float | None = None) -> Diameter:
    """As :func:`intersection_diameter` but with one radius per subset."""
    eps = config.tol(tolerance)
    inside = np.ones(space.n, dtype=bool)
    for Y, r in zip(subsets, radii):
        inside &= distance_to_set(space, Y) <= r + eps
    return diameter(space, [space.points[i] for i in np.flatnonzero(inside)])
