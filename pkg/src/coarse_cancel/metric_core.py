"""Finite metric spaces built from weighted graphs, Gromov products and
exhaustive four-point hyperbolicity.

Distances come from all-pairs shortest paths.  When every edge length is a
rational number with a modest common denominator the distances are also kept
as exact integers (scaled by that denominator), which lets the four-point scan
return exact values such as ``0`` for trees even when lengths like ``1/3`` are
not representable in binary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from . import config
from .errors import InvalidInput

_MAX_DENOMINATOR = 10**6
_EXACT_LIMIT = 2**50


def _parse_length(raw) -> float:
    if isinstance(raw, str):
        try:
            return float(Fraction(raw))
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInput(f"edge length {raw!r} is not a number") from exc
    return float(raw)


@dataclass(frozen=True)
class GraphSpec:
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]

    @classmethod
    def from_json(cls, obj: dict) -> "GraphSpec":
        try:
            vertices = tuple(str(v) for v in obj["vertices"])
            edges = tuple((str(u), str(v), _parse_length(w)) for u, v, w in obj["edges"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed graph spec: {exc}") from exc
        return cls(vertices, edges)

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices), "edges": [[u, v, w] for u, v, w in self.edges]}

    def validate(self) -> None:
        if not self.vertices:
            raise InvalidInput("graph has no vertices")
        if len(set(self.vertices)) != len(self.vertices):
            raise InvalidInput("duplicate vertex ids")
        known = set(self.vertices)
        for u, v, w in self.edges:
            if u not in known or v not in known:
                raise InvalidInput(f"edge ({u}, {v}) references an unknown vertex")
            if u == v:
                raise InvalidInput(f"self-loop at {u}")
            if not (w > 0 and math.isfinite(w)):
                raise InvalidInput(f"edge ({u}, {v}) has non-positive length {w}")


class FiniteMetricSpace:
    """Ordered point ids with a read-only distance matrix.

    ``edges`` (index triples) is kept when the space came from a graph; it is
    needed for routes along geodesics and for induced length metrics.
    """

    def __init__(
        self,
        points: Sequence[str],
        dist: np.ndarray,
        edges: Sequence[tuple[int, int, float]] | None = None,
        scale: int | None = None,
        scaled: np.ndarray | None = None,
    ):
        self.points = tuple(points)
        self.index = {p: i for i, p in enumerate(self.points)}
        if len(self.index) != len(self.points):
            raise InvalidInput("duplicate point ids")
        d = np.array(dist, dtype=float)
        if d.shape != (len(self.points), len(self.points)):
            raise InvalidInput(f"distance matrix shape {d.shape} does not match {len(self.points)} points")
        d.setflags(write=False)
        self.dist = d
        self.edges = tuple(edges) if edges is not None else None
        self.scale = scale
        if scaled is not None:
            scaled = np.array(scaled, dtype=np.int64)
            scaled.setflags(write=False)
        self._scaled = scaled
        self._pred = None

    @classmethod
    def from_matrix(cls, points: Sequence[str], dist, check: bool = True) -> "FiniteMetricSpace":
        space = cls(points, dist)
        if check:
            problems = metric_axiom_defects(space.dist)
            bad = {k: v for k, v in problems.items() if v > config.tol()}
            if bad:
                raise InvalidInput(f"matrix is not a metric: {bad}")
        return space

    @property
    def n(self) -> int:
        return len(self.points)

    def idx(self, pid) -> int:
        try:
            return self.index[pid]
        except KeyError:
            raise InvalidInput(f"unknown point id {pid!r}") from None

    def indices(self, ids: Iterable) -> np.ndarray:
        return np.array([self.idx(p) for p in ids], dtype=np.int64)

    def d(self, x, y) -> float:
        return float(self.dist[self.idx(x), self.idx(y)])

    @property
    def exact_scaled(self) -> np.ndarray | None:
        """Integer distance matrix equal to ``dist * scale``, when exact."""
        return self._scaled

    def route(self, i: int, j: int) -> list[int]:
        """Vertex indices of one shortest route from ``i`` to ``j``."""
        if self.edges is None:
            return [i] if i == j else [i, j]
        if self._pred is None:
            _, pred = shortest_path(self._adjacency(), directed=False, return_predecessors=True)
            self._pred = pred
        out = [j]
        while out[-1] != i:
            k = int(self._pred[i, out[-1]])
            if k < 0:
                raise InvalidInput("no route between points")
            out.append(k)
        return out[::-1]

    def _adjacency(self, weights: dict | None = None) -> csr_matrix:
        rows, cols, vals = [], [], []
        best: dict[tuple[int, int], float] = {}
        for i, j, w in self.edges or ():
            key = (min(i, j), max(i, j))
            best[key] = min(w, best.get(key, math.inf))
        for (i, j), w in sorted(best.items()):
            rows += [i, j]
            cols += [j, i]
            vals += [w, w]
        return csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))

    def induced_metric(self, members: Sequence[int]) -> np.ndarray:
        """Length metric of the subgraph induced on ``members`` (inf across components)."""
        members = list(members)
        if self.edges is None:
            raise InvalidInput("space has no graph structure; induced length metric is unavailable")
        pos = {m: k for k, m in enumerate(members)}
        rows, cols, vals = [], [], []
        for i, j, w in self.edges:
            if i in pos and j in pos:
                rows += [pos[i], pos[j]]
                cols += [pos[j], pos[i]]
                vals += [w, w]
        m = len(members)
        if not vals:
            out = np.full((m, m), np.inf)
            np.fill_diagonal(out, 0.0)
            return out
        graph = csr_matrix((vals, (rows, cols)), shape=(m, m))
        return shortest_path(graph, directed=False, method="D")

    def relabel(self, order: Sequence[int]) -> "FiniteMetricSpace":
        order = list(order)
        scaled = None if self._scaled is None else self._scaled[np.ix_(order, order)]
        return FiniteMetricSpace([self.points[k] for k in order], self.dist[np.ix_(order, order)],
                                 scale=self.scale, scaled=scaled)


def metric_axiom_defects(d: np.ndarray) -> dict[str, float]:
    """Worst violation of each metric axiom (0 means satisfied)."""
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    out = {
        "diagonal": float(np.max(np.abs(np.diag(d)))) if n else 0.0,
        "symmetry": float(np.max(np.abs(d - d.T))) if n else 0.0,
        "negative": float(max(0.0, -np.min(d))) if n else 0.0,
        "triangle": 0.0,
    }
    for k in range(n):
        excess = d - (d[:, k, None] + d[None, k, :])
        out["triangle"] = max(out["triangle"], float(np.max(excess)))
    return out


def _common_denominator(lengths: Sequence[float]) -> int | None:
    q = 1
    for w in lengths:
        frac = Fraction(w).limit_denominator(_MAX_DENOMINATOR)
        if abs(float(frac) - w) > 1e-12 * max(1.0, abs(w)):
            return None
        q = q * frac.denominator // math.gcd(q, frac.denominator)
        if q > _MAX_DENOMINATOR:
            return None
    return q


def subdivide(spec: GraphSpec, k: int) -> GraphSpec:
    """Split every edge into ``k`` equal pieces; new vertices are named ``u~v#i``."""
    if k < 1:
        raise InvalidInput("subdivision factor must be >= 1")
    if k == 1:
        return spec
    vertices = list(spec.vertices)
    edges = []
    for u, v, w in spec.edges:
        chain = [u] + [f"{u}~{v}#{i}" for i in range(1, k)] + [v]
        vertices.extend(chain[1:-1])
        piece = float(Fraction(w).limit_denominator(_MAX_DENOMINATOR) / k) if _common_denominator([w]) else w / k
        edges.extend((a, b, piece) for a, b in zip(chain, chain[1:]))
    return GraphSpec(tuple(vertices), tuple(edges))


def build_space(spec: GraphSpec, subdivide_edges: int = 1) -> FiniteMetricSpace:
    spec.validate()
    if subdivide_edges != 1:
        spec = subdivide(spec, subdivide_edges)
    n = len(spec.vertices)
    index = {v: i for i, v in enumerate(spec.vertices)}
    edges = [(index[u], index[v], w) for u, v, w in spec.edges]
    space = FiniteMetricSpace(spec.vertices, np.zeros((n, n)), edges)
    adjacency = space._adjacency()
    count, labels = connected_components(adjacency, directed=False)
    if count > 1:
        comps = [[spec.vertices[i] for i in np.flatnonzero(labels == c)] for c in range(count)]
        raise InvalidInput(f"graph is disconnected; components: {comps}")
    q = _common_denominator([w for _, _, w in edges])
    if q is not None:
        exact_edges = [(i, j, int(round(Fraction(w).limit_denominator(_MAX_DENOMINATOR) * q))) for i, j, w in edges]
        scaled_graph = FiniteMetricSpace(spec.vertices, np.zeros((n, n)), exact_edges)._adjacency()
        scaled = shortest_path(scaled_graph, directed=False, method="D") if n > 1 else np.zeros((1, 1))
        if np.max(scaled) < _EXACT_LIMIT:
            scaled = np.rint(scaled).astype(np.int64)
            return FiniteMetricSpace(spec.vertices, scaled / q, edges, scale=q, scaled=scaled)
    dist = shortest_path(adjacency, directed=False, method="D") if n > 1 else np.zeros((1, 1))
    return FiniteMetricSpace(spec.vertices, dist, edges)


def gromov_product(space: FiniteMetricSpace, x, y, z) -> float:
    """(x|y)_z = (d(x,z) + d(y,z) - d(x,y)) / 2."""
    i, j, k = space.idx(x), space.idx(y), space.idx(z)
    d = space.dist
    return 0.5 * (d[i, k] + d[j, k] - d[i, j])


def gromov_matrix(dist: np.ndarray, base: int) -> np.ndarray:
    """All products (x|y)_base as a matrix."""
    row = dist[base]
    return 0.5 * (row[:, None] + row[None, :] - dist)


@dataclass(frozen=True)
class HyperbolicityReport:
    delta: float
    witness: tuple[str, str, str, str]

    def to_json(self) -> dict:
        return {"delta": self.delta, "witness": list(self.witness)}


def _scan_base(d: np.ndarray, x: int) -> tuple:
    """Largest four-point defect over quadruples x < y < z, t (twice the delta)."""
    n = d.shape[0]
    best = (0, None)
    dx = d[x]
    for y in range(x + 1, n - 2):
        rest = slice(y + 1, n)
        dy = d[y, rest]
        dxr = dx[rest]
        s1 = d[x, y] + d[rest, rest]
        s2 = dxr[:, None] + dy[None, :]
        s3 = dy[:, None] + dxr[None, :]
        top = np.maximum(np.maximum(s1, s2), s3)
        mid = np.maximum(np.minimum(s1, s2), np.minimum(np.maximum(s1, s2), s3))
        defect = top - mid
        flat = int(np.argmax(defect))
        value = defect.flat[flat]
        if value > best[0]:
            zi, ti = divmod(flat, defect.shape[1])
            best = (value, (x, y, y + 1 + zi, y + 1 + ti))
    return best


def _orient_witness(d: np.ndarray, quad: tuple[int, int, int, int]) -> tuple[int, int, int, int]:
    a, b, c, e = quad
    sums = [(d[a, b] + d[c, e], (a, c, b, e)), (d[a, c] + d[b, e], (a, b, c, e)), (d[a, e] + d[b, c], (a, b, e, c))]
    # witness (x, y, z, t) with d(x,z) + d(y,t) the largest of the three sums
    return max(sums, key=lambda s: s[0])[1]


def hyperbolicity_delta(space: FiniteMetricSpace, workers: int | None = None) -> HyperbolicityReport:
    """Smallest delta for which the symmetric four-point condition holds.

    d(x,z) + d(y,t) <= max(d(x,y) + d(z,t), d(x,t) + d(y,z)) + 2 delta
    over all quadruples, found by an exhaustive scan.  Work is split by the
    first index; the reduction keeps the lexicographically first maximiser so
    the witness does not depend on the worker count.
    """
    n = space.n
    exact = space.exact_scaled
    d = exact if exact is not None else space.dist
    if n < 4:
        pts = [space.points[min(k, n - 1)] for k in range(4)]
        return HyperbolicityReport(0.0, tuple(pts))
    results = config.parallel_map(lambda x: _scan_base(d, x), range(n - 3), workers)
    best_value, best_quad = 0, None
    for value, quad in results:
        if quad is not None and value > best_value:
            best_value, best_quad = value, quad
    if best_quad is None:
        best_quad = (0, 1, 2, 3)
    if exact is not None:
        delta = float(Fraction(int(best_value), 2 * space.scale))
    else:
        delta = float(best_value) / 2.0
    oriented = _orient_witness(space.dist, best_quad)
    return HyperbolicityReport(delta, tuple(space.points[k] for k in oriented))


def four_point_defect(space: FiniteMetricSpace, quad: Sequence) -> float:
    """Delta needed by a single quadruple (x, y, z, t)."""
    x, y, z, t = (space.idx(p) for p in quad)
    d = space.dist
    sums = sorted([d[x, y] + d[z, t], d[x, z] + d[y, t], d[x, t] + d[y, z]])
    return 0.5 * (sums[2] - sums[1])


@dataclass(frozen=True)
class FourPointCheck:
    delta: float
    eq1_ok: bool
    eq2_ok: bool
    eq1_worst: float
    eq2_worst: float

    @property
    def ok(self) -> bool:
        return self.eq1_ok and self.eq2_ok

    def to_json(self) -> dict:
        return {"delta": self.delta, "eq1_ok": self.eq1_ok, "eq2_ok": self.eq2_ok,
                "eq1_worst_excess": self.eq1_worst, "eq2_worst_excess": self.eq2_worst}


def _eq1_excess_at(d: np.ndarray, t: int) -> float:
    g = gromov_matrix(d, t)
    worst = -math.inf
    for y in range(d.shape[0]):
        lower = np.minimum(g[:, y, None], g[None, y, :])
        worst = max(worst, float(np.max(lower - g)))
    return worst


def verify_four_point_forms(space: FiniteMetricSpace, delta: float, workers: int | None = None,
                            tolerance: float | None = None) -> FourPointCheck:
    """Check both forms of the four-point condition with one delta.

    Base-point form: (x|z)_t >= min((x|y)_t, (y|z)_t) - delta for all x, y, z, t.
    Symmetric form: as in :func:`hyperbolicity_delta`.
    """
    eps = config.tol(tolerance)
    d = space.dist
    if space.n == 0:
        return FourPointCheck(delta, True, True, 0.0, 0.0)
    eq1 = max(config.parallel_map(lambda t: _eq1_excess_at(d, t), range(space.n), workers)) - delta
    eq2 = hyperbolicity_delta(space, workers).delta - delta
    return FourPointCheck(delta, eq1 <= eps, eq2 <= eps, max(eq1, 0.0), max(eq2, 0.0))


# five-point inequalities -------------------------------------------------------

INEQUALITY_NAMES = ("product_shift", "two_point_spread", "three_point_spread")


def _five_point_excess(d: np.ndarray, idx: np.ndarray, delta: float) -> np.ndarray:
    """Excess (lhs - rhs) of each five-point inequality; shape (3, m)."""
    x, y, z, s, t = idx.T

    def gp(a, b, c):
        return 0.5 * (d[a, c] + d[b, c] - d[a, b])

    # (x|y)_t <= max(d(x,t) - (y|z)_x, (x|z)_t) + delta
    e1 = gp(x, y, t) - (np.maximum(d[x, t] - gp(y, z, x), gp(x, z, t)) + delta)
    spread = np.abs(d[x, s] - d[x, t])
    # d(s,t) <= |d(x,s) - d(x,t)| + 2 max((x|y)_s, (x|y)_t) + 2 delta
    e2 = d[s, t] - (spread + 2 * np.maximum(gp(x, y, s), gp(x, y, t)) + 2 * delta)
    # d(s,t) <= max(|d(x,s) - d(x,t)| + 2 max((x|y)_s, (x|z)_t), d(x,s) + d(x,t) - 2 (y|z)_x) + 4 delta
    e3 = d[s, t] - (np.maximum(spread + 2 * np.maximum(gp(x, y, s), gp(x, z, t)),
                               d[x, s] + d[x, t] - 2 * gp(y, z, x)) + 4 * delta)
    return np.stack([e1, e2, e3])


@dataclass
class MetricInequalityReport:
    delta: float
    tuples_checked: int
    exhaustive: bool
    violation_counts: dict[str, int]
    worst_excess: dict[str, float]
    examples: list[dict] = field(default_factory=list)
    true_delta: float = 0.0
    base_condition_ok: bool = True
    base_failure: str | None = None

    @property
    def violations(self) -> int:
        return sum(self.violation_counts.values())

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "tuples_checked": self.tuples_checked,
            "exhaustive": self.exhaustive,
            "violation_counts": self.violation_counts,
            "worst_excess": self.worst_excess,
            "examples": self.examples,
            "true_delta": self.true_delta,
            "base_condition_ok": self.base_condition_ok,
            "base_failure": self.base_failure,
        }


_CHUNK = 1 << 18


def verify_metric_inequalities(space: FiniteMetricSpace, delta: float, sample_budget: int = 2_000_000,
                               seed: int = 0, tolerance: float | None = None, workers: int | None = None,
                               max_examples: int = 5) -> MetricInequalityReport:
    """Check the three five-point inequalities for all (or sampled) 5-tuples.

    Exhaustive when n**5 <= sample_budget, otherwise ``sample_budget`` tuples
    drawn from the ``five_point`` stream of ``seed``.
    """
    eps = config.tol(tolerance)
    n = space.n
    d = space.dist
    total = n**5
    exhaustive = total <= sample_budget
    if exhaustive:
        bounds = [(lo, min(lo + _CHUNK, total)) for lo in range(0, total, _CHUNK)]

        def chunk_indices(b):
            return np.stack(np.unravel_index(np.arange(b[0], b[1]), (n,) * 5), axis=1)
    else:
        rng = config.named_rng(seed, "five_point")
        sample = rng.integers(0, n, size=(sample_budget, 5))
        bounds = [(lo, min(lo + _CHUNK, sample_budget)) for lo in range(0, sample_budget, _CHUNK)]

        def chunk_indices(b):
            return sample[b[0]:b[1]]

    def run(b):
        idx = chunk_indices(b)
        excess = _five_point_excess(d, idx, delta)
        bad = excess > eps
        examples = []
        for k in range(3):
            for pos in np.flatnonzero(bad[k])[:max_examples]:
                examples.append((k, idx[pos], float(excess[k, pos])))
        return bad.sum(axis=1), excess.max(axis=1, initial=-math.inf), examples

    results = config.parallel_map(run, bounds, workers)
    counts = np.zeros(3, dtype=np.int64)
    worst = np.full(3, -math.inf)
    examples: list[dict] = []
    for c, w, ex in results:
        counts += c
        worst = np.maximum(worst, w)
        for k, tup, val in ex:
            if len(examples) < max_examples:
                examples.append({"inequality": INEQUALITY_NAMES[k],
                                 "points": [space.points[int(i)] for i in tup], "excess": val})
    true = hyperbolicity_delta(space, workers) if n else HyperbolicityReport(0.0, ("",) * 4)
    base_ok = delta >= true.delta - eps
    failure = None
    if not base_ok:
        failure = (f"four-point condition fails for delta={delta}: quadruple {list(true.witness)} "
                   f"needs {true.delta}")
    return MetricInequalityReport(
        delta=delta,
        tuples_checked=int(total if exhaustive else sample_budget),
        exhaustive=exhaustive,
        violation_counts={name: int(c) for name, c in zip(INEQUALITY_NAMES, counts)},
        worst_excess={name: float(max(w, 0.0)) for name, w in zip(INEQUALITY_NAMES, worst)},
        examples=examples,
        true_delta=true.delta,
        base_condition_ok=base_ok,
        base_failure=failure,
    )


def cycle_graph(n: int, length: float = 1.0, prefix: str = "") -> GraphSpec:
    names = [f"{prefix}{i}" for i in range(n)]
    return GraphSpec(tuple(names), tuple((names[i], names[(i + 1) % n], length) for i in range(n)))


def path_graph(n: int, length: float = 1.0, prefix: str = "") -> GraphSpec:
    names = [f"{prefix}{i}" for i in range(n)]
    return GraphSpec(tuple(names), tuple((names[i], names[i + 1], length) for i in range(n - 1)))


def grid_graph(rows: int, cols: int, length: float = 1.0) -> GraphSpec:
    names = [f"{r},{c}" for r in range(rows) for c in range(cols)]
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((f"{r},{c}", f"{r},{c + 1}", length))
            if r + 1 < rows:
                edges.append((f"{r},{c}", f"{r + 1},{c}", length))
    return GraphSpec(tuple(names), tuple(edges))


def random_tree(n: int, rng: np.random.Generator, denominators: Sequence[int] = (1, 2, 3, 4, 5, 6)) -> GraphSpec:
    """Random labelled tree with rational edge lengths p/q, 1 <= p <= 2q."""
    names = [f"v{i}" for i in range(n)]
    edges = []
    for i in range(1, n):
        parent = int(rng.integers(0, i))
        q = int(rng.choice(denominators))
        p = int(rng.integers(1, 2 * q + 1))
        edges.append((names[parent], names[i], p / q))
    return GraphSpec(tuple(names), tuple(edges))


def lcm(values: Iterable[int]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)
