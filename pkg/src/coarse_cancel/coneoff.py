"""Hyperbolic cones over metric spaces and cone-offs metrized by chains.

Cones are modelled on the hyperbolic plane: the point (y, r) sits at radius
r and angle d_Y(y0, y) / sinh(rho), with angles capped at pi.  A cone-off
glues one cone per family member onto the base along the member; on a finite
sample the chain metric is an exact all-pairs shortest path computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.sparse.csgraph import floyd_warshall

from . import config
from .errors import InvalidInput
from .geodesy import as_subset, intersection_diameter, strong_quasi_convexity_check
from .logspace import log_sinh
from .metric_core import FiniteMetricSpace, hyperbolicity_delta

APEX = "apex"
RADIAL = "radial"
LARGE_RHO = 700.0


def _check_rho(rho: float) -> None:
    if not rho > 0:
        raise InvalidInput(f"cone radius must be positive, got {rho}")


def _asinh_from_log(log_y: float) -> float:
    if log_y > 20:
        return log_y + math.log(2.0)
    return math.asinh(math.exp(log_y))


def mu(t: float, rho: float) -> float:
    """Comparison map: cosh mu = cosh^2 rho - sinh^2 rho cos(min(pi, t / sinh rho))."""
    _check_rho(rho)
    if t < 0:
        raise InvalidInput("mu is defined for t >= 0")
    if t == 0:
        return 0.0
    if rho < LARGE_RHO:
        s = math.sinh(rho)
        return 2.0 * math.asinh(s * math.sin(min(math.pi, t / s) / 2.0))
    log_s = log_sinh(rho)
    log_angle = math.log(t) - log_s
    if log_angle < -20:
        log_half_sin = log_angle - math.log(2.0)
    else:
        log_half_sin = math.log(math.sin(min(math.pi, math.exp(log_angle)) / 2.0))
    return 2.0 * _asinh_from_log(log_s + log_half_sin)


def mu_array(t: np.ndarray, rho: float) -> np.ndarray:
    _check_rho(rho)
    t = np.asarray(t, dtype=float)
    if rho >= LARGE_RHO:
        return np.vectorize(lambda v: mu(float(v), rho))(t)
    s = math.sinh(rho)
    return 2.0 * np.arcsinh(s * np.sin(np.minimum(math.pi, t / s) / 2.0))


def hyperbolic_distance(r1, r2, angle):
    """Distance in the hyperbolic plane between polar points; angle is clamped to [0, pi].

    Uses sinh^2(d/2) = sinh^2((r1 - r2)/2) + sinh r1 sinh r2 sin^2(angle/2),
    which stays accurate for nearby points.
    """
    r1, r2, angle = np.asarray(r1, float), np.asarray(r2, float), np.asarray(angle, float)
    half = np.sin(np.minimum(np.abs(angle), math.pi) / 2.0)
    q = np.sinh((r1 - r2) / 2.0) ** 2 + np.sinh(r1) * np.sinh(r2) * half ** 2
    return 2.0 * np.arcsinh(np.sqrt(q))


class ConePoint(NamedTuple):
    kind: str
    base: str | None
    r: float

    @classmethod
    def apex(cls) -> "ConePoint":
        return cls(APEX, None, 0.0)

    def label(self) -> str:
        return "v" if self.kind == APEX else f"{self.base}@{self.r:.12g}"


def cone_distance(p1: ConePoint, p2: ConePoint, rho: float, d_Y: float) -> float:
    """Cone metric between two points whose bases are d_Y apart."""
    _check_rho(rho)
    if p1.kind == APEX:
        return 0.0 if p2.kind == APEX else float(p2.r)
    if p2.kind == APEX:
        return float(p1.r)
    return float(hyperbolic_distance(p1.r, p2.r, min(math.pi, d_Y / math.sinh(rho))))


def default_radii(rho: float, radial_samples: int = 4) -> tuple[float, ...]:
    if radial_samples < 1:
        raise InvalidInput("need at least one radial sample (the base level)")
    return tuple(rho * k / radial_samples for k in range(1, radial_samples + 1))


def _cone_matrix(bases, radii, d_Y, rho):
    """Formula distances among cone samples; bases index into d_Y, -1 for the apex."""
    bases = np.asarray(bases)
    radii = np.asarray(radii, float)
    is_apex = bases < 0
    safe = np.where(is_apex, 0, bases)
    angle = np.minimum(math.pi, d_Y[np.ix_(safe, safe)] / math.sinh(rho))
    d = hyperbolic_distance(radii[:, None], radii[None, :], angle)
    d = np.where(is_apex[:, None], radii[None, :], d)
    d = np.where(is_apex[None, :], radii[:, None], d)
    d[np.ix_(is_apex, is_apex)] = 0.0
    np.fill_diagonal(d, 0.0)
    return d


@dataclass
class ConeSpace:
    """Finite sample of the cone of radius rho over (Y, d_Y)."""

    Y: tuple[str, ...]
    d_Y: np.ndarray
    rho: float
    points: list[ConePoint]
    dist: np.ndarray

    @property
    def labels(self) -> list[str]:
        return [p.label() for p in self.points]

    def base_index(self) -> dict[str, int]:
        return {y: i for i, y in enumerate(self.Y)}

    def as_metric_space(self) -> FiniteMetricSpace:
        return FiniteMetricSpace.from_matrix(self.labels, self.dist, check=False)

    def sample_delta(self) -> float:
        return hyperbolicity_delta(self.as_metric_space()).delta


def build_cone(space: FiniteMetricSpace, Y: Iterable, rho: float, radial_samples: int = 4,
               radii: Sequence[float] | None = None) -> ConeSpace:
    """Apex plus the given radii over every point of Y, with exact formula distances."""
    _check_rho(rho)
    Y = as_subset(space, Y)
    if not Y:
        raise InvalidInput("cone base must be non-empty")
    d_Y = space.induced_metric(space.indices(Y))
    if not np.all(np.isfinite(d_Y)):
        raise InvalidInput("cone base is disconnected in its induced length metric")
    radii = tuple(sorted(set(radii))) if radii is not None else default_radii(rho, radial_samples)
    if any(not (0 < r <= rho) for r in radii):
        raise InvalidInput("radial samples must lie in (0, rho]")
    points = [ConePoint.apex()] + [ConePoint(RADIAL, y, r) for y in Y for r in radii]
    bases = [-1] + [i for i in range(len(Y)) for _ in radii]
    rs = [0.0] + [r for _ in Y for r in radii]
    dist = _cone_matrix(bases, rs, d_Y, rho)
    return ConeSpace(Y, d_Y, float(rho), points, dist)


# cone-off ------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilyMember:
    subset: tuple[str, ...]
    words: tuple[str, ...] = ()

    @classmethod
    def from_json(cls, obj) -> "FamilyMember":
        if isinstance(obj, dict):
            return cls(tuple(str(p) for p in obj["subset"]), tuple(obj.get("words", ())))
        return cls(tuple(str(p) for p in obj))

    def to_json(self) -> dict:
        return {"subset": list(self.subset), "words": list(self.words)}


@dataclass
class ConeOffSpace:
    """Base points, one apex per member and radial samples, with the chain metric."""

    base: FiniteMetricSpace
    family: list[FamilyMember]
    rho: float
    radii: tuple[float, ...]
    labels: list[str]
    member_of: list[int]
    base_of: list[str | None]
    radius_of: list[float]
    dist: np.ndarray
    warnings: list[str] = field(default_factory=list)

    @property
    def n_base(self) -> int:
        return self.base.n

    def index(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.labels)}

    def base_block(self) -> np.ndarray:
        return self.dist[: self.n_base, : self.n_base]

    def as_metric_space(self) -> FiniteMetricSpace:
        return FiniteMetricSpace.from_matrix(self.labels, self.dist, check=False)

    def summary(self) -> dict:
        return {"rho": self.rho, "radii": list(self.radii), "points": len(self.labels),
                "members": len(self.family), "warnings": list(self.warnings)}


def _member_label(i: int, y: str | None, r: float) -> str:
    return f"v{i}" if y is None else f"{i}:{y}@{r:.12g}"


def build_coneoff(space: FiniteMetricSpace, family: Sequence, rho: float, radial_samples: int = 4,
                  radii: Sequence[float] | None = None, delta: float | None = None) -> ConeOffSpace:
    """Chain metric on base points, apices and radial samples.

    Base points of a member are identified with the rim (y, rho) of its cone.
    Single-step weights are the base metric on base pairs and the cone metric
    inside one cone; everything else is infinite.  The chain metric is their
    shortest-path closure, exact on the sample.
    """
    _check_rho(rho)
    family = [m if isinstance(m, FamilyMember) else FamilyMember.from_json(m) for m in family]
    radii = tuple(sorted(set(radii))) if radii is not None else default_radii(rho, radial_samples)
    if any(not (0 < r <= rho) for r in radii):
        raise InvalidInput("radial samples must lie in (0, rho]")
    interior = [r for r in radii if r < rho]
    warnings = []
    if delta is not None:
        for i, m in enumerate(family):
            if not strong_quasi_convexity_check(space, m.subset, delta).ok:
                warnings.append(f"member {i} is not strongly quasi-convex at delta={delta}")

    labels = list(space.points)
    member_of = [-1] * space.n
    base_of: list[str | None] = list(space.points)
    radius_of = [rho] * space.n
    blocks = []
    for i, m in enumerate(family):
        Y = as_subset(space, m.subset)
        if not Y:
            raise InvalidInput(f"family member {i} is empty")
        ids = [space.idx(y) for y in Y]
        start = len(labels)
        labels.append(_member_label(i, None, 0.0))
        member_of.append(i)
        base_of.append(None)
        radius_of.append(0.0)
        for y in Y:
            for r in interior:
                labels.append(_member_label(i, y, r))
                member_of.append(i)
                base_of.append(y)
                radius_of.append(r)
        # cone-local sample: rim points are the base points themselves
        local = list(range(start, len(labels))) + ids
        bases = [-1] + [k for k in range(len(Y)) for _ in interior] + list(range(len(Y)))
        rs = [0.0] + [r for _ in Y for r in interior] + [rho] * len(Y)
        d_Y = space.induced_metric(space.indices(Y))
        if not np.all(np.isfinite(d_Y)):
            warnings.append(f"member {i} is disconnected in its induced metric")
        blocks.append((local, _cone_matrix(bases, rs, d_Y, rho)))

    n = len(labels)
    w = np.full((n, n), np.inf)
    w[: space.n, : space.n] = space.dist
    for local, block in blocks:
        sub = w[np.ix_(local, local)]
        w[np.ix_(local, local)] = np.minimum(sub, block)
    np.fill_diagonal(w, 0.0)
    dist = floyd_warshall(w, directed=False)
    return ConeOffSpace(space, family, float(rho), radii, labels, member_of, base_of, radius_of, dist, warnings)


# verification ----------------------------------------------------------------------


@dataclass(frozen=True)
class SandwichReport:
    ok: bool
    pairs: int
    lower_margin: float
    upper_margin: float

    def to_json(self) -> dict:
        return {"ok": self.ok, "pairs": self.pairs, "lower_margin": self.lower_margin,
                "upper_margin": self.upper_margin}


def verify_sandwich(coneoff: ConeOffSpace, tolerance: float | None = None) -> SandwichReport:
    """mu(d_X) <= chain distance <= d_X on every base pair."""
    eps = config.tol(tolerance)
    d_x = coneoff.base.dist
    d_c = coneoff.base_block()
    low = mu_array(d_x, coneoff.rho)
    iu = np.triu_indices(coneoff.n_base, 1)
    lower = float(np.min(d_c[iu] - low[iu])) if iu[0].size else math.inf
    upper = float(np.min(d_x[iu] - d_c[iu])) if iu[0].size else math.inf
    return SandwichReport(lower >= -eps and upper >= -eps, int(iu[0].size), lower, upper)


@dataclass(frozen=True)
class ConeBallReport:
    ok: bool
    checked: int
    violations: list

    def to_json(self) -> dict:
        return {"ok": self.ok, "checked": self.checked, "violations": self.violations[:20]}


def verify_cone_ball(coneoff: ConeOffSpace, tolerance: float | None = None) -> ConeBallReport:
    """Points closer to an interior cone point than its depth rho - r stay in that cone.

    Also checks that the chain distance then equals the cone distance.
    """
    eps = config.tol(tolerance)
    violations, checked = [], 0
    for i, m in enumerate(coneoff.family):
        Y = as_subset(coneoff.base, m.subset)
        in_cone = np.array([mo == i for mo in coneoff.member_of])
        in_cone[[coneoff.base.idx(y) for y in Y]] = True
        members = np.flatnonzero(in_cone)
        local = {int(p): k for k, p in enumerate(members)}
        ybase = {y: k for k, y in enumerate(Y)}
        bases = [-1 if coneoff.base_of[p] is None else ybase[coneoff.base_of[p]] for p in members]
        block = _cone_matrix(bases, [coneoff.radius_of[p] for p in members],
                             coneoff.base.induced_metric(coneoff.base.indices(Y)), coneoff.rho)
        for x in members:
            if coneoff.member_of[x] != i:
                continue
            depth = coneoff.rho - coneoff.radius_of[x]
            close = np.flatnonzero(coneoff.dist[x] < depth - eps)
            for x2 in close:
                checked += 1
                if not in_cone[x2]:
                    violations.append({"x": coneoff.labels[x], "x2": coneoff.labels[x2], "kind": "outside"})
                elif abs(coneoff.dist[x, x2] - block[local[int(x)], local[int(x2)]]) > 1e3 * eps:
                    violations.append({"x": coneoff.labels[x], "x2": coneoff.labels[x2], "kind": "metric"})
    return ConeBallReport(not violations, checked, violations)


def refinement_monotone(space: FiniteMetricSpace, family: Sequence, rho: float, coarse: Sequence[float],
                        fine: Sequence[float], tolerance: float | None = None) -> float:
    """Largest increase of a base-pair distance when radial samples are added (should be <= 0)."""
    if not set(coarse) <= set(fine):
        raise InvalidInput("refinement must contain the coarse radii")
    a = build_coneoff(space, family, rho, radii=coarse).base_block()
    b = build_coneoff(space, family, rho, radii=fine).base_block()
    return float(np.max(b - a))


# rotations, quotients, extensions --------------------------------------------------------


def _as_map(h) -> dict:
    return {str(k): str(v) for k, v in dict(h).items()}


def _min_displacement(cone: ConeSpace, h: Mapping[str, str]) -> float:
    ix = cone.base_index()
    return float(min(cone.d_Y[ix[y], ix[h[y]]] for y in cone.Y))


@dataclass(frozen=True)
class RotationResult:
    value: float
    expected: float
    applicable: bool
    ok: bool

    def to_json(self) -> dict:
        return {"value": self.value, "expected": self.expected, "applicable": self.applicable, "ok": self.ok}


def rotation_displacement(cone: ConeSpace, h, x: ConePoint, tolerance: float | None = None) -> RotationResult:
    """Displacement of a cone point under an isometry of the base.

    When every base point moves at least pi sinh rho the displacement equals
    twice the radius; otherwise the value is reported as not covered.
    """
    h = _as_map(h)
    if set(h) != set(cone.Y) or set(h.values()) != set(cone.Y):
        raise InvalidInput("rotation must permute the cone base")
    eps = config.tol(tolerance)
    applicable = _min_displacement(cone, h) >= math.pi * math.sinh(cone.rho) - eps
    if x.kind == APEX:
        return RotationResult(0.0, 0.0, applicable, True)
    ix = cone.base_index()
    moved = ConePoint(RADIAL, h[x.base], x.r)
    value = cone_distance(x, moved, cone.rho, float(cone.d_Y[ix[x.base], ix[h[x.base]]]))
    expected = 2.0 * x.r
    return RotationResult(value, expected, applicable, (not applicable) or abs(value - expected) <= 1e3 * eps)


@dataclass
class QuotientCone:
    cone: ConeSpace
    dist: np.ndarray
    qualifying: int
    max_deviation: float
    never_increases: bool

    @property
    def ok(self) -> bool:
        return self.never_increases and self.max_deviation <= 1e3 * config.tol()

    def to_json(self) -> dict:
        return {"ok": self.ok, "qualifying_pairs": self.qualifying, "max_deviation": self.max_deviation,
                "never_increases": self.never_increases}


def quotient_cone(cone: ConeSpace, group: Sequence, l: float | None = None,
                  tolerance: float | None = None) -> QuotientCone:
    """Orbit-minimum distances on the cone sample for a finite rotation group of Y.

    ``group`` lists the group's elements as maps of Y (the identity may be
    omitted).  Distances between pairs whose bases are within l - pi sinh rho
    must be unchanged; this is checked and reported.
    """
    eps = config.tol(tolerance)
    ix = cone.base_index()
    maps = [_as_map(h) for h in group]
    ident = {y: y for y in cone.Y}
    nontrivial = [h for h in maps if h != ident]
    for h in maps:
        if set(h) != set(cone.Y) or set(h.values()) != set(cone.Y):
            raise InvalidInput("group elements must permute the cone base")
    threshold = 2 * math.pi * math.sinh(cone.rho)
    shortest = min((_min_displacement(cone, h) for h in nontrivial), default=math.inf)
    if l is None:
        l = shortest
    if l < threshold - eps or shortest < l - eps:
        raise InvalidInput(f"rotation group moves points by {shortest}, need l >= 2 pi sinh rho = {threshold}")
    perms = [np.arange(len(cone.Y))] + [np.array([ix[h[y]] for y in cone.Y]) for h in nontrivial]
    bases = np.array([-1 if p.kind == APEX else ix[p.base] for p in cone.points])
    radii = [p.r for p in cone.points]
    q = cone.dist.copy()
    for perm in perms[1:]:
        moved = np.where(bases < 0, -1, perm[np.where(bases < 0, 0, bases)])
        # distance from x to h x' with h acting on the second argument
        safe_a, safe_b = np.where(bases < 0, 0, bases), np.where(moved < 0, 0, moved)
        d_y = cone.d_Y[np.ix_(safe_a, safe_b)]
        angle = np.minimum(math.pi, d_y / math.sinh(cone.rho))
        r = np.asarray(radii)
        d = hyperbolic_distance(r[:, None], r[None, :], angle)
        d = np.where((bases < 0)[:, None], r[None, :], d)
        d = np.where((bases < 0)[None, :], r[:, None], d)
        q = np.minimum(q, d)
    np.fill_diagonal(q, 0.0)
    safe = np.where(bases < 0, 0, bases)
    base_gap = cone.d_Y[np.ix_(safe, safe)]
    has_apex = (bases < 0)[:, None] | (bases < 0)[None, :]
    qualifying = has_apex | (base_gap <= l - math.pi * math.sinh(cone.rho) + eps)
    dev = np.abs(q - cone.dist)[qualifying]
    return QuotientCone(cone, q, int(np.count_nonzero(qualifying)), float(dev.max()) if dev.size else 0.0,
                        bool(np.all(q <= cone.dist + eps)))


@dataclass
class ExtendedIsometry:
    mapping: dict
    member_permutation: list[int]
    max_defect: float

    @property
    def ok(self) -> bool:
        return self.max_defect <= 1e3 * config.tol()

    def to_json(self) -> dict:
        return {"ok": self.ok, "member_permutation": self.member_permutation, "max_defect": self.max_defect}


def extend_action(coneoff: ConeOffSpace, g) -> ExtendedIsometry:
    """Extend a base permutation that permutes the family to the whole sample.

    (y, r) in the cone over Y goes to (g y, r) in the cone over g Y.
    """
    g = _as_map(g)
    base = coneoff.base
    if set(g) != set(base.points) or set(g.values()) != set(base.points):
        raise InvalidInput("extension needs a permutation of the base points")
    key = {frozenset(as_subset(base, m.subset)): i for i, m in enumerate(coneoff.family)}
    sigma = []
    for m in coneoff.family:
        image = frozenset(g[y] for y in as_subset(base, m.subset))
        if image not in key:
            raise InvalidInput("map does not permute the family")
        sigma.append(key[image])
    index = coneoff.index()
    mapping = {}
    for p, label in enumerate(coneoff.labels):
        i, y, r = coneoff.member_of[p], coneoff.base_of[p], coneoff.radius_of[p]
        if i < 0:
            mapping[label] = g[label]
        else:
            mapping[label] = _member_label(sigma[i], None if y is None else g[y], r)
    perm = np.array([index[mapping[label]] for label in coneoff.labels])
    defect = float(np.max(np.abs(coneoff.dist[np.ix_(perm, perm)] - coneoff.dist)))
    return ExtendedIsometry(mapping, sigma, defect)


def word_permutation(window, word: str) -> dict:
    """Base permutation induced by a word whose action is total on the window."""
    out = {}
    for p in window.space.points:
        q = window.image(word, p)
        if q is None:
            raise InvalidInput(f"word {word!r} is not defined on all of the window")
        out[p] = q
    return out


# family statistics -----------------------------------------------------------------


@dataclass(frozen=True)
class FamilyStats:
    DeltaQ: float
    TQ: float
    witnesses: dict

    def to_json(self) -> dict:
        return {"DeltaQ": self.DeltaQ, "TQ": self.TQ if math.isfinite(self.TQ) else "inf",
                "witnesses": self.witnesses}

    @classmethod
    def from_json(cls, obj: dict) -> "FamilyStats":
        try:
            return cls(float(obj["DeltaQ"]), float(obj["TQ"]), dict(obj.get("witnesses", {})))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed family stats: {exc}") from exc


def family_stats(space: FiniteMetricSpace, family: Sequence, window=None, delta: float = 0.0) -> FamilyStats:
    """Largest overlap of 5 delta neighborhoods of distinct members, and the shortest rotation."""
    from .action import translation_length

    family = [m if isinstance(m, FamilyMember) else FamilyMember.from_json(m) for m in family]
    if not family:
        raise InvalidInput("family must be non-empty")
    best, pair = 0.0, None
    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            v = intersection_diameter(space, [family[i].subset, family[j].subset], 5 * delta).value
            if v > best or pair is None:
                best, pair = max(best, v), [i, j]
    shortest, word = math.inf, None
    if window is not None:
        for m in family:
            for w in m.words:
                length = translation_length(window, w).value
                if length < shortest:
                    shortest, word = length, w
    return FamilyStats(best, shortest, {"overlap_pair": pair, "shortest_word": word})


# numerical hyperbolicity of the plane ---------------------------------------------------


def hyperbolic_plane_delta(samples: int = 4000, max_radius: float = 14.0, seed: int = 0) -> float:
    """Largest four-point defect over sampled quadruples in the hyperbolic plane.

    Mixes seeded random quadruples with symmetric quadrilaterals, which
    approach the supremum as their radius grows.
    """
    rng = config.named_rng(seed, "hyperbolic_plane")
    quads = []
    for R in np.linspace(0.5, max_radius, 28):
        quads.append((np.full(4, R), np.array([0.0, 0.5, 1.0, 1.5]) * math.pi))
    for _ in range(samples):
        quads.append((rng.uniform(0, max_radius, 4), np.sort(rng.uniform(0, 2 * math.pi, 4))))
    best = 0.0
    for r, theta in quads:
        gap = np.abs(theta[:, None] - theta[None, :])
        gap = np.minimum(gap, 2 * math.pi - gap)
        d = hyperbolic_distance(r[:, None], r[None, :], gap)
        sums = sorted([d[0, 1] + d[2, 3], d[0, 2] + d[1, 3], d[0, 3] + d[1, 2]])
        best = max(best, (sums[2] - sums[1]) / 2.0)
    return float(best)


# frozen output of hyperbolic_plane_delta() with its defaults
BOLD_DELTA_NUM = 0.6931471805585616
