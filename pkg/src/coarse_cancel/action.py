"""Partial isometric actions on finite spaces.

An :class:`ActionWindow` stores each generator as an integer array ``img``
with ``img[i]`` the index of the image of point ``i`` (``-1`` when the point
leaves the window).  Words are strings over generator names and act on the
left: ``"ab"`` sends x to a(b(x)).  A word is defined at x only when every
intermediate image stays inside the window.

Results that only see a proper part of an infinite space are labelled as
window bounds; tree windows carry enough structure to certify exact values.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from . import config
from .errors import Inconclusive, InvalidInput
from .geodesy import DiscretePath, SubsetHandle, neighborhood
from .metric_core import FiniteMetricSpace, gromov_product

IDENTITY_TOKENS = ("", "1", "e")


@dataclass(frozen=True)
class PartialIsometry:
    name: str
    mapping: Mapping[str, str]
    inverse: str | None = None

    @property
    def domain(self) -> SubsetHandle:
        return tuple(self.mapping)


def _default_inverse_name(name: str, taken: set[str]) -> str:
    if len(name) == 1 and name.isalpha() and name.swapcase() not in taken:
        return name.swapcase()
    return name + "'"


class ActionWindow:
    """Generators acting by partial isometries on a finite metric space.

    Parameters
    ----------
    space:
        The ambient finite metric space.
    generators:
        Partial isometries; missing inverses are added automatically.
    max_word_length:
        Word-length cap for enumeration of group elements.
    element_key:
        Optional map from a word to a hashable group element.  Without it,
        two words are identified when they act identically on the window.
    tree:
        True when the space is a window of a simplicial tree on which the
        action has no inversions; enables exact translation lengths.
    translation_quantum:
        For tree windows, a known positive lower bound on the translation
        length of every loxodromic element of the whole group.
    """

    def __init__(
        self,
        space: FiniteMetricSpace,
        generators: Sequence[PartialIsometry],
        max_word_length: int = 4,
        element_key: Callable[[str], object] | None = None,
        tree: bool = False,
        translation_quantum: float | None = None,
        base_point: str | None = None,
        max_power: int = 16,
        label: str = "window",
        check: bool = True,
        info: Mapping | None = None,
    ):
        self.space = space
        self.max_word_length = int(max_word_length)
        self.tree = bool(tree)
        self.translation_quantum = translation_quantum
        self.base_point = base_point if base_point is not None else space.points[0]
        self.max_power = int(max_power)
        self.label = label
        self.info = dict(info or {})
        self._element_key = element_key
        self._lock = threading.Lock()
        self._cache: dict[tuple[str, ...], np.ndarray] = {}
        self.images: dict[str, np.ndarray] = {}
        self.inverse: dict[str, str] = {}
        names = {g.name for g in generators}
        for g in generators:
            img = np.full(space.n, -1, dtype=np.int64)
            for src, dst in g.mapping.items():
                img[space.idx(src)] = space.idx(dst)
            self.images[g.name] = img
            if g.inverse is not None:
                self.inverse[g.name] = g.inverse
                self.inverse[g.inverse] = g.name
        for g in generators:
            if g.name in self.inverse:
                continue
            inv = _default_inverse_name(g.name, names)
            names.add(inv)
            self.inverse[g.name] = inv
            self.inverse[inv] = g.name
        for name, inv in list(self.inverse.items()):
            if inv not in self.images and name in self.images:
                src = self.images[name]
                back = np.full(space.n, -1, dtype=np.int64)
                dom = np.flatnonzero(src >= 0)
                back[src[dom]] = dom
                self.images[inv] = back
        for name in self.images:
            if name in IDENTITY_TOKENS:
                raise InvalidInput(f"generator name {name!r} is reserved for the identity")
        self.names = sorted(self.images, key=lambda s: (-len(s), s))
        self.order = sorted(self.images)
        self.single_letters = all(len(s) == 1 for s in self.images)
        if check:
            self._validate()

    # structure ------------------------------------------------------------

    def _validate(self, tolerance: float | None = None) -> None:
        eps = config.tol(tolerance)
        d = self.space.dist
        for name, img in self.images.items():
            dom = np.flatnonzero(img >= 0)
            tgt = img[dom]
            if len(set(tgt.tolist())) != len(tgt):
                raise InvalidInput(f"generator {name} is not injective")
            err = np.max(np.abs(d[np.ix_(tgt, tgt)] - d[np.ix_(dom, dom)]), initial=0.0)
            if err > eps:
                raise InvalidInput(f"generator {name} is not an isometry (distortion {err})")
            inv = self.images[self.inverse[name]]
            if np.any(inv[tgt] != dom):
                raise InvalidInput(f"generator {name} and {self.inverse[name]} are not mutually inverse")

    def tokens(self, word: str) -> tuple[str, ...]:
        word = word.strip()
        if word in IDENTITY_TOKENS:
            return ()
        out = []
        pos = 0
        while pos < len(word):
            if word[pos] in " .*":
                pos += 1
                continue
            for name in self.names:
                if word.startswith(name, pos):
                    out.append(name)
                    pos += len(name)
                    break
            else:
                raise InvalidInput(f"cannot parse word {word!r} at position {pos}")
        return tuple(out)

    def join(self, tokens: Iterable[str]) -> str:
        tokens = list(tokens)
        if not tokens:
            return ""
        return "".join(tokens) if self.single_letters else ".".join(tokens)

    def inverse_word(self, word: str) -> str:
        return self.join(self.inverse[t] for t in reversed(self.tokens(word)))

    def power(self, word: str, k: int) -> str:
        if k < 0:
            return self.power(self.inverse_word(word), -k)
        return self.join(self.tokens(word) * k)

    def product(self, *words: str) -> str:
        return self.join(t for w in words for t in self.tokens(w))

    def act(self, word: str) -> np.ndarray:
        """Image array of a word (``-1`` where undefined)."""
        toks = self.tokens(word)
        with self._lock:
            hit = self._cache.get(toks)
        if hit is not None:
            return hit
        img = np.arange(self.space.n, dtype=np.int64)
        for t in reversed(toks):
            step = self.images[t]
            img = np.where(img >= 0, step[np.maximum(img, 0)], -1)
        img.setflags(write=False)
        with self._lock:
            self._cache[toks] = img
        return img

    def image(self, word: str, x) -> str | None:
        k = int(self.act(word)[self.space.idx(x)])
        return None if k < 0 else self.space.points[k]

    def domain(self, word: str) -> np.ndarray:
        return np.flatnonzero(self.act(word) >= 0)

    def displacement(self, word: str) -> np.ndarray:
        """d(gx, x) per point; NaN outside the domain."""
        img = self.act(word)
        out = np.full(self.space.n, np.nan)
        dom = np.flatnonzero(img >= 0)
        out[dom] = self.space.dist[dom, img[dom]]
        return out

    def element_key(self, word: str):
        if self._element_key is not None:
            return self._element_key(word)
        return self.act(word).tobytes()

    def is_trivial(self, word: str) -> bool:
        return self.element_key(word) == self.element_key("")

    def elements(self, max_length: int | None = None) -> list[str]:
        """One shortest word per distinct element, in length-then-name order."""
        cap = self.max_word_length if max_length is None else int(max_length)
        seen = {self.element_key(""): ""}
        frontier = [""]
        out = [""]
        for _ in range(cap):
            nxt = []
            for w in frontier:
                for s in self.order:
                    cand = self.product(w, s)
                    key = self.element_key(cand)
                    if key not in seen:
                        seen[key] = cand
                        nxt.append(cand)
                        out.append(cand)
            frontier = nxt
        return out


# translation lengths -----------------------------------------------------------


class Length(NamedTuple):
    value: float
    exact: bool
    witness: str | None
    note: str

    def to_json(self) -> dict:
        return {"value": self.value, "exact": self.exact, "witness": self.witness, "note": self.note}


def _power_images(window: ActionWindow, word: str, max_power: int) -> list[np.ndarray]:
    base = window.act(word)
    out = [base]
    img = base
    for _ in range(max_power - 1):
        img = np.where(img >= 0, base[np.maximum(img, 0)], -1)
        if not np.any(img >= 0):
            break
        out.append(img)
    return out


def translation_length(window: ActionWindow, word: str, tolerance: float | None = None) -> Length:
    """Minimum displacement of ``word`` over its domain in the window."""
    eps = config.tol(tolerance)
    disp = window.displacement(word)
    dom = np.flatnonzero(~np.isnan(disp))
    if dom.size == 0:
        raise Inconclusive(f"window too small for word {word!r}")
    value = float(np.min(disp[dom]))
    at = int(dom[np.argmin(disp[dom])])
    witness = window.space.points[at]
    if dom.size == window.space.n:
        return Length(value, True, witness, "word is defined on the whole space")
    if window.tree:
        if value <= eps:
            return Length(0.0, True, witness, "fixed point in a tree window")
        sq = _power_images(window, word, 2)
        if len(sq) == 2:
            img1, img2 = window.act(word), sq[1]
            d = window.space.dist
            on_axis = [x for x in dom if img2[x] >= 0 and abs(d[x, img2[x]] - 2 * d[x, img1[x]]) <= eps]
            best = [x for x in on_axis if abs(d[x, img1[x]] - value) <= eps]
            if best:
                return Length(value, True, window.space.points[best[0]], "minimiser lies on the tree axis")
    return Length(value, False, witness, "upper bound: minimum over a proper window")


def stable_translation_length(window: ActionWindow, word: str, max_power: int | None = None,
                              tolerance: float | None = None) -> Length:
    """Estimate of lim d(g^n x, x) / n.

    The sequence d(g^n x, x) is subadditive, so d(g^N x, x) / N is an upper
    bound; it is exact when some power fixes a point, and on tree windows
    where the minimal displacement is attained on the axis.
    """
    eps = config.tol(tolerance)
    cap = window.max_power if max_power is None else int(max_power)
    powers = _power_images(window, word, cap)
    d = window.space.dist
    rates = []
    for k, img in enumerate(powers, start=1):
        dom = np.flatnonzero(img >= 0)
        if dom.size == 0:
            break
        disp = d[dom, img[dom]]
        low = float(np.min(disp))
        if low <= eps:
            return Length(0.0, True, window.space.points[int(dom[np.argmin(disp)])],
                          f"power {k} fixes a point")
        rates.append((k, low / k, window.space.points[int(dom[np.argmin(disp)])]))
    if window.tree:
        length = translation_length(window, word, tolerance)
        if length.exact:
            return Length(length.value, True, length.witness, "tree: stable length equals minimal displacement")
    usable = [r for r in rates if r[0] >= 2]
    if not usable:
        raise Inconclusive(f"no power >= 2 of {word!r} is composable in the window")
    k, rate, witness = usable[-1]
    return Length(rate, False, witness, f"upper bound from power {k}")


def power_rates(window: ActionWindow, word: str, max_power: int | None = None) -> list[tuple[int, float]]:
    """Diagnostics: (n, min_x d(g^n x, x) / n) for each composable power."""
    cap = window.max_power if max_power is None else int(max_power)
    d = window.space.dist
    out = []
    for k, img in enumerate(_power_images(window, word, cap), start=1):
        dom = np.flatnonzero(img >= 0)
        if dom.size:
            out.append((k, float(np.min(d[dom, img[dom]])) / k))
    return out


@dataclass(frozen=True)
class IsometryClassification:
    kind: str
    len: float
    stable_len: float
    certificate: str
    slope: float = 0.0
    len_exact: bool = False
    stable_exact: bool = False

    @property
    def loxodromic(self) -> bool:
        return self.kind == "LoxodromicEstimate"

    def to_json(self) -> dict:
        return {"kind": self.kind, "len": self.len, "stable_len": self.stable_len, "slope": self.slope,
                "len_exact": self.len_exact, "stable_exact": self.stable_exact, "certificate": self.certificate}


def _orbit_slope(window: ActionWindow, word: str, start: str, max_power: int) -> float:
    x = window.space.idx(start)
    d = window.space.dist
    ks, ds = [], []
    for k, img in enumerate(_power_images(window, word, max_power), start=1):
        if img[x] < 0:
            break
        ks.append(k)
        ds.append(d[x, img[x]])
    if len(ks) < 2:
        return float(ds[0]) if ds else 0.0
    return float(np.polyfit(np.array(ks, float), np.array(ds, float), 1)[0])


def classify(window: ActionWindow, word: str, max_power: int | None = None,
             tolerance: float | None = None) -> IsometryClassification:
    """Elliptic or loxodromic (estimate); never parabolic.

    Raises :class:`Inconclusive` when the powers available in the window
    neither fix a point nor show clean linear growth.
    """
    eps = config.tol(tolerance)
    cap = window.max_power if max_power is None else int(max_power)
    length = translation_length(window, word, tolerance)
    stable = stable_translation_length(window, word, cap, tolerance)
    if stable.exact and stable.value <= eps:
        return IsometryClassification("Elliptic", length.value, 0.0, stable.note, 0.0, length.exact, True)
    if window.tree and length.exact:
        slope = _orbit_slope(window, word, length.witness, cap)
        return IsometryClassification("LoxodromicEstimate", length.value, stable.value,
                                      "tree window: positive minimal displacement on the axis",
                                      slope, True, stable.exact)
    rates = power_rates(window, word, cap)
    if len(rates) < 3:
        raise Inconclusive(f"window too small to classify {word!r}: only {len(rates)} composable powers")
    mins = [r * k for k, r in rates]
    ks = np.array([k for k, _ in rates], float)
    slope = float(np.polyfit(ks, np.array(mins), 1)[0])
    increasing = all(b > a + eps for a, b in zip(mins, mins[1:]))
    if increasing and mins[-1] / ks[-1] >= 0.5 * mins[0]:
        return IsometryClassification("LoxodromicEstimate", length.value, stable.value,
                                      f"minimal displacement grows linearly over {len(rates)} powers",
                                      slope, length.exact, stable.exact)
    if max(mins) <= mins[0] + eps:
        return IsometryClassification("Elliptic", length.value, stable.value,
                                      "displacement of powers does not grow", 0.0, length.exact, stable.exact)
    raise Inconclusive(f"growth of {word!r} is neither bounded nor linear within the window")


# axes, nerves, cylinders ------------------------------------------------------


def axis(window: ActionWindow, word: str, delta: float, tolerance: float | None = None) -> SubsetHandle:
    """{x : d(gx, x) < len g + 8 delta}, always including the minimisers."""
    eps = config.tol(tolerance)
    length = translation_length(window, word, tolerance).value
    disp = window.displacement(word)
    dom = ~np.isnan(disp)
    excess = np.where(dom, disp - length, np.inf)
    member = (excess < 8 * delta - eps) | (excess <= eps)
    return tuple(window.space.points[i] for i in np.flatnonzero(member))


@dataclass(frozen=True)
class Nerve:
    path: DiscretePath
    fundamental_length: float
    periods: int
    start: str

    def to_json(self) -> dict:
        return {"path": self.path.to_json(), "fundamental_length": self.fundamental_length,
                "periods": self.periods, "start": self.start}


def nerve(window: ActionWindow, word: str, l: float, tolerance: float | None = None) -> Nerve:
    """Periodic path x, ..., gx, ..., g^2 x, ... built from one shortest route.

    The start x is a point with d(gx, x) < len g + l (a minimiser when l = 0)
    that admits the most translates of the route inside the window.
    """
    eps = config.tol(tolerance)
    length = translation_length(window, word, tolerance)
    if length.value <= eps:
        raise InvalidInput(f"{word!r} is not loxodromic (translation length 0)")
    space = window.space
    disp = window.displacement(word)
    ok = ~np.isnan(disp) & ((disp < length.value + l - eps) | (np.abs(disp - length.value) <= eps))
    candidates = np.flatnonzero(ok)
    img = window.act(word)
    best = None
    for x in candidates:
        route = space.route(int(x), int(img[x]))
        pts = list(route)
        seg = np.array(route)
        periods = 1
        while True:
            nxt = img[seg]
            if np.any(nxt < 0):
                break
            seg = nxt
            pts.extend(int(p) for p in seg[1:])
            periods += 1
            if periods > window.max_power:
                break
        if best is None or periods > best[0]:
            best = (periods, int(x), pts)
    if best is None:
        raise Inconclusive(f"window exhausted before one period of {word!r}")
    periods, x, pts = best
    path = DiscretePath.through(space, [space.points[p] for p in pts])
    return Nerve(path, float(disp[x]), periods, space.points[x])


@dataclass(frozen=True)
class Cylinder:
    members: SubsetHandle
    outer_approximation: bool
    loxodromic: bool

    def to_json(self) -> dict:
        return {"members": list(self.members), "outer_approximation": self.outer_approximation,
                "loxodromic": self.loxodromic}


def cylinder(window: ActionWindow, word: str, delta: float, tolerance: float | None = None) -> Cylinder:
    """The 38 delta neighborhood of the axis, an outer bound for the cylinder."""
    members = neighborhood(window.space, axis(window, word, delta, tolerance), 38 * delta, tolerance)
    try:
        lox = classify(window, word, tolerance=tolerance).loxodromic
    except Inconclusive:
        lox = False
    return Cylinder(members, True, lox)


# constructive criteria -----------------------------------------------------------


def _at(window: ActionWindow, word: str, x) -> str:
    y = window.image(word, x)
    if y is None:
        raise InvalidInput(f"{word!r} is not defined at {x!r} in the window")
    return y


@dataclass(frozen=True)
class LoxodromicPair:
    word: str
    displacement_g: float
    displacement_h: float
    gromov: float
    classification: IsometryClassification

    def to_json(self) -> dict:
        return {"word": self.word, "displacement_g": self.displacement_g, "displacement_h": self.displacement_h,
                "gromov_product": self.gromov, "classification": self.classification.to_json()}


def find_loxodromic_pair(window: ActionWindow, g: str, h: str, x, delta: float,
                         tolerance: float | None = None) -> LoxodromicPair | None:
    """Return g^-1 h when both displacements dominate 2 (gx|hx)_x + 6 delta.

    The product is also classified in the window; a trivial or non-loxodromic
    product is never returned.
    """
    eps = config.tol(tolerance)
    space = window.space
    gx, hx = _at(window, g, x), _at(window, h, x)
    dg, dh = space.d(gx, x), space.d(hx, x)
    gp = gromov_product(space, gx, hx, x)
    need = 2 * gp + 6 * delta
    if dg < need - eps or dh < need - eps:
        return None
    word = window.product(window.inverse_word(g), h)
    if window.is_trivial(word):
        return None
    try:
        cls = classify(window, word, tolerance=tolerance)
    except Inconclusive:
        return None
    if not cls.loxodromic:
        return None
    return LoxodromicPair(word, dg, dh, gp, cls)


@dataclass
class Certificate:
    ok: bool
    checks: list[dict] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "checks": self.checks}


def free_subgroup_certificate(window: ActionWindow, gens: Sequence[str], x, delta: float,
                              tolerance: float | None = None) -> Certificate:
    """Ping-pong test at x.

    For all i, j and e = +-1 with g_i^-e g_j non-trivial:
    2 (g_i^e x | g_j x)_x < min(d(g_i x, x), d(g_j x, x)) + delta.
    Trivial generators and repeated elements are rejected outright, since the
    exemption above would otherwise let them through vacuously.
    """
    eps = config.tol(tolerance)
    space = window.space
    checks: list[dict] = []
    keys = [window.element_key(g) for g in gens]
    if not gens:
        return Certificate(False, [{"reason": "no generators"}])
    for g in gens:
        if window.is_trivial(g):
            return Certificate(False, [{"reason": f"generator {g!r} is trivial"}])
    if len(set(keys)) != len(keys):
        return Certificate(False, [{"reason": "repeated generator"}])
    ok = True
    for i, gi in enumerate(gens):
        for j, gj in enumerate(gens):
            for eps_sign in (1, -1):
                gi_e = gi if eps_sign == 1 else window.inverse_word(gi)
                if window.is_trivial(window.product(window.inverse_word(gi_e), gj)):
                    continue
                lhs = 2 * gromov_product(space, _at(window, gi_e, x), _at(window, gj, x), x)
                rhs = min(space.d(_at(window, gi, x), x), space.d(_at(window, gj, x), x)) + delta
                passed = lhs < rhs - eps
                ok &= passed
                checks.append({"i": i, "j": j, "sign": eps_sign, "lhs": lhs, "rhs": rhs, "pass": passed})
    return Certificate(ok, checks)


def non_elementary_pair_certificate(window: ActionWindow, u: str, v: str, x, A: float, delta: float,
                                    tolerance: float | None = None) -> Certificate:
    """The three displacement inequalities for u, v at x with slack A >= 0."""
    eps = config.tol(tolerance)
    space = window.space
    if A < 0:
        raise InvalidInput("A must be non-negative")
    ui, vi = window.inverse_word(u), window.inverse_word(v)
    ux, uix, vx, vix = (_at(window, w, x) for w in (u, ui, v, vi))
    du, dv = space.d(ux, x), space.d(vx, x)
    checks = []
    bound = min(du, dv) - A - 6 * delta
    for a_name, a in (("u", ux), ("u^-1", uix)):
        for b_name, b in (("v", vx), ("v^-1", vix)):
            lhs = 2 * gromov_product(space, a, b, x)
            checks.append({"inequality": f"({a_name}x|{b_name}x)", "lhs": lhs, "rhs": bound,
                           "pass": lhs < bound - eps})
    for name, a, b, dd in (("u", ux, uix, du), ("v", vx, vix, dv)):
        lhs = 2 * gromov_product(space, a, b, x)
        checks.append({"inequality": f"({name}x|{name}^-1x)", "lhs": lhs, "rhs": dd + A, "pass": lhs < dd + A - eps})
    return Certificate(all(c["pass"] for c in checks), checks)


# counting and fixed sets ----------------------------------------------------------


def element_images(window: ActionWindow, max_length: int | None = None) -> tuple[list[str], np.ndarray]:
    words = window.elements(max_length)
    return words, np.stack([window.act(w) for w in words])


def acylindricity_table(window: ActionWindow, l: float, max_length: int | None = None,
                        tolerance: float | None = None) -> list[tuple[float, int]]:
    """N(d) = max over pairs with d(x, x') >= d of #{u : d(ux,x) <= l, d(ux',x') <= l}.

    Elements are enumerated up to the window's word cap and counted once each.
    """
    if l < 0:
        raise InvalidInput("l must be non-negative")
    eps = config.tol(tolerance)
    d = window.space.dist
    words, imgs = element_images(window, max_length)
    n = window.space.n
    near = np.zeros((len(words), n), dtype=np.float64)
    for k, img in enumerate(imgs):
        dom = img >= 0
        disp = np.full(n, np.inf)
        disp[dom] = d[np.flatnonzero(dom), img[dom]]
        near[k] = disp <= l + eps
    counts = near.T @ near
    values = np.unique(np.round(d, 12))
    flat_d = d.ravel()
    flat_c = counts.ravel()
    order = np.argsort(flat_d, kind="stable")
    sorted_d = flat_d[order]
    suffix = np.maximum.accumulate(flat_c[order][::-1])[::-1]
    table = []
    for value in values:
        start = int(np.searchsorted(sorted_d, value - eps, side="left"))
        table.append((float(value), int(round(suffix[start]))))
    return table


def characteristic_set(window: ActionWindow, H: Sequence[str], delta: float,
                       tolerance: float | None = None) -> SubsetHandle:
    """Points moved at most 11 delta by every element of H (may be empty)."""
    eps = config.tol(tolerance)
    ok = np.ones(window.space.n, dtype=bool)
    for h in H:
        disp = window.displacement(h)
        ok &= ~np.isnan(disp) & (disp <= 11 * delta + eps)
    return tuple(window.space.points[i] for i in np.flatnonzero(ok))


def displacement_excess(window: ActionWindow, word: str, delta: float) -> float:
    """Largest value of d(gy,y) - max(d(gx,x), d(gx',x')) - 2 (x|x')_y - 6 delta."""
    disp = window.displacement(word)
    dom = np.flatnonzero(~np.isnan(disp))
    d = window.space.dist
    worst = -math.inf
    sub = d[np.ix_(dom, dom)]
    dd = disp[dom]
    top = np.maximum(dd[:, None], dd[None, :])
    for k, y in enumerate(dom):
        row = sub[k]
        gp = 0.5 * (row[:, None] + row[None, :] - sub)
        worst = max(worst, float(np.max(dd[k] - top - 2 * gp - 6 * delta)))
    return worst


def window_from_permutations(space: FiniteMetricSpace, perms: Mapping[str, Mapping[str, str]],
                             max_word_length: int = 4, **kwargs) -> ActionWindow:
    gens = [PartialIsometry(name, dict(mapping)) for name, mapping in perms.items()]
    return ActionWindow(space, gens, max_word_length=max_word_length, **kwargs)


def rotation_window(space: FiniteMetricSpace, step: int = 1, name: str = "r", **kwargs) -> ActionWindow:
    """Cyclic shift of the points by ``step`` (for cycle graphs this is a rotation)."""
    pts = space.points
    n = len(pts)
    return window_from_permutations(space, {name: {pts[i]: pts[(i + step) % n] for i in range(n)}}, **kwargs)
