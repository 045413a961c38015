"""The invariants rinj, e, nu and A of an action, with bound-direction bookkeeping.

Every value that leaves this module is tagged ``exact``, ``lower``,
``upper`` or ``divides`` so downstream certification can refuse to use a
bound in the wrong direction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from . import config
from .action import (ActionWindow, Inconclusive, axis, characteristic_set, classify,
                     translation_length)
from .errors import HypothesisFailure, InvalidInput, UnsoundLedger
from .geodesy import Diameter, intersection_diameter, neighborhood
from .grouptheory import GroupTable, group_exponent, has_involution, holomorph
from .logspace import Magnitude
from .metric_core import hyperbolicity_delta, lcm

FLAGS = ("exact", "lower", "upper", "divides")
ACYLINDRICITY_L_FACTOR = 166.0


@dataclass(frozen=True)
class Bound:
    value: float
    flag: str
    note: str
    witness: object = None

    def to_json(self) -> dict:
        v = self.value
        return {"value": v if math.isfinite(v) else ("inf" if v > 0 else "-inf"), "flag": self.flag,
                "note": self.note, "witness": self.witness}


@dataclass
class InvariantLedger:
    """(delta, rinj, e, nu, A) with per-field bound flags and provenance notes."""

    delta: float
    rinj: Magnitude
    e: int
    nu: int
    A: Magnitude
    flags: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)
    nu_lower: int = 1
    no_involution: bool | None = None

    def __post_init__(self):
        self.rinj = Magnitude.of(self.rinj)
        self.A = Magnitude.of(self.A)
        defaults = {"delta": "exact", "rinj": "lower", "e": "exact", "nu": "upper", "A": "upper"}
        self.flags = {**defaults, **self.flags}
        self.validate()

    def validate(self) -> None:
        if self.delta < 0:
            raise InvalidInput("delta must be non-negative")
        if int(self.e) < 1 or int(self.nu) < 1:
            raise InvalidInput("e and nu must be positive integers")
        for k, v in self.flags.items():
            if v not in FLAGS:
                raise InvalidInput(f"unknown bound flag {v!r} on {k}")

    def require(self, name: str, allowed: Iterable[str], purpose: str) -> None:
        flag = self.flags.get(name)
        if flag not in allowed:
            raise UnsoundLedger(f"{purpose} needs {name} as {'/'.join(allowed)}, ledger has {flag!r}")

    def replace(self, **changes) -> "InvariantLedger":
        data = dict(delta=self.delta, rinj=self.rinj, e=self.e, nu=self.nu, A=self.A, flags=dict(self.flags),
                    notes=dict(self.notes), nu_lower=self.nu_lower, no_involution=self.no_involution)
        flags = changes.pop("flags", {})
        notes = changes.pop("notes", {})
        data.update(changes)
        data["flags"].update(flags)
        data["notes"].update(notes)
        return InvariantLedger(**data)

    def to_json(self) -> dict:
        return {"delta": self.delta, "rinj": self.rinj.to_json(), "e": int(self.e), "nu": int(self.nu),
                "nu_lower": int(self.nu_lower), "A": self.A.to_json(), "flags": dict(sorted(self.flags.items())),
                "notes": dict(sorted(self.notes.items())), "no_involution": self.no_involution}

    @classmethod
    def from_json(cls, obj: dict) -> "InvariantLedger":
        try:
            return cls(delta=float(obj["delta"]), rinj=Magnitude.from_json(obj["rinj"]), e=int(obj["e"]),
                       nu=int(obj["nu"]), A=Magnitude.from_json(obj["A"]), flags=dict(obj.get("flags", {})),
                       notes=dict(obj.get("notes", {})), nu_lower=int(obj.get("nu_lower", 1)),
                       no_involution=obj.get("no_involution"))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed ledger: {exc}") from exc


# rinj ---------------------------------------------------------------------------


def injectivity_radius(window: ActionWindow, word_cap: int) -> Bound:
    """Smallest stable length among loxodromic elements of word length <= cap.

    The infimum over a subset can only be larger, so this is an upper bound on
    the true injectivity radius.
    """
    if word_cap < 1:
        raise InvalidInput("word_cap must be >= 1")
    best, witness, skipped, all_exact = math.inf, None, 0, True
    for w in window.elements(word_cap)[1:]:
        try:
            cls = classify(window, w)
        except Inconclusive:
            skipped += 1
            continue
        if not cls.loxodromic:
            continue
        all_exact &= cls.stable_exact
        if cls.stable_len < best:
            best, witness = cls.stable_len, w
    if witness is None:
        return Bound(math.inf, "upper", f"no loxodromic element up to length {word_cap}")
    note = f"minimum over elements up to length {word_cap}; upper bound on the infimum over the group"
    if all_exact:
        note += "; exact for the capped set"
    if skipped:
        note += f"; {skipped} elements could not be classified"
    return Bound(best, "upper", note, witness)


def structural_rinj_lower_bound(window: ActionWindow) -> Bound | None:
    """Lower bound from the tree structure: loxodromics translate by a multiple of the quantum."""
    if window.tree and window.translation_quantum:
        return Bound(float(window.translation_quantum), "lower",
                     "simplicial tree without inversions: translation lengths are multiples of the quantum")
    return None


# e -----------------------------------------------------------------------------


def invariant_e(finite_normal_subgroups: Sequence[GroupTable]) -> int:
    """lcm of the exponents of Hol(F) over the supplied groups."""
    return lcm(group_exponent(holomorph(F)) for F in finite_normal_subgroups)


# A -----------------------------------------------------------------------------


def overlap_A(window: ActionWindow, words: Sequence[str], delta: float) -> Diameter:
    """Diameter of the intersection of the 13 delta neighborhoods of the axes."""
    if not words:
        raise InvalidInput("overlap needs at least one word")
    axes = [axis(window, w, delta) for w in words]
    return intersection_diameter(window.space, axes, 13 * delta)


@dataclass(frozen=True)
class ElementaryVerdict:
    elementary: bool | None
    kind: str
    reason: str


def elementary_surrogate(window: ActionWindow, words: Sequence[str], delta: float) -> ElementaryVerdict:
    """Decide, at window scale, whether the words generate an elementary subgroup.

    Elliptic surrogate: a common point moved at most 11 delta by all words.
    Lineal surrogate: some word, or product of two words, is loxodromic and
    every word maps its axis into the axis (trees) or into the 38 delta
    neighborhood of the axis (other windows).
    Anything else counts as non-elementary.  On tree windows with delta = 0
    this matches the fixed point / invariant line dichotomy for finitely
    generated groups acting without inversions, within the window.
    """
    words = list(words)
    if characteristic_set(window, words, delta):
        return ElementaryVerdict(True, "elliptic", "common near-fixed point")
    candidates = list(words) + [window.product(u, v) for u, v in itertools.combinations(words, 2)]
    lox = None
    for c in candidates:
        try:
            if classify(window, c).loxodromic:
                lox = c
                break
        except Inconclusive:
            continue
    if lox is None:
        return ElementaryVerdict(None, "undetermined", "no common fixed point and no loxodromic found")
    line = axis(window, lox, delta)
    target = set(line if window.tree else neighborhood(window.space, line, 38 * delta))
    # axis membership is only decidable where lox itself is defined
    decidable = set(window.space.points[i] for i in range(window.space.n) if window.act(lox)[i] >= 0)
    for w in words:
        for x in line:
            y = window.image(w, x)
            if y is not None and y in decidable and y not in target:
                return ElementaryVerdict(False, "non-elementary", f"{w!r} moves the axis of {lox!r}")
    return ElementaryVerdict(True, "lineal", f"all words preserve the axis of {lox!r}")


def invariant_A_estimate(window: ActionWindow, nu: int, L_S: float, delta: float, word_cap: int | None = None,
                         scope: Callable[[str], bool] | None = None, max_tuples: int = 20000) -> Bound:
    """Largest overlap over (nu+1)-tuples of short elements that are not elementary.

    A sup over finitely many tuples is a lower bound on the true value.
    ``scope`` restricts the search to elements of a subgroup.
    """
    if nu < 1:
        raise InvalidInput("nu must be >= 1")
    eps = config.tol()
    short = []
    for w in window.elements(word_cap):
        if scope is not None and not scope(w):
            continue
        try:
            if translation_length(window, w).value <= L_S * delta + eps:
                short.append(w)
        except Inconclusive:
            continue
    best, witness, count, truncated = 0.0, None, 0, False
    for tup in itertools.combinations_with_replacement(short, nu + 1):
        if count >= max_tuples:
            truncated = True
            break
        count += 1
        if elementary_surrogate(window, tup, delta).elementary is not False:
            continue
        value = overlap_A(window, tup, delta).value
        if value > best:
            best, witness = value, list(tup)
    note = f"sup over {count} tuples of elements with len <= L_S delta; lower bound"
    if truncated:
        note += f"; truncated at {max_tuples} tuples"
    if witness is None:
        note += "; no qualifying tuple"
    return Bound(best, "lower", note, witness)


def tree_A_upper_bound(window: ActionWindow, table: Sequence[tuple[float, int]] | None = None) -> Bound:
    """Upper bound on A for a tree window at delta = 0.

    Short elements are elliptic and their axes are fixed-point sets, so two
    points in a common axis intersection are fixed by the identity and by a
    non-trivial element: the overlap is at most max{d : N(d) >= 2} of the
    l = 0 acylindricity table.
    """
    if not window.tree:
        raise InvalidInput("structural A bound needs a tree window")
    if table is None:
        from .action import acylindricity_table

        table = acylindricity_table(window, 0.0)
    value = max([0.0] + [d for d, N in table if N >= 2])
    note = "tree, delta 0: overlap bounded by the longest segment with non-trivial pointwise stabilizer"
    amalgam = getattr(window, "amalgam", None)
    if window.label == "free_group" or (amalgam is not None and len(amalgam.C) == 1):
        note += "; edge stabilizers are trivial so the bound is global"
    else:
        note += "; stabilizers enumerated up to the word cap (window-certified)"
    return Bound(value, "upper", note)


@dataclass
class OverlapReport:
    entries: list = field(default_factory=list)
    filtered: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e["margin"] >= -config.tol() for e in self.entries)

    @property
    def min_margin(self) -> float:
        return min((e["margin"] for e in self.entries), default=math.inf)

    def to_json(self) -> dict:
        return {"ok": self.ok, "checked": len(self.entries), "filtered": self.filtered, "entries": self.entries}


def verify_overlap_bounds(window: ActionWindow, ledger: InvariantLedger, samples: Sequence[Sequence[str]],
                          L_S: float = 500.0, strict: bool = True) -> OverlapReport:
    """Check the overlap inequalities on sampled pairs and tuples.

    Right-hand sides use the ledger's upper bounds on nu and A, so a negative
    margin is a genuine contradiction.  Tuples of size m are only checked
    against the multi-axis bound when m <= the certified lower bound on nu.
    """
    ledger.require("nu", ("exact", "upper"), "overlap verification")
    ledger.require("A", ("exact", "upper"), "overlap verification")
    delta, nu, A = ledger.delta, ledger.nu, ledger.A.value
    eps = config.tol()
    report = OverlapReport()
    for tup in samples:
        tup = list(tup)
        verdict = elementary_surrogate(window, tup, delta)
        if verdict.elementary is not False:
            report.filtered.append({"words": tup, "reason": verdict.kind})
            continue
        lens = [translation_length(window, w).value for w in tup]
        overlap = overlap_A(window, tup, delta).value
        if len(tup) == 2:
            g, h = tup
            lg, lh = lens
            for short, other, ls, lo in ((g, h, lg, lh), (h, g, lh, lg)):
                if ls <= L_S * delta + eps:
                    rhs = nu * lo + A + 156 * delta
                    report.entries.append({"words": [short, other], "bound": "short", "overlap": overlap,
                                           "rhs": rhs, "margin": rhs - overlap})
            rhs = lg + lh + nu * max(lg, lh) + A + 684 * delta
            report.entries.append({"words": tup, "bound": "general", "overlap": overlap, "rhs": rhs,
                                   "margin": rhs - overlap})
        if len(tup) <= ledger.nu_lower:
            rhs = (nu + 2) * max(lens) + A + 684 * delta
            report.entries.append({"words": tup, "bound": "tuple", "overlap": overlap, "rhs": rhs,
                                   "margin": rhs - overlap})
    if strict and not report.ok:
        bad = [e for e in report.entries if e["margin"] < -eps]
        raise HypothesisFailure(f"overlap bound violated on a certified tuple: {bad[0]}")
    return report


# nu ------------------------------------------------------------------------------


@dataclass(frozen=True)
class NuBound:
    bound: int
    d: float
    N: int
    M: int

    def to_json(self) -> dict:
        return {"bound": self.bound, "d": self.d, "N": self.N, "M": self.M}


def nu_bound_from_acylindricity(table: Sequence[tuple[float, int]], rinj: float, d: float | None = None) -> NuBound:
    """N + M with M the least integer such that M rinj >= d.

    With ``d`` given, N is read at the first tabulated distance >= d;
    otherwise the best bound over all positive tabulated distances is used.
    """
    rinj = float(rinj)
    if not rinj > 0:
        raise InvalidInput("rinj must be positive for the nu bound")
    if not table:
        raise InvalidInput("acylindricity table is empty")
    eps = config.tol()
    rows = sorted(table)
    if d is not None:
        at = [N for dd, N in rows if dd >= d - eps]
        if not at:
            raise InvalidInput(f"table has no distance >= {d}")
        N = int(at[0])
        M = int(math.ceil(d / rinj - eps))
        return NuBound(N + M, float(d), N, M)
    best = None
    for dd, N in rows:
        if dd <= eps:
            continue
        M = int(math.ceil(dd / rinj - eps))
        cand = NuBound(int(N) + M, float(dd), int(N), M)
        if best is None or cand.bound < best.bound:
            best = cand
    if best is None:
        raise InvalidInput("table has no positive distance")
    return best


def nu_lower_bound(window: ActionWindow, delta: float, word_cap: int = 2, max_conjugates: int = 8) -> Bound:
    """Witness search for the definition of nu.

    For elliptic g and loxodromic h generating a non-elementary subgroup,
    count how many conjugates g, h^-1 g h, ... keep a common near-fixed point;
    m such conjugates force nu >= m.
    """
    elliptic, lox = [], []
    for w in window.elements(word_cap)[1:]:
        try:
            cls = classify(window, w)
        except Inconclusive:
            continue
        (lox if cls.loxodromic else elliptic).append(w)
    best, witness = 1, None
    for g in elliptic:
        for h in lox:
            if elementary_surrogate(window, [g, h], delta).elementary is not False:
                continue
            conj = [g]
            m = 1
            while m < max_conjugates:
                hk = window.power(h, m)
                conj.append(window.product(window.inverse_word(hk), g, hk))
                if not characteristic_set(window, conj, delta):
                    break
                m += 1
            if m > best:
                best, witness = m, [g, h]
    return Bound(float(best), "lower", f"witness search over elements up to length {word_cap}", witness)


# kappa -----------------------------------------------------------------------------


def kappa_for_hyperbolic(elliptic_orders: Iterable[int], e: int) -> int:
    """Least common multiple of e and the elliptic orders; all must be odd."""
    orders = [int(o) for o in elliptic_orders]
    if int(e) % 2 == 0:
        raise InvalidInput("e must be odd: the construction assumes a group without involution")
    even = [o for o in orders if o % 2 == 0]
    if even:
        raise InvalidInput(f"even element order {even[0]}: the group is required to have no involution")
    return lcm([int(e)] + orders)


# ledger assembly ---------------------------------------------------------------------


def build_ledger(window: ActionWindow, finite_normal_subgroups: Sequence[GroupTable] | None = None,
                 word_cap: int = 2, l: float | None = None) -> InvariantLedger:
    """Assemble a ledger from a window with certified directions where possible."""
    space = window.space
    if space.edges is not None and len(space.edges) == space.n - 1:
        delta = 0.0
        notes = {"delta": "connected graph with n - 1 edges is a metric tree"}
    else:
        delta = hyperbolicity_delta(space).delta
        notes = {"delta": "exhaustive four-point scan of the window"}
    flags = {"delta": "exact"}
    rinj = structural_rinj_lower_bound(window)
    if rinj is None:
        rinj = injectivity_radius(window, word_cap)
    flags["rinj"], notes["rinj"] = rinj.flag, rinj.note
    groups = list(finite_normal_subgroups) if finite_normal_subgroups else [GroupTable.trivial()]
    e = invariant_e(groups)
    flags["e"] = "exact"
    notes["e"] = f"lcm of holomorph exponents over {len(groups)} supplied finite normal subgroups"
    l_used = ACYLINDRICITY_L_FACTOR * delta if l is None else float(l)
    from .action import acylindricity_table

    table = acylindricity_table(window, l_used)
    if math.isfinite(rinj.value) and rinj.value > 0:
        nb = nu_bound_from_acylindricity(table, rinj.value)
        nu = nb.bound
        notes["nu"] = f"N + M with (d, N, M) = ({nb.d}, {nb.N}, {nb.M}) from the acylindricity table at l = {l_used}"
    else:
        nu = max(N for _, N in table)
        notes["nu"] = "rinj unavailable; falling back to the largest table entry (not a certified bound)"
        flags["nu"] = "lower"
    low = nu_lower_bound(window, delta, min(word_cap, 2))
    if window.tree and delta == 0:
        A = tree_A_upper_bound(window, acylindricity_table(window, 0.0))
    else:
        A = invariant_A_estimate(window, int(low.value), 500.0, delta, min(word_cap, 2))
    flags["A"], notes["A"] = A.flag, A.note
    amalgam = getattr(window, "amalgam", None)
    no_inv = None
    if amalgam is not None:
        no_inv = not (has_involution(amalgam.factors["A"]) or has_involution(amalgam.factors["B"]))
    return InvariantLedger(delta=delta, rinj=rinj.value, e=e, nu=max(nu, int(low.value)), A=A.value,
                           flags=flags, notes=notes, nu_lower=int(low.value), no_involution=no_inv)
