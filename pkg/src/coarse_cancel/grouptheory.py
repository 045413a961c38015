"""Finite groups as multiplication tables, holomorphs, amalgamated products
with finite factors and windows of their Bass-Serre trees.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .action import ActionWindow, PartialIsometry
from .errors import InvalidInput
from .metric_core import FiniteMetricSpace, GraphSpec, build_space, lcm

AUTOMORPHISM_CAP = 64


class GroupTable:
    """A finite group given by its multiplication table (``mult[a, b]`` is the index of ab)."""

    def __init__(self, elements: Sequence[str], mult, check: bool = True):
        self.elements = tuple(str(e) for e in elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise InvalidInput("duplicate group element ids")
        m = np.array(mult, dtype=np.int64)
        n = len(self.elements)
        if m.shape != (n, n) or (n and (m.min() < 0 or m.max() >= n)):
            raise InvalidInput("multiplication table has the wrong shape or entries")
        m.setflags(write=False)
        self.mult = m
        ident = [e for e in range(n) if np.array_equal(m[e], np.arange(n)) and np.array_equal(m[:, e], np.arange(n))]
        if not ident:
            raise InvalidInput("no identity element")
        self.identity = ident[0]
        inv = np.full(n, -1, dtype=np.int64)
        for a in range(n):
            hits = np.flatnonzero(m[a] == self.identity)
            if hits.size != 1 or m[hits[0], a] != self.identity:
                raise InvalidInput(f"element {self.elements[a]} has no two-sided inverse")
            inv[a] = hits[0]
        self.inverse = inv
        if check and n:
            if not np.array_equal(m[m], m[:, m]):
                raise InvalidInput("multiplication is not associative")
            for row in m:
                if len(set(row.tolist())) != n:
                    raise InvalidInput("table is not a Latin square")

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"GroupTable(order={len(self)})"

    # constructors ---------------------------------------------------------

    @classmethod
    def cyclic(cls, n: int) -> "GroupTable":
        if n < 1:
            raise InvalidInput("cyclic group order must be >= 1")
        r = np.arange(n)
        return cls([str(i) for i in range(n)], (r[:, None] + r[None, :]) % n, check=False)

    @classmethod
    def trivial(cls) -> "GroupTable":
        return cls.cyclic(1)

    @classmethod
    def from_permutations(cls, perms: Iterable[Sequence[int]], names: Sequence[str] | None = None,
                          close: bool = True) -> "GroupTable":
        """Group generated by permutations of range(k), composed as (p q)(x) = p(q(x))."""
        perms = [tuple(int(v) for v in p) for p in perms]
        if not perms:
            raise InvalidInput("need at least one permutation")
        k = len(perms[0])
        ident = tuple(range(k))
        order = [ident] + [p for p in perms if p != ident]
        order = list(dict.fromkeys(order))
        if close:
            queue = deque(order)
            seen = set(order)
            gens = list(order)
            while queue:
                p = queue.popleft()
                for g in gens:
                    q = tuple(p[g[x]] for x in range(k))
                    if q not in seen:
                        seen.add(q)
                        order.append(q)
                        queue.append(q)
        pos = {p: i for i, p in enumerate(order)}
        n = len(order)
        arr = np.array(order)
        mult = np.empty((n, n), dtype=np.int64)
        for i, p in enumerate(arr):
            for j, q in enumerate(arr):
                mult[i, j] = pos[tuple(p[q])]
        if names is None or len(names) != n:
            names = ["e" if p == ident else "(" + " ".join(map(str, p)) + ")" for p in order]
        table = cls(names, mult, check=n <= 200)
        table.permutations = order
        return table

    @classmethod
    def symmetric(cls, k: int) -> "GroupTable":
        return cls.from_permutations(itertools.permutations(range(k)))

    @classmethod
    def direct_product(cls, G: "GroupTable", H: "GroupTable") -> "GroupTable":
        n, m = len(G), len(H)
        names = [f"({g},{h})" for g in G.elements for h in H.elements]
        mult = (G.mult[:, None, :, None] * m + H.mult[None, :, None, :]).reshape(n * m, n * m)
        return cls(names, mult, check=False)

    @classmethod
    def from_json(cls, obj: Mapping) -> "GroupTable":
        if not isinstance(obj, Mapping):
            raise InvalidInput("group must be a JSON object")
        if "cyclic" in obj:
            return cls.cyclic(int(obj["cyclic"]))
        if "symmetric" in obj:
            return cls.symmetric(int(obj["symmetric"]))
        try:
            elements = [str(e) for e in obj["elements"]]
            pos = {e: i for i, e in enumerate(elements)}
            mult = [[pos[str(v)] for v in row] for row in obj["table"]]
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed group table: {exc}") from exc
        return cls(elements, mult)

    def to_json(self) -> dict:
        return {"elements": list(self.elements),
                "table": [[self.elements[v] for v in row] for row in self.mult]}

    # queries --------------------------------------------------------------

    def idx(self, element) -> int:
        if isinstance(element, (int, np.integer)) and not isinstance(element, bool):
            return int(element)
        try:
            return self.index[str(element)]
        except KeyError:
            raise InvalidInput(f"unknown group element {element!r}") from None

    def power(self, a: int, k: int) -> int:
        out = self.identity
        base = a if k >= 0 else int(self.inverse[a])
        for _ in range(abs(k)):
            out = int(self.mult[out, base])
        return out

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = int(self.mult[x, a])
            k += 1
        return k

    def orders(self) -> list[int]:
        return [self.element_order(a) for a in range(len(self))]

    def closure(self, gens: Iterable[int]) -> list[int]:
        gens = [int(g) for g in gens]
        seen = {self.identity}
        out = [self.identity]
        queue = deque(out)
        while queue:
            x = queue.popleft()
            for g in gens:
                y = int(self.mult[x, g])
                if y not in seen:
                    seen.add(y)
                    out.append(y)
                    queue.append(y)
        return out

    def generating_set(self) -> list[int]:
        gens: list[int] = []
        have = {self.identity}
        for a in range(len(self)):
            if a not in have:
                gens.append(a)
                have = set(self.closure(gens))
        return gens

    def is_subgroup(self, members: Iterable[int]) -> bool:
        s = set(int(m) for m in members)
        if self.identity not in s:
            return False
        return all(int(self.mult[a, self.inverse[b]]) in s for a in s for b in s)


def group_exponent(G: GroupTable) -> int:
    return lcm(G.orders())


def has_involution(G: GroupTable) -> bool:
    return any(o == 2 for o in G.orders())


def automorphisms(G: GroupTable, cap: int = AUTOMORPHISM_CAP) -> list[tuple[int, ...]]:
    """All automorphisms of G as index permutations, identity first.

    Generator images are chosen by backtracking; each partial assignment is
    extended over the subgroup it generates and discarded on the first
    inconsistency or collision.
    """
    n = len(G)
    if n > cap:
        raise InvalidInput(f"group of order {n} exceeds the automorphism search cap {cap}")
    gens = G.generating_set()
    orders = G.orders()
    found: list[tuple[int, ...]] = []

    def extend(assign: dict[int, int]):
        phi = {G.identity: G.identity}
        queue = deque([G.identity])
        while queue:
            x = queue.popleft()
            for g, img in assign.items():
                y = int(G.mult[x, g])
                fy = int(G.mult[phi[x], img])
                if y in phi:
                    if phi[y] != fy:
                        return None
                else:
                    phi[y] = fy
                    queue.append(y)
        if len(set(phi.values())) != len(phi):
            return None
        return phi

    def search(k: int, assign: dict[int, int]):
        if k == len(gens):
            phi = extend(assign)
            if phi is not None and len(phi) == n:
                perm = tuple(phi[x] for x in range(n))
                arr = np.array(perm)
                if np.array_equal(arr[G.mult], G.mult[np.ix_(arr, arr)]):
                    found.append(perm)
            return
        g = gens[k]
        for cand in range(n):
            if orders[cand] != orders[g]:
                continue
            trial = dict(assign)
            trial[g] = cand
            if extend(trial) is not None:
                search(k + 1, trial)

    search(0, {})
    ident = tuple(range(n))
    found = sorted(set(found))
    found.remove(ident)
    return [ident] + found


def automorphism_group(G: GroupTable, cap: int = AUTOMORPHISM_CAP) -> GroupTable:
    perms = automorphisms(G, cap)
    names = ["id"] + [f"aut{k}" for k in range(1, len(perms))]
    return GroupTable.from_permutations(perms, names=names, close=False)


def holomorph(F: GroupTable, cap: int = AUTOMORPHISM_CAP) -> GroupTable:
    """F x| Aut(F) as the permutations x -> f * phi(x) of F."""
    auts = automorphisms(F, cap)
    perms = []
    for f in range(len(F)):
        for phi in auts:
            perms.append(tuple(int(F.mult[f, phi[x]]) for x in range(len(F))))
    ident = tuple(range(len(F)))
    perms.sort(key=lambda p: (p != ident, p))
    return GroupTable.from_permutations(perms, close=False)


def malnormality_check(G: GroupTable, H: Iterable) -> bool:
    """True when g H g^-1 meets H only in the identity for every g outside H."""
    members = sorted({G.idx(h) for h in H})
    if not G.is_subgroup(members):
        raise InvalidInput("H is not a subgroup")
    hs = set(members)
    for g in range(len(G)):
        if g in hs:
            continue
        gi = int(G.inverse[g])
        for h in members:
            if h == G.identity:
                continue
            if int(G.mult[G.mult[g, h], gi]) in hs:
                return False
    return True


# amalgamated products -------------------------------------------------------------

Syllable = tuple  # (factor "A" | "B", element index in that factor)


@dataclass(frozen=True)
class NormalForm:
    syllables: tuple
    c: int

    @property
    def length(self) -> int:
        return len(self.syllables)


class AmalgamData:
    """A *_C B with C embedded in both factors.

    Left coset representatives of C are fixed at construction: the identity
    for C itself, and otherwise the first element of each coset in the
    factor's element order.  Every element is uniquely t1 t2 ... tk c with
    the t's alternating representatives and c in C.
    """

    def __init__(self, A: GroupTable, B: GroupTable, C: GroupTable, c_in_a: Sequence, c_in_b: Sequence,
                 generators: Mapping[str, tuple] | None = None, names: tuple[str, str] = ("A", "B")):
        self.factors = {"A": A, "B": B}
        self.C = C
        self.embed = {"A": np.array([A.idx(x) for x in c_in_a]), "B": np.array([B.idx(x) for x in c_in_b])}
        self.factor_names = names
        for f, G in self.factors.items():
            emb = self.embed[f]
            if len(emb) != len(C):
                raise InvalidInput(f"embedding of C into {f} has the wrong length")
            if len(set(emb.tolist())) != len(C):
                raise InvalidInput(f"embedding of C into {f} is not injective")
            if not np.array_equal(emb[C.mult], G.mult[np.ix_(emb, emb)]):
                raise InvalidInput(f"embedding of C into {f} is not a homomorphism")
            if len(C) == len(G):
                raise InvalidInput(f"C is all of {f}: the amalgam collapses and has no tree action")
        self.pull = {f: {int(x): k for k, x in enumerate(self.embed[f])} for f in "AB"}
        self.rep: dict[str, np.ndarray] = {}
        self.cpart: dict[str, np.ndarray] = {}
        self.transversal: dict[str, list[int]] = {}
        for f, G in self.factors.items():
            image = set(self.embed[f].tolist())
            rep = np.full(len(G), -1, dtype=np.int64)
            cp = np.full(len(G), -1, dtype=np.int64)
            reps = [G.identity]
            for x in image:
                rep[x] = G.identity
            for x in range(len(G)):
                if rep[x] >= 0:
                    continue
                reps.append(x)
                for c in image:
                    rep[int(G.mult[x, c])] = x
            for x in range(len(G)):
                cp[x] = self.pull[f][int(G.mult[G.inverse[rep[x]], x])]
            self.rep[f], self.cpart[f], self.transversal[f] = rep, cp, reps
        self.generators: dict[str, tuple[str, int]] = {}
        self.primary = list(generators or {})
        for name, (f, x) in (generators or {}).items():
            if f not in self.factors:
                raise InvalidInput(f"generator {name} names unknown factor {f}")
            self.generators[name] = (f, self.factors[f].idx(x))
        self.inverse_names: dict[str, str] = {}
        for name, (f, x) in list(self.generators.items()):
            inv = name.swapcase() if len(name) == 1 and name.swapcase() not in self.generators else name + "'"
            self.inverse_names[name] = inv
            self.inverse_names[inv] = name
        for name, (f, x) in list(self.generators.items()):
            inv = self.inverse_names[name]
            if inv not in self.generators:
                self.generators[inv] = (f, int(self.factors[f].inverse[x]))

    @classmethod
    def free_product(cls, m: int, n: int) -> "AmalgamData":
        """Z/m * Z/n with generators a = 1 in Z/m and b = 1 in Z/n."""
        A, B, C = GroupTable.cyclic(m), GroupTable.cyclic(n), GroupTable.trivial()
        return cls(A, B, C, ["0"], ["0"], {"a": ("A", "1"), "b": ("B", "1")})

    @classmethod
    def from_json(cls, obj: Mapping) -> "AmalgamData":
        if not isinstance(obj, Mapping):
            raise InvalidInput("amalgam must be a JSON object")
        try:
            A, B = GroupTable.from_json(obj["A"]), GroupTable.from_json(obj["B"])
            C = GroupTable.from_json(obj.get("C", {"cyclic": 1}))
            c_in_a = obj.get("C_in_A", [A.elements[A.identity]])
            c_in_b = obj.get("C_in_B", [B.elements[B.identity]])
            gens = {k: (v[0], v[1]) for k, v in obj["generators"].items()}
        except (KeyError, TypeError, IndexError) as exc:
            raise InvalidInput(f"malformed amalgam spec: {exc}") from exc
        return cls(A, B, C, c_in_a, c_in_b, gens)

    def to_json(self) -> dict:
        primary = {k: [self.generators[k][0], self.factors[self.generators[k][0]].elements[self.generators[k][1]]]
                   for k in self.primary}
        return {"A": self.factors["A"].to_json(), "B": self.factors["B"].to_json(), "C": self.C.to_json(),
                "C_in_A": [self.factors["A"].elements[x] for x in self.embed["A"]],
                "C_in_B": [self.factors["B"].elements[x] for x in self.embed["B"]],
                "generators": primary}

    # normal forms -----------------------------------------------------------

    @property
    def identity(self) -> NormalForm:
        return NormalForm((), self.C.identity)

    def times_letter(self, nf: NormalForm, factor: str, x: int) -> NormalForm:
        """Right multiplication of a normal form by an element x of one factor."""
        G = self.factors[factor]
        y = int(G.mult[self.embed[factor][nf.c], x])
        syl = nf.syllables
        if syl and syl[-1][0] == factor:
            y = int(G.mult[syl[-1][1], y])
            syl = syl[:-1]
        r, c = int(self.rep[factor][y]), int(self.cpart[factor][y])
        if r != G.identity:
            syl = syl + ((factor, r),)
        return NormalForm(syl, c)

    def letters(self, nf: NormalForm) -> list[tuple[str, int]]:
        out = list(nf.syllables)
        if nf.c != self.C.identity:
            out.append(("A", int(self.embed["A"][nf.c])))
        return out

    def multiply(self, left: NormalForm, right: NormalForm) -> NormalForm:
        out = left
        for f, x in self.letters(right):
            out = self.times_letter(out, f, x)
        return out

    def inverse(self, nf: NormalForm) -> NormalForm:
        out = self.identity
        for f, x in reversed(self.letters(nf)):
            out = self.times_letter(out, f, int(self.factors[f].inverse[x]))
        return out

    def from_letters(self, letters: Iterable[tuple[str, int]]) -> NormalForm:
        out = self.identity
        for f, x in letters:
            out = self.times_letter(out, f, x)
        return out

    def normal_form(self, word: Iterable[str]) -> NormalForm:
        """Normal form of a word given as a sequence of generator names."""
        out = self.identity
        for name in word:
            try:
                f, x = self.generators[name]
            except KeyError:
                raise InvalidInput(f"unknown generator {name!r}") from None
            out = self.times_letter(out, f, x)
        return out

    def cyclic_length(self, nf: NormalForm) -> int:
        """Syllable length of a cyclically reduced conjugate."""
        while nf.length >= 2 and nf.syllables[0][0] == nf.syllables[-1][0]:
            f, t = nf.syllables[0]
            t_inv = int(self.factors[f].inverse[t])
            nf = self.multiply(self.from_letters([(f, t_inv)]), self.multiply(nf, self.from_letters([(f, t)])))
        return nf.length

    def render(self, nf: NormalForm) -> str:
        parts = [f"{f}{self.factors[f].elements[x]}" for f, x in nf.syllables]
        if nf.c != self.C.identity:
            parts.append(f"C{self.C.elements[nf.c]}")
        return ".".join(parts)

    def spell(self, nf: NormalForm) -> str | None:
        """A word over the generator names for ``nf``, or None if a letter is unreachable."""
        out = []
        for f, x in self.letters(nf):
            w = self._factor_words(f).get(x)
            if w is None:
                return None
            out.extend(w)
        joiner = "" if all(len(k) == 1 for k in self.generators) else "."
        return joiner.join(out)

    def _factor_words(self, f: str) -> dict[int, list[str]]:
        cache = getattr(self, "_fw", {})
        if f not in cache:
            G = self.factors[f]
            letters = sorted((k, x) for k, (ff, x) in self.generators.items() if ff == f)
            words = {G.identity: []}
            queue = deque([G.identity])
            while queue:
                y = queue.popleft()
                for name, x in letters:
                    z = int(G.mult[y, x])
                    if z not in words:
                        words[z] = words[y] + [name]
                        queue.append(z)
            cache[f] = words
            self._fw = cache
        return cache[f]

    def elements_up_to(self, syllables: int) -> list[NormalForm]:
        """All elements with at most ``syllables`` syllables, shortest first."""
        out = []
        for k in range(syllables + 1):
            for start in ("A", "B") if k else ("A",):
                seqs = [[]]
                f = start
                for _ in range(k):
                    seqs = [s + [(f, t)] for s in seqs for t in self.transversal[f][1:]]
                    f = "B" if f == "A" else "A"
                for s in seqs:
                    for c in range(len(self.C)):
                        out.append(NormalForm(tuple(s), c))
        return out


def coset_key(kind: str, nf_syllables: tuple) -> tuple:
    """Key of the vertex g A (kind "A") or g B (kind "B") in the Bass-Serre tree."""
    if nf_syllables and nf_syllables[-1][0] == kind:
        nf_syllables = nf_syllables[:-1]
    return (kind, nf_syllables)


@dataclass(frozen=True)
class ProperPower:
    root: NormalForm
    k: int
    root_word: str | None


def is_proper_power(data: AmalgamData, word: Iterable[str], root_length_cap: int) -> ProperPower | None:
    """Search for r with r**k == word, k >= 2, among roots of at most ``root_length_cap`` syllables.

    ``None`` only means no root exists within the cap.
    """
    target = data.normal_form(word)
    L = data.cyclic_length(target)
    if L < 2:
        raise InvalidInput("element is not loxodromic on the Bass-Serre tree")
    for r in data.elements_up_to(root_length_cap):
        Lr = data.cyclic_length(r)
        if Lr < 2 or L % Lr or L // Lr < 2:
            continue
        k = L // Lr
        acc = data.identity
        for _ in range(k):
            acc = data.multiply(acc, r)
        if acc == target:
            return ProperPower(r, k, data.spell(r))
    return None


def _vertex_label(data: AmalgamData, key: tuple) -> str:
    kind, syl = key
    return f"{kind}/" + ".".join(f"{f}{data.factors[f].elements[x]}" for f, x in syl)


def bass_serre_ball(data: AmalgamData, radius: int) -> tuple[list[tuple], list[tuple[tuple, tuple]]]:
    """Vertices within ``radius`` of the vertex A (breadth-first order) and the edges between them.

    Edges are oriented from their A-vertex to their B-vertex.
    """
    if radius < 1:
        raise InvalidInput("radius must be >= 1")
    base = ("A", ())
    depth = {base: 0}
    order = [base]
    edges = []
    queue = deque([base])
    while queue:
        v = queue.popleft()
        if depth[v] == radius:
            continue
        kind, syl = v
        other = "B" if kind == "A" else "A"
        for t in data.transversal[kind]:
            nbr_syl = syl + ((kind, t),) if t != data.factors[kind].identity else syl
            w = coset_key(other, nbr_syl)
            if w not in depth:
                depth[w] = depth[v] + 1
                order.append(w)
                queue.append(w)
                edges.append((v, w) if kind == "A" else (w, v))
    return order, edges


def bass_serre_window(data: AmalgamData, radius: int, subdivide: int = 1, max_word_length: int = 4,
                      max_power: int = 16) -> tuple[FiniteMetricSpace, ActionWindow]:
    """Ball of the Bass-Serre tree around the vertex A with the generators acting by left multiplication."""
    verts, edges = bass_serre_ball(data, radius)
    label = {v: _vertex_label(data, v) for v in verts}
    spec = GraphSpec(tuple(label[v] for v in verts), tuple((label[u], label[w], 1.0) for u, w in edges))
    space = build_space(spec, subdivide)
    present = set(verts)
    gens = []
    for name, (f, x) in sorted(data.generators.items()):
        act = {}
        for v in verts:
            kind, syl = v
            image = data.from_letters([(f, x)] + list(syl))
            w = coset_key(kind, image.syllables)
            if w in present:
                act[v] = w
        mapping = {label[v]: label[w] for v, w in act.items()}
        if subdivide > 1:
            for u, w in edges:
                if u in act and w in act:
                    for i in range(1, subdivide):
                        mapping[f"{label[u]}~{label[w]}#{i}"] = f"{label[act[u]]}~{label[act[w]]}#{i}"
        gens.append(PartialIsometry(name, mapping, data.inverse_names.get(name)))
    window = ActionWindow(space, gens, max_word_length=max_word_length, tree=True, translation_quantum=2.0,
                          base_point=label[("A", ())], max_power=max_power, label="bass_serre",
                          info={"radius": radius, "subdivide": subdivide})
    window._element_key = lambda w: data.normal_form(window.tokens(w))
    window.amalgam = data
    return space, window


def free_group_window(rank: int, radius: int, max_word_length: int = 4, max_power: int = 16
                      ) -> tuple[FiniteMetricSpace, ActionWindow]:
    """Ball of the Cayley tree of the free group on a, b, ... acting by left multiplication."""
    if not 1 <= rank <= 13:
        raise InvalidInput("rank must be between 1 and 13")
    letters = [chr(ord("a") + i) for i in range(rank)]
    alphabet = letters + [s.upper() for s in letters]

    def reduce_word(w: str) -> str:
        out: list[str] = []
        for ch in w:
            if out and out[-1] == ch.swapcase():
                out.pop()
            else:
                out.append(ch)
        return "".join(out)

    ball = [""]
    frontier = [""]
    for _ in range(radius):
        frontier = [w + s for w in frontier for s in alphabet if not (w and w[-1] == s.swapcase())]
        ball.extend(frontier)
    name = {w: (w or "e") for w in ball}
    present = set(ball)
    edges = [(name[w], name[w[:-1]], 1.0) for w in ball if w]
    space = build_space(GraphSpec(tuple(name[w] for w in ball), tuple(edges)))
    gens = []
    for s in letters:
        mapping = {}
        for w in ball:
            img = reduce_word(s + w)
            if img in present:
                mapping[name[w]] = name[img]
        gens.append(PartialIsometry(s, mapping, s.upper()))
    window = ActionWindow(space, gens, max_word_length=max_word_length, tree=True, translation_quantum=1.0,
                          base_point="e", max_power=max_power, label="free_group",
                          info={"rank": rank, "radius": radius})
    window._element_key = lambda w: reduce_word("".join(window.tokens(w)))
    return space, window
