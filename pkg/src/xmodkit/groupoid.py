"""Finite groupoids with an explicit composition table.

``table[a, b]`` is the index of a∘b (first b, then a), defined when
source(a) == target(b) and -1 otherwise.  Arrow and object identifiers are
strings; indices follow the order in which arrows were supplied.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .algebra import FiniteGroup, GroupHom, homomorphisms
from .errors import (AxiomViolation, IllDefinedComposition, NotNormal, NotTransitive,
                     SizeBoundExceeded, UnknownElement)

MAX_ARROWS = 100_000


class FiniteGroupoid:
    def __init__(self, objects: Sequence[str], arrows: Sequence[tuple[str, str, str]],
                 table: np.ndarray | Callable[[str, str], str], name: str = ""):
        """``arrows`` lists (name, source, target)."""
        if len(arrows) > MAX_ARROWS:
            raise SizeBoundExceeded(f"{len(arrows)} arrows exceeds {MAX_ARROWS}")
        self.name = name
        self.objects = [str(o) for o in objects]
        self.obj_index = {o: i for i, o in enumerate(self.objects)}
        self.arrows = [str(a[0]) for a in arrows]
        self.index = {a: i for i, a in enumerate(self.arrows)}
        if len(self.index) != len(self.arrows):
            raise AxiomViolation("duplicate arrow names")
        try:
            self.src = np.array([self.obj_index[str(a[1])] for a in arrows], dtype=np.int32)
            self.tgt = np.array([self.obj_index[str(a[2])] for a in arrows], dtype=np.int32)
        except KeyError as exc:
            raise UnknownElement(f"arrow endpoint {exc} is not an object") from None
        n = len(self.arrows)
        if isinstance(table, np.ndarray):
            self.table = table.astype(np.int32)
        else:
            t = np.full((n, n), -1, dtype=np.int32)
            for a in range(n):
                for b in np.nonzero(self.tgt == self.src[a])[0]:
                    c = table(self.arrows[a], self.arrows[int(b)])
                    if c not in self.index:
                        raise UnknownElement(f"composite {c!r} is not an arrow")
                    t[a, b] = self.index[c]
            self.table = t
        self._units: np.ndarray | None = None
        self._inverse: np.ndarray | None = None

    def __repr__(self) -> str:
        return f"FiniteGroupoid({self.name or '?'}, objects={len(self.objects)}, arrows={len(self.arrows)})"

    def __len__(self) -> int:
        return len(self.arrows)

    # structure
    @property
    def units(self) -> np.ndarray:
        if self._units is None:
            u = np.full(len(self.objects), -1, dtype=np.int32)
            idem = np.nonzero(self.table[np.arange(len(self)), np.arange(len(self))] == np.arange(len(self)))[0]
            for a in idem:
                if self.src[a] == self.tgt[a] and u[self.src[a]] < 0:
                    u[self.src[a]] = a
            if (u < 0).any():
                raise AxiomViolation("object without identity arrow",
                                     witness=self.objects[int(np.nonzero(u < 0)[0][0])])
            self._units = u
        return self._units

    @property
    def inverse(self) -> np.ndarray:
        if self._inverse is None:
            inv = np.full(len(self), -1, dtype=np.int32)
            units = self.units
            for a in range(len(self)):
                cand = np.nonzero(self.table[a] == units[self.tgt[a]])[0]
                for b in cand:
                    if self.table[b, a] == units[self.src[a]]:
                        inv[a] = b
                        break
            if (inv < 0).any():
                raise AxiomViolation("arrow without inverse", witness=self.arrows[int(np.nonzero(inv < 0)[0][0])])
            self._inverse = inv
        return self._inverse

    def comp(self, a: int, b: int) -> int:
        c = int(self.table[a, b])
        if c < 0:
            raise IllDefinedComposition(f"{self.arrows[a]} and {self.arrows[b]} are not composable")
        return c

    def compose(self, a: str, b: str) -> str:
        return self.arrows[self.comp(self.index[a], self.index[b])]

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def source(self, a: str) -> str:
        return self.objects[self.src[self.index[a]]]

    def target(self, a: str) -> str:
        return self.objects[self.tgt[self.index[a]]]

    def hom(self, y: int, x: int) -> np.ndarray:
        """Indices of arrows x -> y."""
        return np.nonzero((self.tgt == y) & (self.src == x))[0]

    def isotropy_indices(self, x: int) -> np.ndarray:
        return self.hom(x, x)

    def isotropy(self, x: int | str) -> FiniteGroup:
        xi = self.obj_index[x] if isinstance(x, str) else x
        idx = [int(a) for a in self.isotropy_indices(xi)]
        names = [self.arrows[a] for a in idx]
        def mul(p: str, q: str) -> str:
            return self.arrows[int(self.table[self.index[p], self.index[q]])]
        return FiniteGroup(names, mul, self.arrows[int(self.units[xi])], name=f"I{self.objects[xi]}", check=False)

    def is_transitive(self) -> bool:
        n = len(self.objects)
        reach = np.zeros((n, n), dtype=bool)
        reach[self.tgt, self.src] = True
        return bool(reach.all())

    def orbits(self) -> list[list[int]]:
        seen, out = set(), []
        for x in range(len(self.objects)):
            if x in seen:
                continue
            orb = sorted({int(y) for y in self.tgt[self.src == x]})
            seen.update(orb)
            out.append(orb)
        return out

    def to_doc(self) -> dict:
        return {"objects": list(self.objects),
                "arrows": [[a, self.objects[self.src[i]], self.objects[self.tgt[i]]]
                           for i, a in enumerate(self.arrows)],
                "compose": [[self.arrows[a], self.arrows[b], self.arrows[int(self.table[a, b])]]
                            for a, b in zip(*np.nonzero(self.table >= 0))]}

    @classmethod
    def from_doc(cls, doc: Mapping, groups: Mapping[str, FiniteGroup] | None = None) -> "FiniteGroupoid":
        if "pair_over" in doc:
            objs = [str(o) for o in doc["pair_over"]]
            if "vertex" in doc:
                h = doc["vertex"]
                if isinstance(h, str):
                    from .algebra import standard_group
                    h = (groups or {}).get(h) or standard_group(h)
                return trivialized(objs, h)
            return pair_groupoid(objs)
        arrows = [tuple(map(str, a)) for a in doc["arrows"]]
        comp = {(a, b): c for a, b, c in doc["compose"]}

        def table(a, b):
            if (a, b) not in comp:
                raise IllDefinedComposition(f"no composite given for {a}, {b}")
            return comp[(a, b)]
        return cls(doc["objects"], arrows, table, name=doc.get("name", ""))


def trivialized(objects: Sequence[str], h: FiniteGroup, name: str = "") -> FiniteGroupoid:
    """P x H x P with (z, a, y)(y, b, x) = (z, ab, x); arrow "z:a:x"."""
    objs = [str(o) for o in objects]
    p, m = len(objs), len(h)
    hel = list(h.elements)
    hidx = {e: i for i, e in enumerate(hel)}
    mt = np.array([[hidx[h.mul(a, b)] for b in hel] for a in hel], dtype=np.int32)
    arrows = []
    for t in range(p):
        for k in range(m):
            for s in range(p):
                arrows.append((f"{objs[t]}:{hel[k]}:{objs[s]}", objs[s], objs[t]))
    n = len(arrows)
    if n > MAX_ARROWS:
        raise SizeBoundExceeded(f"{n} arrows exceeds {MAX_ARROWS}")
    idx = np.arange(n)
    T, K, S = idx // (m * p), (idx // p) % m, idx % p
    comp = S[:, None] == T[None, :]
    prod = (T[:, None] * m + mt[K[:, None], K[None, :]]) * p + S[None, :]
    table = np.where(comp, prod, -1).astype(np.int32)
    g = FiniteGroupoid(objs, arrows, table, name=name or f"P x {h.name} x P")
    g.vertex_group = h
    return g


def pair_groupoid(objects: Sequence[str]) -> FiniteGroupoid:
    from .algebra import trivial_group
    return trivialized(objects, trivial_group(), name="pair")


def disjoint_union(a: FiniteGroupoid, b: FiniteGroupoid) -> FiniteGroupoid:
    if set(a.objects) & set(b.objects):
        raise AxiomViolation("object sets overlap")
    if set(a.arrows) & set(b.arrows):
        raise AxiomViolation("arrow sets overlap")
    na = len(a)
    arrows = [(x, a.objects[a.src[i]], a.objects[a.tgt[i]]) for i, x in enumerate(a.arrows)]
    arrows += [(x, b.objects[b.src[i]], b.objects[b.tgt[i]]) for i, x in enumerate(b.arrows)]
    n = len(arrows)
    t = np.full((n, n), -1, dtype=np.int32)
    t[:na, :na] = a.table
    t[na:, na:] = np.where(b.table >= 0, b.table + na, -1)
    return FiniteGroupoid(a.objects + b.objects, arrows, t, name=f"{a.name}+{b.name}")


# --- validation -------------------------------------------------------------------

@dataclass
class GroupoidReport:
    violations: list[tuple[str, tuple]] = field(default_factory=list)
    transitive: bool = False
    vertex_orders: list[int] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations


def validate_groupoid(g: FiniteGroupoid) -> GroupoidReport:
    rep = GroupoidReport()
    v = rep.violations
    n = len(g)
    if n == 0:
        rep.transitive = not g.objects
        return rep
    t = g.table
    comp = g.src[:, None] == g.tgt[None, :]
    bad = np.argwhere(comp != (t >= 0))
    if len(bad):
        a, b = map(int, bad[0])
        v.append(("composability", (g.arrows[a], g.arrows[b])))
        return rep
    a_idx, b_idx = np.nonzero(comp)
    c = t[a_idx, b_idx]
    if (c >= n).any():
        v.append(("composite out of range", ()))
        return rep
    wrong = np.nonzero((g.src[c] != g.src[b_idx]) | (g.tgt[c] != g.tgt[a_idx]))[0]
    if len(wrong):
        k = wrong[0]
        v.append(("source/target of composite", (g.arrows[a_idx[k]], g.arrows[b_idx[k]])))
        return rep
    # associativity over composable triples, grouped by the middle arrow
    for b in range(n):
        left = np.nonzero(g.src == g.tgt[b])[0]
        right = np.nonzero(g.tgt == g.src[b])[0]
        ab = t[left, b]
        bc = t[b, right]
        lhs = t[ab[:, None], right[None, :]]
        rhs = t[left[:, None], bc[None, :]]
        diff = np.argwhere(lhs != rhs)
        if len(diff):
            i, j = diff[0]
            v.append(("associativity", (g.arrows[left[i]], g.arrows[b], g.arrows[right[j]])))
            return rep
    try:
        units = g.units
    except AxiomViolation as exc:
        v.append(("identity", (exc.witness,)))
        return rep
    ar = np.arange(n)
    if (t[units[g.tgt], ar] != ar).any() or (t[ar, units[g.src]] != ar).any():
        k = int(np.nonzero((t[units[g.tgt], ar] != ar) | (t[ar, units[g.src]] != ar))[0][0])
        v.append(("unit law", (g.arrows[k],)))
        return rep
    try:
        g.inverse
    except AxiomViolation as exc:
        v.append(("inverse", (exc.witness,)))
        return rep
    rep.transitive = g.is_transitive()
    rep.vertex_orders = [len(g.isotropy_indices(x)) for x in range(len(g.objects))]
    return rep


def check_groupoid(g: FiniteGroupoid) -> FiniteGroupoid:
    rep = validate_groupoid(g)
    if not rep.valid:
        kind, wit = rep.violations[0]
        raise AxiomViolation(f"groupoid axiom fails: {kind}", witness=wit)
    return g


# --- morphisms --------------------------------------------------------------------

@dataclass
class GroupoidMorphism:
    source: FiniteGroupoid
    target: FiniteGroupoid
    obj_map: np.ndarray
    arrow_map: np.ndarray

    def __call__(self, a: str) -> str:
        return self.target.arrows[int(self.arrow_map[self.source.index[a]])]

    def violations(self) -> list[tuple]:
        s, t = self.source, self.target
        out = []
        m = self.arrow_map
        if (t.src[m] != self.obj_map[s.src]).any() or (t.tgt[m] != self.obj_map[s.tgt]).any():
            k = int(np.nonzero((t.src[m] != self.obj_map[s.src]) | (t.tgt[m] != self.obj_map[s.tgt]))[0][0])
            out.append(("endpoints", (s.arrows[k],)))
            return out
        a_idx, b_idx = np.nonzero(s.table >= 0)
        lhs = m[s.table[a_idx, b_idx]]
        rhs = t.table[m[a_idx], m[b_idx]]
        bad = np.nonzero(lhs != rhs)[0]
        if len(bad):
            k = bad[0]
            out.append(("composition", (s.arrows[a_idx[k]], s.arrows[b_idx[k]])))
        return out

    def is_morphism(self) -> bool:
        return not self.violations()

    def is_isomorphism(self) -> bool:
        return (self.is_morphism() and len(set(self.arrow_map.tolist())) == len(self.target) == len(self.source)
                and len(set(self.obj_map.tolist())) == len(self.target.objects) == len(self.source.objects))

    def compose(self, other: "GroupoidMorphism") -> "GroupoidMorphism":
        """self ∘ other."""
        return GroupoidMorphism(other.source, self.target, self.obj_map[other.obj_map],
                                self.arrow_map[other.arrow_map])

    def kernel_arrows(self) -> np.ndarray:
        return np.nonzero(np.isin(self.arrow_map, self.target.units))[0]

    @staticmethod
    def identity(g: FiniteGroupoid) -> "GroupoidMorphism":
        return GroupoidMorphism(g, g, np.arange(len(g.objects)), np.arange(len(g)))


def morphism_from_function(src: FiniteGroupoid, tgt: FiniteGroupoid, obj: Callable[[str], str],
                           arr: Callable[[str], str]) -> GroupoidMorphism:
    om = np.array([tgt.obj_index[obj(o)] for o in src.objects], dtype=np.int32)
    am = np.array([tgt.index[arr(a)] for a in src.arrows], dtype=np.int32)
    return GroupoidMorphism(src, tgt, om, am)


# --- bundles and representations ----------------------------------------------------

@dataclass
class GroupBundle:
    base: list[str]
    fibers: dict[str, FiniteGroup]
    model: FiniteGroup | None = None
    trivializations: dict[str, GroupHom] | None = None    # model -> fiber

    def __post_init__(self):
        if set(self.fibers) != set(self.base):
            raise AxiomViolation("bundle fibres do not match the base")
        if self.trivializations:
            for x, t in self.trivializations.items():
                if not (t.is_hom() and t.is_bijective()):
                    raise AxiomViolation("trivialization is not an isomorphism", witness=x)

    def elements(self) -> list[tuple[str, str]]:
        return [(x, f) for x in self.base for f in self.fibers[x].elements]

    @staticmethod
    def constant(base: Sequence[str], h: FiniteGroup) -> "GroupBundle":
        return GroupBundle(list(base), {x: h for x in base}, h,
                           {x: GroupHom.identity(h) for x in base})


def gauge_bundle(g: FiniteGroupoid) -> GroupBundle:
    return GroupBundle(list(g.objects), {x: g.isotropy(i) for i, x in enumerate(g.objects)})


@dataclass
class GroupoidRepresentation:
    groupoid: FiniteGroupoid
    bundle: GroupBundle
    action: Callable[[str, str], str]      # (arrow name, fibre element over its source)

    def act(self, a: str, f: str) -> str:
        return self.action(a, f)


@dataclass
class RepresentationReport:
    conditions: dict[str, bool]
    witnesses: dict[str, tuple]

    @property
    def valid(self) -> bool:
        return all(self.conditions.values())


def validate_representation(r: GroupoidRepresentation) -> RepresentationReport:
    g, b = r.groupoid, r.bundle
    cond = {"1_target": True, "2_composition": True, "3_unit": True, "4_isomorphism": True}
    wit: dict[str, tuple] = {}
    cache: dict[tuple[int, str], str] = {}

    def act(a: int, f: str) -> str:
        key = (a, f)
        if key not in cache:
            cache[key] = r.action(g.arrows[a], f)
        return cache[key]

    for a in range(len(g)):
        x, y = g.objects[g.src[a]], g.objects[g.tgt[a]]
        fx, fy = b.fibers[x], b.fibers[y]
        imgs = {}
        for f in fx.elements:
            v = act(a, f)
            imgs[f] = v
            if v not in fy and cond["1_target"]:
                cond["1_target"] = False
                wit["1_target"] = (g.arrows[a], f)
        if not cond["1_target"]:
            continue
        if cond["4_isomorphism"]:
            if len(set(imgs.values())) != len(fy) or len(fx) != len(fy) or any(
                    imgs[fx.mul(p, q)] != fy.mul(imgs[p], imgs[q]) for p in fx.elements for q in fx.elements):
                cond["4_isomorphism"] = False
                wit["4_isomorphism"] = (g.arrows[a],)
    for x in range(len(g.objects)):
        u = int(g.units[x])
        for f in b.fibers[g.objects[x]].elements:
            if act(u, f) != f:
                cond["3_unit"] = False
                wit["3_unit"] = (g.arrows[u], f)
                break
    if cond["1_target"]:
        a_idx, b_idx = np.nonzero(g.table >= 0)
        for a, c in zip(a_idx.tolist(), b_idx.tolist()):
            ac = int(g.table[a, c])
            for f in b.fibers[g.objects[g.src[c]]].elements:
                if act(a, act(c, f)) != act(ac, f):
                    cond["2_composition"] = False
                    wit["2_composition"] = (g.arrows[a], g.arrows[c], f)
                    break
            if not cond["2_composition"]:
                break
    return RepresentationReport(cond, wit)


def conjugation_representation(g: FiniteGroupoid) -> GroupoidRepresentation:
    """Action of g on its gauge bundle by ξ ↦ ξ n ξ⁻¹."""
    def action(a: str, n: str) -> str:
        ai = g.index[a]
        return g.arrows[g.comp(g.comp(ai, g.index[n]), g.inv(ai))]
    return GroupoidRepresentation(g, gauge_bundle(g), action)


# --- trivializations ------------------------------------------------------------------

@dataclass
class Trivialization:
    """Spanning-tree identification of a transitive groupoid with P x H x P."""
    groupoid: FiniteGroupoid
    base: int
    tree: np.ndarray              # tree[x] = arrow base -> x
    vertex: FiniteGroup           # isotropy at the base point

    def coords(self, a: int) -> tuple[int, str, int]:
        g = self.groupoid
        x, y = int(g.src[a]), int(g.tgt[a])
        h = g.comp(g.comp(g.inv(int(self.tree[y])), a), int(self.tree[x]))
        return y, g.arrows[h], x

    def arrow(self, y: int, h: str, x: int) -> int:
        g = self.groupoid
        return g.comp(g.comp(int(self.tree[y]), g.index[h]), g.inv(int(self.tree[x])))


def trivialize(g: FiniteGroupoid, base: int = 0) -> Trivialization:
    if not g.is_transitive():
        raise NotTransitive("groupoid is not transitive")
    tree = np.array([int(g.hom(x, base)[0]) if x != base else int(g.units[base])
                     for x in range(len(g.objects))], dtype=np.int32)
    return Trivialization(g, base, tree, g.isotropy(base))


# --- extensions and quotients -------------------------------------------------------

@dataclass
class GroupoidExtension:
    kernel: GroupBundle
    total: FiniteGroupoid
    quotient: FiniteGroupoid
    iota: Callable[[str, str], str]        # (object, fibre element) -> isotropy arrow of total
    pi: GroupoidMorphism

    def iota_index(self, x: str, f: str) -> int:
        return self.total.index[self.iota(x, f)]


@dataclass
class ExtensionReport:
    conditions: dict[str, bool]
    witnesses: dict[str, tuple]

    @property
    def valid(self) -> bool:
        return all(self.conditions.values())


def validate_extension(e: GroupoidExtension) -> ExtensionReport:
    cond, wit = {}, {}
    tot, q = e.total, e.quotient
    cond["pi_morphism"] = e.pi.is_morphism()
    cond["pi_identity_on_objects"] = [tot.objects[i] for i in range(len(tot.objects))] == \
        [q.objects[int(o)] for o in e.pi.obj_map]
    cond["pi_surjective"] = len(set(e.pi.arrow_map.tolist())) == len(q)
    ok_iota = True
    images = set()
    for x in e.kernel.base:
        xi = tot.obj_index[x]
        fib = e.kernel.fibers[x]
        img = {}
        for f in fib.elements:
            a = e.iota_index(x, f)
            if tot.src[a] != xi or tot.tgt[a] != xi:
                ok_iota = False
                wit["iota_isotropy"] = (x, f)
            img[f] = a
        if len(set(img.values())) != len(fib):
            ok_iota = False
            wit["iota_injective"] = (x,)
        for f1 in fib.elements:
            for f2 in fib.elements:
                if tot.table[img[f1], img[f2]] != img[fib.mul(f1, f2)]:
                    ok_iota = False
                    wit["iota_hom"] = (x, f1, f2)
        images |= set(img.values())
    cond["iota_injective_hom"] = ok_iota
    kern = set(e.pi.kernel_arrows().tolist())
    cond["exact"] = kern == images
    if not cond["exact"]:
        wit["exact"] = tuple(sorted(tot.arrows[a] for a in kern ^ images))[:3]
    return ExtensionReport(cond, wit)


def quotient_by_normal_subbundle(g: FiniteGroupoid, n: Mapping[str, Iterable[str]]
                                 ) -> tuple[FiniteGroupoid, GroupoidMorphism]:
    """Ω/N for N_x ⊆ Ω_x^x closed under conjugation by all arrows."""
    nsets = {g.obj_index[x]: {g.index[a] for a in arrs} for x, arrs in n.items()}
    for x in range(len(g.objects)):
        nsets.setdefault(x, {int(g.units[x])})
        iso = set(g.isotropy_indices(x).tolist())
        s = nsets[x]
        if not s <= iso:
            raise NotNormal("N is not inside the isotropy", witness=g.objects[x])
        if any(int(g.table[a, b]) not in s for a in s for b in s) or int(g.units[x]) not in s:
            raise NotNormal("N_x is not a subgroup", witness=g.objects[x])
    for a in range(len(g)):
        ai = g.inv(a)
        for m in nsets[int(g.src[a])]:
            c = g.comp(g.comp(a, m), ai)
            if c not in nsets[int(g.tgt[a])]:
                raise NotNormal("N is not normal", witness=(g.arrows[a], g.arrows[m]))
    cls = np.full(len(g), -1, dtype=np.int32)
    reps: list[int] = []
    for a in range(len(g)):
        if cls[a] >= 0:
            continue
        members = [g.comp(m, a) for m in nsets[int(g.tgt[a])]]
        rep = min(members)
        k = len(reps)
        reps.append(rep)
        cls[members] = k
    arrows = [(g.arrows[r], g.objects[g.src[r]], g.objects[g.tgt[r]]) for r in reps]
    k = len(reps)
    rep_arr = np.array(reps)
    t = np.full((k, k), -1, dtype=np.int32)
    comp = g.src[rep_arr][:, None] == g.tgt[rep_arr][None, :]
    ai, bi = np.nonzero(comp)
    t[ai, bi] = cls[g.table[rep_arr[ai], rep_arr[bi]]]
    q = FiniteGroupoid(g.objects, arrows, t, name=f"{g.name}/N")
    # well-definedness: composite class independent of representatives
    a_idx, b_idx = np.nonzero(g.table >= 0)
    if (cls[g.table[a_idx, b_idx]] != t[cls[a_idx], cls[b_idx]]).any():
        raise IllDefinedComposition("quotient composition depends on representatives")
    proj = GroupoidMorphism(g, q, np.arange(len(g.objects)), cls)
    return q, proj


# --- isomorphism search ----------------------------------------------------------------

@dataclass
class IsoConstraints:
    """Extra structure an isomorphism must respect.

    ``arrow_ok(a, b)``: may arrow a of the source go to arrow b of the target.
    ``actions``: pairs of arrow permutations (source, target) that must
    intertwine: F(σ(a)) = σ'(F(a)).
    """
    arrow_ok: Callable[[int, int], bool] | None = None
    actions: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)


def find_isomorphism(a: FiniteGroupoid, b: FiniteGroupoid, obj_map: Sequence[int] | None = None,
                     constraints: IsoConstraints | None = None, bound: int = 10_000,
                     first_only: bool = True, vertex_isos: Sequence[GroupHom] | None = None
                     ) -> list[GroupoidMorphism]:
    """Isomorphisms of transitive groupoids over a fixed object bijection.

    F is determined by a vertex group isomorphism at the base object and the
    images of spanning-tree arrows; these are chosen object by object, and
    every arrow between already-placed objects is checked as soon as it is
    determined.
    """
    if len(a) > bound or len(b) > bound:
        raise SizeBoundExceeded(f"isomorphism search limited to {bound} arrows")
    if len(a) != len(b) or len(a.objects) != len(b.objects):
        return []
    om = np.array(obj_map if obj_map is not None else range(len(a.objects)), dtype=np.int32)
    ta, tb = trivialize(a), trivialize(b, base=int(om[0]))
    cons = constraints or IsoConstraints()
    inv_actions = [np.argsort(sa) for sa, _ in cons.actions]
    va, vb = ta.vertex, tb.vertex
    isos = homomorphisms(va, vb, bijective=True) if vertex_isos is None else list(vertex_isos)
    found: list[GroupoidMorphism] = []
    nobj = len(a.objects)
    order = list(range(nobj))
    order.remove(ta.base)
    order = [ta.base] + order
    # arrows grouped by (target, source)
    for phi in isos:
        amap = np.full(len(a), -1, dtype=np.int32)
        tree_img = np.full(nobj, -1, dtype=np.int32)

        def image(arr: int) -> int:
            y, h, x = ta.coords(arr)
            mid = b.index[phi(h)]
            return b.comp(b.comp(int(tree_img[y]), mid), b.inv(int(tree_img[x])))

        def place(pos: int) -> bool:
            if pos == nobj:
                return True
            x = order[pos]
            cands = [int(b.units[om[x]])] if pos == 0 else \
                [int(c) for c in b.hom(int(om[x]), int(om[ta.base]))]
            placed = order[:pos + 1]
            for c in cands:
                tree_img[x] = c
                newly = [int(arr) for y in placed for arr in np.concatenate([a.hom(x, y), a.hom(y, x)])]
                newly = sorted(set(newly))
                ok = True
                for arr in newly:
                    img = image(arr)
                    if cons.arrow_ok is not None and not cons.arrow_ok(arr, img):
                        ok = False
                        break
                    amap[arr] = img
                if ok:
                    for (sa, sb), sa_inv in zip(cons.actions, inv_actions):
                        src_set = np.unique(np.concatenate([np.array(newly), sa_inv[newly]]))
                        src_set = src_set[amap[src_set] >= 0]
                        moved = sa[src_set]
                        known = amap[moved] >= 0
                        if (amap[moved][known] != sb[amap[src_set]][known]).any():
                            ok = False
                            break
                if ok and place(pos + 1):
                    return True
                for arr in newly:
                    amap[arr] = -1
            tree_img[x] = -1
            return False

        if place(0):
            f = GroupoidMorphism(a, b, om.copy(), amap.copy())
            if f.is_isomorphism():
                found.append(f)
                if first_only:
                    return found
    return found
