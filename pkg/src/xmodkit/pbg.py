"""PBG-groupoids over a finite principal atlas P = M x G.

Points are pairs (m, g), labelled "m@g"; G acts on the right by
(m, g).h = (m, gh).  The chart P_i = U_i x G has one sheet U_i x {g} per
group element, and transition data are constant on sheets.  Gluing works in
global coordinates: every glued groupoid is P x H x P with arrows (u, h, v),
and each chart i carries a frame σ̄_i(u) in H such that the chart-local
coordinate of (u, h, v) is σ̄_i(u)⁻¹ h σ̄_i(v).

Representations φ_i(g) act on the right: φ_i(gh) = φ_i(h) ∘ φ_i(g).
"""
from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import linalg as la
from .algebra import (AbelianCoordinates, FiniteGroup, GroupHom, GroupXMod, center,
                      inner_automorphism)
from .errors import (AxiomViolation, IllDefinedComposition, NoEquivariantLift, NotACocycle,
                     NotCentral, NotIsometablic, NotTransitive, ObstructionNonzero,
                     RelationNotEquivalence, SchemaError, SectionsNotIsometablic,
                     SizeBoundExceeded)
from .groupoid import (FiniteGroupoid, GroupBundle, GroupoidExtension, GroupoidMorphism, quotient_by_normal_subbundle,
                       GroupoidRepresentation, IsoConstraints, find_isomorphism, trivialize, trivialized,
                       validate_extension, validate_groupoid)
from .site import CechComplex, CentralCochain, Nerve, PrincipalAtlas, _natural_key, single_chart

LIFT_SEARCH_LIMIT = 1 << 16


class _Tab:
    """Index tables for a small group."""

    def __init__(self, g: FiniteGroup):
        self.g = g
        self.el = list(g.elements)
        self.ix = {x: i for i, x in enumerate(self.el)}
        self.mt = np.array([[self.ix[g.mul(a, b)] for b in self.el] for a in self.el], dtype=np.int32)
        self.inv = np.array([self.ix[g.inv(a)] for a in self.el], dtype=np.int32)
        self.e = self.ix[g.identity]

    def hom_array(self, f: GroupHom) -> np.ndarray:
        return np.array([self.ix[f(x)] for x in self.el], dtype=np.int32)

    def conj(self, a: int, b: int) -> int:
        return int(self.mt[self.mt[a, b], self.inv[a]])


# --- atlas helpers -------------------------------------------------------------------

class _Geometry:
    """Cached index data for a PrincipalAtlas."""

    def __init__(self, atlas: PrincipalAtlas):
        self.atlas = atlas
        n = atlas.nerve
        self.G = atlas.group
        self.points = atlas.points
        self.labels = [atlas.label(u) for u in self.points]
        self.pidx = {u: k for k, u in enumerate(self.points)}
        self.nch = n.n
        self.chart_pts = [[self.pidx[u] for u in atlas.chart_points(i)] for i in range(n.n)]
        self.in_chart = [set(c) for c in self.chart_pts]
        self.home = [min(n.charts_of(m)) for m, _ in self.points]
        e = self.G.identity
        self.u0 = self.pidx[(atlas.basepoint, e)]
        self.ui = [self.pidx[(b, e)] for b in atlas.chart_basepoints]
        self.edges = n.of_degree(1)
        self.triangles = n.of_degree(2)
        self.tetrahedra = n.of_degree(3)

    def move(self, u: int, g: str) -> int:
        m, h = self.points[u]
        return self.pidx[(m, self.G.mul(h, g))]

    def sheet(self, u: int) -> str:
        return self.points[u][1]

    def overlap(self, *charts: int) -> list[str]:
        s = set(self.atlas.nerve.charts[charts[0]])
        for c in charts[1:]:
            s &= self.atlas.nerve.charts[c]
        return sorted(s, key=_natural_key)

    def anchor(self, i: int, j: int) -> int:
        """u_ij: first point of U_ij on the identity sheet."""
        return self.pidx[(self.overlap(i, j)[0], self.G.identity)]

    def triples(self) -> list[tuple[int, int, int]]:
        """Ordered chart triples with nonempty common overlap."""
        out = []
        for t in self.triangles:
            out.extend(itertools.permutations(t))
        for i, j in self.edges:
            out += [(i, j, i), (j, i, j), (i, i, j), (i, j, j), (j, j, i), (j, i, i)]
        return out


_GEOM: dict[int, _Geometry] = {}


def geometry(atlas: PrincipalAtlas) -> _Geometry:
    key = id(atlas)
    g = _GEOM.get(key)
    if g is None or g.atlas is not atlas:
        g = _Geometry(atlas)
        _GEOM[key] = g
    return g


def trivial_atlas(nerve: Nerve) -> PrincipalAtlas:
    from .algebra import trivial_group
    return PrincipalAtlas(nerve, trivial_group())


# --- representation families -----------------------------------------------------------

@dataclass
class RepFamily:
    """φ_i: G -> Aut(H), one per chart, acting on the right."""
    group: FiniteGroup
    h: FiniteGroup
    maps: list[dict[str, GroupHom]]
    pairwise: dict[tuple[int, int], Callable[[str, str], str]] | None = None

    def __call__(self, i: int, g: str) -> GroupHom:
        return self.maps[i][g]

    def problems(self) -> list[tuple]:
        G, out = self.group, []
        for i, m in enumerate(self.maps):
            if set(m) != set(G.elements):
                out.append(("domain", i))
                continue
            if m[G.identity] != GroupHom.identity(self.h):
                out.append(("identity", i))
            for g in G:
                if not (m[g].is_hom() and m[g].is_bijective()):
                    out.append(("automorphism", i, g))
            for a in G:
                for b in G:
                    if m[G.mul(a, b)] != m[b].compose(m[a]):
                        out.append(("right_action", i, a, b))
        if self.pairwise:
            out += self.pairwise_problems()
        return out

    def pairwise_problems(self) -> list[tuple]:
        """Cocycle-morphism law φ_ij(g)(h1 h2) = φ_ik(g)(h1)·φ_kj(g)(h2)."""
        out = []
        pw = self.pairwise or {}
        keys = set(pw)
        for (i, j) in keys:
            for (a, k) in keys:
                if a != i or (k, j) not in keys:
                    continue
                for g in self.group:
                    for x in self.h:
                        for y in self.h:
                            if pw[(i, j)](g, self.h.mul(x, y)) != self.h.mul(pw[(i, k)](g, x), pw[(k, j)](g, y)):
                                out.append(("cocycle_morphism", i, k, j, g))
                                return out
        return out

    @classmethod
    def uniform(cls, group: FiniteGroup, h: FiniteGroup, charts: int,
                rep: Callable[[str], GroupHom] | None = None) -> "RepFamily":
        ident = GroupHom.identity(h)
        m = {g: (rep(g) if rep else ident) for g in group}
        return cls(group, h, [dict(m) for _ in range(charts)])

    def to_doc(self) -> dict:
        return {"maps": [{g: {x: f(x) for x in self.h} for g, f in sorted(m.items())} for m in self.maps]}

    @classmethod
    def from_doc(cls, doc: Mapping, group: FiniteGroup, h: FiniteGroup) -> "RepFamily":
        try:
            maps = [{g: GroupHom(h, h, {x: str(v) for x, v in m[g].items()}) for g in group}
                    for m in doc["maps"]]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad representation family: {exc}") from exc
        return cls(group, h, maps)


# --- transition data -------------------------------------------------------------------

class TransitionData:
    """Isometablic transition data constant on sheets.

    ``sheets[(i, j)][g]`` is s_ij on U_ij x {g} for each nerve edge i < j.
    χ, α and the anchor element are derived:
    χ_ij(u, v) = s_ij(u)·s_ji(v), α_ij(u) = I_{s_ij(u)}, anchor s_ij(u_ij).
    """

    def __init__(self, atlas: PrincipalAtlas, h: FiniteGroup, phi: RepFamily,
                 sheets: Mapping[tuple[int, int], Mapping[str, str]], name: str = ""):
        self.atlas, self.h, self.phi, self.name = atlas, h, phi, name
        self.geo = geometry(atlas)
        G = atlas.group
        self.sheets: dict[tuple[int, int], dict[str, str]] = {}
        for e in self.geo.edges:
            row = sheets.get(e)
            if row is None:
                raise SchemaError(f"missing transition for edge {e}")
            self.sheets[e] = {g: h.check(str(row[g])) for g in G}
        extra = set(sheets) - set(self.geo.edges)
        if extra:
            raise SchemaError(f"transition given for non-edge {sorted(extra)[0]}")

    def __repr__(self) -> str:
        return f"TransitionData({self.name or self.h.name} over {self.atlas.nerve.name})"

    # derived data
    def s(self, i: int, j: int, g: str) -> str:
        if i == j:
            return self.h.identity
        if i < j:
            return self.sheets[(i, j)][g]
        return self.h.inv(self.sheets[(j, i)][g])

    def s_at(self, i: int, j: int, u: int) -> str:
        return self.s(i, j, self.geo.sheet(u))

    def chi(self, i: int, j: int, u: int, v: int) -> str:
        return self.h.mul(self.s_at(i, j, u), self.s_at(j, i, v))

    def alpha(self, i: int, j: int, u: int) -> GroupHom:
        return inner_automorphism(self.h, self.s_at(i, j, u))

    def anchor_point(self, i: int, j: int) -> int:
        return self.geo.anchor(min(i, j), max(i, j))

    def anchor(self, i: int, j: int) -> str:
        return self.s_at(i, j, self.anchor_point(i, j))

    def reference(self, i: int, j: int) -> GroupHom:
        """The stored reference automorphism I_{s_ij(u_ij)}."""
        return inner_automorphism(self.h, self.anchor(i, j))

    @classmethod
    def from_chi_alpha(cls, atlas: PrincipalAtlas, h: FiniteGroup, phi: RepFamily,
                       chi: Callable[[int, int, int, int], str], alpha: Callable[[int, int, int], GroupHom],
                       anchors: Mapping[tuple[int, int], str], name: str = "") -> "TransitionData":
        """Rebuild s_ij(u) = χ_ij(u, u_ij)·s_ij(u_ij) and check it reproduces χ and α."""
        geo = geometry(atlas)
        sheets = {}
        for (i, j) in geo.edges:
            a = anchors[(i, j)]
            uij = geo.anchor(i, j)
            row = {}
            for g in atlas.group:
                u = geo.move(uij, g)
                row[g] = h.mul(chi(i, j, u, uij), a)
            sheets[(i, j)] = row
        td = cls(atlas, h, phi, sheets, name=name)
        for (i, j) in geo.edges:
            for a, b in ((i, j), (j, i)):
                pts = [geo.pidx[(m, g)] for m in geo.overlap(i, j) for g in atlas.group]
                for u in pts:
                    if alpha(a, b, u) != td.alpha(a, b, u):
                        raise IllDefinedComposition("α is not I_{s} for the rebuilt s", witness=(a, b, u))
                    for v in pts:
                        if chi(a, b, u, v) != td.chi(a, b, u, v):
                            raise IllDefinedComposition("χ is not s(u)s(v)⁻¹ for the rebuilt s",
                                                        witness=(a, b, u, v))
        return td

    def check_conditions(self) -> tuple[dict[str, bool], dict[str, tuple]]:
        """Conditions (i)–(iv), the sheetwise s-cocycle and the φ family."""
        h, geo, G = self.h, self.geo, self.atlas.group
        cond = {k: True for k in ("phi", "i_cocycle", "ii_anchor", "iii_chi_equivariant",
                                  "iv_alpha_equivariant", "s_cocycle", "v_global_frames")}
        wit: dict[str, tuple] = {}

        def fail(k, w):
            if cond[k]:
                cond[k], wit[k] = False, w

        probs = self.phi.problems()
        if probs:
            fail("phi", probs[0])
        sheet_pts = lambda *c: [geo.pidx[(geo.overlap(*c)[0], g)] for g in G]
        for (i, j, k) in geo.triples():
            pts = sheet_pts(i, j, k)
            for u in pts:
                if h.mul(self.s_at(i, j, u), self.s_at(j, k, u)) != self.s_at(i, k, u):
                    fail("s_cocycle", (i, j, k, geo.labels[u]))
                for v in pts:
                    lhs = self.chi(i, k, u, v)
                    rhs = h.mul(self.chi(i, j, u, v), self.alpha(i, j, v)(self.chi(j, k, u, v)))
                    if lhs != rhs:
                        fail("i_cocycle", (i, j, k, geo.labels[u], geo.labels[v]))
        for (a, b) in geo.edges:
            for (i, j) in ((a, b), (b, a)):
                pts = sheet_pts(i, j)
                uij = self.anchor_point(i, j)
                ref = self.reference(i, j)
                for u in pts:
                    if self.alpha(i, j, u) != inner_automorphism(h, self.chi(i, j, u, uij)).compose(ref):
                        fail("ii_anchor", (i, j, geo.labels[u]))
                    for g in G:
                        ug = geo.move(u, g)
                        pi, pj = self.phi(i, g), self.phi(j, g)
                        for x in h:
                            if self.alpha(i, j, ug)(pj(x)) != pi(self.alpha(i, j, u)(x)):
                                fail("iv_alpha_equivariant", (i, j, geo.labels[u], g, x))
                                break
                        for v in pts:
                            vg = geo.move(v, g)
                            if self.chi(i, j, ug, vg) != pi(self.chi(i, j, u, v)):
                                fail("iii_chi_equivariant", (i, j, geo.labels[u], geo.labels[v], g))
        if cond["iii_chi_equivariant"]:
            try:
                self.global_frames()
            except NotIsometablic as exc:
                fail("v_global_frames", exc.witness)
        return cond, wit

    def defect(self, i: int, j: int, g: str) -> str:
        """λ_ij(g) = φ_i(g)(s_ij(e))⁻¹ s_ij(g)."""
        h = self.h
        return h.mul(h.inv(self.phi(i, g)(self.s(i, j, self.atlas.group.identity))), self.s(i, j, g))

    def global_frames(self) -> dict[str, list[str]]:
        """c_i(g) with λ_ij(g) = c_i(g)⁻¹ c_j(g), normalised at chart 0.

        Without them the chartwise G-actions do not agree around loops of
        the nerve and there is nothing to glue.
        """
        return _integrate(self.h, self.atlas.group, self.geo, self.defect)

    def is_valid(self) -> bool:
        return all(self.check_conditions()[0].values())

    def check(self) -> "TransitionData":
        cond, wit = self.check_conditions()
        for k, ok in cond.items():
            if not ok:
                raise NotIsometablic(f"transition data fails {k}", witness=wit[k])
        return self

    def equivalent_by(self, r: Mapping[int, Mapping[str, str]], phi_twist: bool = True) -> "TransitionData":
        """Data for the sections σ_i·r_i: s'_ij = r_i⁻¹ s_ij r_j, φ'_i(g) = I_{r_i(g)}⁻¹ ∘ φ_i(g) ∘ I_{r_i(e)}."""
        h, G = self.h, self.atlas.group
        sheets = {(i, j): {g: h.prod(h.inv(r[i][g]), self.s(i, j, g), r[j][g]) for g in G}
                  for (i, j) in self.geo.edges}
        maps = []
        for i in range(self.geo.nch):
            m = {}
            for g in G:
                f = self.phi(i, g)
                if phi_twist:
                    f = _twisted_phi(h, f, r[i], g, G.identity)
                m[g] = f
            maps.append(m)
        return TransitionData(self.atlas, h, RepFamily(G, h, maps), sheets, name=self.name + "'")

    def pushforward(self, f: GroupHom, phi: RepFamily) -> "TransitionData":
        sheets = {e: {g: f(x) for g, x in row.items()} for e, row in self.sheets.items()}
        return TransitionData(self.atlas, f.target, phi, sheets, name=self.name)

    def to_doc(self) -> dict:
        labels = self.atlas.nerve.labels
        return {"h": self.h.name, "phi": self.phi.to_doc(),
                "sheets": {f"{labels[i]}-{labels[j]}": dict(sorted(row.items()))
                           for (i, j), row in sorted(self.sheets.items())}}

    @classmethod
    def from_doc(cls, doc: Mapping, atlas: PrincipalAtlas, h: FiniteGroup) -> "TransitionData":
        labels = atlas.nerve.labels
        where = {lab: k for k, lab in enumerate(labels)}
        try:
            sheets = {}
            for key, row in doc["sheets"].items():
                a, b = key.split("-")
                sheets[(where[a], where[b])] = {str(g): str(v) for g, v in row.items()}
            phi = RepFamily.from_doc(doc["phi"], atlas.group, h)
        except (KeyError, ValueError, AttributeError) as exc:
            raise SchemaError(f"bad transition data document: {exc}") from exc
        return cls(atlas, h, phi, sheets)

    def same(self, other: "TransitionData") -> bool:
        G = self.atlas.group
        return (self.sheets == other.sheets and
                all(self.phi(i, g) == other.phi(i, g) for i in range(self.geo.nch) for g in G))


def _integrate(h: FiniteGroup, G: FiniteGroup, geo: _Geometry, lam: Callable[[int, int, str], str],
               root: Callable[[str], str] | None = None) -> dict[str, list[str]]:
    out = {}
    for g in G:
        c: list[str | None] = [None] * geo.nch
        c[0] = root(g) if root else h.identity
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for (a, b) in geo.edges:
                if i not in (a, b):
                    continue
                j = b if a == i else a
                # c_j = c_i λ_ij
                cj = h.mul(c[i], lam(i, j, g) if i < j else h.inv(lam(j, i, g)))
                if c[j] is None:
                    c[j] = cj
                    queue.append(j)
                elif c[j] != cj:
                    raise NotIsometablic("the defects λ(g) have holonomy around a loop of the nerve",
                                         witness=(min(i, j), max(i, j), g))
        if any(x is None for x in c):
            raise NotTransitive("the nerve is not connected")
        out[g] = c
    return out


# --- PBG-groupoids ---------------------------------------------------------------------

@dataclass
class PBGGroupoid:
    groupoid: FiniteGroupoid
    atlas: PrincipalAtlas
    act: dict[str, np.ndarray]                      # g -> arrow permutation ξ ↦ ξg
    vertex: FiniteGroup                             # isotropy group at u0
    vertex_arrows: dict[str, int]                   # vertex element -> arrow index at u0
    sections: dict[int, dict[int, int]] | None = None   # chart -> point -> arrow u0 -> u
    frames: list[dict[int, int]] | None = None      # glued only: σ̄_i(u) as vertex indices
    name: str = ""

    def __post_init__(self):
        geo = geometry(self.atlas)
        if list(self.groupoid.objects) != geo.labels:
            raise SchemaError("groupoid objects must be the atlas points in order")
        self.geo = geo
        self._vertex_of = {a: x for x, a in self.vertex_arrows.items()}

    def obj_perm(self, g: str) -> np.ndarray:
        return np.array([self.geo.move(u, g) for u in range(len(self.geo.points))], dtype=np.int32)

    def vertex_elem(self, a: int) -> str:
        return self._vertex_of[a]

    def arrow_count(self) -> int:
        return len(self.groupoid)


@dataclass
class PBGReport:
    conditions: dict[str, bool]
    witnesses: dict[str, tuple]

    @property
    def valid(self) -> bool:
        return all(self.conditions.values())


def validate_pbg(pg: PBGGroupoid, groupoid_axioms: bool = True) -> PBGReport:
    g_ = pg.groupoid
    G = pg.atlas.group
    cond = {k: True for k in ("groupoid", "bijective", "1_endpoints", "2_units", "3_products",
                              "4_inverses", "action_law", "identity")}
    wit: dict[str, tuple] = {}
    if groupoid_axioms:
        rep = validate_groupoid(g_)
        if not rep.valid:
            cond["groupoid"] = False
            wit["groupoid"] = tuple(rep.violations[:1])
    n = len(g_)
    a_idx, b_idx = np.nonzero(g_.table >= 0)
    for g in G:
        a = pg.act[g]
        op = pg.obj_perm(g)
        if len(np.unique(a)) != n:
            cond["bijective"], wit["bijective"] = False, (g,)
        bad = np.nonzero((g_.src[a] != op[g_.src]) | (g_.tgt[a] != op[g_.tgt]))[0]
        if len(bad) and cond["1_endpoints"]:
            cond["1_endpoints"], wit["1_endpoints"] = False, (g_.arrows[bad[0]], g)
        bad = np.nonzero(a[g_.units] != g_.units[op])[0]
        if len(bad) and cond["2_units"]:
            cond["2_units"], wit["2_units"] = False, (g_.objects[bad[0]], g)
        bad = np.nonzero(a[g_.table[a_idx, b_idx]] != g_.table[a[a_idx], a[b_idx]])[0]
        if len(bad) and cond["3_products"]:
            k = bad[0]
            cond["3_products"], wit["3_products"] = False, (g_.arrows[a_idx[k]], g_.arrows[b_idx[k]], g)
        bad = np.nonzero(a[g_.inverse] != g_.inverse[a])[0]
        if len(bad) and cond["4_inverses"]:
            cond["4_inverses"], wit["4_inverses"] = False, (g_.arrows[bad[0]], g)
        for h in G:
            if (pg.act[h][a] != pg.act[G.mul(g, h)]).any() and cond["action_law"]:
                cond["action_law"], wit["action_law"] = False, (g, h)
    if (pg.act[G.identity] != np.arange(n)).any():
        cond["identity"], wit["identity"] = False, (G.identity,)
    return PBGReport(cond, wit)


def _frames(td: TransitionData, tab: _Tab) -> list[dict[int, int]]:
    geo = td.geo
    fr: list[dict[int, int]] = [dict() for _ in range(geo.nch)]
    for u in range(len(geo.points)):
        i0 = geo.home[u]
        for i in geo.atlas.nerve.charts_of(geo.points[u][0]):
            fr[i][u] = tab.ix[td.s_at(i0, i, u)]
    # the glued frames are consistent only when s is a cocycle on every sheet
    for u in range(len(geo.points)):
        cs = geo.atlas.nerve.charts_of(geo.points[u][0])
        for i in cs:
            for j in cs:
                if int(tab.mt[tab.inv[fr[i][u]], fr[j][u]]) != tab.ix[td.s_at(i, j, u)]:
                    raise RelationNotEquivalence("transition data fail the cocycle condition; the gluing "
                                                 "relation is not an equivalence",
                                                 witness=(i, j, geo.labels[u]))
    return fr


def glue(td: TransitionData, name: str = "") -> PBGGroupoid:
    """The quotient of the disjoint union of the P_i x H x P_i, in global coordinates."""
    h, geo, G = td.h, td.geo, td.atlas.group
    tab = _Tab(h)
    fr = _frames(td, tab)
    p, m = len(geo.points), len(h)
    g_ = trivialized(geo.labels, h, name=name or f"glue({td.name or h.name})")
    n = len(g_)
    idx = np.arange(n)
    T, K, S = idx // (m * p), (idx // p) % m, idx % p
    mt, inv = tab.mt, tab.inv
    act: dict[str, np.ndarray] = {}
    u0 = geo.u0
    i0 = geo.home[u0]
    for g in G:
        og = np.array([geo.move(u, g) for u in range(p)], dtype=np.int32)
        ph = [tab.hom_array(td.phi(i, g)) for i in range(geo.nch)]
        c0 = fr[i0][int(og[u0])]
        Phi = mt[mt[c0, ph[i0]], inv[c0]]
        M = np.full(p, -1, dtype=np.int32)
        M[u0] = tab.e
        queue = deque([u0])
        while queue:
            w = queue.popleft()
            for i in geo.atlas.nerve.charts_of(geo.points[w][0]):
                fi = fr[i]
                for u in geo.chart_pts[i]:
                    if M[u] >= 0:
                        continue
                    loc = mt[inv[fi[u]], fi[w]]
                    img = mt[mt[fi[int(og[u])], ph[i][loc]], inv[fi[int(og[w])]]]
                    M[u] = mt[img, M[w]]
                    queue.append(u)
        if (M < 0).any():
            raise NotTransitive("atlas points are not connected through charts")
        perm = (og[T] * m + mt[mt[M[T], Phi[K]], inv[M[S]]]) * p + og[S]
        # every chart-local arrow must follow the chart formula
        for i in range(geo.nch):
            pts = np.array(geo.chart_pts[i], dtype=np.int32)
            fi = np.full(p, 0, dtype=np.int32)
            for u, x in fr[i].items():
                fi[u] = x
            tt, kk, ss = np.meshgrid(pts, np.arange(m), pts, indexing="ij")
            tt, kk, ss = tt.ravel(), kk.ravel(), ss.ravel()
            loc = mt[mt[inv[fi[tt]], kk], fi[ss]]
            want = mt[mt[fi[og[tt]], ph[i][loc]], inv[fi[og[ss]]]]
            got = (perm[(tt * m + kk) * p + ss] // p) % m
            bad = np.nonzero(want != got)[0]
            if len(bad):
                k = int(bad[0])
                raise IllDefinedComposition("the G-action is not well defined across overlaps",
                                            witness=(i, g_.arrows[(tt[k] * m + kk[k]) * p + ss[k]], g))
        act[g] = perm.astype(np.int32)
    vertex_arrows = {x: (u0 * m + tab.ix[x]) * p + u0 for x in h}
    sections = {i: {u: (u * m + fr[i][u]) * p + u0 for u in geo.chart_pts[i]} for i in range(geo.nch)}
    return PBGGroupoid(g_, td.atlas, act, h, vertex_arrows, sections, fr, name=g_.name)


def canonical_sections(pg: PBGGroupoid) -> dict[int, dict[int, int]]:
    """One global isometablic section, used for every chart.

    On the identity sheet σ(m, e) is the first arrow u0 -> (m, e); elsewhere
    σ(ug) = [σ(u)g]·γ_g for a splitting γ: γ_{hg} = (γ_h g)·γ_g.
    """
    g_, geo, G = pg.groupoid, pg.geo, pg.atlas.group
    u0 = geo.u0
    e = G.identity
    others = [g for g in G.elements if g != e]
    cands = [[int(a) for a in g_.hom(geo.move(u0, g), u0)] for g in others]
    found = None
    for choice in itertools.product(*cands):
        gam = {e: int(g_.units[u0])}
        gam.update(zip(others, choice))
        if all(g_.comp(int(pg.act[b][gam[a]]), gam[b]) == gam[G.mul(a, b)] for a in G for b in G):
            found = gam
            break
    if found is None:
        raise SectionsNotIsometablic("no isometablic sections: the G-action admits no splitting at u0")
    sigma = {}
    for u in range(len(geo.points)):
        mpt, gu = geo.points[u]
        base = geo.pidx[(mpt, e)]
        first = int(g_.units[u0]) if base == u0 else int(g_.hom(base, u0)[0])
        sigma[u] = g_.comp(int(pg.act[gu][first]), found[gu])
    return {i: {u: sigma[u] for u in geo.chart_pts[i]} for i in range(geo.nch)}


def extract_transition_data(pg: PBGGroupoid, sections: Mapping[int, Mapping[int, int]] | None = None,
                            name: str = "") -> TransitionData:
    g_, geo, G, H = pg.groupoid, pg.geo, pg.atlas.group, pg.vertex
    if not g_.is_transitive():
        raise NotTransitive("PBG-groupoid is not transitive")
    sec = sections if sections is not None else (pg.sections or canonical_sections(pg))
    u0 = geo.u0
    for i in range(geo.nch):
        for u in geo.chart_pts[i]:
            a = sec[i].get(u)
            if a is None or g_.src[a] != u0 or g_.tgt[a] != u:
                raise SectionsNotIsometablic("section is not an arrow u0 -> u", witness=(i, geo.labels[u]))
    comp, inv = g_.comp, g_.inv
    for i in range(geo.nch):
        ui = geo.ui[i]
        xi = sec[i][ui]
        for u in geo.chart_pts[i]:
            for g in G:
                act = pg.act[g]
                rhs = comp(comp(int(act[sec[i][u]]), int(act[inv(xi)])), sec[i][geo.move(ui, g)])
                if sec[i][geo.move(u, g)] != rhs:
                    raise SectionsNotIsometablic("sections fail σ_i(ug) = [σ_i(u)g](ξ_i⁻¹g)σ_i(u_ig)",
                                                 witness=(i, geo.labels[u], g))
    sheets = {}
    for (i, j) in geo.edges:
        row = {}
        for mpt in geo.overlap(i, j):
            for g in G:
                u = geo.pidx[(mpt, g)]
                x = pg.vertex_elem(comp(inv(sec[i][u]), sec[j][u]))
                if row.setdefault(g, x) != x:
                    raise SectionsNotIsometablic("transition s_ij is not constant on a sheet",
                                                 witness=(i, j, geo.labels[u]))
        sheets[(i, j)] = row
    maps = []
    for i in range(geo.nch):
        xi = sec[i][geo.ui[i]]
        m = {}
        for g in G:
            act = pg.act[g]
            s_ig = sec[i][geo.move(geo.ui[i], g)]
            xg = int(act[xi])
            mp = {}
            for x in H:
                a = comp(comp(comp(comp(inv(s_ig), xg), int(act[pg.vertex_arrows[x]])), inv(xg)), s_ig)
                mp[x] = pg.vertex_elem(a)
            m[g] = GroupHom(H, H, mp)
        maps.append(m)
    phi = RepFamily(G, H, maps)
    probs = phi.problems()
    if probs:
        raise SectionsNotIsometablic("extracted φ_i is not a right action by automorphisms", witness=probs[0])
    td = TransitionData(pg.atlas, H, phi, sheets, name=name or f"extract({pg.name})")
    cond, wit = td.check_conditions()
    bad = [k for k, ok in cond.items() if not ok]
    if bad:
        raise SectionsNotIsometablic(f"extracted data fail {bad[0]}", witness=wit[bad[0]])
    return td


# --- maps between glued groupoids ------------------------------------------------------

def chartwise_map(pa: PBGGroupoid, pb: PBGGroupoid, left: Callable[[int, int], str],
                  right: Callable[[int, int], str] | None = None) -> GroupoidMorphism:
    """The map given in chart i by (u, h, v) ↦ (u, L_i(u)·h·R_i(v), v).

    Both groupoids must be glued (global frames known).  R defaults to L⁻¹.
    Raises IllDefinedComposition if the chart formulas disagree on overlaps.
    """
    geo = pa.geo
    if pa.frames is None or pb.frames is None:
        raise AxiomViolation("chartwise maps need glued groupoids")
    H = pa.vertex
    tab = _Tab(H)
    if _Tab(pb.vertex).el != tab.el:
        raise AxiomViolation("vertex groups differ")
    mt, inv = tab.mt, tab.inv
    p, m = len(geo.points), len(H)
    Lx = lambda i, u: tab.ix[left(i, u)]
    Rx = (lambda i, u: tab.ix[right(i, u)]) if right else (lambda i, u: int(inv[Lx(i, u)]))
    fa, fb = pa.frames, pb.frames
    KL = np.array([mt[mt[fb[geo.home[u]][u], Lx(geo.home[u], u)], inv[fa[geo.home[u]][u]]]
                   for u in range(p)], dtype=np.int32)
    KR = np.array([mt[mt[fa[geo.home[u]][u], Rx(geo.home[u], u)], inv[fb[geo.home[u]][u]]]
                   for u in range(p)], dtype=np.int32)
    n = len(pa.groupoid)
    idx = np.arange(n)
    T, K, S = idx // (m * p), (idx // p) % m, idx % p
    amap = (T * m + mt[mt[KL[T], K], KR[S]]) * p + S
    for i in range(geo.nch):
        for t in geo.chart_pts[i]:
            for s in geo.chart_pts[i]:
                for k in range(m):
                    loc = mt[mt[inv[fa[i][t]], k], fa[i][s]]
                    img = mt[mt[Lx(i, t), loc], Rx(i, s)]
                    want = mt[mt[fb[i][t], img], inv[fb[i][s]]]
                    if (amap[(t * m + k) * p + s] // p) % m != want:
                        raise IllDefinedComposition("chart formulas disagree on an overlap",
                                                    witness=(i, pa.groupoid.arrows[(t * m + k) * p + s]))
    return GroupoidMorphism(pa.groupoid, pb.groupoid, np.arange(p), amap.astype(np.int32))


def is_pbg_isomorphism(f: GroupoidMorphism, pa: PBGGroupoid, pb: PBGGroupoid) -> bool:
    if not f.is_isomorphism():
        return False
    return all((f.arrow_map[pa.act[g]] == pb.act[g][f.arrow_map]).all() for g in pa.atlas.group)


def find_pbg_isomorphism(pa: PBGGroupoid, pb: PBGGroupoid, bound: int = 10_000, smooth: bool = False,
                         vertex: str = "any") -> GroupoidMorphism | None:
    """Exhaustive search for a G-equivariant isomorphism over the identity of P.

    ``smooth`` asks that F(σ^a_i(u)) = σ^b_i(u)·r_i(u) with r_i constant on every
    sheet of every chart, i.e. that F be locally constant in chart coordinates.
    ``vertex="inner"`` restricts F on the vertex group at u0 to inner automorphisms
    of H under the two vertex identifications.
    """
    ga, gb = pa.groupoid, pb.groupoid
    if list(ga.objects) != list(gb.objects):
        return None
    cons = IsoConstraints(actions=[(pa.act[g], pb.act[g]) for g in pa.atlas.group])
    if smooth:
        if pa.sections is None or pb.sections is None:
            raise AxiomViolation("smooth isomorphism search needs chart sections on both sides")
        geo = pa.geo
        want: dict[int, int] = {}
        for i in range(geo.nch):
            sa, sb = pa.sections[i], pb.sections[i]
            for u in geo.chart_pts[i]:
                for v in geo.chart_pts[i]:
                    if geo.sheet(u) == geo.sheet(v):
                        # σ_i(v)σ_i(u)⁻¹ must go to its counterpart when r_i(u) = r_i(v)
                        want[ga.comp(sa[v], ga.inv(sa[u]))] = gb.comp(sb[v], gb.inv(sb[u]))
        cons.arrow_ok = lambda a, b: want.get(a, b) == b
    vis = None
    ta = trivialize(ga)
    if vertex == "inner":
        base = ta.base
        va, vb = ga.isotropy(base), gb.isotropy(base)
        h = pa.vertex
        # vertex_arrows identify H with the isotropy at u0 = base
        if ga.src[pa.vertex_arrows[h.identity]] != base:
            raise AxiomViolation("vertex identification is not at the search base object")
        a_of = {ga.arrows[pa.vertex_arrows[x]]: x for x in h}
        vis = []
        seen = set()
        for c in h:
            m = {name: gb.arrows[pb.vertex_arrows[h.conj(c, x)]] for name, x in a_of.items()}
            key = tuple(sorted(m.items()))
            if key not in seen:
                seen.add(key)
                vis.append(GroupHom(va, vb, m))
    elif vertex != "any":
        raise AxiomViolation(f"unknown vertex restriction {vertex!r}")
    found = find_isomorphism(ga, gb, constraints=cons, bound=bound, vertex_isos=vis)
    for f in found:
        if is_pbg_isomorphism(f, pa, pb):
            return f
    return None


# --- equivalence of transition data ------------------------------------------------------

def _crossed_homs(G: FiniteGroup, H: FiniteGroup, phi: Mapping[str, GroupHom], values: Sequence[str],
                  pinned: bool = True) -> list[dict[str, str]]:
    """r: G -> values with r(hg) = φ(g)(r(h))·φ(g)(r(e))⁻¹·r(g); pinned forces r(e) = e."""
    e = G.identity
    others = [g for g in G.elements if g != e]
    starts = [H.identity] if pinned else list(values)
    out = []
    for r0 in starts:
        for choice in itertools.product(values, repeat=len(others)):
            r = {e: r0}
            r.update(zip(others, choice))
            ok = True
            for a in G:
                for b in G:
                    f = phi[b]
                    if r[G.mul(a, b)] != H.prod(f(r[a]), H.inv(f(r0)), r[b]):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                out.append(r)
    return out


@dataclass
class EquivalenceResult:
    equivalent: bool
    r: dict[int, dict[str, str]] | None = None
    xi: GroupoidMorphism | None = None
    literal_chi_display: bool | None = None     # does the printed χ′ formula hold for the witness?


def _section_changes(G: FiniteGroup, H: FiniteGroup, phi: Mapping[str, GroupHom],
                     pinned: bool) -> list[dict[str, str]]:
    """Admissible sheetwise r: G -> H, r(g) = φ(g)(c)·r₀(g) with r₀ pinned and crossed, c = r(e)."""
    base = _crossed_homs(G, H, phi, list(H.elements))
    starts = [H.identity] if pinned else list(H.elements)
    return [{g: H.mul(phi[g](c), r0[g]) for g in G} for c in starts for r0 in base]


def _twisted_phi(H: FiniteGroup, phi: GroupHom, r: Mapping[str, str], g: str, e: str) -> GroupHom:
    """I_{r(g)}⁻¹ ∘ φ(g) ∘ I_{r(e)}."""
    return inner_automorphism(H, H.inv(r[g])).compose(phi).compose(inner_automorphism(H, r[e]))


def data_equivalent(a: TransitionData, b: TransitionData, build_map: bool = True,
                    pinned: bool = False) -> EquivalenceResult:
    """Search sheetwise families r_i with s^b_ij = r_i⁻¹ s^a_ij r_j and
    φ^b_i(g) = I_{r_i(hg)}⁻¹ ∘ φ^a_i(g) ∘ I_{r_i(h)} for all h; ``pinned`` forces r_i(e) = e."""
    if a.atlas.nerve.to_doc() != b.atlas.nerve.to_doc() or a.h != b.h or a.atlas.group != b.atlas.group:
        return EquivalenceResult(False)
    H, G, geo = a.h, a.atlas.group, a.geo
    e = G.identity
    per_chart = []
    for i in range(geo.nch):
        cands = []
        pa = {g: a.phi(i, g) for g in G}
        for r in _section_changes(G, H, pa, pinned):
            if all(_twisted_phi(H, pa[g], r, g, e) == b.phi(i, g) for g in G):
                # the twist must not depend on the sheet it is read on
                for hh in G:
                    for g in G:
                        if (inner_automorphism(H, H.inv(r[G.mul(hh, g)])).compose(pa[g])
                                .compose(inner_automorphism(H, r[hh])) != b.phi(i, g)):
                            raise AxiomViolation("section change twist depends on the sheet", witness=(i, hh, g))
                cands.append(r)
        per_chart.append(cands)
    chosen: list[dict[str, str] | None] = [None] * geo.nch

    def ok_edges(k: int) -> bool:
        for (i, j) in geo.edges:
            if max(i, j) != k:
                continue
            ri, rj = chosen[i], chosen[j]
            for g in G:
                if H.prod(H.inv(ri[g]), a.s(i, j, g), rj[g]) != b.s(i, j, g):
                    return False
        return True

    def place(k: int) -> bool:
        if k == geo.nch:
            return True
        for r in per_chart[k]:
            chosen[k] = r
            if ok_edges(k) and place(k + 1):
                return True
        chosen[k] = None
        return False

    if not place(0):
        return EquivalenceResult(False)
    r = {i: dict(chosen[i]) for i in range(geo.nch)}
    rp = lambda i, u: r[i][geo.sheet(u)]
    # the relations in χ/α form, on every point pair of every overlap
    literal = True
    for (x, y) in geo.edges:
        for (i, j) in ((x, y), (y, x)):
            pts = [geo.pidx[(mm, g)] for mm in geo.overlap(i, j) for g in G]
            for u in pts:
                want = inner_automorphism(H, H.inv(rp(i, u))).compose(a.alpha(i, j, u)).compose(
                    inner_automorphism(H, rp(j, u)))
                if b.alpha(i, j, u) != want:
                    raise AxiomViolation("α relation fails for the found r", witness=(i, j, u))
                for v in pts:
                    inner = H.mul(rp(j, u), H.inv(rp(j, v)))
                    rhs = H.prod(H.inv(rp(i, u)), a.chi(i, j, u, v), a.alpha(i, j, v)(inner), rp(i, v))
                    if b.chi(i, j, u, v) != rhs:
                        raise AxiomViolation("χ relation fails for the found r", witness=(i, j, u, v))
                    printed = H.prod(H.inv(rp(i, u)), a.chi(i, j, u, v),
                                     a.alpha(i, j, v)(H.mul(rp(i, u), H.inv(rp(j, v)))), rp(i, v))
                    literal = literal and printed == b.chi(i, j, u, v)
    res = EquivalenceResult(True, r, None, literal)
    if build_map:
        ga, gb = glue(a), glue(b)
        xi = chartwise_map(ga, gb, lambda i, u: H.inv(rp(i, u)), lambda i, v: rp(i, v))
        if not is_pbg_isomorphism(xi, ga, gb):
            raise AxiomViolation("Ξ is not a PBG isomorphism")
        res.xi = xi
    return res


def random_equivalence(td: TransitionData, rng: random.Random, pinned: bool = False) -> dict[int, dict[str, str]]:
    """A random admissible family r for ``td``."""
    G, H = td.atlas.group, td.h
    return {i: rng.choice(_section_changes(G, H, {g: td.phi(i, g) for g in G}, pinned))
            for i in range(td.geo.nch)}


# --- PBG crossed modules ---------------------------------------------------------------

def _rho_arrays(x: GroupXMod, th: _Tab, td: _Tab) -> np.ndarray:
    return np.array([th.hom_array(x.action[d]) for d in td.el], dtype=np.int32)


@dataclass
class PBGXMod:
    """τ: F -> Ω with Ω glued from D-level data and F the H-bundle over P.

    ``tau[p, k]`` is the arrow τ(f), ``rho[a, k]`` the fibre element ρ(a, f) over
    the target of ``a`` and ``fact[g][p, k]`` the fibre element f·g over pg,
    all in global coordinates.
    """
    xm: GroupXMod
    td: TransitionData
    phihat: RepFamily
    omega: PBGGroupoid
    tau: np.ndarray
    rho: np.ndarray
    fact: dict[str, np.ndarray]
    th: _Tab
    name: str = ""

    @property
    def atlas(self) -> PrincipalAtlas:
        return self.td.atlas

    def is_pair(self) -> bool:
        return self.xm.is_pair()


def build_pbg_xmod(xm: GroupXMod, td: TransitionData, phihat: RepFamily, name: str = "") -> PBGXMod:
    if td.h != xm.d:
        raise AxiomViolation("transition data must take values in the target group of the crossed module")
    xm.check()
    H, D, G = xm.h, xm.d, td.atlas.group
    geo = td.geo
    for i in range(geo.nch):
        for g in G:
            ph, p = phihat(i, g), td.phi(i, g)
            if not (ph.is_hom() and ph.is_bijective()):
                raise AxiomViolation("φ̂ is not an automorphism", witness=(i, g))
            if any(xm.boundary(ph(k)) != p(xm.boundary(k)) for k in H):
                raise AxiomViolation("∂φ̂ ≠ φ∂", witness=(i, g))
    probs = phihat.problems()
    if probs:
        raise AxiomViolation("φ̂ is not a right action by automorphisms", witness=probs[0])
    omega = glue(td, name=name)
    th, tdd = _Tab(H), _Tab(D)
    rg = _rho_arrays(xm, th, tdd)
    p, nd, nh = len(geo.points), len(D), len(H)
    bd = np.array([tdd.ix[xm.boundary(k)] for k in th.el], dtype=np.int32)
    tau = np.array([[(u * nd + bd[k]) * p + u for k in range(nh)] for u in range(p)], dtype=np.int32)
    n = len(omega.groupoid)
    rho = rg[(np.arange(n) // p) % nd]
    fr = omega.frames
    rinv = np.array([np.argsort(rg[d]) for d in range(nd)], dtype=np.int32)
    fact = {}
    for g in G:
        ph = [th.hom_array(phihat(i, g)) for i in range(geo.nch)]
        arr = np.full((p, nh), -1, dtype=np.int32)
        for u in range(p):
            ug = geo.move(u, g)
            for i in geo.atlas.nerve.charts_of(geo.points[u][0]):
                row = rg[fr[i][ug]][ph[i][rinv[fr[i][u]]]]
                if arr[u, 0] >= 0 and (arr[u] != row).any():
                    raise NotIsometablic("the fibre action depends on the chart", witness=(geo.labels[u], g))
                arr[u] = row
        fact[g] = arr
    return PBGXMod(xm, td, phihat, omega, tau, rho, fact, th, name=name or omega.name)


@dataclass
class XModCheck:
    conditions: dict[str, bool]
    witnesses: dict[str, tuple]
    pair: bool = False

    @property
    def valid(self) -> bool:
        return all(self.conditions.values())


def validate_pbg_xmod(x: PBGXMod) -> XModCheck:
    om = x.omega
    g_ = om.groupoid
    G = x.atlas.group
    mt, e = x.th.mt, x.th.e
    nh = len(x.th.el)
    p = len(om.geo.points)
    cond = {k: True for k in ("pbg", "tau_hom", "tau_equivariant", "rho_representation", "F_action",
                              "1_rho_equivariant", "2_tau_rho", "3_rho_tau", "4_tau_isotropy")}
    wit: dict[str, tuple] = {}

    def fail(k, w):
        if cond[k]:
            cond[k], wit[k] = False, w

    rep = validate_pbg(om, groupoid_axioms=False)
    if not rep.valid:
        fail("pbg", tuple(k for k, v in rep.conditions.items() if not v))
    tau, rho = x.tau, x.rho
    for u in range(p):
        if (g_.src[tau[u]] != u).any() or (g_.tgt[tau[u]] != u).any():
            fail("4_tau_isotropy", (om.geo.labels[u],))
        t2 = g_.table[tau[u][:, None], tau[u][None, :]]
        if (t2 != tau[u][mt]).any():
            fail("tau_hom", (om.geo.labels[u],))
    for g in G:
        fa = x.fact[g]
        og = om.obj_perm(g)
        for u in range(p):
            if (om.act[g][tau[u]] != tau[og[u]][fa[u]]).any():
                fail("tau_equivariant", (om.geo.labels[u], g))
            if len(set(fa[u].tolist())) != nh or (fa[u][mt] != mt[fa[u][:, None], fa[u][None, :]]).any():
                fail("F_action", (om.geo.labels[u], g))
        for h in G:
            gh = G.mul(g, h)
            for u in range(p):
                if (x.fact[h][og[u]][fa[u]] != x.fact[gh][u]).any():
                    fail("F_action", (om.geo.labels[u], g, h))
        # ρ(ξg, fg) = ρ(ξ, f)g
        src, tgt = g_.src, g_.tgt
        lhs = rho[om.act[g]][np.arange(len(g_))[:, None], fa[src]]
        rhs = fa[tgt[:, None], rho]
        bad = np.nonzero((lhs != rhs).any(axis=1))[0]
        if len(bad):
            fail("1_rho_equivariant", (g_.arrows[bad[0]], g))
    a_idx, b_idx = np.nonzero(g_.table >= 0)
    ab = g_.table[a_idx, b_idx]
    bad = np.nonzero((rho[ab] != rho[a_idx[:, None], rho[b_idx]]).any(axis=1))[0]
    if len(bad):
        fail("rho_representation", (g_.arrows[a_idx[bad[0]]], g_.arrows[b_idx[bad[0]]]))
    if (rho[g_.units] != np.arange(nh)).any():
        fail("rho_representation", ("units",))
    for a in range(len(g_)):
        s, t = int(g_.src[a]), int(g_.tgt[a])
        ai = g_.inv(a)
        if (tau[t][rho[a]] != g_.table[g_.table[a, tau[s]], ai]).any():
            fail("2_tau_rho", (g_.arrows[a],))
    inv = x.th.inv
    for u in range(p):
        for k in range(nh):
            want = mt[mt[k, np.arange(nh)], inv[k]]
            if (rho[tau[u][k]] != want).any():
                fail("3_rho_tau", (om.geo.labels[u], x.th.el[k]))
    return XModCheck(cond, wit, x.xm.is_pair())


# --- lifting transition data -----------------------------------------------------------

@dataclass
class LiftedData:
    x: PBGXMod
    base: TransitionData                    # D-level data extracted along the sections
    phihat: RepFamily
    lifts: dict[tuple[int, int], dict[str, str]]
    checks: dict[str, bool]
    literal_psi: bool                       # ψ_i(ug, φ̂_i(g⁻¹)h) = ψ_i(u, h)g
    sections: dict[int, dict[int, int]]

    def s(self, i: int, j: int, g: str) -> str:
        H = self.x.xm.h
        if i == j:
            return H.identity
        return self.lifts[(i, j)][g] if i < j else H.inv(self.lifts[(j, i)][g])

    def chi_hat(self, i: int, j: int, u: int, v: int) -> str:
        geo, H = self.base.geo, self.x.xm.h
        return H.mul(self.s(i, j, geo.sheet(u)), H.inv(self.s(i, j, geo.sheet(v))))

    def with_lifts(self, lifts: Mapping[tuple[int, int], Mapping[str, str]]) -> "LiftedData":
        return LiftedData(self.x, self.base, self.phihat, {e: dict(r) for e, r in lifts.items()},
                          self.checks, self.literal_psi, self.sections)


def _affine_ok(H: FiniteGroup, G: FiniteGroup, ph: Mapping[str, GroupHom], s: Mapping[str, str]) -> bool:
    """φ̂(g)(s(h))⁻¹·s(hg) does not depend on h."""
    for g in G:
        vals = {H.mul(H.inv(ph[g](s[h])), s[G.mul(h, g)]) for h in G}
        if len(vals) > 1:
            return False
    return True


def equivariant_lifts(x: PBGXMod, phihat: RepFamily, base: TransitionData, edge: tuple[int, int],
                      limit: int = LIFT_SEARCH_LIMIT) -> list[dict[str, str]]:
    """All ŝ_ij with ∂ŝ_ij = s_ij on every sheet and the affine condition."""
    H, G = x.xm.h, base.atlas.group
    i, j = edge
    fib = {d: [k for k in H if x.xm.boundary(k) == d] for d in x.xm.d}
    opts = [fib[base.s(i, j, g)] for g in G.elements]
    total = 1
    for o in opts:
        total *= len(o)
    if total > limit:
        raise SizeBoundExceeded(f"{total} candidate lifts on edge {edge}")
    ph = {g: phihat(i, g) for g in G}
    out = []
    for choice in itertools.product(*opts):
        s = dict(zip(G.elements, choice))
        if _affine_ok(H, G, ph, s):
            out.append(s)
    return out


def lift_data(x: PBGXMod, sections: Mapping[int, Mapping[int, int]] | None = None,
              rng: random.Random | None = None) -> LiftedData:
    om = x.omega
    geo, G, H, xm = om.geo, x.atlas.group, x.xm.h, x.xm
    th = x.th
    sec = {i: dict(m) for i, m in (sections or om.sections).items()}
    base = extract_transition_data(om, sec)
    comp, inv = om.groupoid.comp, om.groupoid.inv
    u0 = geo.u0
    maps = []
    for i in range(geo.nch):
        xi = sec[i][geo.ui[i]]
        m = {}
        for g in G:
            a = comp(inv(sec[i][geo.move(geo.ui[i], g)]), int(om.act[g][xi]))
            m[g] = GroupHom(H, H, {h: th.el[x.rho[a, x.fact[g][u0, th.ix[h]]]] for h in H})
        maps.append(m)
    phihat = RepFamily(G, H, maps)
    checks = {}
    checks["phihat_hom"] = not phihat.problems()
    checks["phihat_boundary"] = all(xm.boundary(phihat(i, g)(h)) == base.phi(i, g)(xm.boundary(h))
                                    for i in range(geo.nch) for g in G for h in H)
    psi = lambda i, u, h: int(x.rho[sec[i][u], th.ix[h]])
    ok_b = ok_c = ok_iso = literal = True
    for (a, b) in geo.edges:
        for mpt in geo.overlap(a, b):
            for g in G:
                u = geo.pidx[(mpt, g)]
                for h in H:
                    via = th.el[x.rho[comp(inv(sec[a][u]), sec[b][u]), th.ix[h]]]
                    if xm.boundary(via) != base.alpha(a, b, u)(xm.boundary(h)):
                        ok_b = False
    for (i, j, k) in geo.triples():
        for mpt in geo.overlap(i, j, k):
            for g in G:
                u = geo.pidx[(mpt, g)]
                f = lambda a, b, h: th.el[x.rho[comp(inv(sec[a][u]), sec[b][u]), th.ix[h]]]
                if any(f(i, j, f(j, k, h)) != f(i, k, h) for h in H):
                    ok_c = False
    for i in range(geo.nch):
        for u in geo.chart_pts[i]:
            for g in G:
                ug = geo.move(u, g)
                gi = G.inv(g)
                for h in H:
                    right = int(x.fact[g][u, psi(i, u, h)])
                    if psi(i, ug, phihat(i, g)(h)) != right:
                        ok_iso = False
                    if psi(i, ug, phihat(i, gi)(h)) != right:
                        literal = False
    checks["psi_boundary"], checks["psi_cocycle"], checks["psi_isometablic"] = ok_b, ok_c, ok_iso
    checks["phihat_compatible"] = True
    lifts = {}
    for e in geo.edges:
        cands = equivariant_lifts(x, phihat, base, e)
        if not cands:
            raise NoEquivariantLift("no lift of the transition data is equivariant on this overlap", witness=e)
        lifts[e] = rng.choice(cands) if rng else cands[0]
    ld = LiftedData(x, base, phihat, lifts, checks, literal, sec)
    for (i, j) in geo.edges:
        for g in G:
            for h in G:
                lam = H.mul(H.inv(phihat(i, g)(ld.s(i, j, h))), ld.s(i, j, G.mul(h, g)))
                if inner_automorphism(H, lam).compose(phihat(j, g)) != phihat(i, g):
                    checks["phihat_compatible"] = False
    return ld


# --- the equivariant obstruction -------------------------------------------------------

class _K0Linear:
    """Coordinates on K0 = ker ∂ and the unknowns m_e(g) of the correction problem."""

    def __init__(self, ld: LiftedData):
        self.ld = ld
        xm = ld.x.xm
        self.H, self.G = xm.h, ld.base.atlas.group
        self.k0 = sorted(xm.kernel)
        zh = center(self.H)
        bad = [k for k in self.k0 if k not in zh]
        if bad:
            raise NotCentral("ker ∂ is not central", witness=bad[0])
        self.co = AbelianCoordinates(self.H, self.k0)
        self.orders = self.co.orders
        self.r = len(self.orders)
        geo = ld.base.geo
        self.geo = geo
        self.gel = list(self.G.elements)
        self.var = {(e, g): n for n, (e, g) in enumerate(itertools.product(geo.edges, self.gel))}
        nm = len(self.var)
        self.kvar = {(i, g): nm + n for n, (i, g) in enumerate(itertools.product(range(geo.nch), self.gel))}
        self.col_mod = [o for _ in range(nm + len(self.kvar)) for o in self.orders]
        # defects of the current lifts relative to lifted D-level frames
        H = self.H
        cd = ld.base.global_frames()
        c0 = {g: [xm.lift(v) for v in row] for g, row in cd.items()}
        self.defects: dict[tuple[tuple[int, int], str], str] = {}
        kset = set(self.k0)
        for (i, j) in geo.edges:
            for g in self.gel:
                lam = H.mul(H.inv(ld.phihat(i, g)(ld.s(i, j, self.G.identity))), ld.s(i, j, g))
                d = H.mul(H.inv(H.mul(H.inv(c0[g][i]), c0[g][j])), lam)
                if d not in kset:
                    raise NotCentral("lifted defect leaves ker ∂", witness=((i, j), g))
                self.defects[((i, j), g)] = d

    def mat(self, f: GroupHom) -> list[list[int]]:
        cols = [self.co.coords(f(b)) for b, _ in self.co.basis]
        return [[cols[b][a] for b in range(self.r)] for a in range(self.r)]

    def _block(self, row: list[int], v: int, m: list[list[int]] | None, sign: int, a: int):
        for b in range(self.r):
            c = (m[a][b] if m is not None else int(a == b)) * sign
            if c:
                row[v * self.r + b] += c

    def rows(self, rhs_e: Mapping | None = None) -> tuple[list[list[int]], list[int], list[int]]:
        """Affine-crossed rows, then δm = rhs rows on every triangle and sheet."""
        geo, G, r = self.geo, self.G, self.r
        ncol = len(self.col_mod)
        a_rows, b, mods = [], [], []
        e = G.identity
        for edge in geo.edges:
            i = edge[0]
            for g in self.gel:
                mg = self.mat(self.ld.phihat(i, g))
                for h in self.gel:
                    for a in range(r):
                        row = [0] * ncol
                        self._block(row, self.var[(edge, G.mul(h, g))], None, 1, a)
                        self._block(row, self.var[(edge, h)], mg, -1, a)
                        self._block(row, self.var[(edge, e)], mg, 1, a)
                        self._block(row, self.var[(edge, g)], None, -1, a)
                        a_rows.append(row)
                        b.append(0)
                        mods.append(self.orders[a])
        for edge in geo.edges:
            i, j = edge
            for g in self.gel:
                mg = self.mat(self.ld.phihat(i, g))
                target = self.co.coords(self.defects[(edge, g)]) if rhs_e is not None else (0,) * r
                for a in range(r):
                    row = [0] * ncol
                    self._block(row, self.kvar[(j, g)], None, 1, a)
                    self._block(row, self.kvar[(i, g)], None, -1, a)
                    self._block(row, self.var[(edge, g)], None, -1, a)
                    self._block(row, self.var[(edge, e)], mg, 1, a)
                    a_rows.append(row)
                    b.append(target[a] % self.orders[a])
                    mods.append(self.orders[a])
        for (i, j, k) in geo.triangles:
            for g in self.gel:
                target = self.co.coords(rhs_e[(i, j, k)][g]) if rhs_e else (0,) * r
                for a in range(r):
                    row = [0] * ncol
                    self._block(row, self.var[((i, j), g)], None, 1, a)
                    self._block(row, self.var[((j, k), g)], None, 1, a)
                    self._block(row, self.var[((i, k), g)], None, -1, a)
                    a_rows.append(row)
                    b.append(target[a] % self.orders[a])
                    mods.append(self.orders[a])
        return a_rows, b, mods

    def unflat(self, x: Sequence[int]) -> dict[tuple[int, int], dict[str, str]]:
        out: dict[tuple[int, int], dict[str, str]] = {}
        for (edge, g), v in self.var.items():
            out.setdefault(edge, {})[g] = self.co.element(x[v * self.r:(v + 1) * self.r])
        return out

    def solve(self, rhs_e: Mapping | None, defects: Mapping | None = None):
        """m with δm = rhs on triangles whose defect shift cancels ``defects``
        (the holonomy defects of the current lifts by default)."""
        if not self.var:
            return {}
        saved = self.defects
        if defects is not None:
            self.defects = dict(defects)
        try:
            a, b, mods = self.rows(rhs_e if rhs_e is not None else {})
        finally:
            self.defects = saved
        x = la.solve_mod(a, b, self.col_mod, mods)
        return None if x is None else self.unflat(x)

    def z_order(self) -> int:
        """Number of affine-crossed ker ∂-valued cocycles m with trivial holonomy."""
        if not self.var:
            return 1
        a, _, mods = self.rows(None)
        free_k = 1
        for o in self.orders:
            free_k *= o ** len(self.gel)
        return la.kernel_order_mod(a, self.col_mod, mods) // free_k


@dataclass
class EquivariantObstruction:
    lifted: LiftedData
    values: dict[tuple[int, int, int], dict[str, str]]     # E_ijk(g) = ŝ_ij ŝ_jk ŝ_ik⁻¹
    closed: bool
    conventions_agree: bool                                 # ŝ_jk ŝ_ik⁻¹ ŝ_ij gives the same values
    pair_matches: bool                                      # pair cochain e(u, v) = E(u) E(v)⁻¹
    literal_pair_in_kernel: bool                            # uninverted display lands in ker ∂
    equivariant: bool
    correction: dict[tuple[int, int], dict[str, str]] | None
    identity_sheet: CentralCochain

    @property
    def vanishes(self) -> bool:
        return self.correction is not None


def _E(ld: LiftedData, i: int, j: int, k: int, g: str) -> str:
    H = ld.x.xm.h
    return H.prod(ld.s(i, j, g), ld.s(j, k, g), H.inv(ld.s(i, k, g)))


def equivariant_obstruction(ld: LiftedData) -> EquivariantObstruction:
    xm, H = ld.x.xm, ld.x.xm.h
    geo, G = ld.base.geo, ld.base.atlas.group
    lin = _K0Linear(ld)
    kset = set(lin.k0)
    values: dict[tuple[int, int, int], dict[str, str]] = {}
    agree = True
    for t in geo.triangles:
        i, j, k = t
        row = {}
        for g in G:
            v = _E(ld, i, j, k, g)
            if v not in kset:
                raise NotCentral("obstruction value is not in ker ∂", witness=(t, g))
            row[g] = v
            agree &= H.prod(ld.s(j, k, g), H.inv(ld.s(i, k, g)), ld.s(i, j, g)) == v
        values[t] = row
    closed = True
    for (a, b, c, d) in geo.tetrahedra:
        for g in G:
            s = H.prod(values[(b, c, d)][g], H.inv(values[(a, c, d)][g]), values[(a, b, d)][g],
                       H.inv(values[(a, b, c)][g]))
            closed &= s == H.identity
    # pair cochain from the hatted χ on points of the triple overlaps
    pair = literal = True
    for (i, j, k) in geo.triangles:
        pts = [geo.pidx[(m, g)] for m in geo.overlap(i, j, k) for g in G]
        for u in pts:
            for v in pts:
                cij, cjk, cik = ld.chi_hat(i, j, u, v), ld.chi_hat(j, k, u, v), ld.chi_hat(i, k, u, v)
                sv = ld.s(i, j, geo.sheet(v))
                e_uv = H.prod(cij, H.conj(sv, cjk), H.inv(cik))
                want = H.mul(values[(i, j, k)][geo.sheet(u)], H.inv(values[(i, j, k)][geo.sheet(v)]))
                pair &= e_uv == want
                literal &= H.prod(cij, H.conj(sv, cjk), cik) in kset
    # E(hg)·φ̂_i(g)(E(h))⁻¹ may depend on g but not on h
    equiv = True
    for t, row in values.items():
        ph = {g: ld.phihat(t[0], g) for g in G}
        equiv &= _affine_ok(H, G, ph, row)
    neg = {t: {g: H.inv(v) for g, v in row.items()} for t, row in values.items()}
    corr = lin.solve(neg)
    cx = CechComplex(geo.atlas.nerve, H, lin.k0)
    e_sheet = CentralCochain(cx, 2, {t: row[G.identity] for t, row in values.items()})
    return EquivariantObstruction(ld, values, closed, agree, pair, literal, equiv, corr, e_sheet)


def equivariant_classes_equal(a: EquivariantObstruction, b: EquivariantObstruction
                              ) -> tuple[bool, dict | None]:
    """Do the obstructions of two lifts of the same data define the same class?"""
    H = a.lifted.x.xm.h
    if a.lifted.base.sheets != b.lifted.base.sheets:
        raise AxiomViolation("lifts of different transition data")
    # E_a·δm = E_b, with the defect shift of m matching the defect difference
    diff = {t: {g: H.mul(b.values[t][g], H.inv(v)) for g, v in row.items()} for t, row in a.values.items()}
    lin, lin_b = _K0Linear(a.lifted), _K0Linear(b.lifted)
    dd = {k: H.mul(v, H.inv(lin_b.defects[k])) for k, v in lin.defects.items()}
    m = lin.solve(diff, dd)
    return m is not None, m


def equivariant_lifts_exhaustive(ld: LiftedData, first_only: bool = True,
                                 limit: int = 1 << 26) -> list[dict[tuple[int, int], dict[str, str]]]:
    """All corrected lifts found by brute force: every edge ranges over its
    equivariant lifts and the triangle cocycle is tested on every sheet."""
    geo, G, H = ld.base.geo, ld.base.atlas.group, ld.x.xm.h
    edges = geo.edges
    cands = [equivariant_lifts(ld.x, ld.phihat, ld.base, e) for e in edges]
    total = 1
    for c in cands:
        total *= max(len(c), 1)
    if total > limit:
        raise SizeBoundExceeded(f"{total} lift combinations")
    pos = {e: n for n, e in enumerate(edges)}
    tri_at = {}
    for t in geo.triangles:
        last = max(pos[(t[0], t[1])], pos[(t[1], t[2])], pos[(t[0], t[2])])
        tri_at.setdefault(last, []).append(t)
    chosen: list[dict[str, str] | None] = [None] * len(edges)
    out = []

    def val(i, j, g):
        return chosen[pos[(i, j)]][g]

    def go(n: int) -> bool:
        if n == len(edges):
            lam = lambda i, j, g: H.mul(H.inv(ld.phihat(i, g)(val(i, j, G.identity))), val(i, j, g))
            try:
                _integrate(H, G, geo, lam)
            except NotIsometablic:
                return False
            out.append({e: dict(chosen[pos[e]]) for e in edges})
            return first_only
        for c in cands[n]:
            chosen[n] = c
            if all(H.prod(val(i, j, g), val(j, k, g), H.inv(val(i, k, g))) == H.identity
                   for (i, j, k) in tri_at.get(n, []) for g in G):
                if go(n + 1):
                    return True
        chosen[n] = None
        return False

    go(0)
    return out


# --- operator extensions -----------------------------------------------------------------

@dataclass
class OperatorExtension:
    """ι: F >-> Υ and μ: Υ -> Ω with Υ glued from corrected H-level data."""
    x: PBGXMod
    lifted: LiftedData
    lifts: dict[tuple[int, int], dict[str, str]]
    data: TransitionData
    upsilon: PBGGroupoid
    mu: GroupoidMorphism
    iota: np.ndarray                       # iota[p, k] = arrow of Υ

    def extension(self) -> GroupoidExtension:
        ups = self.upsilon.groupoid
        th = self.x.th
        objs = list(ups.objects)
        n = {objs[u]: [ups.arrows[a] for a in self.iota[u]] for u in range(len(objs))}
        q, proj = quotient_by_normal_subbundle(ups, n)
        bundle = GroupBundle.constant(objs, self.x.xm.h)
        iota = self.iota
        return GroupoidExtension(bundle, ups, q, lambda xo, f: ups.arrows[iota[ups.obj_index[xo], th.ix[f]]], proj)


def operator_extension(ld: LiftedData, correction: Mapping | None = None) -> OperatorExtension:
    """Υ from the lifts corrected by ``correction`` (the solved one by default)."""
    H, G = ld.x.xm.h, ld.base.atlas.group
    if correction is None:
        ob = equivariant_obstruction(ld)
        if not ob.vanishes:
            raise ObstructionNonzero("the equivariant obstruction class is nonzero", witness=ob.identity_sheet.to_doc())
        correction = ob.correction
    lifts = {e: {g: H.mul(ld.lifts[e][g], correction[e][g]) for g in G} for e in ld.lifts}
    return _opext_from_lifts(ld, lifts)


def _opext_from_lifts(ld: LiftedData, lifts: Mapping) -> OperatorExtension:
    x = ld.x
    H, G = x.xm.h, ld.base.atlas.group
    td_h = TransitionData(ld.base.atlas, H, ld.phihat, lifts, name=f"lift({x.name})")
    cond, wit = td_h.check_conditions()
    if not cond["s_cocycle"]:
        raise ObstructionNonzero("corrected lifts are not a cocycle", witness=wit["s_cocycle"])
    bad = [k for k, v in cond.items() if not v]
    if bad:
        raise NotIsometablic(f"lifted data fail {bad[0]}", witness=wit[bad[0]])
    ups = glue(td_h)
    om = x.omega
    geo = om.geo
    p, nh, nd = len(geo.points), len(H), len(x.xm.d)
    th = x.th
    bd = np.array([_Tab(x.xm.d).ix[x.xm.boundary(k)] for k in th.el], dtype=np.int32)
    # Ω is glued from the extracted D-data; compare frames through the sections
    if ld.base.sheets != x.td.sheets:
        raise AxiomViolation("operator extensions are built over the stored gluing frames")
    idx = np.arange(len(ups.groupoid))
    T, K, S = idx // (nh * p), (idx // p) % nh, idx % p
    amap = (T * nd + bd[K]) * p + S
    mu = GroupoidMorphism(ups.groupoid, om.groupoid, np.arange(p), amap.astype(np.int32))
    iota = np.array([[(u * nh + k) * p + u for k in range(nh)] for u in range(p)], dtype=np.int32)
    return OperatorExtension(x, ld, {e: dict(r) for e, r in lifts.items()}, td_h, ups, mu, iota)


@dataclass
class OpextCheck:
    conditions: dict[str, bool]
    witnesses: dict[str, tuple]

    @property
    def valid(self) -> bool:
        return all(self.conditions.values())


def validate_opext(oe: OperatorExtension) -> OpextCheck:
    x, ups, om = oe.x, oe.upsilon, oe.x.omega
    g_u = ups.groupoid
    G = x.atlas.group
    th = x.th
    cond, wit = {}, {}
    cond["upsilon_pbg"] = validate_pbg(ups).valid
    cond["extension_exact"] = validate_extension(oe.extension()).valid
    cond["mu_morphism"] = oe.mu.is_morphism()
    img_d = {x.xm.boundary(k) for k in x.xm.h}
    tdd = _Tab(x.xm.d)
    p = len(om.geo.points)
    want = {int(a) for a in range(len(om.groupoid)) if tdd.el[(a // p) % len(tdd.el)] in img_d}
    cond["mu_onto_boundary_image"] = set(oe.mu.arrow_map.tolist()) == want
    cond["mu_equivariant"] = all((oe.mu.arrow_map[ups.act[g]] == om.act[g][oe.mu.arrow_map]).all() for g in G)
    cond["mu_iota_is_tau"] = bool((oe.mu.arrow_map[oe.iota] == x.tau).all())
    cond["endpoints"] = bool((om.groupoid.src[oe.mu.arrow_map] == g_u.src).all()
                             and (om.groupoid.tgt[oe.mu.arrow_map] == g_u.tgt).all())
    ok = True
    for a in range(len(g_u)):
        s, t = int(g_u.src[a]), int(g_u.tgt[a])
        ma = int(oe.mu.arrow_map[a])
        lhs = oe.iota[t][x.rho[ma]]
        rhs = g_u.table[g_u.table[a, oe.iota[s]], g_u.inv(a)]
        if (lhs != rhs).any():
            ok = False
            wit["iota_conjugation"] = (g_u.arrows[a],)
            break
    cond["iota_conjugation"] = ok
    cond["iota_equivariant"] = all(
        (ups.act[g][oe.iota[u]] == oe.iota[om.geo.move(u, g)][x.fact[g][u]]).all()
        for g in G for u in range(p))
    return OpextCheck(cond, wit)


# --- classification ------------------------------------------------------------------

def _affine_crossed_k0(lin: _K0Linear, i: int) -> list[dict[str, str]]:
    """Every m: G -> K0 satisfying the affine-crossed condition for φ̂_i."""
    G, H = lin.G, lin.H
    ph = {g: lin.ld.phihat(i, g) for g in G}
    return [dict(zip(lin.gel, c)) for c in itertools.product(lin.k0, repeat=len(lin.gel))
            if _affine_ok(H, G, ph, dict(zip(lin.gel, c)))]


@dataclass
class Classification:
    lifts: list[dict[tuple[int, int], dict[str, str]]]     # every corrected lift
    classes: list[list[int]]                               # indices into ``lifts``
    z_order: int
    b_order: int
    free_transitive: bool

    @property
    def h1_order(self) -> int:
        return self.z_order // self.b_order


def _key(lifts: Mapping, edges, gel) -> tuple:
    return tuple(lifts[e][g] for e in edges for g in gel)


def coboundary_group(ld: LiftedData) -> dict[tuple, dict[int, dict[str, str]]]:
    """δR for chartwise affine-crossed ker ∂-valued r, with a witness r per element."""
    lin = _K0Linear(ld)
    H, geo = lin.H, lin.geo
    gens = []
    for i in range(geo.nch):
        for m in _affine_crossed_k0(lin, i):
            gens.append((i, m))
    zero_r = {i: {g: H.identity for g in lin.gel} for i in range(geo.nch)}

    def delta(r):
        return tuple(H.mul(r[i][g], H.inv(r[j][g])) for (i, j) in geo.edges for g in lin.gel)

    seen = {delta(zero_r): zero_r}
    frontier = [zero_r]
    while frontier:
        nxt = []
        for r in frontier:
            for i, m in gens:
                r2 = {c: dict(v) for c, v in r.items()}
                r2[i] = {g: H.mul(r2[i][g], m[g]) for g in lin.gel}
                k = delta(r2)
                if k not in seen:
                    seen[k] = r2
                    nxt.append(r2)
        frontier = nxt
    return seen


def classify_opexts(ld: LiftedData) -> Classification:
    geo, G, H = ld.base.geo, ld.base.atlas.group, ld.x.xm.h
    lin = _K0Linear(ld)
    gel = lin.gel
    allL = equivariant_lifts_exhaustive(ld, first_only=False)
    B = coboundary_group(ld)
    keys = [_key(l, geo.edges, gel) for l in allL]
    where = {k: n for n, k in enumerate(keys)}
    cls_of = [-1] * len(allL)
    classes: list[list[int]] = []
    for n, k in enumerate(keys):
        if cls_of[n] >= 0:
            continue
        members = sorted({where[tuple(H.mul(a, b) for a, b in zip(k, bk))] for bk in B})
        for mbr in members:
            cls_of[mbr] = len(classes)
        classes.append(members)
    z = lin.z_order()
    free = bool(allL) and len(allL) == z and all(len(c) == len(B) for c in classes)
    return Classification(allL, classes, z, len(B), free)


@dataclass
class OpextEquivalence:
    equivalent: bool
    r: dict[int, dict[str, str]] | None = None
    kappa: GroupoidMorphism | None = None


def opext_equivalent(a: OperatorExtension, b: OperatorExtension) -> OpextEquivalence:
    """κ given chartwise by h ↦ r_i(u) h r_i(v)⁻¹ with r central, ker ∂-valued and affine-crossed."""
    H = a.x.xm.h
    geo = a.upsilon.geo
    gel = list(a.x.atlas.group.elements)
    ka, kb = _key(a.lifts, geo.edges, gel), _key(b.lifts, geo.edges, gel)
    diff = tuple(H.mul(H.inv(p), q) for p, q in zip(ka, kb))
    B = coboundary_group(a.lifted)
    r = B.get(diff)
    if r is None:
        return OpextEquivalence(False)
    kappa = chartwise_map(a.upsilon, b.upsilon, lambda i, u: r[i][geo.sheet(u)],
                          lambda i, v: H.inv(r[i][geo.sheet(v)]))
    if not is_pbg_isomorphism(kappa, a.upsilon, b.upsilon):
        raise AxiomViolation("κ is not a PBG isomorphism")
    if not (b.mu.compose(kappa).arrow_map == a.mu.arrow_map).all():
        raise AxiomViolation("κ does not commute with μ")
    if not (kappa.arrow_map[a.iota] == b.iota).all():
        raise AxiomViolation("κ does not fix ι")
    return OpextEquivalence(True, r, kappa)


def h1g_action(oe: OperatorExtension, f: Mapping[tuple[int, int], Mapping[str, str]]) -> OperatorExtension:
    """Twist the transition lifts by an equivariant 1-cocycle f: ŝ ↦ ŝ·f."""
    x, ld = oe.x, oe.lifted
    H, G = x.xm.h, x.atlas.group
    geo = ld.base.geo
    zh = center(H)
    kern = x.xm.kernel
    f = {e: {g: str(f[e][g]) for g in G} for e in geo.edges}
    for e, row in f.items():
        for g, v in row.items():
            if v not in zh:
                raise NotCentral("twisting value is not central", witness=(e, g))
            if v not in kern:
                raise AxiomViolation("twisting value is not in ker ∂", witness=(e, g))
        if not _affine_ok(H, G, {g: ld.phihat(e[0], g) for g in G}, row):
            raise NotIsometablic("twisting cochain is not equivariant", witness=e)
    for (i, j, k) in geo.triangles:
        for g in G:
            if H.prod(f[(i, j)][g], f[(j, k)][g], H.inv(f[(i, k)][g])) != H.identity:
                raise NotACocycle("twisting cochain is not a cocycle", witness=((i, j, k), g))
    lifts = {e: {g: H.mul(oe.lifts[e][g], f[e][g]) for g in G} for e in geo.edges}
    return _opext_from_lifts(ld, lifts)


# --- extensions of groupoids over M and PBG-groupoids over P ----------------------------

def pbg_from_groupoid_extension(ext: GroupoidExtension, base: int = 0) -> PBGGroupoid:
    """Υ = (Q x Q)/N over P for an extension F >-> Ω ->> Φ of transitive groupoids.

    Q is the set of Ω-arrows out of the base object, P the Φ-arrows out of it
    (so G is the Φ-isotropy there) and N = ι(F) at the base.  Arrows of Υ are
    N-orbits ⟨q2, q1⟩ ~ ⟨q2 n, q1 n⟩ running from π(q1) to π(q2); G acts by
    ⟨q2, q1⟩g = ⟨q2 h, q1 h⟩ for any lift h of g.
    """
    om, phi, pi = ext.total, ext.quotient, ext.pi
    if not (om.is_transitive() and phi.is_transitive()):
        raise NotTransitive("extension groupoids must be transitive")
    if list(phi.objects) != list(om.objects) or (pi.obj_map != np.arange(len(om.objects))).any():
        raise AxiomViolation("the projection must be the identity on objects")
    x0 = base
    xname = om.objects[x0]
    G = phi.isotropy(x0)
    tree = {m: (int(phi.units[m]) if m == x0 else int(phi.hom(m, x0)[0])) for m in range(len(om.objects))}
    nerve = Nerve(om.objects, {"1": list(om.objects)}, name="single")
    atlas = PrincipalAtlas(nerve, G, basepoint=xname)
    geo = geometry(atlas)
    pam = pi.arrow_map

    def point(p: int) -> int:
        m = int(phi.tgt[p])
        g = phi.arrows[phi.comp(phi.inv(tree[m]), p)]
        return geo.pidx[(om.objects[m], g)]

    Q = [int(a) for a in np.nonzero(om.src == x0)[0]]
    qpos = {q: k for k, q in enumerate(Q)}
    qpt = [point(int(pam[q])) for q in Q]
    N = sorted(om.index[ext.iota(xname, f)] for f in ext.kernel.fibers[xname].elements)
    if int(om.units[x0]) not in N:
        raise AxiomViolation("ι(F) at the base does not contain the unit")
    nq = len(Q)
    right = np.array([[qpos[om.comp(q, n)] for n in N] for q in Q], dtype=np.int64)
    rep = {}
    reps: list[tuple[int, int]] = []
    for a in range(nq):
        for b in range(nq):
            if (a, b) in rep:
                continue
            orbit = list(zip(right[a].tolist(), right[b].tolist()))
            k = len(reps)
            reps.append(min(orbit))
            for o in orbit:
                rep[o] = k
    # objects in atlas order, arrows named by their representatives
    arrows = [(f"⟨{om.arrows[Q[a]]} ; {om.arrows[Q[b]]}⟩", geo.labels[qpt[b]], geo.labels[qpt[a]])
              for a, b in reps]
    n = len(reps)
    table = np.full((n, n), -1, dtype=np.int32)
    by_target: dict[int, list[int]] = {}
    for k, (a, b) in enumerate(reps):
        by_target.setdefault(qpt[a], []).append(k)
    for k1, (q3, q2p) in enumerate(reps):
        for k2 in by_target.get(qpt[q2p], []):
            q2, q1 = reps[k2]
            nn = om.comp(om.inv(Q[q2]), Q[q2p])           # q2' = q2 n
            q3n = qpos[om.comp(Q[q3], om.inv(nn))]
            table[k1, k2] = rep[(q3n, q1)]
    ups = FiniteGroupoid(geo.labels, arrows, table, name=f"ups({om.name})")
    lift = {}
    for h in om.isotropy_indices(x0):
        lift.setdefault(phi.arrows[int(pam[h])], int(h))
    act = {}
    for g in G:
        h = lift[g]
        hp = [qpos[om.comp(q, h)] for q in Q]
        act[g] = np.array([rep[(hp[a], hp[b])] for a, b in reps], dtype=np.int32)
    u0 = geo.u0
    iso = ups.isotropy(u0)
    vertex_arrows = {x: ups.index[x] for x in iso.elements}
    return PBGGroupoid(ups, atlas, act, iso, vertex_arrows, name=ups.name)


def quotient_by_G(pg: PBGGroupoid) -> GroupoidExtension:
    """I(Υ)/G >-> Υ/G ->> (P x P)/G over M."""
    g_, geo, G = pg.groupoid, pg.geo, pg.atlas.group
    n = len(g_)
    orbit_rep = np.full(n, -1, dtype=np.int32)
    reps = []
    for a in range(n):
        if orbit_rep[a] >= 0:
            continue
        members = [int(pg.act[g][a]) for g in G]
        orbit_rep[members] = len(reps)
        reps.append(min(members))
    mpts = list(geo.atlas.nerve.points)
    mpos = {m: k for k, m in enumerate(mpts)}
    mof = lambda u: mpos[geo.points[u][0]]
    arrows = [(g_.arrows[r], mpts[mof(int(g_.src[r]))], mpts[mof(int(g_.tgt[r]))]) for r in reps]
    k = len(reps)
    table = np.full((k, k), -1, dtype=np.int32)
    for c1, r1 in enumerate(reps):
        s1 = int(g_.src[r1])
        for c2, r2 in enumerate(reps):
            t2 = int(g_.tgt[r2])
            if mof(s1) != mof(t2):
                continue
            g = G.mul(G.inv(geo.sheet(t2)), geo.sheet(s1))
            table[c1, c2] = orbit_rep[g_.comp(r1, int(pg.act[g][r2]))]
    q = FiniteGroupoid(mpts, arrows, table, name=f"{g_.name}/G")
    kern = {}
    for m in mpts:
        u = geo.pidx[(m, G.identity)]
        kern[m] = sorted({q.arrows[int(orbit_rep[a])] for a in g_.isotropy_indices(u)})
    bar, proj = quotient_by_normal_subbundle(q, kern)
    fibers = {m: q.isotropy(m).subgroup(kern[m], name=f"N{m}") for m in mpts}
    bundle = GroupBundle(mpts, fibers)
    return GroupoidExtension(bundle, q, bar, lambda x, f: f, proj)


def round_trip_isomorphism(ext: GroupoidExtension, base: int = 0) -> GroupoidMorphism | None:
    """An isomorphism quotient_by_G(pbg_from_groupoid_extension(ext)) -> ext over
    the identity of M that matches kernels, found by exhaustive search."""
    back = quotient_by_G(pbg_from_groupoid_extension(ext, base))
    src, tgt = back.total, ext.total
    obj_map = [tgt.obj_index[o] for o in src.objects]
    kin = np.zeros(len(src), dtype=bool)
    for x, f in back.kernel.elements():
        kin[src.index[back.iota(x, f)]] = True
    kout = np.zeros(len(tgt), dtype=bool)
    for x, f in ext.kernel.elements():
        kout[ext.iota_index(x, f)] = True
    cons = IsoConstraints(arrow_ok=lambda a, b: bool(kin[a]) == bool(kout[b]))
    found = find_isomorphism(src, tgt, obj_map, constraints=cons)
    return found[0] if found else None


def explicit_round_trip(ext: GroupoidExtension, base: int = 0) -> GroupoidMorphism:
    """The map ⟨q2, q1⟩ ↦ q2 q1⁻¹ from Υ/G to Ω."""
    om = ext.total
    back = quotient_by_G(pbg_from_groupoid_extension(ext, base))
    src = back.total
    amap = []
    for name in src.arrows:
        q2, q1 = name[1:-1].split(" ; ")
        amap.append(om.comp(om.index[q2], om.inv(om.index[q1])))
    return GroupoidMorphism(src, om, np.array([om.obj_index[o] for o in src.objects], dtype=np.int32),
                            np.array(amap, dtype=np.int32))
