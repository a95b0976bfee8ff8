"""Deterministic pseudo-random instance families at desk scale.

Every generated object passes its validator; the families are stratified so
that trivial-kernel, coupling, pair, zero- and nonzero-obstruction cases all
occur for every seed.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import random
from dataclasses import dataclass, field

from . import pbg
from .algebra import (FiniteGroup, GroupHom, GroupXMod, automorphism_group, center, central_quotient_xmod,
                      homomorphisms, standard_group)
from .errors import XModKitError
from .groupoid import GroupoidExtension
from .site import CechComplex, Nerve, PrincipalAtlas, NAMED_NERVES, single_chart
from . import xmod as xm_

# caps for the main pair stratum
MAX_CHARTS = 4
MAX_G = 4
MAX_H = 8
MAX_POINTS = 8

# (H, central kernel) pairs; the crossed module is H -> H/K with conjugation
XMOD_TABLE = [
    ("Z2", "trivial"), ("Z3", "trivial"), ("Z4", "trivial"), ("V4", "trivial"),
    ("Z4", "Z2"), ("Z8", "Z2"), ("Z2xZ4", "Z2"), ("D4", "center"), ("Q8", "center"),
    ("Z2", "all"), ("Z4", "all"), ("V4", "Z2"), ("Z6", "Z2"), ("Z6", "Z3"),
]

GROUPS_G = ["1", "Z2", "Z3", "Z4", "V4"]
NERVES = ["single", "path2", "triangle", "circle3", "path3", "circle4", "tetrahedron"]


def group_xmod(hname: str, kind: str) -> GroupXMod:
    h = standard_group(hname)
    if kind == "trivial":
        k = [h.identity]
    elif kind == "center":
        k = sorted(center(h).elements)
    elif kind == "all":
        k = list(h.elements)
    else:
        n = int(kind[1:])
        k = sorted(a for a in center(h).elements if n % h.order_of(a) == 0)
    return central_quotient_xmod(h, k, name=f"{hname}/{kind}")


def _right_actions(G: FiniteGroup, x: GroupXMod) -> list[dict[str, GroupHom]]:
    """Homomorphisms G -> Aut(H) that preserve ker ∂ (G is abelian, so right = left)."""
    h = x.h
    aut = automorphism_group(h)
    ag = aut.as_group()
    by_name = {f"a{i}": a for i, a in enumerate(aut.autos)}
    kern = x.kernel
    out = []
    for f in homomorphisms(G, ag):
        m = {g: by_name[f(g)] for g in G}
        if all(frozenset(a(k) for k in kern) == kern for a in m.values()):
            out.append(m)
    return out


def induced(x: GroupXMod, a: GroupHom) -> GroupHom:
    """The automorphism of D = im ∂ induced by an automorphism of H preserving ker ∂."""
    return GroupHom(x.d, x.d, {d: x.boundary(a(x.lift(d))) for d in x.d})


def _central_crossed(G: FiniteGroup, x: GroupXMod, phi: dict[str, GroupHom]) -> list[dict[str, str]]:
    """Crossed maps G -> Z(D) with values acting trivially on H."""
    ident = GroupHom.identity(x.h)
    z = sorted(c for c in center(x.d).elements if x.action[c] == ident)
    return pbg._crossed_homs(G, x.d, phi, z, pinned=False)


@dataclass
class PBGInstance:
    name: str
    x: GroupXMod
    nerve: Nerve
    group: FiniteGroup
    phihat: pbg.RepFamily
    data: pbg.TransitionData
    stratum: str = "pair"

    @property
    def atlas(self) -> PrincipalAtlas:
        return self.data.atlas

    def build(self) -> pbg.PBGXMod:
        return pbg.build_pbg_xmod(self.x, self.data, self.phihat, name=self.name)


def _sheets(rng: random.Random, x: GroupXMod, nerve: Nerve, G: FiniteGroup, phi: dict[str, GroupHom]):
    """s_ij(g) = φ(g)(s_ij(e))·c_i(g)⁻¹c_j(g) from a D-valued cocycle and central crossed c_i."""
    d = x.d
    edges = nerve.of_degree(1)
    cocs = _cocycles(nerve, d)
    base = rng.choice(cocs)
    cands = _central_crossed(G, x, phi)
    c = [rng.choice(cands) for _ in range(nerve.n)]
    return {(i, j): {g: d.prod(phi[g](base[(i, j)]), d.inv(c[i][g]), c[j][g]) for g in G}
            for (i, j) in edges}


_COC: dict[tuple, list] = {}


def _cocycles(nerve: Nerve, d: FiniteGroup) -> list[dict]:
    """All D-valued 1-cocycles of the nerve (d abelian or not), by backtracking."""
    key = (nerve.name, tuple(nerve.labels), d.name, tuple(d.elements))
    if key in _COC:
        return _COC[key]
    edges = nerve.of_degree(1)
    tris = nerve.of_degree(2)
    pos = {e: n for n, e in enumerate(edges)}
    out = []
    vals: list[str] = [""] * len(edges)

    def go(n):
        if n == len(edges):
            out.append({e: vals[pos[e]] for e in edges})
            return
        for a in d:
            vals[n] = a
            if all(d.mul(vals[pos[(i, j)]], vals[pos[(j, k)]]) == vals[pos[(i, k)]]
                   for (i, j, k) in tris if max(pos[(i, j)], pos[(j, k)], pos[(i, k)]) == n):
                go(n + 1)

    go(0)
    _COC[key] = out
    return out


def seg2() -> Nerve:
    """Two charts on two points meeting in one of them."""
    return Nerve(["a", "b"], {"1": ["a", "b"], "2": ["b"]}, name="seg2")


def fork3() -> Nerve:
    """Three charts on two points, all containing the second one."""
    return Nerve(["a", "b"], {"1": ["a", "b"], "2": ["b"], "3": ["a", "b"]}, name="fork3")


def nerve_by_name(name: str) -> Nerve:
    extra = {"seg2": seg2, "fork3": fork3, "single2": lambda: single_chart(2)}
    return extra[name]() if name in extra else NAMED_NERVES[name]()


def pbg_instances(seed: int = 0, count: int = 60) -> list[PBGInstance]:
    """Pair PBG crossed modules within the caps (≤ 4 charts, |G| ≤ 4, |H| ≤ 8, |P| ≤ 8)."""
    rng = random.Random(seed)
    nerves = [n for n in NERVES if n != "single"] + ["seg2", "fork3", "single2"]
    by_g: dict[str, list] = {}
    for gname in GROUPS_G:
        g = standard_group(gname)
        row = []
        for (hn, kind), nname in itertools.product(XMOD_TABLE, nerves):
            nv = nerve_by_name(nname)
            if len(nv.points) * len(g) <= MAX_POINTS and nv.n <= MAX_CHARTS:
                row.append(((hn, kind), gname, nname))
        rng.shuffle(row)
        by_g[gname] = row
    # interleave the structure groups so that every one is represented
    combos = [c for row in itertools.zip_longest(*by_g.values()) for c in row if c is not None]
    out: list[PBGInstance] = []
    xcache: dict = {}
    for (hn, kind), gname, nname in combos:
        if len(out) >= count:
            break
        if (hn, kind) not in xcache:
            xcache[(hn, kind)] = group_xmod(hn, kind)
        inst = _make(rng, xcache[(hn, kind)], nerve_by_name(nname), standard_group(gname), len(out))
        if inst is not None and _usable(inst):
            out.append(inst)
    return out


def _make(rng: random.Random, x: GroupXMod, nerve: Nerve, G: FiniteGroup, n: int,
          stratum: str = "pair") -> PBGInstance | None:
    acts = _right_actions(G, x)
    if not acts:
        return None
    # prefer a nontrivial action when there is one
    nontrivial = [a for a in acts if any(f != GroupHom.identity(x.h) for f in a.values())]
    act = rng.choice(nontrivial) if nontrivial and rng.random() < 0.75 else acts[0]
    phi = {g: induced(x, act[g]) for g in G}
    atlas = PrincipalAtlas(nerve, G)
    sheets = _sheets(rng, x, nerve, G, phi)
    td = pbg.TransitionData(atlas, x.d, pbg.RepFamily.uniform(G, x.d, nerve.n, lambda g: phi[g]), sheets,
                            name=f"td{n}")
    phihat = pbg.RepFamily.uniform(G, x.h, nerve.n, lambda g: act[g])
    name = f"pbg{n:02d}_{x.name}_{G.name}_{nerve.name}"
    return PBGInstance(name, x, nerve, G, phihat, td, stratum)


def _usable(inst: PBGInstance) -> bool:
    """The instance builds a PBG crossed module and admits equivariant lifts."""
    try:
        pbg.lift_data(inst.build())
    except XModKitError:
        return False
    return True


def rp2_instance() -> PBGInstance:
    """Z4 -> Z2 over the RP^2 nerve with a transition cocycle of nonzero Bockstein."""
    x = group_xmod("Z4", "Z2")
    nerve = NAMED_NERVES["rp2"]()
    G = standard_group("1")
    cx = CechComplex(nerve, x.d)
    for c in _cocycles(nerve, x.d):
        cc = cx.cochain(1, dict(c))
        if cx.primitive(cc) is None:
            break
    atlas = PrincipalAtlas(nerve, G)
    e = G.identity
    td = pbg.TransitionData(atlas, x.d, pbg.RepFamily.uniform(G, x.d, nerve.n), {k: {e: v} for k, v in c.items()},
                            name="rp2")
    return PBGInstance("rp2_Z4/Z2", x, nerve, G, pbg.RepFamily.uniform(G, x.h, nerve.n), td, stratum="nonzero")


@dataclass
class LiftingInstance:
    """A group crossed module over a nerve with a transition cocycle s and a lift ŝ."""
    name: str
    x: GroupXMod
    nerve: Nerve
    s: dict[tuple[int, int], str]
    shat: dict[tuple[int, int], str]
    stratum: str = "pair"

    def tc(self) -> xm_.TransitionCocycleWithLift:
        return xm_.TransitionCocycleWithLift(self.s, self.shat)

    def groupoid_xmod(self) -> xm_.GroupoidXMod:
        return xm_.xmod_over(self.nerve.points, self.x)

    def vertex_tc(self) -> xm_.TransitionCocycleWithLift:
        """The same data with s named as isotropy arrows of the groupoid crossed module."""
        x0 = self.nerve.points[0]
        return xm_.TransitionCocycleWithLift({k: f"{x0}:{v}:{x0}" for k, v in self.s.items()}, self.shat)


def lifting_instances(seed: int = 0, count: int = 50) -> list[LiftingInstance]:
    rng = random.Random(seed + 1)
    out = []
    nerves = ["single", "path2", "triangle", "circle3", "path3", "circle4", "tetrahedron"]
    combos = list(itertools.product(XMOD_TABLE, nerves))
    rng.shuffle(combos)
    for (hn, kind), nn in combos[:count]:
        x = group_xmod(hn, kind)
        nerve = NAMED_NERVES[nn]()
        s = rng.choice(_cocycles(nerve, x.d))
        out.append(LiftingInstance(f"lift{len(out):02d}_{x.name}_{nerve.name}", x, nerve, s,
                                   xm_.random_lift(x, s, rng)))
    r = rp2_instance()
    s = {k: v[r.group.identity] for k, v in r.data.sheets.items()}
    out.append(LiftingInstance("lift_rp2_Z4/Z2", r.x, r.nerve, s, xm_.random_lift(r.x, s, rng), stratum="nonzero"))
    return out


def groupoid_xmods(seed: int = 0) -> list[tuple[str, xm_.GroupoidXMod]]:
    """Groupoid crossed modules covering the trivial-kernel, coupling and pair strata."""
    out = []
    for hn, kind in XMOD_TABLE:
        x = group_xmod(hn, kind)
        out.append((f"over_{x.name}", xm_.xmod_over(["a", "b"], x)))
    # from extensions M x E x M with F = E and a central N
    for en in ["Z4", "D4", "Q8", "Z2xZ4"]:
        e = standard_group(en)
        ext = xm_.extension_from_vertex_group(["a", "b", "c"], e, list(e.elements))
        z = sorted(center(e).elements)
        out.append((f"ext_{en}", xm_.xmod_from_extension(ext, {o: z for o in ext.total.objects})))
    return out


def extensions(seed: int = 0) -> list[tuple[str, GroupoidExtension]]:
    """K >-> M x E x M ->> quotient, the corpus extensions for the round-trip checks."""
    table = [("Z4", ["0", "2"]), ("Z2xZ2", None), ("D4", "center"), ("Q8", "center"), ("Z6", ["0", "3"]),
             ("S3", ["012", "120", "201"]), ("Z8", ["0", "4"]), ("D4", "all"), ("Z2", "trivial")]
    rng = random.Random(seed + 2)
    out = []
    for n, (en, kn) in enumerate(table):
        e = standard_group(en)
        if kn == "center":
            k = sorted(center(e).elements)
        elif kn == "all":
            k = list(e.elements)
        elif kn == "trivial":
            k = [e.identity]
        elif kn is None:
            k = sorted({e.identity, rng.choice([a for a in e if a != e.identity and e.order_of(a) == 2])})
        else:
            k = kn
        if not e.is_normal(k):
            k = [e.identity]
        objs = [f"x{i}" for i in range(1 + n % 3)]
        out.append((f"ext{n}_{en}", xm_.extension_from_vertex_group(objs, e, k)))
    return out


def content_hash(docs: dict[str, dict]) -> str:
    blob = json.dumps(docs, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def data_pairs(seed: int = 0, instances: list[PBGInstance] | None = None,
               tries: int = 12) -> list[tuple[str, pbg.TransitionData, pbg.TransitionData]]:
    """Pairs of transition data on a common atlas: one section change of every
    instance, plus the first re-drawn datum not equivalent to it when one turns up."""
    rng = random.Random(seed + 3)
    out = []
    for inst in instances if instances is not None else pbg_instances(seed):
        a = inst.data
        b = a.equivalent_by(pbg.random_equivalence(a, rng))
        out.append((f"{inst.name}~sections", a, b))
        G = inst.group
        acts = _right_actions(G, inst.x)
        for _ in range(tries):
            act = rng.choice(acts)
            phi = {g: induced(inst.x, act[g]) for g in G}
            sheets = _sheets(rng, inst.x, inst.nerve, G, phi)
            c = pbg.TransitionData(a.atlas, a.h, pbg.RepFamily.uniform(G, a.h, inst.nerve.n, lambda g: phi[g]),
                                   sheets, name=a.name + "*")
            if not pbg.data_equivalent(a, c, build_map=False).equivalent:
                out.append((f"{inst.name}~redrawn", a, c))
                break
    return out


# --- workspace export ----------------------------------------------------------------------

def _slug(s: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in s)


def corpus_documents(seed: int = 0, max_size: int | None = None) -> dict[str, dict]:
    """Every corpus family as named documents; ``max_size`` caps |H| and |P|."""
    from . import documents as dm
    docs: dict[str, dict] = {}

    def put(d: dict) -> str:
        prev = docs.get(d["name"])
        if prev is not None and prev != d:
            raise ValueError(f"conflicting corpus documents named {d['name']}")
        docs[d["name"]] = d
        return d["name"]

    def group(g: FiniteGroup, tag: str) -> str:
        return put(dm.group_doc(g, f"group_{_slug(tag)}"))

    def xmod(x: GroupXMod) -> str:
        h = group(x.h, x.h.name)
        d = group(x.d, f"{x.name}_target")
        return put(dm.group_xmod_doc(x, f"xmod_{_slug(x.name)}", h, d))

    def nerve(n: Nerve) -> str:
        return put(dm.nerve_doc(n, f"nerve_{_slug(n.name)}_{len(n.labels)}c{len(n.points)}p"))

    for inst in pbg_instances(seed) + [rp2_instance()]:
        if max_size and (len(inst.x.h) > max_size or len(inst.nerve.points) * len(inst.group) > max_size):
            continue
        xn, nn = xmod(inst.x), nerve(inst.nerve)
        gn = group(inst.group, f"G_{inst.group.name}")
        tdn = put(dm.data_doc(inst.data, f"data_{_slug(inst.name)}", nn, gn, docs[xn]["d"]))
        put({"kind": "pbg-xmod", "name": f"pbgx_{_slug(inst.name)}", "xmod": xn, "data": tdn,
             "phihat": inst.phihat.to_doc(), "note": inst.stratum})
    for li in lifting_instances(seed):
        if max_size and len(li.x.h) > max_size:
            continue
        xn, nn = xmod(li.x), nerve(li.nerve)
        put({"kind": "lifting-instance", "name": f"inst_{_slug(li.name)}", "xmod": xn, "nerve": nn,
             "s": {dm.edge_key(li.nerve, e): v for e, v in sorted(li.s.items())},
             "shat": {dm.edge_key(li.nerve, e): v for e, v in sorted(li.shat.items())}, "note": li.stratum})
    for name, ext in extensions(seed):
        e = ext.total.vertex_group
        gn = group(e, e.name)
        put({"kind": "extension", "name": f"extension_{_slug(name)}", "objects": list(ext.total.objects),
             "group": gn, "kernel": sorted(ext.kernel.fibers[ext.total.objects[0]].elements)})
    return docs


def corpus_hash(seed: int = 0, max_size: int | None = None) -> str:
    return content_hash(corpus_documents(seed, max_size))
