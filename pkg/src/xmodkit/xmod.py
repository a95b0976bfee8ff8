"""Crossed modules of finite groupoids, operator extensions and the lifting obstruction.

A crossed module here is τ: F -> Ω with F a group bundle over the objects of
Ω, τ landing in the isotropy, and a representation ρ of Ω on F.  Over a nerve
of charts, operator extensions of a pair crossed module are built by gluing
lifted transition functions; the gluing itself is the PBG machinery with the
trivial structure group.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from . import pbg
from .algebra import FiniteGroup, GroupHom, GroupXMod, center, trivial_group
from .errors import (AxiomViolation, LiftMismatch, NotACocycle, NotCentral, NotNormal,
                     ObstructionNonzero, SizeBoundExceeded)
from .groupoid import (FiniteGroupoid, GroupBundle, GroupoidExtension, GroupoidMorphism,
                       GroupoidRepresentation, quotient_by_normal_subbundle, trivialize, trivialized,
                       validate_extension, validate_representation)
from .site import CechComplex, CentralCochain, Nerve, PrincipalAtlas


@dataclass
class GroupoidXMod:
    f: GroupBundle
    omega: FiniteGroupoid
    tau: Callable[[str, str], str]            # (object, fibre element) -> isotropy arrow name
    rho: GroupoidRepresentation
    name: str = ""

    def tau_index(self, x: str, f: str) -> int:
        return self.omega.index[self.tau(x, f)]


@dataclass
class XModReport:
    conditions: dict[str, bool]
    witnesses: dict[str, tuple]
    kernel: dict[str, frozenset[str]] = field(default_factory=dict)
    image: dict[str, frozenset[str]] = field(default_factory=dict)
    cokernel: FiniteGroupoid | None = None
    coupling: bool = False
    pair: bool = False

    @property
    def valid(self) -> bool:
        return all(self.conditions.values())


def validate_xmod(x: GroupoidXMod) -> XModReport:
    om, fb = x.omega, x.f
    cond = {k: True for k in ("rho_representation", "tau_hom", "i_equivariance", "ii_peiffer",
                              "image_normal", "kernel_central", "rho_kernel_well_defined")}
    wit: dict[str, tuple] = {}

    def fail(k, w):
        if cond[k]:
            cond[k], wit[k] = False, w

    rr = validate_representation(x.rho)
    if not rr.valid:
        fail("rho_representation", tuple(k for k, v in rr.conditions.items() if not v))
    kernel, image = {}, {}
    for xo in om.objects:
        fx = fb.fibers[xo]
        xi = om.obj_index[xo]
        unit = om.arrows[int(om.units[xi])]
        for a in fx:
            t = x.tau_index(xo, a)
            if om.src[t] != xi or om.tgt[t] != xi:
                fail("tau_hom", (xo, a, "not isotropy"))
            for b in fx:
                if om.comp(t, x.tau_index(xo, b)) != x.tau_index(xo, fx.mul(a, b)):
                    fail("tau_hom", (xo, a, b))
                # ρ(τ(a), b) = a b a⁻¹
                if x.rho.act(om.arrows[t], b) != fx.conj(a, b):
                    fail("ii_peiffer", (xo, a, b))
        kernel[xo] = frozenset(a for a in fx if x.tau(xo, a) == unit)
        image[xo] = frozenset(x.tau(xo, a) for a in fx)
        z = center(fx).elements
        if not kernel[xo] <= z:
            fail("kernel_central", (xo, sorted(kernel[xo] - z)[0]))
    for k in range(len(om)):
        s, t = om.objects[om.src[k]], om.objects[om.tgt[k]]
        ki = om.inv(k)
        for a in fb.fibers[s]:
            lhs = x.tau_index(t, x.rho.act(om.arrows[k], a))
            if lhs != om.comp(om.comp(k, x.tau_index(s, a)), ki):
                fail("i_equivariance", (om.arrows[k], a))
        for m in image[s]:
            if om.arrows[om.comp(om.comp(k, om.index[m]), ki)] not in image[t]:
                fail("image_normal", (om.arrows[k], m))
        # ρ on ker τ only depends on the class of the arrow modulo im τ
        for a in fb.fibers[t]:
            tf = x.tau_index(t, a)
            k2 = om.comp(tf, k)
            for c in kernel[s]:
                if x.rho.act(om.arrows[k2], c) != x.rho.act(om.arrows[k], c):
                    fail("rho_kernel_well_defined", (om.arrows[k], a, c))
    rep = XModReport(cond, wit, kernel, image)
    if cond["image_normal"]:
        coker, _ = quotient_by_normal_subbundle(om, {xo: sorted(v) for xo, v in image.items()})
        rep.cokernel = coker
        n = len(coker.objects)
        rep.pair = coker.is_transitive() and len(coker) == n * n
    rep.coupling = all(kernel[xo] == center(fb.fibers[xo]).elements for xo in om.objects)
    return rep


def check_xmod(x: GroupoidXMod) -> GroupoidXMod:
    rep = validate_xmod(x)
    if not rep.valid:
        k = next(k for k, v in rep.conditions.items() if not v)
        raise AxiomViolation(f"crossed module condition {k} fails", witness=rep.witnesses.get(k))
    return x


def xmod_over(objects: Iterable[str], gx: GroupXMod, name: str = "") -> GroupoidXMod:
    """The crossed module F = M x H -> M x D x M of a group crossed module."""
    objs = [str(o) for o in objects]
    om = trivialized(objs, gx.d)
    bundle = GroupBundle.constant(objs, gx.h)

    def tau(xo: str, a: str) -> str:
        return f"{xo}:{gx.boundary(a)}:{xo}"

    def act(arrow: str, a: str) -> str:
        return gx.action[arrow.split(":")[1]](a)

    return GroupoidXMod(bundle, om, tau, GroupoidRepresentation(om, bundle, act), name=name or gx.name)


def extension_from_vertex_group(objects: Iterable[str], e: FiniteGroup, k: Iterable[str]) -> GroupoidExtension:
    """K >-> M x E x M ->> (M x E x M)/K for a normal subgroup K of E."""
    objs = [str(o) for o in objects]
    k = sorted(set(k))
    if not e.is_normal(k):
        raise NotNormal("subgroup is not normal")
    om = trivialized(objs, e)
    q, proj = quotient_by_normal_subbundle(om, {x: [f"{x}:{a}:{x}" for a in k] for x in objs})
    kg = e.subgroup(k, name=f"K{len(k)}")
    bundle = GroupBundle(objs, {x: kg for x in objs})
    return GroupoidExtension(bundle, om, q, lambda x, f: f"{x}:{f}:{x}", proj)


def xmod_from_extension(ext: GroupoidExtension, n: Mapping[str, Iterable[str]]) -> GroupoidXMod:
    """⟨F, ∂, Ω/N, ρ⟩ for a central normal subbundle N of F, ρ(⟨ξ⟩, f) = ι⁻¹(ξ ι(f) ξ⁻¹)."""
    tot, fb = ext.total, ext.kernel
    n = {x: sorted(set(v)) for x, v in n.items()}
    for x in tot.objects:
        n.setdefault(x, [fb.fibers[x].identity])
        z = center(fb.fibers[x]).elements
        bad = set(n[x]) - z
        if bad:
            raise NotCentral("N is not central in F", witness=(x, sorted(bad)[0]))
    back = {}
    for x in tot.objects:
        for f in fb.fibers[x]:
            back[ext.iota_index(x, f)] = (x, f)
    q, proj = quotient_by_normal_subbundle(tot, {x: [ext.iota(x, f) for f in v] for x, v in n.items()})

    def tau(x: str, f: str) -> str:
        return q.arrows[int(proj.arrow_map[ext.iota_index(x, f)])]

    def act(arrow: str, f: str) -> str:
        k = tot.index[arrow]
        x = tot.objects[tot.src[k]]
        c = tot.comp(tot.comp(k, ext.iota_index(x, f)), tot.inv(k))
        if c not in back:
            raise NotNormal("ι(F) is not normal in the total groupoid", witness=(arrow, f))
        return back[c][1]

    return check_xmod(GroupoidXMod(fb, q, tau, GroupoidRepresentation(q, fb, act), name=f"{tot.name}/N"))


def vertex_xmod(x: GroupoidXMod, base: int = 0) -> GroupXMod:
    """The group crossed module F_x0 -> Ω_x0^x0 at the base object."""
    om = x.omega
    xo = om.objects[base]
    h = x.f.fibers[xo]
    d = om.isotropy(base)
    boundary = GroupHom(h, d, {a: x.tau(xo, a) for a in h})
    action = {g: GroupHom(h, h, {a: x.rho.act(g, a) for a in h}) for g in d}
    return GroupXMod(h, d, boundary, action, name=x.name).check()


# --- transition cocycles and the lifting obstruction -------------------------------------------

@dataclass
class TransitionCocycleWithLift:
    """s_ij in ∂(H) ⊆ Ω_x0^x0 and ŝ_ij in H, one value per overlap (i < j)."""
    s: dict[tuple[int, int], str]
    shat: dict[tuple[int, int], str]

    def check(self, gx: GroupXMod, nerve: Nerve) -> "TransitionCocycleWithLift":
        d = gx.d
        for e in nerve.of_degree(1):
            if e not in self.s or e not in self.shat:
                raise AxiomViolation("transition value missing", witness=e)
            if gx.boundary(self.shat[e]) != self.s[e]:
                raise LiftMismatch("∂ŝ ≠ s", witness=e)
        for (i, j, k) in nerve.of_degree(2):
            if d.mul(self.s[(i, j)], self.s[(j, k)]) != self.s[(i, k)]:
                raise NotACocycle("s fails the cocycle identity", witness=(i, j, k))
        return self


def cocycle_from_sections(omega: FiniteGroupoid, nerve: Nerve, sections: Mapping[int, Mapping[str, str]],
                          base: int = 0) -> dict[tuple[int, int], str]:
    """s_ij = σ_i⁻¹ σ_j for local sections σ_i(m): x0 -> m; must be constant on U_ij."""
    out = {}
    for (i, j) in nerve.of_degree(1):
        vals = set()
        for m in nerve.sets[(i, j)]:
            a, b = omega.index[sections[i][m]], omega.index[sections[j][m]]
            if omega.src[a] != base or omega.tgt[a] != omega.obj_index[m]:
                raise AxiomViolation("section arrow has wrong endpoints", witness=(i, m))
            vals.add(omega.arrows[omega.comp(omega.inv(a), b)])
        if len(vals) != 1:
            raise AxiomViolation("transition function is not locally constant", witness=(i, j))
        out[(i, j)] = vals.pop()
    return out


def tree_sections(omega: FiniteGroupoid, nerve: Nerve, twist: Mapping[int, str] | None = None,
                  base: int = 0) -> dict[int, dict[str, str]]:
    """σ_i(m) = tree(m)·c_i from a spanning tree of Ω and chart elements c_i of Ω_x0^x0."""
    tr = trivialize(omega, base)
    out = {}
    for i in range(nerve.n):
        c = omega.index[twist[i]] if twist else int(omega.units[base])
        out[i] = {m: omega.arrows[omega.comp(int(tr.tree[omega.obj_index[m]]), c)] for m in nerve.charts[i]}
    return out


@dataclass
class LiftingObstruction:
    cochain: CentralCochain              # in the chosen convention
    other: CentralCochain                # in the other convention
    convention: str
    closed: bool
    correction: CentralCochain | None    # r with ŝ·r a cocycle

    @property
    def vanishes(self) -> bool:
        return self.correction is not None

    @property
    def conventions_agree(self) -> bool:
        return self.cochain.key() == self.other.key()

    def classes_equal(self, other: "LiftingObstruction") -> bool:
        return self.cochain.complex.classes_equal(self.cochain, other.cochain)[0]


def _values(gx: GroupXMod, nerve: Nerve, shat: Mapping, convention: str) -> dict:
    h = gx.h
    out = {}
    for (i, j, k) in nerve.of_degree(2):
        a, b, c = shat[(i, j)], shat[(j, k)], shat[(i, k)]
        out[(i, j, k)] = h.prod(b, h.inv(c), a) if convention == "paper" else h.prod(a, b, h.inv(c))
    return out


def lifting_obstruction(x: GroupoidXMod | GroupXMod, nerve: Nerve, tc: TransitionCocycleWithLift,
                        convention: str = "paper") -> LiftingObstruction:
    gx = x if isinstance(x, GroupXMod) else vertex_xmod(x)
    if convention not in ("paper", "standard"):
        raise AxiomViolation(f"unknown convention {convention!r}")
    tc.check(gx, nerve)
    h = gx.h
    k0 = sorted(gx.kernel)
    z = center(h).elements
    cx = CechComplex(nerve, h, k0)
    vals = {}
    for conv in ("paper", "standard"):
        vals[conv] = _values(gx, nerve, tc.shat, conv)
        for t, v in vals[conv].items():
            if v not in z:
                raise NotCentral("obstruction value is not central", witness=t)
            if v not in gx.kernel:
                raise NotCentral("obstruction value is not in ker ∂", witness=t)
    other = "standard" if convention == "paper" else "paper"
    e = CentralCochain(cx, 2, dict(vals[convention]))
    e2 = CentralCochain(cx, 2, dict(vals[other]))
    closed = cx.coboundary(e).is_zero()
    neg = CentralCochain(cx, 2, {t: h.inv(v) for t, v in vals["standard"].items()})
    r = cx.primitive(neg) if closed else None
    return LiftingObstruction(e, e2, convention, closed, r)


# --- operator extensions over M ------------------------------------------------------------

@dataclass
class OperatorExtension:
    """F >-> Ω̂ ->> Ω̂/ι(F) with μ: Ω̂ -> Ω, over the objects of Ω."""
    x: GroupoidXMod
    extension: GroupoidExtension
    mu: GroupoidMorphism
    inner: pbg.OperatorExtension         # the same gluing with trivial structure group
    shat: dict[tuple[int, int], str]

    @property
    def total(self) -> FiniteGroupoid:
        return self.extension.total


@dataclass
class OpextReport:
    conditions: dict[str, bool]
    witnesses: dict[str, tuple]

    @property
    def valid(self) -> bool:
        return all(self.conditions.values())


def validate_opext(oe: OperatorExtension) -> OpextReport:
    x, ext, mu = oe.x, oe.extension, oe.mu
    tot, om = ext.total, x.omega
    cond, wit = {}, {}
    er = validate_extension(ext)
    cond["extension"] = er.valid
    if not er.valid:
        wit["extension"] = tuple(k for k, v in er.conditions.items() if not v)
    cond["mu_morphism"] = mu.is_morphism()
    cond["mu_identity_on_objects"] = [om.objects[o] for o in mu.obj_map] == list(tot.objects)
    ok_tau = ok_rho = True
    for xo, f in ext.kernel.elements():
        if om.arrows[int(mu.arrow_map[ext.iota_index(xo, f)])] != x.tau(xo, f):
            ok_tau = False
            wit.setdefault("mu_iota_is_tau", (xo, f))
    for a in range(len(tot)):
        s, t = tot.objects[tot.src[a]], tot.objects[tot.tgt[a]]
        ai = tot.inv(a)
        m = om.arrows[int(mu.arrow_map[a])]
        for f in ext.kernel.fibers[s]:
            lhs = ext.iota_index(t, x.rho.act(m, f))
            if lhs != tot.comp(tot.comp(a, ext.iota_index(s, f)), ai):
                ok_rho = False
                wit.setdefault("iota_rho", (tot.arrows[a], f))
    cond["mu_iota_is_tau"] = ok_tau
    cond["iota_rho"] = ok_rho
    return OpextReport(cond, wit)


class _Context:
    """Group crossed module at the base and the trivial-G gluing apparatus for a nerve."""

    def __init__(self, x: GroupoidXMod, nerve: Nerve, tc: TransitionCocycleWithLift):
        self.x, self.nerve, self.tc = x, nerve, tc
        self.gx = vertex_xmod(x)
        tc.check(self.gx, nerve)
        one = trivial_group()
        self.atlas = PrincipalAtlas(nerve, one)
        e = one.identity
        self.td = pbg.TransitionData(self.atlas, self.gx.d, pbg.RepFamily.uniform(one, self.gx.d, nerve.n),
                                     {k: {e: v} for k, v in tc.s.items()})
        self.px = pbg.build_pbg_xmod(self.gx, self.td, pbg.RepFamily.uniform(one, self.gx.h, nerve.n))
        self.ld = pbg.lift_data(self.px).with_lifts({k: {e: v} for k, v in tc.shat.items()})
        self.e = e


def _wrap(ctx: _Context, inner: pbg.OperatorExtension) -> OperatorExtension:
    """Rename objects m@e to m and map μ into the given Ω through its spanning tree."""
    x, gx = ctx.x, ctx.gx
    om = x.omega
    h = gx.h
    pts = list(ctx.nerve.points)
    tot = trivialized(pts, h, name=f"opext({x.name})")
    if sorted(om.objects) != sorted(pts):
        raise AxiomViolation("the nerve points must be the objects of Ω")
    tr = trivialize(om, 0)
    # Ω̂ global coordinate (t, k, s) ↦ tree(t)·∂k·tree(s)⁻¹
    p, nh = len(pts), len(h)
    th = inner.x.th
    amap = np.empty(len(tot), dtype=np.int32)
    for t in range(p):
        for k in range(nh):
            dk = om.index[gx.boundary(th.el[k])]
            for s in range(p):
                ti, si = om.obj_index[pts[t]], om.obj_index[pts[s]]
                amap[(t * nh + k) * p + s] = om.comp(om.comp(int(tr.tree[ti]), dk), om.inv(int(tr.tree[si])))
    mu = GroupoidMorphism(tot, om, np.array([om.obj_index[m] for m in pts], dtype=np.int32), amap)
    # ι(m, f) = (m, ρ(tree(m)⁻¹, f), m)
    fb = x.f

    def iota(m: str, f: str) -> str:
        back = om.arrows[om.inv(int(tr.tree[om.obj_index[m]]))]
        return f"{m}:{x.rho.act(back, f)}:{m}"

    n = {m: [iota(m, f) for f in fb.fibers[m]] for m in pts}
    q, proj = quotient_by_normal_subbundle(tot, n)
    ext = GroupoidExtension(fb, tot, q, iota, proj)
    shat = {k: v[ctx.e] for k, v in inner.lifts.items()}
    return OperatorExtension(x, ext, mu, inner, shat)


def opext_from_vanishing(x: GroupoidXMod, nerve: Nerve, tc: TransitionCocycleWithLift,
                         r: CentralCochain | None = None) -> OperatorExtension:
    ctx = _Context(x, nerve, tc)
    if r is None:
        ob = lifting_obstruction(ctx.gx, nerve, tc)
        if not ob.vanishes:
            raise ObstructionNonzero("the lifting obstruction class is nonzero", witness=ob.cochain.to_doc())
        r = ob.correction
    h = ctx.gx.h
    corrected = {k: {ctx.e: h.mul(v, r[k])} for k, v in tc.shat.items()}
    inner = pbg._opext_from_lifts(ctx.ld, corrected)
    return _wrap(ctx, inner)


def h1_action(e1: OperatorExtension, f: CentralCochain) -> OperatorExtension:
    """Twist the lifts by a ZH-valued 1-cocycle and reglue."""
    inner = e1.inner
    cx = f.complex
    if f.degree != 1:
        raise AxiomViolation("twisting cochain must have degree 1")
    if not cx.coboundary(f).is_zero():
        bad = next(s for s, v in cx.coboundary(f).values.items() if v != cx.zero)
        raise NotACocycle("twisting cochain is not a cocycle", witness=bad)
    e = inner.x.atlas.group.identity
    twisted = pbg.h1g_action(inner, {k: {e: f[k]} for k in inner.lifts})
    tc = TransitionCocycleWithLift(_s_of(e1), {k: v[e] for k, v in twisted.lifts.items()})
    ctx = _Context(e1.x, inner.x.atlas.nerve, tc)
    return _wrap(ctx, twisted)


def _s_of(oe: OperatorExtension) -> dict[tuple[int, int], str]:
    e = oe.inner.x.atlas.group.identity
    return {k: v[e] for k, v in oe.inner.x.td.sheets.items()}


@dataclass
class Equivalence:
    equivalent: bool
    r: dict[int, str] | None = None
    kappa: GroupoidMorphism | None = None


def opext_equivalent(a: OperatorExtension, b: OperatorExtension) -> Equivalence:
    """κ: Ω̂_a -> Ω̂_b with μ_b κ = μ_a and κ ι_a = ι_b, given chartwise by central r_i."""
    res = pbg.opext_equivalent(a.inner, b.inner)
    if not res.equivalent:
        return Equivalence(False)
    kappa = GroupoidMorphism(a.total, b.total, res.kappa.obj_map.copy(), res.kappa.arrow_map.copy())
    if not kappa.is_isomorphism() or not (b.mu.arrow_map[kappa.arrow_map] == a.mu.arrow_map).all():
        raise AxiomViolation("κ does not commute with μ")
    for xo, f in a.extension.kernel.elements():
        if kappa.arrow_map[a.extension.iota_index(xo, f)] != b.extension.iota_index(xo, f):
            raise AxiomViolation("κ does not fix ι", witness=(xo, f))
    e = a.inner.x.atlas.group.identity
    return Equivalence(True, {i: v[e] for i, v in res.r.items()}, kappa)


@dataclass
class Classification:
    extensions: list[OperatorExtension]
    classes: list[list[int]]
    h1_order: int
    free_transitive: bool


def classify(x: GroupoidXMod, nerve: Nerve, tc: TransitionCocycleWithLift, limit: int = 64) -> Classification:
    """Every corrected lift, grouped into equivalence classes of operator extensions."""
    ctx = _Context(x, nerve, tc)
    cl = pbg.classify_opexts(ctx.ld)
    h1 = CechComplex(nerve, ctx.gx.h, sorted(ctx.gx.kernel)).h_order(1)
    exts = []
    if len(cl.lifts) <= limit:
        exts = [_wrap(ctx, pbg._opext_from_lifts(ctx.ld, l)) for l in cl.lifts]
    return Classification(exts, cl.classes, h1, cl.free_transitive and len(cl.classes) == h1)


def opext_exists_exhaustive(x: GroupoidXMod | GroupXMod, nerve: Nerve, s: Mapping[tuple[int, int], str],
                            frames: bool = True, limit: int = 4096) -> dict | None:
    """Search every frame change c_i in D and every lift of c_i s_ij c_j⁻¹ for a cocycle."""
    gx = x if isinstance(x, GroupXMod) else vertex_xmod(x)
    h, d = gx.h, gx.d
    edges, tris = nerve.of_degree(1), nerve.of_degree(2)
    fib = {v: [a for a in h if gx.boundary(a) == v] for v in d}
    frame_sets = itertools.product(d.elements, repeat=nerve.n) if frames else [(d.identity,) * nerve.n]
    total = len(d) ** nerve.n if frames else 1
    if total > limit:
        raise SizeBoundExceeded(f"{total} frame choices")
    pos = {e: n for n, e in enumerate(edges)}
    tri_at: dict[int, list] = {}
    for t in tris:
        tri_at.setdefault(max(pos[(t[0], t[1])], pos[(t[1], t[2])], pos[(t[0], t[2])]), []).append(t)
    for c in frame_sets:
        s2 = {(i, j): d.prod(d.inv(c[i]), s[(i, j)], c[j]) for (i, j) in edges}
        cands = [fib[s2[e]] for e in edges]
        chosen: list[str | None] = [None] * len(edges)

        def go(n: int) -> bool:
            if n == len(edges):
                return True
            for a in cands[n]:
                chosen[n] = a
                if all(h.prod(chosen[pos[(i, j)]], chosen[pos[(j, k)]], h.inv(chosen[pos[(i, k)]])) == h.identity
                       for (i, j, k) in tri_at.get(n, [])):
                    if go(n + 1):
                        return True
            return False

        if go(0):
            return {"frames": list(c), "lifts": {e: chosen[pos[e]] for e in edges}}
    return None


def random_lift(gx: GroupXMod, s: Mapping[tuple[int, int], str], rng: random.Random) -> dict[tuple[int, int], str]:
    return {e: rng.choice([a for a in gx.h if gx.boundary(a) == v]) for e, v in s.items()}
