import random

import pytest
from hypothesis import given, settings, strategies as st

from xmodkit import algebra as al
from xmodkit import corpus, site
from xmodkit import xmod as xm
from xmodkit.errors import LiftMismatch, NotACocycle, NotCentral, NotNormal, ObstructionNonzero

LIFTS = corpus.lifting_instances(0)
ZERO = [i for i in LIFTS if i.stratum != "nonzero"]
RP2 = next(i for i in LIFTS if i.stratum == "nonzero")


def z4_over(nerve):
    gx = al.central_quotient_xmod(al.cyclic(4), ["0", "2"])
    return gx, xm.xmod_over(nerve.points, gx)


# --- groupoid crossed modules -------------------------------------------------------

def test_xmod_over_is_valid_pair():
    gx, x = z4_over(site.triangle())
    rep = xm.validate_xmod(x)
    assert rep.valid and rep.pair and not rep.coupling
    assert rep.cokernel is not None and len(rep.cokernel) == len(site.triangle().points) ** 2


def test_broken_peiffer_is_caught():
    gx, x = z4_over(site.path(2))
    bad = xm.GroupoidXMod(x.f, x.omega, x.tau,
                          type(x.rho)(x.rho.groupoid, x.rho.bundle, lambda a, f: f if f != "1" else "3"))
    rep = xm.validate_xmod(bad)
    assert not rep.valid


@pytest.mark.parametrize("name,gx", corpus.groupoid_xmods(0), ids=lambda v: v if isinstance(v, str) else "")
def test_corpus_groupoid_xmods_valid(name, gx):
    rep = xm.validate_xmod(gx)
    assert rep.valid, [k for k, v in rep.conditions.items() if not v]


def test_extension_requires_normal_kernel():
    s3 = al.symmetric(3)
    transposition = next(a for a in s3 if a != s3.identity and s3.order_of(a) == 2)
    with pytest.raises(NotNormal):
        xm.extension_from_vertex_group(["a", "b"], s3, [s3.identity, transposition])


def test_xmod_from_extension_needs_central_subbundle():
    s3 = al.symmetric(3)
    a3 = ["012", "120", "201"]
    ext = xm.extension_from_vertex_group(["a", "b"], s3, list(s3))
    with pytest.raises(NotCentral):
        xm.xmod_from_extension(ext, {o: a3 for o in ["a", "b"]})


# --- lifting obstruction -------------------------------------------------------------

def test_lift_must_cover_cocycle():
    gx, _ = z4_over(site.triangle())
    s = {(0, 1): "1", (1, 2): "0", (0, 2): "1"}
    with pytest.raises(LiftMismatch):
        xm.TransitionCocycleWithLift(s, {(0, 1): "0", (1, 2): "0", (0, 2): "1"}).check(gx, site.triangle())


def test_non_cocycle_rejected():
    gx, _ = z4_over(site.triangle())
    s = {(0, 1): "1", (1, 2): "0", (0, 2): "0"}
    with pytest.raises(NotACocycle):
        xm.TransitionCocycleWithLift(s, {(0, 1): "1", (1, 2): "0", (0, 2): "0"}).check(gx, site.triangle())


def test_rp2_obstruction_nonzero_and_no_extension():
    ob = xm.lifting_obstruction(RP2.x, RP2.nerve, RP2.tc())
    assert ob.closed and not ob.vanishes
    assert xm.opext_exists_exhaustive(RP2.x, RP2.nerve, RP2.s) is None
    with pytest.raises(ObstructionNonzero):
        xm.opext_from_vanishing(RP2.groupoid_xmod(), RP2.nerve, RP2.vertex_tc())


def test_triangle_obstruction_by_hand():
    # Z4 -> Z2 with lifts shat_01 = 1, shat_12 = 0, shat_02 = 3:
    # shat_12 - shat_02 + shat_01 = 0 - 3 + 1 = 2 (mod 4)
    gx, _ = z4_over(site.triangle())
    tc = xm.TransitionCocycleWithLift({(0, 1): "1", (1, 2): "0", (0, 2): "1"},
                                      {(0, 1): "1", (1, 2): "0", (0, 2): "3"})
    ob = xm.lifting_obstruction(gx, site.triangle(), tc)
    assert ob.cochain.values == {(0, 1, 2): "2"}
    assert ob.vanishes        # every 2-cochain on one triangle is a coboundary


@pytest.mark.parametrize("inst", ZERO[:25], ids=lambda i: i.name)
def test_obstruction_matches_exhaustive(inst):
    ob = xm.lifting_obstruction(inst.x, inst.nerve, inst.tc())
    assert ob.closed and ob.conventions_agree
    assert ob.vanishes == (xm.opext_exists_exhaustive(inst.x, inst.nerve, inst.s) is not None)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(LIFTS), st.integers(0, 10 ** 6))
def test_class_independent_of_lift(inst, seed):
    rng = random.Random(seed)
    a = xm.lifting_obstruction(inst.x, inst.nerve, inst.tc())
    b = xm.lifting_obstruction(inst.x, inst.nerve,
                               xm.TransitionCocycleWithLift(inst.s, xm.random_lift(inst.x, inst.s, rng)))
    assert a.classes_equal(b)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(LIFTS), st.sampled_from(["paper", "standard"]))
def test_conventions_give_same_class(inst, conv):
    ob = xm.lifting_obstruction(inst.x, inst.nerve, inst.tc(), convention=conv)
    assert ob.convention == conv and ob.conventions_agree


# --- operator extensions --------------------------------------------------------------

@pytest.mark.parametrize("inst", [i for i in ZERO if i.nerve.name in ("triangle", "circle3", "path2")][:6],
                         ids=lambda i: i.name)
def test_opext_valid_and_classified(inst):
    gx = inst.groupoid_xmod()
    oe = xm.opext_from_vanishing(gx, inst.nerve, inst.vertex_tc())
    rep = xm.validate_opext(oe)
    assert rep.valid, rep.conditions
    cl = xm.classify(gx, inst.nerve, inst.vertex_tc())
    assert len(cl.classes) == cl.h1_order and cl.free_transitive


def test_h1_twist_by_coboundary_is_equivalent_and_by_class_is_not():
    gx = al.central_quotient_xmod(al.cyclic(4), ["0", "2"])
    nerve = site.circle(3)
    x = xm.xmod_over(nerve.points, gx)
    s = {e: "0" for e in nerve.of_degree(1)}
    x0 = nerve.points[0]
    tc = xm.TransitionCocycleWithLift({k: f"{x0}:{v}:{x0}" for k, v in s.items()}, {k: "0" for k in s})
    e1 = xm.opext_from_vanishing(x, nerve, tc)
    cx = site.CechComplex(nerve, gx.h, ["0", "2"])
    for f in cx.all_cochains(1):
        if not cx.coboundary(f).is_zero():
            continue
        e2 = xm.h1_action(e1, f)
        assert xm.validate_opext(e2).valid
        assert xm.opext_equivalent(e1, e2).equivalent == (cx.primitive(f) is not None)
