import random

import pytest
from hypothesis import given, settings, strategies as st

from xmodkit import corpus, pbg
from xmodkit.errors import NotACocycle, NotIsometablic

INSTANCES = corpus.pbg_instances(0)
SMALL = [i for i in INSTANCES if len(i.data.atlas.points) * len(i.x.d) <= 16][:12]
RP2 = corpus.rp2_instance()


# --- transition data and gluing ------------------------------------------------------------

@pytest.mark.parametrize("inst", SMALL, ids=lambda i: i.name)
def test_glue_is_pbg_with_expected_size(inst):
    td = inst.data
    g = pbg.glue(td)
    rep = pbg.validate_pbg(g)
    assert rep.valid, rep.conditions
    assert len(g.groupoid) == len(td.atlas.points) ** 2 * len(td.h)


@pytest.mark.parametrize("inst", SMALL, ids=lambda i: i.name)
def test_extract_after_glue_is_equivalent(inst):
    g = pbg.glue(inst.data)
    back = pbg.extract_transition_data(g, pbg.canonical_sections(g))
    assert back.is_valid()
    assert pbg.data_equivalent(inst.data, back).equivalent


def test_broken_cocycle_detected():
    inst = next(i for i in INSTANCES if i.nerve.name == "triangle" and len(i.x.d) > 1)
    td = inst.data
    H = td.h
    bad_val = next(a for a in H if a != H.identity)
    sheets = {e: dict(row) for e, row in td.sheets.items()}
    e0 = sorted(sheets)[0]
    sheets[e0] = {g: H.mul(v, bad_val) for g, v in sheets[e0].items()}
    bad = pbg.TransitionData(td.atlas, H, td.phi, sheets)
    cond, wit = bad.check_conditions()
    assert not all(cond.values())
    with pytest.raises((NotACocycle, NotIsometablic)):
        bad.check()


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(INSTANCES), st.integers(0, 10 ** 6))
def test_section_change_is_equivalent(inst, seed):
    rng = random.Random(seed)
    td = inst.data
    b = td.equivalent_by(pbg.random_equivalence(td, rng))
    assert b.is_valid()
    res = pbg.data_equivalent(td, b)
    assert res.equivalent
    assert pbg.is_pbg_isomorphism(res.xi, pbg.glue(td), pbg.glue(b))


def test_inequivalent_pairs_have_no_smooth_inner_iso():
    pairs = [p for p in corpus.data_pairs(0, INSTANCES) if p[0].endswith("~redrawn")][:6]
    assert pairs
    for name, a, b in pairs:
        assert not pbg.data_equivalent(a, b, build_map=False).equivalent, name
        assert pbg.find_pbg_isomorphism(pbg.glue(a), pbg.glue(b), smooth=True, vertex="inner") is None, name


@pytest.mark.parametrize("g", ["Z2", "Z3", "Z4", "Z2xZ2"])
def test_nontrivial_structure_group_equivalence_is_not_equality(g):
    rng = random.Random(7)
    seen = 0
    for inst in (i for i in INSTANCES if i.group.name == g):
        td = inst.data
        for _ in range(10):
            b = td.equivalent_by(pbg.random_equivalence(td, rng))
            if not b.same(td):
                assert pbg.data_equivalent(td, b).equivalent
                seen += 1
    assert seen


# --- crossed modules and their obstruction -----------------------------------------------

@pytest.mark.parametrize("inst", SMALL, ids=lambda i: i.name)
def test_pbg_xmod_valid(inst):
    rep = pbg.validate_pbg_xmod(inst.build())
    assert rep.valid and rep.pair


@pytest.mark.parametrize("inst", INSTANCES[:20], ids=lambda i: i.name)
def test_equivariant_obstruction_matches_exhaustive(inst):
    ld = pbg.lift_data(inst.build())
    ob = pbg.equivariant_obstruction(ld)
    assert ob.closed and ob.conventions_agree and ob.equivariant
    assert ob.vanishes == bool(pbg.equivariant_lifts_exhaustive(ld))


def test_rp2_equivariant_obstruction_nonzero():
    ld = pbg.lift_data(RP2.build())
    ob = pbg.equivariant_obstruction(ld)
    assert ob.closed and not ob.vanishes
    assert not pbg.equivariant_lifts_exhaustive(ld)


@pytest.mark.parametrize("inst", SMALL[:8], ids=lambda i: i.name)
def test_operator_extension_valid_and_classes(inst):
    ld = pbg.lift_data(inst.build())
    oe = pbg.operator_extension(ld)
    rep = pbg.validate_opext(oe)
    assert rep.valid, rep.conditions
    cl = pbg.classify_opexts(ld)
    assert len(cl.classes) == cl.h1_order and cl.free_transitive


@pytest.mark.parametrize("inst", SMALL[:8], ids=lambda i: i.name)
def test_opext_equivalent_to_itself(inst):
    ld = pbg.lift_data(inst.build())
    oe = pbg.operator_extension(ld)
    assert pbg.opext_equivalent(oe, oe).equivalent


# --- from an extension and back ---------------------------------------------------------

@pytest.mark.parametrize("name,ext", corpus.extensions(0), ids=lambda v: v if isinstance(v, str) else "")
def test_from_extension_round_trip(name, ext):
    pg = pbg.pbg_from_groupoid_extension(ext)
    assert pbg.validate_pbg(pg).valid
    iso = pbg.round_trip_isomorphism(ext)
    assert iso is not None and iso.is_isomorphism()
    assert pbg.explicit_round_trip(ext).is_isomorphism()
