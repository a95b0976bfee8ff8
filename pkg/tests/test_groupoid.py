import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xmodkit import algebra as al
from xmodkit import groupoid as gp
from xmodkit.errors import NotNormal, NotTransitive


def test_pair_groupoid_three_points():
    p = gp.pair_groupoid(["x", "y", "z"])
    rep = gp.validate_groupoid(p)
    assert rep.valid and rep.transitive and rep.vertex_orders == [1, 1, 1]
    assert len(p) == 9


def test_disjoint_union_not_transitive():
    d = gp.disjoint_union(gp.pair_groupoid(["u", "v"]), gp.pair_groupoid(["x", "y", "z"]))
    rep = gp.validate_groupoid(d)
    assert rep.valid and not rep.transitive
    assert d.orbits() == [[0, 1], [2, 3, 4]]


def test_trivialized_s3_over_two_points():
    g = gp.trivialized(["a", "b"], al.symmetric(3))
    rep = gp.validate_groupoid(g)
    assert rep.valid and rep.transitive and rep.vertex_orders == [6, 6]
    assert len(g) == 2 ** 2 * 6
    assert not g.isotropy(0).is_abelian()


@pytest.mark.parametrize("h", ["Z4", "S3", "Q8"])
def test_arrow_count_formula(h):
    grp = al.standard_group(h)
    g = gp.trivialized([str(i) for i in range(3)], grp)
    assert len(g) == 9 * len(grp)


def test_broken_associativity_is_reported():
    g = gp.trivialized(["a", "b"], al.cyclic(3))
    t = g.table.copy()
    a, b = g.index["a:1:b"], g.index["b:1:a"]
    t[a, b] = g.index["a:0:a"]
    bad = gp.FiniteGroupoid(g.objects, [(x, g.objects[g.src[i]], g.objects[g.tgt[i]])
                                        for i, x in enumerate(g.arrows)], t)
    rep = gp.validate_groupoid(bad)
    assert not rep.valid


def test_conjugation_representation_valid():
    g = gp.trivialized(["a", "b", "c"], al.dihedral(4))
    rep = gp.validate_representation(gp.conjugation_representation(g))
    assert rep.valid


def test_trivial_bundle_representation_valid():
    g = gp.trivialized(["a", "b"], al.cyclic(2))
    bundle = gp.GroupBundle.constant(g.objects, al.trivial_group())
    r = gp.GroupoidRepresentation(g, bundle, lambda a, f: f)
    assert gp.validate_representation(r).valid


def test_broken_composition_in_representation():
    g = gp.trivialized(["a", "b"], al.cyclic(2))
    z3 = al.cyclic(3)
    bundle = gp.GroupBundle.constant(g.objects, z3)

    def act(a, f):
        # negate along arrows into b only: fails composition on a -> b -> a
        return z3.inv(f) if a.startswith("b:") and not a.endswith(":b") else f
    rep = gp.validate_representation(gp.GroupoidRepresentation(g, bundle, act))
    assert not rep.conditions["2_composition"]
    assert "2_composition" in rep.witnesses


def test_quotient_full_isotropy_gives_pair():
    g = gp.trivialized(["a", "b", "c"], al.symmetric(3))
    n = {x: [g.arrows[i] for i in g.isotropy_indices(k)] for k, x in enumerate(g.objects)}
    q, proj = gp.quotient_by_normal_subbundle(g, n)
    assert len(q) == 9 and proj.is_morphism()


def test_quotient_trivial_is_copy():
    g = gp.trivialized(["a", "b"], al.cyclic(4))
    q, proj = gp.quotient_by_normal_subbundle(g, {})
    assert len(q) == len(g) and proj.is_isomorphism()


def test_quotient_z4_by_two():
    g = gp.trivialized(["a", "b"], al.cyclic(4))
    n = {x: [f"{x}:0:{x}", f"{x}:2:{x}"] for x in g.objects}
    q, proj = gp.quotient_by_normal_subbundle(g, n)
    assert gp.validate_groupoid(q).vertex_orders == [2, 2]
    kern = {g.arrows[i] for i in proj.kernel_arrows()}
    assert kern == {a for x in g.objects for a in n[x]}


def test_non_normal_subbundle_rejected():
    g = gp.trivialized(["a", "b"], al.symmetric(3))
    sub = [a for a in g.arrows if a.split(":")[0] == a.split(":")[2] and a.split(":")[1] in ("012", "102")]
    with pytest.raises(NotNormal):
        gp.quotient_by_normal_subbundle(g, {x: [a for a in sub if a.startswith(x)] for x in g.objects})


def test_trivialize_requires_transitive():
    d = gp.disjoint_union(gp.pair_groupoid(["u"]), gp.pair_groupoid(["x"]))
    with pytest.raises(NotTransitive):
        gp.trivialize(d)


def test_isomorphism_search_counts_automorphisms_over_identity():
    g = gp.trivialized(["a", "b"], al.symmetric(3))
    # over the identity on objects: |Aut(S3)| * |S3|^(objects-1)
    isos = gp.find_isomorphism(g, g, first_only=False)
    assert len(isos) == 6
    assert all(f.is_isomorphism() for f in isos)


def test_isomorphism_search_respects_constraints():
    g = gp.trivialized(["a", "b"], al.cyclic(4))
    fixed = gp.IsoConstraints(arrow_ok=lambda a, b: a == b)
    assert len(gp.find_isomorphism(g, g, constraints=fixed, first_only=False)) == 1


def test_document_round_trip():
    g = gp.trivialized(["a", "b"], al.cyclic(2))
    h = gp.FiniteGroupoid.from_doc(g.to_doc())
    assert np.array_equal(h.table, g.table)
    s = gp.FiniteGroupoid.from_doc({"pair_over": ["a", "b"], "vertex": "S3"})
    assert len(s) == 24


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.sampled_from(["Z2", "Z4", "S3", "V4"]))
def test_trivialization_is_consistent(nobj, h):
    grp = al.standard_group(h)
    g = gp.trivialized([f"o{i}" for i in range(nobj)], grp)
    t = gp.trivialize(g)
    for a in range(len(g)):
        y, v, x = t.coords(a)
        assert t.arrow(y, v, x) == a
