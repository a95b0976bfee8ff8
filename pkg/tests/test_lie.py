import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from xmodkit import lie
from xmodkit.errors import JacobiFailure, NotAnIdeal, NotCentral


def test_sl2_cohomology_trivial_coefficients():
    g = lie.sl2()
    assert lie.ce_cohomology_dims(g, lie.Module.trivial(g)) == [1, 0, 0, 1]


def test_abelian_plane_cohomology():
    a = lie.abelian(2)
    assert lie.ce_cohomology_dims(a, lie.Module.trivial(a)) == [1, 2, 1]


def test_heisenberg_cohomology_betti():
    h = lie.heisenberg()
    # Betti numbers of the Heisenberg nilmanifold
    assert lie.ce_cohomology_dims(h, lie.Module.trivial(h)) == [1, 2, 2, 1]


def test_sl2_adjoint_module_is_acyclic_in_low_degree():
    g = lie.sl2()
    adm = lie.Module(3, [g.ad(lie.unit(3, i)) for i in range(3)])
    assert lie.ce_cohomology_dims(g, adm) == [0, 0, 0, 0]


def test_bad_structure_constants_raise():
    with pytest.raises(JacobiFailure):
        lie.LieAlgebra(["a", "b", "c"], [("a", "b", {"c": 1}), ("b", "c", {"a": 1}), ("a", "c", {"a": 1})])


def test_centres_and_derivations():
    assert len(lie.gl2().center()) == 1
    assert lie.sl2().center() == []
    dd = lie.DerivationData(lie.heisenberg())
    assert (dd.dim, dd.n_ad, dd.n_out) == (6, 2, 4)
    assert lie.DerivationData(lie.sl2()).n_out == 0


def test_identity_coupling_on_heisenberg_builds_a_coupling_xmod():
    k = lie.heisenberg()
    dd = lie.DerivationData(k)
    out = dd.outder_algebra()
    c = lie.Coupling(out, k, [lie.unit(dd.n_out, i) for i in range(dd.n_out)], dd)
    d = lie.lift_coupling(c)
    curv = lie.curvature(d)
    assert curv.in_ad and curv.rbar_is_ad_of_r and curv.bianchi
    cc = lie.construct_from_coupling(d)
    rep = lie.validate_liexmod(cc.xmod)
    assert rep.valid and rep.coupling
    assert cc.induced_xi == c.xi
    assert cc.algebra.dim == out.dim + dd.n_ad


def test_nonzero_obstruction_example():
    k = lie.direct_sum(lie.heisenberg(), lie.abelian(1, "w"))
    dd = lie.DerivationData(k)
    g = lie.abelian(3)
    c = lie.Coupling(g, k, lie._hq_targets(k, dd), dd)
    d = lie.lift_coupling(c)
    ob = lie.coupling_obstruction(d)
    assert ob.closed and ob.ad_zero
    assert not ob.vanishes
    assert lie.extension_exists_oracle(d) is None
    # the crossed module over gbar + ad(k) exists regardless
    rep = lie.validate_liexmod(lie.construct_from_coupling(d).xmod)
    assert rep.valid and rep.coupling


@pytest.fixture(scope="module")
def laws():
    return lie.law_corpus(seed=0, count=30)


def test_construction_on_random_laws(laws):
    for d in laws:
        ob = lie.coupling_obstruction(d)
        assert ob.closed and ob.ad_zero
        assert ob.vanishes == (lie.extension_exists_oracle(d) is not None)
        cc = lie.construct_from_coupling(d)
        rep = lie.validate_liexmod(cc.xmod)
        assert rep.valid and rep.coupling
        assert cc.induced_xi == list(d.coupling.xi)


def test_central_representation_independent_of_lift(laws):
    rng = random.Random(3)
    for d in laws[:10]:
        base = lie.central_representation(d.coupling)
        d2, _ = lie.random_relift(d, rng)
        assert lie.central_representation(d.coupling, d2) == base


def test_obstruction_class_invariant_under_relift(laws):
    rng = random.Random(5)
    for d in laws[:12]:
        ob = lie.coupling_obstruction(d)
        for _ in range(3):
            d2, lam = lie.random_relift(d, rng)
            assert lie.classes_equal_ce(ob.cochain, lie.coupling_obstruction(d2, lam).cochain)


def test_adjoint_quotient_heisenberg():
    h = lie.heisenberg()
    xm, rep, q = lie.adjoint_quotient_xmod(h, [lie.unit(3, i) for i in range(3)])
    assert rep.valid and rep.coupling
    assert q.quotient.dim == 2 and q.quotient.is_abelian()
    assert len(rep.kernel) == 1


def test_adjoint_quotient_gl2_sl2():
    g = lie.gl2()
    sl = [[Fraction(1), 0, 0, Fraction(-1)], lie.unit(4, 1), lie.unit(4, 2)]
    sl = [[Fraction(x) for x in v] for v in sl]
    xm, rep, q = lie.adjoint_quotient_xmod(g, sl)
    assert rep.valid and rep.kernel == [] and q.quotient.dim == 4


def test_adjoint_quotient_rejects_non_ideal():
    with pytest.raises(NotAnIdeal):
        lie.adjoint_quotient_xmod(lie.sl2(), [lie.unit(3, 0)])


def test_xmod_from_extension_with_central_ideal():
    h = lie.heisenberg()
    ext = lie.extension_from_algebra(h, [lie.unit(3, 2)])
    xm, rep = lie.xmod_from_extension_with_ideal(ext, [lie.unit(1, 0)])
    assert rep.valid and rep.coupling
    # non-central I
    g = lie.direct_sum(lie.nonabelian2(), lie.abelian(1, "w"))
    ext2 = lie.extension_from_algebra(g, [lie.unit(3, 0), lie.unit(3, 1)])
    with pytest.raises(NotCentral):
        lie.xmod_from_extension_with_ideal(ext2, [lie.unit(2, 1)])


coeffs = st.lists(st.integers(-3, 3), min_size=9, max_size=9)


@settings(max_examples=30, deadline=None)
@given(coeffs)
def test_d_squared_zero_sl2_adjoint(c):
    g = lie.sl2()
    adm = lie.Module(3, [g.ad(lie.unit(3, i)) for i in range(3)])
    co = lie.CECochain.from_flat(g, adm, 1, [Fraction(x) for x in c])
    assert lie.ce_differential(lie.ce_differential(co)).is_zero()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_random_laws_bracket_preserving_xi(seed):
    rng = random.Random(seed)
    k = lie.heisenberg()
    c = lie.random_coupling(rng, lie.nonabelian2(), k)
    d = lie.random_law(rng, c)
    cc = lie.construct_from_coupling(d)
    assert cc.algebra.jacobi_failure() is None
