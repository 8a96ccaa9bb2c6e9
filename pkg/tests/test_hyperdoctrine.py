"""Hyperdoctrine validators, the subobject and powerset constructions, and
fiberwise canonical extension."""

import pytest

from cohext.catalog import distributive_lattices
from cohext.cohcat import ConcreteCohCategory, LatticeCategory
from cohext.fixtures import broken_exists_hyperdoctrine
from cohext.hyperdoctrine import (
    HyperdoctrineError,
    canext_fo,
    canext_hyperdoctrine,
    canext_morphism,
    compose_morphisms,
    fo_from_cohcat,
    powerset_hyperdoctrine,
    sub_hyperdoctrine,
    unit_morphism,
    validate,
    validate_fo,
    validate_morphism,
)
from cohext.lattice import boolean4, chain_lattice, trivial_lattice


def all_fixture_hyperdoctrines():
    out = []
    for L in distributive_lattices(4):
        out.append(sub_hyperdoctrine(LatticeCategory(L)))
    out.append(powerset_hyperdoctrine(ConcreteCohCategory([frozenset({"x"})])))
    out.append(
        powerset_hyperdoctrine(ConcreteCohCategory([frozenset({"x", "y"})]))
    )
    return out


def test_powerset_hyperdoctrine_validates():
    C = ConcreteCohCategory([frozenset({"x", "y"})])
    rep = validate(powerset_hyperdoctrine(C))
    assert rep.passed, rep.failures()


def test_trivial_base_validates_vacuously():
    P = sub_hyperdoctrine(LatticeCategory(trivial_lattice()))
    assert validate(P).passed


def test_mutated_exists_fails_with_witness():
    P = broken_exists_hyperdoctrine()
    rep = validate(P)
    assert not rep.passed
    failed = {c.law for c in rep.failures()}
    assert "exists-left-adjoint" in failed
    assert all(c.witness for c in rep.failures())


def test_canext_refuses_invalid_input():
    with pytest.raises(HyperdoctrineError):
        canext_hyperdoctrine(broken_exists_hyperdoctrine())


def test_canonicity_on_all_fixtures():
    # fiberwise extension of every validated fixture validates again
    for P in all_fixture_hyperdoctrines():
        assert validate(P).passed
        Pd = canext_hyperdoctrine(P)
        rep = validate(Pd)
        assert rep.passed, rep.failures()


def test_single_fiber_three_chain():
    P = sub_hyperdoctrine(LatticeCategory(trivial_lattice()))
    # trivial base has one fiber, the one-element lattice; the 3-chain case
    # comes from the top fiber of the 3-chain base
    P3 = sub_hyperdoctrine(LatticeCategory(chain_lattice(3)))
    Pd = canext_hyperdoctrine(P3)
    assert len(Pd.fiber("c2").elements) == 3


def test_exists_functoriality_derived():
    # exists along identity is the identity; along composites, composes
    for P in all_fixture_hyperdoctrines():
        for A in P.base.objects:
            i = P.base.identity(A)
            assert all(P.ex(i)(a) == a for a in P.fiber(A).elements)
        for f, mf in P.base.morphisms.items():
            for g, mg in P.base.morphisms.items():
                if mf.tgt != mg.src:
                    continue
                gf = P.base.compose(g, f)
                for a in P.fiber(mf.src).elements:
                    assert P.ex(gf)(a) == P.ex(g)(P.ex(f)(a))


def test_unit_morphism_validates():
    P = sub_hyperdoctrine(LatticeCategory(boolean4()))
    Pd = canext_hyperdoctrine(P)
    m = unit_morphism(P, Pd)
    rep = validate_morphism(m)
    assert rep.passed, rep.failures()


def test_identity_morphism_extension_is_identity():
    P = sub_hyperdoctrine(LatticeCategory(chain_lattice(3)))
    Pd = canext_hyperdoctrine(P)
    from cohext.fincat import FinFunctor
    from cohext.hyperdoctrine import HypMorphism
    from cohext.lattice import LatticeHom

    ident = HypMorphism(
        P, P, FinFunctor.identity(P.base),
        {A: LatticeHom.identity(P.fiber(A)) for A in P.base.objects},
    )
    ext = canext_morphism(ident, Pd, Pd)
    assert validate_morphism(ext).passed
    for A in P.base.objects:
        assert ext.tau[A].mapping == {
            u: u for u in Pd.fiber(A).elements
        }


def test_composite_morphism_extends_to_composite():
    L2, L3 = chain_lattice(2), chain_lattice(3)
    P2 = sub_hyperdoctrine(LatticeCategory(L2))
    P3 = sub_hyperdoctrine(LatticeCategory(L3))
    from cohext.cohcat import lattice_hom_functor
    from cohext.hyperdoctrine import HypMorphism
    from cohext.lattice import LatticeHom

    h = LatticeHom(L2, L3, {"c0": "c0", "c1": "c2"})
    K = lattice_hom_functor(h, LatticeCategory(L2), LatticeCategory(L3))
    tau = {
        a: LatticeHom(
            P2.fiber(a), P3.fiber(h(a)),
            {u: h(u) for u in P2.fiber(a).elements},
        )
        for a in P2.base.objects
    }
    m = HypMorphism(P2, P3, K, tau)
    assert validate_morphism(m).passed
    P2d, P3d = canext_hyperdoctrine(P2), canext_hyperdoctrine(P3)
    md = canext_morphism(m, P2d, P3d)
    assert validate_morphism(md).passed
    both = compose_morphisms(m, unit_morphism(P3, P3d))
    other = compose_morphisms(unit_morphism(P2, P2d), md)
    for A in P2.base.objects:
        assert both.tau[A].mapping == other.tau[A].mapping


def test_first_order_validation_and_extension():
    for C in [
        LatticeCategory(chain_lattice(3)),
        LatticeCategory(boolean4()),
        ConcreteCohCategory([frozenset({"x", "y"})]),
    ]:
        P = fo_from_cohcat(C)
        rep = validate_fo(P)
        assert rep.passed, rep.failures()
        Pd = canext_fo(P)
        assert validate_fo(Pd).passed


def test_fo_frobenius_derivable_and_checked():
    # in a validated first-order hyperdoctrine the Frobenius law is among
    # the validated laws and holds
    P = fo_from_cohcat(LatticeCategory(boolean4()))
    rep = validate_fo(P)
    assert any(c.law == "frobenius" and c.passed for c in rep.checks)


def test_one_object_base_heyting_only():
    P = fo_from_cohcat(LatticeCategory(trivial_lattice()))
    rep = validate_fo(P)
    assert rep.passed
