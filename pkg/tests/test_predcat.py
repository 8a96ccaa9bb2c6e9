"""The predicate category, the counit, the categorical extension with its
embedding, p-models, and the universal factorization."""

import pytest

from cohext.canext import delta_extension
from cohext.catalog import distributive_lattices
from cohext.cohcat import (
    ConcreteCohCategory,
    LatticeCategory,
    check_coherent_functor,
)
from cohext.fincat import FinFunctor, check_equivalence
from cohext.hyperdoctrine import canext_hyperdoctrine, sub_hyperdoctrine
from cohext.lattice import boolean4, chain_lattice, trivial_lattice
from cohext.predcat import (
    BudgetError,
    NotCoherentError,
    PredCohCategory,
    build_pred_category,
    canonical_extension_category,
    check_coh_plus,
    counit_equivalence_check,
    pmodel_check,
    pmodel_witness,
    universal_factorization,
)


def test_pred_category_over_trivial_base_is_fiber_preorder():
    P = sub_hyperdoctrine(LatticeCategory(trivial_lattice()))
    AP = build_pred_category(P)
    # fiber is the one-element lattice: a single object with its identity
    assert len(AP.cat.objects) == 1
    assert len(AP.cat.morphisms) == 1


def test_pred_category_posetal_morphisms_follow_fiber_order():
    # morphisms (a,u) -> (b,v) exist uniquely exactly when u <= v
    L = chain_lattice(3)
    Sd = canext_hyperdoctrine(sub_hyperdoctrine(LatticeCategory(L)))
    AP = build_pred_category(Sd)
    for X, (A, u) in AP.obj_data.items():
        for Y, (B, v) in AP.obj_data.items():
            hom = AP.cat.hom(X, Y)
            FA, FB = Sd.fiber(A), Sd.fiber(B)
            # compare u and v inside the top fiber through the inclusions
            ua = Sd.ex(f"le({A},{L.top})")(u)
            vb = Sd.ex(f"le({B},{L.top})")(v)
            expected = 1 if Sd.fiber(L.top).leq(ua, vb) else 0
            assert len(hom) == expected, (X, Y)


def test_identity_composition_laws_hold():
    # FinCategory construction inside the builder asserts the laws; touch a
    # composite to witness the tables are populated
    Sd = canext_hyperdoctrine(sub_hyperdoctrine(LatticeCategory(boolean4())))
    AP = build_pred_category(Sd)
    for f, m in AP.cat.morphisms.items():
        i = AP.cat.identity(m.src)
        assert AP.cat.compose(f, i) == f


def test_budget_refusal_is_deterministic():
    Sd = canext_hyperdoctrine(sub_hyperdoctrine(LatticeCategory(boolean4())))
    with pytest.raises(BudgetError) as e:
        build_pred_category(Sd, budget=3)
    assert "COHEXT_BUDGET" in str(e.value)


def test_counit_equivalence_on_concrete_fixtures():
    for seeds in [[frozenset({"x"})], [frozenset({"x"}), frozenset({"y"})]]:
        C = ConcreteCohCategory(seeds)
        rep = counit_equivalence_check(C)
        assert rep.passed, rep.error or rep.equivalence


def test_counit_equivalence_on_posetal_fixtures():
    for L in distributive_lattices(4):
        rep = counit_equivalence_check(LatticeCategory(L))
        assert rep.passed


def test_pred_sub_lattice_is_downset_of_fiber():
    Sd = canext_hyperdoctrine(sub_hyperdoctrine(LatticeCategory(chain_lattice(3))))
    AP = build_pred_category(Sd)
    coh = PredCohCategory(AP)
    for X, (A, u) in AP.obj_data.items():
        S = coh.sub_lattice(X)
        expected = [w for w in Sd.fiber(A).elements if Sd.fiber(A).leq(w, u)]
        assert sorted(S.elements) == sorted(expected)


def test_pred_pullback_formula_agrees_with_adjoint_of_image():
    Sd = canext_hyperdoctrine(sub_hyperdoctrine(LatticeCategory(boolean4())))
    AP = build_pred_category(Sd)
    coh = PredCohCategory(AP)
    for f in AP.cat.morphisms:
        pb = coh.pullback_map(f)
        im = coh.image_map(f)
        SA, SB = im.source, im.target
        for u in SA.elements:
            for v in SB.elements:
                assert SB.leq(im(u), v) == SA.leq(u, pb(v))


def test_extension_embedding_is_coherent_pmodel_and_coh_plus():
    for L in distributive_lattices(4):
        C = LatticeCategory(L)
        ext = canonical_extension_category(C)
        assert check_coherent_functor(ext.embedding, C, ext.coh)
        assert pmodel_check(ext.embedding, C, ext.coh)
        assert check_coh_plus(ext.coh) is None


def test_extension_embedding_concrete():
    C = ConcreteCohCategory([frozenset({"x"})])
    ext = canonical_extension_category(C)
    assert check_coherent_functor(ext.embedding, C, ext.coh)
    assert pmodel_check(ext.embedding, C, ext.coh)


def test_embedding_pullback_is_delta_of_base_pullback():
    # substitution along the embedded morphism agrees with the unique
    # extension of the base pullback map, subobject-wise
    L = boolean4()
    C = LatticeCategory(L)
    ext = canonical_extension_category(C)
    Sd = ext.hyperdoctrine
    for f, m in C.cat.morphisms.items():
        ef = ext.embedding.on_mor(f)
        pb_ext = ext.coh.pullback_map(ef)
        d = delta_extension(
            C.pullback_map(f), Sd.fiber_ext[m.tgt], Sd.fiber_ext[m.src]
        )
        for v in Sd.fiber(m.tgt).elements:
            assert pb_ext(v) == d.map(v)
        # hence the images agree as well
        im_ext = ext.coh.image_map(ef)
        di = delta_extension(
            C.image_map(f), Sd.fiber_ext[m.src], Sd.fiber_ext[m.tgt]
        )
        for u in Sd.fiber(m.src).elements:
            assert im_ext(u) == di.map(u)


def test_pmodel_rejects_non_coherent():
    C = LatticeCategory(chain_lattice(2))
    T = C.cat.objects[-1]
    const = FinFunctor(
        C.cat, C.cat,
        {A: "c1" for A in C.cat.objects},
        {f: C.cat.identity("c1") for f in C.cat.morphisms},
    )
    with pytest.raises(NotCoherentError):
        pmodel_witness(const, C, C)


def test_engineered_meet_discontinuous_functor_fails_pmodel():
    # collapsing the middle of the 3-chain is coherent yet not a p-model
    # target-side: choose a functor into a lattice category whose images
    # break the prime-filter meet exchange; search tiny instances
    from cohext.cohcat import lattice_hom_functor
    from cohext.lattice import LatticeHom, lattice_homs

    found = None
    lats = distributive_lattices(4)
    for L in lats:
        for K in lats:
            CL, CK = LatticeCategory(L), LatticeCategory(K)
            for h in lattice_homs(L, K):
                F = lattice_hom_functor(h, CL, CK)
                try:
                    w = pmodel_witness(F, CL, CK)
                except NotCoherentError:
                    continue
                if w is not None:
                    found = (L, K, h, w)
                    break
            if found:
                break
        if found:
            break
    # posetal lattice homs are always p-models (prime filters are
    # principal), so the search must come up empty; the failing case needs
    # an infinite target and is out of reach at this scale
    assert found is None


def test_universal_factorization_of_embedding():
    for L in distributive_lattices(3):
        C = LatticeCategory(L)
        ext = canonical_extension_category(C)
        fact = universal_factorization(ext.embedding, C, ext.coh, ext)
        assert fact.comparison.is_iso()


def test_universal_factorization_identity_concrete():
    C = ConcreteCohCategory([frozenset({"x"})])
    ident = FinFunctor.identity(C.cat)
    fact = universal_factorization(ident, C, C)
    assert fact.comparison.is_iso()
    rep = check_equivalence(fact.functor)
    assert rep.essentially_surjective


def test_universal_factorization_lattice_hom_case():
    # one-fiber reduction: a hom L -> K as a p-model between the posetal
    # categories factors through the extension
    from cohext.cohcat import lattice_hom_functor
    from cohext.lattice import LatticeHom

    L, K = chain_lattice(2), chain_lattice(3)
    CL, CK = LatticeCategory(L), LatticeCategory(K)
    h = LatticeHom(L, K, {"c0": "c0", "c1": "c2"})
    F = lattice_hom_functor(h, CL, CK)
    fact = universal_factorization(F, CL, CK)
    assert fact.comparison.is_iso()
