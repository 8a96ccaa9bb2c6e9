"""Categories, functors, and the concrete/posetal subobject calculus."""

import pytest

from cohext.cohcat import (
    ConcreteCohCategory,
    LatticeCategory,
    MissingLimitError,
    check_coherent_functor,
    check_conservative,
    check_heyting_functor,
    conservative_witness,
    lattice_hom_functor,
)
from cohext.fincat import (
    CategoryError,
    FinCategory,
    FinFunctor,
    Morphism,
    check_equivalence,
    natural_iso,
)
from cohext.lattice import LatticeHom, boolean4, chain_lattice


def two_point_category():
    return ConcreteCohCategory([frozenset({"x", "y"})], check_associativity=True)


def test_category_validation_catches_bad_identity():
    ms = {"i": Morphism("i", "A", "A"), "f": Morphism("f", "A", "A")}
    with pytest.raises(CategoryError):
        FinCategory(("A",), ms, {("i", "i"): "i", ("f", "f"): "i",
                                 ("i", "f"): "f", ("f", "i"): "f"}, {"A": "f"})


def test_concrete_category_is_associative():
    # built unchecked for speed; verify the laws on the smallest universe
    two_point_category()


def test_sub_lattice_shapes():
    C = two_point_category()
    assert len(C.sub_lattice("{}").elements) == 1
    assert len(C.sub_lattice("{x}").elements) == 2
    assert len(C.sub_lattice("{x,y}").elements) == 4


def test_image_pullback_adjunction_and_frobenius_exhaustive():
    C = two_point_category()
    for f in C.cat.morphisms:
        pb, im = C.pullback_map(f), C.image_map(f)
        SA, SB = im.source, im.target
        for u in SA.elements:
            for v in SB.elements:
                assert SB.leq(im(u), v) == SA.leq(u, pb(v))
                assert im(SA.meet(u, pb(v))) == SB.meet(im(u), v)


def test_forall_right_adjoint_and_pointwise_formula():
    C = two_point_category()
    for f in C.cat.morphisms:
        fa, pb = C.forall_map(f), C.pullback_map(f)
        SA, SB = fa.source, fa.target
        for u in SA.elements:
            for v in SB.elements:
                assert SB.leq(v, fa(u)) == SA.leq(pb(v), u)
        A, B, m = C._funs[f]
        for u in SA.elements:
            pointwise = frozenset(
                b
                for b in B
                if all(a in SA.decode[u] for a in A if m[a] == b)
            )
            assert C.sub_lattice(C.cat.tgt(f)).decode[fa(u)] == pointwise


def test_heyting_implication_agrees_with_pointwise():
    # U -> W computed through forall along the mono equals the pointwise set
    C = two_point_category()
    A = "{x,y}"
    S = C.sub_lattice(A)
    for u in S.elements:
        uo, um = C.subobject_object(A, u)
        for w in S.elements:
            impl = C.forall_map(um)(C.pullback_map(um)(w))
            pointwise = frozenset(
                x
                for x in C.of_name[A]
                if x not in S.decode[u] or x in S.decode[w]
            )
            assert S.decode[impl] == pointwise


def test_beck_chevalley_on_chosen_squares():
    for C in [two_point_category(), LatticeCategory(boolean4())]:
        for sq in C.chosen_squares():
            pbB = C.pullback_map(sq.beta)
            imA = C.image_map(sq.alpha)
            pbQ = C.pullback_map(sq.beta_p)
            imQ = C.image_map(sq.alpha_p)
            for a in imA.source.elements:
                assert pbB(imA(a)) == imQ(pbQ(a))


def test_products_partial_in_concrete_fragments():
    C = two_point_category()
    assert C.product("{x}", "{x,y}").obj == "{x,y}"
    with pytest.raises(MissingLimitError):
        C.product("{x,y}", "{x,y}")


def test_graph_and_morphism_recovery():
    # concrete: the singleton objects have products in the fragment
    C = two_point_category()
    for A in ["{}", "{x}"]:
        for B in ["{}", "{x}", "{x,y}"]:
            for f in C.cat.hom(A, B):
                g = C.graph(f)
                got = C.morphism_from_graph(
                    A, C.sub_lattice(A).top, B, C.sub_lattice(B).top, g
                )
                assert got == f
    # posetal: products are meets, so every graph is recoverable
    P = LatticeCategory(boolean4())
    for f in P.cat.morphisms:
        g = P.graph(f)
        got = P.morphism_from_graph(
            P.cat.src(f), P.sub_lattice(P.cat.src(f)).top,
            P.cat.tgt(f), P.sub_lattice(P.cat.tgt(f)).top, g,
        )
        assert got == f


def test_identity_functor_checks():
    C = LatticeCategory(chain_lattice(3))
    F = FinFunctor.identity(C.cat)
    assert check_coherent_functor(F, C, C)
    assert check_conservative(F, C, C)
    assert check_heyting_functor(F, C, C)


def test_constant_functor_not_conservative():
    C = two_point_category()
    T = C.terminal()
    obj_map = {A: T for A in C.cat.objects}
    tid = C.cat.identity(T)
    mor_map = {f: tid for f in C.cat.morphisms}
    F = FinFunctor(C.cat, C.cat, obj_map, mor_map)
    assert conservative_witness(F, C, C) is not None


def test_lattice_hom_functors_property_split():
    L2, L3 = chain_lattice(2), chain_lattice(3)
    C2, C3 = LatticeCategory(L2), LatticeCategory(L3)
    emb = lattice_hom_functor(LatticeHom(L2, L3, {"c0": "c0", "c1": "c2"}), C2, C3)
    assert check_coherent_functor(emb, C2, C3)
    assert check_conservative(emb, C2, C3)
    assert check_heyting_functor(emb, C2, C3)
    collapse = lattice_hom_functor(
        LatticeHom(L3, L2, {"c0": "c0", "c1": "c0", "c2": "c1"}), C3, C2
    )
    assert check_coherent_functor(collapse, C3, C2)
    assert not check_conservative(collapse, C3, C2)
    assert not check_heyting_functor(collapse, C3, C2)


def test_equivalence_checker_with_witnesses():
    C = LatticeCategory(chain_lattice(2))
    F = FinFunctor.identity(C.cat)
    rep = check_equivalence(F)
    assert rep.is_equivalence
    # embedding 2 -> 3 misses the middle object up to iso
    L3 = LatticeCategory(chain_lattice(3))
    emb = lattice_hom_functor(
        LatticeHom(chain_lattice(2), chain_lattice(3), {"c0": "c0", "c1": "c2"}),
        C, L3,
    )
    rep = check_equivalence(emb)
    assert not rep.essentially_surjective and rep.witness


def test_natural_iso_search():
    C = LatticeCategory(boolean4())
    F = FinFunctor.identity(C.cat)
    iso = natural_iso(F, F)
    assert iso is not None and iso.is_iso()
