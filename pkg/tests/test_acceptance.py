"""Acceptance suite: one test per criterion, each printing a pass/fail line
and enforcing its time budget.  Everything is exact; there are no numeric
tolerances anywhere, only exhaustive checks at the stated bounds."""

import sys
import time
from contextlib import contextmanager

from cohext.canext import (
    canonical_extension,
    check_compact,
    check_composition,
    check_dense,
    comjpm_decide,
    esakia_check,
    is_filtered,
    pi_extension,
    sigma_extension,
)
from cohext.catalog import distributive_lattices
from cohext.cohcat import (
    ConcreteCohCategory,
    LatticeCategory,
    check_coherent_functor,
    lattice_hom_functor,
)
from cohext.fincat import FinFunctor, check_equivalence
from cohext.fixtures import (
    designated_model_index,
    fixture_path,
    mutated_comparison_source,
)
from cohext.hyperdoctrine import (
    canext_fo,
    canext_hyperdoctrine,
    fo_from_cohcat,
    sub_hyperdoctrine,
    validate,
    validate_fo,
)
from cohext.lattice import (
    LatticeHom,
    MonotoneMap,
    chain_lattice,
    filter_lattice,
    join_irreducibles,
    join_preserving_maps,
    lattice_homs,
    monotone_maps,
    prime_filters,
    product_projections,
)
from cohext.predcat import (
    canonical_extension_category,
    check_coh_plus,
    counit_equivalence_check,
    pmodel_check,
    pred_obj_name,
    universal_factorization,
)
from cohext.sites import (
    comparison_check,
    irreducible_site,
    irreducible_to_types,
    jp_site,
    localic_tot_for_lattice,
    sheaf_check,
    topology_coincidence_check,
    type_category,
    unique_glueing_check,
)


@contextmanager
def criterion(num: int, label: str, budget_s: float):
    t0 = time.perf_counter()
    status = "FAIL"
    try:
        yield
        status = "PASS"
    finally:
        dt = time.perf_counter() - t0
        print(
            f"criterion {num:2d} [{label}]: {status} "
            f"({dt:.2f}s, budget {budget_s:g}s)",
            file=sys.__stdout__,
            flush=True,
        )
        if status == "PASS" and dt >= budget_s:
            raise AssertionError(
                f"criterion {num} exceeded its {budget_s}s budget ({dt:.2f}s)"
            )


def lattice_fixtures():
    return [
        LatticeCategory(chain_lattice(2)),
        LatticeCategory(chain_lattice(3)),
        LatticeCategory(
            distributive_lattices(4)[-1]  # the diamond
        ),
    ]


def concrete_fixtures():
    return [
        ConcreteCohCategory([frozenset({"x"})]),
        ConcreteCohCategory([frozenset({"x"}), frozenset({"y"})]),
    ]


def site_fixtures():
    return lattice_fixtures() + concrete_fixtures() + [
        ConcreteCohCategory([frozenset({"x", "y"})])
    ]


def test_criterion_01_extension_axioms():
    with criterion(1, "canonical-extension axioms <=6", 30):
        lats = distributive_lattices(6)
        assert len(lats) == 13
        for L in lats:
            ce = canonical_extension(L)
            assert check_dense(ce)
            assert check_compact(ce)
            assert ce.is_iso()


def test_criterion_02_filter_dualities():
    with criterion(2, "filter and prime-filter dualities <=6", 10):
        for L in distributive_lattices(6):
            FL = filter_lattice(L)
            iso = MonotoneMap(
                FL, L, {n: L.meet_all(FL.decode[n]) for n in FL.elements}
            )
            assert iso.is_iso()
            assert len(prime_filters(L)) == len(join_irreducibles(L).elements)


def test_criterion_03_sigma_pi_laws():
    with criterion(3, "sigma/pi laws <=4", 120):
        lats = distributive_lattices(4)
        ces = {L: canonical_extension(L) for L in lats}
        for L in lats:
            for K in lats:
                cs, ct = ces[L], ces[K]
                joinpres = []
                for f in monotone_maps(L, K):
                    s = sigma_extension(f, cs, ct)
                    p = pi_extension(f, cs, ct)
                    assert all(
                        ct.ext.leq(s.map(u), p.map(u)) for u in cs.ext.elements
                    )
                    if f.preserves_finite_joins():
                        joinpres.append(f)
                # composition law under its hypothesis (unary case)
                for M in lats:
                    cm = ces[M]
                    for f in joinpres:
                        for g in monotone_maps(M, L)[:8]:
                            rep = check_composition(g, f, "sigma", cm, cs, ct)
                            assert rep.holds, rep.witness
                # Esakia identity for every join-preserving map
                elems = list(cs.filt_elements)
                filtered_sets = [
                    [elems[i] for i in range(len(elems)) if mask >> i & 1]
                    for mask in range(1, 1 << len(elems))
                ]
                filtered_sets = [F for F in filtered_sets if is_filtered(cs, F)]
                for f in joinpres:
                    for F in filtered_sets:
                        assert esakia_check(f, F, cs, ct)
        # the n-ary hypothesis via binary product lattices
        small = distributive_lattices(3)
        for L in small:
            P, p1, p2 = product_projections(L, L)
            cp = canonical_extension(P)
            for K in small:
                ck = canonical_extension(K)
                hs = join_preserving_maps(L, K)
                for h1 in hs[:4]:
                    for h2 in hs[:4]:
                        table = {
                            x: K.join(h1(p1(x)), h2(p2(x))) for x in P.elements
                        }
                        f = MonotoneMap(P, K, table)
                        for M in small[:2]:
                            cm = canonical_extension(M)
                            for gl in monotone_maps(M, L)[:3]:
                                g = MonotoneMap(
                                    M, P,
                                    {
                                        m: next(
                                            x
                                            for x in P.elements
                                            if p1(x) == gl(m) and p2(x) == gl(m)
                                        )
                                        for m in M.elements
                                    },
                                )
                                rep = check_composition(g, f, "sigma", cm, cp, ck)
                                assert rep.holds, rep.witness


def test_criterion_04_square_transfer():
    with criterion(4, "square-transfer equivalence <=4", 120):
        lats = distributive_lattices(4)
        ces = {L: canonical_extension(L) for L in lats}
        squares = 0
        for L1 in lats:
            for K1 in lats:
                h1s = lattice_homs(L1, K1)
                for L2 in lats:
                    fs = join_preserving_maps(L1, L2)
                    for K2 in lats:
                        h2s = lattice_homs(L2, K2)
                        gs = join_preserving_maps(K1, K2)
                        left = {}
                        for g in gs:
                            for h1 in h1s:
                                key = tuple(
                                    g(h1(a)) for a in L1.elements
                                )
                                left.setdefault(key, []).append((g, h1))
                        for f in fs:
                            for h2 in h2s:
                                key = tuple(h2(f(a)) for a in L1.elements)
                                for g, h1 in left.get(key, ()):
                                    c1, c2 = comjpm_decide(h1, h2, f, g)
                                    assert c1 == c2
                                    squares += 1
        assert squares > 1000


def hyperdoctrine_catalog():
    out = []
    for L in distributive_lattices(4):
        out.append(sub_hyperdoctrine(LatticeCategory(L)))
    for C in concrete_fixtures():
        out.append(sub_hyperdoctrine(C))
    out.append(sub_hyperdoctrine(ConcreteCohCategory([frozenset({"x", "y"})])))
    return out


def test_criterion_05_hyperdoctrine_canonicity():
    with criterion(5, "hyperdoctrine canonicity", 120):
        for P in hyperdoctrine_catalog():
            assert validate(P).passed
            assert validate(canext_hyperdoctrine(P)).passed
        # first-order structure is preserved as well
        for C in lattice_fixtures():
            Pd = canext_fo(fo_from_cohcat(C))
            assert validate_fo(Pd).passed


def test_criterion_06_posetal_extension_equivalence():
    with criterion(6, "posetal extension equivalence <=5", 120):
        for L in distributive_lattices(5):
            C = LatticeCategory(L)
            ext = canonical_extension_category(C)
            Ld = canonical_extension(L).ext
            LdC = LatticeCategory(Ld)
            top = L.top
            obj_map = {u: pred_obj_name(top, u) for u in Ld.elements}
            mor_map = {}
            for f, m in LdC.cat.morphisms.items():
                found = [
                    n
                    for n, r in ext.pred.rels.items()
                    if (r.src_obj, r.src_elem, r.tgt_obj, r.tgt_elem)
                    == (top, m.src, top, m.tgt)
                ]
                assert len(found) == 1
                mor_map[f] = found[0]
            F = FinFunctor(LdC.cat, ext.pred.cat, obj_map, mor_map)
            rep = check_equivalence(F)
            assert rep.is_equivalence, rep.witness
            assert all(X in rep.object_witnesses for X in ext.pred.cat.objects)


def test_criterion_07_counit_equivalence():
    with criterion(7, "counit equivalence on concrete fixtures", 120):
        for C in concrete_fixtures():
            rep = counit_equivalence_check(C)
            assert rep.passed, rep.error
        # posetal instances of the same counit
        for C in lattice_fixtures():
            assert counit_equivalence_check(C).passed


def test_criterion_08_embedding_universal_property():
    with criterion(8, "embedding p-model and factorization", 120):
        targets = lattice_fixtures() + [concrete_fixtures()[0]]
        for C in targets:
            ext = canonical_extension_category(C)
            assert check_coherent_functor(ext.embedding, C, ext.coh)
            assert pmodel_check(ext.embedding, C, ext.coh)
            assert check_coh_plus(ext.coh) is None
            fact = universal_factorization(ext.embedding, C, ext.coh, ext)
            assert fact.comparison.is_iso()
            assert fact.comparison.check()


def test_criterion_09_localic_type_spaces():
    with criterion(9, "localic type spaces for small lattices", 5):
        from cohext.lattice import boolean4

        for L, points in [
            (chain_lattice(2), 1),
            (chain_lattice(3), 2),
            (boolean4(), 2),
        ]:
            rep = localic_tot_for_lattice(L)
            assert rep.passed
            assert rep.type_objects == points
            assert rep.prime_poset_iso and rep.downsets_iso_ext


def test_criterion_10_comparison_conditions():
    with criterion(10, "comparison conditions + mutation", 60):
        for C in site_fixtures():
            X = canext_hyperdoctrine(sub_hyperdoctrine(C))
            D = irreducible_site(C, X)
            tau = type_category(C)
            e = irreducible_to_types(C, X, D, tau)
            rep = comparison_check(e, D, jp_site(tau))
            assert rep.passed, rep.witness
        C = LatticeCategory(chain_lattice(3))
        X = canext_hyperdoctrine(sub_hyperdoctrine(C))
        D = mutated_comparison_source(C, X)
        tau = type_category(C)
        e = irreducible_to_types(C, X, D, tau)
        rep = comparison_check(e, D, jp_site(tau))
        assert not rep.cover_preserving and rep.witness
        assert rep.locally_full and rep.locally_faithful
        assert rep.locally_surjective and rep.co_continuous


def test_criterion_11_sheaf_and_coincidence():
    with criterion(11, "sheaf and topology coincidence", 120):
        for C in site_fixtures():
            X = canext_hyperdoctrine(sub_hyperdoctrine(C))
            ok, w = sheaf_check(C, X)
            assert ok, w
            ok, w = unique_glueing_check(C, X)
            assert ok, w
            ok, checked, note = topology_coincidence_check(C, X)
            assert ok, note
            assert checked > 0 or note


def test_criterion_12_morphism_theorems():
    with criterion(12, "locale morphism theorems + mutations", 60):
        from cohext.sites import locale_morphism, open_check, surjection_check

        L2, L3 = chain_lattice(2), chain_lattice(3)
        C2, C3 = LatticeCategory(L2), LatticeCategory(L3)
        conservative = lattice_hom_functor(
            LatticeHom(L2, L3, {"c0": "c0", "c1": "c2"}), C2, C3
        )
        ok, w = surjection_check(locale_morphism(conservative, C2, C3))
        assert ok, w
        heyting = lattice_hom_functor(
            LatticeHom(L2, L3, {"c0": "c0", "c1": "c2"}), C2, C3
        )
        ok, w = open_check(locale_morphism(heyting, C2, C3))
        assert ok, w
        collapse = lattice_hom_functor(
            LatticeHom(L3, L2, {"c0": "c0", "c1": "c0", "c2": "c1"}), C3, C2
        )
        m = locale_morphism(collapse, C3, C2)
        ok, w = surjection_check(m)
        assert not ok and w
        ok, w = open_check(m)
        assert not ok and w


def test_criterion_13_models_pipeline():
    with criterion(13, "models pipeline", 300):
        from cohext.logic.chase import chase
        from cohext.logic.models import (
            FamilyCategory,
            ModelFamily,
            check_m1,
            check_m2,
            check_m3,
            enumerate_models,
            sigma_bar_check,
        )
        from cohext.logic.parser import parse_theory

        corpus = ["pointed", "idempotent", "ordered"]
        for name in corpus:
            T = parse_theory(fixture_path(f"{name}.chr").read_text())
            res = chase(T, max_fresh=6, max_rounds=40)
            assert res.status == "model", (name, res.note)
            fam = ModelFamily.build(enumerate_models(T, 3))
            C = FamilyCategory(T, fam)
            assert check_m1(C).passed
            assert check_m2(C).passed
            assert check_m3(C).passed
            rep = sigma_bar_check(C)
            assert rep.passed, (name, rep)
        # removing the designated model flips exactly M2 and the embedding
        T = parse_theory(fixture_path("pointed.chr").read_text())
        fam = ModelFamily.build(enumerate_models(T, 2))
        C = FamilyCategory(T, fam)
        drop = designated_model_index(C)
        keep = tuple(i for i in range(len(fam.models)) if i != drop)
        assert check_m1(C, keep).passed
        assert not check_m2(C, keep).passed
        assert check_m3(C, keep).passed
        rep = sigma_bar_check(C, require_conditions=False, indices=keep)
        assert not rep.embedding.passed
        assert rep.naturality.passed
        assert rep.exists_preservation.passed
        assert rep.surjectivity.passed


def test_criterion_14_parser_golden():
    with criterion(14, "parser golden round-trip", 5):
        from cohext.logic.parser import parse_theory
        from cohext.logic.syntax import print_theory

        for name in ["pointed", "idempotent", "ordered"]:
            src = fixture_path(f"{name}.chr").read_text()
            golden = fixture_path(f"golden/{name}.chr.golden").read_text()
            T = parse_theory(src)
            assert print_theory(T) == golden
            T2 = parse_theory(print_theory(T))
            assert T2 == T
            assert print_theory(T2) == golden
