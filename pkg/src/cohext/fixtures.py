"""Procedural fixtures shared by the test suites and the acceptance runs:
deliberately broken inputs for the validators, and the designated corpus
data for the model-family checks."""

from __future__ import annotations

from pathlib import Path

from .cohcat import LatticeCategory
from .hyperdoctrine import CoherentHyperdoctrine, sub_hyperdoctrine
from .lattice import MonotoneMap, chain_lattice

FIXTURE_DIR = Path(__file__).resolve().parents[2] / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURE_DIR / name


def broken_exists_hyperdoctrine() -> CoherentHyperdoctrine:
    """The subobject hyperdoctrine of the 3-chain with one existential
    table entry bumped, so the adjunction law fails with a witness."""
    C = LatticeCategory(chain_lattice(3))
    P = sub_hyperdoctrine(C)
    exists = dict(P.exists)
    f = "le(c0,c2)"
    old = exists[f]
    table = dict(old.mapping)
    table["c0"] = "c2"  # image of the bottom subobject jumps to the top
    exists[f] = MonotoneMap(old.source, old.target, table)
    return CoherentHyperdoctrine(P.base, P.fibers, P.subst, exists, P.limits)


def mutated_comparison_source(C_like, X):
    """The irreducible site with a non-covering family declared as a
    generator, so only cover preservation of the canonical functor into
    the type category fails."""
    from .sites import SemidirectSite, irreducible_site

    D = irreducible_site(C_like, X)
    fake_gens = dict(D.generators)
    # declare the empty family a generating cover everywhere; then every
    # sieve covers, and images of empty sieves are not covers downstream
    for A in D.cat.objects:
        fake_gens[A] = tuple(fake_gens[A]) + (tuple(),)

    def mutated_covers(A, sieve):
        return True

    return SemidirectSite(
        D.cat, mutated_covers, fake_gens,
        obj_data=D.obj_data, mor_data=D.mor_data,
    )


def designated_model_index(C) -> int:
    """The corpus member whose removal breaks realizability: the unique
    two-element model of the pointed-predicate theory with both elements
    in the predicate."""
    for i, M in enumerate(C.family.models):
        if len(M.sorts["A"]) == 2 and len(M.rels["P"]) == 2:
            return i
    raise ValueError("designated model not present; family bound changed?")
