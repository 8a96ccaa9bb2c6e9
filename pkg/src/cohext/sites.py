"""Grothendieck coverages, filter and type categories, sheaf checks, and
locale-morphism analysis, all at finite scale.

Coverages are stored as predicates on sieves plus generator enumeration;
sieve spaces are budgeted.  The filter category quotients local maps by
germ equivalence computed as an explicit equivalence closure.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import combinations

from .canext import CanonicalExtension, delta_extension
from .cohcat import CohCategory
from .fincat import CategoryError, FinCategory, FinFunctor, Morphism
from .hyperdoctrine import (
    BaseLimits,
    CanextHyperdoctrine,
    CoherentHyperdoctrine,
    canext_hyperdoctrine,
    sub_hyperdoctrine,
)
from .lattice import (
    FinLattice,
    LatticeHom,
    MonotoneMap,
    downset_lattice,
    filter_lattice,
    filters,
    is_join_irreducible,
    prime_filter_poset,
    prime_filters,
)
from .order import FinPoset, set_name


def sieve_budget(default: int = 4096) -> int:
    return int(os.environ.get("COHEXT_SIEVE_BUDGET", default))


class SiteError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Site:
    """A finite category with a covering predicate on sieves and a
    deterministic list of generating families per object."""

    cat: FinCategory
    covers: object  # callable: (obj, iterable of morphism names) -> bool
    generators: dict[str, tuple[tuple[str, ...], ...]]

    def sieve_generated(self, A: str, fams) -> frozenset[str]:
        """Close a family of morphisms into A under precomposition."""
        out = set()
        for f in fams:
            out.add(f)
            for g in self.cat.morphisms_into(self.cat.src(f)):
                out.add(self.cat.compose(f, g))
        return frozenset(out)

    def is_sieve(self, A: str, s) -> bool:
        s = set(s)
        return all(self.cat.tgt(f) == A for f in s) and all(
            self.cat.compose(f, g) in s
            for f in s
            for g in self.cat.morphisms_into(self.cat.src(f))
        )

    def all_sieves(self, A: str, budget: int | None = None) -> list[frozenset[str]]:
        budget = budget if budget is not None else sieve_budget()
        inc = self.cat.morphisms_into(A)
        if 1 << len(inc) > budget:
            raise SiteError(
                f"sieve enumeration on {A} needs 2^{len(inc)} subsets; "
                "raise COHEXT_SIEVE_BUDGET"
            )
        sieves = []
        for mask in range(1 << len(inc)):
            s = frozenset(inc[i] for i in range(len(inc)) if mask >> i & 1)
            if self.is_sieve(A, s):
                sieves.append(s)
        return sieves

    def covering_sieves(self, A: str, budget: int | None = None):
        return [s for s in self.all_sieves(A, budget) if self.covers(A, s)]


# -- the coherent topology ------------------------------------------------------


def coherent_topology(C: CohCategory) -> Site:
    """A sieve covers A when finitely many members' images join to the top
    subobject of A.  Generators: the minimal such families."""

    def covers(A: str, sieve) -> bool:
        S = C.sub_lattice(A)
        return S.join_all(
            C.image_map(f)(C.sub_lattice(C.cat.src(f)).top) for f in sieve
        ) == S.top

    gens: dict[str, tuple] = {}
    for A in C.cat.objects:
        inc = C.cat.morphisms_into(A)
        found: list[tuple] = []
        for r in range(0, len(inc) + 1):
            for fam in combinations(inc, r):
                if covers(A, fam) and not any(
                    set(prev) <= set(fam) for prev in found
                ):
                    found.append(fam)
        gens[A] = tuple(found)
    return Site(C.cat, covers, gens)


# -- filter and type categories --------------------------------------------------


def filter_obj_name(A: str, F: frozenset) -> str:
    return f"({A},{set_name(F)})"


@dataclass(frozen=True)
class LocalMap:
    """A representative of a germ: a morphism out of a domain subobject."""

    dom: str  # subobject of A, member of F
    mor: str  # category morphism dom_obj -> B


class FilterCategory:
    """Objects (A, F) with F a filter in Sub(A); morphisms are germs of
    local maps.  A local map (A, F) -> (B, G) is a morphism from a domain
    in F whose preimages of members of G land in F; two are equivalent when
    they agree on a common smaller domain in F."""

    def __init__(self, C: CohCategory, prime_only: bool = False):
        self.C = C
        self.prime_only = prime_only
        self.objects: dict[str, tuple[str, frozenset]] = {}
        for A in C.cat.objects:
            S = C.sub_lattice(A)
            fs = prime_filters(S) if prime_only else filters(S)
            for F in fs:
                self.objects[filter_obj_name(A, F)] = (A, F)
        self._classes: dict[tuple[str, str], list[list[LocalMap]]] = {}
        self.germ_data: dict[str, tuple[str, str, LocalMap]] = {}
        morphisms: dict[str, Morphism] = {}
        for X, (A, F) in self.objects.items():
            for Y, (B, G) in self.objects.items():
                classes = self._germ_classes(A, F, B, G)
                self._classes[(X, Y)] = classes
                for cls in classes:
                    n = f"germ[{cls[0].dom};{cls[0].mor}]:{X}->{Y}"
                    morphisms[n] = Morphism(n, X, Y)
                    self.germ_data[n] = (X, Y, cls[0])
        identities = {}
        for X, (A, F) in self.objects.items():
            S = C.sub_lattice(A)
            identities[X] = self._class_name_of(
                X, X, LocalMap(S.top, C.cat.identity(A))
            )
        comp = {}
        for n1, (X, Y, m1) in self.germ_data.items():
            for n2, (Y2, Z, m2) in self.germ_data.items():
                if Y != Y2:
                    continue
                comp[(n2, n1)] = self._compose_germs(X, Y, Z, m1, m2)
        self.cat = FinCategory(
            tuple(sorted(self.objects)), morphisms, comp, identities
        )

    def _local_maps(self, A, F, B, G) -> list[LocalMap]:
        C = self.C
        out = []
        for U in sorted(F):
            uo, um = C.subobject_object(A, U)
            io = C.image_map(um)
            for mor in C.cat.hom(uo, B):
                pb = C.pullback_map(mor)
                if all(io(pb(V)) in F for V in G):
                    out.append(LocalMap(U, mor))
        return out

    def _restrict_local(self, A, m: LocalMap, U) -> str:
        """m.mor restricted along the inclusion of U into dom(m)."""
        C = self.C
        uo, um = C.subobject_object(A, U)
        do, dm = C.subobject_object(A, m.dom)
        lifts = [h for h in C.cat.hom(uo, do) if C.cat.compose(dm, h) == um]
        if len(lifts) != 1:
            raise CategoryError(f"inclusion of {U} into {m.dom} not unique")
        return C.cat.compose(m.mor, lifts[0])

    def _equivalent(self, A, F, m1: LocalMap, m2: LocalMap) -> bool:
        S = self.C.sub_lattice(A)
        meet = S.meet(m1.dom, m2.dom)
        for U in sorted(F):
            if not S.leq(U, meet):
                continue
            if self._restrict_local(A, m1, U) == self._restrict_local(A, m2, U):
                return True
        return False

    def _germ_classes(self, A, F, B, G) -> list[list[LocalMap]]:
        classes: list[list[LocalMap]] = []
        for m in self._local_maps(A, F, B, G):
            placed = False
            for cls in classes:
                if any(self._equivalent(A, F, x, m) for x in cls):
                    cls.append(m)
                    placed = True
                    break
            if not placed:
                classes.append([m])
        merged = True
        while merged:
            merged = False
            for i in range(len(classes)):
                for j in range(i + 1, len(classes)):
                    if any(
                        self._equivalent(A, F, x, y)
                        for x in classes[i]
                        for y in classes[j]
                    ):
                        classes[i].extend(classes[j])
                        del classes[j]
                        merged = True
                        break
                if merged:
                    break
        for cls in classes:
            cls.sort(key=lambda m: (m.dom, m.mor))
        classes.sort(key=lambda cls: (cls[0].dom, cls[0].mor))
        return classes

    def _class_name_of(self, X, Y, m: LocalMap) -> str:
        A, F = self.objects[X]
        for cls in self._classes[(X, Y)]:
            if any(c == m or self._equivalent(A, F, c, m) for c in cls):
                return f"germ[{cls[0].dom};{cls[0].mor}]:{X}->{Y}"
        raise CategoryError(f"local map ({m.dom},{m.mor}) not a germ {X} -> {Y}")

    def _compose_germs(self, X, Y, Z, m1: LocalMap, m2: LocalMap) -> str:
        """Germ of m2 o m1 : X -> Z, restricting m1 to the preimage of the
        domain of m2."""
        C = self.C
        A, F = self.objects[X]
        B, G = self.objects[Y]
        S = C.sub_lattice(A)
        uo, um = C.subobject_object(A, m1.dom)
        dom = C.image_map(um)(C.pullback_map(m1.mor)(m2.dom))
        r = self._restrict_local(A, m1, dom)
        to, tm = C.subobject_object(B, m2.dom)
        src = C.cat.src(r)
        lifts = [h for h in C.cat.hom(src, to) if C.cat.compose(tm, h) == r]
        if len(lifts) != 1:
            raise CategoryError("restricted map does not factor through the domain")
        composed = C.cat.compose(m2.mor, lifts[0])
        return self._class_name_of(X, Z, LocalMap(dom, composed))

    def germ_of(self, X: str, Y: str, dom: str, mor: str) -> str:
        return self._class_name_of(X, Y, LocalMap(dom, mor))

    def image_filter(self, germ_name: str) -> frozenset:
        """The filter { V | the preimage of V is in F } on the target."""
        X, Y, m = self.germ_data[germ_name]
        A, F = self.objects[X]
        B, G = self.objects[Y]
        C = self.C
        uo, um = C.subobject_object(A, m.dom)
        pb = C.pullback_map(m.mor)
        io = C.image_map(um)
        SB = C.sub_lattice(B)
        return frozenset(V for V in SB.elements if io(pb(V)) in F)


def filter_category(C: CohCategory) -> FilterCategory:
    return FilterCategory(C, prime_only=False)


def type_category(C: CohCategory) -> FilterCategory:
    """The full subcategory of the filter category on prime-filter pairs."""
    return FilterCategory(C, prime_only=True)


def jp_site(tau: FilterCategory) -> Site:
    """The singleton-generated topology on the type category: a sieve
    covers (A, rho) when some member has full image."""

    def covers(X: str, sieve) -> bool:
        A, rho = tau.objects[X]
        return any(tau.image_filter(f) == rho for f in sieve)

    gens = {}
    for X in tau.cat.objects:
        fams = [
            (f,)
            for f in tau.cat.morphisms_into(X)
            if tau.image_filter(f) == tau.objects[X][1]
        ]
        gens[X] = tuple(sorted(fams))
    return Site(tau.cat, covers, gens)


def jp_cover_induced_oracle(tau: FilterCategory, X: str, sieve) -> bool:
    """Induced-coverage oracle: a finite subfamily such that, for every
    choice of filter members on the sources, the join of their images lies
    in the target filter.  Exponential; for tiny fixtures only."""
    A, F = tau.objects[X]
    C = tau.C
    S = C.sub_lattice(A)
    members = sorted(sieve)
    for r in range(1, len(members) + 1):
        for fam in combinations(members, r):
            datas = []
            for f in fam:
                Xf, _, m = tau.germ_data[f]
                datas.append((tau.objects[Xf], m))
            if _all_choices_land(C, S, F, datas):
                return True
    return False


def _all_choices_land(C, S, F, datas) -> bool:
    def image_of(member, U):
        (B, FB), m = member
        SB = C.sub_lattice(B)
        rest = SB.meet(U, m.dom)
        ro, rm = C.subobject_object(B, rest)
        do, dm = C.subobject_object(B, m.dom)
        lifts = [h for h in C.cat.hom(ro, do) if C.cat.compose(dm, h) == rm]
        mor = C.cat.compose(m.mor, lifts[0])
        return C.image_map(mor)(C.sub_lattice(ro).top)

    def rec(i, acc):
        if i == len(datas):
            return S.join_all(acc) in F
        (B, FB), m = datas[i]
        return all(
            rec(i + 1, acc + [image_of(datas[i], U)]) for U in sorted(FB)
        )

    return rec(0, [])


def filter_hyperdoctrine(C: CohCategory) -> CoherentHyperdoctrine:
    """Filter lattices of the subobject fibers, substitution pushing a
    filter forward to the up-closure of its image, adjoint taking preimage
    filters.  The predicate category of this hyperdoctrine reproduces the
    filter category."""
    from .lattice import NamedSetLattice

    fibers: dict[str, NamedSetLattice] = {
        A: filter_lattice(C.sub_lattice(A)) for A in C.cat.objects
    }
    subst, exists = {}, {}
    for f, m in C.cat.morphisms.items():
        pb = C.pullback_map(f)
        SA, SB = fibers[m.src], fibers[m.tgt]
        sub_c = C.sub_lattice(m.src)
        stab = {}
        for Fn in SB.elements:
            Fset = SB.decode[Fn]
            pushed = frozenset(
                u
                for u in sub_c.elements
                if any(sub_c.leq(pb(v), u) for v in Fset)
            )
            stab[Fn] = SA.encode_of(pushed)
        subst[f] = LatticeHom(SB, SA, stab)
        etab = {}
        for Fn in SA.elements:
            Fset = SA.decode[Fn]
            pre = frozenset(
                v for v in C.sub_lattice(m.tgt).elements if pb(v) in Fset
            )
            etab[Fn] = SB.encode_of(pre)
        exists[f] = MonotoneMap(SA, SB, etab)
    return CoherentHyperdoctrine(
        C.cat, fibers, subst, exists, BaseLimits.from_cohcat(C)
    )


# -- internal locales and semidirect sites ---------------------------------------


def check_internal_locale(X: CoherentHyperdoctrine):
    """Fibers complete (finite) with all substitutions join-preserving."""
    for f in X.base.morphisms:
        if not X.sub(f).preserves_finite_joins():
            return f"substitution along {f} does not preserve joins"
    return None


def semidirect_obj_name(A: str, u: str) -> str:
    return f"<{A};{u}>"


@dataclass(frozen=True, eq=False)
class SemidirectSite(Site):
    """Site of an internal locale: objects pair a base object with a fiber
    element; covers are detected by the join of existential images."""

    obj_data: dict[str, tuple[str, str]] = field(default_factory=dict)
    mor_data: dict[str, str] = field(default_factory=dict)  # name -> base morphism


def semidirect_site(C_like, X: CoherentHyperdoctrine) -> SemidirectSite:
    """Build C x| X over the hyperdoctrine's base; C_like supplies nothing
    beyond its base category (the covers come from X's adjoints)."""
    w = check_internal_locale(X)
    if w is not None:
        raise SiteError(w)
    base = X.base
    omap: dict[str, tuple[str, str]] = {}
    for A in base.objects:
        for u in X.fiber(A).elements:
            omap[semidirect_obj_name(A, u)] = (A, u)
    morphisms, identities, comp = {}, {}, {}
    mdata: dict[str, str] = {}

    def mor_name(f, src, tgt):
        return f"sd[{f}]:{src}->{tgt}"

    for nx, (A, u) in omap.items():
        for ny, (B, v) in omap.items():
            for f in base.hom(A, B):
                if X.fiber(A).leq(u, X.sub(f)(v)):
                    n = mor_name(f, nx, ny)
                    morphisms[n] = Morphism(n, nx, ny)
                    mdata[n] = f
    for nx, (A, u) in omap.items():
        identities[nx] = mor_name(base.identity(A), nx, nx)
    for n1, m1 in morphisms.items():
        for n2, m2 in morphisms.items():
            if m1.tgt != m2.src:
                continue
            comp[(n2, n1)] = mor_name(
                base.compose(mdata[n2], mdata[n1]), m1.src, m2.tgt
            )
    cat = FinCategory(tuple(sorted(omap)), morphisms, comp, identities)

    adjoints = {
        f: X.sub(f).left_adjoint() for f in base.morphisms
    }
    if any(a is None for a in adjoints.values()):
        raise SiteError("a substitution map lacks a left adjoint")

    def covers(nx: str, sieve) -> bool:
        A, u = omap[nx]
        FA = X.fiber(A)
        total = FA.bottom
        for n in sieve:
            src = cat.src(n)
            B, v = omap[src]
            total = FA.join(total, adjoints[mdata[n]](v))
        return total == u

    gens: dict[str, tuple] = {}
    for nx, (A, u) in omap.items():
        inc = cat.morphisms_into(nx)
        found: list[tuple] = []
        for r in range(0, min(len(inc), 3) + 1):
            for fam in combinations(inc, r):
                if covers(nx, fam) and not any(
                    set(p) <= set(fam) for p in found
                ):
                    found.append(fam)
        gens[nx] = tuple(found)
    return SemidirectSite(cat, covers, gens, obj_data=omap, mor_data=mdata)


# -- sheaf condition --------------------------------------------------------------


def sheaf_check(
    C: CohCategory,
    X: CoherentHyperdoctrine,
    budget: int | None = None,
) -> tuple[bool, str | None]:
    """Is X a sheaf for the coherent topology on C?  Sieve-indexed matching
    families must have exactly one amalgamation."""
    site = coherent_topology(C)
    for A in C.cat.objects:
        for sieve in site.covering_sieves(A, budget):
            for fam in _matching_families(C, X, sieve, budget):
                amalg = [
                    u
                    for u in X.fiber(A).elements
                    if all(X.sub(f)(u) == fam[f] for f in sieve)
                ]
                if len(amalg) != 1:
                    return False, (
                        f"cover of {A} with matching family "
                        f"{sorted(fam.items())} has {len(amalg)} amalgamations"
                    )
    return True, None


def _matching_families(C, X, sieve, budget=None):
    budget = budget if budget is not None else sieve_budget()
    sieve = sorted(sieve)
    total = 1
    for f in sieve:
        total *= len(X.fiber(C.cat.src(f)).elements)
        if total > budget:
            raise SiteError("matching-family enumeration exceeds budget")
    fams = [dict()]
    for f in sieve:
        fams = [
            {**fam, f: u}
            for fam in fams
            for u in X.fiber(C.cat.src(f)).elements
        ]
    out = []
    for fam in fams:
        ok = True
        for f in sieve:
            for g in C.cat.morphisms_into(C.cat.src(f)):
                fg = C.cat.compose(f, g)
                if fg in fam and X.sub(g)(fam[f]) != fam[fg]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(fam)
    return out


def unique_glueing_check(C: CohCategory, X: CoherentHyperdoctrine):
    """For every finite jointly-covering family and every fiber element u:
    u equals the join of the existential images of its restrictions."""
    site = coherent_topology(C)
    adjoints = {f: X.sub(f).left_adjoint() for f in X.base.morphisms}
    for A in C.cat.objects:
        FA = X.fiber(A)
        for fam in site.generators[A]:
            for u in FA.elements:
                glued = FA.join_all(
                    adjoints[f](X.sub(f)(u)) for f in fam
                )
                if glued != u:
                    return False, f"glueing identity fails on {A} at {u}"
    return True, None


def topology_coincidence_check(
    C: CohCategory, X: CanextHyperdoctrine | None = None, budget: int | None = None
):
    """On the semidirect site of the fiberwise extension: for every sieve,
    the plain join of existential images equals the join over the closure
    admitting members that are covered into the sieve by coherent covers.

    Returns (ok, sieves_checked, note)."""
    budget = budget if budget is not None else sieve_budget()
    if X is None:
        X = canext_hyperdoctrine(sub_hyperdoctrine(C))
    site = semidirect_site(C, X)
    coh = coherent_topology(C)
    adjoints = {f: X.sub(f).left_adjoint() for f in X.base.morphisms}
    checked = 0
    for nx, (A, u) in site.obj_data.items():
        FA = X.fiber(A)
        try:
            sieves = site.all_sieves(nx, budget)
        except SiteError:
            return True, checked, f"sieve budget exhausted at {nx}"
        for sieve in sieves:
            plain = FA.join_all(
                adjoints[site.mor_data[n]](site.obj_data[site.cat.src(n)][1])
                for n in sieve
            )
            closure = plain
            for B in C.cat.objects:
                for gamma in C.cat.hom(B, A):
                    for w in X.fiber(B).elements:
                        if not X.fiber(B).leq(w, X.sub(gamma)(u)):
                            continue
                        for fam in coh.generators[B]:
                            ok = True
                            for gk in fam:
                                Ck = C.cat.src(gk)
                                wk = X.sub(gk)(w)
                                member = (
                                    f"sd[{C.cat.compose(gamma, gk)}]:"
                                    f"{semidirect_obj_name(Ck, wk)}->{nx}"
                                )
                                if member not in sieve:
                                    ok = False
                                    break
                            if ok:
                                closure = FA.join(closure, adjoints[gamma](w))
                                break
            checked += 1
            if closure != plain:
                return False, checked, (
                    f"sieve on {nx}: closure join {closure} != plain {plain}"
                )
    return True, checked, None


# -- localic topos-of-types data for lattices -------------------------------------


@dataclass(frozen=True)
class LocalicTotReport:
    type_objects: int
    prime_poset_iso: bool
    topology_trivial: bool
    downsets_iso_ext: bool

    @property
    def passed(self) -> bool:
        return self.prime_poset_iso and self.topology_trivial and self.downsets_iso_ext


def localic_tot_for_lattice(L: FinLattice) -> LocalicTotReport:
    """For a lattice as a category: the top-anchored type objects form a
    poset isomorphic to the prime filters under reverse inclusion, the
    induced topology on them is trivial, and its downset lattice is the
    canonical extension."""
    from .canext import canonical_extension
    from .cohcat import LatticeCategory

    C = LatticeCategory(L)
    tau = type_category(C)
    top = L.top
    e_objs = sorted(X for X, (A, _) in tau.objects.items() if A == top)
    pairs = {
        (x, y)
        for x in e_objs
        for y in e_objs
        if tau.cat.hom(x, y)
    }
    e_poset = FinPoset.from_pairs(e_objs, pairs)
    iso = e_poset.iso_to(prime_filter_poset(L)) is not None
    site = jp_site(tau)
    trivial = True
    sub_site = Site(tau.cat, site.covers, site.generators)
    for X in e_objs:
        inc = [
            f
            for f in tau.cat.morphisms_into(X)
            if tau.cat.src(f) in e_objs
        ]
        for mask in range(1 << len(inc)):
            sieve = frozenset(inc[i] for i in range(len(inc)) if mask >> i & 1)
            closed = all(
                tau.cat.compose(f, g) in sieve
                for f in sieve
                for g in tau.cat.morphisms_into(tau.cat.src(f))
                if tau.cat.src(g) in e_objs
            )
            if not closed:
                continue
            if site.covers(X, sieve) and not any(
                tau.cat.is_iso(f) is not None for f in sieve
            ):
                trivial = False
    ext = canonical_extension(L)
    down_iso = downset_lattice(e_poset).iso_to(ext.ext) is not None
    return LocalicTotReport(len(e_objs), iso, trivial, down_iso)


# -- the comparison-lemma conditions ----------------------------------------------


@dataclass(frozen=True)
class ComparisonReport:
    cover_preserving: bool
    locally_full: bool
    locally_faithful: bool
    locally_surjective: bool
    co_continuous: bool
    witness: str | None = None

    @property
    def passed(self) -> bool:
        return all(
            [
                self.cover_preserving,
                self.locally_full,
                self.locally_faithful,
                self.locally_surjective,
                self.co_continuous,
            ]
        )


def comparison_check(
    e: FinFunctor, source: Site, target: Site, budget: int | None = None
) -> ComparisonReport:
    witness = None
    cover_preserving = True
    for D in source.cat.objects:
        for s in _covering_sieves_or_generated(source, D, budget):
            image = target.sieve_generated(e.on_obj(D), [e.on_mor(f) for f in s])
            if not target.covers(e.on_obj(D), image):
                cover_preserving = False
                witness = witness or f"a cover of {D} is not preserved"
    locally_full = True
    for CC in source.cat.objects:
        for D in source.cat.objects:
            for g in target.cat.hom(e.on_obj(CC), e.on_obj(D)):
                if not _locally_full_at(e, source, CC, D, g, budget):
                    locally_full = False
                    witness = witness or f"morphism {g} has no local lift"
    locally_faithful = True
    for CC in source.cat.objects:
        for D in source.cat.objects:
            homs = source.cat.hom(CC, D)
            for i, f1 in enumerate(homs):
                for f2 in homs[i + 1:]:
                    if e.on_mor(f1) != e.on_mor(f2):
                        continue
                    if not _locally_equalized(source, CC, f1, f2, budget):
                        locally_faithful = False
                        witness = witness or f"{f1},{f2} not locally equalized"
    locally_surjective = True
    image_objs = {e.on_obj(A) for A in source.cat.objects}
    for X in target.cat.objects:
        inc = [
            f
            for f in target.cat.morphisms_into(X)
            if target.cat.src(f) in image_objs
        ]
        if not target.covers(X, target.sieve_generated(X, inc)):
            locally_surjective = False
            witness = witness or f"object {X} has no cover from the image"
    co_continuous = True
    for D in source.cat.objects:
        for s in _covering_sieves_or_generated(target, e.on_obj(D), budget):
            pulled = frozenset(
                f
                for f in source.cat.morphisms_into(D)
                if any(
                    target.cat.compose(xi, h) == e.on_mor(f)
                    for xi in s
                    for h in target.cat.hom(
                        e.on_obj(source.cat.src(f)), target.cat.src(xi)
                    )
                )
            )
            if not source.covers(D, pulled):
                co_continuous = False
                witness = witness or (
                    f"a cover of {e.on_obj(D)} does not pull back to {D}"
                )
    return ComparisonReport(
        cover_preserving,
        locally_full,
        locally_faithful,
        locally_surjective,
        co_continuous,
        witness,
    )


def _covering_sieves_or_generated(site: Site, A: str, budget):
    try:
        return site.covering_sieves(A, budget)
    except SiteError:
        return [
            site.sieve_generated(A, fam)
            for fam in site.generators[A]
            if site.covers(A, site.sieve_generated(A, fam))
        ]


def _locally_full_at(e, source, CC, D, g, budget) -> bool:
    for sieve in _covering_sieves_or_generated(source, CC, budget):
        if all(
            any(
                e.target.compose(g, e.on_mor(xi)) == e.on_mor(fi)
                for fi in source.cat.hom(source.cat.src(xi), D)
            )
            for xi in sieve
        ):
            return True
    return False


def _locally_equalized(source, CC, f1, f2, budget) -> bool:
    for sieve in _covering_sieves_or_generated(source, CC, budget):
        if all(
            source.cat.compose(f1, xi) == source.cat.compose(f2, xi)
            for xi in sieve
        ):
            return True
    return False


# -- the join-irreducible site and the functor into the type category -----------


def irreducible_site(C: CohCategory, X: CanextHyperdoctrine) -> SemidirectSite:
    """Full subcategory of the semidirect site on (A, x) with x join
    irreducible in the fiber; topology generated by the singleton covers
    whose existential image hits the point exactly."""
    full = semidirect_site(C, X)
    keep = {
        n
        for n, (A, x) in full.obj_data.items()
        if is_join_irreducible(X.fiber(A), x)
    }
    objects = tuple(sorted(keep))
    morphisms = {
        n: m
        for n, m in full.cat.morphisms.items()
        if m.src in keep and m.tgt in keep
    }
    comp = {
        k: v
        for k, v in full.cat.comp.items()
        if k[0] in morphisms and k[1] in morphisms
    }
    identities = {A: full.cat.identities[A] for A in objects}
    cat = FinCategory(objects, morphisms, comp, identities)
    adjoints = {f: X.sub(f).left_adjoint() for f in X.base.morphisms}
    omap = {n: full.obj_data[n] for n in objects}
    mdata = {n: full.mor_data[n] for n in morphisms}

    def covers(nx, sieve) -> bool:
        A, x = omap[nx]
        for n in sieve:
            B, z = omap[cat.src(n)]
            if adjoints[mdata[n]](z) == x:
                return True
        return False

    gens = {}
    for nx in objects:
        fams = [
            (n,) for n in cat.morphisms_into(nx) if covers(nx, (n,))
        ]
        gens[nx] = tuple(sorted(fams))
    return SemidirectSite(cat, covers, gens, obj_data=omap, mor_data=mdata)


def irreducible_to_types(
    C: CohCategory, X: CanextHyperdoctrine, D: SemidirectSite, tau: FilterCategory
) -> FinFunctor:
    """(A, x) |-> (A, rho_x), where rho_x collects the subobjects whose
    embedded image lies above x; a site morphism becomes the germ of its
    base morphism on the full domain."""
    obj_map = {}
    for n, (A, x) in D.obj_data.items():
        rho = frozenset(
            U
            for U in C.sub_lattice(A).elements
            if X.fiber(A).leq(x, X.fiber_ext[A].e(U))
        )
        obj_map[n] = filter_obj_name(A, rho)
    mor_map = {}
    for n, m in D.cat.morphisms.items():
        f = D.mor_data[n]
        A = C.cat.src(f)
        mor_map[n] = tau.germ_of(
            obj_map[m.src], obj_map[m.tgt], C.sub_lattice(A).top, f
        )
    return FinFunctor(D.cat, tau.cat, obj_map, mor_map)


# -- locale morphisms --------------------------------------------------------------


@dataclass(frozen=True)
class LocaleMorphism:
    """Componentwise frame data induced by a coherent functor: per source
    object, the unique extension of its subobject action."""

    C: CohCategory
    D: CohCategory
    F: FinFunctor
    components: dict[str, LatticeHom]
    source_ext: dict[str, CanonicalExtension]
    target_ext: dict[str, CanonicalExtension]


def locale_morphism(F: FinFunctor, C: CohCategory, D: CohCategory) -> LocaleMorphism:
    from .canext import canonical_extension
    from .cohcat import coherent_functor_witness, functor_sub_map

    w = coherent_functor_witness(F, C, D)
    if w is not None:
        raise CategoryError(f"not a coherent functor: {w}")
    source_ext = {A: canonical_extension(C.sub_lattice(A)) for A in C.cat.objects}
    target_ext = {
        A: canonical_extension(D.sub_lattice(F.on_obj(A))) for A in C.cat.objects
    }
    comps = {}
    for A in C.cat.objects:
        FA = functor_sub_map(F, C, D, A)
        d = delta_extension(FA, source_ext[A], target_ext[A])
        comps[A] = LatticeHom(d.map.source, d.map.target, d.map.mapping)
    return LocaleMorphism(C, D, F, comps, source_ext, target_ext)


def surjection_check(m: LocaleMorphism) -> tuple[bool, str | None]:
    """Locale surjection: every frame component is an order-embedding."""
    for A, comp in m.components.items():
        if not comp.is_order_embedding():
            return False, f"component at {A} is not an order-embedding"
    return True, None


def open_check(m: LocaleMorphism) -> tuple[bool, str | None]:
    """Open locale map: componentwise left adjoints exist (always, at
    finite scale), are natural in the base, and satisfy Frobenius.
    Naturality is derived by checking it, not assumed."""
    sigma = {}
    for A, comp in m.components.items():
        adj = comp.left_adjoint()
        if adj is None:
            return False, f"component at {A} has no left adjoint"
        sigma[A] = adj
    C, D, F = m.C, m.D, m.F
    for f, mor in C.cat.morphisms.items():
        A, B = mor.src, mor.tgt
        subC = delta_extension(
            C.pullback_map(f), m.source_ext[B], m.source_ext[A]
        ).map
        subD = delta_extension(
            D.pullback_map(F.on_mor(f)), m.target_ext[B], m.target_ext[A]
        ).map
        for w in m.target_ext[B].ext.elements:
            if sigma[A](subD(w)) != subC(sigma[B](w)):
                return False, f"adjoints not natural along {f} at {w}"
    for A, comp in m.components.items():
        E_t, E_s = m.target_ext[A].ext, m.source_ext[A].ext
        for w in E_t.elements:
            for v in E_s.elements:
                if sigma[A](E_t.meet(w, comp(v))) != E_s.meet(sigma[A](w), v):
                    return False, f"Frobenius fails at {A} on ({w},{v})"
    return True, None


@dataclass(frozen=True)
class FactorizationData:
    intermediate: SemidirectSite
    site_morphism: dict  # intermediate object name -> target-site object name
    locale: LocaleMorphism
    omega_ok: bool
    witness: str | None


def factorization_data(F: FinFunctor, C: CohCategory, D: CohCategory) -> FactorizationData:
    """The two legs of the hyperconnected-localic splitting: the semidirect
    site over C with fibers pulled back along F, the object map into the
    target semidirect site, the locale morphism, and the check that the
    classifier fibers (downsets of the fiber element) and their actions
    agree across the site map."""
    loc = locale_morphism(F, C, D)
    SDd = canext_hyperdoctrine(sub_hyperdoctrine(D))
    fibers = {A: SDd.fiber(F.on_obj(A)) for A in C.cat.objects}
    subst = {f: SDd.sub(F.on_mor(f)) for f in C.cat.morphisms}
    exists = {f: SDd.ex(F.on_mor(f)) for f in C.cat.morphisms}
    pulled = CoherentHyperdoctrine(
        C.cat, fibers, subst, exists, BaseLimits.from_cohcat(C)
    )
    inter = semidirect_site(C, pulled)
    target_site = semidirect_site(D, SDd)
    site_morphism = {
        n: semidirect_obj_name(F.on_obj(A), w)
        for n, (A, w) in inter.obj_data.items()
    }
    omega_ok, witness = True, None
    for n, (A, w) in inter.obj_data.items():
        if site_morphism[n] not in target_site.cat.objects:
            omega_ok, witness = False, f"image object of {n} missing"
            break
        FA = fibers[A]
        FB = SDd.fiber(F.on_obj(A))
        down_src = {x for x in FA.elements if FA.leq(x, w)}
        down_tgt = {x for x in FB.elements if FB.leq(x, w)}
        if down_src != down_tgt:
            omega_ok, witness = False, f"classifier fibers differ at {n}"
            break
    if omega_ok:
        for n1, m1 in inter.cat.morphisms.items():
            f = inter.mor_data[n1]
            A, u = inter.obj_data[m1.src]
            B, v = inter.obj_data[m1.tgt]
            for w in fibers[B].elements:
                if not fibers[B].leq(w, v):
                    continue
                lhs = fibers[A].meet(subst[f](w), u)
                rhs = SDd.fiber(F.on_obj(A)).meet(SDd.sub(F.on_mor(f))(w), u)
                if lhs != rhs:
                    omega_ok, witness = False, f"classifier action differs along {n1}"
                    break
            if not omega_ok:
                break
    return FactorizationData(inter, site_morphism, loc, omega_ok, witness)
