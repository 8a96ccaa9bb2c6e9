"""Coherent categories with a computable subobject calculus.

Two implementations share one interface: fragments of finite sets (objects
are literal sets, subobjects are subsets) and distributive lattices viewed
as posetal categories (subobjects of a are the elements below a).  Chosen
limits are explicit and possibly partial: a finite fragment of sets
containing a two-point set cannot contain all its binary products, so
operations that need a missing product raise MissingLimitError.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product as iproduct

from .fincat import CategoryError, FinCategory, FinFunctor, Morphism
from .lattice import FinLattice, LatticeHom, MonotoneMap, NamedSetLattice
from .order import FinPoset, set_name


class MissingLimitError(CategoryError):
    """A chosen limit needed by a construction is absent from the fragment."""


@dataclass(frozen=True)
class ProductCone:
    obj: str
    pi1: str
    pi2: str


@dataclass(frozen=True)
class PullbackSquare:
    """Cospan alpha : A -> C, beta : B -> C with chosen pullback Q and
    projections alpha_p : Q -> B, beta_p : Q -> A (so alpha o beta_p =
    beta o alpha_p)."""

    alpha: str
    beta: str
    obj: str
    alpha_p: str
    beta_p: str


class CohCategory:
    """Interface; see ConcreteCohCategory and LatticeCategory."""

    cat: FinCategory

    def sub_lattice(self, A: str) -> FinLattice:
        raise NotImplementedError

    def pullback_map(self, f: str) -> LatticeHom:
        raise NotImplementedError

    def image_map(self, f: str) -> MonotoneMap:
        raise NotImplementedError

    def forall_map(self, f: str) -> MonotoneMap:
        raise NotImplementedError

    def terminal(self) -> str:
        raise NotImplementedError

    def product(self, A: str, B: str) -> ProductCone:
        raise NotImplementedError

    def equalizer(self, f: str, g: str) -> tuple[str, str]:
        raise NotImplementedError

    def subobject_object(self, A: str, u: str) -> tuple[str, str]:
        """Realize the subobject u of A as (object, mono into A)."""
        raise NotImplementedError

    def restrict(self, f: str, u: str) -> str:
        """f : A -> B restricted to the subobject u of A, as a morphism
        from the realizing object of u into B."""
        raise NotImplementedError

    def chosen_squares(self) -> list[PullbackSquare]:
        raise NotImplementedError

    # -- derived operations shared by all implementations ----------------

    def subobject_of_mono(self, m: str) -> str:
        """The subobject of tgt(m) carved out by the morphism m."""
        top = self.sub_lattice(self.cat.src(m)).top
        return self.image_map(m)(top)

    def pairing(self, f: str, g: str) -> str:
        """The unique h with pi1 o h = f and pi2 o h = g into the chosen
        product of the targets."""
        A, B = self.cat.tgt(f), self.cat.tgt(g)
        cone = self.product(A, B)
        Z = self.cat.src(f)
        matches = [
            h
            for h in self.cat.hom(Z, cone.obj)
            if self.cat.compose(cone.pi1, h) == f
            and self.cat.compose(cone.pi2, h) == g
        ]
        if len(matches) != 1:
            raise MissingLimitError(
                f"pairing of {f},{g} not unique ({len(matches)} candidates)"
            )
        return matches[0]

    def diagonal(self, A: str) -> str:
        i = self.cat.identity(A)
        return self.pairing(i, i)

    def graph(self, f: str) -> str:
        """graph(f : A -> B) as a subobject of the chosen product A x B."""
        A = self.cat.src(f)
        h = self.pairing(self.cat.identity(A), f)
        return self.image_map(h)(self.sub_lattice(A).top)

    def relative_graph(self, u: str, f: str) -> str:
        """Graph of f restricted to the subobject u of its source."""
        A = self.cat.src(f)
        obj, mono = self.subobject_object(A, u)
        h = self.pairing(mono, self.cat.compose(f, mono))
        return self.image_map(h)(self.sub_lattice(obj).top)

    def morphism_from_graph(self, A: str, u: str, B: str, v: str, rel: str):
        """The morphism between the realizing objects of u and v whose
        graph relative to u is rel, or None."""
        uo, um = self.subobject_object(A, u)
        vo, vm = self.subobject_object(B, v)
        cands = []
        for m in self.cat.hom(uo, vo):
            h = self.pairing(um, self.cat.compose(vm, m))
            g = self.image_map(h)(self.sub_lattice(uo).top)
            if g == rel:
                cands.append(m)
        if len(cands) == 1:
            return cands[0]
        return None

    def is_terminal(self, T: str) -> bool:
        return all(len(self.cat.hom(A, T)) == 1 for A in self.cat.objects)

    def is_product_cone(self, A: str, B: str, cone: ProductCone) -> bool:
        for Z in self.cat.objects:
            for f in self.cat.hom(Z, A):
                for g in self.cat.hom(Z, B):
                    hs = [
                        h
                        for h in self.cat.hom(Z, cone.obj)
                        if self.cat.compose(cone.pi1, h) == f
                        and self.cat.compose(cone.pi2, h) == g
                    ]
                    if len(hs) != 1:
                        return False
        return True

    def all_pullback_squares(self) -> list[PullbackSquare]:
        """Exhaustive mode: every cospan that has a pullback cone among the
        objects, found by its universal property.  Quadratic in the
        morphism count; intended for small fragments."""
        cat = self.cat
        out = []
        for alpha in sorted(cat.morphisms):
            C0 = cat.tgt(alpha)
            A = cat.src(alpha)
            for beta in cat.morphisms_into(C0):
                found = None
                for Q in cat.objects:
                    for pA in cat.hom(Q, A):
                        if found:
                            break
                        for pB in cat.hom(Q, cat.src(beta)):
                            if cat.compose(alpha, pA) != cat.compose(beta, pB):
                                continue
                            if self._is_pullback(alpha, beta, Q, pA, pB):
                                found = PullbackSquare(alpha, beta, Q, pB, pA)
                                break
                    if found:
                        break
                if found:
                    out.append(found)
        return out

    def _is_pullback(self, alpha, beta, Q, pA, pB) -> bool:
        cat = self.cat
        for Z in cat.objects:
            for u in cat.hom(Z, cat.src(alpha)):
                for v in cat.hom(Z, cat.src(beta)):
                    if cat.compose(alpha, u) != cat.compose(beta, v):
                        continue
                    hs = [
                        h
                        for h in cat.hom(Z, Q)
                        if cat.compose(pA, h) == u and cat.compose(pB, h) == v
                    ]
                    if len(hs) != 1:
                        return False
        return True


# -- concrete fragments of finite sets ----------------------------------------


def fun_name(src: frozenset, tgt: frozenset, mapping: dict) -> str:
    body = ",".join(f"{a}>{mapping[a]}" for a in sorted(mapping))
    return f"fn({body}):{set_name(src)}->{set_name(tgt)}"


class ConcreteCohCategory(CohCategory):
    """A full subcategory of finite sets, closed under subsets.

    Objects are frozensets of strings named canonically; morphisms are all
    functions between them.  Subobjects are literal subsets.  Chosen
    products and the terminal are searched for among the objects and may be
    missing; chosen pullback squares are the preimage squares of monos
    (plus product squares when available).
    """

    def __init__(self, seeds, check_associativity: bool = False):
        sets = set()
        for s in seeds:
            s = frozenset(s)
            for mask_elems in _subsets(s):
                sets.add(mask_elems)
        if not sets:
            sets.add(frozenset())
        self.sets = sorted(sets, key=lambda s: (len(s), sorted(s)))
        self.of_name = {set_name(s): s for s in self.sets}
        self._funs: dict[str, tuple[frozenset, frozenset, dict]] = {}
        morphisms, identities = {}, {}
        for A in self.sets:
            for B in self.sets:
                for mapping in _functions(A, B):
                    n = fun_name(A, B, mapping)
                    morphisms[n] = Morphism(n, set_name(A), set_name(B))
                    self._funs[n] = (A, B, mapping)
                    if A == B and all(mapping[a] == a for a in A):
                        identities[set_name(A)] = n
        comp = {}
        by_src = {}
        for n, (A, B, m) in self._funs.items():
            by_src.setdefault(set_name(A), []).append(n)
        for f, (A, B, fm) in self._funs.items():
            for g in by_src.get(set_name(B), []):
                _, C, gm = self._funs[g]
                comp[(g, f)] = fun_name(A, C, {a: gm[fm[a]] for a in A})
        self.cat = FinCategory(
            tuple(set_name(s) for s in self.sets), morphisms, comp, identities
        ) if check_associativity else _fincat_unchecked(
            tuple(set_name(s) for s in self.sets), morphisms, comp, identities
        )

    def fun(self, name: str) -> dict:
        return self._funs[name][2]

    def elements(self, A: str) -> frozenset:
        return self.of_name[A]

    @lru_cache(maxsize=None)
    def sub_lattice(self, A: str) -> NamedSetLattice:
        subs = sorted(_subsets(self.of_name[A]), key=lambda s: (len(s), sorted(s)))
        names = {s: set_name(s) for s in subs}
        poset = FinPoset.trusted(
            tuple(names[s] for s in subs),
            frozenset((names[s], names[t]) for s in subs for t in subs if s <= t),
        )
        meet = {(names[s], names[t]): names[s & t] for s in subs for t in subs}
        join = {(names[s], names[t]): names[s | t] for s in subs for t in subs}
        return NamedSetLattice.trusted(
            poset, meet, join, names[frozenset()], names[self.of_name[A]],
            decode={names[s]: s for s in subs},
        )

    def pullback_map(self, f: str) -> LatticeHom:
        A, B, m = self._funs[f]
        SA, SB = self.sub_lattice(set_name(A)), self.sub_lattice(set_name(B))
        return LatticeHom(
            SB, SA,
            {
                v: set_name(frozenset(a for a in A if m[a] in SB.decode[v]))
                for v in SB.elements
            },
        )

    def image_map(self, f: str) -> MonotoneMap:
        A, B, m = self._funs[f]
        SA, SB = self.sub_lattice(set_name(A)), self.sub_lattice(set_name(B))
        return MonotoneMap(
            SA, SB,
            {
                u: set_name(frozenset(m[a] for a in SA.decode[u]))
                for u in SA.elements
            },
        )

    def forall_map(self, f: str) -> MonotoneMap:
        A, B, m = self._funs[f]
        SA, SB = self.sub_lattice(set_name(A)), self.sub_lattice(set_name(B))
        return MonotoneMap(
            SA, SB,
            {
                u: set_name(
                    frozenset(
                        b
                        for b in B
                        if all(a in SA.decode[u] for a in A if m[a] == b)
                    )
                )
                for u in SA.elements
            },
        )

    def terminal(self) -> str:
        for s in self.sets:
            if len(s) == 1:
                return set_name(s)
        raise MissingLimitError("no one-point set in the fragment")

    @lru_cache(maxsize=None)
    def product(self, A: str, B: str) -> ProductCone:
        sa, sb = self.of_name[A], self.of_name[B]
        want = len(sa) * len(sb)
        for P in self.sets:
            if len(P) != want:
                continue
            for m1 in _functions(P, sa):
                for m2 in _functions(P, sb):
                    if len({(m1[p], m2[p]) for p in P}) == want:
                        return ProductCone(
                            set_name(P), fun_name(P, sa, m1), fun_name(P, sb, m2)
                        )
        raise MissingLimitError(f"fragment has no product of {A} and {B}")

    def equalizer(self, f: str, g: str) -> tuple[str, str]:
        A, _, fm = self._funs[f]
        _, _, gm = self._funs[g]
        eq = frozenset(a for a in A if fm[a] == gm[a])
        return set_name(eq), fun_name(eq, A, {a: a for a in eq})

    def subobject_object(self, A: str, u: str) -> tuple[str, str]:
        s = self.sub_lattice(A).decode[u]
        return set_name(s), fun_name(s, self.of_name[A], {a: a for a in s})

    def restrict(self, f: str, u: str) -> str:
        A, B, m = self._funs[f]
        s = self.sub_lattice(set_name(A)).decode[u]
        return fun_name(s, B, {a: m[a] for a in s})

    def chosen_squares(self) -> list[PullbackSquare]:
        out = []
        for C0 in self.cat.objects:
            SC = self.sub_lattice(C0)
            for v in SC.elements:
                vo, vm = self.subobject_object(C0, v)
                for beta in self.cat.morphisms_into(C0):
                    if beta == vm:
                        continue
                    B = self.cat.src(beta)
                    q = self.pullback_map(beta)(v)
                    qo, qm = self.subobject_object(B, q)
                    beta_res = self.restrict(beta, q)
                    _, _, bm = self._funs[beta_res]
                    beta_p = fun_name(
                        self.of_name[qo], self.of_name[vo], dict(bm)
                    )
                    out.append(PullbackSquare(vm, beta, qo, qm, beta_p))
        return out


def _subsets(s: frozenset):
    items = sorted(s)
    out = [frozenset()]
    for e in items:
        out += [t | {e} for t in out]
    return out


def _functions(A, B):
    """All functions A -> B as dicts, deterministic order."""
    items = sorted(A)
    if not items:
        return [dict()]
    if not B:
        return []
    out = []
    for values in iproduct(sorted(B), repeat=len(items)):
        out.append(dict(zip(items, values)))
    return out


def _fincat_unchecked(objects, morphisms, comp, identities) -> FinCategory:
    """Build a FinCategory skipping the O(n^3) associativity sweep; used
    only for categories whose composition is function composition."""
    cat = object.__new__(FinCategory)
    object.__setattr__(cat, "objects", objects)
    object.__setattr__(cat, "morphisms", morphisms)
    object.__setattr__(cat, "comp", comp)
    object.__setattr__(cat, "identities", identities)
    return cat


# -- distributive lattices as posetal categories -------------------------------


def le_name(a: str, b: str) -> str:
    return f"le({a},{b})"


class LatticeCategory(CohCategory):
    """A finite distributive lattice as a coherent category: one morphism
    a -> b whenever a <= b; products are meets, the terminal is the top,
    and the subobjects of a are the elements below a."""

    def __init__(self, L: FinLattice):
        from .lattice import require_distributive

        require_distributive(L)
        self.lattice = L
        morphisms, identities, comp = {}, {}, {}
        pairs = [
            (a, b)
            for a in L.elements
            for b in L.elements
            if L.leq(a, b)
        ]
        for a, b in pairs:
            morphisms[le_name(a, b)] = Morphism(le_name(a, b), a, b)
        for a in L.elements:
            identities[a] = le_name(a, a)
        for a, b in pairs:
            for b2, c in pairs:
                if b == b2:
                    comp[(le_name(b, c), le_name(a, b))] = le_name(a, c)
        self.cat = FinCategory(tuple(L.elements), morphisms, comp, identities)

    @lru_cache(maxsize=None)
    def sub_lattice(self, A: str) -> FinLattice:
        return self.lattice.down_lattice(A)

    def pullback_map(self, f: str) -> LatticeHom:
        a, b = self.cat.src(f), self.cat.tgt(f)
        SA, SB = self.sub_lattice(a), self.sub_lattice(b)
        return LatticeHom(SB, SA, {v: self.lattice.meet(v, a) for v in SB.elements})

    def image_map(self, f: str) -> MonotoneMap:
        a, b = self.cat.src(f), self.cat.tgt(f)
        SA, SB = self.sub_lattice(a), self.sub_lattice(b)
        return MonotoneMap(SA, SB, {u: u for u in SA.elements})

    def forall_map(self, f: str) -> MonotoneMap:
        a, b = self.cat.src(f), self.cat.tgt(f)
        SA, SB = self.sub_lattice(a), self.sub_lattice(b)
        return MonotoneMap(
            SA, SB,
            {u: self.lattice.meet(b, self.lattice.implies(a, u)) for u in SA.elements},
        )

    def terminal(self) -> str:
        return self.lattice.top

    def product(self, A: str, B: str) -> ProductCone:
        m = self.lattice.meet(A, B)
        return ProductCone(m, le_name(m, A), le_name(m, B))

    def equalizer(self, f: str, g: str) -> tuple[str, str]:
        a = self.cat.src(f)
        return a, self.cat.identity(a)

    def subobject_object(self, A: str, u: str) -> tuple[str, str]:
        return u, le_name(u, A)

    def restrict(self, f: str, u: str) -> str:
        return le_name(u, self.cat.tgt(f))

    def chosen_squares(self) -> list[PullbackSquare]:
        L = self.lattice
        out = []
        for c in L.elements:
            for a in L.elements:
                if not L.leq(a, c):
                    continue
                for b in L.elements:
                    if not L.leq(b, c):
                        continue
                    q = L.meet(a, b)
                    out.append(
                        PullbackSquare(
                            le_name(a, c), le_name(b, c), q,
                            le_name(q, b), le_name(q, a),
                        )
                    )
        return out


# -- functor property checks ---------------------------------------------------


def functor_sub_map(F: FinFunctor, C: CohCategory, D: CohCategory, A: str) -> MonotoneMap:
    """The restriction of F to a map Sub_C(A) -> Sub_D(FA), carrying a
    subobject to the image of F applied to its mono."""
    SA = C.sub_lattice(A)
    SD = D.sub_lattice(F.on_obj(A))
    table = {}
    for u in SA.elements:
        _, mono = C.subobject_object(A, u)
        table[u] = D.subobject_of_mono(F.on_mor(mono))
    return MonotoneMap(SA, SD, table)


def check_coherent_functor(F: FinFunctor, C: CohCategory, D: CohCategory) -> bool:
    return coherent_functor_witness(F, C, D) is None


def coherent_functor_witness(F: FinFunctor, C: CohCategory, D: CohCategory):
    """None if F preserves the chosen finite limits, images, and finite
    joins of subobjects; otherwise a human-readable witness."""
    try:
        T = C.terminal()
        if not D.is_terminal(F.on_obj(T)):
            return f"terminal {T} not preserved"
    except MissingLimitError:
        pass
    for A in C.cat.objects:
        for B in C.cat.objects:
            try:
                cone = C.product(A, B)
            except MissingLimitError:
                continue
            fcone = ProductCone(
                F.on_obj(cone.obj), F.on_mor(cone.pi1), F.on_mor(cone.pi2)
            )
            if not D.is_product_cone(F.on_obj(A), F.on_obj(B), fcone):
                return f"product of ({A},{B}) not preserved"
    for f in C.cat.morphisms:
        for g in C.cat.morphisms:
            if (
                C.cat.src(f) != C.cat.src(g)
                or C.cat.tgt(f) != C.cat.tgt(g)
                or f > g
            ):
                continue
            eq_obj, eq_mono = C.equalizer(f, g)
            if not _is_equalizer(D, F.on_mor(f), F.on_mor(g), F.on_mor(eq_mono)):
                return f"equalizer of ({f},{g}) not preserved"
    for A in C.cat.objects:
        FA = functor_sub_map(F, C, D, A)
        SA, SD = FA.source, FA.target
        if FA(SA.bottom) != SD.bottom:
            return f"bottom of Sub({A}) not preserved"
        for u in SA.elements:
            for v in SA.elements:
                if FA(SA.join(u, v)) != SD.join(FA(u), FA(v)):
                    return f"join in Sub({A}) not preserved on ({u},{v})"
    for f in C.cat.morphisms:
        A, B = C.cat.src(f), C.cat.tgt(f)
        FA = functor_sub_map(F, C, D, A)
        FB = functor_sub_map(F, C, D, B)
        im_c, im_d = C.image_map(f), D.image_map(F.on_mor(f))
        for u in FA.source.elements:
            if FB(im_c(u)) != im_d(FA(u)):
                return f"image along {f} not preserved on {u}"
    return None


def _is_equalizer(D: CohCategory, f: str, g: str, mono: str) -> bool:
    if D.cat.compose(f, mono) != D.cat.compose(g, mono):
        return False
    E = D.cat.src(mono)
    for Z in D.cat.objects:
        for z in D.cat.hom(Z, D.cat.src(f)):
            if D.cat.compose(f, z) != D.cat.compose(g, z):
                continue
            lifts = [
                h for h in D.cat.hom(Z, E) if D.cat.compose(mono, h) == z
            ]
            if len(lifts) != 1:
                return False
    return True


def check_conservative(F: FinFunctor, C: CohCategory, D: CohCategory) -> bool:
    return conservative_witness(F, C, D) is None


def conservative_witness(F: FinFunctor, C: CohCategory, D: CohCategory):
    for A in C.cat.objects:
        FA = functor_sub_map(F, C, D, A)
        if not FA.is_order_embedding():
            return f"Sub({A}) is not order-embedded"
    return None


def check_heyting_functor(F: FinFunctor, C: CohCategory, D: CohCategory) -> bool:
    if not check_coherent_functor(F, C, D):
        return False
    for f in C.cat.morphisms:
        A, B = C.cat.src(f), C.cat.tgt(f)
        FA = functor_sub_map(F, C, D, A)
        FB = functor_sub_map(F, C, D, B)
        fa_c, fa_d = C.forall_map(f), D.forall_map(F.on_mor(f))
        for u in FA.source.elements:
            if FB(fa_c(u)) != fa_d(FA(u)):
                return False
    return True


def lattice_hom_functor(h: LatticeHom, C: LatticeCategory, D: LatticeCategory) -> FinFunctor:
    """The posetal functor induced by a bounded lattice homomorphism."""
    obj_map = {a: h(a) for a in C.lattice.elements}
    mor_map = {
        m.name: le_name(h(m.src), h(m.tgt)) for m in C.cat.morphisms.values()
    }
    return FinFunctor(C.cat, D.cat, obj_map, mor_map)
