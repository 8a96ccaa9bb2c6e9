"""Canonical extension of finite distributive lattices and of monotone maps.

The extension of L is materialized as the downset lattice of the poset of
prime filters of L under reverse inclusion, with the embedding
a |-> {rho | a in rho}.  Even though the embedding is an isomorphism for
finite L, the construction mirrors the general definitions: denseness,
compactness, and the two-stage sigma/pi lifting formulas are all computed
literally, so the code paths match the infinite-case definitions and the
finite collapse is a theorem the test suite proves rather than a shortcut.
"""

from __future__ import annotations

from dataclasses import dataclass
from .lattice import (
    FinLattice,
    LatticeError,
    LatticeHom,
    MonotoneMap,
    downset_lattice,
    lattice_homs,
    prime_filter_poset,
    prime_filters,
    require_distributive,
)
from .order import set_name


class PreservationError(LatticeError):
    """Map preserves neither finite joins nor finite meets."""


class FilteredError(LatticeError):
    """Subset is not down-directed."""


@dataclass(frozen=True, eq=False)
class CanonicalExtension:
    """An embedding of a lattice into a complete (here: finite) lattice.

    `canonical_extension` produces the dense and compact one; arbitrary
    embeddings can be wrapped too, so the denseness/compactness predicates
    stay honest checks instead of constructor postconditions.
    """

    base: FinLattice
    ext: FinLattice
    embed: dict[str, str]

    def __post_init__(self):
        m = MonotoneMap(self.base, self.ext, self.embed)
        if not m.is_lattice_hom():
            raise LatticeError("embedding is not a lattice homomorphism")
        if len(set(self.embed.values())) != len(self.base.elements):
            raise LatticeError("embedding is not injective")

    def e(self, a: str) -> str:
        return self.embed[a]

    @property
    def image(self) -> frozenset[str]:
        return frozenset(self.embed.values())

    @property
    def filt_elements(self) -> frozenset[str]:
        """Meet closure of the embedded image in ext."""
        return frozenset(
            x
            for x in self.ext.elements
            if x == self.ext.meet_all(y for y in self.image if self.ext.leq(x, y))
        )

    @property
    def ideal_elements(self) -> frozenset[str]:
        return frozenset(
            x
            for x in self.ext.elements
            if x == self.ext.join_all(y for y in self.image if self.ext.leq(y, x))
        )

    def filter_of(self, x: str) -> list[str]:
        """Base elements whose image lies above x."""
        return [a for a in self.base.elements if self.ext.leq(x, self.e(a))]

    def ideal_of(self, y: str) -> list[str]:
        return [a for a in self.base.elements if self.ext.leq(self.e(a), y)]

    def is_iso(self) -> bool:
        return len(self.image) == len(self.ext.elements)

    def __eq__(self, other):
        return (
            isinstance(other, CanonicalExtension)
            and self.base == other.base
            and self.ext == other.ext
            and self.embed == other.embed
        )

    def __hash__(self):
        return hash((self.base, self.ext, tuple(sorted(self.embed.items()))))


_EXTENSION_CACHE: dict = {}


def canonical_extension(L: FinLattice) -> CanonicalExtension:
    """Downsets of (PrFl(L), reverse inclusion), embedding a to its
    prime-filter spectrum.  Cached; extensions are immutable."""
    cached = _EXTENSION_CACHE.get(L)
    if cached is not None:
        return cached
    require_distributive(L)
    pf = prime_filters(L)
    ext = downset_lattice(prime_filter_poset(L))
    embed = {
        a: set_name(frozenset(set_name(s) for s in pf if a in s))
        for a in L.elements
    }
    ce = CanonicalExtension(L, ext, embed)
    _EXTENSION_CACHE[L] = ce
    return ce


def check_dense(ce: CanonicalExtension) -> bool:
    """Every element of ext is a join of filter elements and a meet of
    ideal elements (equivalently: a join of meets and meet of joins of
    embedded elements)."""
    filt, idl = ce.filt_elements, ce.ideal_elements
    for u in ce.ext.elements:
        jm = ce.ext.join_all(x for x in filt if ce.ext.leq(x, u))
        mj = ce.ext.meet_all(y for y in idl if ce.ext.leq(u, y))
        if jm != u or mj != u:
            return False
    return True


def check_compact(ce: CanonicalExtension, budget: int = 1 << 22) -> bool:
    """For all F, I subsets of the base with /\\ e[F] <= \\/ e[I] in ext,
    some finite F' <= F, I' <= I satisfy /\\ F' <= \\/ I' in the base.

    At finite scale the whole subsets are the optimal finite witnesses, so
    the check compares the two inequalities directly, exhaustively over
    subset pairs.
    """
    elems = ce.base.elements
    n = len(elems)
    if (1 << (2 * n)) > budget:
        raise LatticeError(f"compactness check over {n} elements exceeds budget")
    subsets = []
    for mask in range(1 << n):
        subsets.append([elems[i] for i in range(n) if mask >> i & 1])
    for F in subsets:
        mF_ext = ce.ext.meet_all(ce.e(a) for a in F)
        mF_base = ce.base.meet_all(F)
        for I in subsets:
            if ce.ext.leq(mF_ext, ce.ext.join_all(ce.e(a) for a in I)):
                if not ce.base.leq(mF_base, ce.base.join_all(I)):
                    return False
    return True


# -- sigma / pi / delta extensions --------------------------------------------


@dataclass(frozen=True, eq=False)
class ExtendedMap:
    """A lifting of a monotone base map to the canonical extensions."""

    kind: str  # "sigma" | "pi" | "delta"
    base_map: MonotoneMap
    source: CanonicalExtension
    target: CanonicalExtension
    map: MonotoneMap  # source.ext -> target.ext

    def __call__(self, u: str) -> str:
        return self.map(u)

    def restricts_to_base(self) -> bool:
        return all(
            self.map(self.source.e(a)) == self.target.e(self.base_map(a))
            for a in self.base_map.source.elements
        )


def sigma_extension(
    f: MonotoneMap, ce_s: CanonicalExtension, ce_t: CanonicalExtension
) -> ExtendedMap:
    """Two-stage formula: on a filter element x, the meet of f over the
    filter of x; in general, the join over filter elements below."""
    _check_lift_typing(f, ce_s, ce_t)
    ext_s, ext_t = ce_s.ext, ce_t.ext
    on_filt = {
        x: ext_t.meet_all(ce_t.e(f(a)) for a in ce_s.filter_of(x))
        for x in ce_s.filt_elements
    }
    table = {
        u: ext_t.join_all(
            on_filt[x] for x in ce_s.filt_elements if ext_s.leq(x, u)
        )
        for u in ext_s.elements
    }
    return ExtendedMap("sigma", f, ce_s, ce_t, MonotoneMap(ext_s, ext_t, table))


def pi_extension(
    f: MonotoneMap, ce_s: CanonicalExtension, ce_t: CanonicalExtension
) -> ExtendedMap:
    _check_lift_typing(f, ce_s, ce_t)
    ext_s, ext_t = ce_s.ext, ce_t.ext
    on_idl = {
        y: ext_t.join_all(ce_t.e(f(a)) for a in ce_s.ideal_of(y))
        for y in ce_s.ideal_elements
    }
    table = {
        u: ext_t.meet_all(
            on_idl[y] for y in ce_s.ideal_elements if ext_s.leq(u, y)
        )
        for u in ext_s.elements
    }
    return ExtendedMap("pi", f, ce_s, ce_t, MonotoneMap(ext_s, ext_t, table))


def delta_extension(
    f: MonotoneMap, ce_s: CanonicalExtension, ce_t: CanonicalExtension
) -> ExtendedMap:
    """The common value of sigma and pi for maps preserving finite joins or
    finite meets."""
    if not (f.preserves_finite_joins() or f.preserves_finite_meets()):
        raise PreservationError(
            "map preserves neither finite joins nor finite meets"
        )
    sig = sigma_extension(f, ce_s, ce_t)
    pi = pi_extension(f, ce_s, ce_t)
    if sig.map.mapping != pi.map.mapping:
        raise LatticeError("sigma and pi extensions disagree on a preserving map")
    return ExtendedMap("delta", f, ce_s, ce_t, sig.map)


def _check_lift_typing(f, ce_s, ce_t):
    if f.source != ce_s.base or f.target != ce_t.base:
        raise LatticeError("map endpoints do not match the given extensions")


def extend_hom(h: LatticeHom, ce_s: CanonicalExtension) -> LatticeHom:
    """The unique complete homomorphism ext -> K agreeing with h on the
    embedded base.  K is the codomain of h itself, not its extension."""
    K = h.target
    on_filt = {
        x: K.meet_all(h(a) for a in ce_s.filter_of(x)) for x in ce_s.filt_elements
    }
    table = {
        u: K.join_all(on_filt[x] for x in ce_s.filt_elements if ce_s.ext.leq(x, u))
        for u in ce_s.ext.elements
    }
    return LatticeHom(ce_s.ext, K, table)


def count_complete_extensions(h: LatticeHom, ce_s: CanonicalExtension) -> int:
    """How many complete homs ext -> target restrict to h along the
    embedding.  For finite lattices complete homs are exactly the bounded
    lattice homs, so plain hom enumeration is an honest count."""
    return sum(
        1
        for g in lattice_homs(ce_s.ext, h.target)
        if all(g(ce_s.e(a)) == h(a) for a in h.source.elements)
    )


# -- composition, Esakia, square transfer -------------------------------------


@dataclass(frozen=True)
class CompositionReport:
    holds: bool
    witness: str | None  # element of the source extension where they differ


def check_composition(
    g: MonotoneMap,
    f: MonotoneMap,
    mode: str,
    ce_m: CanonicalExtension,
    ce_l: CanonicalExtension,
    ce_k: CanonicalExtension,
) -> CompositionReport:
    """Does the lifting of f o g equal the composite of the liftings?

    g : M -> L and f : L -> K; the relevant hypothesis (f finite-join
    preserving for sigma, finite-meet for pi) is the caller's concern: the
    comparison itself is unconditional and reports a pointwise witness.
    """
    lift = sigma_extension if mode == "sigma" else pi_extension
    comp = lift(g.then(f), ce_m, ce_k)
    parts = lift(g, ce_m, ce_l).map.then(lift(f, ce_l, ce_k).map)
    for u in ce_m.ext.elements:
        if comp.map(u) != parts(u):
            return CompositionReport(False, u)
    return CompositionReport(True, None)


def is_filtered(ce: CanonicalExtension, F) -> bool:
    """Nonempty, down-directed, and inside the filter elements."""
    F = list(F)
    if not F or any(x not in ce.filt_elements for x in F):
        return False
    return all(
        any(ce.ext.leq(z, ce.ext.meet(x, y)) for z in F) for x in F for y in F
    )


def esakia_check(
    f: MonotoneMap, F, ce_s: CanonicalExtension, ce_t: CanonicalExtension
) -> bool:
    """For join-preserving f and filtered F inside the filter elements:
    the delta lifting takes the meet of F to the meet of the image."""
    if not f.preserves_finite_joins():
        raise PreservationError("Esakia check needs a join-preserving map")
    if not is_filtered(ce_s, F):
        raise FilteredError("subset is not a filtered set of filter elements")
    d = delta_extension(f, ce_s, ce_t)
    lhs = d(ce_s.ext.meet_all(F))
    rhs = ce_t.ext.meet_all(d(x) for x in F)
    return lhs == rhs


def comjpm_decide(
    h1: LatticeHom,
    h2: LatticeHom,
    f: MonotoneMap,
    g: MonotoneMap,
) -> tuple[bool, bool]:
    """Square transfer for join-preserving maps.

    h1 : L1 -> K1 and h2 : L2 -> K2 are homs into (finite, hence complete)
    lattices, f : L1 -> L2 preserves finite joins, g : K1 -> K2 all joins.
    Requires the base square g o h1 = h2 o f to commute.  Returns

      (1) the prime-filter meet-exchange condition for g over h1,
      (2) g o ext(h1) = ext(h2) o delta(f) on the extension of L1,

    which are equivalent; both booleans are computed independently and the
    equality is asserted.
    """
    if not f.preserves_finite_joins():
        raise PreservationError("f must preserve finite joins")
    if not g.preserves_finite_joins():
        raise PreservationError("g must preserve all joins")
    for a in h1.source.elements:
        if g(h1(a)) != h2(f(a)):
            raise LatticeError(f"base square does not commute at {a}")
    L1, K1, K2 = h1.source, h1.target, h2.target
    cond1 = True
    for rho in prime_filters(L1):
        lhs = g(K1.meet_all(h1(a) for a in rho))
        rhs = K2.meet_all(g(h1(a)) for a in rho)
        if lhs != rhs:
            cond1 = False
            break
    ce1 = canonical_extension(L1)
    ce2 = canonical_extension(f.target)
    h1bar = extend_hom(h1, ce1)
    h2bar = extend_hom(h2, ce2)
    fdelta = delta_extension(f, ce1, ce2)
    cond2 = all(
        g(h1bar(u)) == h2bar(fdelta(u)) for u in ce1.ext.elements
    )
    assert cond1 == cond2, "square-transfer conditions disagree"
    return cond1, cond2


def restrict_extension(L: FinLattice, a: str) -> CanonicalExtension:
    """The canonical extension of the downset of a, realized inside the
    extension of L as the interval below the image of a."""
    require_distributive(L)
    ce = canonical_extension(L)
    base = L.down_lattice(a)
    ext = ce.ext.down_lattice(ce.e(a))
    restricted = CanonicalExtension(
        base, ext, {x: ce.e(x) for x in base.elements}
    )
    if not (check_dense(restricted) and check_compact(restricted)):
        raise LatticeError("restricted embedding is not dense and compact")
    return restricted
