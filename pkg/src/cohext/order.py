"""Finite posets with explicit order relations.

Elements are opaque strings; the order is an explicit set of pairs.  All
structure downstream (lattices, categories, sites) is built on these.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations


class OrderError(ValueError):
    """Relation data violates the poset axioms."""


def set_name(s) -> str:
    """Canonical printable name for a finite set of strings."""
    return "{" + ",".join(sorted(s)) + "}"


@dataclass(frozen=True, eq=False)
class FinPoset:
    """A finite poset: elements plus the full <= relation as pairs (a, b)."""

    elements: tuple[str, ...]
    pairs: frozenset[tuple[str, str]]

    def __post_init__(self):
        elems = set(self.elements)
        if len(self.elements) != len(elems):
            raise OrderError("duplicate elements")
        for a, b in self.pairs:
            if a not in elems or b not in elems:
                raise OrderError(f"relation pair ({a},{b}) uses unknown element")
        for a in elems:
            if (a, a) not in self.pairs:
                raise OrderError(f"not reflexive at {a}")
        for a, b in self.pairs:
            if a != b and (b, a) in self.pairs:
                raise OrderError(f"not antisymmetric on ({a},{b})")
        for a, b in self.pairs:
            for c in elems:
                if (b, c) in self.pairs and (a, c) not in self.pairs:
                    raise OrderError(f"not transitive on ({a},{b},{c})")

    @classmethod
    def trusted(cls, elements, pairs) -> FinPoset:
        """Skip axiom validation; for relations that are reflexive,
        antisymmetric, and transitive by construction."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "elements", tuple(elements))
        object.__setattr__(obj, "pairs", frozenset(pairs))
        return obj

    @classmethod
    def from_pairs(cls, elements, pairs) -> FinPoset:
        """Build from a relation given as covering or partial pairs.

        Reflexive-transitive closure is taken; antisymmetry must hold.
        """
        elems = tuple(elements)
        rel = {(a, a) for a in elems}
        rel.update((a, b) for a, b in pairs)
        changed = True
        while changed:
            changed = False
            for a, b in list(rel):
                for b2, c in list(rel):
                    if b == b2 and (a, c) not in rel:
                        rel.add((a, c))
                        changed = True
        return cls(elems, frozenset(rel))

    def leq(self, a: str, b: str) -> bool:
        return (a, b) in self.pairs

    def lt(self, a: str, b: str) -> bool:
        return a != b and (a, b) in self.pairs

    def down_set(self, a: str) -> frozenset[str]:
        return frozenset(x for x in self.elements if self.leq(x, a))

    def up_set(self, a: str) -> frozenset[str]:
        return frozenset(x for x in self.elements if self.leq(a, x))

    def is_down_closed(self, s) -> bool:
        s = set(s)
        return all(x in s for a in s for x in self.elements if self.leq(x, a))

    def downsets(self) -> list[frozenset[str]]:
        """All down-closed subsets, ordered deterministically."""
        if len(self.elements) > 16:
            raise OrderError("downset enumeration capped at 16 elements")
        out = []
        n = len(self.elements)
        for mask in range(1 << n):
            s = frozenset(e for i, e in enumerate(self.elements) if mask >> i & 1)
            if self.is_down_closed(s):
                out.append(s)
        out.sort(key=lambda s: (len(s), sorted(s)))
        return out

    def minimal_elements(self) -> frozenset[str]:
        return frozenset(
            a for a in self.elements if not any(self.lt(x, a) for x in self.elements)
        )

    def maximal_elements(self) -> frozenset[str]:
        return frozenset(
            a for a in self.elements if not any(self.lt(a, x) for x in self.elements)
        )

    def lower_covers(self, a: str) -> list[str]:
        below = [x for x in self.elements if self.lt(x, a)]
        return [x for x in below if not any(self.lt(x, y) for y in below)]

    def restricted(self, subset) -> FinPoset:
        keep = set(subset)
        return FinPoset(
            tuple(e for e in self.elements if e in keep),
            frozenset(p for p in self.pairs if p[0] in keep and p[1] in keep),
        )

    def linear_extension(self) -> list[str]:
        rest = list(self.elements)
        out = []
        while rest:
            for a in rest:
                if all(not self.lt(x, a) for x in rest):
                    out.append(a)
                    rest.remove(a)
                    break
        return out

    def dual(self) -> FinPoset:
        return FinPoset(self.elements, frozenset((b, a) for a, b in self.pairs))

    def _signature(self, a: str) -> tuple[int, int]:
        return (len(self.down_set(a)), len(self.up_set(a)))

    def iso_to(self, other: FinPoset) -> dict[str, str] | None:
        """An order isomorphism onto `other`, or None.  Brute force."""
        if len(self.elements) != len(other.elements):
            return None
        if sorted(self._signature(a) for a in self.elements) != sorted(
            other._signature(b) for b in other.elements
        ):
            return None
        src = sorted(self.elements)
        for perm in permutations(sorted(other.elements)):
            m = dict(zip(src, perm))
            if all(
                self.leq(a, b) == other.leq(m[a], m[b])
                for a, b in combinations(src, 2)
            ) and all(self._signature(a) == other._signature(m[a]) for a in src):
                return m
        return None

    def __eq__(self, other):
        return (
            isinstance(other, FinPoset)
            and set(self.elements) == set(other.elements)
            and self.pairs == other.pairs
        )

    def __hash__(self):
        return hash((frozenset(self.elements), self.pairs))

    def __repr__(self):
        return f"FinPoset({len(self.elements)} elements)"


def antichain(names) -> FinPoset:
    names = tuple(names)
    return FinPoset(names, frozenset((a, a) for a in names))


def chain(names) -> FinPoset:
    names = tuple(names)
    pairs = {
        (names[i], names[j]) for i in range(len(names)) for j in range(i, len(names))
    }
    return FinPoset(names, frozenset(pairs))


def check_adjoint_pair(
    lower: FinPoset, upper: FinPoset, left: dict, right: dict
) -> bool:
    """left : lower -> upper is left adjoint to right : upper -> lower,
    i.e. left(a) <= b iff a <= right(b) for all a, b."""
    return all(
        upper.leq(left[a], b) == lower.leq(a, right[b])
        for a in lower.elements
        for b in upper.elements
    )
