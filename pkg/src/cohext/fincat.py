"""Finite categories, functors, and equivalence checking.

Categories are explicit tables: objects, morphisms with source/target, a
composition table, and identities.  Everything is validated at
construction.  compose(g, f) means g after f.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product


class CategoryError(ValueError):
    """Category data violates the category laws."""


@dataclass(frozen=True)
class Morphism:
    name: str
    src: str
    tgt: str


@dataclass(frozen=True, eq=False)
class FinCategory:
    objects: tuple[str, ...]
    morphisms: dict[str, Morphism]
    comp: dict[tuple[str, str], str]  # comp[(g, f)] = g o f
    identities: dict[str, str]

    def __post_init__(self):
        objs = set(self.objects)
        for m in self.morphisms.values():
            if m.src not in objs or m.tgt not in objs:
                raise CategoryError(f"morphism {m.name} has unknown endpoints")
        for A in self.objects:
            i = self.identities.get(A)
            if i is None or i not in self.morphisms:
                raise CategoryError(f"missing identity for {A}")
            im = self.morphisms[i]
            if im.src != A or im.tgt != A:
                raise CategoryError(f"identity of {A} not an endomorphism")
        for f in self.morphisms.values():
            for g in self.morphisms.values():
                if f.tgt == g.src:
                    h = self.comp.get((g.name, f.name))
                    if h is None:
                        raise CategoryError(
                            f"missing composite {g.name} o {f.name}"
                        )
                    hm = self.morphisms[h]
                    if hm.src != f.src or hm.tgt != g.tgt:
                        raise CategoryError(
                            f"composite {g.name} o {f.name} mistyped"
                        )
        for f in self.morphisms.values():
            if self.comp[(f.name, self.identities[f.src])] != f.name:
                raise CategoryError(f"right identity fails for {f.name}")
            if self.comp[(self.identities[f.tgt], f.name)] != f.name:
                raise CategoryError(f"left identity fails for {f.name}")
        for f in self.morphisms.values():
            for g in self.morphisms.values():
                if f.tgt != g.src:
                    continue
                for h in self.morphisms.values():
                    if g.tgt != h.src:
                        continue
                    left = self.comp[(h.name, self.comp[(g.name, f.name)])]
                    right = self.comp[(self.comp[(h.name, g.name)], f.name)]
                    if left != right:
                        raise CategoryError(
                            f"associativity fails on ({h.name},{g.name},{f.name})"
                        )

    def src(self, f: str) -> str:
        return self.morphisms[f].src

    def tgt(self, f: str) -> str:
        return self.morphisms[f].tgt

    def compose(self, g: str, f: str) -> str:
        return self.comp[(g, f)]

    def identity(self, A: str) -> str:
        return self.identities[A]

    def hom(self, A: str, B: str) -> list[str]:
        return sorted(
            m.name for m in self.morphisms.values() if m.src == A and m.tgt == B
        )

    def morphisms_into(self, A: str) -> list[str]:
        return sorted(m.name for m in self.morphisms.values() if m.tgt == A)

    def is_iso(self, f: str) -> str | None:
        """The name of an inverse of f, if one exists."""
        m = self.morphisms[f]
        for g in self.hom(m.tgt, m.src):
            if (
                self.compose(g, f) == self.identity(m.src)
                and self.compose(f, g) == self.identity(m.tgt)
            ):
                return g
        return None

    def iso_objects(self, A: str, B: str) -> tuple[str, str] | None:
        for f in self.hom(A, B):
            g = self.is_iso(f)
            if g is not None:
                return f, g
        return None

    def __eq__(self, other):
        return (
            isinstance(other, FinCategory)
            and set(self.objects) == set(other.objects)
            and self.morphisms == other.morphisms
            and self.comp == other.comp
        )

    def __hash__(self):
        return hash((frozenset(self.objects), frozenset(self.morphisms)))

    def __repr__(self):
        return f"FinCategory({len(self.objects)} objects, {len(self.morphisms)} morphisms)"


@dataclass(frozen=True, eq=False)
class FinFunctor:
    source: FinCategory
    target: FinCategory
    obj_map: dict[str, str]
    mor_map: dict[str, str]

    def __post_init__(self):
        for A in self.source.objects:
            if self.obj_map.get(A) not in self.target.objects:
                raise CategoryError(f"functor undefined or mistyped on object {A}")
        for f, m in self.source.morphisms.items():
            g = self.mor_map.get(f)
            if g is None or g not in self.target.morphisms:
                raise CategoryError(f"functor undefined on morphism {f}")
            gm = self.target.morphisms[g]
            if gm.src != self.obj_map[m.src] or gm.tgt != self.obj_map[m.tgt]:
                raise CategoryError(f"functor mistyped on morphism {f}")
        for A in self.source.objects:
            if self.mor_map[self.source.identity(A)] != self.target.identity(
                self.obj_map[A]
            ):
                raise CategoryError(f"functor breaks identity of {A}")
        for f in self.source.morphisms:
            for g in self.source.morphisms:
                if self.source.tgt(f) != self.source.src(g):
                    continue
                if self.mor_map[self.source.compose(g, f)] != self.target.compose(
                    self.mor_map[g], self.mor_map[f]
                ):
                    raise CategoryError(f"functor breaks composition ({g},{f})")

    def on_obj(self, A: str) -> str:
        return self.obj_map[A]

    def on_mor(self, f: str) -> str:
        return self.mor_map[f]

    def then(self, other: FinFunctor) -> FinFunctor:
        return FinFunctor(
            self.source,
            other.target,
            {A: other.on_obj(self.on_obj(A)) for A in self.source.objects},
            {f: other.on_mor(self.on_mor(f)) for f in self.source.morphisms},
        )

    @classmethod
    def identity(cls, C: FinCategory) -> FinFunctor:
        return cls(
            C, C, {A: A for A in C.objects}, {f: f for f in C.morphisms}
        )


@dataclass(frozen=True)
class EquivalenceReport:
    full: bool
    faithful: bool
    essentially_surjective: bool
    witness: str | None = None
    # essential-surjectivity witnesses: target object -> (source object, iso)
    object_witnesses: dict = field(default_factory=dict)

    @property
    def is_equivalence(self) -> bool:
        return self.full and self.faithful and self.essentially_surjective


def check_equivalence(F: FinFunctor) -> EquivalenceReport:
    """Full, faithful, essentially surjective, with witnesses."""
    C, D = F.source, F.target
    full, faithful, witness = True, True, None
    for A, B in product(C.objects, repeat=2):
        imgs = {}
        for f in C.hom(A, B):
            g = F.on_mor(f)
            if g in imgs:
                faithful = False
                witness = witness or f"morphisms {imgs[g]} and {f} collapse to {g}"
            imgs[g] = f
        for g in D.hom(F.on_obj(A), F.on_obj(B)):
            if g not in imgs:
                full = False
                witness = witness or f"{g} not in the image of Hom({A},{B})"
    ess, obj_wit = True, {}
    for X in D.objects:
        found = None
        for A in C.objects:
            pair = D.iso_objects(F.on_obj(A), X)
            if pair is not None:
                found = (A, pair[0])
                break
        if found is None:
            ess = False
            witness = witness or f"object {X} not reached up to iso"
        else:
            obj_wit[X] = found
    return EquivalenceReport(full, faithful, ess, witness, obj_wit)


@dataclass(frozen=True)
class NaturalTransformation:
    source: FinFunctor
    target: FinFunctor
    components: dict[str, str]  # object of the common source -> target morphism

    def check(self) -> bool:
        F, G = self.source, self.target
        D = F.target
        for A in F.source.objects:
            c = self.components.get(A)
            if c is None:
                return False
            m = D.morphisms[c]
            if m.src != F.on_obj(A) or m.tgt != G.on_obj(A):
                return False
        for f, m in F.source.morphisms.items():
            lhs = D.compose(self.components[m.tgt], F.on_mor(f))
            rhs = D.compose(G.on_mor(f), self.components[m.src])
            if lhs != rhs:
                return False
        return True

    def is_iso(self) -> bool:
        return self.check() and all(
            self.source.target.is_iso(c) is not None
            for c in self.components.values()
        )


def natural_iso(F: FinFunctor, G: FinFunctor) -> NaturalTransformation | None:
    """Search for a natural isomorphism F => G; explicit component table."""
    C, D = F.source, F.target
    objs = list(C.objects)

    def extend(i, acc):
        if i == len(objs):
            return dict(acc)
        A = objs[i]
        for c in D.hom(F.on_obj(A), G.on_obj(A)):
            if D.is_iso(c) is None:
                continue
            acc[A] = c
            ok = True
            for f, m in C.morphisms.items():
                if m.src in acc and m.tgt in acc:
                    if D.compose(acc[m.tgt], F.on_mor(f)) != D.compose(
                        G.on_mor(f), acc[m.src]
                    ):
                        ok = False
                        break
            if ok:
                res = extend(i + 1, acc)
                if res is not None:
                    return res
            del acc[A]
        return None

    table = extend(0, {})
    if table is None:
        return None
    return NaturalTransformation(F, G, table)
