"""JSON formats for lattices, categories, hyperdoctrines, and models, plus
DOT export.  Validation is strict: malformed structure raises with the
offending key."""

from __future__ import annotations

import json
from pathlib import Path

from .cohcat import CohCategory, ConcreteCohCategory, LatticeCategory
from .fincat import FinCategory
from .hyperdoctrine import BaseLimits, CoherentHyperdoctrine
from .lattice import FinLattice, LatticeHom, MonotoneMap
from .order import FinPoset


class FormatError(ValueError):
    pass


# -- lattices -------------------------------------------------------------------


def lattice_to_json(L: FinLattice) -> dict:
    return {
        "elements": list(L.elements),
        "leq": sorted([a, b] for a, b in L.poset.pairs),
    }


def lattice_from_json(data: dict) -> FinLattice:
    if not isinstance(data, dict) or "elements" not in data or "leq" not in data:
        raise FormatError("lattice JSON needs 'elements' and 'leq'")
    elements = data["elements"]
    if not all(isinstance(e, str) for e in elements):
        raise FormatError("lattice elements must be strings")
    pairs = set()
    for p in data["leq"]:
        if not (isinstance(p, list) and len(p) == 2):
            raise FormatError(f"bad leq pair {p!r}")
        pairs.add((p[0], p[1]))
    poset = FinPoset.from_pairs(elements, pairs)
    L = FinLattice.from_poset(poset)
    if "meet" in data or "join" in data:
        meet = {(a, b): c for a, b, c in data.get("meet", [])}
        join = {(a, b): c for a, b, c in data.get("join", [])}
        for (a, b), c in meet.items():
            if L.meet(a, b) != c:
                raise FormatError(f"declared meet({a},{b})={c} is not the glb")
        for (a, b), c in join.items():
            if L.join(a, b) != c:
                raise FormatError(f"declared join({a},{b})={c} is not the lub")
    return L


def load_lattice(path) -> FinLattice:
    return lattice_from_json(json.loads(Path(path).read_text()))


# -- categories -----------------------------------------------------------------


def category_from_json(data: dict) -> CohCategory:
    kind = data.get("kind")
    if kind == "lattice":
        return LatticeCategory(lattice_from_json(data["lattice"]))
    if kind == "concrete":
        objects = data.get("objects")
        if not isinstance(objects, dict):
            raise FormatError("concrete category needs an 'objects' mapping")
        seeds = []
        for name, elems in objects.items():
            if not all(isinstance(e, str) for e in elems):
                raise FormatError(f"object {name} has non-string elements")
            seeds.append(frozenset(elems))
        return ConcreteCohCategory(seeds)
    raise FormatError("category 'kind' must be 'lattice' or 'concrete'")


def load_category(path) -> CohCategory:
    return category_from_json(json.loads(Path(path).read_text()))


def category_to_json(C: CohCategory) -> dict:
    if isinstance(C, LatticeCategory):
        return {"kind": "lattice", "lattice": lattice_to_json(C.lattice)}
    if isinstance(C, ConcreteCohCategory):
        return {
            "kind": "concrete",
            "objects": {name: sorted(s) for name, s in C.of_name.items()},
        }
    raise FormatError(f"cannot serialize {type(C).__name__}")


# -- hyperdoctrines ----------------------------------------------------------------
#
# Either derived ("subobjects" of a category file) or explicit tables over
# an inline base; explicit tables exist so that deliberately broken inputs
# reach the validator.


def hyperdoctrine_from_json(data: dict, base_dir: Path | None = None) -> CoherentHyperdoctrine:
    from .hyperdoctrine import sub_hyperdoctrine

    if "subobjects_of" in data:
        ref = data["subobjects_of"]
        if isinstance(ref, str):
            path = (base_dir or Path(".")) / ref
            C = load_category(path)
        else:
            C = category_from_json(ref)
        return sub_hyperdoctrine(C)
    if "base" not in data or "fibers" not in data:
        raise FormatError("hyperdoctrine JSON needs 'subobjects_of' or explicit tables")
    C = (
        load_category((base_dir or Path(".")) / data["base"])
        if isinstance(data["base"], str)
        else category_from_json(data["base"])
    )
    P = sub_hyperdoctrine(C)
    fibers = {}
    for A, ref in data["fibers"].items():
        fibers[A] = (
            load_lattice((base_dir or Path(".")) / ref)
            if isinstance(ref, str)
            else lattice_from_json(ref)
        )
    subst = {
        f: LatticeHom(fibers[C.cat.tgt(f)], fibers[C.cat.src(f)], table)
        for f, table in data["subst"].items()
    }
    exists = {
        f: MonotoneMap(fibers[C.cat.src(f)], fibers[C.cat.tgt(f)], table)
        for f, table in data["exists"].items()
    }
    return CoherentHyperdoctrine(
        C.cat, fibers, subst, exists, BaseLimits.from_cohcat(C)
    )


def load_hyperdoctrine(path) -> CoherentHyperdoctrine:
    p = Path(path)
    return hyperdoctrine_from_json(json.loads(p.read_text()), p.parent)


# -- models ------------------------------------------------------------------------


def model_to_json(M) -> dict:
    return {
        "sorts": {s: list(xs) for s, xs in M.sorts.items()},
        "functions": {
            f: [[list(k), v] for k, v in sorted(t.items())]
            for f, t in M.funcs.items()
        },
        "relations": {r: sorted(map(list, rows)) for r, rows in M.rels.items()},
    }


def model_from_json(T, data: dict):
    from .logic.chase import FinModel

    return FinModel(
        T,
        {s: tuple(xs) for s, xs in data["sorts"].items()},
        {
            f: {tuple(k): v for k, v in entries}
            for f, entries in data.get("functions", {}).items()
        },
        {
            r: frozenset(map(tuple, rows))
            for r, rows in data.get("relations", {}).items()
        },
    )


# -- DOT export ---------------------------------------------------------------------


def category_to_dot(cat: FinCategory, name: str = "C") -> str:
    lines = [f"digraph {json.dumps(name)} {{"]
    for A in cat.objects:
        lines.append(f"  {json.dumps(A)};")
    for m in sorted(cat.morphisms.values(), key=lambda m: m.name):
        if m.name == cat.identities.get(m.src):
            continue
        lines.append(
            f"  {json.dumps(m.src)} -> {json.dumps(m.tgt)} "
            f"[label={json.dumps(m.name)}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def poset_to_dot(p: FinPoset, name: str = "P") -> str:
    lines = [f"digraph {json.dumps(name)} {{"]
    for a in p.elements:
        lines.append(f"  {json.dumps(a)};")
    for a in p.elements:
        for b in p.lower_covers(a):
            lines.append(f"  {json.dumps(b)} -> {json.dumps(a)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
