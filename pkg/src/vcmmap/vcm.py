"""The VCM icon language: graphical primitives, medical concepts and icons.

The ontology file is line based and tab separated::

    primitive  <kind>  <code>
    concept    <id>  <category>  parents=<p1,p2|->  prims=<kind:code,...|->
    forbid     <kind:code>  <kind:code>
    spec       <kind:specific_code>  <kind:general_code>

``central_pictogram:_`` stands for "no pictogram" and is only valid in
``forbid`` lines.
"""

from __future__ import annotations

import graphlib
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from vcmmap.errors import (
    CycleError,
    IconCodeError,
    NotFoundError,
    OntologyError,
    ParseError,
    ReferentialIntegrityError,
    UnknownPrimitiveError,
)

COLOR = "color"
BASE_SHAPE = "base_shape"
PICTOGRAM = "central_pictogram"
MODIFIER = "shape_modifier"
KINDS = (COLOR, BASE_SHAPE, PICTOGRAM, MODIFIER)
KIND_ORDER = {k: i for i, k in enumerate(KINDS)}

# red / orange / brown
COLORS = frozenset({"current", "risk", "past"})
# circle / square
SHAPES = frozenset({"physio", "patho"})

CATEGORIES = frozenset(
    {
        "anatomical_structure",
        "biological_function",
        "pathological_process",
        "patient_characteristic",
        "temporal_aspect",
    }
)

NONE = "_"
_CODE_RE = re.compile(r"^[a-z0-9][a-z0-9_]*$")

Primitive = tuple[str, str]

_NO_PICTOGRAM: frozenset = frozenset([None])


@dataclass(frozen=True, slots=True)
class VcmMedicalConcept:
    id: str
    category: str
    parents: tuple[str, ...] = ()
    linked_primitives: tuple[Primitive, ...] = ()


@dataclass(frozen=True, slots=True)
class Icon:
    color: str = "current"
    shape: str = "patho"
    pictogram: Optional[str] = None
    modifiers: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not isinstance(self.modifiers, frozenset):
            object.__setattr__(self, "modifiers", frozenset(self.modifiers))

    @property
    def code(self) -> str:
        return icon_code(self)

    def __str__(self) -> str:
        return icon_code(self)


@dataclass(frozen=True)
class VcmOntology:
    primitives: frozenset[Primitive]
    concepts: dict[str, VcmMedicalConcept]
    forbidden: frozenset[frozenset[Primitive]]
    pictogram_general: dict[str, tuple[str, ...]]
    modifier_general: dict[str, tuple[str, ...]]
    _ancestors: dict[str, frozenset[str]] = field(repr=False, default_factory=dict)
    _pictogram_up: dict[str, frozenset[str]] = field(repr=False, default_factory=dict)
    _modifier_up: dict[str, frozenset[str]] = field(repr=False, default_factory=dict)
    _rule_partners: dict[Primitive, frozenset[Primitive]] = field(repr=False, default_factory=dict)

    @classmethod
    def build(
        cls,
        primitives: Iterable[Primitive],
        concepts: Iterable[VcmMedicalConcept],
        forbidden: Iterable[tuple[Primitive, Primitive]] = (),
        specificity: Iterable[tuple[Primitive, Primitive]] = (),
    ) -> "VcmOntology":
        prims = frozenset(primitives)
        by_id: dict[str, VcmMedicalConcept] = {}
        for c in concepts:
            if c.id in by_id:
                raise OntologyError(f"duplicate concept {c.id}")
            by_id[c.id] = c
        if not prims and not by_id:
            raise OntologyError("empty ontology")

        for kind, code in prims:
            if kind not in KIND_ORDER:
                raise OntologyError(f"unknown primitive kind {kind!r}")
            if kind == COLOR and code not in COLORS:
                raise OntologyError(f"color must be one of {sorted(COLORS)}, got {code!r}")
            if kind == BASE_SHAPE and code not in SHAPES:
                raise OntologyError(f"base shape must be one of {sorted(SHAPES)}, got {code!r}")

        missing = []
        for c in by_id.values():
            if c.category not in CATEGORIES:
                raise OntologyError(f"unknown category {c.category!r} for {c.id}")
            missing += [p for p in c.parents if p not in by_id]
            missing += [f"{k}:{v}" for k, v in c.linked_primitives if (k, v) not in prims]
            if c.category == "anatomical_structure":
                pictos = [v for k, v in c.linked_primitives if k == PICTOGRAM]
                if len(pictos) > 1:
                    raise OntologyError(
                        f"anatomical structure {c.id} links {len(pictos)} pictograms: {', '.join(pictos)}"
                    )
        if missing:
            raise ReferentialIntegrityError("unresolved reference", missing)

        rules = set()
        for a, b in forbidden:
            for kind, code in (a, b):
                if kind not in (PICTOGRAM, MODIFIER):
                    raise OntologyError(f"forbid rules take pictograms or modifiers, got {kind}")
                if (kind, code) not in prims and not (kind == PICTOGRAM and code == NONE):
                    missing.append(f"{kind}:{code}")
            if a[0] == PICTOGRAM and b[0] == PICTOGRAM:
                raise OntologyError("forbid rule between two pictograms is meaningless")
            rules.add(frozenset((a, b)))

        pict_general: dict[str, list[str]] = defaultdict(list)
        mod_general: dict[str, list[str]] = defaultdict(list)
        for specific, general in specificity:
            if specific[0] != general[0] or specific[0] not in (PICTOGRAM, MODIFIER):
                raise OntologyError(f"specificity link {specific} -> {general} must stay within pictograms or modifiers")
            for p in (specific, general):
                if p not in prims:
                    missing.append(f"{p[0]}:{p[1]}")
            target = pict_general if specific[0] == PICTOGRAM else mod_general
            target[specific[1]].append(general[1])
        if missing:
            raise ReferentialIntegrityError("unresolved reference", missing)

        ancestors = _closure("concept parents", {c.id: c.parents for c in by_id.values()})
        # stored reflexively, and with None (no pictogram) above every pictogram
        pict_up = _closure("pictogram specificity", pict_general)
        pict_up = {c: pict_up.get(c, frozenset()) | {None, c} for k, c in prims if k == PICTOGRAM}
        mod_up = _closure("modifier specificity", mod_general)
        mod_up = {c: mod_up.get(c, frozenset()) | {c} for k, c in prims if k == MODIFIER}
        return cls(
            primitives=prims,
            concepts=by_id,
            forbidden=frozenset(rules),
            pictogram_general={k: tuple(sorted(v)) for k, v in pict_general.items()},
            modifier_general={k: tuple(sorted(v)) for k, v in mod_general.items()},
            _ancestors=ancestors,
            _pictogram_up=pict_up,
            _modifier_up=mod_up,
            _rule_partners={
                p: frozenset(q for rule in rules if p in rule for q in rule if q != p) for rule in rules for p in rule
            },
        )

    def concept(self, concept_id: str) -> VcmMedicalConcept:
        try:
            return self.concepts[concept_id]
        except KeyError:
            raise NotFoundError(f"unknown VCM concept {concept_id}") from None

    def codes(self, kind: str) -> list[str]:
        return sorted(code for k, code in self.primitives if k == kind)

    def ancestors(self, concept_id: str) -> frozenset[str]:
        """Strict ancestors of a medical concept through its parents."""
        self.concept(concept_id)
        return self._ancestors.get(concept_id, frozenset())

    def pictogram_generalizes(self, general: Optional[str], specific: Optional[str]) -> bool:
        """Reflexive: is *general* the same pictogram as *specific* or more general?"""
        if general is None:
            return True
        if specific is None:
            return False
        return general == specific or general in self._pictogram_up.get(specific, ())

    def modifier_generalizes(self, general: str, specific: str) -> bool:
        return general == specific or general in self._modifier_up.get(specific, ())

    def pictogram_closure(self, pictogram: Optional[str]) -> frozenset[Optional[str]]:
        """Every pictogram slot value that *pictogram* specializes, itself and None included."""
        if pictogram is None:
            return _NO_PICTOGRAM
        return self._pictogram_up.get(pictogram) or frozenset([None, pictogram])

    def modifier_closure(self, modifier: str) -> frozenset[str]:
        return self._modifier_up.get(modifier) or frozenset([modifier])

    def check_icon(self, icon: Icon) -> None:
        unknown = []
        if (COLOR, icon.color) not in self.primitives:
            unknown.append(f"{COLOR}:{icon.color}")
        if (BASE_SHAPE, icon.shape) not in self.primitives:
            unknown.append(f"{BASE_SHAPE}:{icon.shape}")
        if icon.pictogram is not None and (PICTOGRAM, icon.pictogram) not in self.primitives:
            unknown.append(f"{PICTOGRAM}:{icon.pictogram}")
        unknown += [f"{MODIFIER}:{m}" for m in sorted(icon.modifiers) if (MODIFIER, m) not in self.primitives]
        if unknown:
            raise UnknownPrimitiveError(f"unknown primitive(s): {', '.join(unknown)}")


def _closure(axis: str, edges: dict[str, Iterable[str]]) -> dict[str, frozenset[str]]:
    """Strict transitive closure of an acyclic edge map, raising CycleError otherwise."""
    graph = {k: tuple(v) for k, v in edges.items()}
    try:
        order = list(graphlib.TopologicalSorter(graph).static_order())
    except graphlib.CycleError as exc:
        raise CycleError(axis, exc.args[1]) from None
    up: dict[str, frozenset[str]] = {}
    for node in order:
        acc = set()
        for p in graph.get(node, ()):
            acc.add(p)
            acc |= up.get(p, frozenset())
        up[node] = frozenset(acc)
    return up


# -- file format -----------------------------------------------------------


def _parse_prim(path: Path, line_no: int, token: str, *, allow_none: bool = False) -> Primitive:
    kind, sep, code = token.partition(":")
    if not sep or kind not in KIND_ORDER:
        raise ParseError(path, line_no, f"bad primitive reference {token!r}")
    if code == NONE and allow_none and kind == PICTOGRAM:
        return kind, code
    if not _CODE_RE.match(code):
        raise ParseError(path, line_no, f"bad primitive code {code!r}")
    return kind, code


def _parse_list(path: Path, line_no: int, field_text: str, key: str) -> list[str]:
    name, sep, value = field_text.partition("=")
    if name != key or not sep:
        raise ParseError(path, line_no, f"expected {key}=...")
    if value in ("-", ""):
        return []
    return [v.strip() for v in value.split(",") if v.strip()]


def load_vcm_ontology(path) -> VcmOntology:
    """Parse and validate a VCM ontology file."""
    path = Path(path)
    primitives: list[Primitive] = []
    concepts: list[VcmMedicalConcept] = []
    forbidden = []
    spec = []
    seen_prims: set[Primitive] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cols = [c.strip() for c in line.split("\t")]
            tag = cols[0]
            if tag == "primitive":
                if len(cols) != 3:
                    raise ParseError(path, line_no, "primitive takes <kind> <code>")
                prim = _parse_prim(path, line_no, f"{cols[1]}:{cols[2]}")
                if prim in seen_prims:
                    raise ParseError(path, line_no, f"duplicate primitive {cols[1]}:{cols[2]}")
                seen_prims.add(prim)
                primitives.append(prim)
            elif tag == "concept":
                if len(cols) != 5:
                    raise ParseError(path, line_no, "concept takes <id> <category> parents=... prims=...")
                cid, category = cols[1], cols[2]
                if not _CODE_RE.match(cid):
                    raise ParseError(path, line_no, f"bad concept id {cid!r}")
                if category not in CATEGORIES:
                    raise ParseError(path, line_no, f"unknown category {category!r}")
                parents = _parse_list(path, line_no, cols[3], "parents")
                links = [_parse_prim(path, line_no, t) for t in _parse_list(path, line_no, cols[4], "prims")]
                concepts.append(
                    VcmMedicalConcept(cid, category, tuple(parents), tuple(sorted(set(links), key=primitive_sort_key)))
                )
            elif tag in ("forbid", "spec"):
                if len(cols) != 3:
                    raise ParseError(path, line_no, f"{tag} takes two primitive references")
                a = _parse_prim(path, line_no, cols[1], allow_none=tag == "forbid")
                b = _parse_prim(path, line_no, cols[2], allow_none=tag == "forbid")
                (forbidden if tag == "forbid" else spec).append((a, b))
            else:
                raise ParseError(path, line_no, f"unknown record type {tag!r}")
    return VcmOntology.build(primitives, concepts, forbidden, spec)


def primitive_sort_key(p: Primitive) -> tuple[int, str]:
    return KIND_ORDER[p[0]], p[1]


# -- operations --------------------------------------------------------------


def primitives_for(ont: VcmOntology, concept: str) -> list[Primitive]:
    """Primitives linked to a medical concept, ordered by kind then code."""
    return sorted(ont.concept(concept).linked_primitives, key=primitive_sort_key)


def most_specific_concepts(ont: VcmOntology, concepts: Iterable[str]) -> set[str]:
    """Drop every member that is a strict ancestor of another member."""
    members = set(concepts)
    for c in members:
        ont.concept(c)
    covered = set()
    for c in members:
        covered |= ont.ancestors(c) & members
    return members - covered


def is_consistent(ont: VcmOntology, icon: Icon) -> bool:
    ont.check_icon(icon)
    return not violates_rules(ont, icon.pictogram, icon.modifiers)


def violates_rules(ont: VcmOntology, pictogram: Optional[str], modifiers: Iterable[str]) -> bool:
    """Does some forbid rule match this pictogram/modifier combination? No primitive validation."""
    present = {(PICTOGRAM, pictogram if pictogram is not None else NONE)}
    present.update((MODIFIER, m) for m in modifiers)
    return any(not ont._rule_partners.get(p, frozenset()).isdisjoint(present) for p in present)


def covers(ont: VcmOntology, a: Icon, b: Icon) -> bool:
    """Non-strict dominance: *a* says at least everything *b* says."""
    if a.color != b.color or a.shape != b.shape:
        return False
    if not ont.pictogram_generalizes(b.pictogram, a.pictogram):
        return False
    return all(any(ont.modifier_generalizes(mb, ma) for ma in a.modifiers) for mb in b.modifiers)


def is_more_specific(ont: VcmOntology, a: Icon, b: Icon) -> bool:
    """True when icon *a* says strictly more than icon *b*.

    *a* must share colour and shape with *b*, carry the same or a more specific
    pictogram (no pictogram is the most general), and cover each of *b*'s
    modifiers with an equal or more specific one. Icons that cover each other
    (e.g. ``{virus}`` and ``{virus, infection}``) are equivalent, not ordered.
    """
    ont.check_icon(a)
    ont.check_icon(b)
    return a != b and covers(ont, a, b) and not covers(ont, b, a)


def reduce_modifiers(ont: VcmOntology, modifiers: Iterable[str]) -> frozenset[str]:
    """Drop modifiers that are strict generalizations of another member."""
    mods = set(modifiers)
    return frozenset(m for m in mods if not any(o != m and ont.modifier_generalizes(m, o) for o in mods))


def icon_code(icon: Icon) -> str:
    """Canonical ``<color>.<shape>.<pictogram|_>.<mod1+mod2|_>`` code."""
    pict = icon.pictogram if icon.pictogram is not None else NONE
    mods = "+".join(sorted(icon.modifiers)) if icon.modifiers else NONE
    return f"{icon.color}.{icon.shape}.{pict}.{mods}"


def parse_icon_code(code: str) -> Icon:
    parts = code.strip().split(".")
    if len(parts) != 4:
        raise IconCodeError(f"malformed icon code {code!r}: expected 4 dot-separated fields")
    color, shape, pict, mods = parts
    if color not in COLORS:
        raise IconCodeError(f"malformed icon code {code!r}: bad color {color!r}")
    if shape not in SHAPES:
        raise IconCodeError(f"malformed icon code {code!r}: bad shape {shape!r}")
    if pict != NONE and not _CODE_RE.match(pict):
        raise IconCodeError(f"malformed icon code {code!r}: bad pictogram {pict!r}")
    modifiers: list[str] = []
    if mods != NONE:
        modifiers = mods.split("+")
        if any(not _CODE_RE.match(m) for m in modifiers) or modifiers != sorted(set(modifiers)):
            raise IconCodeError(f"malformed icon code {code!r}: bad modifier list {mods!r}")
    return Icon(color, shape, None if pict == NONE else pict, frozenset(modifiers))
