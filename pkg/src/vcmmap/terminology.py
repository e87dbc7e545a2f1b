"""SNOMED-CT-style terminology graph: loading, indexing and traversal.

Two TSV files describe a snapshot::

    concepts.tsv       id  label  semantic_tag
    relationships.tsv  source_id  rel_type  destination_id  group_id

Lines starting with ``#`` and blank lines are skipped.
"""

from __future__ import annotations

import graphlib
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from vcmmap import tsv
from vcmmap.errors import CycleError, NotFoundError, ParseError, ReferentialIntegrityError

SEMANTIC_TAGS = frozenset({"disorder", "finding", "body-structure", "morphology", "organism", "other"})

IS_A = "is_a"
PART_OF = "part_of"

# Relationship types harvested when building the list of concepts to map.
HARVESTED_TYPES = (
    "finding_site",
    "associated_morphology",
    "temporal_context",
    "has_interpretation",
    "interprets",
    "has_definitional_manifestation",
    "pathological_process",
    "has_focus",
    "causative_agent",
    "associated_with",
    "due_to",
)
REL_TYPES = frozenset(HARVESTED_TYPES) | {IS_A, PART_OF}

# Pseudo relationship type marking the queried concept in its own harvest list.
SELF = "self"

CONCEPTS_HEADER = ("id", "label", "semantic_tag")
RELATIONSHIPS_HEADER = ("source_id", "rel_type", "destination_id", "group_id")


@dataclass(frozen=True, slots=True)
class Concept:
    id: int
    label: str
    semantic_tag: str


@dataclass(frozen=True, slots=True, order=True)
class Relationship:
    source: int
    rel_type: str
    destination: int
    group_id: int = 0

    @property
    def known(self) -> bool:
        return self.rel_type in REL_TYPES


@dataclass(frozen=True)
class TerminologyGraph:
    """Immutable, fully indexed concept graph. Build with :meth:`build`."""

    concepts: dict[int, Concept]
    relationships: tuple[Relationship, ...]
    outgoing: dict[int, tuple[Relationship, ...]] = field(repr=False)
    is_a_index: dict[int, tuple[int, ...]] = field(repr=False)
    part_of_index: dict[int, tuple[int, ...]] = field(repr=False)

    @classmethod
    def build(cls, concepts: Iterable[Concept], relationships: Iterable[Relationship]) -> "TerminologyGraph":
        """Index concepts and relationships, validating ids, integrity and acyclicity."""
        by_id: dict[int, Concept] = {}
        for c in concepts:
            if c.id <= 0:
                raise ValueError(f"concept id must be positive: {c.id}")
            if c.semantic_tag not in SEMANTIC_TAGS:
                raise ValueError(f"unknown semantic tag {c.semantic_tag!r} for {c.id}")
            if c.id in by_id:
                raise ReferentialIntegrityError("duplicate concept id", [c.id])
            by_id[c.id] = c

        rels = tuple(sorted(set(relationships)))
        dangling = [i for r in rels for i in (r.source, r.destination) if i not in by_id]
        if dangling:
            raise ReferentialIntegrityError("relationship references unknown concept", dangling)
        negative = [r for r in rels if r.group_id < 0]
        if negative:
            raise ValueError(f"negative group id on {negative[0]}")

        outgoing: dict[int, list[Relationship]] = defaultdict(list)
        axes: dict[str, dict[int, list[int]]] = {IS_A: defaultdict(list), PART_OF: defaultdict(list)}
        for r in rels:
            outgoing[r.source].append(r)
            if r.rel_type in axes and r.destination not in axes[r.rel_type][r.source]:
                axes[r.rel_type][r.source].append(r.destination)

        for axis, index in axes.items():
            _check_acyclic(axis, index)

        return cls(
            concepts=by_id,
            relationships=rels,
            outgoing={k: tuple(v) for k, v in outgoing.items()},
            is_a_index={k: tuple(sorted(v)) for k, v in axes[IS_A].items()},
            part_of_index={k: tuple(sorted(v)) for k, v in axes[PART_OF].items()},
        )

    def __contains__(self, concept_id: object) -> bool:
        return concept_id in self.concepts

    def __len__(self) -> int:
        return len(self.concepts)

    def concept(self, concept_id: int) -> Concept:
        try:
            return self.concepts[concept_id]
        except KeyError:
            raise NotFoundError(f"unknown concept {concept_id}") from None

    def label(self, concept_id: int) -> str:
        return self.concept(concept_id).label


def _check_acyclic(axis: str, index: dict[int, list[int]]) -> None:
    sorter = graphlib.TopologicalSorter({k: v for k, v in index.items()})
    try:
        sorter.prepare()
    except graphlib.CycleError as exc:
        raise CycleError(axis, exc.args[1]) from None


def read_concepts(path) -> list[Concept]:
    path = Path(path)
    out = []
    for line_no, (cid, label, tag) in tsv.rows(path, CONCEPTS_HEADER):
        ident = tsv.parse_int(path, line_no, cid, "concept id")
        if ident <= 0:
            raise ParseError(path, line_no, f"concept id must be positive, got {ident}")
        if tag not in SEMANTIC_TAGS:
            raise ParseError(path, line_no, f"unknown semantic tag {tag!r}")
        out.append(Concept(ident, label, tag))
    return out


def read_relationships(path) -> list[Relationship]:
    path = Path(path)
    out = []
    for line_no, (src, rel_type, dst, group) in tsv.rows(path, RELATIONSHIPS_HEADER):
        group_id = tsv.parse_int(path, line_no, group, "group id")
        if group_id < 0:
            raise ParseError(path, line_no, f"group id must be >= 0, got {group_id}")
        if not rel_type:
            raise ParseError(path, line_no, "empty relationship type")
        out.append(
            Relationship(
                tsv.parse_int(path, line_no, src, "source id"),
                rel_type,
                tsv.parse_int(path, line_no, dst, "destination id"),
                group_id,
            )
        )
    return out


def load_terminology(concepts_path, relationships_path) -> TerminologyGraph:
    """Load and validate a terminology snapshot from the two TSV files."""
    return TerminologyGraph.build(read_concepts(concepts_path), read_relationships(relationships_path))


def related_concepts(graph: TerminologyGraph, concept: int) -> list[tuple[int, list[tuple[str, int]]]]:
    """Harvest the whitelisted neighbours of *concept*, one list per relationship group.

    Each group > 0 gets its own relationships plus every ungrouped one; with no
    groups a single group-0 list is returned. The concept itself leads every
    list as ``("self", concept)``.
    """
    graph.concept(concept)
    by_group: dict[int, set[tuple[str, int]]] = defaultdict(set)
    for r in graph.outgoing.get(concept, ()):
        if r.rel_type in HARVESTED_TYPES:
            by_group[r.group_id].add((r.rel_type, r.destination))

    ungrouped = by_group.pop(0, set())
    head = [(SELF, concept)]
    if not by_group:
        return [(0, head + sorted(ungrouped))]
    return [(g, head + sorted(by_group[g] | ungrouped)) for g in sorted(by_group)]


def parents(graph: TerminologyGraph, concept: int) -> list[int]:
    graph.concept(concept)
    return list(graph.is_a_index.get(concept, ()))


def bigger_than(graph: TerminologyGraph, concept: int) -> list[int]:
    """Wholes the concept is directly part of (part-of followed from part to whole)."""
    graph.concept(concept)
    return list(graph.part_of_index.get(concept, ()))


def subsumes(graph: TerminologyGraph, ancestor: int, descendant: int) -> bool:
    """True when *descendant* reaches *ancestor* through zero or more is-a edges."""
    graph.concept(ancestor)
    graph.concept(descendant)
    seen = {descendant}
    stack = [descendant]
    while stack:
        node = stack.pop()
        if node == ancestor:
            return True
        for p in graph.is_a_index.get(node, ()):
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return False
