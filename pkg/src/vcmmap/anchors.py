"""Curated terminology -> VCM anchors and the recursive resolution built on them.

``anchors.tsv`` has the header ``terminology_id  vcm_id  match`` where match is
``exact``, ``partial`` or ``override``. An override pins an anatomical
structure to a single pictogram-bearing VCM concept and shadows every other
anchor on that structure.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Union

from vcmmap import tsv
from vcmmap.errors import AnchorError, ParseError
from vcmmap.terminology import TerminologyGraph, bigger_than, parents
from vcmmap.vcm import PICTOGRAM, VcmOntology, primitives_for

EXACT = "exact"
PARTIAL = "partial"
OVERRIDE = "override"
MATCH_KINDS = (EXACT, PARTIAL, OVERRIDE)

ANCHORS_HEADER = ("terminology_id", "vcm_id", "match")


@dataclass(frozen=True, slots=True, order=True)
class AnchorEntry:
    terminology_id: int
    vcm_id: str
    match: str


@dataclass(frozen=True)
class AnchorTable:
    entries: dict[int, tuple[AnchorEntry, ...]]
    overrides: dict[int, str] = field(default_factory=dict)

    @classmethod
    def build(cls, rows: Iterable[AnchorEntry]) -> "AnchorTable":
        entries: dict[int, list[AnchorEntry]] = defaultdict(list)
        overrides: dict[int, str] = {}
        seen: set[tuple[int, str]] = set()
        for row in rows:
            if row.match not in MATCH_KINDS:
                raise AnchorError(f"bad match kind {row.match!r} for {row.terminology_id}")
            key = (row.terminology_id, row.vcm_id)
            if key in seen:
                raise AnchorError(f"duplicate anchor {row.terminology_id} -> {row.vcm_id}")
            seen.add(key)
            if row.match == OVERRIDE:
                if row.terminology_id in overrides:
                    raise AnchorError(f"more than one override for {row.terminology_id}")
                overrides[row.terminology_id] = row.vcm_id
            else:
                entries[row.terminology_id].append(row)
        return cls({k: tuple(sorted(v)) for k, v in entries.items()}, overrides)

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values()) + len(self.overrides)

    def rows(self) -> list[AnchorEntry]:
        out = [e for v in self.entries.values() for e in v]
        out += [AnchorEntry(t, v, OVERRIDE) for t, v in self.overrides.items()]
        return sorted(out)

    def anchors_of(self, terminology_id: int) -> tuple[AnchorEntry, ...]:
        return self.entries.get(terminology_id, ())

    def without_overrides(self) -> "AnchorTable":
        return replace(self, overrides={})

    def with_overrides(self, overrides: dict[int, str]) -> "AnchorTable":
        return replace(self, overrides={**self.overrides, **overrides})


@dataclass(frozen=True)
class ResolutionTrace:
    start: int
    visited: tuple[int, ...]
    matches: tuple[AnchorEntry, ...]
    depth: int


def load_anchors(paths: Union[str, Path, Iterable[Union[str, Path]]], graph: TerminologyGraph, ont: VcmOntology) -> AnchorTable:
    """Load one or more anchor files (later files may add overrides) and validate them."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    rows: list[AnchorEntry] = []
    for path in map(Path, paths):
        for line_no, (tid, vcm_id, match) in tsv.rows(path, ANCHORS_HEADER):
            if match not in MATCH_KINDS:
                raise ParseError(path, line_no, f"bad match kind {match!r}")
            rows.append(AnchorEntry(tsv.parse_int(path, line_no, tid, "terminology id"), vcm_id, match))
    table = AnchorTable.build(rows)
    validate_anchors(table, graph, ont)
    return table


def validate_anchors(table: AnchorTable, graph: TerminologyGraph, ont: VcmOntology) -> None:
    for row in table.rows():
        if row.terminology_id not in graph:
            raise AnchorError(f"anchor references unknown terminology concept {row.terminology_id}")
        if row.vcm_id not in ont.concepts:
            raise AnchorError(f"anchor references unknown VCM concept {row.vcm_id}")
    for tid, vcm_id in table.overrides.items():
        pictos = [p for p in primitives_for(ont, vcm_id) if p[0] == PICTOGRAM]
        if len(pictos) != 1:
            raise AnchorError(f"override {tid} -> {vcm_id} must carry exactly one pictogram, has {len(pictos)}")


def resolve(table: AnchorTable, graph: TerminologyGraph, ont: VcmOntology, concept: int) -> tuple[set[str], ResolutionTrace]:
    """Map a terminology concept to VCM medical concepts through the anchor table.

    Breadth first over is-a parents and part-of wholes together. A node with an
    override or an exact anchor contributes and ends its branch; partial anchors
    contribute and the walk continues; unanchored nodes just continue.
    """
    graph.concept(concept)
    found: set[str] = set()
    matches: list[AnchorEntry] = []
    visited = [concept]
    seen = {concept}
    frontier = [concept]
    depth = 0
    level = 0
    while frontier:
        depth = level
        following: set[int] = set()
        for node in frontier:
            if node in table.overrides:
                vcm_id = table.overrides[node]
                found.add(vcm_id)
                matches.append(AnchorEntry(node, vcm_id, OVERRIDE))
                continue
            anchors = table.anchors_of(node)
            found.update(a.vcm_id for a in anchors)
            matches.extend(anchors)
            if any(a.match == EXACT for a in anchors):
                continue
            following.update(parents(graph, node))
            following.update(bigger_than(graph, node))
        frontier = sorted(following - seen)
        seen.update(frontier)
        visited.extend(frontier)
        level += 1
    return found, ResolutionTrace(concept, tuple(visited), tuple(matches), depth)


def pictograms_of(ont: VcmOntology, vcm_ids: Iterable[str]) -> frozenset[str]:
    return frozenset(code for v in vcm_ids for kind, code in primitives_for(ont, v) if kind == PICTOGRAM)


def detect_ambiguities(table: AnchorTable, graph: TerminologyGraph, ont: VcmOntology) -> list[tuple[int, frozenset[str]]]:
    """Body structures that reach two or more distinct pictograms and have no override."""
    report = []
    for cid in sorted(graph.concepts):
        if graph.concepts[cid].semantic_tag != "body-structure" or cid in table.overrides:
            continue
        vcm_ids, _ = resolve(table, graph, ont, cid)
        pictos = pictograms_of(ont, vcm_ids)
        if len(pictos) >= 2:
            report.append((cid, pictos))
    return report
