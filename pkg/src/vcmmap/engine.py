"""Icon generation pipeline.

For one terminology concept and each of its relationship groups:

1. harvest the concept and its whitelisted neighbours,
2. resolve each of them to VCM medical concepts through the anchor table,
3. keep only the most specific medical concepts,
4. expand those into VCM primitives,
5. assemble candidate icons (pictogram x modifier subset), drop inconsistent
   ones and those less specific than another candidate.

Per-group icon sets are then merged: union, dedup, specificity pruning.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from vcmmap.anchors import AnchorTable, ResolutionTrace, resolve
from vcmmap.errors import MappingError, ModifierOverflowError, UnknownPrimitiveError
from vcmmap.terminology import TerminologyGraph, related_concepts
from vcmmap.vcm import (
    BASE_SHAPE,
    COLOR,
    MODIFIER,
    PICTOGRAM,
    Icon,
    Primitive,
    VcmOntology,
    icon_code,
    most_specific_concepts,
    primitive_sort_key,
    primitives_for,
    reduce_modifiers,
    violates_rules,
)

MAX_MODIFIERS = 10
DEFAULT_COLOR = "current"
DEFAULT_SHAPE = "patho"
# First match wins when a group resolves to several temporal aspects.
COLOR_PRECEDENCE = ("past", "risk", "current")

GENERIC_ICON = Icon(DEFAULT_COLOR, DEFAULT_SHAPE, None, frozenset())


@dataclass(frozen=True)
class AssemblyCounts:
    generated: int
    inconsistent: int
    less_specific: int

    @property
    def survivors(self) -> int:
        return self.generated - self.inconsistent - self.less_specific


@dataclass(frozen=True)
class Resolution:
    concept: int
    rel_type: str
    vcm_ids: frozenset[str]
    trace: ResolutionTrace


@dataclass(frozen=True)
class GroupReport:
    group_id: int
    harvested: tuple[tuple[str, int], ...]
    resolutions: tuple[Resolution, ...]
    retained: tuple[str, ...]
    primitives: tuple[Primitive, ...]
    counts: AssemblyCounts
    icons: tuple[Icon, ...]


@dataclass(frozen=True)
class MappingReport:
    concept: int
    groups: tuple[GroupReport, ...]
    merged_candidates: int
    merged_removed: int


@dataclass(frozen=True)
class IconSet:
    concept: int
    icons: tuple[Icon, ...]
    report: MappingReport

    @property
    def codes(self) -> list[str]:
        return [icon_code(i) for i in self.icons]

    def __len__(self) -> int:
        return len(self.icons)


@dataclass(frozen=True)
class BatchEntry:
    concept: int
    icon_set: Optional[IconSet] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def choose_color(primitives: Iterable[Primitive]) -> str:
    colors = {code for kind, code in primitives if kind == COLOR}
    return next((c for c in COLOR_PRECEDENCE if c in colors), DEFAULT_COLOR)


def choose_shape(primitives: Iterable[Primitive]) -> str:
    shapes = {code for kind, code in primitives if kind == BASE_SHAPE}
    # a pathological element outranks a physiological one
    return "physio" if shapes == {"physio"} else DEFAULT_SHAPE


def _maximal(ont: VcmOntology, pairs: Sequence[tuple]) -> list[tuple]:
    """(pictogram, modifiers) pairs of one colour and shape that nothing else strictly dominates."""
    mod_up: dict[frozenset, frozenset] = {}
    for _, mods in pairs:
        if mods not in mod_up:
            mod_up[mods] = frozenset().union(*(ont.modifier_closure(m) for m in mods))
    pict_up = [ont.pictogram_closure(p) for p, _ in pairs]

    def covers_(i: int, j: int) -> bool:
        return pairs[j][0] in pict_up[i] and pairs[j][1] <= mod_up[pairs[i][1]]

    # richer candidates first, so a dominated one usually meets its dominator early
    order = sorted(range(len(pairs)), key=lambda i: (-len(mod_up[pairs[i][1]]), pairs[i][0] is None))
    return [pairs[j] for j in range(len(pairs)) if not any(i != j and covers_(i, j) and not covers_(j, i) for i in order)]


def prune_less_specific(ont: VcmOntology, icons: Iterable[Icon]) -> list[Icon]:
    """Keep the icons that no other member strictly dominates, sorted by code."""
    by_look: dict[tuple[str, str], list[tuple]] = {}
    for icon in set(icons):
        by_look.setdefault((icon.color, icon.shape), []).append((icon.pictogram, icon.modifiers))
    kept = [Icon(c, s, p, m) for (c, s), pairs in by_look.items() for p, m in _maximal(ont, sorted(pairs, key=_pair_key))]
    return sorted(kept, key=icon_code)


def _pair_key(pair: tuple) -> tuple:
    return (pair[0] or "", sorted(pair[1]))


def _assemble(
    ont: VcmOntology,
    primitives: Sequence[Primitive],
    color: Optional[str],
    shape: Optional[str],
    max_modifiers: int,
) -> tuple[list[Icon], AssemblyCounts]:
    unknown = sorted(f"{k}:{c}" for k, c in set(primitives) - ont.primitives)
    if unknown:
        raise UnknownPrimitiveError(f"unknown primitive(s): {', '.join(unknown)}")
    color = color or choose_color(primitives)
    shape = shape or choose_shape(primitives)

    pictograms: list[Optional[str]] = sorted({c for k, c in primitives if k == PICTOGRAM})
    modifiers = sorted({c for k, c in primitives if k == MODIFIER})
    if len(modifiers) > max_modifiers:
        raise ModifierOverflowError(len(modifiers), max_modifiers)
    if not pictograms:
        pictograms = [None]

    # A subset holding both a modifier and one of its generalizations is
    # equivalent to the subset without the generalization, so only
    # antichains are enumerated.
    subsets = [
        frozenset(combo)
        for r in range(len(modifiers) + 1)
        for combo in itertools.combinations(modifiers, r)
        if reduce_modifiers(ont, combo) == frozenset(combo)
    ]
    candidates = [(p, m) for p in pictograms for m in subsets]
    consistent = [(p, m) for p, m in candidates if not violates_rules(ont, p, m)]
    survivors = sorted((Icon(color, shape, p, m) for p, m in _maximal(ont, consistent)), key=icon_code)
    counts = AssemblyCounts(
        generated=len(candidates),
        inconsistent=len(candidates) - len(consistent),
        less_specific=len(consistent) - len(survivors),
    )
    return survivors, counts


def assemble(
    ont: VcmOntology,
    primitives: Iterable[Primitive],
    *,
    color: Optional[str] = None,
    shape: Optional[str] = None,
    max_modifiers: int = MAX_MODIFIERS,
) -> list[Icon]:
    """Build the most specific consistent icons from a list of primitives.

    Colour and shape come from the arguments, else from colour/shape
    primitives in the list, else default to ``current`` / ``patho``.
    """
    icons, _ = _assemble(ont, list(primitives), color, shape, max_modifiers)
    return icons


def _map_group(
    graph: TerminologyGraph,
    ont: VcmOntology,
    table: AnchorTable,
    group_id: int,
    harvested: list[tuple[str, int]],
    max_modifiers: int,
) -> GroupReport:
    resolutions = []
    resolved: set[str] = set()
    for rel_type, cid in harvested:
        vcm_ids, trace = resolve(table, graph, ont, cid)
        resolutions.append(Resolution(cid, rel_type, frozenset(vcm_ids), trace))
        resolved |= vcm_ids
    retained = sorted(most_specific_concepts(ont, resolved))
    prims = sorted({p for v in retained for p in primitives_for(ont, v)}, key=primitive_sort_key)
    icons, counts = _assemble(ont, prims, None, None, max_modifiers)
    return GroupReport(
        group_id=group_id,
        harvested=tuple(harvested),
        resolutions=tuple(resolutions),
        retained=tuple(retained),
        primitives=tuple(prims),
        counts=counts,
        icons=tuple(icons),
    )


def generate_icons(
    graph: TerminologyGraph,
    ont: VcmOntology,
    table: AnchorTable,
    concept: int,
    *,
    max_modifiers: int = MAX_MODIFIERS,
) -> IconSet:
    """Run the full pipeline for one concept, merging the icons of every group."""
    groups = [
        _map_group(graph, ont, table, gid, harvested, max_modifiers)
        for gid, harvested in related_concepts(graph, concept)
    ]
    union = {icon for g in groups for icon in g.icons}
    merged = prune_less_specific(ont, union)
    report = MappingReport(
        concept=concept,
        groups=tuple(groups),
        merged_candidates=sum(len(g.icons) for g in groups),
        merged_removed=sum(len(g.icons) for g in groups) - len(merged),
    )
    return IconSet(concept, tuple(merged), report)


def _generate_entry(graph, ont, table, concept: int) -> BatchEntry:
    try:
        return BatchEntry(concept, generate_icons(graph, ont, table, concept))
    except MappingError as exc:
        return BatchEntry(concept, error=str(exc))


_worker_inputs: tuple = ()


def _init_worker(graph, ont, table) -> None:
    global _worker_inputs
    _worker_inputs = (graph, ont, table)


def _worker_generate(concept: int) -> BatchEntry:
    return _generate_entry(*_worker_inputs, concept)


def batch_generate(
    graph: TerminologyGraph,
    ont: VcmOntology,
    table: AnchorTable,
    concepts: Iterable[int],
    *,
    workers: Optional[int] = None,
) -> list[BatchEntry]:
    """Map many concepts; a failing concept yields an error entry instead of aborting.

    With ``workers`` > 1 the concepts are fanned out over worker processes; the
    result list keeps input order and equals the sequential run.
    """
    concepts = list(concepts)
    if not workers or workers <= 1 or len(concepts) < 2:
        return [_generate_entry(graph, ont, table, c) for c in concepts]
    workers = min(workers, os.cpu_count() or 1, len(concepts))
    chunk = max(1, len(concepts) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(graph, ont, table)) as pool:
        return list(pool.map(_worker_generate, concepts, chunksize=chunk))


def format_report(report: MappingReport, graph: TerminologyGraph) -> str:
    """Plain-text dump of a mapping report, one ``key: value`` item per line."""

    def name(cid: int) -> str:
        return f"{cid} {graph.concepts[cid].label}" if cid in graph else str(cid)

    lines = [f"concept: {name(report.concept)}"]
    for g in report.groups:
        lines.append(f"group {g.group_id}:")
        for rel_type, cid in g.harvested:
            lines.append(f"  step1 {rel_type}: {name(cid)}")
        for r in g.resolutions:
            hits = ", ".join(f"{m.terminology_id}->{m.vcm_id} ({m.match})" for m in r.trace.matches) or "none"
            lines.append(
                f"  step2 {r.concept}: {{{', '.join(sorted(r.vcm_ids))}}} depth={r.trace.depth} "
                f"visited={len(r.trace.visited)} anchors={hits}"
            )
        lines.append(f"  step3 retained: {{{', '.join(g.retained)}}}")
        lines.append(f"  step4 primitives: {', '.join(f'{k}:{c}' for k, c in g.primitives) or 'none'}")
        lines.append(
            f"  step5 generated={g.counts.generated} inconsistent={g.counts.inconsistent} "
            f"less_specific={g.counts.less_specific} icons={' '.join(map(icon_code, g.icons))}"
        )
    lines.append(f"merge: candidates={report.merged_candidates} removed={report.merged_removed}")
    return "\n".join(lines)
