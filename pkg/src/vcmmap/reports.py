"""Corpus statistics, expert review sheets and reproducible sampling."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from vcmmap import tsv
from vcmmap.engine import BatchEntry
from vcmmap.errors import IconCodeError, ParseError
from vcmmap.terminology import HARVESTED_TYPES, TerminologyGraph
from vcmmap.vcm import parse_icon_code

BATCH_HEADER = ("concept_id", "icon_codes", "n_icons")
REVIEW_HEADER = ("concept_id", "label", "relationships", "icon_codes", "acceptable", "comments")
ERROR_PREFIX = "ERROR:"


class Lcg64:
    """64-bit linear congruential generator (Knuth's MMIX constants).

    Used instead of :mod:`random` so that seeded samples are identical on
    every platform and Python version.
    """

    MULTIPLIER = 6364136223846793005
    INCREMENT = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int) -> None:
        self.state = seed & self.MASK

    def next(self) -> int:
        self.state = (self.state * self.MULTIPLIER + self.INCREMENT) & self.MASK
        return self.state

    def below(self, n: int) -> int:
        # high 32 bits have the longest period
        return (self.next() >> 32) % n


def sample(items: Sequence, k: int, seed: int) -> list:
    """Pick ``k`` items without replacement; the picks keep their input order."""
    k = max(0, min(k, len(items)))
    rng = Lcg64(seed)
    idx = list(range(len(items)))
    for i in range(k):
        j = i + rng.below(len(idx) - i)
        idx[i], idx[j] = idx[j], idx[i]
    return [items[i] for i in sorted(idx[:k])]


# -- batch TSV ---------------------------------------------------------------


def format_batch_row(entry: BatchEntry) -> str:
    if entry.error is not None:
        reason = " ".join(entry.error.split())
        return f"{entry.concept}\t{ERROR_PREFIX}{reason}\t0"
    codes = entry.icon_set.codes
    return f"{entry.concept}\t{' '.join(codes)}\t{len(codes)}"


def format_batch(entries: Iterable[BatchEntry]) -> str:
    return "".join(line + "\n" for line in ["\t".join(BATCH_HEADER), *map(format_batch_row, entries)])


@dataclass(frozen=True)
class CorpusStats:
    total_concepts: int
    histogram: dict[int, int]
    distinct_icons: int
    icon_assignments: int
    generic_icon_count: int
    errors: int = 0

    @property
    def mean_concepts_per_icon(self) -> float:
        return self.icon_assignments / self.distinct_icons if self.distinct_icons else 0.0

    def percent(self, count: int) -> float:
        return 100.0 * count / self.total_concepts if self.total_concepts else 0.0

    def render(self) -> str:
        lines = [f"total_concepts\t{self.total_concepts}", f"errors\t{self.errors}"]
        for n in sorted(self.histogram):
            count = self.histogram[n]
            lines.append(f"icons_per_concept\t{n}\t{count}\t{self.percent(count):.1f}%")
        lines += [
            f"distinct_icons\t{self.distinct_icons}",
            f"icon_assignments\t{self.icon_assignments}",
            f"mean_concepts_per_icon\t{self.mean_concepts_per_icon:.2f}",
            f"generic_icon_concepts\t{self.generic_icon_count}\t{self.percent(self.generic_icon_count):.1f}%",
        ]
        return "\n".join(lines) + "\n"


def read_batch(path) -> list[tuple[str, Optional[list[str]]]]:
    """Rows of a batch TSV as (concept id, icon codes or None for error rows)."""
    path = Path(path)
    out = []
    for line_no, (cid, cell, n) in tsv.rows(path, BATCH_HEADER):
        if cell.startswith(ERROR_PREFIX):
            out.append((cid, None))
            continue
        codes = cell.split()
        if str(len(codes)) != n:
            raise ParseError(path, line_no, f"n_icons {n!r} does not match {len(codes)} codes")
        for code in codes:
            try:
                parse_icon_code(code)
            except IconCodeError as exc:
                raise ParseError(path, line_no, str(exc)) from None
        out.append((cid, codes))
    return out


def compute_stats(rows: Iterable[tuple[str, Optional[list[str]]]]) -> CorpusStats:
    histogram: Counter[int] = Counter()
    icons: Counter[str] = Counter()
    generic = errors = 0
    for _, codes in rows:
        if codes is None:
            errors += 1
            continue
        histogram[len(codes)] += 1
        icons.update(set(codes))
        if any(code.endswith("._._") for code in codes):
            generic += 1
    return CorpusStats(
        total_concepts=sum(histogram.values()),
        histogram=dict(sorted(histogram.items())),
        distinct_icons=len(icons),
        icon_assignments=sum(icons.values()),
        generic_icon_count=generic,
        errors=errors,
    )


# -- review sheet ------------------------------------------------------------


def render_relationships(graph: TerminologyGraph, concept: int) -> str:
    """Relationships as shown to reviewers, e.g. ``finding site: Thyroid structure; is a: Disease``."""
    rels = [r for r in graph.outgoing.get(concept, ()) if r.rel_type in HARVESTED_TYPES]
    rels.sort(key=lambda r: (r.group_id, r.rel_type, r.destination))
    parts = []
    for r in rels:
        text = f"{r.rel_type.replace('_', ' ')}: {graph.label(r.destination)}"
        parts.append(text if r.group_id == 0 else f"{text} (group {r.group_id})")
    parts += [f"is a: {graph.label(p)}" for p in graph.is_a_index.get(concept, ())]
    return "; ".join(parts)


@dataclass(frozen=True)
class ReviewRow:
    concept: int
    label: str
    relationships: str
    icon_codes: tuple[str, ...]
    acceptable: str = field(default="")
    comments: str = field(default="")

    def render(self) -> str:
        return "\t".join(
            [str(self.concept), self.label, self.relationships, " ".join(self.icon_codes), self.acceptable, self.comments]
        )


def review_rows(graph: TerminologyGraph, entries: Iterable[BatchEntry]) -> list[ReviewRow]:
    rows = []
    for e in entries:
        if not e.ok:
            rows.append(ReviewRow(e.concept, "", "", (ERROR_PREFIX + e.error,)))
            continue
        label = graph.label(e.concept)
        rows.append(ReviewRow(e.concept, label, render_relationships(graph, e.concept), tuple(e.icon_set.codes)))
    return rows


def format_review(rows: Iterable[ReviewRow]) -> str:
    return "".join(line + "\n" for line in ["\t".join(REVIEW_HEADER), *(r.render() for r in rows)])

