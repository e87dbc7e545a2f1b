from __future__ import annotations

from pathlib import Path

from vcmmap.cli import data_path
from vcmmap.terminology import Concept, Relationship, TerminologyGraph

GOLDEN = Path(__file__).parent / "golden"

# criterion id -> (description, passed); filled by test_acceptance, printed by conftest
ACCEPTANCE: dict[str, tuple[str, bool]] = {}


def corpus_ids() -> list[int]:
    return [int(line) for line in data_path("corpus.tsv").read_text().splitlines() if line and not line.startswith("#")]


def small_graph(edges, tags=None) -> TerminologyGraph:
    """Graph from (source, rel_type, destination[, group]) tuples; every id becomes a concept."""
    tags = tags or {}
    ids = {i for e in edges for i in (e[0], e[2])}
    concepts = [Concept(i, f"c{i}", tags.get(i, "body-structure")) for i in sorted(ids)]
    rels = [Relationship(e[0], e[1], e[2], e[3] if len(e) > 3 else 0) for e in edges]
    return TerminologyGraph.build(concepts, rels)
