"""Command line entry point: ``vcmmap {map,batch,stats,ambiguities,export-review}``.

Exit codes: 0 success, 1 input/load error, 2 unknown concept, 3 generation error.
Data goes to stdout (or ``--out``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from vcmmap import reports, tsv
from vcmmap.anchors import detect_ambiguities, load_anchors
from vcmmap.engine import BatchEntry, batch_generate, format_report, generate_icons
from vcmmap.errors import MappingError, NotFoundError
from vcmmap.terminology import load_terminology
from vcmmap.vcm import load_vcm_ontology

log = logging.getLogger("vcmmap")

EXIT_OK = 0
EXIT_LOAD = 1
EXIT_UNKNOWN = 2
EXIT_GENERATION = 3


def data_path(name: str) -> Path:
    """Path of a bundled fixture file."""
    return Path(str(resources.files("vcmmap") / "data" / name))


class _Fail(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _load(args):
    anchors = args.anchors or [data_path("anchors.tsv"), data_path("overrides.tsv")]
    try:
        graph = load_terminology(args.concepts or data_path("concepts.tsv"), args.relationships or data_path("relationships.tsv"))
        ont = load_vcm_ontology(args.vcm or data_path("vcm_ontology.txt"))
        table = load_anchors(anchors, graph, ont)
    except (MappingError, OSError) as exc:
        raise _Fail(EXIT_LOAD, f"load error: {exc}") from None
    return graph, ont, table


def _read_corpus(path) -> list[str]:
    try:
        return [cols[0].strip() for _, cols in tsv.data_lines(Path(path))]
    except OSError as exc:
        raise _Fail(EXIT_LOAD, f"cannot read corpus: {exc}") from None


def _run_batch(graph, ont, table, raw_ids: Sequence[str], workers: Optional[int]) -> list[BatchEntry]:
    parsed = {}
    for raw in raw_ids:
        try:
            parsed[raw] = int(raw)
        except ValueError:
            pass
    results = iter(batch_generate(graph, ont, table, [parsed[r] for r in raw_ids if r in parsed], workers=workers))
    return [next(results) if raw in parsed else BatchEntry(raw, error=f"non-numeric concept id {raw!r}") for raw in raw_ids]


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_map(args) -> int:
    graph, ont, table = _load(args)
    try:
        concept = int(args.id)
        graph.concept(concept)
    except (ValueError, NotFoundError):
        raise _Fail(EXIT_UNKNOWN, f"unknown concept {args.id}") from None
    try:
        icon_set = generate_icons(graph, ont, table, concept)
    except MappingError as exc:
        raise _Fail(EXIT_GENERATION, f"generation error for {concept}: {exc}") from None
    text = reports.format_batch_row(BatchEntry(concept, icon_set)) + "\n"
    if args.verbose:
        text += "".join(f"# {line}\n" for line in format_report(icon_set.report, graph).splitlines())
    _emit(args, text)
    return EXIT_OK


def cmd_batch(args) -> int:
    raw_ids = _read_corpus(args.corpus)
    graph, ont, table = _load(args)
    entries = _run_batch(graph, ont, table, raw_ids, args.workers)
    _emit(args, reports.format_batch(entries))
    failed = [e for e in entries if not e.ok]
    for e in failed:
        log.warning("concept %s: %s", e.concept, e.error)
    if entries and len(failed) == len(entries):
        return EXIT_GENERATION
    return EXIT_OK


def cmd_stats(args) -> int:
    try:
        rows = reports.read_batch(args.batch)
    except (MappingError, OSError) as exc:
        raise _Fail(EXIT_LOAD, f"cannot read batch file: {exc}") from None
    _emit(args, reports.compute_stats(rows).render())
    return EXIT_OK


def cmd_ambiguities(args) -> int:
    graph, ont, table = _load(args)
    lines = ["concept_id\tpictograms"]
    lines += [f"{cid}\t{','.join(sorted(pictos))}" for cid, pictos in detect_ambiguities(table, graph, ont)]
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_export_review(args) -> int:
    raw_ids = _read_corpus(args.corpus)
    if args.sample is not None:
        raw_ids = reports.sample(raw_ids, args.sample, args.seed)
    graph, ont, table = _load(args)
    entries = _run_batch(graph, ont, table, raw_ids, args.workers)
    _emit(args, reports.format_review(reports.review_rows(graph, entries)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--concepts", help="concepts.tsv (default: bundled fixture)")
    common.add_argument("--relationships", help="relationships.tsv (default: bundled fixture)")
    common.add_argument("--vcm", help="VCM ontology file (default: bundled fixture)")
    common.add_argument(
        "--anchors",
        action="append",
        help="anchor table; repeat to add override files (default: bundled anchors + overrides)",
    )
    common.add_argument("--out", help="write output to FILE instead of stdout")
    common.add_argument("--workers", type=int, default=None, help="worker processes for batch mapping")

    parser = argparse.ArgumentParser(prog="vcmmap", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map", parents=[common], help="map one concept")
    p.add_argument("--id", required=True)
    p.add_argument("--verbose", "-v", action="store_true", help="append the mapping report as # lines")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("batch", parents=[common], help="map every concept id in a corpus file")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("stats", help="summarize a batch TSV")
    p.add_argument("batch")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("ambiguities", parents=[common], help="body structures reaching several pictograms")
    p.set_defaults(func=cmd_ambiguities)

    p = sub.add_parser("export-review", parents=[common], help="review sheet for expert evaluation")
    p.add_argument("corpus")
    p.add_argument("--sample", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_export_review)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except _Fail as exc:
        print(exc, file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    raise SystemExit(main())
