"""Minimal TSV reading shared by the loaders: ``#`` comments, blank lines, fixed headers."""

from __future__ import annotations

from pathlib import Path
from typing import Iterator

from vcmmap.errors import ParseError


def data_lines(path: Path) -> Iterator[tuple[int, list[str]]]:
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield line_no, line.split("\t")


def rows(path: Path, header: tuple[str, ...]) -> Iterator[tuple[int, list[str]]]:
    """Yield (line number, stripped columns) after checking the header row.

    An input with no data lines at all (not even a header) yields nothing.
    """
    lines = data_lines(path)
    first = next(lines, None)
    if first is None:
        return
    line_no, cols = first
    if tuple(c.strip() for c in cols) != header:
        raise ParseError(path, line_no, f"expected header {' '.join(header)!r}")
    for line_no, cols in lines:
        if len(cols) != len(header):
            raise ParseError(path, line_no, f"expected {len(header)} columns, got {len(cols)}")
        yield line_no, [c.strip() for c in cols]


def parse_int(path: Path, line_no: int, text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(path, line_no, f"non-numeric {what} {text!r}") from None
