"""Exception hierarchy shared by the loaders and the engine."""

from __future__ import annotations


class MappingError(Exception):
    """Base class for every error raised by vcmmap."""


class ParseError(MappingError):
    def __init__(self, path, line_no: int, message: str) -> None:
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{self.path}:{line_no}: {message}")


class ReferentialIntegrityError(MappingError):
    def __init__(self, message: str, ids) -> None:
        self.ids = sorted(set(ids), key=str)
        super().__init__(f"{message}: {', '.join(str(i) for i in self.ids)}")


class CycleError(MappingError):
    def __init__(self, axis: str, cycle) -> None:
        self.axis = axis
        self.cycle = list(cycle)
        super().__init__(f"cycle in {axis}: {' -> '.join(str(c) for c in self.cycle)}")


class NotFoundError(MappingError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "not found"


class OntologyError(MappingError):
    """Invalid or empty VCM ontology content."""


class UnknownPrimitiveError(MappingError):
    pass


class AnchorError(MappingError):
    """Invalid anchor table row."""


class ModifierOverflowError(MappingError):
    def __init__(self, count: int, limit: int) -> None:
        self.count = count
        self.limit = limit
        super().__init__(f"{count} distinct shape modifiers exceeds the limit of {limit}")


class IconCodeError(MappingError, ValueError):
    """Malformed icon code string."""
