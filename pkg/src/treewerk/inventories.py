"""Label inventories: POS tagsets, phrase categories, edge function labels.

Inventories are plain data, not code: one label per line, ``#`` starts a
comment, blank lines are skipped.  The files shipped under ``data/`` seed the
default German setup, but any UTF-8 file of the same shape can be swapped in,
so adapting the workbench to another language or annotation scheme never
requires touching source.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

#: Edge label used for children of the virtual root and for edges whose
#: function has not been assigned.
ROOT_LABEL = "--"

#: Name of the default POS tagset data file (without extension).
DEFAULT_TAGSET = "stts"


@dataclass(frozen=True)
class Inventory:
    """An ordered set of labels with a name for provenance reporting."""

    name: str
    labels: tuple[str, ...]
    _index: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", frozenset(self.labels))

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def __iter__(self):
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)


def parse_inventory(name: str, text: str) -> Inventory:
    """Build an :class:`Inventory` from the one-label-per-line format.

    Duplicate labels are an error: inventories are sets, and a duplicated
    line is almost always a maintenance slip worth hearing about.
    """
    labels: list[str] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line in seen:
            raise ValueError(f"{name}: duplicate label {line!r} on line {lineno}")
        seen.add(line)
        labels.append(line)
    if not labels:
        raise ValueError(f"{name}: inventory is empty")
    return Inventory(name, tuple(labels))


def load_inventory(path: str | Path, name: str | None = None) -> Inventory:
    """Load an inventory from a file; ``name`` defaults to the file stem."""
    path = Path(path)
    return parse_inventory(name or path.stem, path.read_text(encoding="utf-8"))


def _bundled(filename: str) -> str:
    return (
        resources.files("treewerk").joinpath("data", filename).read_text(encoding="utf-8")
    )


def default_tagset() -> Inventory:
    """The bundled POS tagset."""
    return parse_inventory(DEFAULT_TAGSET, _bundled("stts.txt"))


def default_categories() -> Inventory:
    """The bundled phrase category inventory."""
    return parse_inventory("categories", _bundled("categories.txt"))


def default_functions() -> Inventory:
    """The bundled edge function label inventory."""
    return parse_inventory("functions", _bundled("functions.txt"))
