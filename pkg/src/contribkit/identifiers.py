"""Root-section identifiers: database ids, project handles, compositions.

Every non-GENERAL root section of a contribution file is named by one of
three identifier kinds:

* ``mp-<digits>`` points at an existing database record.  The ``mp-``
  prefix is reserved, so ``mp-foo`` is an error rather than a project
  handle.
* ``<project>-<label>`` is a free-form handle whose project prefix is
  everything before the first dash (lowercase letters and digits only).
* A bare chemical formula such as ``Ni20Fe80Pt10`` identifies a material
  by composition.  Counts are reduced by their greatest common divisor on
  parsing, so ``Ni20Fe80Pt10`` and ``Ni2Fe8Pt`` are the same composition.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

__all__ = [
    "CompositionId",
    "CoreId",
    "Identifier",
    "IdentifierError",
    "ProjectId",
    "parse_identifier",
]

_CORE_RE = re.compile(r"mp-(\d+)")
_PROJECT_RE = re.compile(r"([a-z0-9]+)-(.+)", re.DOTALL)
_ELEMENT_RE = re.compile(r"([A-Z][a-z]?)(\d*)")


class IdentifierError(ValueError):
    pass


@dataclass(frozen=True)
class CoreId:
    """Reference to an existing database record, ``mp-<digits>``."""

    number: int

    @property
    def canonical(self) -> str:
        return f"mp-{self.number}"

    def __str__(self) -> str:
        return self.canonical


@dataclass(frozen=True)
class ProjectId:
    """Free-form handle ``<project>-<label>``, split at the first dash."""

    project: str
    label: str

    @property
    def canonical(self) -> str:
        return f"{self.project}-{self.label}"

    def __str__(self) -> str:
        return self.canonical


@dataclass(frozen=True)
class CompositionId:
    """A chemical composition in first-appearance element order.

    ``elements`` holds ``(symbol, count)`` pairs with the counts already
    reduced by their collective GCD.  ``match_key`` is order-insensitive, so
    ``NiFe`` and ``FeNi`` compare equal for correlation purposes while the
    canonical string keeps the author's element order.
    """

    elements: tuple[tuple[str, int], ...]

    @property
    def canonical(self) -> str:
        return "".join(s if n == 1 else f"{s}{n}" for s, n in self.elements)

    @property
    def match_key(self) -> tuple[tuple[str, int], ...]:
        return tuple(sorted(self.elements))

    def __str__(self) -> str:
        return self.canonical


Identifier = CoreId | ProjectId | CompositionId


def _parse_composition(name: str) -> CompositionId:
    counts: dict[str, int] = {}
    order: list[str] = []
    pos = 0
    while pos < len(name):
        m = _ELEMENT_RE.match(name, pos)
        if not m:
            raise IdentifierError(
                f"{name!r} is not a database id, a project handle, or a composition"
            )
        symbol = m.group(1)
        count = int(m.group(2)) if m.group(2) else 1
        if count == 0:
            raise IdentifierError(f"element {symbol!r} in {name!r} has a zero count")
        if symbol not in counts:
            counts[symbol] = 0
            order.append(symbol)
        counts[symbol] += count
        pos = m.end()
    if not order:
        raise IdentifierError("empty identifier")
    divisor = math.gcd(*counts.values())
    return CompositionId(tuple((s, counts[s] // divisor) for s in order))


def parse_identifier(name: str) -> Identifier:
    """Classify a root-section name, trying database id, then project
    handle, then composition.  The ``mp-`` prefix never falls through: a
    malformed ``mp-...`` name is an error, not a project handle."""
    if name.startswith("mp-"):
        m = _CORE_RE.fullmatch(name)
        if not m:
            raise IdentifierError(
                f"{name!r} uses the reserved database prefix but is not mp-<digits>"
            )
        return CoreId(int(m.group(1)))
    m = _PROJECT_RE.fullmatch(name)
    if m:
        return ProjectId(m.group(1), m.group(2))
    return _parse_composition(name)
