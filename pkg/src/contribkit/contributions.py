"""Contribution drafts: one root section turned into a submittable unit.

After GENERAL embedding a document is split into per-root drafts.  Each
draft keeps the full root section so the original file layout can be
reproduced verbatim, and exposes two derived views on top of it: ``tree``
(the section with table-bodied descendants pruned) and ``tables`` (those
pruned tables keyed by section name, paths preserved).
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

from .identifiers import Identifier, IdentifierError, ProjectId, parse_identifier
from .mpfile import GENERAL_SECTION, Document, KeyValueList, MPFileError, Section, Table

__all__ = ["Contribution", "SplitError", "TableRef", "split_contributions"]


class SplitError(MPFileError):
    def __init__(self, root: str, reason: str):
        self.root = root
        super().__init__(f"root section {root!r}: {reason}")


@dataclass(frozen=True)
class TableRef:
    """A table together with the section path it was found under."""

    name: str
    path: tuple[str, ...]
    table: Table


@dataclass
class Contribution:
    """One identifier-keyed submission unit.

    ``section`` is the complete root section including its tables;
    ``cid``/``expected_revision`` are optional targeting metadata for updates.
    """

    identifier: Identifier
    section: Section
    project: str | None = None
    cid: str | None = None
    expected_revision: int | None = None

    @property
    def name(self) -> str:
        return self.section.name

    @property
    def tree(self) -> Section:
        """The metadata tree: the root section minus table-bodied sections."""
        return _prune_tables(self.section)

    @property
    def tables(self) -> dict[str, TableRef]:
        """All table-bodied descendants keyed by their section name."""
        found: dict[str, TableRef] = {}
        _collect_tables(self.section, (), found)
        return found

    def document(self) -> Document:
        """The draft as a standalone single-root document."""
        return Document([copy.deepcopy(self.section)])


def _prune_tables(section: Section) -> Section:
    body = KeyValueList() if isinstance(section.body, Table) else copy.deepcopy(section.body)
    pruned = Section(section.name, section.level, body, line=section.line)
    for child in section.children:
        if isinstance(child.body, Table) and not child.children:
            continue
        pruned.children.append(_prune_tables(child))
    return pruned


def _collect_tables(section: Section, path: tuple[str, ...], found: dict[str, TableRef]) -> None:
    if isinstance(section.body, Table):
        found[section.name] = TableRef(section.name, path + (section.name,), section.body)
    for child in section.children:
        _collect_tables(child, path + (section.name,), found)


def split_contributions(doc: Document, project: str | None = None) -> list[Contribution]:
    """Turn an embedded document into one draft per root section.

    The GENERAL root must already be folded in; a surviving GENERAL root is
    an error here rather than a silent re-embed.  Root names that parse as
    project identifiers override any ``project`` default.
    """
    drafts: list[Contribution] = []
    for root in doc.roots:
        if root.name == GENERAL_SECTION:
            raise SplitError(root.name, "shared section still present; embed it first")
        try:
            identifier = parse_identifier(root.name)
        except IdentifierError as exc:
            raise SplitError(root.name, str(exc)) from exc
        scope = identifier.project if isinstance(identifier, ProjectId) else project
        drafts.append(Contribution(identifier, copy.deepcopy(root), project=scope))
    return drafts
