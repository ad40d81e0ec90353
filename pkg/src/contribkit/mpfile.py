"""Parsing, validation and serialization of the MPFile contribution format.

An MPFile is a line-oriented UTF-8 text format for hierarchical scientific
records.  Section headers are runs of ``>`` (three for a root section, one
more per nesting level) followed by the section name.  Section bodies are
either ``key: value`` pairs or embedded CSV tables.  A reserved ``GENERAL``
root holds shared metadata that :func:`embed_general` folds into every other
root section before the document is split into contributions.

The format round-trips exactly: ``parse_mpfile(serialize_mpfile(doc)) == doc``
for any document that satisfies the constraints checked by
:func:`validate_document`, and serialization is deterministic, so
``serialize . parse`` is a fixed point after one application.
"""

from __future__ import annotations

import copy
import math
import re
from dataclasses import dataclass, field

__all__ = [
    "GENERAL_SECTION",
    "Cell",
    "Document",
    "EmbedCollisionError",
    "Finding",
    "KeyValueList",
    "MPFileError",
    "MPFileParseError",
    "Section",
    "Table",
    "ValidationReport",
    "embed_general",
    "format_cell",
    "format_number",
    "parse_cell",
    "parse_mpfile",
    "parse_with_findings",
    "serialize_mpfile",
    "validate_document",
    "validate_text",
]

GENERAL_SECTION = "GENERAL"

# A header is a run of at least three '>' followed by a non-blank name.
# Root sections carry three '>', every further '>' adds one nesting level.
_HEADER_RE = re.compile(r"^(>{3,})\s*(\S.*?)\s*$")

# Decimal or scientific literal; anything else stays text.
_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")

Cell = "float | str"


def parse_cell(text: str) -> float | str:
    """Trim a raw cell and parse it as a 64-bit float when it looks numeric."""
    text = text.strip()
    if _NUMBER_RE.fullmatch(text):
        return float(text)
    return text


def format_number(value: float) -> str:
    """Shortest decimal form that re-parses to exactly the same float.

    Integral values print without a fractional part so that spectra rows such
    as ``820,0.0104944,-0.00140602`` keep their plain integer energies.
    """
    value = float(value)
    if value.is_integer() and abs(value) <= 2**53:
        return str(int(value))
    return repr(value)


def format_cell(cell: float | str) -> str:
    if isinstance(cell, str):
        return cell
    return format_number(cell)


@dataclass(frozen=True)
class Finding:
    """One parser or validator observation, anchored to a source line."""

    line: int
    code: str
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: [{self.code}] {self.message}"


class MPFileError(Exception):
    pass


class MPFileParseError(MPFileError):
    """Structural parse failure; carries every finding, not just the first."""

    def __init__(self, findings: list[Finding]):
        self.findings = list(findings)
        shown = "; ".join(str(f) for f in self.findings[:3])
        if len(self.findings) > 3:
            shown += f"; and {len(self.findings) - 3} more"
        super().__init__(shown)


class EmbedCollisionError(MPFileError):
    """A shared section and a local section of the same name have
    irreconcilable body shapes (table vs key-value)."""

    def __init__(self, path: str):
        self.path = path
        super().__init__(
            f"cannot embed shared section {path!r}: table and key-value bodies collide"
        )


@dataclass
class KeyValueList:
    """Ordered ``key: value`` entries; keys are unique within one section."""

    entries: list[tuple[str, str]] = field(default_factory=list)
    # Source line per entry; parallel to ``entries`` when produced by the
    # parser, empty for documents built in code.  Never part of equality.
    lines: list[int] = field(default_factory=list, compare=False, repr=False)

    def get(self, key: str) -> str | None:
        for k, v in self.entries:
            if k == key:
                return v
        return None

    def has(self, key: str) -> bool:
        return any(k == key for k, _ in self.entries)

    def append(self, key: str, value: str, line: int = 0) -> None:
        self.entries.append((key, value))
        self.lines.append(line)

    def remove(self, key: str) -> None:
        keep = [(i, kv) for i, kv in enumerate(self.entries) if kv[0] != key]
        self.entries = [kv for _, kv in keep]
        if self.lines:
            lines = self.lines
            self.lines = [lines[i] if i < len(lines) else 0 for i, _ in keep]

    def entry_line(self, index: int) -> int:
        return self.lines[index] if index < len(self.lines) else 0


@dataclass
class Table:
    """Embedded CSV table: a header of column names and typed rows."""

    columns: list[str]
    rows: list[list[float | str]] = field(default_factory=list)
    header_line: int = field(default=0, compare=False, repr=False)
    row_lines: list[int] = field(default_factory=list, compare=False, repr=False)

    def row_line(self, index: int) -> int:
        return self.row_lines[index] if index < len(self.row_lines) else 0


@dataclass
class Section:
    """One node of the document tree.

    ``body`` is exclusively a :class:`KeyValueList` or a :class:`Table`; an
    empty body is an empty key-value list.  Children sit exactly one level
    deeper than their parent.
    """

    name: str
    level: int = 1
    body: KeyValueList | Table = field(default_factory=KeyValueList)
    children: list["Section"] = field(default_factory=list)
    line: int = field(default=0, compare=False, repr=False)

    def child(self, name: str) -> "Section | None":
        for c in self.children:
            if c.name == name:
                return c
        return None

    def find(self, *names: str) -> "Section | None":
        """Descend through named children; None when any hop is missing."""
        node: Section | None = self
        for name in names:
            if node is None:
                return None
            node = node.child(name)
        return node

    def get(self, key: str) -> str | None:
        if isinstance(self.body, KeyValueList):
            return self.body.get(key)
        return None

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass
class Document:
    """A parsed MPFile: an ordered forest of uniquely named root sections."""

    roots: list[Section] = field(default_factory=list)
    source_name: str | None = field(default=None, compare=False)

    def root(self, name: str) -> Section | None:
        for r in self.roots:
            if r.name == name:
                return r
        return None

    def copy(self) -> "Document":
        return Document([copy.deepcopy(r) for r in self.roots], self.source_name)

    def walk(self):
        for r in self.roots:
            yield from r.walk()


def _is_comment(line: str) -> bool:
    return line.lstrip().startswith("#")


def _classify_body_line(line: str) -> str:
    """'kv' when the first ':' precedes any ',', 'table' when at least two
    comma-separated fields carry no pre-comma ':', else 'invalid'."""
    colon = line.find(":")
    comma = line.find(",")
    if colon != -1 and (comma == -1 or colon < comma):
        return "kv"
    if comma != -1:
        return "table"
    return "invalid"


class _ParseRun:
    def __init__(self) -> None:
        self.findings: list[Finding] = []
        self.roots: list[Section] = []
        self.stack: list[Section] = []

    def error(self, line: int, code: str, message: str) -> None:
        self.findings.append(Finding(line, code, message))

    def open_section(self, lineno: int, level: int, name: str) -> None:
        if level > len(self.stack) + 1:
            self.error(
                lineno,
                "level-jump",
                f"section {name!r} at level {level} cannot attach: "
                f"deepest open section is level {len(self.stack)}",
            )
            level = len(self.stack) + 1
        section = Section(name, level, line=lineno)
        if level == 1:
            if any(r.name == name for r in self.roots):
                self.error(lineno, "duplicate-root", f"duplicate root section {name!r}")
            self.roots.append(section)
            self.stack = [section]
        else:
            del self.stack[level - 1 :]
            self.stack[-1].children.append(section)
            self.stack.append(section)

    def body_line(self, lineno: int, line: str) -> None:
        if not self.stack:
            self.error(lineno, "orphan-line", f"content before any section header: {line!r}")
            return
        section = self.stack[-1]
        kind = _classify_body_line(line)
        body = section.body
        if kind == "invalid":
            self.error(
                lineno,
                "invalid-line",
                f"line is neither 'key: value' nor a table row: {line!r}",
            )
            return
        if isinstance(body, Table):
            if kind != "table":
                self.error(
                    lineno,
                    "mixed-body",
                    f"key-value line inside the table body of {section.name!r}",
                )
                return
            body.rows.append([parse_cell(c) for c in line.split(",")])
            body.row_lines.append(lineno)
            return
        if kind == "table":
            if body.entries:
                self.error(
                    lineno,
                    "mixed-body",
                    f"table row inside the key-value body of {section.name!r}",
                )
                return
            section.body = Table(
                columns=[c.strip() for c in line.split(",")], header_line=lineno
            )
            return
        key, _, value = line.partition(":")
        key = key.strip()
        value = value.strip()
        if not key:
            self.error(lineno, "empty-key", "key-value line with an empty key")
            return
        if body.has(key):
            self.error(
                lineno,
                "duplicate-key",
                f"duplicate key {key!r} in section {section.name!r}",
            )
            return
        body.append(key, value, lineno)


def parse_with_findings(text: str, source_name: str | None = None) -> tuple[Document, list[Finding]]:
    """Best-effort parse returning the document plus every structural finding.

    Recovery keeps going after an error (mis-leveled sections are clamped to
    the deepest open parent, offending body lines are skipped) so that one
    report can list all problems in a file.
    """
    run = _ParseRun()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or _is_comment(line):
            continue
        header = _HEADER_RE.match(line)
        if header:
            run.open_section(lineno, len(header.group(1)) - 2, header.group(2))
        else:
            run.body_line(lineno, line)
    return Document(run.roots, source_name), run.findings


def parse_mpfile(text: str, source_name: str | None = None) -> Document:
    """Parse MPFile text, raising :class:`MPFileParseError` on any structural
    problem (level jumps, mixed bodies, duplicate keys, duplicate roots)."""
    doc, findings = parse_with_findings(text, source_name)
    if findings:
        raise MPFileParseError(findings)
    return doc


def serialize_mpfile(doc: Document) -> str:
    """Deterministic text form: same document, byte-identical output."""
    lines: list[str] = []
    for root in doc.roots:
        _emit_section(root, lines)
    return "\n".join(lines) + "\n" if lines else ""


def _emit_section(section: Section, lines: list[str]) -> None:
    lines.append(">" * (section.level + 2) + " " + section.name)
    body = section.body
    if isinstance(body, Table):
        lines.append(",".join(body.columns))
        for row in body.rows:
            lines.append(",".join(format_cell(c) for c in row))
    else:
        for key, value in body.entries:
            lines.append(f"{key}: {value}" if value else f"{key}:")
    for child in section.children:
        _emit_section(child, lines)


# -- GENERAL embedding --------------------------------------------------------


def _has_real_body(section: Section) -> bool:
    return isinstance(section.body, Table) or bool(section.body.entries)


def _merge_into(local: Section, shared: Section, path: str) -> None:
    lb, sb = local.body, shared.body
    if isinstance(sb, Table):
        if isinstance(lb, KeyValueList) and lb.entries:
            raise EmbedCollisionError(path)
        if isinstance(lb, KeyValueList):
            local.body = copy.deepcopy(sb)
        # both tables: the local table is authoritative
    elif sb.entries:
        if isinstance(lb, Table):
            raise EmbedCollisionError(path)
        present = {k for k, _ in lb.entries}
        for i, (key, value) in enumerate(sb.entries):
            if key not in present:
                lb.append(key, value, sb.entry_line(i))
    for shared_child in shared.children:
        target = local.child(shared_child.name)
        if target is None:
            local.children.append(copy.deepcopy(shared_child))
        else:
            _merge_into(target, shared_child, f"{path}/{shared_child.name}")


def embed_general(doc: Document) -> Document:
    """Fold the GENERAL root into every other root section.

    The merge is a deep, key-by-key union in which the contribution's own
    entries win over shared ones; the GENERAL root is dropped from the
    result.  Without a GENERAL root the document is returned unchanged, which
    also makes the operation idempotent.
    """
    general = doc.root(GENERAL_SECTION)
    if general is None:
        return doc
    roots = []
    for root in doc.roots:
        if root.name == GENERAL_SECTION:
            continue
        merged = copy.deepcopy(root)
        _merge_into(merged, general, merged.name)
        roots.append(merged)
    return Document(roots, doc.source_name)


# -- validation ---------------------------------------------------------------


@dataclass
class ValidationReport:
    """All findings for one document; empty ``errors`` means accepted."""

    errors: list[Finding] = field(default_factory=list)
    warnings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def extend(self, other: "ValidationReport") -> None:
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)


def _check_name(name: str, line: int, what: str, report: ValidationReport) -> None:
    if not name or name != name.strip() or "\n" in name or name.startswith(">"):
        report.errors.append(
            Finding(line, "bad-name", f"{what} name {name!r} cannot survive a round-trip")
        )


def _check_key_value(section: Section, report: ValidationReport) -> None:
    body = section.body
    assert isinstance(body, KeyValueList)
    seen: set[str] = set()
    for i, (key, value) in enumerate(body.entries):
        line = body.entry_line(i) or section.line
        if key in seen:
            report.errors.append(
                Finding(line, "duplicate-key", f"duplicate key {key!r} in section {section.name!r}")
            )
        seen.add(key)
        if (
            not key
            or key != key.strip()
            or ":" in key
            or "," in key
            or "\n" in key
            or key.startswith("#")
            or key.startswith(">>>")
        ):
            report.errors.append(
                Finding(line, "bad-key", f"key {key!r} cannot survive a round-trip")
            )
        if "\n" in value or value != value.strip():
            report.errors.append(
                Finding(line, "bad-value", f"value for key {key!r} cannot survive a round-trip")
            )
        elif not value:
            report.warnings.append(Finding(line, "empty-value", f"key {key!r} has an empty value"))


def _check_cell_text(cell: str, first_column: bool) -> bool:
    if "," in cell or "\n" in cell or ":" in cell or cell != cell.strip():
        return False
    if _NUMBER_RE.fullmatch(cell):
        return False  # would re-parse as a number
    if first_column and (cell.startswith("#") or cell.startswith(">>>")):
        return False
    return True


def _check_table(section: Section, report: ValidationReport) -> None:
    table = section.body
    assert isinstance(table, Table)
    line = table.header_line or section.line
    if not table.columns:
        report.errors.append(Finding(line, "empty-table", f"table in {section.name!r} has no columns"))
        return
    if len(table.columns) == 1:
        report.errors.append(
            Finding(
                line,
                "narrow-table",
                f"table in {section.name!r} has a single column; the text format "
                "needs at least two to recognize a table",
            )
        )
    seen_cols: set[str] = set()
    for c, name in enumerate(table.columns):
        bad = not name or name != name.strip() or "," in name or ":" in name or "\n" in name
        if c == 0 and (name.startswith("#") or name.startswith(">>>")):
            bad = True  # the header line would re-parse as a comment or section
        if bad:
            report.errors.append(
                Finding(line, "bad-column", f"column name {name!r} cannot survive a round-trip")
            )
        if name in seen_cols:
            report.warnings.append(
                Finding(line, "duplicate-column", f"duplicate column name {name!r}")
            )
        seen_cols.add(name)
    numeric = [False] * len(table.columns)
    textual = [False] * len(table.columns)
    for r, row in enumerate(table.rows):
        row_line = table.row_line(r) or line
        if len(row) != len(table.columns):
            report.errors.append(
                Finding(
                    row_line,
                    "ragged-row",
                    f"row has {len(row)} cells, table {section.name!r} has "
                    f"{len(table.columns)} columns",
                )
            )
        for c, cell in enumerate(row[: len(table.columns)]):
            if isinstance(cell, str):
                textual[c] = True
                if not _check_cell_text(cell, first_column=(c == 0)):
                    report.errors.append(
                        Finding(row_line, "bad-cell", f"cell {cell!r} cannot survive a round-trip")
                    )
            else:
                numeric[c] = True
                if not math.isfinite(cell):
                    report.errors.append(
                        Finding(row_line, "bad-cell", f"non-finite number {cell!r} in table")
                    )
    for c, (has_num, has_text) in enumerate(zip(numeric, textual)):
        if has_num and has_text:
            report.errors.append(
                Finding(
                    line,
                    "mixed-column",
                    f"column {table.columns[c]!r} of {section.name!r} mixes numbers and text",
                )
            )


def _validate_section(section: Section, parent_level: int, report: ValidationReport) -> None:
    _check_name(section.name, section.line, "section", report)
    if section.level != parent_level + 1:
        report.errors.append(
            Finding(
                section.line,
                "bad-level",
                f"section {section.name!r} has level {section.level}, "
                f"expected {parent_level + 1}",
            )
        )
    if isinstance(section.body, Table):
        _check_table(section, report)
    else:
        _check_key_value(section, report)
        if not section.body.entries and not section.children:
            report.warnings.append(
                Finding(section.line, "empty-section", f"section {section.name!r} is empty")
            )
    seen: set[str] = set()
    for child in section.children:
        if child.name in seen:
            report.errors.append(
                Finding(
                    child.line,
                    "duplicate-section",
                    f"duplicate section {child.name!r} under {section.name!r}",
                )
            )
        seen.add(child.name)
        _validate_section(child, section.level, report)


def validate_document(doc: Document) -> ValidationReport:
    """Check every structural invariant plus submission rules.

    Beyond tree shape (levels, unique roots and siblings, exclusive bodies)
    this checks that every non-GENERAL root name parses as an identifier,
    that table columns carrying numbers are fully numeric, and that all keys,
    values and cells survive serialization unchanged.  All findings are
    reported, not just the first.
    """
    from .identifiers import IdentifierError, parse_identifier

    report = ValidationReport()
    seen: set[str] = set()
    for root in doc.roots:
        if root.name in seen:
            report.errors.append(
                Finding(root.line, "duplicate-root", f"duplicate root section {root.name!r}")
            )
        seen.add(root.name)
        if root.name != GENERAL_SECTION:
            try:
                parse_identifier(root.name)
            except IdentifierError as exc:
                report.errors.append(
                    Finding(root.line, "bad-identifier", f"root {root.name!r}: {exc}")
                )
        _validate_section(root, 0, report)
    return report


def validate_text(text: str, source_name: str | None = None) -> ValidationReport:
    """Parse leniently and validate; parser findings become report errors."""
    doc, findings = parse_with_findings(text, source_name)
    report = ValidationReport(errors=list(findings))
    seen = {(f.line, f.code) for f in findings}
    inner = validate_document(doc)
    report.errors.extend(f for f in inner.errors if (f.line, f.code) not in seen)
    report.warnings.extend(inner.warnings)
    return report
