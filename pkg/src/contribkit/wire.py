"""JSON wire forms shared by the REST service, the CLI preview, and tests.

Everything that crosses the HTTP boundary is encoded here so the bytes are
identical no matter which side produced them: compact separators, UTF-8
kept literal, keys in insertion order.
"""

from __future__ import annotations

import json
from typing import Any

from .mpfile import Document, KeyValueList, Section, Table, ValidationReport

__all__ = [
    "document_from_payload",
    "document_payload",
    "dumps",
    "loads",
    "report_payload",
    "section_from_payload",
    "section_payload",
    "table_payload",
]


def dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, allow_nan=False, separators=(",", ":"))


def loads(data: str | bytes) -> Any:
    return json.loads(data)


def table_payload(table: Table) -> dict[str, Any]:
    return {"columns": list(table.columns), "rows": [list(r) for r in table.rows]}


def section_payload(section: Section) -> dict[str, Any]:
    """Recursive section form: name plus either entries or a table, then
    children.  Entries stay an ordered pair list so key order survives."""
    out: dict[str, Any] = {"name": section.name}
    if isinstance(section.body, Table):
        out["table"] = table_payload(section.body)
    else:
        out["entries"] = [[k, v] for k, v in section.body.entries]
    if section.children:
        out["children"] = [section_payload(c) for c in section.children]
    return out


def section_from_payload(data: dict[str, Any], level: int = 1) -> Section:
    name = data.get("name")
    if not isinstance(name, str):
        raise ValueError("section payload needs a string 'name'")
    section = Section(name, level)
    if "table" in data:
        t = data["table"]
        section.body = Table(
            columns=[str(c) for c in t.get("columns", [])],
            rows=[[_cell(c) for c in row] for row in t.get("rows", [])],
        )
    else:
        body = KeyValueList()
        for pair in data.get("entries", []):
            k, v = pair
            body.append(str(k), str(v))
        section.body = body
    for child in data.get("children", []):
        section.children.append(section_from_payload(child, level + 1))
    return section


def _cell(value: Any) -> float | str:
    if isinstance(value, bool) or value is None:
        raise ValueError(f"table cell must be a number or text, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    return str(value)


def document_payload(doc: Document) -> dict[str, Any]:
    return {"roots": [section_payload(r) for r in doc.roots]}


def document_from_payload(data: dict[str, Any]) -> Document:
    roots = data.get("roots")
    if not isinstance(roots, list):
        raise ValueError("document payload needs a 'roots' list")
    return Document([section_from_payload(r) for r in roots])


def report_payload(report: ValidationReport) -> dict[str, Any]:
    return {
        "ok": report.ok,
        "errors": [[f.line, f.code, f.message] for f in report.errors],
        "warnings": [[f.line, f.code, f.message] for f in report.warnings],
    }
