"""Shared fixtures and the random document generator.

The generator produces documents that satisfy every constraint the
validator can check, because those constraints are exactly the conditions
under which the text format round-trips losslessly.  Tests that need
hostile input build it by hand.
"""

from __future__ import annotations

import math
import random
from pathlib import Path

import pytest

from contribkit.mpfile import Document, KeyValueList, Section, Table
from contribkit.recipes import PolarizedPair, SpectrumSeries

GOLDEN = Path(__file__).parent / "golden" / "example1.mpf"

NAME_CHARS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _-()µ°ÅαΔ."
KEY_CHARS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _-µ°"
VALUE_CHARS = KEY_CHARS + ",:%()~'"
ELEMENTS = ["H", "Li", "C", "N", "O", "Na", "Al", "Si", "Fe", "Ni", "Cu", "Pt", "Au"]


def _text(rng: random.Random, chars: str, lo: int, hi: int) -> str:
    n = rng.randint(lo, hi)
    s = "".join(rng.choice(chars) for _ in range(n)).strip()
    return s or rng.choice(chars.replace(" ", ""))


def _key(rng: random.Random) -> str:
    key = _text(rng, KEY_CHARS, 1, 14)
    while key.startswith("#") or key.startswith(">>>"):
        key = _text(rng, KEY_CHARS, 1, 14)
    return key


def _value(rng: random.Random) -> str:
    if rng.random() < 0.05:
        return ""
    return _text(rng, VALUE_CHARS, 1, 30)


def random_number(rng: random.Random) -> float:
    kind = rng.random()
    if kind < 0.3:
        return float(rng.randint(-10_000, 10_000))
    if kind < 0.6:
        return rng.uniform(-1e3, 1e3)
    if kind < 0.8:
        return rng.uniform(-1, 1) * 10.0 ** rng.randint(-12, -1)
    return rng.uniform(-1, 1) * 10.0 ** rng.randint(1, 18)


def _text_cell(rng: random.Random, first_column: bool) -> str:
    # a leading letter keeps the cell from looking numeric
    cell = rng.choice("abcdefghijklmnopqrstuvwxyz") + _text(
        rng, "abcdefghijklmnopqrstuvwxyz0123456789 -_µ°", 0, 10
    )
    cell = cell.strip()
    if first_column and (cell.startswith("#") or cell.startswith(">>>")):
        cell = "x" + cell
    return cell


def random_table(rng: random.Random, max_rows: int = 50) -> Table:
    n_cols = rng.randint(2, 8)
    columns = []
    seen: set[str] = set()
    for c in range(n_cols):
        name = _text(rng, KEY_CHARS, 1, 10)
        while name in seen or (c == 0 and (name.startswith("#") or name.startswith(">>>"))):
            name = _text(rng, KEY_CHARS, 1, 10)
        seen.add(name)
        columns.append(name)
    numeric = [rng.random() < 0.7 for _ in range(n_cols)]
    n_rows = rng.choice([0, 1, 2, 3, 5, 8, rng.randint(0, max_rows)])
    rows: list[list[float | str]] = []
    for _ in range(n_rows):
        rows.append(
            [
                random_number(rng) if numeric[c] else _text_cell(rng, c == 0)
                for c in range(n_cols)
            ]
        )
    return Table(columns=columns, rows=rows)


def random_composition(rng: random.Random) -> str:
    parts = []
    for symbol in rng.sample(ELEMENTS, rng.randint(1, 4)):
        count = rng.choice([0, 0, 2, 3, 7, 20, 80])
        parts.append(symbol if count == 0 else f"{symbol}{count}")
    return "".join(parts)


def random_root_name(rng: random.Random, taken: set[str]) -> str:
    while True:
        kind = rng.random()
        if kind < 0.4:
            name = random_composition(rng)
        elif kind < 0.7:
            name = f"{rng.choice(['por', 'abx', 'lab7'])}-{rng.randint(1, 9999)}"
        elif kind < 0.8:
            name = f"mp-{rng.randint(1, 10**6)}"
        else:
            name = _text(rng, NAME_CHARS, 1, 20)
            if name.startswith(">"):
                continue
        if name not in taken and name != "GENERAL":
            taken.add(name)
            return name


def _random_section(rng: random.Random, name: str, level: int, budget: list[int]) -> Section:
    section = Section(name, level)
    body = rng.random()
    if body < 0.55:
        kv = KeyValueList()
        used: set[str] = set()
        for _ in range(rng.randint(1, 8)):
            key = _key(rng)
            if key in used:
                continue
            used.add(key)
            kv.append(key, _value(rng))
        section.body = kv
    elif body < 0.8:
        section.body = random_table(rng)
    # else: stays an empty key-value list
    if level < 6 and budget[0] > 0:
        taken: set[str] = set()
        for _ in range(rng.randint(0, 3)):
            if budget[0] <= 0:
                break
            budget[0] -= 1
            child_name = _text(rng, NAME_CHARS, 1, 16)
            while child_name in taken or child_name.startswith(">"):
                child_name = _text(rng, NAME_CHARS, 1, 16)
            taken.add(child_name)
            section.children.append(_random_section(rng, child_name, level + 1, budget))
    return section


def random_document(rng: random.Random) -> Document:
    """A structurally valid document: round-trips exactly through the text
    format.  Root names mostly parse as identifiers but don't have to."""
    taken: set[str] = set()
    roots = []
    budget = [rng.randint(0, 25)]
    for _ in range(rng.randint(0, 4)):
        roots.append(_random_section(rng, random_root_name(rng, taken), 1, budget))
    if rng.random() < 0.3 and roots:
        general = _random_section(rng, "GENERAL", 1, budget)
        roots.insert(rng.randrange(len(roots) + 1), general)
    return Document(roots)


def random_submission(rng: random.Random, index: int, project: str | None = None) -> str:
    """One small single-root submission file with a table, as text."""
    if project:
        name = f"{project}-{index}"
    else:
        name = random_composition(rng)
    lines = [
        f">>> {name}",
        f"batch: {index}",
        f"pore size: {random_number(rng)!r}",
        f"surface area: {random_number(rng)!r}",
        ">>>> Readings",
        "T,signal",
    ]
    for _ in range(3):
        lines.append(f"{rng.randint(250, 400)},{rng.uniform(0, 2)!r}")
    return "\n".join(lines) + "\n"


def asgi_stream_bulk(app, chunks, api_key: str | None = None, query: str = ""):
    """POST a chunked byte stream to the bulk endpoint over raw ASGI.

    The HTTP test client buffers iterator bodies into one message, which
    defeats any check that the server never held the whole stream; driving
    the ASGI interface directly delivers one ``http.request`` message per
    chunk, like a real chunked upload.  Returns (status, body_bytes).
    """
    import asyncio

    async def run():
        headers = [(b"host", b"test")]
        if api_key is not None:
            headers.append((b"x-api-key", api_key.encode()))
        scope = {
            "type": "http",
            "asgi": {"version": "3.0", "spec_version": "2.1"},
            "http_version": "1.1",
            "method": "POST",
            "scheme": "http",
            "path": "/api/v1/contributions/bulk",
            "raw_path": b"/api/v1/contributions/bulk",
            "query_string": query.encode(),
            "root_path": "",
            "headers": headers,
            "client": ("testclient", 50000),
            "server": ("testserver", 80),
        }
        it = iter(chunks)
        finished = False

        async def receive():
            nonlocal finished
            try:
                chunk = next(it)
            except StopIteration:
                if not finished:
                    finished = True
                    return {"type": "http.request", "body": b"", "more_body": False}
                return {"type": "http.disconnect"}
            return {"type": "http.request", "body": chunk, "more_body": True}

        status = 0
        body = bytearray()

        async def send(message):
            nonlocal status
            if message["type"] == "http.response.start":
                status = message["status"]
            elif message["type"] == "http.response.body":
                body.extend(message.get("body", b""))

        await app(scope, receive, send)
        return status, bytes(body)

    return asyncio.run(run())


def synthetic_pair(rng: random.Random, start: float = 700.0, stop: float = 740.0,
                   n: int = 100) -> PolarizedPair:
    """A plausible absorption-edge pair: flat preedge, sigmoid step, one peak.

    Intensities stay strictly positive and the two channels differ by a
    smooth dichroic term, so every recipe stage has well-conditioned input.
    """
    center = rng.uniform(start + 0.35 * (stop - start), start + 0.65 * (stop - start))
    width = rng.uniform(0.5, 2.0)
    step = rng.uniform(0.5, 3.0)
    peak = rng.uniform(0.2, 2.0)
    base = rng.uniform(0.05, 0.5)
    dich = rng.uniform(0.05, 0.3)
    energy = [start + (stop - start) * i / (n - 1) for i in range(n)]
    plus, minus = [], []
    for e in energy:
        edge = step / (1.0 + math.exp(-(e - center) / width))
        bump = peak * math.exp(-((e - center) / (3.0 * width)) ** 2)
        signal = dich * math.exp(-((e - center) / (2.0 * width)) ** 2)
        plus.append(base + edge + bump + signal)
        minus.append(base + edge + bump - signal)
    return PolarizedPair(
        SpectrumSeries(tuple(energy), tuple(plus)),
        SpectrumSeries(tuple(energy), tuple(minus)),
    )


@pytest.fixture(scope="session")
def golden_path() -> Path:
    return GOLDEN


@pytest.fixture(scope="session")
def golden_text() -> str:
    return GOLDEN.read_text(encoding="utf-8")
