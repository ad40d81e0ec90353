"""Capture REST responses from a pinned local service as viewer test fixtures.

The viewer is a pure client, so its tests run against byte-exact copies of
what the service actually returns.  Everything here goes through the HTTP
surface of a deterministic in-memory service (fixed RNG and clock), which
keeps the captured JSON stable across runs.

Run from the repository root:

    python3 frontend/scripts/capture_fixtures.py
"""

from __future__ import annotations

import json
import math
import random
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from contribkit import cli
from contribkit.config import ServiceConfig
from contribkit.service import create_app
from contribkit.store import AccessContext, ContributionStore

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
REPO = Path(__file__).resolve().parents[2]

ADMIN = AccessContext(account="curator", groups=frozenset(), is_admin=True)
KEYS = {"k-admin": ADMIN}

NO_TABLE_DOC = """\
>>> Fe2O3
Sample Name: hematite pellet A3
>>>> Synthesis
Method: solid state reaction
Temperature: 1200 C
>>>> Characterization
Instrument: lab diffractometer
Scan: theta-2theta
"""

SKELETON = """\
>>> Co50Pt50
>>>> Co XMCD
>>>>> get xmcd
energy range: 700 740
>>>>> scaling preedge to 1
preedge range: 700 705
>>>>> xas normalization to min and max
energy range: 700 740
"""


def synthetic_raw(directory: Path) -> None:
    """Write a plus/minus spectrum pair shaped like a soft absorption edge."""
    rng = random.Random(7)
    energies = [695.0 + 50.0 * i / 159 for i in range(160)]
    for sign, stem in ((1.0, "Co XMCD.plus"), (-1.0, "Co XMCD.minus")):
        lines = []
        for e in energies:
            edge = 1.0 / (1.0 + math.exp(-(e - 720.0) / 1.5))
            bump = 0.6 * math.exp(-((e - 722.0) ** 2) / 8.0)
            dichroic = sign * 0.08 * math.exp(-((e - 721.0) ** 2) / 6.0)
            value = 0.2 + edge + bump + dichroic + 0.003 * rng.random()
            lines.append(f"{e!r}\t{value!r}")
        (directory / f"{stem}.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def main() -> int:
    store = ContributionStore(rng=random.Random(0), clock=lambda: 0.0)
    app = create_app(store=store, config=ServiceConfig(api_keys=KEYS))
    client = TestClient(app)
    headers = {"X-API-KEY": "k-admin", "content-type": "text/plain; charset=utf-8"}

    out: dict[str, bytes] = {}

    def submit(text: str) -> list[str]:
        resp = client.post("/api/v1/contributions", content=text.encode(), headers=headers)
        assert resp.status_code == 201, resp.text
        return [item["cid"] for item in resp.json()["results"]]

    def capture(name: str, path: str) -> dict:
        resp = client.get(path, headers={"X-API-KEY": "k-admin"})
        assert resp.status_code == 200, f"{path}: {resp.text}"
        out[name] = resp.content
        return resp.json()

    # 1. The golden contribution: two spectra tables plus the shared-section tree.
    golden = (REPO / "tests" / "golden" / "example1.mpf").read_text(encoding="utf-8")
    (golden_cid,) = submit(golden)
    capture("golden_detail", f"/api/v1/contributions/{golden_cid}")

    # 2. Full-length derived spectra: run the recipe CLI on a skeleton, then submit.
    with tempfile.TemporaryDirectory() as tmp:
        tmpdir = Path(tmp)
        raw = tmpdir / "raw"
        raw.mkdir()
        synthetic_raw(raw)
        skeleton = tmpdir / "skeleton.mpf"
        skeleton.write_text(SKELETON, encoding="utf-8")
        applied = tmpdir / "applied.mpf"
        code = cli.main(
            ["apply", str(skeleton), "--raw", str(raw), "--out", str(applied)]
        )
        assert code == 0, "recipe application failed"
        (synthetic_cid,) = submit(applied.read_text(encoding="utf-8"))
    capture("synthetic_detail", f"/api/v1/contributions/{synthetic_cid}")

    # 3. A metadata-only contribution: tree rendering without charts.
    (plain_cid,) = submit(NO_TABLE_DOC)
    capture("notable_detail", f"/api/v1/contributions/{plain_cid}")

    # 4. Corner fixture: four released records at the corners of the unit square.
    for i, (x, y) in enumerate([(0, 0), (0, 1), (1, 0), (1, 1)]):
        (cid,) = submit(f">>> cor-{i}\nx: {x}\ny: {y}\n")
        for state in ("approved", "released"):
            resp = client.patch(
                f"/api/v1/contributions/{cid}/state",
                content=json.dumps({"state": state}).encode(),
                headers={"X-API-KEY": "k-admin", "content-type": "application/json"},
            )
            assert resp.status_code == 200, resp.text

    capture("corner_grid_2x2", "/api/v1/index/grid?x=x&y=y&project=cor&nx=2&ny=2")
    capture("corner_grid_4x2", "/api/v1/index/grid?x=x&y=y&project=cor&nx=4&ny=2")
    capture(
        "corner_region_full",
        "/api/v1/index/region?x=x&y=y&project=cor&x0=0&x1=1&y0=0&y1=1&nx=2&ny=2",
    )
    capture(
        "corner_region_sub",
        "/api/v1/index/region?x=x&y=y&project=cor&x0=-0.1&x1=0.4&y0=-0.1&y1=1.1&nx=2&ny=2",
    )

    # 5. A listing page for the index view.
    capture("list_all", "/api/v1/contributions?limit=50")

    FIXTURES.mkdir(parents=True, exist_ok=True)
    for name, payload in sorted(out.items()):
        (FIXTURES / f"{name}.json").write_bytes(payload)
        print(f"wrote {name}.json ({len(payload)} bytes)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
