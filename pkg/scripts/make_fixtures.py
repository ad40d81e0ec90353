#!/usr/bin/env python3
"""Generate synthetic fixtures for demos and benchmarks.

Writes, under the output directory:

    batch/doc00000.mpf …   contribution files for one project
    core.tsv               matching core materials index
    raw/<analysis>.plus.txt / .minus.txt   spectra for `contribkit apply`
    skeleton.mpf           recipe skeleton consuming the raw spectra

    python scripts/make_fixtures.py --out fixtures --count 200 --seed 1
"""

import argparse
import math
import random
from pathlib import Path

from contribkit.builder import CoreMaterial, save_core_index
from contribkit.identifiers import parse_identifier

ELEMENTS = ["Fe", "Ni", "Co", "Cu", "Mn", "O", "Si", "Al", "Ti", "Mg"]

SKELETON = """>>> Ni20Fe80Pt10
>>>> Ni XMCD
>>>>> get xmcd
energy range: 700 740
>>>>> scaling preedge to 1
preedge range: 700 705
>>>>> xas normalization to min and max
energy range: 700 740
"""


def contribution(rng: random.Random, project: str, i: int) -> str:
    lines = [f">>> {project}-{i}"]
    lines.append(f"x: {rng.uniform(0, 100):.4f}")
    lines.append(f"y: {rng.uniform(0, 100):.4f}")
    lines.append(">>>> Conditions")
    lines.append(f"temperature: {rng.choice([4, 77, 300])}")
    lines.append(f"substrate: {rng.choice(['Si', 'MgO', 'sapphire'])}")
    lines.append(">>>> Series")
    lines.append("t,signal")
    for t in range(rng.randint(3, 8)):
        lines.append(f"{t},{rng.gauss(0, 1):.6g}")
    return "\n".join(lines) + "\n"


def core_materials(rng: random.Random, count: int) -> list[CoreMaterial]:
    out = []
    for i in range(count):
        a, b = rng.sample(ELEMENTS, 2)
        formula = f"{a}{rng.randint(1, 3)}{b}{rng.randint(1, 3)}"
        out.append(CoreMaterial(
            material_id=parse_identifier(f"mp-{1000 + i}"),
            formula=parse_identifier(formula),
            properties={"band gap": round(rng.uniform(0.0, 6.0), 3)},
        ))
    return out


def spectra(rng: random.Random, path: Path, name: str) -> None:
    center = rng.uniform(715.0, 725.0)
    width = rng.uniform(0.8, 1.6)
    for suffix, sign in ((".plus.txt", 1.0), (".minus.txt", -1.0)):
        rows = []
        for k in range(160):
            e = 695.0 + 50.0 * k / 159
            edge = 1.5 / (1.0 + math.exp(-(e - center) / width))
            bump = 0.8 * math.exp(-((e - center) / (3 * width)) ** 2)
            dich = sign * 0.2 * math.exp(-((e - center) / (2 * width)) ** 2)
            rows.append(f"{e:.3f}\t{0.2 + edge + bump + dich:.8f}")
        (path / f"{name}{suffix}").write_text("\n".join(rows) + "\n")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="fixtures", help="output directory")
    parser.add_argument("--count", type=int, default=100, help="contribution files")
    parser.add_argument("--project", default="por", help="project prefix")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = random.Random(args.seed)
    out = Path(args.out)
    batch = out / "batch"
    raw = out / "raw"
    batch.mkdir(parents=True, exist_ok=True)
    raw.mkdir(parents=True, exist_ok=True)

    for i in range(args.count):
        (batch / f"doc{i:05}.mpf").write_text(contribution(rng, args.project, i))
    save_core_index(out / "core.tsv", core_materials(rng, max(10, args.count // 10)))
    spectra(rng, raw, "Ni XMCD")
    (out / "skeleton.mpf").write_text(SKELETON)

    print(f"{args.count} contributions in {batch}/, core index, raw spectra, skeleton")
    print(f"try: contribkit apply {out}/skeleton.mpf --raw {out}/raw")
    print(f"     contribkit bulk {batch} --project {args.project}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
