"""Post-submission processing: correlation, merged views, and the 2D grid.

Contributions are correlated with a core materials index through their
identifiers, merged into per-material detail views with per-record
namespacing, and aggregated into an equal-width binned 2D histogram over
two numeric properties.  The grid answers count queries per bin and exact
region queries: candidate bins come from the histogram, the final id list
from the raw points, so results never depend on bin resolution.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from pathlib import Path

from .identifiers import (
    CompositionId,
    CoreId,
    Identifier,
    ProjectId,
    parse_identifier,
)
from .mpfile import KeyValueList, Section, Table
from .store import (
    RELEASED,
    AccessContext,
    ContributionRecord,
    ContributionStore,
    PermissionDeniedError,
)

__all__ = [
    "BuilderError",
    "CoreMaterial",
    "CorrelationResult",
    "EmptyIndexError",
    "GridIndex",
    "MaterialDetail",
    "UnknownProcessorError",
    "build_grid",
    "correlate",
    "load_core_index",
    "merge_view",
    "record_property",
    "region_query",
    "run_registered_postprocess",
    "save_core_index",
]


class BuilderError(Exception):
    pass


class EmptyIndexError(BuilderError):
    pass


class UnknownProcessorError(BuilderError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no registered post-processor {name!r}")


# -- core materials index -----------------------------------------------------


@dataclass(frozen=True)
class CoreMaterial:
    material_id: CoreId
    formula: CompositionId
    properties: dict[str, float] = field(default_factory=dict, hash=False)


def load_core_index(path: str | Path) -> list[CoreMaterial]:
    """Read the tab-separated core index fixture:
    ``material_id<TAB>reduced_formula<TAB>prop=val,prop=val``."""
    materials = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3):
            raise BuilderError(f"{path}:{lineno}: expected 2 or 3 tab-separated fields")
        material_id = parse_identifier(parts[0])
        formula = parse_identifier(parts[1])
        if not isinstance(material_id, CoreId) or not isinstance(formula, CompositionId):
            raise BuilderError(f"{path}:{lineno}: need <core id>\t<formula>")
        properties: dict[str, float] = {}
        if len(parts) == 3 and parts[2]:
            for item in parts[2].split(","):
                key, _, value = item.partition("=")
                properties[key.strip()] = float(value)
        materials.append(CoreMaterial(material_id, formula, properties))
    return materials


def save_core_index(path: str | Path, materials: list[CoreMaterial]) -> None:
    lines = []
    for m in materials:
        props = ",".join(f"{k}={v!r}" for k, v in m.properties.items())
        lines.append("\t".join([str(m.material_id), str(m.formula)] + ([props] if props else [])))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- correlation --------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationResult:
    """Outcome of matching one identifier against the core index.

    ``matches`` may hold 0, 1, or many materials; project-scoped
    identifiers never match and instead carry the project they are routed
    to."""

    identifier: Identifier
    matches: tuple[CoreMaterial, ...]
    routed_project: str | None = None


def correlate(identifier: Identifier, core: list[CoreMaterial]) -> CorrelationResult:
    if isinstance(identifier, ProjectId):
        return CorrelationResult(identifier, (), routed_project=identifier.project)
    if isinstance(identifier, CoreId):
        hits = tuple(m for m in core if m.material_id == identifier)
        return CorrelationResult(identifier, hits)
    key = identifier.match_key
    hits = tuple(m for m in core if m.formula.match_key == key)
    return CorrelationResult(identifier, hits)


# -- merged per-material views ------------------------------------------------


@dataclass
class MaterialDetail:
    """All contributions for one identifier, each under its own namespace.

    Namespaces are "<contributor>/<cid>", so records from different sources
    can never collide; ``provenance`` lists (cid, contributor, revision) in
    namespace order."""

    identifier: Identifier
    namespaces: dict[str, ContributionRecord]

    @property
    def provenance(self) -> list[tuple[str, str | None, int]]:
        return [(r.cid, r.contributor, r.revision) for r in self.namespaces.values()]


def merge_view(identifier: Identifier, records: list[ContributionRecord]) -> MaterialDetail:
    """Merge records for one material; later revisions of a cid win."""
    latest: dict[str, ContributionRecord] = {}
    for record in records:
        current = latest.get(record.cid)
        if current is None or record.revision > current.revision:
            latest[record.cid] = record
    namespaces = {
        f"{r.contributor}/{r.cid}": r
        for r in sorted(latest.values(), key=lambda r: r.cid)
    }
    return MaterialDetail(identifier, namespaces)


# -- 2D property grid ---------------------------------------------------------


@dataclass
class GridIndex:
    """Equal-width binned 2D histogram plus the raw points behind it.

    ``counts[ix][iy]`` counts points whose x falls in
    [x_edges[ix], x_edges[ix+1]) — closed on the right for the last bin —
    and likewise for y.  Raw points are kept so region queries can refine
    candidate bins down to exact membership."""

    x_prop: str
    y_prop: str
    x_edges: list[float]
    y_edges: list[float]
    counts: list[list[int]]
    bins: dict[tuple[int, int], list[str]]
    points: dict[str, tuple[float, float]]

    @property
    def total(self) -> int:
        return len(self.points)


def _edges(lo: float, hi: float, n: int) -> list[float]:
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    step = (hi - lo) / n
    edges = [lo + i * step for i in range(n)]
    edges.append(hi)
    return edges


def _bin_of(edges: list[float], value: float) -> int:
    idx = bisect.bisect_right(edges, value) - 1
    return min(max(idx, 0), len(edges) - 2)


def build_grid(
    points: list[tuple[str, float, float]], nx: int, ny: int, x_prop: str = "x", y_prop: str = "y"
) -> GridIndex:
    """Bin (id, x, y) points into an nx-by-ny equal-width grid.

    Edges span the data range per axis; a degenerate axis (all values
    equal) is widened by 0.5 each way.  Every id lands in exactly one bin
    and the last bin includes the maximum edge."""
    if nx < 1 or ny < 1:
        raise BuilderError(f"grid needs positive bin counts, got {nx}x{ny}")
    if not points:
        raise EmptyIndexError("cannot build a grid from zero points")
    xs = [x for _, x, _ in points]
    ys = [y for _, _, y in points]
    x_edges = _edges(min(xs), max(xs), nx)
    y_edges = _edges(min(ys), max(ys), ny)
    counts = [[0] * ny for _ in range(nx)]
    bins: dict[tuple[int, int], list[str]] = {}
    raw: dict[str, tuple[float, float]] = {}
    for pid, x, y in points:
        if pid in raw:
            raise BuilderError(f"duplicate point id {pid!r}")
        ix, iy = _bin_of(x_edges, x), _bin_of(y_edges, y)
        counts[ix][iy] += 1
        bins.setdefault((ix, iy), []).append(pid)
        raw[pid] = (x, y)
    return GridIndex(x_prop, y_prop, x_edges, y_edges, counts, bins, raw)


def region_query(grid: GridIndex, x0: float, x1: float, y0: float, y1: float) -> list[str]:
    """Ids of all points inside the closed rectangle, sorted.

    Bin lookup narrows the candidates; the raw coordinates decide, so the
    answer is identical at any grid resolution."""
    if x0 > x1 or y0 > y1:
        raise BuilderError(f"malformed rectangle [{x0}, {x1}] x [{y0}, {y1}]")
    ix0, ix1 = _bin_of(grid.x_edges, x0), _bin_of(grid.x_edges, x1)
    iy0, iy1 = _bin_of(grid.y_edges, y0), _bin_of(grid.y_edges, y1)
    out = []
    for ix in range(ix0, ix1 + 1):
        for iy in range(iy0, iy1 + 1):
            for pid in grid.bins.get((ix, iy), ()):
                x, y = grid.points[pid]
                if x0 <= x <= x1 and y0 <= y <= y1:
                    out.append(pid)
    return sorted(out)


# -- store-driven grid construction and the post-processor registry ----------


def record_property(record: ContributionRecord, prop: str) -> float | None:
    """First numeric value stored under ``prop`` anywhere in the record's
    tree, walking sections in document order; tables don't participate."""
    for section in record.section.walk():
        if isinstance(section.body, KeyValueList):
            value = section.body.get(prop)
            if value is not None:
                try:
                    return float(value)
                except ValueError:
                    return None
    return None


def collect_points(
    records: list[ContributionRecord], x_prop: str, y_prop: str
) -> tuple[list[tuple[str, float, float]], set[str]]:
    """(id, x, y) per record carrying both properties, plus the set of
    property names seen at all (for unknown-property reporting)."""
    points = []
    seen: set[str] = set()
    for record in records:
        for section in record.section.walk():
            if isinstance(section.body, KeyValueList):
                seen.update(k for k, _ in section.body.entries)
        x = record_property(record, x_prop)
        y = record_property(record, y_prop)
        if x is not None and y is not None:
            points.append((record.cid, x, y))
    return points, seen


def _released_records(
    store: ContributionStore, project: str | None
) -> list[ContributionRecord]:
    scan = AccessContext(account="builder", groups=frozenset(), is_admin=True)
    return store.query(scan, project=project, state=RELEASED)


def _records_grid(
    records: list[ContributionRecord], x_prop: str, y_prop: str, nx: int, ny: int
) -> GridIndex:
    if not records:
        raise EmptyIndexError("no released records in scope")
    points, seen = collect_points(records, x_prop, y_prop)
    unknown = [p for p in (x_prop, y_prop) if p not in seen]
    if unknown:
        raise BuilderError("unknown property name(s): " + ", ".join(sorted(unknown)))
    if not points:
        raise EmptyIndexError(
            f"no released record carries both {x_prop!r} and {y_prop!r}"
        )
    return build_grid(points, nx, ny, x_prop, y_prop)


def grid_for_scope(
    store: ContributionStore,
    project: str | None,
    x_prop: str,
    y_prop: str,
    nx: int,
    ny: int,
) -> GridIndex:
    """Build the grid over all released records of one project scope."""
    return _records_grid(_released_records(store, project), x_prop, y_prop, nx, ny)


@dataclass
class PostprocessReport:
    name: str
    scope: str | None
    processed: int
    artifact_id: str
    artifact: object


def _grid_postprocess(
    store: ContributionStore, scope: str | None, params: dict
) -> PostprocessReport:
    x_prop = params.get("x", "x")
    y_prop = params.get("y", "y")
    nx = int(params.get("nx", 10))
    ny = int(params.get("ny", 10))
    records = _released_records(store, scope)
    grid = _records_grid(records, x_prop, y_prop, nx, ny)
    artifact_id = f"grid/{scope or '-'}/{x_prop}x{y_prop}/{nx}x{ny}"
    return PostprocessReport("grid", scope, len(records), artifact_id, grid)


POSTPROCESSORS = {"grid": _grid_postprocess}


def run_registered_postprocess(
    name: str,
    scope: str | None,
    ctx: AccessContext,
    store: ContributionStore,
    params: dict | None = None,
) -> PostprocessReport:
    """Run a registered batch processor over the released records of a
    project scope; the caller keeps the returned artifact."""
    processor = POSTPROCESSORS.get(name)
    if processor is None:
        raise UnknownProcessorError(name)
    if not ctx.is_admin and (scope is None or scope not in ctx.groups):
        raise PermissionDeniedError(f"post-processing {scope!r} needs project rights")
    return processor(store, scope, params or {})
