"""Pre-processing recipes for polarized x-ray absorption spectra.

A contribution file can contain analysis sections (level-2 sections such as
"Ni XMCD") whose children name registered recipes.  :func:`apply_recipes`
runs those recipes top-to-bottom against raw two-polarization instrument
data, writes each recipe's derived scalars back into its section, and
inserts the resulting spectra table as a new level-2 sibling named
"<analysis> Spectra".  Running it again strips everything previously
derived and recomputes, so the operation is idempotent.

Registered recipes:

* ``get xmcd`` — average the two polarization channels into an XAS signal
  and take their difference as the XMCD signal; remembers the energy range
  the final table is cropped to.
* ``scaling preedge to 1`` — rescale each channel so its mean over the
  pre-edge window is exactly 1; derived keys ``xas- factor``/``xas+ factor``.
* ``xas normalization to min and max`` — shift/scale the XAS signal to span
  [0, 1] over the stated range (XMCD is divided by the same factor so the
  two stay comparable); derived keys ``normalization factor``/``offset``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from pathlib import Path

from .mpfile import Document, KeyValueList, Section, Table, format_number, parse_cell

__all__ = [
    "PolarizedPair",
    "RecipeError",
    "RecipeInvocation",
    "SpectrumSeries",
    "RECIPE_NAMES",
    "SPECTRA_SUFFIX",
    "analysis_sections",
    "apply_recipes",
    "get_xmcd",
    "load_pair",
    "load_spectrum",
    "minmax_normalize",
    "preedge_scale",
    "strip_derived",
]

SPECTRA_SUFFIX = " Spectra"

# Scalar keys recipes may write; stripped before every recompute.
DERIVED_KEYS = frozenset({"normalization factor", "offset", "xas- factor", "xas+ factor"})


class RecipeError(ValueError):
    """Any recipe failure; ``at`` carries the section path it happened in."""

    def __init__(self, message: str, at: str | None = None):
        self.at = at
        super().__init__(f"{at}: {message}" if at else message)


@dataclass(frozen=True)
class SpectrumSeries:
    """One measured channel: intensity sampled on an ascending energy axis."""

    energy: tuple[float, ...]
    intensity: tuple[float, ...]

    def __post_init__(self):
        if len(self.energy) != len(self.intensity):
            raise RecipeError(
                f"energy axis has {len(self.energy)} points, intensity {len(self.intensity)}"
            )
        if any(not math.isfinite(v) for v in self.energy + self.intensity):
            raise RecipeError("non-finite value in spectrum")
        if any(a >= b for a, b in zip(self.energy, self.energy[1:])):
            raise RecipeError("energy axis must be strictly ascending")

    def window(self, lo: float, hi: float) -> list[int]:
        return [i for i, e in enumerate(self.energy) if lo <= e <= hi]


@dataclass(frozen=True)
class PolarizedPair:
    """Plus and minus circular-polarization channels on one shared axis."""

    plus: SpectrumSeries
    minus: SpectrumSeries

    def __post_init__(self):
        if self.plus.energy != self.minus.energy:
            raise RecipeError("polarization channels do not share an energy axis")


@dataclass
class RecipeInvocation:
    """A recipe section: its registered name, parsed params, derived outputs."""

    name: str
    params: dict[str, str]
    derived: dict[str, str]


def _parse_range(inv: RecipeInvocation, key: str) -> tuple[float, float]:
    raw = inv.params.get(key)
    if raw is None:
        raise RecipeError(f"{inv.name!r} needs a {key!r} parameter")
    parts = raw.split()
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        raise RecipeError(f"{key!r} must be two numbers, got {raw!r}") from None
    if lo > hi:
        raise RecipeError(f"{key!r} bounds are reversed: {raw!r}")
    return lo, hi


# -- the three registered computations ---------------------------------------


def minmax_normalize(
    s: SpectrumSeries, lo: float, hi: float
) -> tuple[SpectrumSeries, float, float]:
    """Shift and scale so the intensity spans [0, 1] over [lo, hi].

    offset is the window minimum, factor the window peak-to-peak; the whole
    series is transformed, not just the window.
    """
    idx = s.window(lo, hi)
    if len(idx) < 2:
        raise RecipeError(f"range [{lo}, {hi}] covers {len(idx)} points, need at least 2")
    values = [s.intensity[i] for i in idx]
    offset = min(values)
    factor = max(values) - offset
    if factor == 0:
        raise RecipeError(f"intensity is constant over [{lo}, {hi}]")
    scaled = tuple((v - offset) / factor for v in s.intensity)
    return replace(s, intensity=scaled), factor, offset


def preedge_scale(
    p: PolarizedPair, lo: float, hi: float
) -> tuple[PolarizedPair, float, float]:
    """Scale each channel so its mean over the pre-edge window is 1.

    Returns the scaled pair plus the per-channel factors (minus first), each
    factor being the reciprocal of that channel's pre-edge mean.
    """
    idx = p.plus.window(lo, hi)
    if not idx:
        raise RecipeError(f"pre-edge window [{lo}, {hi}] contains no points")

    def scale(s: SpectrumSeries) -> tuple[SpectrumSeries, float]:
        mean = sum(s.intensity[i] for i in idx) / len(idx)
        if mean == 0:
            raise RecipeError(f"pre-edge mean over [{lo}, {hi}] is zero")
        factor = 1.0 / mean
        return replace(s, intensity=tuple(v * factor for v in s.intensity)), factor

    minus, f_minus = scale(p.minus)
    plus, f_plus = scale(p.plus)
    return PolarizedPair(plus, minus), f_minus, f_plus


def get_xmcd(p: PolarizedPair, lo: float, hi: float) -> Table:
    """Combine the channels into an Energy/XAS/XMCD table over [lo, hi].

    XAS is the channel average, XMCD the plus-minus difference.
    """
    idx = p.plus.window(lo, hi)
    rows: list[list[float | str]] = []
    for i in idx:
        pv, mv = p.plus.intensity[i], p.minus.intensity[i]
        rows.append([p.plus.energy[i], (pv + mv) / 2.0, pv - mv])
    return Table(columns=["Energy", "XAS", "XMCD"], rows=rows)


# -- pipeline over a document -------------------------------------------------


@dataclass
class _PipelineState:
    pair: PolarizedPair
    xas: SpectrumSeries | None = None
    xmcd: SpectrumSeries | None = None
    table_range: tuple[float, float] | None = None

    def recombine(self) -> None:
        energy = self.pair.plus.energy
        p, m = self.pair.plus.intensity, self.pair.minus.intensity
        self.xas = SpectrumSeries(energy, tuple((a + b) / 2.0 for a, b in zip(p, m)))
        self.xmcd = SpectrumSeries(energy, tuple(a - b for a, b in zip(p, m)))


def _run_get_xmcd(state: _PipelineState, inv: RecipeInvocation) -> None:
    state.table_range = _parse_range(inv, "energy range")
    state.recombine()


def _run_preedge(state: _PipelineState, inv: RecipeInvocation) -> None:
    lo, hi = _parse_range(inv, "preedge range")
    state.pair, f_minus, f_plus = preedge_scale(state.pair, lo, hi)
    inv.derived["xas- factor"] = format_number(f_minus)
    inv.derived["xas+ factor"] = format_number(f_plus)
    if state.xas is not None:
        state.recombine()


def _run_minmax(state: _PipelineState, inv: RecipeInvocation) -> None:
    lo, hi = _parse_range(inv, "energy range")
    if state.xas is None or state.xmcd is None:
        raise RecipeError("no XAS signal yet; run 'get xmcd' first")
    state.xas, factor, offset = minmax_normalize(state.xas, lo, hi)
    state.xmcd = replace(state.xmcd, intensity=tuple(v / factor for v in state.xmcd.intensity))
    inv.derived["normalization factor"] = format_number(factor)
    inv.derived["offset"] = format_number(offset)


RECIPES = {
    "get xmcd": _run_get_xmcd,
    "scaling preedge to 1": _run_preedge,
    "xas normalization to min and max": _run_minmax,
}
RECIPE_NAMES = frozenset(RECIPES)


def _is_analysis(section: Section) -> bool:
    return section.level == 2 and any(c.name in RECIPE_NAMES for c in section.children)


def analysis_sections(doc: Document) -> list[tuple[Section, Section]]:
    """(root, analysis-section) pairs, in document order."""
    found = []
    for root in doc.roots:
        for child in root.children:
            if _is_analysis(child):
                found.append((root, child))
    return found


def strip_derived(doc: Document) -> Document:
    """Remove everything a previous run wrote: derived scalar keys inside
    recipe sections and the generated spectra sibling sections."""
    doc = doc.copy()
    for root in doc.roots:
        spectra_names = {
            child.name + SPECTRA_SUFFIX for child in root.children if _is_analysis(child)
        }
        root.children = [c for c in root.children if c.name not in spectra_names]
        for child in root.children:
            if not _is_analysis(child):
                continue
            for recipe in child.children:
                if recipe.name in RECIPE_NAMES and isinstance(recipe.body, KeyValueList):
                    for key in DERIVED_KEYS:
                        recipe.body.remove(key)
    return doc


def _section_invocation(recipe: Section, path: str) -> RecipeInvocation:
    if recipe.name not in RECIPE_NAMES:
        raise RecipeError(f"unknown recipe {recipe.name!r}", at=path)
    if not isinstance(recipe.body, KeyValueList):
        raise RecipeError(f"recipe {recipe.name!r} has a table body", at=path)
    return RecipeInvocation(recipe.name, dict(recipe.body.entries), {})


def _run_section(
    analysis: Section, pair: PolarizedPair, path: str
) -> tuple[list[dict[str, str]], Table]:
    """Execute one analysis section purely: derived key-values per recipe
    child plus the final cropped spectra table."""
    invocations = [
        _section_invocation(recipe, f"{path}/{recipe.name}") for recipe in analysis.children
    ]
    state = _PipelineState(pair)
    for recipe, inv in zip(analysis.children, invocations):
        try:
            RECIPES[inv.name](state, inv)
        except RecipeError as exc:
            if exc.at:
                raise
            raise RecipeError(str(exc), at=f"{path}/{recipe.name}") from exc
    if state.xas is None or state.xmcd is None or state.table_range is None:
        raise RecipeError("section never ran 'get xmcd'", at=path)
    lo, hi = state.table_range
    idx = state.xas.window(lo, hi)
    rows: list[list[float | str]] = [
        [state.xas.energy[i], state.xas.intensity[i], state.xmcd.intensity[i]] for i in idx
    ]
    table = Table(columns=["Energy", "XAS", "XMCD"], rows=rows)
    return [inv.derived for inv in invocations], table


def apply_recipes(doc: Document, raw: dict[str, PolarizedPair]) -> Document:
    """Run every analysis section of the document against its raw pair.

    ``raw`` maps "<root>/<analysis>" (or just "<analysis>") to the
    instrument data.  Sections are computed independently; all results are
    merged into a fresh document in one final step.
    """
    doc = strip_derived(doc)
    results = []
    for root, analysis in analysis_sections(doc):
        path = f"{root.name}/{analysis.name}"
        pair = raw.get(path) or raw.get(analysis.name)
        if pair is None:
            raise RecipeError("no raw spectra supplied", at=path)
        results.append((root, analysis, _run_section(analysis, pair, path)))
    for root, analysis, (derived_maps, table) in results:
        for recipe, derived in zip(analysis.children, derived_maps):
            assert isinstance(recipe.body, KeyValueList)
            for key, value in derived.items():
                recipe.body.append(key, value)
        sibling = Section(analysis.name + SPECTRA_SUFFIX, level=2, body=table)
        root.children.insert(root.children.index(analysis) + 1, sibling)
    return doc


# -- raw instrument files -----------------------------------------------------

_SEP_RE = re.compile(r"[\t,]")


def load_spectrum(path: str | Path) -> SpectrumSeries:
    """Read one channel from a two-column text file.

    Lines starting with '#' are comments; data lines are
    ``energy<TAB or comma>intensity``.
    """
    energy: list[float] = []
    intensity: list[float] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = _SEP_RE.split(line)
        if len(parts) != 2:
            raise RecipeError(f"{path}:{lineno}: expected two columns, got {line!r}")
        e, v = (parse_cell(p) for p in parts)
        if isinstance(e, str) or isinstance(v, str):
            raise RecipeError(f"{path}:{lineno}: non-numeric cell in {line!r}")
        energy.append(e)
        intensity.append(v)
    return SpectrumSeries(tuple(energy), tuple(intensity))


def load_pair(raw_dir: str | Path, analysis_name: str) -> PolarizedPair:
    """Load ``<analysis>.plus.txt`` / ``<analysis>.minus.txt`` from a directory."""
    raw_dir = Path(raw_dir)
    plus_path = raw_dir / f"{analysis_name}.plus.txt"
    minus_path = raw_dir / f"{analysis_name}.minus.txt"
    for p in (plus_path, minus_path):
        if not p.is_file():
            raise FileNotFoundError(f"missing raw spectrum file: {p}")
    return PolarizedPair(load_spectrum(plus_path), load_spectrum(minus_path))
