"""Per-wheel classification and the cross-wheel consistency pass."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from meterread import halfword, preproc, topo
from meterread.projmatch import column_profile, match_digit, resample_profile, train_templates
from meterread.raster import Rect, as_gray, crop


@dataclass(frozen=True)
class FullVerdict:
    digit: int
    error: float


@dataclass(frozen=True)
class HalfVerdict:
    a: int
    b: int
    pair_error: float

    def __post_init__(self):
        if self.b != (self.a + 1) % 10:
            raise ValueError(f"half verdict ({self.a}, {self.b}) breaks wheel order")


@dataclass(frozen=True)
class Unreadable:
    reason: str = "no ink"


@dataclass(frozen=True)
class CellResult:
    index: int
    verdict: object
    used_topo: bool = False
    ranking: object = field(default=None, compare=False, repr=False)
    half: object = field(default=None, compare=False, repr=False)

    @property
    def digit(self):
        """Digit this wheel contributes to the reading (floor for half-words)."""
        v = self.verdict
        if isinstance(v, FullVerdict):
            return v.digit
        if isinstance(v, HalfVerdict):
            return v.a
        return 0

    @property
    def reads_nine(self):
        v = self.verdict
        return (isinstance(v, FullVerdict) and v.digit == 9) or (isinstance(v, HalfVerdict) and v.a == 9)

    def describe(self):
        v = self.verdict
        if isinstance(v, FullVerdict):
            return f"cell {self.index} full {v.digit} error {v.error:.4f} topo {int(self.used_topo)}"
        if isinstance(v, HalfVerdict):
            return f"cell {self.index} half {v.a} {v.b} error {v.pair_error:.4f}"
        return f"cell {self.index} unreadable ({v.reason})"


@dataclass(frozen=True)
class MeterReading:
    digits: tuple
    warnings: tuple
    cells: tuple

    @property
    def value(self):
        v = 0
        for d in self.digits:
            v = v * 10 + d
        return v

    @property
    def text(self):
        return "".join(str(d) for d in self.digits)

    def summary(self):
        return f"{self.text} value={self.value} warnings={len(self.warnings)}"


@dataclass(frozen=True)
class Thresholds:
    """Tunable constants; ``min_area=None`` means 1% of the cell area.

    ``min_frag`` is lower than ``detect_split``'s own default so that wheels
    near the ends of a roll, with only a sliver of one digit showing, are
    still split.
    """

    min_area: int | None = None
    min_gap: int = 2
    min_frag: float = 0.025
    topo_margin: float = 0.05

    def __post_init__(self):
        if self.min_area is not None and self.min_area < 1:
            raise ValueError("min_area must be >= 1")
        if self.min_gap < 1:
            raise ValueError("min_gap must be >= 1")
        if not 0.0 <= self.min_frag < 0.5:
            raise ValueError("min_frag must lie in [0, 0.5)")
        if not 0.0 <= self.topo_margin < 0.5:
            raise ValueError("topo_margin must lie in [0, 0.5)")

    def area_for(self, shape):
        return self.min_area if self.min_area is not None else preproc.default_min_area(shape)


def clean_cell(cell, invert=False, min_area=None):
    """Gray cell -> filtered ink mask (Otsu, side-border clearing, speck removal)."""
    cell = as_gray(cell)
    t = preproc.otsu_threshold(preproc.histogram(cell))
    mask = preproc.binarize(cell, t, invert=invert)
    mask = preproc.clear_border(mask, edges="sides")
    if min_area is None:
        min_area = preproc.default_min_area(cell.shape)
    return preproc.remove_small(mask, min_area)


def full_cell_profile(mask, profile_len):
    h, w = mask.shape
    raw = column_profile(mask, Rect(0, 0, w, h))
    return resample_profile(raw, profile_len)


def train(masks, profile_len=32):
    """Full-word and fragment templates from cleaned full-word cells ``{digit: [mask, ...]}``."""
    samples = {d: [full_cell_profile(m, profile_len) for m in masks.get(d, ()) if m.any()] for d in range(10)}
    return train_templates(samples), halfword.train_fragment_templates(masks, profile_len)


def classify_cell(bin_img, t, cfg=Thresholds(), index=0, fragments=None):
    """Classify one cleaned cell.

    Without ``fragments`` both halves of a rolling wheel are matched against
    the full-word templates ``t``.
    """
    mask = np.asarray(bin_img, dtype=bool)
    if not mask.any():
        return CellResult(index, Unreadable())
    split = halfword.detect_split(mask, cfg.min_gap, cfg.min_frag)
    if split.is_half:
        h = mask.shape[0]
        ta = t if fragments is None else fragments.for_fragment(halfword.ABOVE, split.above_box.h, h)
        tb = t if fragments is None else fragments.for_fragment(halfword.BELOW, split.below_box.h, h)
        above = halfword.match_half(mask, split.above_box, ta)
        below = halfword.match_half(mask, split.below_box, tb)
        hm = halfword.resolve_pair(above, below)
        a, b = hm.resolved
        return CellResult(index, HalfVerdict(a, b, hm.pair_error), half=hm)

    if fragments is not None and mask[0].any():
        # ink cut by the window top: a digit on its way out whose successor
        # is not in view yet
        empty = np.flatnonzero(~mask.any(axis=1))
        band = int(empty[0]) if empty.size else mask.shape[0]
        box = Rect(0, 0, mask.shape[1], band)
        ranking = halfword.match_half(mask, box, fragments.for_fragment(halfword.ABOVE, box.h, mask.shape[0]))
        a = ranking.top
        return CellResult(index, HalfVerdict(a, (a + 1) % 10, ranking.top_error), ranking=ranking)

    if fragments is not None and mask[-1].any():
        # mirror case: the entering digit cut by the window bottom after the
        # leaving one has shrunk below min_area; a full glyph that merely
        # picked up a speck on the last row is still nearly full height
        h = mask.shape[0]
        rows = np.flatnonzero(mask.any(axis=1))
        if rows[-1] - rows[0] + 1 < 0.9 * fragments.glyph_height * h:
            empty = np.flatnonzero(~mask.any(axis=1)[: rows[-1]])
            start = int(empty[-1]) + 1 if empty.size else 0
            box = Rect(0, start, mask.shape[1], h - start)
            ranking = halfword.match_half(mask, box, fragments.for_fragment(halfword.BELOW, box.h, h))
            b = ranking.top
            return CellResult(index, HalfVerdict((b - 1) % 10, b, ranking.top_error), ranking=ranking)

    ranking = match_digit(full_cell_profile(mask, t.profile_len), t)
    digit = ranking.top
    used_topo = digit in topo.CONFUSABLE
    if used_topo:
        feats = topo.hole_features(mask, min_area=cfg.area_for(mask.shape))
        digit = topo.disambiguate_5689(ranking, feats, cfg.topo_margin)
    return CellResult(index, FullVerdict(digit, ranking.error(digit)), used_topo, ranking=ranking)


def resolve_reading(cells, cell_count=None):
    """Assemble the reading: half-words floor to their lower digit, and any
    mid-roll wheel must be followed only by wheels reading 9."""
    cells = tuple(cells)
    if cell_count is not None and len(cells) != cell_count:
        raise ValueError(f"expected {cell_count} cells, got {len(cells)}")
    warnings = []
    for c in cells:
        if isinstance(c.verdict, Unreadable):
            warnings.append(f"wheel {c.index} unreadable ({c.verdict.reason}), read as 0")
    for i, c in enumerate(cells):
        if not isinstance(c.verdict, HalfVerdict):
            continue
        for later in cells[i + 1 :]:
            if not later.reads_nine:
                warnings.append(
                    f"wheel {c.index} is mid-roll but wheel {later.index} reads {later.digit}, expected 9"
                )
    return MeterReading(tuple(c.digit for c in cells), tuple(warnings), cells)


@dataclass(frozen=True)
class Recognizer:
    """End-to-end reader for one fixed camera setup."""

    templates: object
    fragments: object = None
    geometry: preproc.MeterGeometry = preproc.MeterGeometry()
    thresholds: Thresholds = Thresholds()
    invert: bool = False

    def cells(self, img):
        """Cleaned binary masks of every wheel, left to right."""
        img = as_gray(img)
        window = img if self.geometry.window is None else crop(img, self.geometry.window)
        grays = preproc.split_cells(window, self.geometry)
        area = self.thresholds.area_for(grays[0].shape)
        return [clean_cell(g, self.invert, area) for g in grays]

    def read(self, img):
        results = [
            classify_cell(m, self.templates, self.thresholds, i, self.fragments)
            for i, m in enumerate(self.cells(img))
        ]
        return resolve_reading(results, self.geometry.cell_count)
