"""Synthetic meter images with exact ground truth.

Digits are drawn from a fixed table of filled rectangles on a unit glyph
box (see ``GLYPHS``). A pixel is ink when its centre falls inside any of the
digit's rectangles, so clean renders have crisp, reproducible masks:
``0 6 8 9`` and the closed ``4`` carry holes, the rest are hole-free.

Wheel states are ``Full(d)`` or ``Rolling(d, offset)``. A rolling wheel
shows digit ``d`` moved up by ``offset * cell_h`` rows with ``(d + 1) % 10``
following ``separator_rows`` blank rows below it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from meterread.raster import Rect, save_pgm

INK = 30
PAPER = 220

# glyph box inside a cell, as fractions of cell width / height
GLYPH_X = (0.2, 0.8)
GLYPH_Y = (0.1, 0.975)

# stroke thickness as fractions of the glyph box
_TX = 0.24
_TY = 0.12
_MID = (0.5 - _TY / 2, 0.5 + _TY / 2)

# seven-segment style strokes (x0, y0, x1, y1) on the unit glyph box
_SEG = {
    "a": (0.0, 0.0, 1.0, _TY),
    "b": (1.0 - _TX, 0.0, 1.0, _MID[1]),
    "c": (1.0 - _TX, _MID[0], 1.0, 1.0),
    "d": (0.0, 1.0 - _TY, 1.0, 1.0),
    "e": (0.0, _MID[0], _TX, 1.0),
    "f": (0.0, 0.0, _TX, _MID[1]),
    "g": (0.0, _MID[0], 1.0, _MID[1]),
}

_HOOK = 0.36
_TOP_HOOK = (1.0 - _TX, 0.0, 1.0, _HOOK)
_BOTTOM_HOOK = (0.0, 1.0 - _HOOK, _TX, 1.0)
# shorter than the 5's hook: the lower halves of 5 and 9 must differ or a
# rolling 9->0 looks like 5->6
_TAIL = (0.0, 0.8, _TX, 1.0)


def _segs(names):
    return tuple(_SEG[n] for n in names)


GLYPHS = {
    0: _segs("abcdef"),
    1: ((0.5 - _TX / 2, 0.0, 0.5 + _TX / 2, 1.0), (0.2, 0.0, 0.5, _TY)),
    # stepped diagonal instead of a left stroke: a seven-segment 2 has the
    # same column profile as a 5
    2: (
        _SEG["a"],
        (1.0 - _TX, 0.0, 1.0, 0.5),
        (0.62, 0.42, 1.0, 0.58),
        (0.3, 0.56, 0.72, 0.72),
        (0.0, 0.70, 0.4, 0.90),
        _SEG["d"],
    ),
    3: _segs("abgcd"),
    # closed four: stem, crossbar, left arm and a top link enclosing a hole
    4: (
        (0.62, 0.0, 0.62 + _TX, 1.0),
        (0.0, 0.62, 1.0, 0.62 + _TY),
        (0.0, 0.18, _TX, 0.62 + _TY),
        (0.0, 0.18, 0.62 + _TX, 0.18 + _TY),
    ),
    # hooked 5, 6 and 9 keep the 5/6/8/9 column profiles close to each other;
    # each hook stops short of the middle bar so no extra hole forms
    5: _segs("afgcd") + (_TOP_HOOK, _BOTTOM_HOOK),
    6: _segs("afgcde") + (_TOP_HOOK,),
    7: _segs("abc"),
    8: _segs("abcdefg"),
    9: _segs("abcdfg") + (_TAIL,),
}

MIN_CELL_W = 12
MIN_CELL_H = 16


@dataclass(frozen=True)
class Full:
    digit: int

    def __post_init__(self):
        if self.digit not in range(10):
            raise ValueError(f"digit out of range: {self.digit}")

    @property
    def floor(self):
        return self.digit


@dataclass(frozen=True)
class Rolling:
    digit: int
    offset: float

    def __post_init__(self):
        if self.digit not in range(10):
            raise ValueError(f"digit out of range: {self.digit}")
        if not 0.0 < self.offset < 1.0:
            raise ValueError(f"offset must lie in (0, 1), got {self.offset}")

    @property
    def floor(self):
        return self.digit

    @property
    def next_digit(self):
        return (self.digit + 1) % 10


@dataclass(frozen=True)
class SynthSpec:
    reading: tuple = (Full(0),) * 5
    cell_w: int = 24
    cell_h: int = 40
    separator_rows: int = 3
    sigma: float = 0.0
    salt_pepper: float = 0.0
    border_px: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.cell_w < MIN_CELL_W or self.cell_h < MIN_CELL_H:
            raise ValueError(f"cell {self.cell_w}x{self.cell_h} too small (min {MIN_CELL_W}x{MIN_CELL_H})")
        if self.separator_rows < 0 or self.border_px < 0 or self.sigma < 0:
            raise ValueError("separator_rows, border_px and sigma must be nonnegative")
        if not 0.0 <= self.salt_pepper <= 1.0:
            raise ValueError("salt_pepper rate must lie in [0, 1]")
        if len(self.reading) < 1:
            raise ValueError("reading needs at least one wheel")


@dataclass
class GroundTruth:
    """What was drawn: wheel states, cell boxes in image coordinates, blank
    row run between rolling fragments (cell coordinates, inclusive), and the
    clean ink mask of every cell."""

    states: tuple
    boxes: list
    gap_rows: list
    masks: list = field(repr=False)

    @property
    def digits(self):
        return [s.floor for s in self.states]

    @property
    def value(self):
        v = 0
        for d in self.digits:
            v = v * 10 + d
        return v


def glyph_mask(digit, w, h, top=None):
    """Ink mask of ``digit`` in a ``w x h`` tile, glyph box starting at row ``top``.

    ``top`` may be negative or beyond the tile; out-of-tile strokes are clipped.
    """
    gx0, gx1 = GLYPH_X[0] * w, GLYPH_X[1] * w
    gy0, gy1 = GLYPH_Y[0] * h, GLYPH_Y[1] * h
    if top is not None:
        gy1, gy0 = top + (gy1 - gy0), top
    gw, gh = gx1 - gx0, gy1 - gy0
    xc = np.arange(w) + 0.5
    yc = np.arange(h) + 0.5
    mask = np.zeros((h, w), dtype=bool)
    for x0, y0, x1, y1 in GLYPHS[digit]:
        cols = (xc >= gx0 + x0 * gw) & (xc < gx0 + x1 * gw)
        rows = (yc >= gy0 + y0 * gh) & (yc < gy0 + y1 * gh)
        mask |= rows[:, None] & cols[None, :]
    return mask


def _blank_run(mask):
    """Inclusive (first, last) of the blank rows between two ink bands, or None."""
    occ = mask.any(axis=1)
    rows = np.flatnonzero(occ)
    if rows.size == 0:
        return None
    inner = np.flatnonzero(~occ[rows[0] : rows[-1] + 1]) + rows[0]
    if inner.size == 0:
        return None
    return int(inner[0]), int(inner[-1])


def cell_mask(state, w, h, separator_rows=3):
    """Clean ink mask of one wheel plus its blank gap rows (None if not visible)."""
    if isinstance(state, Full):
        return glyph_mask(state.digit, w, h), None
    base = GLYPH_Y[0] * h
    shift = round(state.offset * h)
    upper = glyph_mask(state.digit, w, h, top=base - shift)
    lower = glyph_mask(state.next_digit, w, h, top=base - shift + h + separator_rows)
    mask = upper | lower
    gap = _blank_run(mask) if upper.any() and lower.any() else None
    return mask, gap


def _paint(mask):
    return np.where(mask, INK, PAPER).astype(np.float64)


def _add_noise(canvas, spec, rng):
    if spec.sigma > 0:
        canvas = canvas + rng.normal(0.0, spec.sigma, canvas.shape)
    out = np.clip(np.rint(canvas), 0, 255).astype(np.uint8)
    if spec.salt_pepper > 0:
        hit = rng.random(canvas.shape) < spec.salt_pepper
        salt = rng.random(canvas.shape) < 0.5
        out[hit & salt] = 255
        out[hit & ~salt] = 0
    return out


def render_cell(state, spec):
    """One noisy wheel image and its ground-truth fragment (mask, gap rows)."""
    mask, gap = cell_mask(state, spec.cell_w, spec.cell_h, spec.separator_rows)
    rng = np.random.default_rng(spec.seed)
    return _add_noise(_paint(mask), spec, rng), GroundTruth((state,), [Rect(0, 0, spec.cell_w, spec.cell_h)], [gap], [mask])


def render_meter(spec):
    """All wheels side by side inside a dark frame of ``border_px`` pixels."""
    k = len(spec.reading)
    b = spec.border_px
    H = spec.cell_h + 2 * b
    W = k * spec.cell_w + 2 * b
    canvas = np.full((H, W), float(INK))
    boxes, gaps, masks = [], [], []
    for i, state in enumerate(spec.reading):
        mask, gap = cell_mask(state, spec.cell_w, spec.cell_h, spec.separator_rows)
        box = Rect(b + i * spec.cell_w, b, spec.cell_w, spec.cell_h)
        canvas[box.slices()] = _paint(mask)
        boxes.append(box)
        gaps.append(gap)
        masks.append(mask)
    rng = np.random.default_rng(spec.seed)
    return _add_noise(canvas, spec, rng), GroundTruth(tuple(spec.reading), boxes, gaps, masks)


def window_rect(spec):
    """Effective area of a rendered meter, for ``MeterGeometry.window``."""
    return Rect(spec.border_px, spec.border_px, len(spec.reading) * spec.cell_w, spec.cell_h)


# ---------------------------------------------------------------------------
# ground-truth sidecars and corpora


def format_gt(gt):
    lines = ["GT 1", f"cells {len(gt.states)}"]
    for i, s in enumerate(gt.states):
        if isinstance(s, Full):
            lines.append(f"cell {i} full {s.digit}")
        else:
            lines.append(f"cell {i} half {s.digit} {s.next_digit} offset {s.offset:.3f}")
    for i, r in enumerate(gt.boxes):
        lines.append(f"box {i} {r.x} {r.y} {r.w} {r.h}")
    return "\n".join(lines) + "\n"


class SidecarError(ValueError):
    pass


def parse_gt(text):
    """Sidecar text -> (states, boxes)."""
    lines = text.splitlines()
    try:
        if lines[0] != "GT 1":
            raise SidecarError("bad sidecar magic")
        head = lines[1].split()
        if head[0] != "cells":
            raise SidecarError("missing cells line")
        k = int(head[1])
        if len(lines) != 2 + 2 * k:
            raise SidecarError(f"expected {2 + 2 * k} lines, found {len(lines)}")
        states, boxes = [], []
        for i in range(k):
            f = lines[2 + i].split()
            if f[0] != "cell" or int(f[1]) != i:
                raise SidecarError(f"bad cell line {i}")
            if f[2] == "full" and len(f) == 4:
                states.append(Full(int(f[3])))
            elif f[2] == "half" and len(f) == 7 and f[5] == "offset":
                a, b = int(f[3]), int(f[4])
                if b != (a + 1) % 10:
                    raise SidecarError(f"cell {i}: half pair {a},{b} out of order")
                states.append(Rolling(a, float(f[6])))
            else:
                raise SidecarError(f"bad cell line {i}")
        for i in range(k):
            f = lines[2 + k + i].split()
            if len(f) != 6 or f[0] != "box" or int(f[1]) != i:
                raise SidecarError(f"bad box line {i}")
            boxes.append(Rect(*(int(v) for v in f[2:])))
    except (IndexError, ValueError) as exc:
        if isinstance(exc, SidecarError):
            raise
        raise SidecarError(str(exc)) from None
    return states, boxes


def load_gt(path):
    with open(path, encoding="ascii") as fh:
        return parse_gt(fh.read())


def write_sample(directory, name, img, gt):
    """Write ``<name>.pgm`` and its ``<name>.gt`` sidecar."""
    save_pgm(img, os.path.join(directory, name + ".pgm"))
    with open(os.path.join(directory, name + ".gt"), "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_gt(gt))


@dataclass(frozen=True)
class CorpusRanges:
    """Distribution of generated meters. Each wheel independently rolls with
    probability ``rolling_frac``; rolling offsets are uniform on
    ``[offset_min, offset_max]``."""

    cells: int = 5
    rolling_frac: float = 0.3
    offset_min: float = 0.1
    offset_max: float = 0.9
    sigma: float = 12.0
    salt_pepper: float = 0.005
    cell_w: int = 24
    cell_h: int = 40
    separator_rows: int = 3
    border_px: int = 4


def image_rng(seed, index):
    """Independent stream per image, derived from (seed, index)."""
    return np.random.default_rng([seed, index])


def random_state(rng, ranges):
    d = int(rng.integers(10))
    if rng.random() < ranges.rolling_frac:
        off = float(rng.uniform(ranges.offset_min, ranges.offset_max))
        # offsets are stored with three decimals in the sidecar
        off = min(max(round(off, 3), 0.001), 0.999)
        return Rolling(d, off)
    return Full(d)


def corpus_spec(seed, index, ranges):
    rng = image_rng(seed, index)
    reading = tuple(random_state(rng, ranges) for _ in range(ranges.cells))
    noise_seed = int(rng.integers(2**63 - 1))
    return SynthSpec(
        reading=reading,
        cell_w=ranges.cell_w,
        cell_h=ranges.cell_h,
        separator_rows=ranges.separator_rows,
        sigma=ranges.sigma,
        salt_pepper=ranges.salt_pepper,
        border_px=ranges.border_px,
        seed=noise_seed,
    )


def generate_corpus(n, directory, ranges=CorpusRanges(), seed=0):
    """Render ``n`` meters as ``meter_NNNN.pgm`` + ``meter_NNNN.gt``; returns the names."""
    if n < 1:
        raise ValueError("corpus size must be >= 1")
    os.makedirs(directory, exist_ok=True)
    names = []
    for i in range(n):
        spec = corpus_spec(seed, i, ranges)
        img, gt = render_meter(spec)
        name = f"meter_{i:04d}"
        write_sample(directory, name, img, gt)
        names.append(name)
    return names


def training_cells(samples=4, seed=0, cell_w=24, cell_h=40, sigma=8.0):
    """Cleaned masks of ``samples`` lightly noisy full-word renders per digit."""
    # local import: reading depends on this module
    from meterread.reading import clean_cell

    masks = {}
    for d in range(10):
        masks[d] = []
        for s in range(samples):
            spec = SynthSpec(reading=(Full(d),), cell_w=cell_w, cell_h=cell_h, sigma=sigma, seed=seed * 1000 + d * 10 + s)
            masks[d].append(clean_cell(render_cell(Full(d), spec)[0]))
    return masks


def synthetic_templates(profile_len=32, samples=4, seed=0, cell_w=24, cell_h=40):
    """(TemplateSet, FragmentTemplates) trained on the built-in glyphs."""
    from meterread.reading import train

    return train(training_cells(samples, seed, cell_w, cell_h), profile_len)
