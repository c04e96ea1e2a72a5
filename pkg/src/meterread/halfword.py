"""Rolling-wheel cells: split into two fragments and resolve them jointly.

A wheel caught mid-roll shows the lower part of digit ``a`` above the upper
part of ``(a + 1) % 10``. Both fragments are matched by projection and the
pair with the smallest summed error under the wheel's successor constraint
wins.

Fragments can be matched against the full-digit templates directly, but a
fragment's column profile differs from the whole glyph's (the lower part of
a 6 has ink on both sides, like an 8). ``FragmentTemplates`` fixes that by
cropping the full-word training cells at a ladder of heights, so each
fragment is compared with templates of the same visible portion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from meterread.projmatch import (
    DIGITS,
    TemplateFormatError,
    TemplateSet,
    column_profile,
    match_digit,
    resample_profile,
    train_templates,
)
from meterread.raster import Rect

FULL_WORD = "full"
HALF_WORD = "half"


@dataclass(frozen=True)
class SplitDecision:
    kind: str
    gap_top: int | None = None
    gap_bottom: int | None = None
    above_box: Rect | None = None
    below_box: Rect | None = None

    @property
    def is_half(self):
        return self.kind == HALF_WORD


@dataclass(frozen=True)
class HalfMatch:
    above_ranking: object
    below_ranking: object
    resolved: tuple
    pair_error: float

    def __post_init__(self):
        a, b = self.resolved
        if b != (a + 1) % 10:
            raise ValueError(f"resolved pair {self.resolved} breaks wheel order")

    @property
    def unconstrained(self):
        """Independent argmins of the two fragments."""
        return self.above_ranking.top, self.below_ranking.top


def _zero_runs(occupancy, lo, hi):
    """Maximal runs of empty rows in ``occupancy[lo:hi]`` as (first, last)."""
    runs = []
    start = None
    for r in range(lo, hi):
        if occupancy[r] == 0:
            if start is None:
                start = r
        elif start is not None:
            runs.append((start, r - 1))
            start = None
    return runs


def detect_split(bin_img, min_gap=2, min_frag=0.15):
    mask = np.asarray(bin_img, dtype=bool)
    h, w = mask.shape
    occupancy = mask.sum(axis=1)
    rows = np.flatnonzero(occupancy)
    if rows.size == 0:
        raise ValueError("cell has no foreground")
    top, bottom = int(rows[0]), int(rows[-1])
    min_rows = min_frag * h

    best = None
    for g0, g1 in _zero_runs(occupancy, top + 1, bottom):
        if g1 - g0 + 1 < min_gap:
            continue
        if g0 - top < min_rows or bottom - g1 < min_rows:
            continue
        # widest wins; on equal width the earlier (topmost) run is kept
        if best is None or g1 - g0 > best[1] - best[0]:
            best = (g0, g1)
    if best is None:
        return SplitDecision(FULL_WORD)
    g0, g1 = best
    return SplitDecision(
        HALF_WORD,
        gap_top=g0,
        gap_bottom=g1,
        above_box=Rect(0, top, w, g0 - top),
        below_box=Rect(0, g1 + 1, w, bottom - g1),
    )


def match_half(fragment, box, t):
    """Match one fragment; the profile is normalized by the fragment's height."""
    raw = column_profile(fragment, box)
    return match_digit(resample_profile(raw, t.profile_len), t)


def resolve_pair(above, below):
    a_err = above.errors()
    b_err = below.errors()
    sums = [a_err[a] + b_err[(a + 1) % 10] for a in DIGITS]
    a = min(DIGITS, key=lambda d: (sums[d], d))
    return HalfMatch(above, below, (a, (a + 1) % 10), sums[a])


def long_fragment_digit(split, above, below):
    """Baseline that trusts only the taller fragment, reported as the lower digit."""
    if split.above_box.h >= split.below_box.h:
        return above.top
    return (below.top - 1) % 10


ABOVE = "above"
BELOW = "below"
FRAGMENT_MAGIC = "PMFRG 1"
DEFAULT_RATIOS = tuple(round(0.05 * k, 2) for k in range(1, 21))


def fragment_box(mask, side, ratio):
    """Crop box for the visible part of a full glyph at ``ratio`` of its height.

    ``ABOVE`` fragments are the glyph's bottom rows (the digit leaving the
    window), ``BELOW`` fragments its top rows. Returns None for an empty mask.
    """
    rows = np.flatnonzero(mask.any(axis=1))
    if rows.size == 0:
        return None
    top, bottom = int(rows[0]), int(rows[-1]) + 1
    k = max(1, round(ratio * (bottom - top)))
    y = bottom - k if side == ABOVE else top
    return Rect(0, y, mask.shape[1], k)


@dataclass(frozen=True)
class FragmentTemplates:
    """Template sets for partial glyphs, keyed by side and visible fraction.

    ``glyph_height`` is the mean full-glyph ink height as a fraction of the
    cell height; it converts a fragment's pixel height into a fraction.
    """

    profile_len: int
    glyph_height: float
    ratios: tuple
    sets: dict

    def for_fragment(self, side, frag_h, cell_h):
        frac = frag_h / (self.glyph_height * cell_h)
        r = min(self.ratios, key=lambda q: (abs(q - frac), q))
        return self.sets[side, r]

    def dumps(self):
        lines = [
            FRAGMENT_MAGIC,
            f"profile_len {self.profile_len}",
            f"glyph_height {self.glyph_height:.6f}",
            f"ratios {len(self.ratios)}",
        ]
        for side in (ABOVE, BELOW):
            for r in self.ratios:
                lines.append(f"set {side} {r:.3f}")
                lines.extend(self.sets[side, r].dumps().splitlines())
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text):
        lines = text.splitlines()
        try:
            if lines[0] != FRAGMENT_MAGIC:
                raise TemplateFormatError("bad fragment template magic")
            P = int(lines[1].split()[1]) if lines[1].startswith("profile_len ") else None
            gh = float(lines[2].split()[1]) if lines[2].startswith("glyph_height ") else None
            n = int(lines[3].split()[1]) if lines[3].startswith("ratios ") else None
            if P is None or gh is None or n is None:
                raise TemplateFormatError("bad fragment template header")
            block = 23
            if len(lines) != 4 + 2 * n * block:
                raise TemplateFormatError(f"expected {4 + 2 * n * block} lines, found {len(lines)}")
            sets, ratios = {}, []
            for j in range(2 * n):
                at = 4 + j * block
                tag = lines[at].split()
                if len(tag) != 3 or tag[0] != "set" or tag[1] not in (ABOVE, BELOW):
                    raise TemplateFormatError(f"bad set header at line {at + 1}")
                r = float(tag[2])
                ts = TemplateSet.loads("\n".join(lines[at + 1 : at + block]))
                if ts.profile_len != P:
                    raise TemplateFormatError("fragment set length mismatch")
                sets[tag[1], r] = ts
                if tag[1] == ABOVE:
                    ratios.append(r)
        except (IndexError, ValueError) as exc:
            if isinstance(exc, TemplateFormatError):
                raise
            raise TemplateFormatError(str(exc)) from None
        ratios = tuple(ratios)
        if len(ratios) != n or any((BELOW, r) not in sets for r in ratios):
            raise TemplateFormatError("above and below ratio ladders differ")
        return cls(P, gh, ratios, sets)

    @classmethod
    def load(cls, path):
        with open(path, encoding="ascii") as fh:
            return cls.loads(fh.read())


def train_fragment_templates(masks, profile_len, ratios=DEFAULT_RATIOS):
    """Fragment templates from full-word cell masks (``{digit: [mask, ...]}``)."""
    heights = []
    sets = {}
    for d in DIGITS:
        for m in masks[d]:
            rows = np.flatnonzero(m.any(axis=1))
            if rows.size:
                heights.append((rows[-1] - rows[0] + 1) / m.shape[0])
    if not heights:
        raise ValueError("no ink in any training cell")
    for side in (ABOVE, BELOW):
        for r in ratios:
            samples = {}
            for d in DIGITS:
                profs = []
                for m in masks[d]:
                    box = fragment_box(m, side, r)
                    if box is not None and m[box.slices()].any():
                        profs.append(resample_profile(column_profile(m, box), profile_len))
                samples[d] = profs
            sets[side, r] = train_templates(samples)
    return FragmentTemplates(profile_len, float(np.mean(heights)), tuple(ratios), sets)
