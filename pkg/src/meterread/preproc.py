"""Cell segmentation, per-cell Otsu binarization and binary filtering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from meterread.raster import Rect, as_gray
from meterread.topo import border_ids, label_components


@dataclass(frozen=True)
class MeterGeometry:
    """Where the wheels sit in the camera frame.

    ``window`` is the effective area (None means the whole frame); it is cut
    into ``cell_count`` equal cells with ``cell_gap`` separator columns
    between neighbours.
    """

    window: Rect | None = None
    cell_count: int = 5
    cell_gap: int = 0

    def __post_init__(self):
        if self.cell_count < 1:
            raise ValueError("cell_count must be >= 1")
        if self.cell_gap < 0:
            raise ValueError("cell_gap must be >= 0")
        if self.window is not None:
            self.cell_width(self.window.w)

    def cell_width(self, window_w):
        if window_w < self.cell_count:
            raise ValueError(f"window {window_w}px wide cannot hold {self.cell_count} cells")
        cw = (window_w - (self.cell_count - 1) * self.cell_gap) // self.cell_count
        if cw < 1:
            raise ValueError("cells are narrower than one pixel after gap subtraction")
        return cw

    def cell_rects(self, window_w, window_h):
        """Cell rectangles in window coordinates, left to right."""
        cw = self.cell_width(window_w)
        return [Rect(i * (cw + self.cell_gap), 0, cw, window_h) for i in range(self.cell_count)]


def split_cells(window, g):
    window = as_gray(window)
    h, w = window.shape
    return [window[r.slices()].copy() for r in g.cell_rects(w, h)]


def histogram(img):
    img = as_gray(img)
    return np.bincount(img.ravel(), minlength=256).astype(np.int64)


def otsu_threshold(hist):
    """Threshold maximizing between-class variance, smallest t on ties.

    Class 0 is ``<= t``. The comparison is exact: for counts n0, n1 and
    intensity sums s0, s1 the variance is proportional to
    ``(s0*n1 - s1*n0)**2 / (n0*n1)``, evaluated as integer cross-products.
    """
    counts = [int(c) for c in hist]
    if len(counts) != 256:
        raise ValueError("histogram must have 256 bins")
    if any(c < 0 for c in counts):
        raise ValueError("histogram counts must be nonnegative")
    total = sum(counts)
    if total == 0:
        raise ValueError("empty histogram")
    total_sum = sum(i * c for i, c in enumerate(counts))

    best_t = 0
    best_num, best_den = 0, 1
    n0 = s0 = 0
    for t in range(256):
        n0 += counts[t]
        s0 += t * counts[t]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        s1 = total_sum - s0
        num = (s0 * n1 - s1 * n0) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def binarize(img, t, invert=False):
    """Ink mask: pixels ``<= t`` (or ``> t`` with ``invert`` for light digits)."""
    img = as_gray(img)
    return img > t if invert else img <= t


def clear_border(bin_img, edges="all"):
    """Erase foreground components 8-connected to the raster edge.

    ``edges="sides"`` only considers the left and right columns. The reading
    pipeline uses that because a rolling wheel's fragments legitimately run
    into the top and bottom of the window.
    """
    mask = np.asarray(bin_img, dtype=bool)
    lm = label_components(mask, 8)
    if edges == "all":
        touching = border_ids(lm)
    elif edges == "sides":
        lab = lm.labels
        side = np.concatenate((lab[:, 0], lab[:, -1]))
        touching = set(np.unique(side[side > 0]).tolist())
    else:
        raise ValueError(f"edges must be 'all' or 'sides', got {edges!r}")
    if not touching:
        return mask.copy()
    return mask & ~np.isin(lm.labels, list(touching))


def remove_small(bin_img, min_area):
    """Erase 8-connected foreground components with fewer than ``min_area`` pixels."""
    if min_area < 1:
        raise ValueError("min_area must be >= 1")
    mask = np.asarray(bin_img, dtype=bool)
    if min_area == 1:
        return mask.copy()
    lm = label_components(mask, 8)
    small = np.flatnonzero(lm.areas < min_area) + 1
    if small.size == 0:
        return mask.copy()
    return mask & ~np.isin(lm.labels, small)


def default_min_area(cell_shape):
    """Speck size: 1% of the cell area, at least one pixel."""
    h, w = cell_shape
    return max(1, round(0.01 * h * w))
