"""Connected components, hole topology and the 5/6/8/9 second pass.

Labeling is a two-pass union-find over horizontal runs rather than pixels:
runs are extracted with numpy, merged against the previous row, and then
painted back. A digit cell has a few dozen runs, so the Python-level work
stays small.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from meterread.raster import Rect

CONFUSABLE = frozenset((5, 6, 8, 9))


@dataclass(frozen=True)
class LabelMap:
    """Component ids per pixel (0 = background, 1..n in row-major first-seen order).

    ``areas[i]`` and ``boxes[i]`` describe component ``i + 1``.
    """

    labels: np.ndarray
    component_count: int
    areas: np.ndarray
    boxes: list = field(default_factory=list)

    @property
    def width(self):
        return self.labels.shape[1]

    @property
    def height(self):
        return self.labels.shape[0]


@dataclass(frozen=True)
class HoleFeatures:
    """Enclosed background regions. Centroids are ``(x, y)`` with x in pixel
    columns and y as ``(row + 0.5) / height`` so the cell middle is 0.5."""

    hole_count: int
    hole_centroids: list

    def __post_init__(self):
        if self.hole_count != len(self.hole_centroids):
            raise ValueError("hole_count must match the number of centroids")


def _runs(mask):
    """Row-major (row, start, stop) arrays of horizontal foreground runs."""
    h, w = mask.shape
    padded = np.zeros((h, w + 2), dtype=np.int8)
    padded[:, 1:-1] = mask
    d = np.diff(padded, axis=1)
    rs, starts = np.nonzero(d == 1)
    _, stops = np.nonzero(d == -1)
    return rs, starts, stops


def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        parent[i], i = root, parent[i]
    return root


def label_components(bin_img, connectivity=8):
    mask = np.asarray(bin_img, dtype=bool)
    if mask.ndim != 2:
        raise ValueError("binary image must be 2-D")
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    h, w = mask.shape
    rs, starts, stops = _runs(mask)
    n = len(rs)
    labels = np.zeros((h, w), dtype=np.int32)
    if n == 0:
        return LabelMap(labels, 0, np.zeros(0, dtype=np.int64), [])

    rs_l, st_l, sp_l = rs.tolist(), starts.tolist(), stops.tolist()
    slack = 1 if connectivity == 8 else 0
    parent = list(range(n))

    # first run index of every row (runs arrive row-major)
    row_first = [n] * (h + 1)
    for i in range(n - 1, -1, -1):
        row_first[rs_l[i]] = i
    for r in range(h - 1, -1, -1):
        if row_first[r] == n:
            row_first[r] = row_first[r + 1]

    for r in range(1, h):
        a, a_end = row_first[r - 1], row_first[r]
        b, b_end = row_first[r], row_first[r + 1]
        while a < a_end and b < b_end:
            if st_l[a] < sp_l[b] + slack and st_l[b] < sp_l[a] + slack:
                ra, rb = _find(parent, a), _find(parent, b)
                if ra != rb:
                    if ra < rb:
                        parent[rb] = ra
                    else:
                        parent[ra] = rb
            # advance whichever run ends first
            if sp_l[a] < sp_l[b]:
                a += 1
            else:
                b += 1

    # roots are each component's earliest run, so numbering roots in run
    # order gives row-major first-encounter ids
    ids = [0] * n
    next_id = 0
    for i in range(n):
        root = _find(parent, i)
        if root == i:
            next_id += 1
            ids[i] = next_id
        else:
            ids[i] = ids[root]

    for i in range(n):
        labels[rs_l[i], st_l[i] : sp_l[i]] = ids[i]

    count = next_id
    run_ids = np.asarray(ids)
    lengths = stops - starts
    areas = np.bincount(run_ids, weights=lengths, minlength=count + 1)[1:].astype(np.int64)
    x0 = np.full(count + 1, w)
    x1 = np.zeros(count + 1, dtype=np.int64)
    y0 = np.full(count + 1, h)
    y1 = np.zeros(count + 1, dtype=np.int64)
    np.minimum.at(x0, run_ids, starts)
    np.maximum.at(x1, run_ids, stops)
    np.minimum.at(y0, run_ids, rs)
    np.maximum.at(y1, run_ids, rs + 1)
    boxes = [
        Rect(int(x0[k]), int(y0[k]), int(x1[k] - x0[k]), int(y1[k] - y0[k]))
        for k in range(1, count + 1)
    ]
    return LabelMap(labels, count, areas, boxes)


def border_ids(lm):
    """Set of component ids that own at least one edge pixel."""
    lab = lm.labels
    edge = np.concatenate((lab[0], lab[-1], lab[:, 0], lab[:, -1]))
    return set(np.unique(edge[edge > 0]).tolist())


def hole_features(bin_img, min_area=1):
    """Background components (4-connected) that cannot reach the raster edge.

    Holes smaller than ``min_area`` pixels are ignored; the pipeline passes
    its speck size here so salt noise inside strokes does not count.
    """
    mask = np.asarray(bin_img, dtype=bool)
    h, w = mask.shape
    lm = label_components(~mask, connectivity=4)
    outside = border_ids(lm)
    centroids = []
    for k in range(1, lm.component_count + 1):
        if k in outside or lm.areas[k - 1] < min_area:
            continue
        ys, xs = np.nonzero(lm.labels == k)
        centroids.append((float(xs.mean()), float((ys.mean() + 0.5) / h)))
    return HoleFeatures(len(centroids), centroids)


def disambiguate_5689(ranking, features, margin=0.05):
    """Second-pass decision for a projection winner in {5, 6, 8, 9}."""
    top = ranking.top
    if top not in CONFUSABLE:
        raise ValueError(f"disambiguation needs a top-1 in {{5,6,8,9}}, got {top}")
    holes = features.hole_count
    if holes == 2:
        return 8
    if holes == 0:
        return 5
    if holes == 1:
        y = features.hole_centroids[0][1]
        if y > 0.5 + margin:
            return 6
        if y < 0.5 - margin:
            return 9
        return ranking.best_of((6, 9))
    return top
