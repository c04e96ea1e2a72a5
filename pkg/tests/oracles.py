"""Independent reference implementations used only by the tests."""

from collections import deque
from fractions import Fraction

import numpy as np

N4 = ((-1, 0), (1, 0), (0, -1), (0, 1))
N8 = N4 + ((-1, -1), (-1, 1), (1, -1), (1, 1))


def flood_label(mask, connectivity=8):
    """Breadth-first labeling, ids in row-major first-encounter order."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    nbrs = N8 if connectivity == 8 else N4
    labels = np.zeros((h, w), dtype=int)
    n = 0
    for r in range(h):
        for c in range(w):
            if not mask[r, c] or labels[r, c]:
                continue
            n += 1
            labels[r, c] = n
            q = deque([(r, c)])
            while q:
                y, x = q.popleft()
                for dy, dx in nbrs:
                    yy, xx = y + dy, x + dx
                    if 0 <= yy < h and 0 <= xx < w and mask[yy, xx] and not labels[yy, xx]:
                        labels[yy, xx] = n
                        q.append((yy, xx))
    return labels, n


def erase_border_touching(mask):
    mask = np.asarray(mask, dtype=bool)
    labels, _ = flood_label(mask, 8)
    edge = set(labels[0]) | set(labels[-1]) | set(labels[:, 0]) | set(labels[:, -1])
    edge.discard(0)
    out = mask.copy()
    for k in edge:
        out[labels == k] = False
    return out


def erase_small(mask, min_area):
    mask = np.asarray(mask, dtype=bool)
    labels, n = flood_label(mask, 8)
    out = mask.copy()
    for k in range(1, n + 1):
        sel = labels == k
        if sel.sum() < min_area:
            out[sel] = False
    return out


def count_holes(mask):
    """Background 4-components that never touch the edge."""
    labels, n = flood_label(~np.asarray(mask, dtype=bool), 4)
    edge = set(labels[0]) | set(labels[-1]) | set(labels[:, 0]) | set(labels[:, -1])
    return sum(1 for k in range(1, n + 1) if k not in edge)


def otsu_exhaustive(counts):
    """argmax_t w0*w1*(mu0-mu1)^2 in exact rationals, smallest t on ties."""
    counts = [int(c) for c in counts]
    total = sum(counts)
    best_t, best = 0, Fraction(-1)
    for t in range(256):
        lo = counts[: t + 1]
        hi = counts[t + 1 :]
        m0, m1 = sum(lo), sum(hi)
        if m0 == 0 or m1 == 0:
            score = Fraction(0)
        else:
            w0 = Fraction(m0, total)
            w1 = Fraction(m1, total)
            mu0 = Fraction(sum(i * c for i, c in enumerate(lo)), m0)
            mu1 = Fraction(sum((t + 1 + i) * c for i, c in enumerate(hi)), m1)
            score = w0 * w1 * (mu0 - mu1) ** 2
        if score > best:
            best_t, best = t, score
    return best_t


def random_histogram(rng):
    """Mix of sparse, spiky and dense histograms so ties actually occur."""
    kind = rng.integers(4)
    h = np.zeros(256, dtype=np.int64)
    if kind == 0:
        h[:] = rng.integers(0, 50, 256)
    elif kind == 1:
        for v in rng.integers(0, 256, rng.integers(1, 5)):
            h[v] += rng.integers(1, 100)
    elif kind == 2:
        h[rng.integers(0, 256, rng.integers(1, 40))] = 1
    else:
        a, b = sorted(rng.integers(0, 256, 2))
        h[a] += 50
        h[b] += 50
    if h.sum() == 0:
        h[rng.integers(256)] = 1
    return h
