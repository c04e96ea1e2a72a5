"""
From camera frame to clean digit cells
======================================

A fixed camera sees the same window every time, so the wheels are found by
geometry alone: crop the window, cut it into equal cells, then threshold each
cell on its own histogram (Otsu) and scrub away border fragments and specks.
"""
import numpy as np

from meterread import preproc, synth
from meterread.raster import crop


def show(mask):
    print("\n".join("".join("#" if v else "." for v in row) for row in mask))


###############################################################################
# A synthetic meter
# -----------------
# Five wheels reading 30942, with sensor noise and a dark frame around the
# window.

spec = synth.SynthSpec(reading=tuple(synth.Full(d) for d in (3, 0, 9, 4, 2)), sigma=12, salt_pepper=0.01, seed=1)
img, truth = synth.render_meter(spec)
print(f"image {img.shape[1]}x{img.shape[0]}, window {synth.window_rect(spec)}")

###############################################################################
# Fixed-point segmentation
# ------------------------

geometry = preproc.MeterGeometry(synth.window_rect(spec), cell_count=5)
cells = preproc.split_cells(crop(img, geometry.window), geometry)
print([c.shape for c in cells])

###############################################################################
# Per-cell Otsu
# -------------
# Each cell gets its own threshold, which is what makes uneven lighting
# across the dial harmless.

cell = cells[2]
t = preproc.otsu_threshold(preproc.histogram(cell))
binary = preproc.binarize(cell, t)
print(f"threshold {t}, ink pixels {binary.sum()}")
show(binary)

###############################################################################
# Cleaning
# --------
# Components touching the sides are cut-off neighbours; components under 1%
# of the cell area are noise.

cleaned = preproc.remove_small(preproc.clear_border(binary, edges="sides"), preproc.default_min_area(cell.shape))
print(f"after cleaning: {cleaned.sum()} ink pixels, "
      f"{(cleaned == truth.masks[2]).mean():.1%} agreement with the rendered mask")
show(cleaned)
