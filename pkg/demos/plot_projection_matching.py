"""
Projection curves and template matching
=======================================

Every digit leaves a characteristic column-projection curve. Four samples per
digit are averaged into a template, and an unknown cell is assigned the
digit whose template is closest in mean absolute error.
"""
import numpy as np

from meterread import synth
from meterread.projmatch import match_digit
from meterread.reading import clean_cell, full_cell_profile

###############################################################################
# Templates
# ---------

templates, _ = synth.synthetic_templates(samples=4)
for d in range(10):
    curve = templates.templates[d].values
    bars = "".join(" .:-=+*#%@"[min(9, int(v * 10))] for v in curve)
    print(f"{d} |{bars}|")

###############################################################################
# Matching a noisy cell
# ---------------------

spec = synth.SynthSpec(reading=(synth.Full(4),), sigma=12, seed=3)
mask = clean_cell(synth.render_cell(synth.Full(4), spec)[0])
ranking = match_digit(full_cell_profile(mask, templates.profile_len), templates)
for d, e in ranking.scores[:4]:
    print(f"digit {d}: error {e:.4f}")

###############################################################################
# The confusable group
# --------------------
# 5, 6, 8 and 9 look alike from the side: their templates sit much closer
# to each other than to thin digits such as 1 and 7.

M = templates.matrix()
group = (5, 6, 8, 9)
inner = np.mean([np.abs(M[a] - M[b]).mean() for a in group for b in group if a < b])
outer = np.mean([np.abs(M[a] - M[b]).mean() for a in group for b in (1, 7)])
print(f"mean distance within {{5,6,8,9}} {inner:.3f}, to {{1,7}} {outer:.3f}")
