"""
Half-words: reading a wheel caught mid-roll
===========================================

A rolling wheel shows the bottom of one digit above the top of the next.
Both fragments are matched, and because the lower digit must follow the
upper one on the wheel, the pair is chosen jointly.
"""
import numpy as np

from meterread import halfword, synth
from meterread.projmatch import MatchRanking
from meterread.reading import Thresholds, clean_cell

templates, fragments = synth.synthetic_templates()

###############################################################################
# The worked example: a 3 rolling into a 4
# ----------------------------------------
# Error vectors for the two fragments of a 3->4 wheel. Each fragment already
# points to the right digit, and the pair is continuous.

above = MatchRanking.from_errors([3.5, 5.8, 4.4, 1.6, 4.9, 4.0, 3.0, 5.4, 3.6, 4.1])
below = MatchRanking.from_errors([7.2, 6.4, 6.2, 5.3, 1.5, 6.6, 6.3, 5.7, 5.7, 6.5])
hm = halfword.resolve_pair(above, below)
print(f"independent argmins {hm.unconstrained}, resolved {hm.resolved}, error {hm.pair_error}")

###############################################################################
# Splitting a rendered cell
# -------------------------

mask, gap = synth.cell_mask(synth.Rolling(6, 0.4), 24, 40)
split = halfword.detect_split(mask)
print(f"gap rows {split.gap_top}-{split.gap_bottom} (rendered {gap}), "
      f"above {split.above_box.h} rows, below {split.below_box.h} rows")
print("\n".join("".join("#" if v else "." for v in row) for row in mask))

###############################################################################
# Joint resolution versus trusting the long fragment
# ---------------------------------------------------

cfg = Thresholds()
rng = np.random.default_rng(1)
n = joint = longest = 0
for i in range(300):
    d = int(rng.integers(10))
    state = synth.Rolling(d, float(rng.uniform(0.2, 0.8)))
    spec = synth.SynthSpec(reading=(state,), sigma=12, salt_pepper=0.005, seed=i)
    m = clean_cell(synth.render_cell(state, spec)[0])
    s = halfword.detect_split(m, cfg.min_gap, cfg.min_frag)
    if not s.is_half:
        continue
    A = halfword.match_half(m, s.above_box, fragments.for_fragment(halfword.ABOVE, s.above_box.h, 40))
    B = halfword.match_half(m, s.below_box, fragments.for_fragment(halfword.BELOW, s.below_box.h, 40))
    n += 1
    joint += halfword.resolve_pair(A, B).resolved[0] == d
    longest += halfword.long_fragment_digit(s, A, B) == d
print(f"{n} rolling cells: joint {joint / n:.3f}, long fragment only {longest / n:.3f}")
