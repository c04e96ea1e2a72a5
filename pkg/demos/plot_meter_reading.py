"""
Whole-meter readings and logical identification
===============================================

Each wheel is classified on its own, then the reading is assembled: a
mid-roll wheel contributes its lower digit, and every wheel to its right
must be passing 9 -> 0. Resolving half-words independently by their longer
fragment is what turns 309 into 300 or 319; flooring never does.
"""
from meterread import preproc, reading, synth

templates, fragments = synth.synthetic_templates()


def recognizer(n):
    spec = synth.SynthSpec(reading=(synth.Full(0),) * n)
    return reading.Recognizer(templates, fragments, preproc.MeterGeometry(synth.window_rect(spec), n))


###############################################################################
# A sweep from 309 to 310
# -----------------------

rec = recognizer(3)
for k in range(0, 21, 2):
    off = k / 20
    if k == 0:
        states = (synth.Full(3), synth.Full(0), synth.Full(9))
    elif k == 20:
        states = (synth.Full(3), synth.Full(1), synth.Full(0))
    else:
        states = (synth.Full(3), synth.Rolling(0, off), synth.Rolling(9, off))
    r = rec.read(synth.render_meter(synth.SynthSpec(reading=states, sigma=8, seed=k))[0])
    print(f"offset {off:.2f}: {r.summary()}")

###############################################################################
# Inconsistent frames are reported, not rejected
# -----------------------------------------------

cells = [
    reading.CellResult(0, reading.FullVerdict(3, 0.0)),
    reading.CellResult(1, reading.HalfVerdict(0, 1, 0.1)),
    reading.CellResult(2, reading.FullVerdict(2, 0.0)),
]
r = reading.resolve_reading(cells)
print(r.summary())
for w in r.warnings:
    print("  warning:", w)

###############################################################################
# Verbose per-cell detail
# -----------------------

spec = synth.SynthSpec(reading=(synth.Full(1), synth.Full(8), synth.Rolling(5, 0.5), synth.Rolling(9, 0.5), synth.Rolling(9, 0.5)))
r = recognizer(5).read(synth.render_meter(spec)[0])
print(r.summary())
for c in r.cells:
    print(" ", c.describe())
