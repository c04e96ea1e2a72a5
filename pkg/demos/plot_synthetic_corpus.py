"""
Synthetic corpora and batch scoring
===================================

A seeded corpus of labelled meter images stands in for camera footage. Each
image comes with a ``.gt`` sidecar, and the CLI can train templates on it and
score the recognizer against it.
"""
import os
import tempfile

from meterread import cli, synth

work = tempfile.mkdtemp(prefix="meterread-demo-")
corpus = os.path.join(work, "corpus")
config = os.path.join(work, "meter.cfg")

###############################################################################
# Generate
# --------
# 70% of wheels show a full digit, 30% are mid-roll.

cli.main(["synth", corpus, "--n", "50", "--seed", "7", "--write-config", config])
with open(os.path.join(corpus, "meter_0000.gt")) as fh:
    print(fh.read())
with open(config) as fh:
    print(fh.read())

###############################################################################
# Train templates from the full-word cells
# -----------------------------------------

tpl = os.path.join(work, "templates.pmtpl")
cli.main(["train", corpus, tpl])
with open(config, "a") as fh:
    fh.write(f"templates = {tpl}\nfragments = {tpl}.frag\n")

###############################################################################
# Score
# -----

report = os.path.join(work, "report.txt")
cli.main(["--config", config, "batch", corpus, "--report", report])
with open(report) as fh:
    lines = fh.read().splitlines()
print("\n".join(l for l in lines if l.startswith(("fullword", "halfword", "readings"))))
