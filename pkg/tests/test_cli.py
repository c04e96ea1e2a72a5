import io
import os
import subprocess
import sys

import numpy as np
import pytest

from meterread import cli, synth
from meterread.raster import save_pgm


def run(*argv):
    out = io.StringIO()
    code = cli.main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def meter(tmp_path_factory):
    """A clean 30942 meter and a config describing its window."""
    d = tmp_path_factory.mktemp("meter")
    spec = synth.SynthSpec(reading=tuple(synth.Full(k) for k in (3, 0, 9, 4, 2)))
    img, _ = synth.render_meter(spec)
    save_pgm(img, str(d / "m.pgm"))
    w = synth.window_rect(spec)
    (d / "m.cfg").write_text(f"window = {w.x} {w.y} {w.w} {w.h}\ncell_count = 5\n")
    return d


@pytest.fixture(scope="module")
def labelled(tmp_path_factory):
    """Four meters showing every digit once: four samples per digit."""
    d = tmp_path_factory.mktemp("labelled")
    for k in range(4):
        spec = synth.SynthSpec(reading=tuple(synth.Full(x) for x in range(10)), sigma=6.0, seed=k)
        img, gt = synth.render_meter(spec)
        synth.write_sample(str(d), f"s{k}", img, gt)
    return d


def test_recognize_clean(meter):
    code, out = run("--config", meter / "m.cfg", "recognize", meter / "m.pgm")
    assert code == 0 and out == "30942 value=30942 warnings=0\n"


def test_recognize_flags_after_subcommand(meter):
    code, out = run("recognize", meter / "m.pgm", "--config", meter / "m.cfg", "--verbose")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "30942 value=30942 warnings=0"
    assert len(lines) == 6 and lines[1].startswith("cell 0 full 3 error ")


def test_recognize_missing_file(tmp_path, capsys):
    code, _ = run("recognize", tmp_path / "nope.pgm")
    assert code == 1 and "no such file" in capsys.readouterr().err


def test_recognize_corrupt(tmp_path, capsys):
    p = tmp_path / "bad.pgm"
    p.write_bytes(b"P5\n4 4\n255\n" + bytes(3))
    code, _ = run("recognize", p)
    assert code == 1 and "bad PGM" in capsys.readouterr().err


def test_recognize_blank_is_unreadable(tmp_path, capsys):
    p = tmp_path / "blank.pgm"
    save_pgm(np.full((40, 120), 200, np.uint8), str(p))
    code, out = run("recognize", p)
    assert code == 2 and out == "00000 value=0 warnings=5\n"
    assert capsys.readouterr().err.count("warning:") == 5


def test_recognize_window_outside_image(meter, tmp_path):
    cfg = tmp_path / "big.cfg"
    cfg.write_text("window = 0 0 500 500\n")
    assert run("--config", cfg, "recognize", meter / "m.pgm")[0] == 2


def test_config_strict(tmp_path, capsys):
    cases = [
        "colour = red\n",
        "cell_count = 5\ncell_count = 4\n",
        "window = 1 2 3\n",
        "polarity = sideways\n",
        "min_frag = 0.7\n",
        "min_gap = 0\n",
        "just words\n",
    ]
    for text in cases:
        with pytest.raises(cli.UsageError):
            cli.parse_config(text)
    p = tmp_path / "c.cfg"
    p.write_text("colour = red\n")
    assert run("--config", p, "recognize", "x.pgm")[0] == 1
    assert "unknown key" in capsys.readouterr().err


def test_config_round_trip(tmp_path):
    cfg = cli.parse_config(
        "# comment\nwindow = 4 4 120 40\ncell_count = 5\npolarity = invert\nmin_area = 7\n"
        "min_gap = 3\nmin_frag = 0.1\ntopo_margin = 0.1\ntemplates = t.pmtpl  # relative\n",
        base_dir=str(tmp_path),
    )
    assert cfg.invert and cfg.thresholds.min_area == 7 and cfg.thresholds.min_gap == 3
    assert cfg.templates == os.path.join(str(tmp_path), "t.pmtpl")
    assert cli.parse_config(cli.format_config(cfg)) == cfg


def test_train_four_samples(labelled, tmp_path):
    out = tmp_path / "t.pmtpl"
    code, text = run("train", labelled, out)
    assert code == 0
    assert text.strip().endswith("samples " + " ".join(f"{d}:4" for d in range(10)))
    lines = out.read_text().splitlines()
    assert lines[0] == "PMTPL 1"
    assert all(lines[2 + 2 * d] == f"digit {d} samples 4" for d in range(10))
    assert (tmp_path / "t.pmtpl.frag").exists()


def test_train_missing_digit(tmp_path, capsys):
    spec = synth.SynthSpec(reading=tuple(synth.Full(x) for x in range(10) if x != 7))
    img, gt = synth.render_meter(spec)
    synth.write_sample(str(tmp_path), "s", img, gt)
    code, _ = run("train", tmp_path, tmp_path / "t.pmtpl")
    assert code == 2 and "7" in capsys.readouterr().err


def test_trained_templates_usable(labelled, meter, tmp_path):
    t = tmp_path / "t.pmtpl"
    run("train", labelled, t)
    cfg = tmp_path / "c.cfg"
    cfg.write_text((meter / "m.cfg").read_text() + f"templates = {t}\nfragments = {t}.frag\n")
    assert run("--config", cfg, "recognize", meter / "m.pgm") == (0, "30942 value=30942 warnings=0\n")
    cfg.write_text((meter / "m.cfg").read_text() + f"templates = {tmp_path / 'missing'}\n")
    assert run("--config", cfg, "recognize", meter / "m.pgm")[0] == 1


def test_synth_and_batch(tmp_path):
    corpus = tmp_path / "c"
    cfg = tmp_path / "c.cfg"
    code, out = run("synth", corpus, "--n", 12, "--seed", 7, "--sigma", 0, "--salt-pepper", 0, "--write-config", cfg)
    assert code == 0 and out == f"seed 7\nwrote 12 images to {corpus}\n"
    assert len(list(corpus.glob("*.pgm"))) == len(list(corpus.glob("*.gt"))) == 12
    report = tmp_path / "r.txt"
    code, out = run("--config", cfg, "batch", corpus, "--report", report)
    assert code == 0 and out == "readings 12 correct 12 acc 1.000\n"
    lines = report.read_text().splitlines()
    rows = [l for l in lines if l.startswith("img ")]
    assert len(rows) == 12 and all(r.endswith(" ok 1") for r in rows)
    assert sum(l.startswith("digit ") for l in lines) == 10
    assert any(l.startswith("fullword ") for l in lines) and any(l.startswith("halfword ") for l in lines)
    assert any(l.startswith("confusion ") for l in lines)
    assert lines[-1] == "readings 12 correct 12 acc 1.000"


def test_synth_defaults(tmp_path):
    code, _ = run("synth", tmp_path / "d")
    assert code == 0
    assert len(list((tmp_path / "d").glob("*.pgm"))) == len(list((tmp_path / "d").glob("*.gt"))) == 100


def test_synth_usage_errors(tmp_path):
    assert run("synth", tmp_path / "z", "--n", 0)[0] == 1
    assert run("synth", tmp_path / "z", "--offset-min", 0)[0] == 1
    assert run("synth", tmp_path / "z", "--cell-w", 5)[0] == 1
    assert run("synth", tmp_path / "z", "--n", "many")[0] == 1


def test_batch_errors(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert run("batch", empty)[0] == 2
    assert run("batch", tmp_path / "missing")[0] == 1
    (empty / "x.pgm").write_bytes(b"P5\n1 1\n255\n\x00")
    assert run("batch", empty)[0] == 1  # no sidecar


def test_usage_exit_codes():
    assert run()[0] == 1
    assert run("frobnicate")[0] == 1
    assert run("--help")[0] == 0


def test_module_entry_point(meter):
    r = subprocess.run(
        [sys.executable, "-m", "meterread", "--config", str(meter / "m.cfg"), "recognize", str(meter / "m.pgm")],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 0 and r.stdout == "30942 value=30942 warnings=0\n"
    r = subprocess.run([sys.executable, "-m", "meterread", "recognize"], capture_output=True, text=True)
    assert r.returncode == 1 and "usage" in r.stderr
