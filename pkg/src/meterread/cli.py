"""Command-line interface: ``recognize``, ``train``, ``batch`` and ``synth``.

Exit status is 0 on success (warnings included), 1 for usage, file and
format errors, and 2 when the input cannot be read as a meter (or, for
``train``/``batch``, when the corpus has nothing usable).
"""

from __future__ import annotations

import argparse
import functools
import glob
import os
import sys
from collections import Counter
from dataclasses import dataclass, field

from meterread import preproc, reading, synth
from meterread.halfword import FragmentTemplates
from meterread.projmatch import DEFAULT_PROFILE_LEN, TemplateFormatError, TemplateSet
from meterread.raster import PGMError, Rect, crop, load_pgm

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNREADABLE = 2


class UsageError(Exception):
    pass


class Unusable(Exception):
    pass


# ---------------------------------------------------------------------------
# config


CONFIG_KEYS = (
    "window",
    "cell_count",
    "cell_gap",
    "polarity",
    "min_area",
    "min_gap",
    "min_frag",
    "topo_margin",
    "templates",
    "fragments",
)


@dataclass(frozen=True)
class Config:
    geometry: preproc.MeterGeometry = field(default_factory=preproc.MeterGeometry)
    invert: bool = False
    thresholds: reading.Thresholds = field(default_factory=reading.Thresholds)
    templates: str | None = None
    fragments: str | None = None


def _int(key, text, lo):
    try:
        v = int(text)
    except ValueError:
        raise UsageError(f"config: {key} must be an integer, got {text!r}") from None
    if v < lo:
        raise UsageError(f"config: {key} must be >= {lo}, got {v}")
    return v


def _frac(key, text):
    try:
        v = float(text)
    except ValueError:
        raise UsageError(f"config: {key} must be a number, got {text!r}") from None
    if not 0.0 <= v < 0.5:
        raise UsageError(f"config: {key} must lie in [0, 0.5), got {v}")
    return v


def parse_config(text, base_dir="."):
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    raw = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise UsageError(f"config line {n}: unknown key {key!r}")
        if key in raw:
            raise UsageError(f"config line {n}: duplicate key {key!r}")
        raw[key] = value

    window = None
    if "window" in raw:
        parts = raw["window"].split()
        if len(parts) != 4:
            raise UsageError("config: window needs 'x y w h'")
        x, y = (_int("window", p, 0) for p in parts[:2])
        w, h = (_int("window", p, 1) for p in parts[2:])
        window = Rect(x, y, w, h)
    try:
        geometry = preproc.MeterGeometry(
            window,
            _int("cell_count", raw.get("cell_count", "5"), 1),
            _int("cell_gap", raw.get("cell_gap", "0"), 0),
        )
    except ValueError as exc:
        raise UsageError(f"config: {exc}") from None

    polarity = raw.get("polarity", "normal")
    if polarity not in ("normal", "invert"):
        raise UsageError(f"config: polarity must be 'normal' or 'invert', got {polarity!r}")
    min_area = raw.get("min_area", "auto")
    thresholds = reading.Thresholds(
        min_area=None if min_area == "auto" else _int("min_area", min_area, 1),
        min_gap=_int("min_gap", raw.get("min_gap", "2"), 1),
        min_frag=_frac("min_frag", raw.get("min_frag", "0.025")),
        topo_margin=_frac("topo_margin", raw.get("topo_margin", "0.05")),
    )

    def path(key):
        if key not in raw:
            return None
        return os.path.normpath(os.path.join(base_dir, raw[key]))

    return Config(geometry, polarity == "invert", thresholds, path("templates"), path("fragments"))


def load_config(path):
    if path is None:
        return Config()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, os.path.dirname(os.path.abspath(path)))


def format_config(cfg):
    g, t = cfg.geometry, cfg.thresholds
    lines = []
    if g.window is not None:
        w = g.window
        lines.append(f"window = {w.x} {w.y} {w.w} {w.h}")
    lines += [
        f"cell_count = {g.cell_count}",
        f"cell_gap = {g.cell_gap}",
        f"polarity = {'invert' if cfg.invert else 'normal'}",
        f"min_area = {'auto' if t.min_area is None else t.min_area}",
        f"min_gap = {t.min_gap}",
        f"min_frag = {t.min_frag}",
        f"topo_margin = {t.topo_margin}",
    ]
    if cfg.templates:
        lines.append(f"templates = {cfg.templates}")
    if cfg.fragments:
        lines.append(f"fragments = {cfg.fragments}")
    return "\n".join(lines) + "\n"


@functools.lru_cache(maxsize=None)
def builtin_templates():
    return synth.synthetic_templates()


def build_recognizer(cfg):
    if cfg.templates is None:
        templates, fragments = builtin_templates()
    else:
        try:
            templates = TemplateSet.load(cfg.templates)
            fragments = FragmentTemplates.load(cfg.fragments) if cfg.fragments else None
        except OSError as exc:
            raise UsageError(f"cannot read templates: {exc.filename}: {exc.strerror}") from None
        except TemplateFormatError as exc:
            raise UsageError(f"bad template file: {exc}") from None
        if fragments is not None and fragments.profile_len != templates.profile_len:
            raise UsageError("template and fragment files disagree on profile length")
    return reading.Recognizer(templates, fragments, cfg.geometry, cfg.thresholds, cfg.invert)


def _load_image(path):
    try:
        return load_pgm(path)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except PGMError as exc:
        raise UsageError(f"bad PGM: {exc}") from None


def _read(rec, img, name):
    g = rec.geometry.window
    if g is not None and not g.fits(img.shape[1], img.shape[0]):
        raise Unusable(f"{name}: window {g} outside {img.shape[1]}x{img.shape[0]} image")
    return rec.read(img)


# ---------------------------------------------------------------------------
# corpora


def corpus_items(directory):
    """Sorted (name, image path, sidecar path) triples."""
    if not os.path.isdir(directory):
        raise UsageError(f"not a directory: {directory}")
    items = []
    for img in sorted(glob.glob(os.path.join(directory, "*.pgm"))):
        stem = os.path.splitext(img)[0]
        gt = stem + ".gt"
        if not os.path.exists(gt):
            raise UsageError(f"missing sidecar {gt}")
        items.append((os.path.basename(stem), img, gt))
    return items


def _load_gt(path):
    try:
        return synth.load_gt(path)
    except synth.SidecarError as exc:
        raise UsageError(f"bad sidecar {path}: {exc}") from None


# ---------------------------------------------------------------------------
# commands


def cmd_recognize(args, out):
    cfg = load_config(args.config)
    rec = build_recognizer(cfg)
    img = _load_image(args.image)
    result = _read(rec, img, args.image)
    print(result.summary(), file=out)
    if args.verbose:
        for c in result.cells:
            print(c.describe(), file=out)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if all(isinstance(c.verdict, reading.Unreadable) for c in result.cells):
        return EXIT_UNREADABLE
    return EXIT_OK


def cmd_train(args, out):
    cfg = load_config(args.config)
    if args.profile_len < 2:
        raise UsageError("--profile-len must be >= 2")
    items = corpus_items(args.corpus)
    masks = {d: [] for d in range(10)}
    for name, img_path, gt_path in items:
        img = _load_image(img_path)
        states, boxes = _load_gt(gt_path)
        for state, box in zip(states, boxes):
            if not isinstance(state, synth.Full):
                continue
            if not box.fits(img.shape[1], img.shape[0]):
                raise UsageError(f"{name}: box {box} outside image")
            cell = crop(img, box)
            mask = reading.clean_cell(cell, cfg.invert, cfg.thresholds.area_for(cell.shape))
            if mask.any():
                masks[state.digit].append(mask)
    missing = [d for d in range(10) if not masks[d]]
    if missing:
        raise Unusable("no full-word samples for digit(s) " + " ".join(map(str, missing)))
    templates, fragments = reading.train(masks, args.profile_len)
    templates.save(args.output)
    fragments.save(args.output + ".frag")
    counts = " ".join(f"{d}:{templates.sample_counts[d]}" for d in range(10))
    print(f"templates {args.output} samples {counts}", file=out)
    return EXIT_OK


def _acc(c, t):
    return f"{c / t:.3f}" if t else "n/a"


def batch_report(rows, cells):
    """Report text for ``rows`` of (name, truth digits, reading) and per-cell
    (truth state, got digit) pairs."""
    lines = []
    n = correct = 0
    for name, truth, got in rows:
        ok = truth == got
        n += 1
        correct += ok
        lines.append(f"img {name} truth {truth} got {got} ok {int(ok)}")
    full = [(s.floor, g) for s, g in cells if isinstance(s, synth.Full)]
    half = [(s.floor, g) for s, g in cells if not isinstance(s, synth.Full)]
    for label, pairs in (("fullword", full), ("halfword", half)):
        c = sum(t == g for t, g in pairs)
        lines.append(f"{label} correct {c} total {len(pairs)} acc {_acc(c, len(pairs))}")
    for d in range(10):
        pairs = [(t, g) for s, g in cells for t in (s.floor,) if t == d]
        c = sum(t == g for t, g in pairs)
        lines.append(f"digit {d} correct {c} total {len(pairs)} acc {_acc(c, len(pairs))}")
    conf = Counter((s.floor, g) for s, g in cells)
    for (t, g), k in sorted(conf.items()):
        lines.append(f"confusion {t} {g} {k}")
    summary = f"readings {n} correct {correct} acc {_acc(correct, n)}"
    lines.append(summary)
    return "\n".join(lines) + "\n", summary


def cmd_batch(args, out):
    cfg = load_config(args.config)
    items = corpus_items(args.corpus)
    if not items:
        raise Unusable(f"empty corpus: {args.corpus}")
    rec = build_recognizer(cfg)
    rows, cells = [], []
    for name, img_path, gt_path in items:
        img = _load_image(img_path)
        states, _ = _load_gt(gt_path)
        result = _read(rec, img, name)
        if len(states) != len(result.digits):
            raise UsageError(f"{name}: sidecar has {len(states)} wheels, config expects {len(result.digits)}")
        rows.append((name, "".join(str(s.floor) for s in states), result.text))
        cells.extend(zip(states, result.digits))
    text, summary = batch_report(rows, cells)
    if args.report:
        try:
            with open(args.report, "w", encoding="ascii", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write report {args.report}: {exc.strerror}") from None
    print(summary, file=out)
    return EXIT_OK


def cmd_synth(args, out):
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    try:
        ranges = synth.CorpusRanges(
            cells=args.cells,
            rolling_frac=args.rolling_frac,
            offset_min=args.offset_min,
            offset_max=args.offset_max,
            sigma=args.sigma,
            salt_pepper=args.salt_pepper,
            cell_w=args.cell_w,
            cell_h=args.cell_h,
            separator_rows=args.separator,
            border_px=args.border,
        )
        if not 0.0 <= ranges.rolling_frac <= 1.0:
            raise ValueError("--rolling-frac must lie in [0, 1]")
        if not 0.0 < ranges.offset_min <= ranges.offset_max < 1.0:
            raise ValueError("offsets must satisfy 0 < min <= max < 1")
        first = synth.corpus_spec(args.seed, 0, ranges)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        synth.generate_corpus(args.n, args.output, ranges, args.seed)
    except OSError as exc:
        raise UsageError(f"cannot write corpus to {args.output}: {exc.strerror}") from None
    if args.write_config:
        cfg = Config(preproc.MeterGeometry(synth.window_rect(first), ranges.cells))
        with open(args.write_config, "w", encoding="ascii", newline="\n") as fh:
            fh.write(format_config(cfg))
    print(f"seed {args.seed}", file=out)
    print(f"wrote {args.n} images to {args.output}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="key = value configuration file")
    common.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS, help="per-cell detail")

    p = _Parser(prog="meterread", description="Read odometer-style water meters from PGM images.")
    p.add_argument("--config", default=None, help="key = value configuration file")
    p.add_argument("--verbose", action="store_true", default=False, help="per-cell detail")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("recognize", parents=[common], help="read one meter image")
    r.add_argument("image")
    r.set_defaults(func=cmd_recognize)

    t = sub.add_parser("train", parents=[common], help="train templates from a labelled corpus")
    t.add_argument("corpus")
    t.add_argument("output", help="PMTPL file; fragment templates go to OUTPUT.frag")
    t.add_argument("--profile-len", type=int, default=DEFAULT_PROFILE_LEN)
    t.set_defaults(func=cmd_train)

    b = sub.add_parser("batch", parents=[common], help="score recognition over a labelled corpus")
    b.add_argument("corpus")
    b.add_argument("--report", default=None, help="write the per-image report here")
    b.set_defaults(func=cmd_batch)

    s = sub.add_parser("synth", parents=[common], help="generate a synthetic labelled corpus")
    s.add_argument("output")
    d = synth.CorpusRanges()
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cells", type=int, default=d.cells)
    s.add_argument("--rolling-frac", type=float, default=d.rolling_frac)
    s.add_argument("--offset-min", type=float, default=d.offset_min)
    s.add_argument("--offset-max", type=float, default=d.offset_max)
    s.add_argument("--sigma", type=float, default=d.sigma)
    s.add_argument("--salt-pepper", type=float, default=d.salt_pepper)
    s.add_argument("--cell-w", type=int, default=d.cell_w)
    s.add_argument("--cell-h", type=int, default=d.cell_h)
    s.add_argument("--separator", type=int, default=d.separator_rows)
    s.add_argument("--border", type=int, default=d.border_px)
    s.add_argument("--write-config", default=None, help="also write a matching recognition config")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"meterread: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Unusable as exc:
        print(f"meterread: {exc}", file=sys.stderr)
        return EXIT_UNREADABLE


if __name__ == "__main__":
    sys.exit(main())
