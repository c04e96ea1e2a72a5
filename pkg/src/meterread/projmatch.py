"""Column projection profiles, template training and minimum-error matching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DIGITS = tuple(range(10))
DEFAULT_PROFILE_LEN = 32
TEMPLATE_MAGIC = "PMTPL 1"


class TemplateFormatError(ValueError):
    pass


class ProjectionProfile:
    """Fixed-length curve of per-column ink fractions, each in [0, 1]."""

    __slots__ = ("values",)

    def __init__(self, values):
        v = np.array(values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("profile must be a non-empty 1-D sequence")
        if np.any(v < 0) or np.any(v > 1) or not np.all(np.isfinite(v)):
            raise ValueError("profile values must lie in [0, 1]")
        v.setflags(write=False)
        self.values = v

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        return isinstance(other, ProjectionProfile) and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"ProjectionProfile(len={len(self)})"


@dataclass(frozen=True)
class MatchRanking:
    """(digit, error) pairs sorted by error, smaller digit first on ties."""

    scores: tuple

    @classmethod
    def from_errors(cls, errors):
        errors = [float(e) for e in errors]
        if len(errors) != 10:
            raise ValueError("need one error per digit")
        if any(e < 0 for e in errors):
            raise ValueError("errors must be nonnegative")
        return cls(tuple(sorted(zip(DIGITS, errors), key=lambda de: (de[1], de[0]))))

    @property
    def top(self):
        return self.scores[0][0]

    @property
    def top_error(self):
        return self.scores[0][1]

    def error(self, digit):
        for d, e in self.scores:
            if d == digit:
                return e
        raise KeyError(digit)

    def errors(self):
        """Errors indexed by digit."""
        out = [0.0] * 10
        for d, e in self.scores:
            out[d] = e
        return out

    def best_of(self, digits):
        """Highest-ranked digit among ``digits``."""
        for d, _ in self.scores:
            if d in digits:
                return d
        raise ValueError(f"none of {digits} in ranking")


@dataclass(frozen=True)
class TemplateSet:
    profile_len: int
    templates: dict
    sample_counts: dict

    def __post_init__(self):
        if set(self.templates) != set(DIGITS) or set(self.sample_counts) != set(DIGITS):
            raise ValueError("template set needs all ten digits")
        for d in DIGITS:
            if len(self.templates[d]) != self.profile_len:
                raise ValueError(f"template {d} has length {len(self.templates[d])}, expected {self.profile_len}")
            if self.sample_counts[d] < 1:
                raise ValueError(f"digit {d} has no samples")

    def matrix(self):
        return np.stack([self.templates[d].values for d in DIGITS])

    def dumps(self):
        lines = [TEMPLATE_MAGIC, f"profile_len {self.profile_len}"]
        for d in DIGITS:
            lines.append(f"digit {d} samples {self.sample_counts[d]}")
            lines.append(" ".join(f"{v:.6f}" for v in self.templates[d].values))
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text):
        lines = text.splitlines()
        if not lines or lines[0] != TEMPLATE_MAGIC:
            raise TemplateFormatError("bad template magic")
        if len(lines) != 22:
            raise TemplateFormatError(f"expected 22 lines, found {len(lines)}")
        head = lines[1].split()
        if len(head) != 2 or head[0] != "profile_len":
            raise TemplateFormatError("bad profile_len line")
        try:
            P = int(head[1])
        except ValueError:
            raise TemplateFormatError("bad profile_len value") from None
        templates, counts = {}, {}
        for d in DIGITS:
            tag = lines[2 + 2 * d].split()
            if len(tag) != 4 or tag[0] != "digit" or tag[1] != str(d) or tag[2] != "samples":
                raise TemplateFormatError(f"bad header for digit {d}")
            try:
                counts[d] = int(tag[3])
                vals = [float(x) for x in lines[3 + 2 * d].split()]
                templates[d] = ProjectionProfile(vals)
            except ValueError as exc:
                raise TemplateFormatError(f"digit {d}: {exc}") from None
        try:
            return cls(P, templates, counts)
        except ValueError as exc:
            raise TemplateFormatError(str(exc)) from None

    @classmethod
    def load(cls, path):
        with open(path, encoding="ascii") as fh:
            return cls.loads(fh.read())


def column_profile(bin_img, box):
    """Ink fraction of each column of ``box``: column count / ``box.h``."""
    mask = np.asarray(bin_img, dtype=bool)
    if not box.fits(mask.shape[1], mask.shape[0]):
        raise ValueError(f"{box} outside {mask.shape[1]}x{mask.shape[0]} image")
    region = mask[box.slices()]
    if not region.any():
        raise ValueError("box contains no foreground")
    return region.sum(axis=0) / box.h


def resample_profile(raw, P=DEFAULT_PROFILE_LEN):
    raw = np.asarray(raw, dtype=float)
    if raw.size == 0:
        raise ValueError("empty profile")
    if P < 2:
        raise ValueError("profile length must be >= 2")
    if raw.size == 1:
        out = np.full(P, raw[0])
    else:
        grid = np.linspace(0.0, raw.size - 1, P)
        out = np.interp(grid, np.arange(raw.size), raw)
    return ProjectionProfile(np.clip(out, 0.0, 1.0))


def train_templates(samples):
    """Per-digit pointwise mean of the sample profiles."""
    missing = [d for d in DIGITS if not samples.get(d)]
    if missing:
        raise ValueError(f"no samples for digit(s) {missing}")
    lengths = {len(p) for d in DIGITS for p in samples[d]}
    if len(lengths) != 1:
        raise ValueError(f"sample profiles disagree on length: {sorted(lengths)}")
    (P,) = lengths
    templates = {d: ProjectionProfile(np.mean([p.values for p in samples[d]], axis=0)) for d in DIGITS}
    return TemplateSet(P, templates, {d: len(samples[d]) for d in DIGITS})


def match_digit(p, t):
    """Rank digits by mean absolute difference between ``p`` and each template."""
    if len(p) != t.profile_len:
        raise ValueError(f"profile length {len(p)} != template length {t.profile_len}")
    errors = np.abs(t.matrix() - p.values).mean(axis=1)
    return MatchRanking.from_errors(errors)
