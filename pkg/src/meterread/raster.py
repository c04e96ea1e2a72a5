"""Raster types and binary PGM (P5) I/O.

Gray images are 2-D ``uint8`` arrays (0 = black, 255 = white) and binary
images are 2-D ``bool`` arrays with ``True`` marking ink. Both are indexed
``[row, column]``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np


class PGMError(ValueError):
    """Base class for PGM decoding failures."""


class PGMHeaderError(PGMError):
    pass


class PGMMaxvalError(PGMError):
    pass


class PGMTruncatedError(PGMError):
    pass


@dataclass(frozen=True)
class Rect:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"rectangle extents must be positive, got {self.w}x{self.h}")

    def fits(self, width, height):
        return self.x >= 0 and self.y >= 0 and self.x + self.w <= width and self.y + self.h <= height

    def slices(self):
        return slice(self.y, self.y + self.h), slice(self.x, self.x + self.w)


def as_gray(img):
    """Validate and return ``img`` as a 2-D uint8 array."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"gray image must be a non-empty 2-D array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        raise ValueError(f"gray image must be uint8, got {arr.dtype}")
    return arr


def _header_tokens(data):
    """Yield (token, end_offset) for the PGM header, skipping '#' comments."""
    pos = 0
    n = len(data)
    while True:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if pos >= n:
            return
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        yield data[start:pos], pos


def load_pgm(path):
    """Read a binary P5 PGM with maxval 255; pixel values are returned unscaled."""
    with open(path, "rb") as fh:
        data = fh.read()

    tokens = _header_tokens(data)
    fields = []
    end = 0
    for tok, end in tokens:
        fields.append(tok)
        if len(fields) == 4:
            break
    if len(fields) < 4:
        raise PGMHeaderError(f"{path}: incomplete PGM header")
    if fields[0] != b"P5":
        raise PGMHeaderError(f"{path}: not a binary PGM (magic {fields[0]!r})")
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError:
        raise PGMHeaderError(f"{path}: non-numeric header field") from None
    if width < 1 or height < 1:
        raise PGMHeaderError(f"{path}: bad dimensions {width}x{height}")
    if maxval != 255:
        raise PGMMaxvalError(f"{path}: maxval {maxval} unsupported (need 255)")
    # exactly one whitespace byte separates maxval from the raster
    if end >= len(data) or not data[end : end + 1].isspace():
        raise PGMTruncatedError(f"{path}: missing pixel payload")
    payload = data[end + 1 :]
    need = width * height
    if len(payload) < need:
        raise PGMTruncatedError(f"{path}: expected {need} pixel bytes, found {len(payload)}")
    return np.frombuffer(payload[:need], dtype=np.uint8).reshape(height, width).copy()


def save_pgm(img, path):
    img = as_gray(img)
    h, w = img.shape
    with open(os.fspath(path), "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img).tobytes())


def crop(img, r):
    """Return a copy of the ``r`` sub-image."""
    img = np.asarray(img)
    if not r.fits(img.shape[1], img.shape[0]):
        raise ValueError(f"{r} outside {img.shape[1]}x{img.shape[0]} image")
    return img[r.slices()].copy()
