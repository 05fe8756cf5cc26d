"""Grayscale image container and Netpbm (PGM) reading/writing."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    InvalidImage,
    IoFailure,
    MalformedHeader,
    MaxvalOutOfRange,
    TruncatedData,
)

_WHITESPACE = b" \t\n\r\v\f"


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Row-major grid of integer intensities with a declared bit depth.

    ``pixels`` is stored as a read-only ``(height, width)`` integer array.
    """

    pixels: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2:
            raise InvalidImage(f"expected a 2-D pixel grid, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidImage("image must be at least 1x1")
        if not 1 <= int(self.bit_depth) <= 8:
            raise InvalidImage(f"bit_depth must be in 1..8, got {self.bit_depth}")
        if arr.dtype.kind == "f":
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise InvalidImage("pixel values must be integers")
        elif arr.dtype.kind not in "iub":
            raise InvalidImage(f"unsupported pixel dtype {arr.dtype}")
        arr = arr.astype(np.int64)
        if arr.min() < 0 or arr.max() > (1 << int(self.bit_depth)) - 1:
            raise InvalidImage(
                f"pixel values must lie in [0, {(1 << int(self.bit_depth)) - 1}]"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)
        object.__setattr__(self, "bit_depth", int(self.bit_depth))

    @classmethod
    def from_flat(cls, width, height, bit_depth, values):
        values = np.asarray(values)
        if values.size != width * height:
            raise InvalidImage(
                f"{values.size} pixel values do not fill a {width}x{height} grid"
            )
        return cls(values.reshape(height, width), bit_depth)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def maxval(self) -> int:
        return (1 << self.bit_depth) - 1

    @property
    def shape(self):
        return self.pixels.shape

    def flat(self) -> np.ndarray:
        return self.pixels.ravel()

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (
            self.bit_depth == other.bit_depth
            and self.pixels.shape == other.pixels.shape
            and bool(np.array_equal(self.pixels, other.pixels))
        )

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height}, bit_depth={self.bit_depth})"


def bit_depth_for_maxval(maxval: int) -> int:
    return max(1, math.ceil(math.log2(maxval + 1)))


def _next_token(data: bytes, pos: int):
    """Return (token, start, end) of the next header token, skipping comments."""
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c in _WHITESPACE:
            pos += 1
        elif c == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        pos += 1
    return data[start:pos], start, pos


def _header_int(data, pos, what):
    tok, start, end = _next_token(data, pos)
    if not tok:
        raise TruncatedData(f"missing {what} in header", start)
    if not tok.isdigit():
        raise MalformedHeader(f"expected integer {what}, found {tok[:16]!r}", start)
    return int(tok), start, end


def parse_pgm(data: bytes) -> GrayImage:
    """Decode P2 (ASCII) or P5 (binary) PGM bytes."""
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise MalformedHeader(f"unsupported magic number {magic!r}", 0)
    pos = 2
    if len(data) > 2 and data[2:3] not in _WHITESPACE and data[2:3] != b"#":
        raise MalformedHeader("magic number must be followed by whitespace", 2)
    width, start, pos = _header_int(data, pos, "width")
    if width < 1:
        raise MalformedHeader("width must be positive", start)
    height, start, pos = _header_int(data, pos, "height")
    if height < 1:
        raise MalformedHeader("height must be positive", start)
    maxval, start, pos = _header_int(data, pos, "maxval")
    if not 1 <= maxval <= 255:
        raise MaxvalOutOfRange(f"maxval {maxval} outside 1..255", start)
    bit_depth = bit_depth_for_maxval(maxval)
    count = width * height

    if magic == b"P5":
        if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
            raise TruncatedData("missing whitespace before raster", pos)
        pos += 1
        raster = data[pos : pos + count]
        if len(raster) < count:
            raise TruncatedData(
                f"raster holds {len(raster)} of {count} bytes", pos + len(raster)
            )
        values = np.frombuffer(raster, dtype=np.uint8).astype(np.int64)
        bad = np.nonzero(values > maxval)[0]
        if bad.size:
            raise MalformedHeader(
                f"sample {values[bad[0]]} exceeds maxval {maxval}", pos + int(bad[0])
            )
    else:
        values = np.empty(count, dtype=np.int64)
        for k in range(count):
            tok, start, pos = _next_token(data, pos)
            if not tok:
                raise TruncatedData(f"raster holds {k} of {count} samples", start)
            if not tok.isdigit():
                raise MalformedHeader(f"non-numeric sample {tok[:16]!r}", start)
            v = int(tok)
            if v > maxval:
                raise MalformedHeader(f"sample {v} exceeds maxval {maxval}", start)
            values[k] = v
    return GrayImage.from_flat(width, height, bit_depth, values)


def load_pgm(path) -> GrayImage:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return parse_pgm(data)


def encode_pgm(img: GrayImage, binary: bool = True) -> bytes:
    header = f"P{5 if binary else 2}\n{img.width} {img.height}\n{img.maxval}\n".encode()
    if binary:
        return header + img.pixels.astype(np.uint8).tobytes()
    rows = (" ".join(str(int(v)) for v in row) for row in img.pixels)
    return header + ("\n".join(rows) + "\n").encode()


def save_pgm(img: GrayImage, path, binary: bool = True) -> None:
    """Write ``img`` as PGM with maxval ``2**bit_depth - 1``."""
    payload = encode_pgm(img, binary=binary)
    try:
        parent = os.path.dirname(os.fspath(path))
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
