"""Intensity histograms and peak/valley extraction."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import List, Optional

import numpy as np
from scipy.signal import find_peaks

from .exceptions import EvenWindow, NoPeaks
from .image_io import GrayImage


@dataclass(frozen=True, eq=False)
class Histogram:
    counts: np.ndarray
    bit_depth: int

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or counts.size != 1 << self.bit_depth:
            raise ValueError(
                f"histogram of a {self.bit_depth}-bit image needs {1 << self.bit_depth} bins"
            )
        if np.any(counts < 0):
            raise ValueError("histogram counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self):
        return self.counts.sum()

    @property
    def levels(self) -> int:
        return self.counts.size

    def support(self) -> np.ndarray:
        """Intensities with a nonzero count, ascending."""
        return np.flatnonzero(self.counts)

    def __eq__(self, other):
        if not isinstance(other, Histogram):
            return NotImplemented
        return self.bit_depth == other.bit_depth and bool(
            np.array_equal(self.counts, other.counts)
        )


def compute_histogram(img: GrayImage) -> Histogram:
    counts = np.bincount(img.flat(), minlength=1 << img.bit_depth)
    return Histogram(counts.astype(np.int64), img.bit_depth)


def smooth(hist: Histogram, window: int) -> Histogram:
    """Centered moving average; the end bins are replicated past the edges."""
    if window < 1 or window % 2 == 0:
        raise EvenWindow(f"smoothing window must be odd and >= 1, got {window}")
    if window == 1:
        return Histogram(hist.counts.astype(float), hist.bit_depth)
    half = window // 2
    padded = np.pad(hist.counts, half, mode="edge")
    # Window sums via cumsum stay exact for integer counts.
    csum = np.concatenate([[0], np.cumsum(padded)])
    sums = csum[window:] - csum[:-window]
    return Histogram(sums / window, hist.bit_depth)


@dataclass(frozen=True)
class Peak:
    mean: int
    width: float
    left_valley: int
    right_valley: int


@dataclass(frozen=True)
class PeakSet:
    peaks: tuple

    def __post_init__(self):
        peaks = tuple(self.peaks)
        if not peaks:
            raise NoPeaks("a PeakSet needs at least one peak")
        means = [p.mean for p in peaks]
        if means != sorted(means) or len(set(means)) != len(means):
            raise ValueError("peaks must be strictly ascending by mean")
        for p in peaks:
            if not p.left_valley <= p.mean <= p.right_valley:
                raise ValueError(f"peak {p.mean} lies outside its valleys")
            if not p.width > 0:
                raise ValueError(f"peak {p.mean} has non-positive width {p.width}")
        for a, b in zip(peaks, peaks[1:]):
            if a.right_valley != b.left_valley:
                raise ValueError(
                    f"adjacent peaks {a.mean} and {b.mean} do not share a valley"
                )
        object.__setattr__(self, "peaks", peaks)

    @property
    def p(self) -> int:
        return len(self.peaks)

    @property
    def means(self) -> List[int]:
        return [p.mean for p in self.peaks]

    @property
    def widths(self) -> List[float]:
        return [p.width for p in self.peaks]

    def to_dict(self) -> dict:
        return {"peaks": [asdict(p) for p in self.peaks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "PeakSet":
        return cls(
            tuple(
                Peak(
                    mean=int(p["mean"]),
                    width=float(p["width"]),
                    left_valley=int(p["left_valley"]),
                    right_valley=int(p["right_valley"]),
                )
                for p in doc["peaks"]
            )
        )

    @classmethod
    def from_json(cls, text: str) -> "PeakSet":
        return cls.from_dict(json.loads(text))


@dataclass
class PeakConfig:
    """Knobs for :func:`detect_peaks`.

    Histograms with at most ``sparse_levels`` occupied bins (small synthetic
    images) are scanned unsmoothed over their occupied bins only, so that
    e.g. counts ``[4, 7, 3, 2]`` at four scattered intensities read as one
    mode rather than four isolated spikes.
    """

    smooth_window: int = 9
    prominence_fraction: float = 0.05
    min_separation: int = 10
    width_divisor: float = 2.0
    sparse_levels: int = 16
    min_width: float = 1.0


def _peak_indices(signal: np.ndarray, prominence: float, distance: Optional[int]):
    # Zero padding lets maxima sitting on either end of the range register.
    padded = np.concatenate([[0.0], signal, [0.0]])
    kwargs = {"prominence": prominence}
    if distance is not None and distance > 1:
        kwargs["distance"] = distance
    idx, _ = find_peaks(padded, **kwargs)
    return idx - 1


def _valley_between(signal: np.ndarray, lo: int, hi: int) -> int:
    return lo + int(np.argmin(signal[lo : hi + 1]))


def detect_peaks(hist: Histogram, cfg: Optional[PeakConfig] = None) -> PeakSet:
    cfg = cfg or PeakConfig()
    support = hist.support()
    if support.size == 0:
        raise NoPeaks("histogram has no occupied bins")

    if support.size <= cfg.sparse_levels:
        values = hist.counts[support].astype(float)
        threshold = cfg.prominence_fraction * values.max()
        idx = _peak_indices(values, threshold, None)
        means = support[idx]
        inner = [support[_valley_between(values, a, b)] for a, b in zip(idx, idx[1:])]
    else:
        smoothed = smooth(hist, cfg.smooth_window).counts
        threshold = cfg.prominence_fraction * smoothed.max()
        means = _peak_indices(smoothed, threshold, cfg.min_separation)
        inner = [_valley_between(smoothed, a, b) for a, b in zip(means, means[1:])]
    if len(means) == 0:
        raise NoPeaks("no histogram peak passes the prominence filter")

    left = min(int(support[0]), int(means[0]))
    right = max(int(support[-1]), int(means[-1]))
    valleys = [left] + [int(v) for v in inner] + [right]
    peaks = []
    for k, m in enumerate(means):
        lo, hi = valleys[k], valleys[k + 1]
        width = max((hi - lo) / cfg.width_divisor, cfg.min_width)
        peaks.append(Peak(int(m), float(width), lo, hi))
    return PeakSet(tuple(peaks))
