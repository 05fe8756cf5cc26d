"""Threshold extraction from Gaussian-weighted intensity states.

Each histogram peak yields one Gaussian effect. The weighted state is
loaded into a circuit, simulated, and read out either exactly or by shot
sampling. A unimodal histogram takes the most probable intensity as its
threshold; a multimodal one takes, for every adjacent pair of peaks, the
intensity where the two readouts come closest to equal.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import EmptyOverlap
from .histogram import Histogram, PeakConfig, PeakSet, compute_histogram, detect_peaks
from .image_io import GrayImage
from .povm import GaussianEffect, IntensityBasis, apply_effect, build_uniform_state
from .qcircuit import sample, simulate
from .stateprep import build_load_circuit, gen_angles

LEVEL_RULES = ("segment-mean", "peak-value", "binary-extremes")

# Probabilities at or below this count as no mass: simulated rotations leave
# round-off residue (~1e-33) on states that should be empty.
MASS_FLOOR = 1e-12


@dataclass(frozen=True)
class ThresholdSet:
    thresholds: Tuple[int, ...]
    provenance: Tuple[dict, ...] = ()
    mode: str = "exact"
    shots: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        ts = tuple(int(t) for t in self.thresholds)
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError(f"thresholds must be strictly ascending, got {ts}")
        if ts and ts[0] < 0:
            raise ValueError("thresholds must be nonnegative")
        prov = tuple(self.provenance) or tuple({"kind": "manual"} for _ in ts)
        if len(prov) != len(ts):
            raise ValueError("one provenance record per threshold is required")
        object.__setattr__(self, "thresholds", ts)
        object.__setattr__(self, "provenance", prov)

    def __len__(self):
        return len(self.thresholds)

    def to_dict(self) -> dict:
        doc = {
            "mode": self.mode,
            "thresholds": [
                {"value": t, "provenance": p} for t, p in zip(self.thresholds, self.provenance)
            ],
        }
        if self.mode == "sampled":
            doc["shots"] = self.shots
            doc["seed"] = self.seed
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "ThresholdSet":
        values, prov = [], []
        for item in doc["thresholds"]:
            if isinstance(item, dict):
                values.append(int(item["value"]))
                prov.append(item.get("provenance", {"kind": "manual"}))
            else:
                values.append(int(item))
                prov.append({"kind": "manual"})
        return cls(
            tuple(values), tuple(prov), doc.get("mode", "exact"), doc.get("shots"), doc.get("seed")
        )

    @classmethod
    def from_json(cls, text: str) -> "ThresholdSet":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class PeakMeasurement:
    """Readout distribution over the basis for one peak's weighted state."""

    peak_index: int
    probabilities: np.ndarray
    counts: Optional[Dict[int, int]] = None
    shots: Optional[int] = None

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.size == 0:
            raise ValueError("measurement is empty")
        if abs(p.sum() - 1) > 1e-6:
            raise ValueError(f"measurement probabilities sum to {p.sum()}")
        object.__setattr__(self, "probabilities", p)


@dataclass
class ThresholdConfig:
    peaks: PeakConfig = field(default_factory=PeakConfig)
    mode: str = "exact"
    shots: int = 1000
    seed: Optional[int] = None
    basis: str = "auto"
    binary: bool = False
    peak_override: Optional[PeakSet] = None
    smooth_sampled: bool = True

    def __post_init__(self):
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        if self.basis not in ("auto", "full", "present"):
            raise ValueError(f"basis must be auto, full or present, got {self.basis!r}")
        if self.mode == "sampled":
            if self.shots < 1:
                raise ValueError("sampled mode needs shots >= 1")
            if self.seed is None:
                raise ValueError("sampled mode needs an explicit seed")


@dataclass
class ThresholdAnalysis:
    """Everything produced on the way to a ThresholdSet."""

    histogram: Histogram
    peaks: PeakSet
    basis: IntensityBasis
    measurements: List[PeakMeasurement]
    thresholds: ThresholdSet
    degenerate: bool = False

    def curves(self) -> np.ndarray:
        """Rows of (intensity, P_0, ..., P_{p-1}) for plotting."""
        cols = [np.array(self.basis.intensities, dtype=float)]
        cols += [m.probabilities for m in self.measurements]
        return np.column_stack(cols)


def measure_peak(
    effect: GaussianEffect,
    peak_index: int = 0,
    mode: str = "exact",
    shots: int = 1000,
    seed: Optional[int] = None,
) -> PeakMeasurement:
    """Weight the uniform state, load it into a circuit, simulate and read out."""
    basis = effect.basis
    weighted = apply_effect(effect, build_uniform_state(basis))
    circuit = build_load_circuit(gen_angles(weighted.padded_probabilities()))
    state = simulate(circuit)
    size = len(basis)
    if mode == "exact":
        probs = np.abs(state[:size]) ** 2
        return PeakMeasurement(peak_index, probs / probs.sum())
    if circuit.width == 0:
        return PeakMeasurement(peak_index, np.ones(1), {0: shots}, shots)
    raw = sample(state, circuit.measured, shots, seed)
    counts = {int(bits, 2): n for bits, n in raw.items()}
    tallies = np.zeros(size)
    for idx, n in counts.items():
        tallies[idx] = n
    return PeakMeasurement(peak_index, tallies / shots, counts, shots)


def unimodal_threshold(meas: PeakMeasurement, basis: IntensityBasis) -> int:
    """Intensity of the most probable basis state; ties go to the lower one."""
    return basis.intensity_of(int(np.argmax(meas.probabilities)))


def crossing_threshold(
    meas_k: PeakMeasurement,
    meas_k1: PeakMeasurement,
    basis: IntensityBasis,
    window: Sequence[int],
    smoothing: int = 1,
) -> int:
    """Intensity in ``window`` where the two readouts are closest to equal.

    Only states with mass above ``MASS_FLOOR`` in both readouts compete; ties go to the
    lower intensity. ``smoothing > 1`` first applies an edge-replicated
    moving average of that (odd) length to both readouts, which tames shot
    noise in the flat region around a crossing.
    """
    lo, hi = window
    if lo > hi:
        raise ValueError(f"window {window} is not ordered")
    vals = np.array(basis.intensities)
    p = _moving_average(meas_k.probabilities, smoothing)
    q = _moving_average(meas_k1.probabilities, smoothing)
    mask = (vals >= lo) & (vals <= hi) & (p > MASS_FLOOR) & (q > MASS_FLOOR)
    if not mask.any():
        raise EmptyOverlap(f"no state in [{lo}, {hi}] has mass under both peaks")
    idx = np.flatnonzero(mask)
    gap = np.abs(p[idx] - q[idx])
    return int(vals[idx[int(np.argmin(gap))]])


def _moving_average(p: np.ndarray, window: int) -> np.ndarray:
    if window <= 1:
        return p
    if window % 2 == 0:
        raise ValueError("smoothing window must be odd")
    padded = np.pad(p, window // 2, mode="edge")
    return np.convolve(padded, np.ones(window) / window, mode="valid")


def sampled_smoothing_window(width_k: float, width_k1: float) -> int:
    """Largest odd length not above half the narrower peak width."""
    half = min(width_k, width_k1) / 2
    return max(1, 2 * int((half - 1) // 2) + 1)


def choose_basis(hist: Histogram, cfg: ThresholdConfig) -> IntensityBasis:
    if cfg.basis == "full":
        return IntensityBasis.full(hist.bit_depth)
    if cfg.basis == "present":
        return IntensityBasis.present(hist.counts)
    if hist.support().size <= cfg.peaks.sparse_levels:
        return IntensityBasis.present(hist.counts)
    return IntensityBasis.full(hist.bit_depth)


def _dominant_peak(hist: Histogram, peaks: PeakSet) -> int:
    heights = [hist.counts[p.mean] for p in peaks.peaks]
    return int(np.argmax(heights))


def analyze(img: GrayImage, cfg: Optional[ThresholdConfig] = None) -> ThresholdAnalysis:
    cfg = cfg or ThresholdConfig()
    hist = compute_histogram(img)
    peaks = cfg.peak_override or detect_peaks(hist, cfg.peaks)
    basis = choose_basis(hist, cfg)
    degenerate = hist.support().size == 1

    def measure(k):
        peak = peaks.peaks[k]
        effect = GaussianEffect(peak.mean, peak.width, basis, hist.bit_depth)
        seed = None if cfg.seed is None else cfg.seed + k
        return measure_peak(effect, k, cfg.mode, cfg.shots, seed)

    sampled = {"shots": cfg.shots, "seed": cfg.seed} if cfg.mode == "sampled" else {}
    if peaks.p == 1 or cfg.binary:
        k = 0 if peaks.p == 1 else _dominant_peak(hist, peaks)
        meas = measure(k)
        t = unimodal_threshold(meas, basis)
        tset = ThresholdSet((t,), ({"kind": "unimodal-argmax", "peaks": [k]},), cfg.mode, **sampled)
        return ThresholdAnalysis(hist, peaks, basis, [meas], tset, degenerate)

    measurements = [measure(k) for k in range(peaks.p)]
    values, prov = [], []
    for k in range(peaks.p - 1):
        a, b = peaks.peaks[k], peaks.peaks[k + 1]
        # Half-open window keeps consecutive thresholds strictly ascending.
        window = (a.mean, b.mean - 1)
        smoothing = 1
        if cfg.mode == "sampled" and cfg.smooth_sampled and len(basis) == 1 << hist.bit_depth:
            smoothing = sampled_smoothing_window(a.width, b.width)
        try:
            t = crossing_threshold(
                measurements[k], measurements[k + 1], basis, window, smoothing
            )
            kind = "crossing"
        except EmptyOverlap:
            t = min(max(a.right_valley, a.mean), b.mean - 1)
            kind = "valley-fallback"
        values.append(t)
        prov.append({"kind": kind, "peaks": [k, k + 1]})
    tset = ThresholdSet(tuple(values), tuple(prov), cfg.mode, **sampled)
    return ThresholdAnalysis(hist, peaks, basis, measurements, tset, degenerate)


def compute_thresholds(img: GrayImage, cfg: Optional[ThresholdConfig] = None) -> ThresholdSet:
    return analyze(img, cfg).thresholds


def segment_labels(pixels: np.ndarray, thresholds: Sequence[int]) -> np.ndarray:
    """Segment index per pixel: ``j`` where ``T_j < v <= T_{j+1}``."""
    return np.searchsorted(np.asarray(thresholds), pixels, side="left")


def quantize(img: GrayImage, tset, level_rule: str = "segment-mean") -> GrayImage:
    """Map each threshold segment to one representative level."""
    if level_rule not in LEVEL_RULES:
        raise ValueError(f"level_rule must be one of {LEVEL_RULES}, got {level_rule!r}")
    thresholds = tset.thresholds if isinstance(tset, ThresholdSet) else tuple(tset)
    pixels = img.pixels
    labels = segment_labels(pixels, thresholds)
    out = np.empty_like(pixels)
    if level_rule == "binary-extremes":
        if len(thresholds) != 1:
            raise ValueError("binary-extremes needs exactly one threshold")
        out[...] = np.where(pixels > thresholds[0], img.maxval, 0)
        return GrayImage(out, img.bit_depth)
    for j in np.unique(labels):
        seg = pixels[labels == j]
        if level_rule == "segment-mean":
            level = int(np.floor(seg.mean() + 0.5))
        else:
            level = int(np.argmax(np.bincount(seg)))
        out[labels == j] = level
    return GrayImage(out, img.bit_depth)
