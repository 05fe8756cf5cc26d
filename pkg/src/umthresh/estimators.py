"""scikit-learn style wrappers around the thresholding pipeline.

Each estimator takes a single grayscale image (a :class:`GrayImage` or a
2-D integer array) as ``X``. ``fit`` learns thresholds from its histogram
and ``transform`` returns the quantized pixel array.
"""
from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .baselines import multi_otsu, otsu
from .exceptions import InvalidImage
from .histogram import PeakConfig, compute_histogram
from .image_io import GrayImage
from .neqr import binarize
from .thresholding import ThresholdConfig, ThresholdSet, analyze, quantize


def check_image(X, bit_depth: Optional[int] = None) -> GrayImage:
    """Coerce ``X`` to a GrayImage, inferring 8 bits for plain arrays."""
    if isinstance(X, GrayImage):
        if bit_depth is not None and bit_depth != X.bit_depth:
            raise InvalidImage(f"expected bit depth {bit_depth}, got {X.bit_depth}")
        return X
    arr = np.asarray(X)
    if arr.ndim != 2:
        raise InvalidImage(f"expected a 2-D image, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.mod(arr, 1) == 0):
            raise InvalidImage("pixel values must be integers")
        arr = arr.astype(np.int64)
    return GrayImage(arr, 8 if bit_depth is None else bit_depth)


class UnsharpThresholder(TransformerMixin, BaseEstimator):
    """Multilevel thresholds from Gaussian-weighted readouts of histogram peaks."""

    def __init__(
        self,
        smooth_window=9,
        prominence_fraction=0.05,
        min_separation=10,
        width_divisor=2.0,
        mode="exact",
        shots=1000,
        seed=None,
        basis="auto",
        level_rule="segment-mean",
        binary=False,
    ):
        self.smooth_window = smooth_window
        self.prominence_fraction = prominence_fraction
        self.min_separation = min_separation
        self.width_divisor = width_divisor
        self.mode = mode
        self.shots = shots
        self.seed = seed
        self.basis = basis
        self.level_rule = level_rule
        self.binary = binary

    def _config(self) -> ThresholdConfig:
        peaks = PeakConfig(
            smooth_window=self.smooth_window,
            prominence_fraction=self.prominence_fraction,
            min_separation=self.min_separation,
            width_divisor=self.width_divisor,
        )
        return ThresholdConfig(
            peaks=peaks,
            mode=self.mode,
            shots=self.shots,
            seed=self.seed,
            basis=self.basis,
            binary=self.binary,
        )

    def fit(self, X, y=None):
        img = check_image(X)
        self.analysis_ = analyze(img, self._config())
        self.peaks_ = self.analysis_.peaks
        self.thresholds_ = self.analysis_.thresholds
        self.bit_depth_ = img.bit_depth
        return self

    def transform(self, X):
        check_is_fitted(self, "thresholds_")
        img = check_image(X, self.bit_depth_)
        rule = self.level_rule
        if self.binary and rule == "segment-mean":
            rule = "binary-extremes"
        return quantize(img, self.thresholds_, rule).pixels.copy()


class MultiOtsuThresholder(TransformerMixin, BaseEstimator):
    def __init__(self, classes=5, level_rule="segment-mean"):
        self.classes = classes
        self.level_rule = level_rule

    def fit(self, X, y=None):
        img = check_image(X)
        hist = compute_histogram(img)
        if self.classes == 2:
            self.thresholds_ = ThresholdSet((otsu(hist),), ({"kind": "otsu"},))
        else:
            self.thresholds_ = multi_otsu(hist, self.classes)
        self.bit_depth_ = img.bit_depth
        return self

    def transform(self, X):
        check_is_fitted(self, "thresholds_")
        img = check_image(X, self.bit_depth_)
        return quantize(img, self.thresholds_, self.level_rule).pixels.copy()


class QuantumBinarizer(TransformerMixin, BaseEstimator):
    """Fixed-threshold binarization (white iff intensity > threshold).

    Stateless; ``fit`` only records the bit depth. Output pixels are 0 or
    ``2**bit_depth - 1``.
    """

    def __init__(self, threshold=127, route="classical", shots=None, seed=None):
        self.threshold = threshold
        self.route = route
        self.shots = shots
        self.seed = seed

    def fit(self, X, y=None):
        self.bit_depth_ = check_image(X).bit_depth
        return self

    def transform(self, X):
        check_is_fitted(self, "bit_depth_")
        img = check_image(X, self.bit_depth_)
        out = binarize(img, self.threshold, self.route, self.shots, self.seed)
        return out.to_image(img.bit_depth).pixels.copy()
