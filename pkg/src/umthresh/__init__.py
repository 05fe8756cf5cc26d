"""Multilevel image thresholding with Gaussian unsharp readout and NEQR binarization."""
from .baselines import multi_otsu, otsu
from .estimators import MultiOtsuThresholder, QuantumBinarizer, UnsharpThresholder
from .histogram import Histogram, Peak, PeakConfig, PeakSet, compute_histogram, detect_peaks
from .image_io import GrayImage, load_pgm, parse_pgm, save_pgm
from .metrics import MetricsReport, psnr, ssim
from .neqr import (
    BinaryImage,
    NeqrLayout,
    binarize,
    build_binarization_circuit,
    build_comparator,
    decode_binary,
    encode_neqr,
    encode_threshold,
)
from .thresholding import ThresholdConfig, ThresholdSet, compute_thresholds, quantize

__version__ = "0.1.0"

__all__ = [
    "BinaryImage",
    "GrayImage",
    "Histogram",
    "MetricsReport",
    "MultiOtsuThresholder",
    "NeqrLayout",
    "Peak",
    "PeakConfig",
    "PeakSet",
    "QuantumBinarizer",
    "ThresholdConfig",
    "ThresholdSet",
    "UnsharpThresholder",
    "binarize",
    "build_binarization_circuit",
    "build_comparator",
    "compute_histogram",
    "compute_thresholds",
    "decode_binary",
    "detect_peaks",
    "encode_neqr",
    "encode_threshold",
    "load_pgm",
    "multi_otsu",
    "otsu",
    "parse_pgm",
    "psnr",
    "quantize",
    "save_pgm",
    "ssim",
]
