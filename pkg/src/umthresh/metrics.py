"""Image quality metrics: PSNR and mean SSIM over uniform windows."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import DimensionMismatch, WindowTooLarge
from .image_io import GrayImage

PSNR_CAP_DB = 100.0


def _check_pair(a: GrayImage, b: GrayImage):
    if a.shape != b.shape:
        raise DimensionMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.bit_depth != b.bit_depth:
        raise DimensionMismatch(f"bit depths differ: {a.bit_depth} vs {b.bit_depth}")


def mse(a: GrayImage, b: GrayImage) -> float:
    _check_pair(a, b)
    diff = a.pixels.astype(float) - b.pixels.astype(float)
    return float(np.mean(diff**2))


def psnr(a: GrayImage, b: GrayImage) -> float:
    """Peak signal-to-noise ratio in dB; identical images give the 100 dB cap."""
    err = mse(a, b)
    if err == 0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10 * math.log10(a.maxval**2 / err))


@dataclass(frozen=True)
class SsimConfig:
    window: int = 8
    stride: int = 1
    k1: float = 0.01
    k2: float = 0.03


def ssim(a: GrayImage, b: GrayImage, cfg: SsimConfig = SsimConfig()) -> float:
    """Mean SSIM over all ``window x window`` patches (uniform weights).

    Variances and covariance are population (divide by N) statistics of
    each patch.
    """
    _check_pair(a, b)
    w = cfg.window
    if w < 1 or w > min(a.shape):
        raise WindowTooLarge(f"window {w} does not fit a {a.width}x{a.height} image")
    x = sliding_window_view(a.pixels.astype(float), (w, w))[:: cfg.stride, :: cfg.stride]
    y = sliding_window_view(b.pixels.astype(float), (w, w))[:: cfg.stride, :: cfg.stride]
    axes = (-2, -1)
    mx, my = x.mean(axis=axes), y.mean(axis=axes)
    dx = x - mx[..., None, None]
    dy = y - my[..., None, None]
    vx = (dx**2).mean(axis=axes)
    vy = (dy**2).mean(axis=axes)
    cov = (dx * dy).mean(axis=axes)
    c1 = (cfg.k1 * a.maxval) ** 2
    c2 = (cfg.k2 * a.maxval) ** 2
    num = (2 * mx * my + c1) * (2 * cov + c2)
    den = (mx**2 + my**2 + c1) * (vx + vy + c2)
    return float(np.mean(num / den))


@dataclass(frozen=True)
class MetricsReport:
    psnr_db: float
    ssim: float
    mse: float
    window: int
    c1: float
    c2: float

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def compare(a: GrayImage, b: GrayImage, cfg: SsimConfig = SsimConfig()) -> MetricsReport:
    return MetricsReport(
        psnr_db=psnr(a, b),
        ssim=ssim(a, b, cfg),
        mse=mse(a, b),
        window=cfg.window,
        c1=(cfg.k1 * a.maxval) ** 2,
        c2=(cfg.k2 * a.maxval) ** 2,
    )
