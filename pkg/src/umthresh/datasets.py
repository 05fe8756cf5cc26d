"""Small built-in images used by the demo command and the tests."""
from __future__ import annotations

import numpy as np

from .image_io import GrayImage

# Pixel tallies of the 4x4 unimodal example; 100 is the most frequent level.
CASE1_COUNTS = {63: 4, 100: 7, 141: 3, 155: 2}
CASE1_BASIS = (63, 100, 141, 155)
CASE1_WIDTH = 35.0

# 2x2 demo: 8-bit levels 255, 0, 100, 200 stored with 2-bit codes.
DEMO_8BIT = ((255, 0), (100, 200))
DEMO_CODES = {255: 3, 0: 0, 100: 1, 200: 2}
DEMO_THRESHOLD = 1


def case1_image() -> GrayImage:
    values = np.repeat(list(CASE1_COUNTS), list(CASE1_COUNTS.values()))
    np.random.default_rng(0).shuffle(values)
    return GrayImage(values.reshape(4, 4), 8)


def demo_2x2_image() -> GrayImage:
    """The 2x2 demo image in its 2-bit encoding, ``[[3, 0], [1, 2]]``."""
    codes = [[DEMO_CODES[v] for v in row] for row in DEMO_8BIT]
    return GrayImage(np.array(codes), 2)


def add_gaussian_noise(img: GrayImage, sigma: float, seed: int) -> GrayImage:
    """Additive Gaussian noise, rounded and clipped to the valid range."""
    rng = np.random.default_rng(seed)
    noisy = img.pixels + rng.normal(0.0, sigma, img.shape)
    return GrayImage(np.clip(np.rint(noisy), 0, img.maxval).astype(np.int64), img.bit_depth)
