"""Otsu and multi-Otsu threshold baselines."""
from __future__ import annotations

from itertools import combinations

import numpy as np

from .exceptions import DegenerateHistogram, TooFewLevels
from .histogram import Histogram
from .thresholding import ThresholdSet


def _counts(hist) -> np.ndarray:
    return np.asarray(hist.counts if isinstance(hist, Histogram) else hist, dtype=float)


def otsu(hist) -> int:
    """Threshold maximizing between-class variance for classes ``v <= t`` / ``v > t``."""
    c = _counts(hist)
    if np.count_nonzero(c) < 2:
        raise DegenerateHistogram("Otsu needs at least two occupied intensities")
    p = c / c.sum()
    levels = np.arange(p.size)
    w0 = np.cumsum(p)[:-1]
    m0 = np.cumsum(p * levels)[:-1]
    w1 = 1 - w0
    mu_t = m0[-1] + p[-1] * levels[-1]
    valid = (w0 > 0) & (w1 > 0)
    score = np.full(w0.shape, -np.inf)
    # w0*w1*(mu0-mu1)^2 written in cumulative form.
    score[valid] = (mu_t * w0[valid] - m0[valid]) ** 2 / (w0[valid] * w1[valid])
    best = score.max()
    # Near-equal scores from rounding count as ties; lowest t wins.
    return int(np.flatnonzero(score >= best - 1e-12 * max(1.0, abs(best)))[0])


def _class_terms(p: np.ndarray):
    """S[a, b] = (sum m p)^2 / sum p over bins a..b-1 (0 for empty mass)."""
    levels = np.arange(p.size)
    P = np.concatenate([[0.0], np.cumsum(p)])
    M = np.concatenate([[0.0], np.cumsum(p * levels)])
    w = P[None, :] - P[:, None]
    m = M[None, :] - M[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(w > 0, m**2 / w, 0.0)
    return np.triu(s, 1)


def _exhaustive(S: np.ndarray, n: int, k: int):
    best, arg = -np.inf, None
    for cut in combinations(range(1, n), k - 1):
        bounds = (0,) + cut + (n,)
        score = sum(S[bounds[j], bounds[j + 1]] for j in range(k))
        if arg is None or score > best + 1e-12 * max(1.0, abs(best)):
            best, arg = score, cut
    return arg


def _dynamic(S: np.ndarray, n: int, k: int):
    # F[j][a]: best score splitting bins a..n-1 into j classes.
    F = np.full((k + 1, n + 1), -np.inf)
    choice = np.zeros((k + 1, n + 1), dtype=int)
    F[1, :n] = S[np.arange(n), n]
    for j in range(2, k + 1):
        for a in range(n - j + 1):
            ends = np.arange(a + 1, n - j + 2)
            vals = S[a, ends] + F[j - 1, ends]
            best = vals.max()
            # First (smallest) boundary within tolerance keeps the tuple lexicographically smallest.
            pick = np.flatnonzero(vals >= best - 1e-12 * max(1.0, abs(best)))[0]
            F[j, a] = vals[pick]
            choice[j, a] = ends[pick]
    cut, a = [], 0
    for j in range(k, 1, -1):
        a = choice[j, a]
        cut.append(int(a))
    return tuple(cut)


def multi_otsu(hist, classes: int, method: str = "auto") -> ThresholdSet:
    """``classes - 1`` thresholds maximizing total between-class variance.

    Segments are ``v <= t_1``, ``t_1 < v <= t_2`` and so on. Search is
    exhaustive for up to three classes and dynamic programming beyond that,
    unless ``method`` forces one.
    """
    if classes < 2:
        raise ValueError("need at least two classes")
    c = _counts(hist)
    if np.count_nonzero(c) < classes:
        raise TooFewLevels(f"{classes} classes need at least {classes} occupied intensities")
    if classes == 2:
        t = otsu(c)
        return ThresholdSet((t,), ({"kind": "otsu"},))
    p = c / c.sum()
    n = p.size
    S = _class_terms(p)
    if method == "auto":
        method = "exhaustive" if classes <= 3 else "dp"
    if method == "exhaustive":
        cut = _exhaustive(S, n, classes)
    elif method == "dp":
        cut = _dynamic(S, n, classes)
    else:
        raise ValueError(f"method must be auto, exhaustive or dp, got {method!r}")
    # Boundary b starts a new class at bin b, so the threshold is b-1.
    ts = tuple(b - 1 for b in cut)
    return ThresholdSet(ts, tuple({"kind": "multi-otsu"} for _ in ts))
