"""Gaussian effect operators acting on an intensity superposition.

An effect is diagonal in the intensity basis, so it is stored as a weight
vector rather than a matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import BasisMismatch, EmptyBasis


@dataclass(frozen=True, eq=False)
class IntensityBasis:
    """Ordered intensities; position in the tuple is the basis index."""

    intensities: tuple

    def __post_init__(self):
        vals = tuple(int(v) for v in self.intensities)
        if not vals:
            raise EmptyBasis("intensity basis is empty")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("basis intensities must be strictly ascending")
        if vals[0] < 0:
            raise ValueError("intensities must be nonnegative")
        object.__setattr__(self, "intensities", vals)

    @classmethod
    def full(cls, bit_depth: int) -> "IntensityBasis":
        return cls(tuple(range(1 << bit_depth)))

    @classmethod
    def present(cls, counts) -> "IntensityBasis":
        """Basis over the intensities that occur (nonzero histogram bins)."""
        return cls(tuple(int(v) for v in np.flatnonzero(np.asarray(counts))))

    def __len__(self):
        return len(self.intensities)

    def __eq__(self, other):
        return isinstance(other, IntensityBasis) and self.intensities == other.intensities

    def __hash__(self):
        return hash(self.intensities)

    @property
    def qubit_count(self) -> int:
        return math.ceil(math.log2(len(self))) if len(self) > 1 else 0

    @property
    def values(self) -> np.ndarray:
        return np.array(self.intensities, dtype=float)

    def index_of(self, intensity: int) -> int:
        try:
            return self.intensities.index(int(intensity))
        except ValueError:
            raise KeyError(f"intensity {intensity} is not in the basis") from None

    def intensity_of(self, index: int) -> int:
        return self.intensities[index]


@dataclass(frozen=True, eq=False)
class AmplitudeMap:
    basis: IntensityBasis
    amplitudes: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=float)
        if amps.shape != (len(self.basis),):
            raise BasisMismatch("one amplitude per basis entry is required")
        if np.any(amps < 0):
            raise ValueError("amplitudes must be nonnegative")
        if self.normalized and abs(np.sum(amps**2) - 1) > 1e-9:
            raise ValueError("amplitudes flagged normalized do not have unit norm")
        object.__setattr__(self, "amplitudes", amps)

    def probabilities(self) -> np.ndarray:
        p = self.amplitudes**2
        return p / p.sum()

    def padded_probabilities(self) -> np.ndarray:
        """Probabilities zero-padded to ``2**qubit_count`` entries."""
        out = np.zeros(1 << self.basis.qubit_count)
        out[: len(self.basis)] = self.probabilities()
        return out

    def as_dict(self):
        return {v: float(a) for v, a in zip(self.basis.intensities, self.amplitudes)}


@dataclass(frozen=True)
class GaussianEffect:
    mean_intensity: float
    width: float
    basis: IntensityBasis
    bit_depth: int = 8

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"effect width must be positive, got {self.width}")
        if not 0 <= self.mean_intensity < 1 << self.bit_depth:
            raise ValueError(f"mean intensity {self.mean_intensity} outside range")

    def weights(self) -> np.ndarray:
        """Diagonal entries, prefactor 1/sqrt(2*pi*width**2) included."""
        d = self.basis.values - self.mean_intensity
        return np.exp(-(d**2) / (2 * self.width**2)) / math.sqrt(2 * math.pi * self.width**2)

    def shape(self) -> np.ndarray:
        """Unnormalized Gaussian profile, peak value 1."""
        d = self.basis.values - self.mean_intensity
        return np.exp(-(d**2) / (2 * self.width**2))


@dataclass(frozen=True, eq=False)
class DiagonalEffect:
    """An arbitrary diagonal effect given directly by its weights."""

    basis: IntensityBasis
    diagonal: np.ndarray

    def weights(self) -> np.ndarray:
        return np.asarray(self.diagonal, dtype=float)


def build_uniform_state(basis: IntensityBasis) -> AmplitudeMap:
    if len(basis) == 0:
        raise EmptyBasis("intensity basis is empty")
    return AmplitudeMap(basis, np.ones(len(basis)), normalized=False)


def apply_effect(effect, state: AmplitudeMap) -> AmplitudeMap:
    """Weight each amplitude by the Gaussian at its true intensity, then renormalize.

    Renormalizing absorbs the 1/sqrt(2*pi*width**2) prefactor, so the
    unnormalized profile is used directly; this also avoids underflow when
    the prefactor is tiny.
    """
    if effect.basis != state.basis:
        raise BasisMismatch("effect and state are defined over different bases")
    if isinstance(effect, GaussianEffect):
        # Shift the exponent so the closest occupied entry has weight 1;
        # the shift cancels on renormalization and prevents total underflow.
        d2 = (effect.basis.values - effect.mean_intensity) ** 2
        live = state.amplitudes > 0
        floor = d2[live].min() if live.any() else 0.0
        weights = np.exp(-(d2 - floor) / (2 * effect.width**2))
    else:
        weights = effect.weights()
    amps = state.amplitudes * weights
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise ValueError("effect annihilates the state (all weights underflow)")
    return AmplitudeMap(state.basis, amps / norm, normalized=True)


def effect_sum_deviation(effects: Sequence) -> np.ndarray:
    """Per basis entry, ``|sum_k w_k(m) - 1|``."""
    effects = list(effects)
    if not effects:
        raise ValueError("at least one effect is required")
    basis = effects[0].basis
    if any(e.basis != basis for e in effects):
        raise BasisMismatch("effects are defined over different bases")
    total = np.sum([e.weights() for e in effects], axis=0)
    return np.abs(total - 1.0)


def effect_sum_check(effects: Iterable) -> float:
    """Largest deviation of the summed effects from the identity."""
    return float(effect_sum_deviation(list(effects)).max())


def complete_effects(effects: Sequence) -> list:
    """Rescale each basis column so the effects form a partition of unity."""
    effects = list(effects)
    w = np.array([e.weights() for e in effects])
    col = w.sum(axis=0)
    if np.any(col == 0):
        raise ValueError("some basis entry carries no weight in any effect")
    basis = effects[0].basis
    return [DiagonalEffect(basis, row / col) for row in w]
