"""Divide-and-conquer amplitude loading.

``gen_angles`` builds a binary tree of RY angles from a probability vector.
``build_load_circuit`` walks the tree from the root: level ``l`` rotates
qubit ``k-1-l`` conditioned on the ``l`` qubits above it. The conditioning
is realised as a uniformly controlled rotation made only of RY and CNOT
gates (Gray-code ordering), so no multi-controlled rotations are needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .exceptions import BadLength, NotNormalized
from .qcircuit import Circuit


@dataclass(frozen=True, eq=False)
class AngleTree:
    """Heap-ordered angles: node ``i`` has children ``2i+1`` and ``2i+2``."""

    qubit_count: int
    angles: np.ndarray

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=float)
        if angles.shape != ((1 << self.qubit_count) - 1,):
            raise ValueError(
                f"{self.qubit_count} qubits need {(1 << self.qubit_count) - 1} angles"
            )
        if np.any(angles < 0) or np.any(angles > math.pi + 1e-12):
            raise ValueError("tree angles must lie in [0, pi]")
        object.__setattr__(self, "angles", angles)

    def level(self, depth: int) -> np.ndarray:
        start = (1 << depth) - 1
        return self.angles[start : start + (1 << depth)]

    def levels(self) -> List[np.ndarray]:
        return [self.level(d) for d in range(self.qubit_count)]


def gen_angles(probabilities) -> AngleTree:
    """Bottom-up pass turning leaf probabilities into rotation angles.

    Each internal node splitting mass ``(p_left, p_right)`` gets
    ``2*arcsin(sqrt(p_right / (p_left + p_right)))``, or 0 for an empty
    subtree.
    """
    p = np.asarray(probabilities, dtype=float)
    n = p.size
    if p.ndim != 1 or n == 0 or n & (n - 1):
        raise BadLength(f"probability vector length must be a power of two, got {n}")
    if np.any(p < 0):
        raise NotNormalized("probabilities must be nonnegative")
    if abs(p.sum() - 1) > 1e-9:
        raise NotNormalized(f"probabilities sum to {p.sum()!r}, not 1")
    k = n.bit_length() - 1

    levels = []
    mass = p
    while mass.size > 1:
        left, right = mass[0::2], mass[1::2]
        total = left + right
        ratio = np.divide(right, total, out=np.zeros_like(total), where=total > 0)
        levels.append(2 * np.arcsin(np.sqrt(np.clip(ratio, 0.0, 1.0))))
        mass = total
    angles = np.concatenate(levels[::-1]) if levels else np.zeros(0)
    return AngleTree(k, angles)


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def uniformly_controlled_ry(circuit: Circuit, angles, controls, target) -> None:
    """Append RY(angles[c]) on ``target`` for each control value ``c``.

    Bit ``b`` of ``c`` is read from ``controls[b]``. Uses ``2**len(controls)``
    RY and as many CNOT gates.
    """
    angles = np.asarray(angles, dtype=float)
    k = len(controls)
    if angles.size != 1 << k:
        raise ValueError("need one angle per control value")
    if k == 0:
        if angles[0] != 0:
            circuit.ry(float(angles[0]), target)
        return
    if not np.any(angles):
        return
    size = 1 << k
    # Net angle for control value c is sum_i (-1)^popcount(c & gray(i)) theta_i.
    sign = np.array(
        [[(-1) ** bin(c & _gray(i)).count("1") for i in range(size)] for c in range(size)],
        dtype=float,
    )
    thetas = sign.T @ angles / size
    for i in range(size):
        circuit.ry(float(thetas[i]), target)
        flip = _gray(i) ^ _gray((i + 1) % size)
        circuit.cx(controls[flip.bit_length() - 1], target)


def build_load_circuit(tree: AngleTree) -> Circuit:
    k = tree.qubit_count
    circuit = Circuit(k, measured=tuple(range(k - 1, -1, -1)))
    for depth, angles in enumerate(tree.levels()):
        target = k - 1 - depth
        # Prefix value j has its least significant bit on the qubit just above target.
        controls = [target + 1 + b for b in range(depth)]
        uniformly_controlled_ry(circuit, angles, controls, target)
    return circuit


def load_state(probabilities) -> Circuit:
    return build_load_circuit(gen_angles(probabilities))
