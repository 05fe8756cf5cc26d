"""NEQR image encoding, threshold comparison and binary-image decoding.

Register layout for the full binarization circuit (qubit 0 least
significant): ancilla ``0``, intensity ``1..q``, threshold ``q+1..2q`` and
position ``2q+1..2q+2n``. The position register holds ``row << n | col``.
An encoder-only circuit puts intensity on ``0..q-1`` and position above it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping, NamedTuple, Optional, Tuple

import numpy as np

from .exceptions import (
    ConflictingAncilla,
    MissingPosition,
    NotPowerOfTwoSquare,
    OutOfRange,
    WidthCapExceeded,
)
from .image_io import GrayImage
from .qcircuit import Circuit, marginal_probabilities, qubit_cap, sample, simulate

ROUTES = ("full-circuit", "per-pixel-circuit", "classical")


@dataclass(frozen=True)
class NeqrLayout:
    """Qubit roles of the binarization circuit for ``2^n x 2^n`` images of depth ``q``."""

    n: int
    q: int

    def __post_init__(self):
        if self.n < 0 or self.q < 1:
            raise ValueError(f"need n >= 0 and q >= 1, got n={self.n}, q={self.q}")

    @property
    def ancilla(self) -> Tuple[int, ...]:
        return (0,)

    @property
    def intensity(self) -> Tuple[int, ...]:
        return tuple(range(1, self.q + 1))

    @property
    def threshold(self) -> Tuple[int, ...]:
        return tuple(range(self.q + 1, 2 * self.q + 1))

    @property
    def position(self) -> Tuple[int, ...]:
        start = 2 * self.q + 1
        return tuple(range(start, start + 2 * self.n))

    @property
    def width(self) -> int:
        return 2 * (self.n + self.q) + 1

    def roles(self) -> Dict[str, Tuple[int, ...]]:
        return {
            "ancilla": self.ancilla,
            "intensity": self.intensity,
            "threshold": self.threshold,
            "position": self.position,
        }


class _EncoderRegisters(NamedTuple):
    # Encoder-only circuits drop the threshold and ancilla registers.
    position: Tuple[int, ...]
    intensity: Tuple[int, ...]
    width: int


@dataclass(frozen=True, eq=False)
class BinaryImage:
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits).astype(np.uint8)
        if bits.ndim != 2 or np.any(bits > 1):
            raise ValueError("binary image needs a 2-D grid of 0/1 values")
        object.__setattr__(self, "bits", bits)

    @property
    def width(self):
        return self.bits.shape[1]

    @property
    def height(self):
        return self.bits.shape[0]

    def to_image(self, bit_depth: int = 8) -> GrayImage:
        return GrayImage(self.bits.astype(np.int64) * ((1 << bit_depth) - 1), bit_depth)

    def __eq__(self, other):
        return isinstance(other, BinaryImage) and np.array_equal(self.bits, other.bits)

    def __repr__(self):
        return f"BinaryImage({self.bits.tolist()})"


def _square_side_bits(img: GrayImage) -> int:
    h, w = img.shape
    if h != w or h & (h - 1):
        raise NotPowerOfTwoSquare(f"NEQR needs a 2^n x 2^n image, got {w}x{h}")
    return h.bit_length() - 1


def _check_cap(width: int):
    cap = qubit_cap()
    if width > cap:
        raise WidthCapExceeded(
            f"circuit needs {width} qubits; simulator cap is {cap} "
            "(use the per-pixel-circuit or classical route, or raise UMTHRESH_QUBIT_CAP)"
        )


def _encode_into(circuit: Circuit, img: GrayImage, layout) -> None:
    for qb in layout.position:
        circuit.h(qb)
    for pos, value in enumerate(img.flat()):
        pos_bits = [(pos >> b) & 1 for b in range(len(layout.position))]
        for k, target in enumerate(layout.intensity):
            if (int(value) >> k) & 1:
                if layout.position:
                    circuit.mcx(layout.position, target, pos_bits)
                else:
                    circuit.x(target)


def encode_neqr(img: GrayImage, layout: Optional[NeqrLayout] = None) -> Circuit:
    """Circuit preparing sum over positions of |position>|intensity>."""
    n = _square_side_bits(img)
    q = img.bit_depth
    if layout is None:
        layout = _EncoderRegisters(tuple(range(q, q + 2 * n)), tuple(range(q)), 2 * n + q)
    elif layout.n != n or layout.q != q:
        raise ValueError("layout does not match the image size or bit depth")
    _check_cap(layout.width)
    measured = tuple(reversed(layout.position)) + tuple(reversed(layout.intensity))
    circuit = Circuit(layout.width, measured=measured)
    _encode_into(circuit, img, layout)
    return circuit


def encode_threshold(t: int, q: int, layout: Optional[NeqrLayout] = None) -> Circuit:
    """NOT gates writing ``t`` into the threshold register."""
    if not 0 <= t < 1 << q:
        raise OutOfRange(f"threshold {t} does not fit in {q} bits")
    qubits = tuple(range(q)) if layout is None else layout.threshold
    circuit = Circuit(q if layout is None else layout.width)
    for k, qb in enumerate(qubits):
        if (t >> k) & 1:
            circuit.x(qb)
    return circuit


def build_comparator(q: int, layout: Optional[NeqrLayout] = None) -> Circuit:
    """Borrow-ripple comparator: the ancilla ends at 1 iff intensity > threshold.

    Bit ``k`` (LSB first) applies CNOT(i_k -> t_k), leaving ``t_k = i_k xor t_k``,
    then a Fredkin gate controlled by ``t_k`` swaps the ancilla with ``i_k``.
    Where the bits differ the running borrow becomes ``i_k``; the most
    significant differing bit therefore decides. Inputs are left as garbage.
    """
    if q < 1:
        raise ValueError("comparator needs q >= 1")
    layout = layout or NeqrLayout(0, q)
    (anc,) = layout.ancilla
    circuit = Circuit(layout.width, measured=(anc,), ancillas=(anc,))
    for i_k, t_k in zip(layout.intensity, layout.threshold):
        circuit.cx(i_k, t_k)
        circuit.cswap(t_k, anc, i_k)
    return circuit


def build_binarization_circuit(img: GrayImage, t: int) -> Circuit:
    n = _square_side_bits(img)
    q = img.bit_depth
    layout = NeqrLayout(n, q)
    _check_cap(layout.width)
    circuit = encode_neqr(img, layout)
    circuit = circuit.compose(encode_threshold(t, q, layout))
    circuit = circuit.compose(build_comparator(q, layout))
    circuit.measured = tuple(reversed(layout.position)) + layout.ancilla
    return circuit


def decode_binary(
    counts: Mapping[str, float], n: int, q: int, conflict_fraction: float = 0.25
) -> BinaryImage:
    """Turn position+ancilla outcomes into a binary image by majority vote.

    ``q`` is accepted for symmetry with the encoder; the decoded bits are
    intensity-agnostic (see :meth:`BinaryImage.to_image`).
    """
    side = 1 << n
    votes = np.zeros((side * side, 2))
    for bits, tally in counts.items():
        if len(bits) != 2 * n + 1:
            raise ValueError(f"outcome {bits!r} is not {2 * n + 1} bits long")
        pos = int(bits[:-1], 2) if n else 0
        votes[pos, int(bits[-1])] += tally
    totals = votes.sum(axis=1)
    missing = np.flatnonzero(totals == 0)
    if missing.size:
        raise MissingPosition(
            f"position {format(int(missing[0]), f'0{2 * n}b') or '(single)'} was never observed"
        )
    minority = votes.min(axis=1) / totals
    if np.any(minority > conflict_fraction):
        bad = int(np.argmax(minority))
        raise ConflictingAncilla(
            f"position {bad} read 0 and 1 in comparable proportion; add shots"
        )
    return BinaryImage(np.argmax(votes, axis=1).reshape(side, side))


def _per_pixel_bit(value: int, t: int, q: int, cache: dict) -> int:
    if value not in cache:
        layout = NeqrLayout(0, q)
        prep = Circuit(layout.width)
        for k, qb in enumerate(layout.intensity):
            if (value >> k) & 1:
                prep.x(qb)
        circuit = prep.compose(encode_threshold(t, q, layout)).compose(build_comparator(q, layout))
        state = simulate(circuit)
        p_one = marginal_probabilities(state, layout.ancilla).get("1", 0.0)
        cache[value] = int(p_one > 0.5)
    return cache[value]


def binarize(
    img: GrayImage,
    t: int,
    route: str = "classical",
    shots: Optional[int] = None,
    seed: Optional[int] = None,
) -> BinaryImage:
    """White (1) where intensity > t, via the requested route.

    ``full-circuit`` simulates the whole NEQR + comparator circuit (exactly,
    or with ``shots`` samples). ``per-pixel-circuit`` runs the comparator circuit on
    ``2q+1`` qubits for each distinct intensity. ``classical`` compares integers.
    """
    q = img.bit_depth
    if not 0 <= t < 1 << q:
        raise OutOfRange(f"threshold {t} does not fit in {q} bits")
    if route == "classical":
        return BinaryImage((img.pixels > t).astype(np.uint8))
    if route == "per-pixel-circuit":
        cache: dict = {}
        bits = np.vectorize(lambda v: _per_pixel_bit(int(v), t, q, cache), otypes=[np.uint8])
        return BinaryImage(bits(img.pixels))
    if route == "full-circuit":
        n = _square_side_bits(img)
        circuit = build_binarization_circuit(img, t)
        state = simulate(circuit)
        if shots is None:
            counts = marginal_probabilities(state, circuit.measured)
        else:
            counts = sample(state, circuit.measured, shots, seed)
        return decode_binary(counts, n, q)
    raise ValueError(f"route must be one of {ROUTES}, got {route!r}")


def binarization_counts(img: GrayImage, t: int, shots: Optional[int] = None, seed=None):
    """Measured outcome distribution of the full binarization circuit."""
    circuit = build_binarization_circuit(img, t)
    state = simulate(circuit)
    if shots is None:
        return marginal_probabilities(state, circuit.measured)
    return sample(state, circuit.measured, shots, seed)
