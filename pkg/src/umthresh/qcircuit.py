"""Gate-level circuits, exact statevector simulation and shot sampling.

Qubit 0 is the least significant bit of a basis-state label. Bitstrings
shown to users list qubits most-significant first, so ``"01"`` over qubits
``(1, 0)`` means qubit 1 reads 0 and qubit 0 reads 1.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .exceptions import EmptyMeasureSet, UnknownGateKind, WidthCapExceeded, WidthMismatch

GATE_KINDS = ("NOT", "H", "CNOT", "TOFFOLI", "MCX", "RY", "CRY", "FREDKIN")
PERMUTATION_KINDS = frozenset({"NOT", "CNOT", "TOFFOLI", "MCX", "FREDKIN"})

DEFAULT_QUBIT_CAP = 24

# Quantum cost per gate kind; FREDKIN and TOFFOLI follow the usual
# reversible-logic convention of five elementary gates.
DEFAULT_COST_TABLE = {
    "NOT": 1,
    "CNOT": 1,
    "TOFFOLI": 5,
    "FREDKIN": 5,
    "H": 1,
    "RY": 1,
    "CRY": 2,
}


def qubit_cap() -> int:
    """Simulator width limit, overridable through ``UMTHRESH_QUBIT_CAP``."""
    raw = os.environ.get("UMTHRESH_QUBIT_CAP")
    if raw is None:
        return DEFAULT_QUBIT_CAP
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"UMTHRESH_QUBIT_CAP must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class Gate:
    """One gate. ``controls`` fire on the matching entry of ``control_values``."""

    kind: str
    targets: Tuple[int, ...]
    controls: Tuple[int, ...] = ()
    control_values: Tuple[int, ...] = ()
    angle: Optional[float] = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise UnknownGateKind(f"unknown gate kind {self.kind!r}")
        targets = tuple(int(q) for q in self.targets)
        controls = tuple(int(q) for q in self.controls)
        values = tuple(int(v) for v in self.control_values) or (1,) * len(controls)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "control_values", values)
        if len(values) != len(controls) or any(v not in (0, 1) for v in values):
            raise ValueError("control_values must give a 0/1 polarity per control")
        arity = {
            "NOT": (0, 1), "H": (0, 1), "RY": (0, 1), "CNOT": (1, 1),
            "CRY": (1, 1), "TOFFOLI": (2, 1), "FREDKIN": (1, 2),
        }
        if self.kind in arity and (len(controls), len(targets)) != arity[self.kind]:
            raise ValueError(f"{self.kind} expects {arity[self.kind]} (controls, targets)")
        if self.kind == "MCX" and len(targets) != 1:
            raise ValueError("MCX acts on exactly one target")
        qubits = controls + targets
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"{self.kind} qubits must be distinct, got {qubits}")
        if min(qubits) < 0:
            raise ValueError("qubit indices must be nonnegative")
        if self.kind in ("RY", "CRY"):
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")

    @property
    def qubits(self) -> Tuple[int, ...]:
        return self.controls + self.targets

    def inverse(self) -> "Gate":
        if self.kind in ("RY", "CRY"):
            return Gate(self.kind, self.targets, self.controls, self.control_values, -self.angle)
        return self

    def to_text(self) -> str:
        parts = [self.kind]
        if self.kind == "MCX":
            ctrl = ",".join(
                f"{'' if v else '!'}{q}" for q, v in zip(self.controls, self.control_values)
            )
            parts += [ctrl or "-", str(self.targets[0])]
        else:
            parts += [str(q) for q in self.qubits]
        if self.angle is not None:
            parts.append(repr(self.angle))
        return " ".join(parts)

    @classmethod
    def from_text(cls, line: str) -> "Gate":
        kind, *rest = line.split()
        if kind == "MCX":
            ctrl, target = rest
            controls, values = [], []
            for tok in ([] if ctrl == "-" else ctrl.split(",")):
                values.append(0 if tok.startswith("!") else 1)
                controls.append(int(tok.lstrip("!")))
            return cls("MCX", (int(target),), tuple(controls), tuple(values))
        angle = None
        if kind in ("RY", "CRY"):
            angle = float(rest.pop())
        qs = [int(t) for t in rest]
        n_ctrl = {"NOT": 0, "H": 0, "RY": 0, "CNOT": 1, "CRY": 1, "TOFFOLI": 2, "FREDKIN": 1}
        if kind not in n_ctrl:
            raise UnknownGateKind(f"unknown gate kind {kind!r}")
        k = n_ctrl[kind]
        return cls(kind, tuple(qs[k:]), tuple(qs[:k]), angle=angle)


@dataclass
class Circuit:
    """Ordered gate list over ``width`` qubits.

    ``measured`` is ordered: bitstrings from :func:`sample` list those qubits
    in this order. ``ancillas`` records helper qubits declared by a builder.
    """

    width: int
    gates: list = field(default_factory=list)
    measured: Tuple[int, ...] = ()
    ancillas: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("circuit width must be nonnegative")
        self.gates = list(self.gates)
        for g in self.gates:
            self._check(g)
        self.measured = tuple(int(q) for q in self.measured)
        self.ancillas = tuple(int(q) for q in self.ancillas)
        for q in self.measured + self.ancillas:
            if not 0 <= q < self.width:
                raise ValueError(f"qubit {q} outside circuit of width {self.width}")

    def _check(self, gate: Gate):
        if max(gate.qubits) >= self.width:
            raise ValueError(f"{gate.to_text()} exceeds circuit width {self.width}")

    def append(self, gate: Gate) -> "Circuit":
        self._check(gate)
        self.gates.append(gate)
        return self

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        for g in gates:
            self.append(g)
        return self

    # qiskit-flavoured shorthands
    def x(self, q):
        return self.append(Gate("NOT", (q,)))

    def h(self, q):
        return self.append(Gate("H", (q,)))

    def cx(self, c, t):
        return self.append(Gate("CNOT", (t,), (c,)))

    def ccx(self, c1, c2, t):
        return self.append(Gate("TOFFOLI", (t,), (c1, c2)))

    def mcx(self, controls, t, ctrl_state=None):
        return self.append(Gate("MCX", (t,), tuple(controls), tuple(ctrl_state or ())))

    def ry(self, theta, q):
        return self.append(Gate("RY", (q,), angle=theta))

    def cry(self, theta, c, t):
        return self.append(Gate("CRY", (t,), (c,), angle=theta))

    def cswap(self, c, a, b):
        return self.append(Gate("FREDKIN", (a, b), (c,)))

    def compose(self, other: "Circuit") -> "Circuit":
        """Concatenate two circuits of equal width (gates, measured and ancillas merged)."""
        if other.width != self.width:
            raise WidthMismatch(f"cannot compose width {other.width} onto {self.width}")
        measured = self.measured + tuple(q for q in other.measured if q not in self.measured)
        ancillas = self.ancillas + tuple(q for q in other.ancillas if q not in self.ancillas)
        return Circuit(self.width, self.gates + other.gates, measured, ancillas)

    def inverse(self) -> "Circuit":
        return Circuit(
            self.width, [g.inverse() for g in reversed(self.gates)], self.measured, self.ancillas
        )

    def count_ops(self) -> Dict[str, int]:
        ops: Dict[str, int] = {}
        for g in self.gates:
            ops[g.kind] = ops.get(g.kind, 0) + 1
        return ops

    def is_permutation(self) -> bool:
        return all(g.kind in PERMUTATION_KINDS for g in self.gates)

    def to_text(self) -> str:
        lines = [f"WIDTH {self.width}"]
        if self.measured:
            lines.append("MEASURE " + " ".join(map(str, self.measured)))
        if self.ancillas:
            lines.append("ANCILLA " + " ".join(map(str, self.ancillas)))
        lines += [g.to_text() for g in self.gates]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        width, measured, ancillas, gates = None, (), (), []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            head, _, tail = line.partition(" ")
            if head == "WIDTH":
                width = int(tail)
            elif head == "MEASURE":
                measured = tuple(int(t) for t in tail.split())
            elif head == "ANCILLA":
                ancillas = tuple(int(t) for t in tail.split())
            else:
                gates.append(Gate.from_text(line))
        if width is None:
            raise ValueError("circuit text lacks a WIDTH line")
        return cls(width, gates, measured, ancillas)


def zero_state(width: int) -> np.ndarray:
    state = np.zeros(1 << width, dtype=complex)
    state[0] = 1.0
    return state


def basis_state(width: int, index: int) -> np.ndarray:
    state = np.zeros(1 << width, dtype=complex)
    state[index] = 1.0
    return state


def _selector(gate: Gate, width: int):
    """Index tuple fixing control axes, plus a map from qubit to view axis."""
    idx = [slice(None)] * width
    for q, v in zip(gate.controls, gate.control_values):
        idx[width - 1 - q] = v
    fixed = {width - 1 - q for q in gate.controls}
    free_axes = [a for a in range(width) if a not in fixed]
    axis_of = {width - 1 - a: i for i, a in enumerate(free_axes)}
    return tuple(idx), axis_of


_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _apply(psi: np.ndarray, gate: Gate, width: int) -> None:
    sel, axis_of = _selector(gate, width)
    sub = psi[sel]
    kind = gate.kind
    if kind in ("NOT", "CNOT", "TOFFOLI", "MCX"):
        psi[sel] = np.flip(sub, axis=axis_of[gate.targets[0]]).copy()
    elif kind == "FREDKIN":
        a, b = (axis_of[q] for q in gate.targets)
        psi[sel] = np.swapaxes(sub, a, b).copy()
    else:
        ax = axis_of[gate.targets[0]]
        if kind == "H":
            u = _H
        else:
            c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
            u = np.array([[c, -s], [s, c]], dtype=complex)
        moved = np.moveaxis(sub, ax, 0)
        out = np.tensordot(u, moved, axes=([1], [0]))
        psi[sel] = np.moveaxis(out, 0, ax)


def simulate(circuit: Circuit, initial: Optional[np.ndarray] = None) -> np.ndarray:
    """Return the exact statevector after applying every gate in order."""
    cap = qubit_cap()
    if circuit.width > cap:
        raise WidthCapExceeded(
            f"circuit needs {circuit.width} qubits; simulator cap is {cap} "
            "(raise UMTHRESH_QUBIT_CAP or use the per-pixel route)"
        )
    if initial is None:
        state = zero_state(circuit.width)
    else:
        state = np.array(initial, dtype=complex)
        if state.shape != (1 << circuit.width,):
            raise WidthMismatch(
                f"initial state has {state.size} amplitudes, circuit needs {1 << circuit.width}"
            )
        norm = np.linalg.norm(state)
        if abs(norm - 1) > 1e-9:
            raise ValueError(f"initial state norm {norm} differs from 1")
    if circuit.width == 0:
        return state
    psi = state.reshape((2,) * circuit.width)
    for gate in circuit.gates:
        _apply(psi, gate, circuit.width)
    return psi.reshape(-1)


def run_basis(circuit: Circuit, index: int) -> int:
    """Classically evaluate a permutation-only circuit on one basis label."""
    bits = index
    for g in circuit.gates:
        if g.kind not in PERMUTATION_KINDS:
            raise ValueError(f"{g.kind} is not a classical reversible gate")
        if all(((bits >> q) & 1) == v for q, v in zip(g.controls, g.control_values)):
            if g.kind == "FREDKIN":
                a, b = g.targets
                if ((bits >> a) & 1) != ((bits >> b) & 1):
                    bits ^= (1 << a) | (1 << b)
            else:
                bits ^= 1 << g.targets[0]
    return bits


def format_bits(value: int, n: int) -> str:
    return format(value, f"0{n}b") if n else ""


def marginal_probabilities(state: np.ndarray, measured: Sequence[int]) -> Dict[str, float]:
    """Outcome probabilities over ``measured`` (first listed qubit is leftmost)."""
    measured = tuple(measured)
    if not measured:
        raise EmptyMeasureSet("no qubits selected for measurement")
    probs = np.abs(np.asarray(state)) ** 2
    idx = np.arange(probs.size)
    m = len(measured)
    outcome = np.zeros(probs.size, dtype=np.int64)
    for pos, q in enumerate(measured):
        outcome |= ((idx >> q) & 1) << (m - 1 - pos)
    marg = np.bincount(outcome, weights=probs, minlength=1 << m)
    return {format_bits(k, m): float(p) for k, p in enumerate(marg) if p > 1e-15}


def sample(state: np.ndarray, measured: Sequence[int], shots: int, seed: int) -> Dict[str, int]:
    """Draw ``shots`` measurement outcomes with a seeded generator."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    marg = marginal_probabilities(state, measured)
    keys = sorted(marg)
    p = np.array([marg[k] for k in keys])
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    tallies = rng.multinomial(shots, p)
    return {k: int(t) for k, t in zip(keys, tallies) if t}


@dataclass(frozen=True)
class CostReport:
    quantum_cost: int
    depth: int
    ancilla_count: int

    def as_dict(self):
        return {"quantum_cost": self.quantum_cost, "depth": self.depth,
                "ancilla_count": self.ancilla_count}


def _gate_cost(gate: Gate, table: Mapping[str, int]) -> int:
    if gate.kind == "MCX":
        key = f"MCX{len(gate.controls)}"
        if key in table:
            return table[key]
    if gate.kind not in table:
        raise UnknownGateKind(f"cost table has no entry for {gate.kind}")
    return table[gate.kind]


def cost_and_depth(circuit: Circuit, cost_table: Optional[Mapping[str, int]] = None) -> CostReport:
    """Summed gate cost, greedy-layer depth and declared ancilla count."""
    table = DEFAULT_COST_TABLE if cost_table is None else cost_table
    cost = 0
    level = [0] * circuit.width
    depth = 0
    for g in circuit.gates:
        cost += _gate_cost(g, table)
        layer = 1 + max(level[q] for q in g.qubits)
        for q in g.qubits:
            level[q] = layer
        depth = max(depth, layer)
    return CostReport(cost, depth, len(circuit.ancillas))
