import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from umthresh.exceptions import EmptyMeasureSet, UnknownGateKind, WidthCapExceeded, WidthMismatch
from umthresh.qcircuit import (
    Circuit,
    Gate,
    basis_state,
    cost_and_depth,
    marginal_probabilities,
    run_basis,
    sample,
    simulate,
    zero_state,
)
from umthresh.stateprep import load_state

from .oracles import dense_unitary


def test_not():
    c = Circuit(1).x(0)
    assert np.allclose(simulate(c), [0, 1])


@pytest.mark.parametrize("inp", range(8))
def test_fredkin_truth_table(inp):
    # qubit 2 is the control, qubits 1 and 0 are swapped
    c = Circuit(3).cswap(2, 1, 0)
    out = int(np.argmax(np.abs(simulate(c, basis_state(3, inp)))))
    ctrl, a, b = (inp >> 2) & 1, (inp >> 1) & 1, inp & 1
    expected = (ctrl << 2) | ((b << 1) | a if ctrl else (a << 1) | b)
    assert out == expected


def test_load_circuit_reproduces_amplitudes():
    state = simulate(load_state([0.2, 0.6, 0.15, 0.05]))
    assert np.allclose(state.real, [0.447, 0.774, 0.387, 0.223], atol=1e-2)


def test_width_mismatch():
    with pytest.raises(WidthMismatch):
        simulate(Circuit(2), zero_state(3))


def test_width_cap(monkeypatch):
    monkeypatch.setenv("UMTHRESH_QUBIT_CAP", "3")
    with pytest.raises(WidthCapExceeded):
        simulate(Circuit(4))


def test_sample_deterministic_state():
    state = basis_state(2, 1)
    assert sample(state, (1, 0), 100, seed=3) == {"01": 100}


def test_sample_bit_order():
    # qubit 0 set: listing (0, 1) puts qubit 0 first
    assert sample(basis_state(2, 1), (0, 1), 10, seed=0) == {"10": 10}


def test_sample_seeded_and_binomial():
    state = simulate(load_state([0.2, 0.6, 0.15, 0.05]))
    a = sample(state, (1, 0), 1000, seed=11)
    assert a == sample(state, (1, 0), 1000, seed=11)
    assert abs(a["01"] - 600) <= 47
    assert sum(a.values()) == 1000


def test_uniform_sampling():
    c = Circuit(2).h(0).h(1)
    counts = sample(simulate(c), (1, 0), 4000, seed=5)
    bound = 3 * math.sqrt(4000 * 0.25 * 0.75)
    assert set(counts) == {"00", "01", "10", "11"}
    assert all(abs(v - 1000) <= bound for v in counts.values())


def test_sampling_converges():
    c = Circuit(3).h(0).ry(0.7, 1).cry(1.9, 1, 2).ccx(0, 1, 2)
    st_ = simulate(c)
    exact = marginal_probabilities(st_, (2, 1, 0))
    counts = sample(st_, (2, 1, 0), 10_000, seed=1)
    for k, p in exact.items():
        sigma = math.sqrt(10_000 * p * (1 - p))
        assert abs(counts.get(k, 0) - 10_000 * p) <= 4 * sigma + 1e-9


def test_empty_measure():
    with pytest.raises(EmptyMeasureSet):
        sample(zero_state(1), (), 10, seed=0)
    with pytest.raises(ValueError):
        sample(zero_state(1), (0,), 0, seed=0)


def test_cost_empty():
    assert cost_and_depth(Circuit(3)).as_dict() == {
        "quantum_cost": 0, "depth": 0, "ancilla_count": 0
    }


def test_cost_and_depth_layers():
    c = Circuit(4, ancillas=(3,)).x(0).x(1).cx(0, 1).cswap(2, 0, 3).ccx(0, 1, 2)
    r = cost_and_depth(c)
    assert r.quantum_cost == 1 + 1 + 1 + 5 + 5
    assert r.depth == 4
    assert r.ancilla_count == 1


def test_cost_unknown_gate():
    c = Circuit(3).mcx((0, 1), 2)
    with pytest.raises(UnknownGateKind):
        cost_and_depth(c)
    assert cost_and_depth(c, {"MCX2": 5}).quantum_cost == 5
    assert cost_and_depth(c, {"MCX": 9}).quantum_cost == 9


def test_gate_validation():
    with pytest.raises(UnknownGateKind):
        Gate("CZ", (0,))
    with pytest.raises(ValueError):
        Gate("CNOT", (0,), (0,))
    with pytest.raises(ValueError):
        Gate("RY", (0,), angle=float("nan"))
    with pytest.raises(ValueError):
        Circuit(2).cx(0, 2)


def test_text_round_trip():
    c = Circuit(4, measured=(3, 2), ancillas=(0,))
    c.h(3).mcx((3, 2), 1, (0, 1)).ry(0.25, 0).cry(-1.5, 0, 2).cswap(1, 2, 3).ccx(0, 1, 2).x(0)
    again = Circuit.from_text(c.to_text())
    assert again.to_text() == c.to_text()
    assert again.gates == c.gates


def test_run_basis_matches_simulation():
    c = Circuit(4).mcx((0, 1), 3, (1, 0)).cswap(3, 1, 2).cx(2, 0).ccx(0, 1, 3)
    for j in range(16):
        out = int(np.argmax(np.abs(simulate(c, basis_state(4, j)))))
        assert run_basis(c, j) == out


gate_strategy = st.one_of(
    st.tuples(st.just("NOT"), st.permutations(range(4))),
    st.tuples(st.just("H"), st.permutations(range(4))),
    st.tuples(st.just("CNOT"), st.permutations(range(4))),
    st.tuples(st.just("TOFFOLI"), st.permutations(range(4))),
    st.tuples(st.just("FREDKIN"), st.permutations(range(4))),
    st.tuples(st.just("MCX"), st.permutations(range(4))),
    st.tuples(st.floats(-6, 6), st.permutations(range(4))),
    st.tuples(st.tuples(st.just("CRY"), st.floats(-6, 6)), st.permutations(range(4))),
)


def build(ops):
    c = Circuit(4)
    for kind, qs in ops:
        if kind == "NOT":
            c.x(qs[0])
        elif kind == "H":
            c.h(qs[0])
        elif kind == "CNOT":
            c.cx(qs[0], qs[1])
        elif kind == "TOFFOLI":
            c.ccx(qs[0], qs[1], qs[2])
        elif kind == "FREDKIN":
            c.cswap(qs[0], qs[1], qs[2])
        elif kind == "MCX":
            c.mcx(qs[:3], qs[3], (1, 0, 1))
        elif isinstance(kind, tuple):
            c.cry(kind[1], qs[0], qs[1])
        else:
            c.ry(kind, qs[0])
    return c


@st.composite
def random_state(draw):
    re = draw(st.lists(st.floats(-1, 1), min_size=16, max_size=16))
    im = draw(st.lists(st.floats(-1, 1), min_size=16, max_size=16))
    v = np.array(re) + 1j * np.array(im)
    if np.linalg.norm(v) < 1e-3:
        v = zero_state(4)
    return v / np.linalg.norm(v)


@given(st.lists(gate_strategy, max_size=12), random_state())
def test_matches_dense_oracle_norm_and_inverse(ops, psi):
    c = build(ops)
    out = simulate(c, psi)
    assert np.allclose(out, dense_unitary(c) @ psi, atol=1e-10)
    assert abs(np.linalg.norm(out) - 1) <= 1e-9
    assert np.allclose(simulate(c.inverse(), out), psi, atol=1e-9)
