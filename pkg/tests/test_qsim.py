import math

import numpy as np
import pytest

from quav.errors import IndexOutOfRange, TooManyQubits
from quav.qsim import (DiagonalObservable, Gate, StateVector, apply_gate, bits_of, bitstring,
                       expectation_diagonal, init_plus_state, run_circuit, sample_bitstrings,
                       z_table)

from .oracles import circuit_unitary, ising_energy


def random_gates(rng, n, count):
    gates = []
    for _ in range(count):
        kind = rng.choice(["H", "RX", "RZ", "CNOT"] if n > 1 else ["H", "RX", "RZ"])
        t = int(rng.integers(n))
        if kind == "CNOT":
            c = int(rng.choice([q for q in range(n) if q != t]))
            gates.append(Gate("CNOT", t, control=c))
        else:
            gates.append(Gate(str(kind), t, theta=float(rng.uniform(-2 * math.pi, 2 * math.pi))))
    return gates


def test_hadamard_twice_is_identity():
    s = run_circuit([Gate("H", 0), Gate("H", 0)], 1)
    assert np.allclose(s.amplitudes, [1, 0])


def test_plus_state():
    s = init_plus_state(3)
    assert np.allclose(s.amplitudes, 1 / math.sqrt(8))
    s2 = run_circuit([Gate("H", q) for q in range(3)], 3)
    assert np.allclose(s.amplitudes, s2.amplitudes)


def test_cnot_truth_table():
    # |control=1, target=0> -> |11>
    s = run_circuit([Gate("RX", 0, theta=math.pi), Gate("CNOT", 1, control=0)], 2)
    assert np.allclose(np.abs(s.amplitudes) ** 2, [0, 0, 0, 1])


def test_rz_phases():
    s = apply_gate(init_plus_state(1), Gate("RZ", 0, theta=0.7))
    expected = np.array([np.exp(-0.35j), np.exp(0.35j)]) / math.sqrt(2)
    assert np.allclose(s.amplitudes, expected)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_random_circuits_match_kronecker_oracle(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        gates = random_gates(rng, n, 15)
        got = run_circuit(gates, n).amplitudes
        ref = circuit_unitary(gates, n)[:, 0]
        assert np.max(np.abs(got - ref)) < 1e-10


def test_norm_preserved():
    rng = np.random.default_rng(9)
    s = run_circuit(random_gates(rng, 6, 60), 6)
    assert s.norm() == pytest.approx(1.0, abs=1e-12)


def test_errors():
    with pytest.raises(TooManyQubits):
        StateVector.zero(25)
    with pytest.raises(TooManyQubits):
        StateVector.zero(0)
    with pytest.raises(IndexOutOfRange):
        apply_gate(StateVector.zero(2), Gate("H", 2))
    with pytest.raises(ValueError):
        Gate("CNOT", 0, control=0)
    with pytest.raises(ValueError):
        Gate("T", 0)


def test_z_table_convention():
    z = z_table(2)
    assert z.tolist() == [[1, 1], [-1, 1], [1, -1], [-1, -1]]


def test_diagonal_energies_match_bitwise_oracle():
    rng = np.random.default_rng(4)
    n = 6
    w = rng.normal(size=n)
    J = rng.normal(size=n - 1)
    obs = DiagonalObservable(tuple(w), tuple((i, i + 1, J[i]) for i in range(n - 1)))
    E = obs.energies()
    for idx in range(1 << n):
        bits = bits_of(idx, n)
        assert E[idx] == pytest.approx(ising_energy(bits, w, J))
        assert obs.energy_of(bits) == pytest.approx(E[idx])


def test_expectation_uniform_state_is_zero():
    obs = DiagonalObservable((0.3, -0.7, 1.0), ((0, 1, 0.5), (1, 2, -0.2)))
    assert expectation_diagonal(init_plus_state(3), obs) == pytest.approx(0.0, abs=1e-15)


def test_sampling_is_seeded_and_tracks_probabilities():
    s = run_circuit([Gate("RX", 0, theta=2 * math.acos(math.sqrt(0.8)))], 1)   # P(0)=0.8
    a = sample_bitstrings(s, 100_000, seed=1)
    assert a == sample_bitstrings(s, 100_000, seed=1)
    p0 = a[0] / 100_000
    sigma = math.sqrt(0.8 * 0.2 / 100_000)
    assert abs(p0 - 0.8) < 5 * sigma


def test_bitstring_text_puts_qubit_zero_first():
    assert bits_of(0b011, 3) == (1, 1, 0)
    assert bitstring(0b011, 3) == "110"
