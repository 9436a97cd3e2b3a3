"""Dense statevector simulator for H, Rx, Rz and CNOT.

Qubit 0 is the least significant bit of the basis-state index.  A Z
eigenvalue is +1 for bit 0 and -1 for bit 1.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import IndexOutOfRange, TooManyQubits

MAX_QUBITS = 24


@dataclass
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n <= MAX_QUBITS:
            raise TooManyQubits(f"{self.n} qubits outside 1..{MAX_QUBITS}")
        if self.amplitudes.shape != (1 << self.n,):
            raise ValueError("amplitude vector has the wrong length")

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        _check_n(n)
        a = np.zeros(1 << n, dtype=np.complex128)
        a[0] = 1.0
        return cls(n, a)

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amplitudes.copy())

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.probabilities))


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise TooManyQubits(f"{n} qubits outside 1..{MAX_QUBITS}")


def init_plus_state(n: int) -> StateVector:
    _check_n(n)
    a = np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128)
    return StateVector(n, a)


@dataclass(frozen=True)
class Gate:
    kind: str                 # "H", "RX", "RZ" or "CNOT"
    target: int
    control: int | None = None
    theta: float = 0.0
    # bookkeeping for gradients: which parameter drives this angle, and its scale
    param: int | None = field(default=None, compare=False)
    coeff: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.kind not in ("H", "RX", "RZ", "CNOT"):
            raise ValueError(f"unsupported gate {self.kind!r}")
        if self.kind == "CNOT":
            if self.control is None or self.control == self.target:
                raise ValueError("CNOT needs a control distinct from the target")

    def with_theta(self, theta: float) -> "Gate":
        return Gate(self.kind, self.target, self.control, theta, self.param, self.coeff)


_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)


def _single_matrix(g: Gate) -> np.ndarray:
    if g.kind == "H":
        return _H
    c, s = math.cos(g.theta / 2), math.sin(g.theta / 2)
    if g.kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    return np.array([[c - 1j * s, 0], [0, c + 1j * s]], dtype=np.complex128)


@lru_cache(maxsize=256)
def _cnot_pairs(n: int, control: int, target: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << n)
    sel = idx[((idx >> control) & 1 == 1) & ((idx >> target) & 1 == 0)]
    return sel, sel | (1 << target)


def apply_gate(s: StateVector, g: Gate) -> StateVector:
    """Apply ``g`` to ``s`` in place and return ``s``."""
    n = s.n
    qubits = (g.target,) if g.control is None else (g.target, g.control)
    for q in qubits:
        if not 0 <= q < n:
            raise IndexOutOfRange(f"qubit {q} outside 0..{n - 1}")
    a = s.amplitudes
    if g.kind == "CNOT":
        i0, i1 = _cnot_pairs(n, g.control, g.target)
        a[i0], a[i1] = a[i1], a[i0].copy()
        return s
    q = g.target
    v = a.reshape(-1, 2, 1 << q)
    if g.kind == "RZ":
        v[:, 0, :] *= np.exp(-0.5j * g.theta)
        v[:, 1, :] *= np.exp(0.5j * g.theta)
        return s
    m = _single_matrix(g)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = m[0, 0] * a0 + m[0, 1] * a1
    v[:, 1, :] = m[1, 0] * a0 + m[1, 1] * a1
    return s


def run_circuit(gates: Iterable[Gate], n: int, state: StateVector | None = None) -> StateVector:
    """Apply ``gates`` to ``|0...0>`` (or a copy of ``state``)."""
    s = StateVector.zero(n) if state is None else state.copy()
    for g in gates:
        apply_gate(s, g)
    return s


# ---------------------------------------------------------------------------
# Diagonal observables

@lru_cache(maxsize=32)
def z_table(n: int) -> np.ndarray:
    """``(2**n, n)`` int8 array of Z eigenvalues, column ``i`` for qubit ``i``."""
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> np.arange(n)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


@dataclass(frozen=True)
class DiagonalObservable:
    """``sum_i c_i Z_i + sum J_ij Z_i Z_j``."""

    weights: tuple[float, ...]
    couplings: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if not all(math.isfinite(x) for x in w):
            raise ValueError("observable weights must be finite")
        c = tuple((int(i), int(j), float(J)) for i, j, J in self.couplings)
        for i, j, J in c:
            if not (0 <= i < len(w) and 0 <= j < len(w)) or i == j:
                raise IndexOutOfRange(f"bad coupling indices ({i}, {j})")
            if not math.isfinite(J):
                raise ValueError("coupling must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "couplings", c)

    @property
    def n(self) -> int:
        return len(self.weights)

    def energies(self) -> np.ndarray:
        """Eigenvalue of every basis state, indexed like the amplitudes."""
        n = self.n
        idx = np.arange(1 << n)
        E = np.zeros(1 << n)
        for i, c in enumerate(self.weights):
            if c:
                E += c * (1 - 2 * ((idx >> i) & 1))
        for i, j, J in self.couplings:
            if J:
                E += J * (1 - 2 * (((idx >> i) ^ (idx >> j)) & 1))
        return E

    def energy_of(self, bits: Sequence[int]) -> float:
        z = [1 - 2 * b for b in bits]
        return (sum(c * zi for c, zi in zip(self.weights, z))
                + sum(J * z[i] * z[j] for i, j, J in self.couplings))


def expectation_diagonal(s: StateVector, obs: DiagonalObservable) -> float:
    if obs.n != s.n:
        raise IndexOutOfRange("observable and state sizes differ")
    return float(np.dot(s.probabilities, obs.energies()))


# ---------------------------------------------------------------------------
# Sampling

def sample_indices(s: StateVector, shots: int, seed: int | None) -> np.ndarray:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = s.probabilities
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    return rng.choice(p.size, size=shots, p=p)


def sample_bitstrings(s: StateVector, shots: int, seed: int | None) -> Counter:
    """Multiset of sampled basis indices (``Counter`` of index -> count)."""
    return Counter(sorted(sample_indices(s, shots, seed).tolist()))


def bits_of(index: int, n: int) -> tuple[int, ...]:
    """Bit of each qubit, qubit 0 first."""
    return tuple((index >> i) & 1 for i in range(n))


def bitstring(index: int, n: int) -> str:
    """Text form with qubit 0 as the leftmost character."""
    return "".join(str(b) for b in bits_of(index, n))
