"""QAOA over edge-selection bitstrings.

Bit ``b_i = 1`` means edge ``i`` is part of the path.  The decoder scores a
bitstring by

    score(b) = sum_{i: b_i=1} C_i  +  mu * (# broken links)

where a *link* joins two consecutive edges (or an edge to the start/end
anchor) and is broken when either side is excluded.  Written in Z
eigenvalues this score is an Ising energy with single-Z fields and
nearest-neighbour ZZ couplings, which is exactly what the circuit's
Rz / CNOT-Rz-CNOT layer implements.  The circuit therefore minimises the
same objective the decoder ranks by.

Raw costs span nine orders of magnitude (1e6 obstacle penalty, -1e3 start
bias, metre-scale distances).  Before normalising, costs are clipped to
``[-mu, 3*mu]``: any edge costing more than ``2*mu`` is excluded at every
minimiser and any negative-cost edge is included at every minimiser, so the
clip leaves the set of optimal bitstrings unchanged while keeping all field
strengths O(1).

Exact expectations use a light-cone reduction: with nearest-neighbour
couplings and ``k`` layers, a term on qubits ``{i, i+1}`` only sees the
``2k + 2`` qubits around it, so each term is evaluated on a small window.
"""
from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cost import CostVector
from .errors import DimensionMismatch, NoFeasibleSample, TooManyQubits
from .geo import ObstaclePolygon, Point, Segment, segment_intersects
from .qsim import (MAX_QUBITS, DiagonalObservable, Gate, StateVector, bitstring, bits_of,
                   sample_bitstrings, z_table)

ANCHOR = -1


@dataclass
class QaoaParams:
    gammas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        self.gammas = np.atleast_1d(np.asarray(self.gammas, dtype=float))
        self.betas = np.atleast_1d(np.asarray(self.betas, dtype=float))
        if len(self.gammas) != len(self.betas) or len(self.gammas) < 1:
            raise DimensionMismatch("need k >= 1 gammas and the same number of betas")

    @property
    def k(self) -> int:
        return len(self.gammas)

    def vector(self) -> np.ndarray:
        return np.concatenate([self.gammas, self.betas])

    @classmethod
    def from_vector(cls, v) -> "QaoaParams":
        v = np.asarray(v, dtype=float)
        if v.size % 2:
            raise DimensionMismatch("parameter vector must have even length")
        k = v.size // 2
        return cls(v[:k].copy(), v[k:].copy())

    def to_text(self) -> str:
        lines = [f"k={self.k}"]
        lines += [f"gamma_{p}={float(g)!r}" for p, g in enumerate(self.gammas)]
        lines += [f"beta_{p}={float(b)!r}" for p, b in enumerate(self.betas)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "QaoaParams":
        kv = dict(line.split("=", 1) for line in text.split() if "=" in line)
        k = int(kv["k"])
        return cls([float(kv[f"gamma_{p}"]) for p in range(k)],
                   [float(kv[f"beta_{p}"]) for p in range(k)])


def chain_links(n: int) -> list[tuple[int, int]]:
    """Links of a straight chain of ``n`` edges, anchored at both ends."""
    return [(ANCHOR, 0)] + [(i, i + 1) for i in range(n - 1)] + [(n - 1, ANCHOR)]


@dataclass
class QaoaProblem:
    """Normalised Ising fields ``weights`` and consecutive-pair ``coupling``.

    ``costs`` keeps the raw per-edge costs used for decoding, ``links`` and
    ``mu`` define the discontinuity term of the decode score.
    """

    costs: CostVector
    weights: np.ndarray
    coupling: np.ndarray
    links: list[tuple[int, int]]
    mu: float
    hamiltonian: str = "selection"

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.coupling = np.asarray(self.coupling, dtype=float)
        if self.weights.size != self.costs.n:
            raise DimensionMismatch("one weight per cost entry required")
        if self.coupling.size != max(self.n - 1, 0):
            raise DimensionMismatch("coupling needs n - 1 entries")
        if self.n > MAX_QUBITS:
            raise TooManyQubits(f"{self.n} qubits exceeds {MAX_QUBITS}")

    @property
    def n(self) -> int:
        return self.costs.n

    @classmethod
    def from_costs(cls, costs: CostVector, mu: float,
                   links: Sequence[tuple[int, int]] | None = None) -> "QaoaProblem":
        """Selection Hamiltonian equal (up to a constant and scale) to the decode score."""
        if not mu > 0:
            raise ValueError("discontinuity penalty mu must be > 0")
        n = costs.n
        links = list(chain_links(n) if links is None else links)
        c = np.clip(costs.raw, -mu, 3.0 * mu)
        h = -0.5 * c
        J = np.zeros(max(n - 1, 0))
        for i, j in links:
            if i == ANCHOR or j == ANCHOR:
                h[j if i == ANCHOR else i] += 0.5 * mu
                continue
            h[i] += 0.25 * mu
            h[j] += 0.25 * mu
            lo, hi = min(i, j), max(i, j)
            if hi == lo + 1:
                J[lo] -= 0.25 * mu
        scale = max(np.max(np.abs(h)), np.max(np.abs(J)) if J.size else 0.0)
        if scale == 0.0:
            scale = 1.0
        return cls(costs, h / scale, J / scale, links, float(mu), "selection")

    @classmethod
    def literal(cls, costs: CostVector, coupling: float = 0.5, mu: float | None = None,
                links: Sequence[tuple[int, int]] | None = None) -> "QaoaProblem":
        """``sum_i c_i Z_i + J sum_i Z_i Z_{i+1}`` with ``c = raw / max|raw|``."""
        n = costs.n
        mu = float(mu) if mu is not None else 1.0
        return cls(costs, costs.normalized.copy(), np.full(max(n - 1, 0), float(coupling)),
                   list(chain_links(n) if links is None else links), mu, "literal")

    @classmethod
    def from_weights(cls, weights, coupling=0.0) -> "QaoaProblem":
        """Bare Ising problem (raw costs equal the weights), for tests and tooling."""
        w = np.asarray(weights, dtype=float)
        J = np.broadcast_to(np.asarray(coupling, dtype=float), (max(w.size - 1, 0),)).copy()
        return cls(CostVector.from_raw(w), w, J, chain_links(w.size), 1.0, "literal")

    def observable(self) -> DiagonalObservable:
        return DiagonalObservable(tuple(self.weights),
                                  tuple((i, i + 1, J) for i, J in enumerate(self.coupling)))

    def broken_links(self, bits: Sequence[int]) -> int:
        broken = 0
        for i, j in self.links:
            a = 1 if i == ANCHOR else bits[i]
            b = 1 if j == ANCHOR else bits[j]
            broken += not (a and b)
        return broken

    def score(self, bits: Sequence[int]) -> float:
        """Decode objective in raw cost units."""
        raw = self.costs.raw
        return float(math.fsum(raw[i] for i, b in enumerate(bits) if b)
                     + self.mu * self.broken_links(bits))


# ---------------------------------------------------------------------------
# Circuit

def build_circuit(problem: QaoaProblem, params: QaoaParams) -> list[Gate]:
    """Gate list: H layer, then per layer Z fields, ZZ couplings, Rx mixer.

    Each gate records which entry of ``params.vector()`` drives its angle and
    the angle's scale, so gradients can apply the chain rule per gate.
    """
    n, k = problem.n, params.k
    gates = [Gate("H", q) for q in range(n)]
    for p in range(k):
        g = params.gammas[p]
        for i in range(n):
            c = 2.0 * problem.weights[i]
            gates.append(Gate("RZ", i, theta=c * g, param=p, coeff=c))
        for i in range(1, n):
            c = 2.0 * problem.coupling[i - 1]
            gates.append(Gate("CNOT", i, control=i - 1))
            gates.append(Gate("RZ", i, theta=c * g, param=p, coeff=c))
            gates.append(Gate("CNOT", i, control=i - 1))
        for i in range(n):
            gates.append(Gate("RX", i, theta=2.0 * params.betas[p], param=k + p, coeff=2.0))
    return gates


def gate_count(n: int, k: int) -> int:
    return n + k * (2 * n + 3 * (n - 1))


# ---------------------------------------------------------------------------
# Layered engine (batched over light-cone windows)

def _rx_kron(beta: float, q: int) -> np.ndarray:
    c, s = math.cos(beta), math.sin(beta)
    r = np.array([[c, -1j * s], [-1j * s, c]])
    out = np.ones((1, 1), dtype=np.complex128)
    for _ in range(q):
        out = np.kron(out, r)
    return out


def _mix(psi: np.ndarray, beta: float, m: int) -> None:
    """``exp(-i beta X)`` on every qubit of each row of ``psi`` (in place).

    The product of single-qubit rotations factorises over the low and high
    halves of the index, so it is applied as two small matrix products.
    """
    lo = m // 2
    hi = m - lo
    v = psi.reshape(psi.shape[0], 1 << hi, 1 << lo)
    out = _rx_kron(beta, hi) @ v @ _rx_kron(beta, lo).T
    v[...] = out


def _apply_sum_x(psi: np.ndarray, m: int) -> np.ndarray:
    W = psi.shape[0]
    out = np.zeros_like(psi)
    for q in range(m):
        o = out.reshape(W, -1, 2, 1 << q)
        o += psi.reshape(W, -1, 2, 1 << q)[:, :, ::-1, :]
    return out


def _forward(E: np.ndarray, gammas, betas, m: int) -> np.ndarray:
    psi = np.full(E.shape, 2.0 ** (-m / 2), dtype=np.complex128)
    for g, b in zip(gammas, betas):
        psi *= np.exp(-1j * g * E)
        _mix(psi, b, m)
    return psi


def _value_and_grad(E: np.ndarray, O: np.ndarray, gammas, betas, m: int):
    """Expectation of diagonal ``O`` and its adjoint-mode gradient, per row."""
    k = len(gammas)
    psi = _forward(E, gammas, betas, m)
    value = np.einsum("wb,wb->w", np.abs(psi) ** 2, O)
    lam = O * psi
    grad = np.zeros((E.shape[0], 2 * k))
    for p in range(k - 1, -1, -1):
        bx = _apply_sum_x(psi, m)
        grad[:, k + p] = 2.0 * np.einsum("wb,wb->w", lam.conj(), -1j * bx).real
        _mix(psi, -betas[p], m)
        _mix(lam, -betas[p], m)
        grad[:, p] = 2.0 * np.einsum("wb,wb->w", lam.conj(), -1j * E * psi).real
        phase = np.exp(1j * gammas[p] * E)
        psi *= phase
        lam *= phase
    return value, grad


def _windows(problem: QaoaProblem, k: int):
    """Energies and observables for each light-cone window, batched."""
    n = problem.n
    h, J = problem.weights, problem.coupling
    m = min(n, 2 * k + 2)
    z = z_table(m).astype(float)
    zz = z[:, :-1] * z[:, 1:] if m > 1 else np.zeros((1 << m, 0))
    if m == n:
        E = z @ h + zz @ J
        return E[None, :], E[None, :], m
    starts = []
    Es, Os = [], []
    for i in range(n - 1):
        s = min(max(i - k, 0), n - m)
        starts.append(s)
        Es.append(z @ h[s:s + m] + zz @ J[s:s + m - 1])
        a = i - s
        O = J[i] * zz[:, a] + h[i] * z[:, a]
        if i == n - 2:
            O = O + h[n - 1] * z[:, a + 1]
        Os.append(O)
    return np.array(Es), np.array(Os), m


def expectation(problem: QaoaProblem, params: QaoaParams) -> float:
    E, O, m = _windows(problem, params.k)
    psi = _forward(E, params.gammas, params.betas, m)
    return float(np.einsum("wb,wb->", np.abs(psi) ** 2, O))


def value_and_grad(problem: QaoaProblem, params: QaoaParams) -> tuple[float, np.ndarray]:
    """Exact loss and analytic gradient (reverse mode over the light-cone windows)."""
    E, O, m = _windows(problem, params.k)
    vals, grads = _value_and_grad(E, O, params.gammas, params.betas, m)
    return float(vals.sum()), grads.sum(axis=0)


def final_state(problem: QaoaProblem, params: QaoaParams) -> StateVector:
    """Full ``2**n`` statevector after all layers."""
    E = problem.observable().energies()
    psi = _forward(E[None, :], params.gammas, params.betas, problem.n)
    return StateVector(problem.n, psi[0])


def evaluate_loss(problem: QaoaProblem, params: QaoaParams, shots: int | None = None,
                  seed: int | None = None) -> float:
    """``<H_C>`` in normalised units; sample mean when ``shots`` is given."""
    if problem.n > MAX_QUBITS:
        raise TooManyQubits(f"{problem.n} qubits exceeds {MAX_QUBITS}")
    if shots is None:
        return expectation(problem, params)
    state = final_state(problem, params)
    counts = sample_bitstrings(state, shots, seed)
    E = problem.observable().energies()
    idx = np.fromiter(counts.keys(), dtype=np.int64)
    w = np.fromiter(counts.values(), dtype=float)
    return float(np.dot(E[idx], w) / shots)


def parameter_shift_grad(problem: QaoaProblem, params: QaoaParams) -> np.ndarray:
    """Gradient by +-pi/2 shifts of every parametrised gate, chained to (gamma, beta).

    Each Rz/Rx gate ``exp(-i theta P / 2)`` obeys the two-term shift rule
    exactly; the parameter gradient sums ``coeff * (f+ - f-) / 2`` over the
    gates that parameter drives.  Costs two full simulations per gate.
    """
    from .qsim import expectation_diagonal, run_circuit

    gates = build_circuit(problem, params)
    obs = problem.observable()
    n = problem.n
    grad = np.zeros(2 * params.k)
    # cache prefix states so each shift only replays the suffix
    prefix = [StateVector.zero(n)]
    from .qsim import apply_gate
    for g in gates:
        prefix.append(apply_gate(prefix[-1].copy(), g))
    for idx, g in enumerate(gates):
        if g.param is None or g.coeff == 0.0:
            continue
        diff = 0.0
        for sign in (1.0, -1.0):
            s = apply_gate(prefix[idx].copy(), g.with_theta(g.theta + sign * math.pi / 2))
            s = run_circuit(gates[idx + 1:], n, s)
            diff += sign * expectation_diagonal(s, obs)
        grad[g.param] += g.coeff * diff / 2.0
    return grad


# ---------------------------------------------------------------------------
# Adam

@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, dim: int) -> "AdamState":
        return cls(np.zeros(dim), np.zeros(dim), 0)


def adam_step(x, grad, state: AdamState, lr: float = 0.1, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8):
    x = np.asarray(x, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if x.shape != grad.shape or state.m.shape != x.shape:
        raise DimensionMismatch(f"shapes {x.shape}, {grad.shape}, {state.m.shape} differ")
    t = state.t + 1
    m = beta1 * state.m + (1 - beta1) * grad
    v = beta2 * state.v + (1 - beta2) * grad * grad
    m_hat = m / (1 - beta1 ** t)
    v_hat = v / (1 - beta2 ** t)
    return x - lr * m_hat / (np.sqrt(v_hat) + eps), AdamState(m, v, t)


@dataclass
class LossTrace:
    losses: list[float] = field(default_factory=list)
    best_losses: list[float] = field(default_factory=list)
    params: list[np.ndarray] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.losses)

    def record(self, loss: float, x: np.ndarray) -> None:
        best = min(loss, self.best_losses[-1]) if self.best_losses else loss
        self.losses.append(float(loss))
        self.best_losses.append(float(best))
        self.params.append(np.array(x, copy=True))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "loss", "best_loss"])
            for i, (l, b) in enumerate(zip(self.losses, self.best_losses)):
                w.writerow([i, repr(l), repr(b)])


def optimize(problem: QaoaProblem, steps: int = 60, seed: int = 0, layers: int = 5,
             lr: float = 0.1, shots: int | None = None, init_scale: float = 0.1,
             ) -> tuple[QaoaParams, LossTrace]:
    """Adam over (gammas, betas) from a seeded uniform start in ``[-0.1, 0.1]``.

    Returns the best parameters seen and the per-step loss trace.  With
    ``shots`` the recorded losses (and hence the best-seen choice) are
    finite-shot estimates; the update direction stays the exact gradient.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-init_scale, init_scale, size=2 * layers)
    state = AdamState.zeros(x.size)
    trace = LossTrace()
    best_x, best_loss = x.copy(), math.inf
    for step in range(steps):
        params = QaoaParams.from_vector(x)
        loss, grad = value_and_grad(problem, params)
        if shots is not None:
            loss = evaluate_loss(problem, params, shots=shots, seed=int(rng.integers(2**31)))
        trace.record(loss, x)
        if loss < best_loss:
            best_loss, best_x = loss, x.copy()
        x, state = adam_step(x, grad, state, lr)
    return QaoaParams.from_vector(best_x), trace


# ---------------------------------------------------------------------------
# Decoding

@dataclass
class DecodedPath:
    bitstring: str
    selected: list[int]
    waypoints: list[Point]
    feasible: bool
    cost: float                  # decode score (raw units, incl. discontinuity)
    raw_cost: float              # sum of raw costs of selected edges
    broken_links: int
    reached_end: bool = False

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.bitstring)


def _close(p: Point, q: Point, tol: float = 1e-6) -> bool:
    return abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol


def _chain(edges: Sequence[Segment], selected: Sequence[int], start: Point):
    """Walk selected edges from ``start``; returns (waypoints, used edge indices)."""
    remaining = sorted(selected)
    cur = start
    pts = [start]
    used = []
    while remaining:
        nxt = None
        for i in remaining:
            e = edges[i]
            if _close(e.a, cur):
                nxt = (i, e.b)
                break
            if _close(e.b, cur):
                nxt = (i, e.a)
                break
        if nxt is None:
            break
        i, cur = nxt
        remaining.remove(i)
        used.append(i)
        pts.append(cur)
    return pts, used


def decode_path(problem: QaoaProblem, samples, edges: Sequence[Segment],
                obstacles: Sequence[ObstaclePolygon], start: Point,
                end: Point | None = None) -> DecodedPath:
    """Best-scoring feasible path among the sampled bitstrings.

    ``samples`` is a ``Counter`` (or iterable) of basis indices.  Ties on the
    score go to the lexicographically smallest bitstring (qubit 0 first).
    Raises :class:`NoFeasibleSample` carrying the best infeasible decode when
    no sample is feasible.
    """
    n = problem.n
    if len(edges) != n:
        raise DimensionMismatch("one edge per qubit required")
    counts = samples if isinstance(samples, Counter) else Counter(samples)
    if not counts:
        raise ValueError("need at least one sample")
    if end is None:
        end = edges[-1].b
    start = (float(start[0]), float(start[1]))
    hit_cache: dict[int, bool] = {}

    def hits(i: int) -> bool:
        if i not in hit_cache:
            hit_cache[i] = any(segment_intersects(edges[i], o) for o in obstacles)
        return hit_cache[i]

    ranked = []
    for idx in counts:
        bits = bits_of(int(idx), n)
        ranked.append((problem.score(bits), bitstring(int(idx), n), bits))
    ranked.sort(key=lambda t: (t[0], t[1]))

    best_any = None
    for score, text, bits in ranked:
        sel = [i for i, b in enumerate(bits) if b]
        pts, used = _chain(edges, sel, start)
        reached = _close(pts[-1], end)
        feasible = bool(sel) and reached and len(used) == len(sel) and not any(hits(i) for i in sel)
        d = DecodedPath(text, sel, pts, feasible, score,
                        float(math.fsum(problem.costs.raw[i] for i in sel)),
                        problem.broken_links(bits), reached)
        if feasible:
            return d
        if best_any is None:
            best_any = d
    raise NoFeasibleSample("no sampled bitstring decodes to a feasible path", best_any)


def brute_force_optimum(problem: QaoaProblem) -> tuple[float, tuple[int, ...]]:
    """Exhaustive minimum of the decode score (for ``n`` up to ~20)."""
    best = (math.inf, ())
    for idx in range(1 << problem.n):
        bits = bits_of(idx, problem.n)
        s = problem.score(bits)
        if s < best[0]:
            best = (s, bits)
    return best
