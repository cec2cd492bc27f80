"""
Dense state-vector simulator used as an independent oracle for small registers
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

import config
from pauli_algebra import GateSpec, PauliString

logger = logging.getLogger(__name__)

TOLERANCE = 1e-10

_SQ2 = 1 / np.sqrt(2)
_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class ImpossibleBranchError(ValueError):
    """Raised when a forced outcome has zero probability"""


class DenseSizeError(ValueError):
    """Raised when a register is too large for dense simulation"""


class MeasurementInCircuitError(ValueError):
    """Raised when a unitary is requested for a circuit with non-unitary locations"""


def rx(theta: float) -> np.ndarray:
    return np.cos(theta / 2) * _I2 - 1j * np.sin(theta / 2) * _X


def ry(theta: float) -> np.ndarray:
    return np.cos(theta / 2) * _I2 - 1j * np.sin(theta / 2) * _Y


def rz(theta: float) -> np.ndarray:
    return np.cos(theta / 2) * _I2 - 1j * np.sin(theta / 2) * _Z


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    return np.array([
        [np.cos(theta / 2), -np.exp(1j * lam) * np.sin(theta / 2)],
        [np.exp(1j * phi) * np.sin(theta / 2), np.exp(1j * (phi + lam)) * np.cos(theta / 2)],
    ], dtype=complex)


ONE_QUBIT_MATRICES = {
    "I": _I2,
    "X": _X,
    "Y": _Y,
    "Z": _Z,
    "H": _SQ2 * np.array([[1, 1], [1, -1]], dtype=complex),
    "S": np.diag([1, 1j]).astype(complex),
    "SDG": np.diag([1, -1j]).astype(complex),
    "SX": rx(np.pi / 2),
    "SXDG": rx(-np.pi / 2),
    "SY": ry(np.pi / 2),
    "SYDG": ry(-np.pi / 2),
}

_P0 = np.diag([1, 0]).astype(complex)
_P1 = np.diag([0, 1]).astype(complex)

# control is the first (more significant) factor
TWO_QUBIT_MATRICES = {
    "CX": np.kron(_P0, _I2) + np.kron(_P1, _X),
    "CY": np.kron(_P0, _I2) + np.kron(_P1, _Y),
    "CZ": np.kron(_P0, _I2) + np.kron(_P1, _Z),
    "CRX": np.kron(_P0, rx(np.pi / 2)) + np.kron(_P1, rx(-np.pi / 2)),
}


def gate_matrix(g: GateSpec) -> np.ndarray:
    if g.kind in ONE_QUBIT_MATRICES:
        return ONE_QUBIT_MATRICES[g.kind]
    if g.kind in TWO_QUBIT_MATRICES:
        return TWO_QUBIT_MATRICES[g.kind]
    if g.kind == "RX":
        return rx(*g.params)
    if g.kind == "RY":
        return ry(*g.params)
    if g.kind == "RZ":
        return rz(*g.params)
    if g.kind == "U":
        return u3(*g.params)
    raise ValueError(f"No matrix for gate kind '{g.kind}'")


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Full 2^n matrix of p with qubit 1 as the most significant tensor factor"""
    matrix = np.array([[p.phase]], dtype=complex)
    for letter in p.letters:
        matrix = np.kron(matrix, ONE_QUBIT_MATRICES[letter])
    return matrix


def _check_size(n: int):
    if n > config.MAX_DENSE_QUBITS:
        raise DenseSizeError(f"{n} qubits exceed the dense limit of {config.MAX_DENSE_QUBITS}")


class DenseState:
    """Normalised state vector; qubit 1 is the most significant bit of the basis index"""

    def __init__(self, n: int, amplitudes: np.ndarray):
        _check_size(n)
        amplitudes = np.asarray(amplitudes, dtype=complex).reshape(2 ** n)
        norm = np.linalg.norm(amplitudes)
        if norm < TOLERANCE:
            raise ImpossibleBranchError("State vector has zero norm")
        self.n = n
        self.amplitudes = amplitudes / norm

    @classmethod
    def zeros(cls, n: int) -> "DenseState":
        vec = np.zeros(2 ** n, dtype=complex)
        vec[0] = 1
        return cls(n, vec)

    @classmethod
    def basis(cls, bits: str) -> "DenseState":
        vec = np.zeros(2 ** len(bits), dtype=complex)
        vec[int(bits, 2)] = 1
        return cls(len(bits), vec)

    @classmethod
    def from_stabilizers(cls, generators: Sequence[PauliString]) -> "DenseState":
        """Project onto the joint +1 eigenspace of the generators"""
        n = generators[0].n
        _check_size(n)
        projector = np.eye(2 ** n, dtype=complex)
        for g in generators:
            projector = projector @ (np.eye(2 ** n) + pauli_matrix(g)) / 2
        for column in range(2 ** n):
            vec = projector[:, column]
            if np.linalg.norm(vec) > 1e-6:
                return cls(n, vec)
        raise ImpossibleBranchError("Generators have no common +1 eigenstate")

    @classmethod
    def from_tableau(cls, state) -> "DenseState":
        return cls.from_stabilizers(state.stabilizers)

    def copy(self) -> "DenseState":
        return DenseState(self.n, self.amplitudes.copy())

    def tensor(self, other: "DenseState") -> "DenseState":
        return DenseState(self.n + other.n, np.kron(self.amplitudes, other.amplitudes))

    def extended(self, n: int) -> "DenseState":
        return self.tensor(DenseState.zeros(n - self.n)) if n > self.n else self.copy()

    # evolution --------------------------------------------------------------

    def apply_matrix(self, matrix: np.ndarray, qubits: Sequence[int]) -> "DenseState":
        k = len(qubits)
        psi = self.amplitudes.reshape([2] * self.n)
        op = matrix.reshape([2] * (2 * k))
        psi = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), list(qubits)))
        psi = np.moveaxis(psi, list(range(k)), list(qubits))
        self.amplitudes = psi.reshape(2 ** self.n)
        return self

    def apply_gate(self, g: GateSpec) -> "DenseState":
        return self.apply_matrix(gate_matrix(g), g.qubits)

    def apply_pauli(self, p: PauliString) -> "DenseState":
        self.amplitudes = pauli_matrix(p) @ self.amplitudes
        return self

    def permute(self, perm: Sequence[int]) -> "DenseState":
        """Relabel qubits so that the content of qubit i moves to qubit perm[i]"""
        psi = self.amplitudes.reshape([2] * self.n)
        psi = np.moveaxis(psi, list(range(self.n)), list(perm))
        self.amplitudes = psi.reshape(2 ** self.n)
        return self

    def probability(self, qubit: int, bit: int) -> float:
        psi = self.amplitudes.reshape([2] * self.n)
        return float(np.sum(np.abs(np.take(psi, bit, axis=qubit)) ** 2))

    def project(self, qubit: int, bit: int) -> float:
        """Project qubit onto |bit⟩ and renormalise; returns the Born probability"""
        prob = self.probability(qubit, bit)
        if prob < TOLERANCE:
            raise ImpossibleBranchError(f"Outcome {bit} on qubit {qubit} has zero probability")
        psi = self.amplitudes.reshape([2] * self.n).copy()
        index = [slice(None)] * self.n
        index[qubit] = 1 - bit
        psi[tuple(index)] = 0
        self.amplitudes = psi.reshape(2 ** self.n) / np.sqrt(prob)
        return prob

    def restrict(self, qubits: Sequence[int]) -> "DenseState":
        """The state of `qubits` when every other qubit is in |0⟩"""
        state = self.copy()
        others = [q for q in range(self.n) if q not in qubits]
        for q in others:
            if state.probability(q, 1) > TOLERANCE:
                raise ValueError(f"Qubit {q} is not in |0> and cannot be dropped")
        psi = state.amplitudes.reshape([2] * self.n)
        psi = np.moveaxis(psi, list(qubits), list(range(len(qubits))))
        psi = psi.reshape(2 ** len(qubits), -1)[:, 0]
        return DenseState(len(qubits), psi)


def expectation_dense(s: DenseState, p: PauliString) -> float:
    return float(np.real(np.vdot(s.amplitudes, pauli_matrix(p) @ s.amplitudes)))


def state_fidelity(a: DenseState, b: DenseState) -> float:
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def _prepare(state: DenseState, qubit: int, basis: str, rng, forced: Optional[int]) -> float:
    prob = 1.0
    p1 = state.probability(qubit, 1)
    if p1 > TOLERANCE:
        if p1 > 1 - TOLERANCE:
            bit = 1
        elif forced is not None:
            bit = 0 if forced == 1 else 1
        else:
            bit = int(rng.random() < p1)
        prob = state.project(qubit, bit)
        if bit:
            state.apply_matrix(_X, [qubit])
    if basis in ("1", "-", "-i"):
        state.apply_matrix(_X, [qubit])
    if basis in ("+", "-", "i", "-i"):
        state.apply_matrix(ONE_QUBIT_MATRICES["H"], [qubit])
    if basis in ("i", "-i"):
        state.apply_matrix(ONE_QUBIT_MATRICES["S"], [qubit])
    return prob


def run_circuit(c, forced_outcomes: Optional[Union[Dict[str, int], List[int]]] = None,
                initial: Optional[DenseState] = None,
                seed: Optional[int] = None) -> Tuple[DenseState, Dict[str, int], float]:
    """Execute c on the dense state; returns (state, reported outcomes, branch probability)

    forced_outcomes fixes physical outcomes either by label or as a list in measurement order.
    """
    _check_size(c.n)
    state = initial.copy() if initial is not None else DenseState.zeros(c.n)
    if state.n != c.n:
        raise ValueError(f"State has {state.n} qubits, circuit needs {c.n}")
    if isinstance(forced_outcomes, (list, tuple)):
        forced_outcomes = dict(zip(c.measurement_labels, forced_outcomes))
    forced_outcomes = forced_outcomes or {}
    rng = np.random.default_rng(seed)
    outcomes: Dict[str, int] = {}
    probability = 1.0
    for loc in c.locations:
        if loc.kind == "prepare":
            probability *= _prepare(state, loc.qubits[0], loc.basis, rng, None)
        elif loc.kind in ("gate1q", "gate2q"):
            if loc.condition is not None and outcomes.get(loc.condition) != -1:
                continue
            state.apply_gate(loc.gate)
        elif loc.kind == "measure_reset":
            q = loc.qubits[0]
            forced = forced_outcomes.get(loc.label)
            if forced is None:
                bit = int(rng.random() < state.probability(q, 1))
            else:
                bit = 0 if forced == 1 else 1
            try:
                probability *= state.project(q, bit)
            except ImpossibleBranchError:
                raise ImpossibleBranchError(f"Forced outcome {forced:+d} for '{loc.label}' has zero probability")
            if bit:
                state.apply_matrix(_X, [q])
            outcome = 1 - 2 * bit
            outcomes[loc.label] = -outcome if loc.flip else outcome
    return state, outcomes, probability


def unitary_of_circuit(c) -> np.ndarray:
    """The 2^n unitary of a measurement-free circuit (idles act as identity)"""
    _check_size(c.n)
    for loc in c.locations:
        if loc.kind in ("prepare", "measure_reset") or loc.condition is not None:
            raise MeasurementInCircuitError(f"Location {loc.index} ({loc.kind}) is not unitary")
    return _segment_unitary(c.n, [loc for loc in c.locations if loc.kind != "idle"])


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = TOLERANCE) -> bool:
    if a.shape != b.shape:
        return False
    overlap = np.vdot(a.ravel(), b.ravel())
    if abs(overlap) < tol:
        return np.allclose(a, b, atol=tol)
    phase = overlap / abs(overlap)
    return bool(np.allclose(a * phase, b, atol=tol))


def _unitary_segments(c) -> List[Tuple[list, object]]:
    """Split c at non-unitary locations: (gate locations, boundary location or None)"""
    segments, current = [], []
    for loc in c.locations:
        if loc.kind in ("prepare", "measure_reset") or loc.condition is not None:
            segments.append((current, loc))
            current = []
        elif loc.kind != "idle":
            current.append(loc)
    segments.append((current, None))
    return segments


def _segment_unitary(n: int, gates: list) -> np.ndarray:
    dim = 2 ** n
    unitary = np.eye(dim, dtype=complex)
    for loc in gates:
        # rows of unitary.T are the columns U|j⟩; apply the gate to all of them at once
        full = unitary.T.reshape([dim] + [2] * n)
        k = len(loc.qubits)
        op = gate_matrix(loc.gate).reshape([2] * (2 * k))
        axes = [q + 1 for q in loc.qubits]
        full = np.tensordot(op, full, axes=(list(range(k, 2 * k)), axes))
        full = np.moveaxis(full, list(range(k)), axes)
        unitary = full.reshape(dim, dim).T
    return unitary


def compiled_equivalent(source, compiled, tol: float = TOLERANCE) -> bool:
    """Segment-wise unitary equivalence (global phase ignored) between a circuit and its compilation"""
    a, b = _unitary_segments(source), _unitary_segments(compiled)
    if len(a) != len(b) or source.n != compiled.n:
        logger.warning(f"{source.name}: segment structure differs after compilation")
        return False
    for i, ((gates_a, edge_a), (gates_b, edge_b)) in enumerate(zip(a, b)):
        if (edge_a is None) != (edge_b is None):
            return False
        if edge_a is not None and (edge_a.kind, edge_a.qubits, edge_a.label) != \
                (edge_b.kind, edge_b.qubits, edge_b.label):
            logger.warning(f"{source.name}: boundary {i} differs ({edge_a} vs {edge_b})")
            return False
        if not equal_up_to_phase(_segment_unitary(source.n, gates_a), _segment_unitary(source.n, gates_b), tol):
            logger.warning(f"{source.name}: segment {i} is not equivalent")
            return False
    return True
