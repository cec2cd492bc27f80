"""
Stabilizer-tableau simulator for Clifford circuits, Pauli faults and Pauli measurements
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from pauli_algebra import (
    GateSpec,
    PauliString,
    commutes,
    conjugate_by_gate,
    multiply,
    product,
    permute as permute_pauli,
)

logger = logging.getLogger(__name__)

BASIS_STABILIZERS = {"0": "+Z", "1": "-Z", "+": "+X", "-": "-X", "i": "+Y", "-i": "-Y"}


class NonCliffordGateError(ValueError):
    """Raised when a gate without a Pauli conjugation rule reaches the tableau"""


class ForcedOutcomeError(ValueError):
    """Raised when a forced outcome contradicts a deterministic measurement"""


class UnknownBasisError(ValueError):
    """Raised for preparation labels outside {0, 1, +, -, i, -i}"""


class StabilizerState:
    """Pure stabilizer state held as paired stabilizer and destabilizer rows

    Destabilizer phases carry no meaning and are kept at +1. Methods update the
    state in place and return it so calls can be chained.
    """

    def __init__(self, n: int, stabilizers: Sequence[PauliString], destabilizers: Sequence[PauliString],
                 seed: Optional[int] = None):
        self.n = n
        self.stabilizers = list(stabilizers)
        self.destabilizers = list(destabilizers)
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    @classmethod
    def zeros(cls, n: int, seed: Optional[int] = None) -> "StabilizerState":
        stabs = [PauliString.single(n, q, "Z") for q in range(n)]
        destabs = [PauliString.single(n, q, "X") for q in range(n)]
        return cls(n, stabs, destabs, seed)

    def copy(self) -> "StabilizerState":
        clone = StabilizerState(self.n, self.stabilizers, self.destabilizers, self.seed)
        clone.rng = self.rng
        return clone

    def __str__(self) -> str:
        return "\n".join(str(s) for s in self.stabilizers)

    def dump(self) -> str:
        """Stabilizer rows then destabilizer rows, one signed Pauli per line"""
        lines = ["stabilizers:"] + [f"  {s}" for s in self.stabilizers]
        lines += ["destabilizers:"] + [f"  {d.unsigned()}" for d in self.destabilizers]
        return "\n".join(lines)

    # unitary updates -------------------------------------------------------

    def apply_gate(self, g: GateSpec) -> "StabilizerState":
        if not g.is_clifford:
            raise NonCliffordGateError(f"Gate {g.kind} is not Clifford")
        if g.is_pauli:
            return self.apply_pauli(PauliString.single(self.n, g.qubits[0], g.kind))
        self.stabilizers = [conjugate_by_gate(s, g) for s in self.stabilizers]
        self.destabilizers = [conjugate_by_gate(d, g).unsigned() for d in self.destabilizers]
        return self

    def apply_pauli(self, p: PauliString) -> "StabilizerState":
        """Conjugation by a Pauli only flips the signs of anticommuting stabilizers"""
        if p.is_identity():
            return self
        self.stabilizers = [s if commutes(s, p) else -s for s in self.stabilizers]
        return self

    def permute(self, perm: Sequence[int]) -> "StabilizerState":
        self.stabilizers = [permute_pauli(s, perm) for s in self.stabilizers]
        self.destabilizers = [permute_pauli(d, perm) for d in self.destabilizers]
        return self

    # measurement --------------------------------------------------------------

    def is_deterministic(self, p: PauliString) -> bool:
        return all(commutes(s, p) for s in self.stabilizers)

    def _determined_value(self, p: PauliString) -> int:
        rows = [self.stabilizers[j] for j, d in enumerate(self.destabilizers) if not commutes(d, p)]
        generated = product(rows, self.n)
        if not generated.same_letters(p):
            raise RuntimeError(f"Tableau inconsistent: {p} not generated by the stabilizers")
        return 1 if generated.k == p.k else -1

    def measure(self, p: PauliString, forced: Optional[int] = None) -> Tuple[int, bool]:
        """Projective measurement of the Hermitian Pauli p; returns (outcome, deterministic)"""
        if not p.is_hermitian:
            raise ValueError(f"Cannot measure non-Hermitian {p}")
        if forced not in (None, 1, -1):
            raise ForcedOutcomeError(f"Forced outcome must be +1 or -1, got {forced}")
        pivot = next((i for i, s in enumerate(self.stabilizers) if not commutes(s, p)), None)
        if pivot is None:
            outcome = self._determined_value(p)
            if forced is not None and forced != outcome:
                raise ForcedOutcomeError(f"Measurement of {p} is deterministic with outcome {outcome:+d}")
            return outcome, True
        outcome = forced if forced is not None else (1 if self.rng.integers(2) == 0 else -1)
        pivot_row = self.stabilizers[pivot]
        for j in range(self.n):
            if j != pivot and not commutes(self.stabilizers[j], p):
                self.stabilizers[j] = multiply(self.stabilizers[j], pivot_row)
            if j != pivot and not commutes(self.destabilizers[j], p):
                self.destabilizers[j] = multiply(self.destabilizers[j], pivot_row).unsigned()
        self.destabilizers[pivot] = pivot_row.unsigned()
        self.stabilizers[pivot] = p if outcome == 1 else -p
        return outcome, False

    def expectation(self, p: PauliString) -> int:
        """+1 or -1 when ±p is in the stabilizer group, otherwise 0"""
        if not self.is_deterministic(p):
            return 0
        return self._determined_value(p)

    def reset(self, qubit: int, forced: Optional[int] = None) -> int:
        """Return `qubit` to |0⟩; the outcome of the implied Z measurement is returned"""
        z = PauliString.single(self.n, qubit, "Z")
        outcome, _ = self.measure(z, forced)
        if outcome == -1:
            self.apply_pauli(PauliString.single(self.n, qubit, "X"))
        return outcome

    def prepare(self, qubit: int, basis: str, forced: Optional[int] = None) -> "StabilizerState":
        if basis not in BASIS_STABILIZERS:
            raise UnknownBasisError(f"Unknown preparation basis '{basis}'")
        self.reset(qubit, forced)
        # |1> = X|0>, |-> = H|1>, |-i> = S H |1>
        if basis in ("1", "-", "-i"):
            self.apply_gate(GateSpec("X", [qubit]))
        if basis in ("+", "-", "i", "-i"):
            self.apply_gate(GateSpec("H", [qubit]))
        if basis in ("i", "-i"):
            self.apply_gate(GateSpec("S", [qubit]))
        return self

    def extended(self, n: int) -> "StabilizerState":
        """This state tensored with |0⟩ on qubits self.n..n-1"""
        if n < self.n:
            raise ValueError(f"Cannot shrink a {self.n}-qubit state to {n} qubits")
        pad = lambda p: PauliString(n, p.x, p.z, p.k)
        stabs = [pad(s) for s in self.stabilizers] + [PauliString.single(n, q, "Z") for q in range(self.n, n)]
        destabs = [pad(d) for d in self.destabilizers] + [PauliString.single(n, q, "X") for q in range(self.n, n)]
        state = StabilizerState(n, stabs, destabs, self.seed)
        state.rng = self.rng
        return state

    def same_state(self, other: "StabilizerState") -> bool:
        return self.n == other.n and all(self.expectation(s) == 1 for s in other.stabilizers)


def _solve_gf2(rows: List[int], rhs: List[int], width: int) -> Optional[int]:
    """Solve A·t = b over GF(2); row i of A is the bitmask rows[i]"""
    aug = [rows[i] | (rhs[i] << width) for i in range(len(rows))]
    pivots = []
    r = 0
    for col in range(width):
        sel = next((i for i in range(r, len(aug)) if (aug[i] >> col) & 1), None)
        if sel is None:
            continue
        aug[r], aug[sel] = aug[sel], aug[r]
        for i in range(len(aug)):
            if i != r and (aug[i] >> col) & 1:
                aug[i] ^= aug[r]
        pivots.append(col)
        r += 1
    for i in range(r, len(aug)):
        if (aug[i] >> width) & 1:
            return None
    t = 0
    for i, col in enumerate(pivots):
        if (aug[i] >> width) & 1:
            t |= 1 << col
    return t


def prepare_product(n: int, labels: Sequence[str], seed: Optional[int] = None) -> StabilizerState:
    """Product state with one basis label per qubit"""
    if len(labels) != n:
        raise UnknownBasisError(f"Need {n} labels, got {len(labels)}")
    state = StabilizerState.zeros(n, seed)
    for q, label in enumerate(labels):
        state.prepare(q, label)
    return state


def from_stabilizers(generators: Sequence[PauliString], seed: Optional[int] = None) -> StabilizerState:
    """The unique state stabilized by n independent commuting signed generators"""
    n = generators[0].n
    if len(generators) != n:
        raise ValueError(f"Need {n} generators for a {n}-qubit state, got {len(generators)}")
    state = StabilizerState.zeros(n, seed)
    for g in generators:
        if not g.is_hermitian:
            raise ValueError(f"Generator {g} is not Hermitian")
        state.measure(g, forced=None if state.is_deterministic(g) else 1)
    # every g is now stabilized up to sign; flip the wrong signs with a product of destabilizers
    matrix = []
    for g in generators:
        row = 0
        for j, d in enumerate(state.destabilizers):
            if not commutes(d, g):
                row |= 1 << j
        matrix.append(row)
    wrong = [0 if state.expectation(g) == 1 else 1 for g in generators]
    t = _solve_gf2(matrix, wrong, n)
    if t is None:
        raise ValueError("Generators are not independent")
    fix = product([d for j, d in enumerate(state.destabilizers) if (t >> j) & 1], n)
    state.apply_pauli(fix)
    if any(state.expectation(g) != 1 for g in generators):
        raise RuntimeError("Sign correction failed; generators may be dependent")
    return state


def apply_gate(s: StabilizerState, g: GateSpec) -> StabilizerState:
    return s.apply_gate(g)


def apply_pauli(s: StabilizerState, p: PauliString) -> StabilizerState:
    return s.apply_pauli(p)


def measure_pauli(s: StabilizerState, p: PauliString,
                  forced: Optional[int] = None) -> Tuple[int, StabilizerState, bool]:
    outcome, deterministic = s.measure(p, forced)
    return outcome, s, deterministic


def expectation(s: StabilizerState, p: PauliString) -> int:
    return s.expectation(p)


def permute(s: StabilizerState, perm: Sequence[int]) -> StabilizerState:
    return s.permute(perm)


# circuit execution ---------------------------------------------------------------

class Branch:
    """One outcome branch of a circuit: its probability, reported outcomes and final state"""

    def __init__(self, probability: float, outcomes: Dict[str, int], state: StabilizerState):
        self.probability = probability
        self.outcomes = outcomes
        self.state = state

    def __repr__(self) -> str:
        signs = " ".join(f"{k}={v:+d}" for k, v in self.outcomes.items())
        return f"Branch(p={self.probability:g}, {signs})"


def _execute_location(state: StabilizerState, loc, outcomes: Dict[str, int],
                      forced: Optional[int] = None) -> None:
    if loc.kind == "prepare":
        state.prepare(loc.qubits[0], loc.basis, forced)
    elif loc.kind in ("gate1q", "gate2q"):
        if loc.condition is not None and outcomes.get(loc.condition) != -1:
            return
        state.apply_gate(loc.gate)
    elif loc.kind == "measure_reset":
        q = loc.qubits[0]
        outcome, _ = state.measure(PauliString.single(state.n, q, "Z"), forced)
        if outcome == -1:
            state.apply_pauli(PauliString.single(state.n, q, "X"))
        outcomes[loc.label] = -outcome if loc.flip else outcome


def _needs_branch(state: StabilizerState, loc) -> bool:
    if loc.kind not in ("measure_reset", "prepare"):
        return False
    return not state.is_deterministic(PauliString.single(state.n, loc.qubits[0], "Z"))


def run_circuit(circuit, initial: Optional[StabilizerState] = None,
                forced: Optional[Dict[str, int]] = None,
                seed: Optional[int] = None) -> Tuple[StabilizerState, Dict[str, int]]:
    """Execute a circuit on the tableau; `forced` fixes physical outcomes by measurement label"""
    state = initial.copy() if initial is not None else StabilizerState.zeros(circuit.n, seed)
    if initial is not None and seed is not None:
        state.rng = np.random.default_rng(seed)
    if state.n != circuit.n:
        raise ValueError(f"State has {state.n} qubits, circuit needs {circuit.n}")
    forced = forced or {}
    outcomes: Dict[str, int] = {}
    for loc in circuit.locations:
        _execute_location(state, loc, outcomes, forced.get(loc.label) if loc.label else None)
    return state, outcomes


def enumerate_branches(circuit, initial: Optional[StabilizerState] = None) -> List[Branch]:
    """All outcome branches with nonzero probability, in depth-first order (+1 before -1)"""
    start = initial.copy() if initial is not None else StabilizerState.zeros(circuit.n)
    branches = []
    stack = [(start, 0, {}, 1.0)]
    while stack:
        state, position, outcomes, prob = stack.pop()
        locations = circuit.locations
        while position < len(locations):
            loc = locations[position]
            if _needs_branch(state, loc):
                other = state.copy()
                other_outcomes = dict(outcomes)
                _execute_location(other, loc, other_outcomes, forced=-1)
                stack.append((other, position + 1, other_outcomes, prob / 2))
                _execute_location(state, loc, outcomes, forced=1)
                prob /= 2
            else:
                _execute_location(state, loc, outcomes)
            position += 1
        branches.append(Branch(prob, outcomes, state))
    logger.debug(f"{circuit.name}: {len(branches)} branches")
    return branches
