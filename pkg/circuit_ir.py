"""
Circuit representation, the protocol circuits, and the native-gate compiler
"""
import json
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from pauli_algebra import GateSpec, UnknownGateError, TWO_QUBIT_CLIFFORDS

logger = logging.getLogger(__name__)

KINDS = ("prepare", "gate1q", "gate2q", "measure_reset", "idle")
BASES = ("0", "1", "+", "-", "i", "-i")
DATA_ROLES = ("data1", "data2", "data3", "data4", "data5")
CONTROLLED = {"X": "CX", "Y": "CY", "Z": "CZ"}

# register layout shared by every 5-qubit-code circuit
DATA = (0, 1, 2, 3, 4)
ANCILLA = 5
FLAG = 6
CODE_ROLES = {0: "data1", 1: "data2", 2: "data3", 3: "data4", 4: "data5", 5: "ancilla", 6: "flag"}


class CircuitError(ValueError):
    """Raised for malformed circuits"""


class UnsupportedGateError(ValueError):
    """Raised when the compiler meets a gate outside its input set"""


class Location:
    """One fault location: a preparation, gate, ancilla measurement with reset, or idle step"""

    __slots__ = ("index", "kind", "qubits", "gate", "label", "basis", "condition",
                 "flip", "tag", "block", "metadata")

    def __init__(self, index: int, kind: str, qubits: Sequence[int], gate: Optional[GateSpec] = None,
                 label: Optional[str] = None, basis: Optional[str] = None,
                 condition: Optional[str] = None, flip: bool = False, tag: Optional[str] = None,
                 block: Optional[str] = None, metadata: Optional[Dict] = None):
        self.index = index
        self.kind = kind
        self.qubits = tuple(qubits)
        self.gate = gate
        self.label = label
        self.basis = basis
        self.condition = condition
        self.flip = flip
        self.tag = tag
        self.block = block
        self.metadata = dict(metadata or {})

    def replace(self, **changes) -> "Location":
        values = {name: getattr(self, name) for name in self.__slots__}
        values.update(changes)
        return Location(**values)

    def __repr__(self) -> str:
        gate = f" {self.gate!r}" if self.gate else ""
        label = f" {self.label}" if self.label else ""
        return f"Location({self.index}: {self.kind} {self.qubits}{gate}{label})"

    def to_dict(self) -> Dict:
        data = {"index": self.index, "kind": self.kind, "qubits": list(self.qubits)}
        if self.gate is not None:
            data["gate"] = self.gate.kind
            if self.gate.params:
                data["params"] = list(self.gate.params)
        for name in ("label", "basis", "condition", "tag", "block"):
            value = getattr(self, name)
            if value is not None:
                data[name] = value
        if self.flip:
            data["flip"] = True
        if self.metadata:
            data["metadata"] = dict(self.metadata)
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "Location":
        gate = None
        if "gate" in data:
            gate = GateSpec(data["gate"], data["qubits"], data.get("params", ()))
        return cls(data["index"], data["kind"], data["qubits"], gate,
                   label=data.get("label"), basis=data.get("basis"),
                   condition=data.get("condition"), flip=data.get("flip", False),
                   tag=data.get("tag"), block=data.get("block"), metadata=data.get("metadata"))


class Circuit:
    """An ordered list of locations on an n-qubit register with role labels"""

    def __init__(self, n: int, locations: Sequence[Location], roles: Dict[int, str],
                 name: str = "", description: str = "", metadata: Optional[Dict] = None):
        self.n = n
        self.locations = tuple(locations)
        self.roles = dict(roles)
        self.name = name
        self.description = description
        self.metadata = dict(metadata or {})
        self._validate()

    def _validate(self):
        labels = set()
        for i, loc in enumerate(self.locations):
            if loc.index != i:
                raise CircuitError(f"Location indices must be dense and ordered, found {loc.index} at {i}")
            if loc.kind not in KINDS:
                raise CircuitError(f"Unknown location kind '{loc.kind}'")
            for q in loc.qubits:
                if not 0 <= q < self.n:
                    raise CircuitError(f"Qubit {q} outside a {self.n}-qubit register")
            expected = 2 if loc.kind == "gate2q" else 1
            if len(loc.qubits) != expected:
                raise CircuitError(f"{loc.kind} at {i} needs {expected} qubit(s)")
            if loc.kind in ("gate1q", "gate2q"):
                if loc.gate is None or loc.gate.qubits != loc.qubits:
                    raise CircuitError(f"Gate location {i} has a missing or mismatched gate")
                if (loc.gate.kind in TWO_QUBIT_CLIFFORDS) != (loc.kind == "gate2q"):
                    raise CircuitError(f"Gate {loc.gate.kind} does not fit location kind {loc.kind}")
            if loc.kind == "prepare" and loc.basis not in BASES:
                raise CircuitError(f"Unknown preparation basis {loc.basis!r} at {i}")
            if loc.kind == "measure_reset":
                if not loc.label:
                    raise CircuitError(f"Measurement at {i} needs a label")
                if loc.label in labels:
                    raise CircuitError(f"Duplicate measurement label '{loc.label}'")
                labels.add(loc.label)
            if loc.condition is not None:
                if loc.condition not in labels:
                    raise CircuitError(f"Condition '{loc.condition}' at {i} refers to no earlier measurement")
                if loc.gate is None or not loc.gate.is_pauli:
                    raise CircuitError(f"Conditional location {i} must apply a Pauli gate")
        for q, role in self.roles.items():
            if not 0 <= q < self.n:
                raise CircuitError(f"Role '{role}' assigned to qubit {q} outside the register")

    def __len__(self) -> int:
        return len(self.locations)

    def __iter__(self):
        return iter(self.locations)

    def __repr__(self) -> str:
        return f"Circuit({self.name!r}, n={self.n}, locations={len(self.locations)})"

    @property
    def measurement_labels(self) -> List[str]:
        return [loc.label for loc in self.locations if loc.kind == "measure_reset"]

    @property
    def data_qubits(self) -> List[int]:
        return sorted(q for q, role in self.roles.items() if role.startswith("data"))

    def role(self, qubit: int) -> str:
        return self.roles.get(qubit, f"q{qubit}")

    def qubit(self, role: str) -> int:
        for q, r in self.roles.items():
            if r == role:
                return q
        raise CircuitError(f"No qubit with role '{role}' in {self.name}")

    def find(self, tag: Optional[str] = None, block: Optional[str] = None,
             label: Optional[str] = None) -> List[Location]:
        return [loc for loc in self.locations
                if (tag is None or loc.tag == tag)
                and (block is None or loc.block == block)
                and (label is None or loc.label == label)]

    def with_locations(self, locations: Iterable[Location], **metadata) -> "Circuit":
        """A copy with new locations, renumbered densely"""
        renumbered = [loc.replace(index=i) for i, loc in enumerate(locations)]
        meta = dict(self.metadata)
        meta.update(metadata)
        return Circuit(self.n, renumbered, self.roles, self.name, self.description, meta)

    # serialisation ----------------------------------------------------------

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "description": self.description,
            "n": self.n,
            "roles": {str(q): r for q, r in sorted(self.roles.items())},
            "metadata": self.metadata,
            "locations": [loc.to_dict() for loc in self.locations],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Circuit":
        return cls(data["n"], [Location.from_dict(d) for d in data["locations"]],
                   {int(q): r for q, r in data.get("roles", {}).items()},
                   data.get("name", ""), data.get("description", ""), data.get("metadata"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        lines = [f"# name: {self.name}", f"# n: {self.n}",
                 "# roles: " + " ".join(f"{q}={r}" for q, r in sorted(self.roles.items()))]
        if self.description:
            lines.append(f"# description: {self.description}")
        for loc in self.locations:
            parts = [loc.kind, ",".join(str(q) for q in loc.qubits)]
            if loc.gate is not None:
                if loc.gate.params:
                    parts.append(f"{loc.gate.kind}({','.join(repr(v) for v in loc.gate.params)})")
                else:
                    parts.append(loc.gate.kind)
            for name in ("label", "basis", "condition", "tag", "block"):
                value = getattr(loc, name)
                if value is not None:
                    parts.append(f"{name}={value}")
            if loc.flip:
                parts.append("flip")
            lines.append(" ".join(parts))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        header = {}
        locations = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if ":" in line:
                    key, value = line[1:].split(":", 1)
                    header[key.strip()] = value.strip()
                continue
            tokens = line.split()
            if len(tokens) < 2:
                raise CircuitError(f"Malformed circuit line: '{line}'")
            kind, qubits = tokens[0], [int(q) for q in tokens[1].split(",")]
            fields = {"flip": False}
            gate = None
            for token in tokens[2:]:
                if token == "flip":
                    fields["flip"] = True
                elif "=" in token:
                    key, value = token.split("=", 1)
                    if key not in ("label", "basis", "condition", "tag", "block"):
                        raise CircuitError(f"Unknown field '{key}' in line '{line}'")
                    fields[key] = value
                else:
                    gate = _parse_gate_token(token, qubits)
            locations.append(Location(len(locations), kind, qubits, gate, **fields))
        if "n" not in header:
            raise CircuitError("Circuit text needs a '# n:' header")
        roles = {}
        for item in header.get("roles", "").split():
            q, role = item.split("=")
            roles[int(q)] = role
        return cls(int(header["n"]), locations, roles, header.get("name", ""), header.get("description", ""))


def _parse_gate_token(token: str, qubits: Sequence[int]) -> GateSpec:
    if "(" in token:
        kind, rest = token.split("(", 1)
        params = [float(v) for v in rest.rstrip(")").split(",") if v]
        return GateSpec(kind, qubits, params)
    return GateSpec(token, qubits)


class CircuitBuilder:
    """Appends locations in order and inserts idles for untouched data qubits per block"""

    def __init__(self, n: int, roles: Dict[int, str], name: str, description: str = ""):
        self.n = n
        self.roles = roles
        self.name = name
        self.description = description
        self.locations: List[Location] = []
        self.block: Optional[str] = None
        self._touched = set()

    def _add(self, kind, qubits, **fields) -> Location:
        loc = Location(len(self.locations), kind, qubits, block=self.block, **fields)
        self.locations.append(loc)
        self._touched.update(qubits)
        return loc

    def prepare(self, qubit: int, basis: str = "0") -> Location:
        return self._add("prepare", [qubit], basis=basis)

    def gate(self, kind: str, *qubits: int, tag: Optional[str] = None,
             condition: Optional[str] = None) -> Location:
        spec = GateSpec(kind, qubits)
        location_kind = "gate2q" if len(qubits) == 2 else "gate1q"
        return self._add(location_kind, qubits, gate=spec, tag=tag, condition=condition)

    def measure_reset(self, qubit: int, label: str) -> Location:
        return self._add("measure_reset", [qubit], label=label)

    def idle(self, qubit: int) -> Location:
        return self._add("idle", [qubit])

    def begin_block(self, name: str):
        self.block = name
        self._touched = set()

    def end_block(self, data_qubits: Sequence[int]):
        for q in data_qubits:
            if q not in self._touched:
                self.idle(q)
        self.block = None

    def build(self, **metadata) -> Circuit:
        return Circuit(self.n, self.locations, self.roles, self.name, self.description, metadata)


# A parity-measurement step is ("data", qubit, letter, tag), ("flag", tag) or ("inject", letter).
Step = Tuple


def measure_parity(builder: CircuitBuilder, ancilla: int, steps: Sequence[Step], label: str,
                   block: str, data_qubits: Sequence[int], flag: Optional[int] = None):
    """Ancilla-mediated measurement: H, controlled Paulis from the ancilla, H, readout with reset"""
    builder.begin_block(block)
    builder.gate("H", ancilla)
    for step in steps:
        if step[0] == "data":
            _, q, letter, tag = step
            builder.gate(CONTROLLED[letter], ancilla, q, tag=tag)
        elif step[0] == "flag":
            if flag is None:
                continue
            builder.gate("CX", ancilla, flag, tag=step[1])
        elif step[0] == "inject":
            builder.gate(step[1], ancilla, tag="inject")
        else:
            raise CircuitError(f"Unknown parity step {step!r}")
    builder.gate("H", ancilla)
    builder.measure_reset(ancilla, label)
    builder.end_block(data_qubits)


def _describe_steps(steps: Sequence[Step]) -> List[str]:
    out = []
    for step in steps:
        if step[0] == "data":
            out.append(f"C{step[2]}(a->q{step[1] + 1})")
        elif step[0] == "flag":
            out.append("CX(a->flag)")
        else:
            out.append(f"{step[1]}(a)")
    return out


# protocol circuits -------------------------------------------------------------

GHZ_ROLES = {0: "data1", 1: "data2", 2: "data3", 3: "data4", 4: "ancilla"}


def ghz_circuit() -> Circuit:
    """Deterministic |Ψ+⟩ = (|0000⟩+|1111⟩)/√2 via an XXXX measurement and a Z1 feedforward"""
    b = CircuitBuilder(5, GHZ_ROLES, "ghz", "XXXX parity measurement with feedforward to |Psi+>")
    for q in range(4):
        b.prepare(q, "0")
    b.prepare(4, "0")
    steps = [("data", q, "X", None) for q in range(4)]
    measure_parity(b, 4, steps, "mXXXX", "XXXX", data_qubits=range(4))
    b.block = "feedforward"
    b.gate("Z", 0, condition="mXXXX", tag="feedforward")
    b.block = None
    return b.build(gate_order={"XXXX": _describe_steps(steps)}, feedforward="Z on data1 when mXXXX=-1")


PRODUCT_STATE = ("0", "0", "+", "0", "+")

ENCODING_STEPS = {
    "p3": [("data", 0, "X", None), ("data", 1, "Z", None), ("data", 4, "Z", None)],
    "p4": [("data", 0, "Z", None), ("data", 1, "X", "middle"), ("data", 2, "Z", None)],
    "p5": [("data", 2, "Z", None), ("data", 3, "X", "middle"), ("data", 4, "Z", None)],
    "T1": [("data", 1, "X", None), ("data", 3, "Y", "middle"), ("data", 4, "Y", None)],
    "T2": [("data", 0, "X", None), ("flag", "flag1"), ("data", 2, "Y", "middle"),
           ("flag", "flag2"), ("data", 3, "Y", None)],
}
ENCODING_LABELS = {"p3": "m3", "p4": "m4", "p5": "m5", "T1": "mT1", "T2": "mT2"}
PREPARATION_BLOCKS = ("p3", "p4", "p5")
VERIFICATION_BLOCKS = ("T1", "T2")


def encoding_circuit(ft: bool = True, drop_flag: bool = False) -> Circuit:
    """|-⟩_L preparation from |00+0+⟩ by measuring p3, p4, p5; with ft, verification of T1 and flagged T2

    drop_flag removes the flag qubit from the verification stage (used as a control).
    """
    with_flag = ft and not drop_flag
    n = 7 if with_flag else 6
    roles = {q: r for q, r in CODE_ROLES.items() if q < n}
    name = "encoding_ft" if ft else "encoding_nonft"
    if drop_flag:
        name += "_noflag"
    b = CircuitBuilder(n, roles, name, "heralded |->_L preparation")
    for q, basis in zip(DATA, PRODUCT_STATE):
        b.prepare(q, basis)
    b.prepare(ANCILLA, "0")
    blocks = list(PREPARATION_BLOCKS) + (list(VERIFICATION_BLOCKS) if ft else [])
    for block in blocks:
        if block == "T2" and with_flag:
            b.prepare(FLAG, "0")
        measure_parity(b, ANCILLA, ENCODING_STEPS[block], ENCODING_LABELS[block], block,
                       data_qubits=DATA, flag=FLAG if with_flag else None)
        if block == "T2" and with_flag:
            b.block = "T2"
            b.measure_reset(FLAG, "flag")
            b.block = None
    order = {block: _describe_steps(ENCODING_STEPS[block]) for block in blocks}
    return b.build(gate_order=order, ft=ft, flag=with_flag, product_state="".join(PRODUCT_STATE))


S1_STEPS = [("data", 0, "X", None), ("flag", "a"), ("data", 1, "X", "b"),
            ("data", 2, "Y", "c"), ("flag", "d"), ("data", 4, "Y", None)]
S1_MISORDERED_STEPS = [("flag", "a"), ("data", 0, "X", None), ("flag", "d"),
                       ("data", 1, "X", "b"), ("data", 2, "Y", "c"), ("data", 4, "Y", None)]


def _shift_steps(steps: Sequence[Step], shift: int) -> List[Step]:
    shifted = []
    for step in steps:
        if step[0] == "data":
            _, q, letter, tag = step
            shifted.append(("data", (q + shift) % 5, letter, tag))
        else:
            shifted.append(step)
    return shifted


def stabilizer_steps(k: int, flagged: bool = True, inject_y: bool = False,
                     misordered: bool = False) -> List[Step]:
    """Gate order for measuring s_k; s_k is the cyclic shift of s1 by k-1 qubits"""
    if not 1 <= k <= 4:
        raise CircuitError(f"Stabilizer index must be 1..4, got {k}")
    base = S1_MISORDERED_STEPS if misordered else S1_STEPS
    steps = _shift_steps(base, k - 1)
    if not flagged:
        return [s for s in steps if s[0] == "data"]
    if inject_y:
        pos = next(i for i, s in enumerate(steps) if s[0] == "data" and s[3] == "b")
        steps.insert(pos + 1, ("inject", "Y"))
    return steps


def stabilizer_circuit(k: int, flagged: bool = True, inject_y: bool = False,
                       misordered: bool = False) -> Circuit:
    """Ancilla measurement of s_k on the 7-qubit register, optionally with a flag"""
    steps = stabilizer_steps(k, flagged, inject_y, misordered)
    label = f"s{k}" if flagged else f"u{k}"
    name = f"{'flagged' if flagged else 'unflagged'}_s{k}" + ("_inject_y" if inject_y else "") \
        + ("_misordered" if misordered else "")
    b = CircuitBuilder(7, CODE_ROLES, name, f"measurement of s{k}")
    b.block = label
    b.prepare(ANCILLA, "0")
    if flagged:
        b.prepare(FLAG, "0")
    measure_parity(b, ANCILLA, steps, label, label, data_qubits=DATA,
                   flag=FLAG if flagged else None)
    if flagged:
        b.block = label
        b.measure_reset(FLAG, f"f{k}")
        b.block = None
    return b.build(gate_order={label: _describe_steps(steps)}, stabilizer=k, flagged=flagged,
                   inject_y=inject_y, misordered=misordered)


def flagged_s1_circuit(inject_y: bool = False) -> Circuit:
    return stabilizer_circuit(1, flagged=True, inject_y=inject_y)


class QecCycle:
    """The circuits a flag error-correction cycle can execute, keyed by stage name"""

    def __init__(self, misordered_s1: bool = False):
        self.misordered_s1 = misordered_s1
        self.flagged = {k: stabilizer_circuit(k, True, misordered=(misordered_s1 and k == 1))
                        for k in range(1, 5)}
        self.unflagged = {k: stabilizer_circuit(k, False) for k in range(1, 5)}

    @property
    def stages(self) -> List[Tuple[str, Circuit]]:
        return [(f"flagged_s{k}", c) for k, c in self.flagged.items()] + \
               [(f"unflagged_s{k}", c) for k, c in self.unflagged.items()]

    def stage(self, name: str) -> Circuit:
        return dict(self.stages)[name]


def qec_cycle_circuits(misordered_s1: bool = False) -> QecCycle:
    return QecCycle(misordered_s1)


LOGICAL_GATES = {"X_L": "X", "Y_L": "Y", "H_L": "H", "S_L": "S"}


def transversal_gate_circuit(g: str, physical: bool = True, perm: Optional[Sequence[int]] = None,
                             n: int = 5) -> Circuit:
    """Five single-qubit gates plus a relabelling map, or a frame-only marker when virtual"""
    if g not in LOGICAL_GATES:
        raise UnknownGateError(f"Unknown logical gate '{g}'")
    if perm is None:
        from protocols import find_permutation
        perm = find_permutation(g)
    roles = {q: CODE_ROLES[q] for q in range(n)}
    b = CircuitBuilder(n, roles, f"{g}_{'physical' if physical else 'virtual'}")
    if physical:
        for q in DATA:
            b.gate(LOGICAL_GATES[g], q, tag=g)
    return b.build(logical_gate=g, relabel=list(perm), physical=physical)


# native compilation -------------------------------------------------------------

COMPILER_INPUT = ("I", "H", "S", "SDG", "X", "Y", "Z", "CX", "CY", "CZ")
_FLUSH = {1: "SDG", 2: "Z", 3: "S"}


class _NativeEmitter:
    def __init__(self, source: Circuit):
        self.source = source
        self.out: List[Location] = []
        self.pending: Dict[int, int] = {}

    def emit(self, template: Location, kind: str, qubits: Sequence[int], metadata: Optional[Dict] = None):
        gate = GateSpec(kind, qubits)
        loc_kind = "gate2q" if len(qubits) == 2 else "gate1q"
        self.out.append(template.replace(index=len(self.out), kind=loc_kind, qubits=tuple(qubits),
                                         gate=gate, metadata=metadata))

    def flush(self, qubit: int, template: Location):
        quarter_turns = self.pending.pop(qubit, 0) % 4
        if quarter_turns:
            self.emit(template.replace(condition=None, tag="readout_phase", label=None, basis=None, flip=False),
                      _FLUSH[quarter_turns], [qubit],
                      metadata={"readout_phase_quarter_turns": quarter_turns})

    def flush_all(self, template: Location):
        for q in sorted(self.pending):
            self.flush(q, template)

    def hadamard(self, template: Location, q: int):
        # H = X·Ry(pi/2)
        self.emit(template, "SY", [q])
        self.emit(template, "X", [q])

    def controlled_x(self, template: Location, c: int, t: int):
        # CX = Rx(-pi/2)_t · S†_c · CRX(c, t); the S†_c is deferred
        self.emit(template, "CRX", [c, t])
        self.emit(template, "SXDG", [t])
        self.pending[c] = self.pending.get(c, 0) + 1


def compile_to_native(c: Circuit) -> Circuit:
    """Replace CX/CY/CZ and H with controlled-Rx(±π/2) plus single-qubit rotations

    Control-side phases left by each controlled-Rx are merged into one phase rotation
    placed before the next non-diagonal use of that qubit or any non-unitary location.
    """
    em = _NativeEmitter(c)
    for loc in c.locations:
        if loc.kind in ("prepare", "measure_reset") or loc.condition is not None:
            em.flush_all(loc)
            em.out.append(loc.replace(index=len(em.out)))
            continue
        if loc.kind == "idle":
            em.out.append(loc.replace(index=len(em.out)))
            continue
        kind = loc.gate.kind
        if kind not in COMPILER_INPUT:
            raise UnsupportedGateError(f"Cannot compile gate {kind} at location {loc.index}")
        if loc.kind == "gate1q":
            q = loc.qubits[0]
            if kind in ("Z", "S", "SDG", "I") and q in em.pending:
                # diagonal gates commute with the deferred phase
                em.out.append(loc.replace(index=len(em.out)))
                continue
            em.flush(q, loc)
            if kind == "H":
                em.hadamard(loc, q)
            else:
                em.out.append(loc.replace(index=len(em.out)))
            continue
        ctrl, tgt = loc.qubits
        em.flush(tgt, loc)
        if kind == "CX":
            em.controlled_x(loc, ctrl, tgt)
        elif kind == "CY":
            # CY = S_t · CX · S†_t
            em.emit(loc, "SDG", [tgt])
            em.controlled_x(loc, ctrl, tgt)
            em.emit(loc, "S", [tgt])
        elif kind == "CZ":
            em.hadamard(loc, tgt)
            em.controlled_x(loc, ctrl, tgt)
            em.hadamard(loc, tgt)
    if c.locations:
        em.flush_all(c.locations[-1].replace(block=None, tag=None))
    compiled = Circuit(c.n, em.out, c.roles, c.name + "_native", c.description, dict(c.metadata))
    logger.info(f"Compiled {c.name}: {len(c)} locations -> {len(compiled)} native locations")
    return compiled


def enumerate_locations(c: Circuit) -> List[Location]:
    """Every fault location of c in execution order (idles were placed at build time)"""
    return list(c.locations)


def count_kinds(c: Circuit) -> Dict[str, int]:
    counts = {kind: 0 for kind in KINDS}
    for loc in c.locations:
        counts[loc.kind] += 1
    return counts
