"""
Phase-exact Pauli string arithmetic and Clifford conjugation rules
"""
import logging
import re
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

LETTERS = "IXYZ"
PHASE_PREFIXES = {0: "+", 1: "+i", 2: "-", 3: "-i"}
PHASE_VALUES = {0: 1, 1: 1j, 2: -1, 3: -1j}


class PauliDimensionError(ValueError):
    """Raised when two Pauli strings on different register sizes are combined"""


class PauliParseError(ValueError):
    """Raised when a Pauli string cannot be parsed"""


class UnknownGateError(ValueError):
    """Raised for gate kinds without a conjugation rule"""


class PauliString:
    """An n-qubit Pauli operator i^k * (sigma_1 ⊗ ... ⊗ sigma_n)

    Bit i of `x` and `z` describes qubit i (qubit 1 is bit 0 and the leftmost letter).
    The letter on a qubit is I (x=0,z=0), X (1,0), Z (0,1) or Y (1,1), with Y the
    Hermitian Pauli-Y. Instances are immutable.
    """

    __slots__ = ("n", "x", "z", "k")

    def __init__(self, n: int, x: int = 0, z: int = 0, k: int = 0):
        if n < 0:
            raise PauliDimensionError(f"Register size must be non-negative, got {n}")
        mask = (1 << n) - 1
        if x & ~mask or z & ~mask:
            raise PauliDimensionError(f"Bits set outside a {n}-qubit register")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "k", k % 4)

    def __setattr__(self, name, value):
        raise AttributeError("PauliString is immutable")

    # construction -------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def from_letters(cls, letters: str, k: int = 0) -> "PauliString":
        """Build from a letter string such as "XXYIY" with qubit 1 leftmost"""
        x = z = 0
        for i, ch in enumerate(letters):
            if ch not in LETTERS:
                raise PauliParseError(f"Invalid Pauli letter '{ch}' in '{letters}'")
            if ch in "XY":
                x |= 1 << i
            if ch in "ZY":
                z |= 1 << i
        return cls(len(letters), x, z, k)

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Parse the table format: optional sign prefix (+, -, +i, -i, i) followed by letters"""
        s = text.strip().replace("−", "-")
        match = re.fullmatch(r"([+-]?i?)([IXYZ]+)", s)
        if not match:
            raise PauliParseError(f"Cannot parse Pauli string '{text}'")
        prefix, letters = match.groups()
        k = {"": 0, "+": 0, "-": 2, "i": 1, "+i": 1, "-i": 3}[prefix]
        return cls.from_letters(letters, k)

    @classmethod
    def from_compact(cls, text: str, n: int) -> "PauliString":
        """Parse the subscript notation used in the tables, e.g. "Y3Y5", "-X2Y4Y5" or "I"

        Qubit numbers are 1-based.
        """
        s = text.strip().replace("−", "-").replace("_", "")
        k = 0
        if s.startswith("-"):
            k, s = 2, s[1:]
        elif s.startswith("+"):
            s = s[1:]
        if s == "I":
            return cls(n, k=k)
        parts = re.findall(r"([XYZ])(\d+)", s)
        if not parts or "".join(f"{a}{b}" for a, b in parts) != s:
            raise PauliParseError(f"Cannot parse compact Pauli '{text}'")
        letters = ["I"] * n
        for letter, idx in parts:
            q = int(idx) - 1
            if not 0 <= q < n:
                raise PauliDimensionError(f"Qubit {idx} outside a {n}-qubit register")
            if letters[q] != "I":
                raise PauliParseError(f"Qubit {idx} given twice in '{text}'")
            letters[q] = letter
        return cls.from_letters("".join(letters), k)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        """A single-qubit Pauli on 0-based `qubit` of an n-qubit register"""
        letters = ["I"] * n
        letters[qubit] = letter
        return cls.from_letters("".join(letters))

    @classmethod
    def from_sparse(cls, n: int, assignment: Dict[int, str], k: int = 0) -> "PauliString":
        """Build from {0-based qubit: letter}"""
        letters = ["I"] * n
        for q, letter in assignment.items():
            letters[q] = letter
        return cls.from_letters("".join(letters), k)

    # views ---------------------------------------------------------------

    @property
    def x_bits(self) -> Tuple[int, ...]:
        return tuple((self.x >> i) & 1 for i in range(self.n))

    @property
    def z_bits(self) -> Tuple[int, ...]:
        return tuple((self.z >> i) & 1 for i in range(self.n))

    @property
    def phase(self) -> complex:
        return PHASE_VALUES[self.k]

    @property
    def letters(self) -> str:
        return "".join(self.letter(i) for i in range(self.n))

    def letter(self, qubit: int) -> str:
        return LETTERS[_letter_index(self.x, self.z, qubit)]

    @property
    def support(self) -> List[int]:
        bits = self.x | self.z
        return [i for i in range(self.n) if (bits >> i) & 1]

    @property
    def is_hermitian(self) -> bool:
        return self.k % 2 == 0

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian strings"""
        if not self.is_hermitian:
            raise ValueError(f"{self} is not Hermitian")
        return 1 if self.k == 0 else -1

    def to_compact(self, signed: bool = False) -> str:
        body = "".join(f"{self.letter(q)}{q + 1}" for q in self.support) or "I"
        if signed and self.k:
            return PHASE_PREFIXES[self.k] + body
        return body

    def __str__(self) -> str:
        return PHASE_PREFIXES[self.k] + self.letters

    def __repr__(self) -> str:
        return f"PauliString('{self}')"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (self.n, self.x, self.z, self.k) == (other.n, other.x, other.z, other.k)

    def __hash__(self) -> int:
        return hash((self.n, self.x, self.z, self.k))

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __neg__(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.k + 2)

    # helpers ----------------------------------------------------------------

    def with_phase(self, k: int) -> "PauliString":
        return PauliString(self.n, self.x, self.z, k)

    def unsigned(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, 0)

    def same_letters(self, other: "PauliString") -> bool:
        return self.n == other.n and self.x == other.x and self.z == other.z

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0


def _letter_index(x: int, z: int, qubit: int) -> int:
    xb = (x >> qubit) & 1
    zb = (z >> qubit) & 1
    return {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}[(xb, zb)]


def _check_same_size(a: PauliString, b: PauliString):
    if a.n != b.n:
        raise PauliDimensionError(f"Pauli strings act on {a.n} and {b.n} qubits")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Matrix product a·b with exact phase"""
    _check_same_size(a, b)
    ax, az, bx, bz = a.x, a.z, b.x, b.z
    a_x, a_y, a_z = ax & ~az, ax & az, az & ~ax
    b_x, b_y, b_z = bx & ~bz, bx & bz, bz & ~bx
    # XY = iZ, YZ = iX, ZX = iY and the reversed orders pick up -i
    plus = (a_x & b_y) | (a_y & b_z) | (a_z & b_x)
    minus = (a_y & b_x) | (a_z & b_y) | (a_x & b_z)
    k = a.k + b.k + plus.bit_count() - minus.bit_count()
    return PauliString(a.n, ax ^ bx, az ^ bz, k)


def product(paulis: Iterable[PauliString], n: Optional[int] = None) -> PauliString:
    """Ordered product of a sequence of Pauli strings"""
    result = None
    for p in paulis:
        result = p if result is None else multiply(result, p)
    if result is None:
        if n is None:
            raise PauliDimensionError("Empty product needs an explicit register size")
        return PauliString.identity(n)
    return result


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff the symplectic inner product of a and b vanishes"""
    _check_same_size(a, b)
    return ((a.x & b.z) ^ (a.z & b.x)).bit_count() % 2 == 0


def weight(a: PauliString) -> int:
    return (a.x | a.z).bit_count()


def embed(p: PauliString, n: int, qubits: Optional[Sequence[int]] = None) -> PauliString:
    """Place p into an n-qubit register, qubit i of p going to qubits[i] (default: i)"""
    if qubits is None:
        qubits = range(p.n)
    if len(qubits) != p.n:
        raise PauliDimensionError(f"Need {p.n} target qubits, got {len(qubits)}")
    x = z = 0
    for i, q in enumerate(qubits):
        if q >= n:
            raise PauliDimensionError(f"Qubit {q} outside a {n}-qubit register")
        x |= ((p.x >> i) & 1) << q
        z |= ((p.z >> i) & 1) << q
    return PauliString(n, x, z, p.k)


def restrict(p: PauliString, qubits: Sequence[int]) -> PauliString:
    """Letters of p on the listed qubits, phase dropped"""
    x = z = 0
    for i, q in enumerate(qubits):
        x |= ((p.x >> q) & 1) << i
        z |= ((p.z >> q) & 1) << i
    return PauliString(len(qubits), x, z)


def permute(p: PauliString, perm: Sequence[int]) -> PauliString:
    """Relabel qubits: the letter on qubit i moves to qubit perm[i]"""
    if sorted(perm) != list(range(p.n)):
        raise PauliDimensionError(f"{perm} is not a permutation of {p.n} qubits")
    return embed(p, p.n, perm)


def inverse_permutation(perm: Sequence[int]) -> Tuple[int, ...]:
    inv = [0] * len(perm)
    for i, target in enumerate(perm):
        inv[target] = i
    return tuple(inv)


def all_paulis(n: int, include_identity: bool = True) -> List[PauliString]:
    """Every unsigned n-qubit Pauli string, ordered with qubit 1 as the most significant letter"""
    out = []
    for code in range(4 ** n):
        letters = []
        for q in range(n):
            letters.append(LETTERS[(code // 4 ** (n - 1 - q)) % 4])
        p = PauliString.from_letters("".join(letters))
        if include_identity or not p.is_identity():
            out.append(p)
    return out


# gates ---------------------------------------------------------------------

ONE_QUBIT_CLIFFORDS = ("I", "X", "Y", "Z", "H", "S", "SDG", "SX", "SXDG", "SY", "SYDG")
TWO_QUBIT_CLIFFORDS = ("CX", "CY", "CZ", "CRX")
ROTATIONS = ("RX", "RY", "RZ", "U")
PAULI_GATES = ("I", "X", "Y", "Z")


class GateSpec:
    """A gate kind applied to an ordered tuple of qubits (control first for 2-qubit gates)

    RX/RY/RZ take one angle, U takes (theta, phi, lam); these are only understood by
    the dense oracle.
    """

    __slots__ = ("kind", "qubits", "params")

    def __init__(self, kind: str, qubits: Sequence[int], params: Sequence[float] = ()):
        kind = kind.upper()
        qubits = tuple(int(q) for q in qubits)
        arity = 2 if kind in TWO_QUBIT_CLIFFORDS else 1
        if kind not in ONE_QUBIT_CLIFFORDS + TWO_QUBIT_CLIFFORDS + ROTATIONS:
            raise UnknownGateError(f"Unknown gate kind '{kind}'")
        if len(qubits) != arity:
            raise UnknownGateError(f"Gate {kind} needs {arity} qubit(s), got {qubits}")
        if arity == 2 and qubits[0] == qubits[1]:
            raise UnknownGateError(f"Gate {kind} control and target coincide ({qubits[0]})")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "params", tuple(float(v) for v in params))

    def __setattr__(self, name, value):
        raise AttributeError("GateSpec is immutable")

    @property
    def is_clifford(self) -> bool:
        return self.kind in ONE_QUBIT_CLIFFORDS or self.kind in TWO_QUBIT_CLIFFORDS

    @property
    def is_pauli(self) -> bool:
        return self.kind in PAULI_GATES

    def __eq__(self, other) -> bool:
        if not isinstance(other, GateSpec):
            return NotImplemented
        return (self.kind, self.qubits, self.params) == (other.kind, other.qubits, other.params)

    def __hash__(self) -> int:
        return hash((self.kind, self.qubits, self.params))

    def __repr__(self) -> str:
        args = ",".join(str(q) for q in self.qubits)
        if self.params:
            return f"{self.kind}({','.join(f'{v:g}' for v in self.params)})[{args}]"
        return f"{self.kind}[{args}]"


# Images of the generators X_q and Z_q under g·P·g†, written on the gate's local qubits
# (control first). Signs follow from the matrix definitions in dense_oracle.
_ONE_QUBIT_IMAGES: Dict[str, Tuple[str, str]] = {
    "I": ("X", "Z"),
    "X": ("X", "-Z"),
    "Y": ("-X", "-Z"),
    "Z": ("-X", "Z"),
    "H": ("Z", "X"),
    "S": ("Y", "Z"),
    "SDG": ("-Y", "Z"),
    "SX": ("X", "-Y"),
    "SXDG": ("X", "Y"),
    "SY": ("-Z", "X"),
    "SYDG": ("Z", "-X"),
}

_TWO_QUBIT_IMAGES: Dict[str, Tuple[str, str, str, str]] = {
    # (X_c, Z_c, X_t, Z_t)
    "CX": ("XX", "ZI", "IX", "ZZ"),
    "CY": ("XY", "ZI", "ZX", "ZZ"),
    "CZ": ("XZ", "ZI", "ZX", "IZ"),
    # |0><0| ⊗ Rx(+pi/2) + |1><1| ⊗ Rx(-pi/2)
    "CRX": ("YX", "ZI", "IX", "-ZY"),
}


@lru_cache(maxsize=None)
def _generator_images(kind: str) -> Tuple[Tuple[PauliString, PauliString], ...]:
    """Per local qubit, the (image of X, image of Z) pair"""
    if kind in _ONE_QUBIT_IMAGES:
        xi, zi = _ONE_QUBIT_IMAGES[kind]
        return ((PauliString.parse(xi), PauliString.parse(zi)),)
    if kind in _TWO_QUBIT_IMAGES:
        xc, zc, xt, zt = (PauliString.parse(s) for s in _TWO_QUBIT_IMAGES[kind])
        return ((xc, zc), (xt, zt))
    raise UnknownGateError(f"No conjugation rule for gate kind '{kind}'")


@lru_cache(maxsize=65536)
def _local_image(kind: str, local_x: int, local_z: int) -> PauliString:
    images = _generator_images(kind)
    arity = len(images)
    result = PauliString.identity(arity)
    n_y = 0
    for i, (img_x, img_z) in enumerate(images):
        xb, zb = (local_x >> i) & 1, (local_z >> i) & 1
        n_y += xb & zb
        # Y = i·X·Z
        if xb:
            result = multiply(result, img_x)
        if zb:
            result = multiply(result, img_z)
    return result.with_phase(result.k + n_y)


def conjugate_by_gate(p: PauliString, g: GateSpec) -> PauliString:
    """Return g·p·g† with exact phase; qubits outside the gate are untouched"""
    if not g.is_clifford:
        raise UnknownGateError(f"Gate {g.kind} has no Pauli conjugation rule")
    for q in g.qubits:
        if q >= p.n:
            raise PauliDimensionError(f"Gate qubit {q} outside a {p.n}-qubit Pauli")
    local = restrict(p, g.qubits)
    if local.is_identity():
        return p
    image = _local_image(g.kind, local.x, local.z)
    clear = 0
    for q in g.qubits:
        clear |= 1 << q
    rest = PauliString(p.n, p.x & ~clear, p.z & ~clear, p.k)
    return multiply(rest, embed(image, p.n, g.qubits))


def conjugate_by_gates(p: PauliString, gates: Iterable[GateSpec]) -> PauliString:
    for g in gates:
        p = conjugate_by_gate(p, g)
    return p


INVERSE_KIND = {
    "I": "I", "X": "X", "Y": "Y", "Z": "Z", "H": "H",
    "S": "SDG", "SDG": "S", "SX": "SXDG", "SXDG": "SX", "SY": "SYDG", "SYDG": "SY",
    "CX": "CX", "CY": "CY", "CZ": "CZ",
}


def inverse_gate(g: GateSpec) -> GateSpec:
    if g.kind not in INVERSE_KIND:
        raise UnknownGateError(f"No inverse recorded for gate kind '{g.kind}'")
    return GateSpec(INVERSE_KIND[g.kind], g.qubits)
