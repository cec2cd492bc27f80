"""
Static data of the 5-qubit code: stabilizers, logical operators, decoding tables
and logical-coset classification
"""
import itertools
import logging
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from pauli_algebra import PauliString, all_paulis, commutes, multiply, product, weight
from run_models import VerificationReport

logger = logging.getLogger(__name__)

N_DATA = 5
Syndrome = Tuple[int, int, int, int]


class TableMismatchError(RuntimeError):
    """Raised when a generated table disagrees with the published one"""


def _p(letters: str) -> PauliString:
    return PauliString.parse(letters)


def _c(compact: str) -> PauliString:
    return PauliString.from_compact(compact, N_DATA)


class CodeDefinition:
    """Stabilizers, logical operators and the weight-3 logical -X generators of the code"""

    def __init__(self):
        self.stabilizers = [_p("XXYIY"), _p("YXXYI"), _p("IYXXY"), _p("YIYXX")]
        self.x_l = _p("XXXXX")
        self.y_l = _p("YYYYY")
        self.z_l = _p("ZZZZZ")
        self.p = [_p("IZXZI"), _p("ZIIZX"), _p("XZIIZ"), _p("ZXZII"), _p("IIZXZ")]
        self.t1 = _p("IXIYY")
        self.t2 = _p("XIYYI")

    @property
    def logicals(self) -> Dict[str, PauliString]:
        return {"I_L": PauliString.identity(N_DATA), "X_L": self.x_l, "Y_L": self.y_l, "Z_L": self.z_l}

    @property
    def checks(self) -> Dict[str, PauliString]:
        """The five p_i plus the two verification operators, keyed by name"""
        named = {f"p{i + 1}": p for i, p in enumerate(self.p)}
        named.update({"T1": self.t1, "T2": self.t2})
        return named

    @property
    def group(self) -> List[PauliString]:
        return stabilizer_group()


CODE = CodeDefinition()


@lru_cache(maxsize=None)
def _group_tuple() -> Tuple[PauliString, ...]:
    elements = []
    for bits in itertools.product((0, 1), repeat=4):
        chosen = [s for s, b in zip(CODE.stabilizers, bits) if b]
        elements.append(product(chosen, N_DATA))
    return tuple(elements)


def stabilizer_group() -> List[PauliString]:
    """All 16 signed elements of the stabilizer group"""
    return list(_group_tuple())


@lru_cache(maxsize=None)
def _group_index() -> Dict[Tuple[int, int], int]:
    return {(g.x, g.z): g.k for g in _group_tuple()}


def in_stabilizer_group(p: PauliString, signed: bool = True) -> bool:
    k = _group_index().get((p.x, p.z))
    if k is None:
        return False
    return k == p.k if signed else True


def equivalent(a: PauliString, b: PauliString) -> bool:
    """a ≡ b when a·b is in the stabilizer group, ignoring the overall phase"""
    return in_stabilizer_group(multiply(a, b), signed=False)


# error sets and published tables --------------------------------------------------

SINGLE_QUBIT_ERRORS = [PauliString.single(N_DATA, q, letter) for q in range(N_DATA) for letter in "XYZ"]
ERROR_SET_E = [PauliString.identity(N_DATA)] + SINGLE_QUBIT_ERRORS
ERROR_SET_E_PRIME = [_c(s) for s in ("I", "X1", "X3Y5", "Z1", "X2", "Y2", "Z3Y5", "X1Y2",
                                     "Y3", "Z3", "X4", "Y4", "Y3Y5", "X5", "Y5", "X1Z2")]


def _signs(text: str) -> Syndrome:
    return tuple(1 if ch == "+" else -1 for ch in text)


# syndrome (s1, s2, s3, s4) -> (recovery without flag, recovery with flag)
PUBLISHED_SYNDROME_TABLE = {
    "++++": ("I", "I"),
    "+-+-": ("X1", "X1"),
    "--+-": ("Z1", "Z1"),
    "-+++": ("Y1", "X3Y5"),
    "++-+": ("X2", "X2"),
    "---+": ("Z2", "Z3Y5"),
    "--++": ("Y2", "Y2"),
    "-++-": ("X3", "X1Y2"),
    "----": ("Z3", "Z3"),
    "+--+": ("Y3", "Y3"),
    "+-++": ("X4", "X4"),
    "+---": ("Z4", "Y3Y5"),
    "++--": ("Y4", "Y4"),
    "-+-+": ("X5", "X5"),
    "+++-": ("Y5", "Y5"),
    "-+--": ("Z5", "X1Z2"),
}

# (m3, m4, m5) -> Pauli bringing the prepared state to |-⟩_L
PUBLISHED_FRAME_TABLE = {
    "+++": "I",
    "++-": "Z4",
    "+-+": "Z2",
    "+--": "X3",
    "-++": "Z1",
    "-+-": "X5",
    "--+": "Z1Z2",
    "---": "Z1X3",
}

# logical operator -> signed weight-5 and weight-3 incarnations
PUBLISHED_INCARNATIONS = {
    "Z_L": ("ZZZZZ", "-IIYZY", "-IXXIZ"),
    "Y_L": ("YYYYY", "-IZZIY", "-XIIXY"),
    "X_L": ("XXXXX", "-IXIYY", "-ZIIZX"),
}

# single-qubit error -> checks among p1..p5, T1, T2 it anticommutes with
PUBLISHED_FLIPS = {
    "X1": ("p2", "p4"), "Y1": ("p2", "p3", "p4", "T2"), "Z1": ("p3", "T2"),
    "X2": ("p1", "p3"), "Y2": ("p1", "p3", "p4", "T1"), "Z2": ("p4", "T1"),
    "X3": ("p4", "p5", "T2"), "Y3": ("p1", "p4", "p5"), "Z3": ("p1", "T2"),
    "X4": ("p1", "p2", "T1", "T2"), "Y4": ("p1", "p2", "p5"), "Z4": ("p5", "T1", "T2"),
    "X5": ("p3", "p5", "T1"), "Y5": ("p2", "p3", "p5"), "Z5": ("p2", "T1"),
}


# operations -----------------------------------------------------------------------

def syndrome_of(e: PauliString, stabilizers: Optional[Sequence[PauliString]] = None) -> Syndrome:
    """+1 per stabilizer that e commutes with, -1 otherwise, in the order s1..s4"""
    stabilizers = stabilizers or CODE.stabilizers
    return tuple(1 if commutes(e, s) else -1 for s in stabilizers)


def syndrome_text(syndrome: Syndrome) -> str:
    return "".join("+" if s == 1 else "-" for s in syndrome)


def format_syndrome(syndrome: Syndrome) -> str:
    return "[" + ",".join(f"{s:+d}" for s in syndrome) + "]"


class DecodeTables:
    """Syndrome lookups without flag (set E), with flag (set E′) and the (m3, m4, m5) frame map"""

    def __init__(self, no_flag: Dict[Syndrome, PauliString], with_flag: Dict[Syndrome, PauliString],
                 frame: Dict[Tuple[int, int, int], PauliString]):
        self.no_flag = dict(no_flag)
        self.with_flag = dict(with_flag)
        self.frame = dict(frame)

    @classmethod
    def published(cls) -> "DecodeTables":
        no_flag, with_flag = {}, {}
        for text, (plain, flagged) in PUBLISHED_SYNDROME_TABLE.items():
            no_flag[_signs(text)] = _c(plain)
            with_flag[_signs(text)] = _c(flagged)
        frame = {_signs(text): _c(p) for text, p in PUBLISHED_FRAME_TABLE.items()}
        return cls(no_flag, with_flag, frame)

    def decode(self, syndrome: Sequence[int], flag_raised: bool = False) -> PauliString:
        table = self.with_flag if flag_raised else self.no_flag
        return table[tuple(syndrome)]

    def to_dict(self) -> Dict:
        return {
            "no_flag": {syndrome_text(s): e.to_compact() for s, e in sorted(self.no_flag.items(), reverse=True)},
            "with_flag": {syndrome_text(s): e.to_compact() for s, e in sorted(self.with_flag.items(), reverse=True)},
            "frame": {syndrome_text(m): e.to_compact() for m, e in sorted(self.frame.items(), reverse=True)},
        }


TABLES = DecodeTables.published()


def decode(syndrome: Sequence[int], flag_raised: bool = False) -> PauliString:
    return TABLES.decode(syndrome, flag_raised)


def frame_correction(m3: int, m4: int, m5: int) -> PauliString:
    return TABLES.frame[(m3, m4, m5)]


def generate_no_flag_table() -> Dict[Syndrome, PauliString]:
    return {syndrome_of(e): e for e in ERROR_SET_E}


def generate_flag_table(errors: Optional[Sequence[PauliString]] = None) -> Dict[Syndrome, PauliString]:
    errors = ERROR_SET_E_PRIME if errors is None else errors
    table = {}
    for e in errors:
        s = syndrome_of(e)
        if s in table:
            raise TableMismatchError(f"{e.to_compact()} and {table[s].to_compact()} share syndrome {format_syndrome(s)}")
        table[s] = e
    return table


def cyclic_shift(p: PauliString, shift: int) -> PauliString:
    """Move the letter on qubit q to qubit (q + shift) mod 5"""
    return PauliString.from_sparse(N_DATA, {(q + shift) % N_DATA: p.letter(q) for q in p.support}, p.k)


@lru_cache(maxsize=None)
def flag_table_for(k: int) -> Tuple[Tuple[Syndrome, PauliString], ...]:
    """E′ table for a raised flag while measuring s_k (the s1 table shifted by k-1 qubits)"""
    return tuple(generate_flag_table([cyclic_shift(e, k - 1) for e in ERROR_SET_E_PRIME]).items())


def decode_for(k: int, syndrome: Sequence[int], flag_raised: bool) -> PauliString:
    if not flag_raised:
        return decode(syndrome, False)
    return dict(flag_table_for(k))[tuple(syndrome)]


def p_syndrome(e: PauliString) -> Tuple[int, ...]:
    """Signs of p1..p5 on e|-⟩_L: -1 where e anticommutes with p_i"""
    return tuple(1 if commutes(e, p) else -1 for p in CODE.p)


class LogicalClass:
    """Decomposition e = E·L·g with weight(E) <= 1, L a logical operator and g a stabilizer"""

    def __init__(self, name: str, rep: PauliString):
        self.name = name
        self.rep = rep

    @property
    def weight(self) -> int:
        return weight(self.rep)

    @property
    def is_trivial(self) -> bool:
        return self.name == "I_L"

    def __iter__(self):
        return iter((self.name, self.rep))

    def __eq__(self, other) -> bool:
        if isinstance(other, LogicalClass):
            return (self.name, self.rep) == (other.name, other.rep)
        return NotImplemented

    def __repr__(self) -> str:
        return f"LogicalClass({self.name}, {self.rep.to_compact(signed=True)})"


@lru_cache(maxsize=4096)
def _classify(x: int, z: int) -> Tuple[str, int, int, int]:
    e = PauliString(N_DATA, x, z)
    best = None
    for name, logical in CODE.logicals.items():
        for g in _group_tuple():
            candidate = multiply(multiply(e, logical), g)
            w = weight(candidate)
            if best is None or w < best[0]:
                best = (w, name, candidate)
    w, name, rep = best
    if w > 1:
        raise RuntimeError(f"{e} has no weight-1 decomposition; code data is inconsistent")
    return name, rep.x, rep.z, rep.k


def logical_class(e: PauliString) -> LogicalClass:
    """Logical coset of e after removing its unique correctable (weight <= 1) part

    The representative carries the phase of e·L·g for the matched L and g.
    """
    if e.n != N_DATA:
        raise ValueError(f"logical_class needs a {N_DATA}-qubit Pauli, got {e.n}")
    name, x, z, k = _classify(e.x, e.z)
    return LogicalClass(name, PauliString(N_DATA, x, z, (k + e.k) % 4))


def coset_class(e: PauliString) -> Optional[str]:
    """Name of the logical coset containing e itself, or None if e is not in any"""
    for name, logical in CODE.logicals.items():
        if in_stabilizer_group(multiply(e, logical), signed=False):
            return name
    return None


def incarnations(name: str, max_weight: int = N_DATA) -> List[PauliString]:
    """Signed elements P of L·S with weight <= max_weight, lightest first"""
    logical = CODE.logicals[name]
    elements = [multiply(logical, g) for g in _group_tuple()]
    return sorted((p for p in elements if weight(p) <= max_weight), key=lambda p: (weight(p), p.letters))


def minimum_weight_pattern(anticommute: Sequence[PauliString], commute: Sequence[PauliString]) -> int:
    """Smallest weight of a Pauli with the given commutation pattern"""
    best = None
    for p in all_paulis(N_DATA):
        if all(not commutes(p, a) for a in anticommute) and all(commutes(p, c) for c in commute):
            w = weight(p)
            best = w if best is None else min(best, w)
    return best


# verification ---------------------------------------------------------------------

def _check_syndrome_table(name: str, table: Dict[Syndrome, PauliString], violations: List[Dict]):
    if len(table) != 16:
        violations.append({"table": name, "problem": f"{len(table)} syndromes present, expected 16"})
    recoveries = [e.letters for e in table.values()]
    if len(set(recoveries)) != len(recoveries):
        violations.append({"table": name, "problem": "duplicate recoveries"})
    for s, e in table.items():
        if syndrome_of(e) != tuple(s):
            violations.append({"table": name, "syndrome": format_syndrome(s), "recovery": e.to_compact(),
                               "problem": f"recovery has syndrome {format_syndrome(syndrome_of(e))}"})


def verify_tables(tables: Optional[DecodeTables] = None, raise_on_failure: bool = False) -> VerificationReport:
    """Check the decoding, frame, incarnation and flip tables against the code definition"""
    tables = tables or TABLES
    violations: List[Dict] = []

    # code definition
    for a, b in itertools.combinations(CODE.stabilizers, 2):
        if not commutes(a, b):
            violations.append({"table": "code", "problem": f"{a} and {b} anticommute"})
    for a, b in itertools.combinations(CODE.p, 2):
        if not commutes(a, b):
            violations.append({"table": "code", "problem": f"{a} and {b} anticommute"})
    if commutes(CODE.x_l, CODE.z_l):
        violations.append({"table": "code", "problem": "X_L and Z_L commute"})
    for s in CODE.stabilizers:
        for name in ("X_L", "Z_L"):
            if not commutes(s, CODE.logicals[name]):
                violations.append({"table": "code", "problem": f"{name} anticommutes with {s}"})
    if not product([CODE.p[1], CODE.p[3], CODE.p[4]]).same_letters(CODE.t1):
        violations.append({"table": "code", "problem": "T1 != p2 p4 p5"})
    if not product([CODE.p[0], CODE.p[2], CODE.p[4]]).same_letters(CODE.t2):
        violations.append({"table": "code", "problem": "T2 != p1 p3 p5"})

    # syndrome tables
    _check_syndrome_table("no_flag", tables.no_flag, violations)
    _check_syndrome_table("with_flag", tables.with_flag, violations)
    generated = generate_no_flag_table()
    for s, e in generated.items():
        if tables.no_flag.get(s) != e:
            violations.append({"table": "no_flag", "syndrome": format_syndrome(s),
                               "problem": f"generated {e.to_compact()}, table has "
                                          f"{tables.no_flag[s].to_compact() if s in tables.no_flag else None}"})
    try:
        generated_flag = generate_flag_table()
    except TableMismatchError as e:
        violations.append({"table": "with_flag", "problem": str(e)})
        generated_flag = {}
    if set(tables.with_flag.values()) != set(ERROR_SET_E_PRIME):
        violations.append({"table": "with_flag", "problem": "recoveries differ from the E′ set"})
    for s, e in generated_flag.items():
        if tables.with_flag.get(s) != e:
            violations.append({"table": "with_flag", "syndrome": format_syndrome(s),
                               "problem": f"E′ assigns {e.to_compact()} to this syndrome"})

    # frame corrections
    if len(tables.frame) != 8:
        violations.append({"table": "frame", "problem": f"{len(tables.frame)} entries, expected 8"})
    for m, fix in tables.frame.items():
        anti = [p for p, sign in zip(CODE.p[2:], m) if sign == -1]
        comm = CODE.p[:2] + [p for p, sign in zip(CODE.p[2:], m) if sign == 1]
        if not all(not commutes(fix, a) for a in anti) or not all(commutes(fix, c) for c in comm):
            violations.append({"table": "frame", "outcomes": syndrome_text(m),
                               "problem": f"{fix.to_compact()} has the wrong commutation pattern"})
        elif weight(fix) != minimum_weight_pattern(anti, comm):
            violations.append({"table": "frame", "outcomes": syndrome_text(m),
                               "problem": f"{fix.to_compact()} is not of minimum weight"})

    # incarnations
    for name, forms in PUBLISHED_INCARNATIONS.items():
        for form in forms:
            p = PauliString.parse(form)
            if not in_stabilizer_group(multiply(CODE.logicals[name], p)):
                violations.append({"table": "incarnations", "problem": f"{form} is not {name} times a stabilizer"})

    # single-error flips
    for compact, flipped in PUBLISHED_FLIPS.items():
        e = _c(compact)
        computed = tuple(name for name, check in CODE.checks.items() if not commutes(e, check))
        if set(computed) != set(flipped):
            violations.append({"table": "flips", "error": compact,
                               "problem": f"anticommutes with {computed}, table lists {flipped}"})

    p_product = product(CODE.p)
    report = VerificationReport("tables", not violations, violations,
                                summary={"p_product": str(p_product),
                                         "xxxxx_on_minus_l": 1 if p_product.k == 0 else -1})
    if violations:
        logger.error(f"Table verification found {len(violations)} problem(s)")
    else:
        logger.info("Table verification passed")
    if raise_on_failure:
        report.raise_on_failure(TableMismatchError)
    return report


def tables_document() -> Dict:
    """Code definition and every table, in the layout used by the CLI"""
    return {
        "code": {
            "stabilizers": [s.letters for s in CODE.stabilizers],
            "logicals": {"X_L": CODE.x_l.letters, "Y_L": CODE.y_l.letters, "Z_L": CODE.z_l.letters},
            "p": [p.letters for p in CODE.p],
            "T1": CODE.t1.letters,
            "T2": CODE.t2.letters,
        },
        "syndromes": [
            {"syndrome": format_syndrome(_signs(text)), "no_flag": plain, "with_flag": flagged}
            for text, (plain, flagged) in PUBLISHED_SYNDROME_TABLE.items()
        ],
        "frame": [{"outcomes": format_syndrome(_signs(text)), "correction": p}
                  for text, p in PUBLISHED_FRAME_TABLE.items()],
        "incarnations": {name: list(forms) for name, forms in PUBLISHED_INCARNATIONS.items()},
    }
