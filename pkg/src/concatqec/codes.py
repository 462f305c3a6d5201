"""The three stabilizer codes as concrete data: logical codewords, ordered
correctable-error tables, stabilizer generators and the block encoding unitary.

The encoding unitary U maps |a_m> (x) |b> to E_m |b_L>, with the ancilla
register as the first n-1 tensor factors and the data qubit last; column
2m + b of U is therefore E_m |b_L>.  Orthonormality of the columns certifies
that the error set is correctable for the code.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .pauli import PAULI_LETTERS, pauli_apply, pauli_letter_indices

GRAM_TOL = 1e-10


class CodeError(RuntimeError):
    """Raised when a code construction fails its correctability certificate."""


@dataclass(frozen=True)
class PauliString:
    """A Pauli operator on n qubits, one letter in {I, X, Y, Z} per qubit."""

    letters: str

    def __post_init__(self):
        if any(c not in PAULI_LETTERS for c in self.letters):
            raise ValueError(f"invalid Pauli string {self.letters!r}")

    def __str__(self) -> str:
        return self.letters

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return sum(1 for c in self.letters if c != "I")

    @property
    def indices(self) -> tuple[int, ...]:
        return pauli_letter_indices(self.letters)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return pauli_apply(self.indices, vec)

    def anticommutes_with(self, other: "PauliString") -> bool:
        if len(other) != len(self):
            raise ValueError("Pauli strings act on different qubit counts")
        count = 0
        for a, b in zip(self.letters, other.letters):
            if a != "I" and b != "I" and a != b:
                count += 1
        return count % 2 == 1


@dataclass(frozen=True)
class CodeSpec:
    """A code ready for effective-channel evaluation."""

    name: str
    n: int
    logical_zero: np.ndarray = field(repr=False)
    logical_one: np.ndarray = field(repr=False)
    errors: tuple[PauliString, ...] = field(repr=False)
    encoding_unitary: np.ndarray = field(repr=False)
    stabilizer_generators: tuple[PauliString, ...] = field(repr=False)

    def syndrome(self, err: PauliString) -> tuple[int, ...]:
        """Anticommutation pattern of err against the stabilizer generators."""
        return tuple(int(err.anticommutes_with(g)) for g in self.stabilizer_generators)


def _single_qubit_errors(n: int) -> list[PauliString]:
    """E_0 = identity, then m = 3(i-1) + j for qubit i = 1..n, letter j in X, Y, Z."""
    errors = [PauliString("I" * n)]
    for i in range(n):
        for letter in "XYZ":
            errors.append(PauliString("I" * i + letter + "I" * (n - i - 1)))
    return errors


def build_encoding_unitary(
    logical_zero: np.ndarray, logical_one: np.ndarray, errors
) -> np.ndarray:
    """Column 2m + b of the result is E_m applied to logical |b>.

    Raises CodeError when the columns fail orthonormality, i.e. the error set
    is not correctable for these codewords.
    """
    dim = logical_zero.shape[0]
    if len(errors) * 2 != dim:
        raise CodeError(f"{len(errors)} errors cannot index a {dim}-dimensional register")
    u = np.empty((dim, dim), dtype=complex)
    for m, err in enumerate(errors):
        u[:, 2 * m] = err.apply(logical_zero)
        u[:, 2 * m + 1] = err.apply(logical_one)
    gram_dev = np.abs(np.conj(u).T @ u - np.eye(dim)).max()
    if gram_dev > GRAM_TOL:
        raise CodeError(f"error set is not correctable: Gram deviation {gram_dev:.3e}")
    return u


def _finish(name, n, v0, v1, errors, generators) -> CodeSpec:
    u = build_encoding_unitary(v0, v1, errors)
    for arr in (v0, v1, u):
        arr.setflags(write=False)
    return CodeSpec(
        name=name,
        n=n,
        logical_zero=v0,
        logical_one=v1,
        errors=tuple(errors),
        encoding_unitary=u,
        stabilizer_generators=tuple(generators),
    )


def _ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


@lru_cache(maxsize=None)
def five_qubit_code() -> CodeSpec:
    """The [[5,1,3]] code, codewords transcribed term by term."""
    plus0 = ["00000", "10010", "01001", "10100", "01010", "00101"]
    minus0 = ["11011", "00110", "11000", "11101", "00011", "11110",
              "01111", "10001", "01100", "10111"]
    v0 = (sum(_ket(b) for b in plus0) - sum(_ket(b) for b in minus0)) / 4.0
    plus1 = ["11111", "01101", "10110", "01011", "10101", "11010"]
    minus1 = ["00100", "11001", "00111", "00010", "11100", "00001",
              "10000", "01110", "10011", "01000"]
    v1 = (sum(_ket(b) for b in plus1) - sum(_ket(b) for b in minus1)) / 4.0
    generators = [PauliString(g) for g in ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")]
    return _finish("five", 5, v0, v1, _single_qubit_errors(5), generators)


def _steane_supports() -> list[set[int]]:
    # Hamming [7,4] parity rows as 1-indexed qubit supports
    return [{4, 5, 6, 7}, {2, 3, 6, 7}, {1, 3, 5, 7}]


@lru_cache(maxsize=None)
def steane_code() -> CodeSpec:
    """The [[7,1,3]] CSS code.

    Logical zero symmetrizes |0...0> over the X-type stabilizer group; the
    correctable set is identity, all 21 weight-one Paulis and the 42 operators
    X_i Z_j with i != j in lexicographic (i, j) order.
    """
    n = 7
    supports = _steane_supports()
    v0 = np.zeros(2**n, dtype=complex)
    for picks in itertools.product((0, 1), repeat=3):
        flipped: set[int] = set()
        for on, sup in zip(picks, supports):
            if on:
                flipped ^= sup
        v0 += _ket("".join("1" if q + 1 in flipped else "0" for q in range(n)))
    v0 /= np.sqrt(8.0)
    v1 = PauliString("X" * n).apply(v0)
    errors = _single_qubit_errors(n)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            letters = ["I"] * n
            letters[i] = "X"
            letters[j] = "Z"
            errors.append(PauliString("".join(letters)))
    generators = []
    for kind in ("X", "Z"):
        for sup in supports:
            generators.append(
                PauliString("".join(kind if q + 1 in sup else "I" for q in range(n)))
            )
    return _finish("steane", n, v0, v1, errors, generators)


def _shor_generators() -> list[PauliString]:
    gens = []
    for a, b in ((1, 2), (2, 3), (4, 5), (5, 6), (7, 8), (8, 9)):
        gens.append(PauliString("".join("Z" if q + 1 in (a, b) else "I" for q in range(9))))
    gens.append(PauliString("XXXXXXIII"))
    gens.append(PauliString("IIIXXXXXX"))
    return gens


@lru_cache(maxsize=None)
def shor_code() -> CodeSpec:
    """The [[9,1,3]] code with a full syndrome table of 256 classes.

    Pauli strings are enumerated by increasing weight, then lexicographically
    by support and letter, keeping the first representative of each new
    syndrome; the code is degenerate, so representatives stand for whole
    classes (e.g. Z1 for {Z1, Z2, Z3}).
    """
    n = 9
    blk0 = (_ket("000") + _ket("111")) / np.sqrt(2.0)
    blk1 = (_ket("000") - _ket("111")) / np.sqrt(2.0)
    v0 = np.kron(np.kron(blk0, blk0), blk0)
    v1 = np.kron(np.kron(blk1, blk1), blk1)
    generators = _shor_generators()
    seen: dict[tuple[int, ...], PauliString] = {}
    order: list[PauliString] = []
    for weight in range(4):
        for support in itertools.combinations(range(n), weight):
            for letters in itertools.product("XYZ", repeat=weight):
                chars = ["I"] * n
                for q, c in zip(support, letters):
                    chars[q] = c
                err = PauliString("".join(chars))
                syn = tuple(int(err.anticommutes_with(g)) for g in generators)
                if syn not in seen:
                    seen[syn] = err
                    order.append(err)
        if len(seen) == 256:
            break
    if len(seen) != 256:
        raise CodeError(f"Shor syndrome table incomplete: {len(seen)} of 256 classes")
    return _finish("shor", n, v0, v1, order, generators)


CODE_BUILDERS = {"five": five_qubit_code, "steane": steane_code, "shor": shor_code}


def get_code(name: str) -> CodeSpec:
    try:
        return CODE_BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown code {name!r}; have {sorted(CODE_BUILDERS)}") from None


# ---------------------------------------------------------------------------
# validation report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CodeReport:
    unitarity_residual: float
    logical_norm_residual: float
    logical_overlap: float
    syndromes_distinct: bool
    degenerate_syndrome_classes: int
    single_qubit_correction_residual: float

    @property
    def ok(self) -> bool:
        return (
            self.unitarity_residual < 1e-10
            and self.logical_norm_residual < 1e-10
            and self.logical_overlap < 1e-10
            and self.syndromes_distinct
            and self.single_qubit_correction_residual < 1e-10
        )


def validate_code(code: CodeSpec) -> CodeReport:
    """Certify the code: unitarity (Knill-Laflamme via the Gram test), logical
    orthogonality, syndrome distinctness and perfect single-qubit correction."""
    u = code.encoding_unitary
    unitarity = float(np.abs(np.conj(u).T @ u - np.eye(u.shape[0])).max())
    norm_res = max(
        abs(np.linalg.norm(code.logical_zero) - 1.0),
        abs(np.linalg.norm(code.logical_one) - 1.0),
    )
    overlap = float(abs(np.vdot(code.logical_zero, code.logical_one)))

    table_syndromes = [code.syndrome(e) for e in code.errors]
    distinct = len(set(table_syndromes)) == len(table_syndromes)
    # count weight-1 errors sharing a syndrome with a different table entry
    degenerate = 0
    rep_of = {syn: e for syn, e in zip(table_syndromes, code.errors)}
    for i in range(code.n):
        for letter in "XYZ":
            err = PauliString("I" * i + letter + "I" * (code.n - i - 1))
            rep = rep_of.get(code.syndrome(err))
            if rep is not None and rep.letters != err.letters:
                degenerate += 1

    from .effective import effective_ptm  # deferred: effective imports codes

    rng = np.random.default_rng(20240921)
    from .channels import kraus_to_natural, ptm_to_natural
    from .noise import random_cptp_kraus

    identity = ptm_to_natural(np.eye(4))
    worst = 0.0
    for qubit in range(code.n):
        layer = [identity] * code.n
        layer[qubit] = kraus_to_natural(random_cptp_kraus(rng))
        eta = effective_ptm(code, layer)
        worst = max(worst, float(np.abs(eta - np.eye(4)).max()))

    return CodeReport(
        unitarity_residual=unitarity,
        logical_norm_residual=float(norm_res),
        logical_overlap=overlap,
        syndromes_distinct=distinct,
        degenerate_syndrome_classes=degenerate,
        single_qubit_correction_residual=worst,
    )


def error_table_rows(code: CodeSpec) -> list[tuple[int, str, str]]:
    """Rows (m, pauli string, syndrome bits) for the CSV export."""
    rows = []
    for m, err in enumerate(code.errors):
        syn = "".join(str(b) for b in code.syndrome(err))
        rows.append((m, err.letters, syn))
    return rows
