"""Pauli-string algebra.

Representation and multiplication of weighted Pauli strings, the
Jordan-Wigner mapping of fermionic ladder operators, the hydrogen-molecule
Hamiltonian, rank-one-to-reflection decompositions, dense test oracles, and
a line-oriented text format for Hamiltonians.

Conventions: qubit 0 is the least significant bit of a basis-state index and
the rightmost character of a Pauli word.  All types are immutable; operations
are pure functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Dense forms are test oracles only; 64x64 keeps them instantaneous.
DENSE_QUBIT_CAP = 6

# Canonicalization threshold: coefficients below this are numerical dust.
DROP_TOL = 1e-12


def _build_product_table() -> dict[tuple[str, str], tuple[complex, str]]:
    table: dict[tuple[str, str], tuple[complex, str]] = {}
    cyclic = {("X", "Y"): "Z", ("Y", "Z"): "X", ("Z", "X"): "Y"}
    for a in "IXYZ":
        for b in "IXYZ":
            if a == "I":
                table[(a, b)] = (1.0 + 0j, b)
            elif b == "I":
                table[(a, b)] = (1.0 + 0j, a)
            elif a == b:
                table[(a, b)] = (1.0 + 0j, "I")
            elif (a, b) in cyclic:
                table[(a, b)] = (1j, cyclic[(a, b)])
            else:
                table[(a, b)] = (-1j, cyclic[(b, a)])
    return table


_PRODUCT = _build_product_table()


class HamiltonianParseError(ValueError):
    """Malformed Hamiltonian text; the message carries the line number."""


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-qubit Paulis; ``ops[q]`` acts on qubit q."""

    ops: tuple[str, ...]

    def __post_init__(self) -> None:
        if not all(c in "IXYZ" for c in self.ops):
            raise ValueError(f"illegal Pauli characters in {self.ops!r}")

    @property
    def n(self) -> int:
        return len(self.ops)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(("I",) * n)

    @classmethod
    def from_word(cls, word: str) -> "PauliString":
        """Build from display form: rightmost character is qubit 0."""
        return cls(tuple(reversed(word)))

    @property
    def word(self) -> str:
        return "".join(reversed(self.ops))

    @property
    def is_identity(self) -> bool:
        return all(c == "I" for c in self.ops)

    def masks(self) -> tuple[int, int, int]:
        """Return (flip_mask, phase_mask, y_count) for basis-state action.

        Acting on |b>, the string maps it to coeffless
        i^y_count * (-1)^popcount(b & phase_mask) |b ^ flip_mask>.
        """
        flip = phase = ys = 0
        for q, c in enumerate(self.ops):
            if c in ("X", "Y"):
                flip |= 1 << q
            if c in ("Y", "Z"):
                phase |= 1 << q
            if c == "Y":
                ys += 1
        return flip, phase, ys

    def to_dense(self) -> np.ndarray:
        if self.n > DENSE_QUBIT_CAP:
            raise ValueError(f"dense oracle capped at {DENSE_QUBIT_CAP} qubits, got {self.n}")
        m = np.array([[1.0 + 0j]])
        for c in self.ops:  # qubit 0 last in the kron chain (least significant)
            m = np.kron(PAULI_MATRICES[c], m)
        return m

    def __str__(self) -> str:
        return self.word


def pauli_multiply(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Matrix product of two Pauli strings as (phase, string), phase in {±1, ±i}."""
    if a.n != b.n:
        raise ValueError(f"qubit-count mismatch: {a.n} != {b.n}")
    phase: complex = 1.0 + 0j
    out = []
    for ca, cb in zip(a.ops, b.ops):
        ph, c = _PRODUCT[(ca, cb)]
        phase *= ph
        out.append(c)
    return phase, PauliString(tuple(out))


@dataclass(frozen=True)
class PauliTerm:
    """A complex coefficient attached to a Pauli string."""

    coeff: complex
    string: PauliString

    def __post_init__(self) -> None:
        if not (math.isfinite(self.coeff.real) and math.isfinite(self.coeff.imag)):
            raise ValueError("non-finite coefficient")

    @property
    def n(self) -> int:
        return self.string.n

    def to_dense(self) -> np.ndarray:
        return self.coeff * self.string.to_dense()

    def __str__(self) -> str:
        return f"({self.coeff:+g}) {self.string.word}"


@dataclass(frozen=True)
class PauliSum:
    """Canonicalized weighted sum of Pauli strings on a fixed qubit count."""

    n: int
    terms: tuple[PauliTerm, ...] = ()

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[PauliTerm], tol: float = DROP_TOL) -> "PauliSum":
        """Merge duplicate strings, drop negligible coefficients, sort by word."""
        acc: dict[tuple[str, ...], complex] = {}
        for t in terms:
            if t.n != n:
                raise ValueError(f"term on {t.n} qubits in a {n}-qubit sum")
            acc[t.string.ops] = acc.get(t.string.ops, 0j) + complex(t.coeff)
        kept = [
            PauliTerm(c, PauliString(ops))
            for ops, c in acc.items()
            if abs(c) >= tol
        ]
        kept.sort(key=lambda t: t.string.word)
        return cls(n, tuple(kept))

    def coefficient(self, word: str) -> complex:
        for t in self.terms:
            if t.string.word == word:
                return t.coeff
        return 0j

    def scaled(self, factor: complex) -> "PauliSum":
        return PauliSum.from_terms(self.n, (PauliTerm(factor * t.coeff, t.string) for t in self.terms))

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if self.n != other.n:
            raise ValueError("qubit-count mismatch")
        return PauliSum.from_terms(self.n, self.terms + other.terms)

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        """Operator product, left factor applied last (standard order)."""
        if self.n != other.n:
            raise ValueError("qubit-count mismatch")
        prods = []
        for ta in self.terms:
            for tb in other.terms:
                ph, s = pauli_multiply(ta.string, tb.string)
                prods.append(PauliTerm(ta.coeff * tb.coeff * ph, s))
        return PauliSum.from_terms(self.n, prods)

    def __len__(self) -> int:
        return len(self.terms)

    def coefficient_norm(self) -> float:
        return float(sum(abs(t.coeff) for t in self.terms))


@dataclass(frozen=True)
class LadderOperator:
    """A fermionic raising (a_j^dag) or lowering (a_j) operator on mode j."""

    mode: int
    raising: bool

    def __post_init__(self) -> None:
        if self.mode < 0:
            raise ValueError("mode must be nonnegative")


def jordan_wigner(op: LadderOperator, n: int) -> PauliSum:
    """Map a ladder operator to its two-term Pauli sum on n qubits.

    a_j   -> (X + iY)/2 on qubit j with a Z parity tail on qubits k < j,
    a_j^+ -> (X - iY)/2 with the same tail.
    """
    if op.mode >= n:
        raise IndexError(f"mode {op.mode} out of range for {n} qubits")
    tail = ["Z"] * op.mode
    x_ops = tuple(tail + ["X"] + ["I"] * (n - op.mode - 1))
    y_ops = tuple(tail + ["Y"] + ["I"] * (n - op.mode - 1))
    y_coeff = -0.5j if op.raising else 0.5j
    return PauliSum.from_terms(
        n,
        [PauliTerm(0.5, PauliString(x_ops)), PauliTerm(y_coeff, PauliString(y_ops))],
    )


def ladder_product(ops: Sequence[LadderOperator], n: int) -> PauliSum:
    """Pauli form of an ordered product of ladder operators (empty -> identity)."""
    acc = PauliSum.from_terms(n, [PauliTerm(1.0, PauliString.identity(n))])
    for op in ops:
        acc = acc @ jordan_wigner(op, n)
    return acc


# Hydrogen molecule in a minimal basis after the Jordan-Wigner mapping:
# 15 terms on 4 qubits, energies in hartree.  Rightmost word character is
# qubit 0.
H2_TERMS: tuple[tuple[float, str], ...] = (
    (-0.8126, "IIII"),
    (0.1712, "IIIZ"),
    (0.1712, "IIZI"),
    (-0.2228, "IZII"),
    (-0.2228, "ZIII"),
    (0.1686, "IIZZ"),
    (0.1205, "IZIZ"),
    (0.1659, "IZZI"),
    (0.1659, "ZIIZ"),
    (0.1205, "ZIZI"),
    (0.1743, "ZZII"),
    (-0.0453, "XXYY"),
    (0.0453, "XYYX"),
    (0.0453, "YXXY"),
    (-0.0453, "YYXX"),
)


def build_h2() -> PauliSum:
    """The 4-qubit hydrogen-molecule Hamiltonian with its published coefficients."""
    return PauliSum.from_terms(
        4, [PauliTerm(c, PauliString.from_word(w)) for c, w in H2_TERMS]
    )


@dataclass(frozen=True)
class Reflection:
    """Householder-style unitary descriptor: I - 2|x><x|, or the identity."""

    axis: np.ndarray | None = field(default=None)

    def matrix(self, dim: int) -> np.ndarray:
        if self.axis is None:
            return np.eye(dim, dtype=complex)
        if len(self.axis) != dim:
            raise ValueError("dimension mismatch")
        return np.eye(dim, dtype=complex) - 2.0 * np.outer(self.axis, self.axis.conj())

    def apply(self, vec: np.ndarray) -> np.ndarray:
        if self.axis is None:
            return vec.copy()
        return vec - 2.0 * self.axis * np.vdot(self.axis, vec)


def rank_one_decompose(
    vectors: Sequence[np.ndarray],
) -> tuple[list[float], list[Reflection]]:
    """Rewrite sum_j |x_j><x_j| as (L/2)·I - (1/2)·sum_j R_j with reflections R_j.

    Every vector must be unit-norm; the returned coefficient/reflection lists
    start with the identity entry.
    """
    vecs = [np.asarray(v, dtype=complex) for v in vectors]
    for v in vecs:
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError("rank-one vectors must be normalized to 1e-12")
    coeffs = [len(vecs) / 2.0] + [-0.5] * len(vecs)
    reflections = [Reflection(None)] + [Reflection(v) for v in vecs]
    return coeffs, reflections


def to_dense(h: PauliSum) -> np.ndarray:
    """Dense matrix of a Pauli sum (oracle; capped at DENSE_QUBIT_CAP qubits)."""
    if h.n > DENSE_QUBIT_CAP:
        raise ValueError(f"dense oracle capped at {DENSE_QUBIT_CAP} qubits, got {h.n}")
    dim = 2 ** h.n
    out = np.zeros((dim, dim), dtype=complex)
    for t in h.terms:
        out += t.coeff * t.string.to_dense()
    return out


def exact_spectrum(h: PauliSum) -> tuple[np.ndarray, np.ndarray]:
    """Full Hermitian eigendecomposition of the dense form (validation oracle).

    Returns ascending eigenvalues and the matching orthonormal eigenvector
    columns.  Rejects inputs whose dense form is not Hermitian to 1e-10.
    """
    mat = to_dense(h)
    if np.max(np.abs(mat - mat.conj().T)) > 1e-10:
        raise ValueError("Hamiltonian is not Hermitian within 1e-10")
    evals, evecs = np.linalg.eigh(mat)
    residual = np.max(np.abs(mat @ evecs - evecs * evals[None, :]))
    if residual > 1e-10:
        raise ValueError(f"eigendecomposition residual {residual:.3e} exceeds 1e-10")
    return evals, evecs


def parse_hamiltonian(text: str) -> PauliSum:
    """Parse `<real-coeff> <pauli-word>` lines; `#` starts a comment.

    The rightmost word character is qubit 0.  Raises HamiltonianParseError
    with the offending line number on malformed input.
    """
    terms: list[PauliTerm] = []
    n: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise HamiltonianParseError(
                f"line {lineno}: expected '<coeff> <word>', got {raw!r}"
            )
        coeff_text, word = fields
        try:
            coeff = float(coeff_text.replace("−", "-"))
        except ValueError:
            raise HamiltonianParseError(
                f"line {lineno}: malformed coefficient {coeff_text!r}"
            ) from None
        if not set(word) <= set("IXYZ"):
            raise HamiltonianParseError(
                f"line {lineno}: illegal Pauli characters in {word!r}"
            )
        if n is None:
            n = len(word)
        elif len(word) != n:
            raise HamiltonianParseError(
                f"line {lineno}: word length {len(word)} != {n} of earlier lines"
            )
        terms.append(PauliTerm(coeff, PauliString.from_word(word)))
    if n is None:
        raise HamiltonianParseError("no terms found")
    return PauliSum.from_terms(n, terms)


def serialize_hamiltonian(h: PauliSum) -> str:
    """Emit the text format, terms sorted lexicographically by Pauli word."""
    lines = []
    for t in sorted(h.terms, key=lambda t: t.string.word):
        if abs(t.coeff.imag) > DROP_TOL:
            raise ValueError(f"cannot serialize complex coefficient {t.coeff}")
        lines.append(f"{t.coeff.real:.17g} {t.string.word}")
    return "\n".join(lines) + ("\n" if lines else "")


@lru_cache(maxsize=None)
def _parity_vector(n: int, mask: int) -> np.ndarray:
    """(-1)^popcount(j & mask) for j in [0, 2^n); cached per (n, mask)."""
    bits = (np.arange(1 << n, dtype=np.int64)[:, None] >> np.arange(n)[None, :]) & 1
    sel = [(mask >> q) & 1 for q in range(n)]
    parity = (bits * np.array(sel)[None, :]).sum(axis=1) & 1
    return np.where(parity == 1, -1.0, 1.0)
