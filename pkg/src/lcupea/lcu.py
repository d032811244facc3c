"""Block encoding of the shifted operator I - iH/kappa as a weighted sum of
unitaries: weight preparation (a Householder-completed state-prep unitary),
the select dispatch, their sandwich (the block unitary), kappa selection,
block extraction, and the qubit/gate resource estimator.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .pauli import (
    DENSE_QUBIT_CAP,
    PauliString,
    PauliSum,
    PauliTerm,
    to_dense,
)
from .state import (
    RegisterLayout,
    StateVector,
    _as_conditions,
    apply_pauli_term,
    prepare,
)

# Full-space dense helpers (block extraction, cached composites) stay below
# this total dimension; larger systems have no dense code path at all.
DENSE_DIM_CAP_QUBITS = 12


@dataclass(frozen=True)
class LcuOperator:
    """Weighted-unitary form of I - iH/kappa.

    betas are nonnegative weights (index 0 is the added identity term), terms
    are the matching unit-modulus-coefficient Pauli terms, s = sum(betas) is
    the encoding normalization, l the ancilla width, n the system width.
    """

    kappa: float
    betas: tuple[float, ...]
    terms: tuple[PauliTerm, ...]
    s: float
    l: int
    n: int

    def __post_init__(self) -> None:
        if len(self.betas) != len(self.terms):
            raise ValueError("betas and terms lengths differ")
        if any(b < 0 for b in self.betas):
            raise ValueError("betas must be nonnegative")

    def shifted_dense(self) -> np.ndarray:
        """Dense I - iH/kappa reconstructed from the weighted terms (oracle)."""
        dim = 2 ** self.n
        out = np.zeros((dim, dim), dtype=complex)
        for b, t in zip(self.betas, self.terms):
            out += b * t.to_dense()
        return out

    def prepare_vector(self, width: int | None = None) -> np.ndarray:
        """First column of the weight-preparation unitary: sqrt(beta_l / s)."""
        width = self.l if width is None else width
        if width < self.l:
            raise ValueError(f"ancilla width {width} below required {self.l}")
        if self.s <= 0:
            raise ValueError("degenerate weights: s = 0")
        w = np.zeros(2 ** width)
        w[: len(self.betas)] = np.sqrt(np.array(self.betas) / self.s)
        return w


def choose_kappa(h: PauliSum, factor: float = 10.0) -> float:
    """Scaling constant: factor times the induced 1-norm of the dense form.

    For systems above the dense-oracle cap the coefficient 1-norm is used as
    an upper bound instead (flagged with a warning).
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if not h.terms:
        raise ValueError("empty Hamiltonian has no scale")
    if h.n <= DENSE_QUBIT_CAP:
        norm1 = float(np.max(np.sum(np.abs(to_dense(h)), axis=0)))
    else:
        warnings.warn(
            "system too large for the dense induced 1-norm; "
            "using the coefficient 1-norm upper bound",
            RuntimeWarning,
            stacklevel=2,
        )
        norm1 = h.coefficient_norm()
    return factor * norm1


def build_lcu(h: PauliSum, kappa: float) -> LcuOperator:
    """Weighted-unitary terms for I - iH/kappa.

    Term 0 is the identity with weight 1; each Hamiltonian term alpha*P
    contributes weight |alpha|/kappa with the phase -i*alpha/|alpha| absorbed
    into the unitary, so every weight is nonnegative.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if h.n <= DENSE_QUBIT_CAP and h.terms:
        lam_max = float(np.max(np.abs(np.linalg.eigvalsh(to_dense(h)))))
        if kappa <= lam_max:
            warnings.warn(
                f"kappa={kappa} does not dominate the spectral radius {lam_max:.4g}; "
                "phase readout may wrap",
                RuntimeWarning,
                stacklevel=2,
            )
    betas = [1.0]
    terms = [PauliTerm(1.0, PauliString.identity(h.n))]
    for t in h.terms:
        mag = abs(t.coeff)
        betas.append(mag / kappa)
        terms.append(PauliTerm(-1j * t.coeff / mag, t.string))
    count = len(terms)
    width = (count - 1).bit_length()
    return LcuOperator(
        kappa=kappa,
        betas=tuple(betas),
        terms=tuple(terms),
        s=float(sum(betas)),
        l=width,
        n=h.n,
    )


def _ancilla_rows(layout: RegisterLayout, conds) -> np.ndarray | None:
    """Row selector over the registers above the ancilla (phase + doubling)."""
    high = [(q, b) for q, b in conds]
    base = layout.system + layout.ancilla
    for q, _ in high:
        if q < base:
            raise ValueError("controls must sit above the ancilla register")
    if not high:
        return None
    rows = np.arange(2 ** (layout.total - base))
    mask = np.ones_like(rows, dtype=bool)
    for q, b in high:
        mask &= ((rows >> (q - base)) & 1) == b
    return np.nonzero(mask)[0]


def apply_prepare(
    state: StateVector, lcu: LcuOperator, inverse: bool = False, control=None
) -> StateVector:
    """Weight-preparation unitary on the ancilla register (W|0> = sqrt(beta/s)).

    W is completed from its first column by a Householder reflection, which
    makes it real symmetric; the inverse is therefore the same reflection.
    """
    layout = state.layout
    if layout.ancilla < lcu.l:
        raise ValueError(f"ancilla register {layout.ancilla} narrower than {lcu.l}")
    del inverse  # Householder completion is an involution
    if layout.ancilla == 0:
        return state
    w = lcu.prepare_vector(layout.ancilla)
    e0 = np.zeros_like(w)
    e0[0] = 1.0
    axis = e0 - w
    nrm = np.linalg.norm(axis)
    if nrm < 1e-14:
        return state  # weights already concentrated on |0>
    u = (axis / nrm).astype(complex)

    conds = _as_conditions(control)
    rows = _ancilla_rows(layout, conds)
    block = state.amps.reshape(-1, 2 ** layout.ancilla, 2 ** layout.system)
    if rows is None:
        overlap = np.tensordot(u.conj(), block, axes=([0], [1]))
        block -= 2.0 * u[None, :, None] * overlap[:, None, :]
    else:
        sel = block[rows]
        overlap = np.tensordot(u.conj(), sel, axes=([0], [1]))
        block[rows] = sel - 2.0 * u[None, :, None] * overlap[:, None, :]
    return state


def apply_select(
    state: StateVector, lcu: LcuOperator, control=None, adjoint: bool = False
) -> StateVector:
    """Dispatch unitary: ancilla value l applies the l-th weighted unitary
    to the system register; values beyond the term list act as identity."""
    layout = state.layout
    if layout.ancilla != lcu.l:
        raise ValueError(f"ancilla register must be exactly {lcu.l} qubits")
    outer = _as_conditions(control)
    for j, term in enumerate(lcu.terms):
        if term.string.is_identity and abs(term.coeff - 1.0) < 1e-15:
            continue
        t = PauliTerm(term.coeff.conjugate(), term.string) if adjoint else term
        conds = [(layout.ancilla_qubits[b], (j >> b) & 1) for b in range(lcu.l)]
        apply_pauli_term(state, t, control=conds + outer)
    return state


def apply_block_unitary(
    state: StateVector, lcu: LcuOperator, control=None, adjoint: bool = False
) -> StateVector:
    """The encoding sandwich prepare-adjoint . select . prepare.

    On an ancilla-zero input the ancilla-zero output component equals
    (I - iH/kappa)/s applied to the system register.
    """
    apply_prepare(state, lcu, inverse=adjoint, control=control)
    apply_select(state, lcu, control=control, adjoint=adjoint)
    apply_prepare(state, lcu, inverse=not adjoint, control=control)
    return state


def extract_block(
    apply_op: Callable[[StateVector], StateVector], layout: RegisterLayout
) -> np.ndarray:
    """Ancilla-zero corner of a composed operator, column by column.

    Column j is the all-registers-zero component of op|0...0>|e_j>; used by
    every block-exactness test.  Capped at DENSE_DIM_CAP_QUBITS total qubits.
    """
    if layout.phase:
        raise ValueError("extract_block expects a layout without a phase qubit")
    if layout.total > DENSE_DIM_CAP_QUBITS:
        raise ValueError(
            f"extract_block capped at {DENSE_DIM_CAP_QUBITS} qubits, got {layout.total}"
        )
    dim = 2 ** layout.system
    out = np.zeros((dim, dim), dtype=complex)
    basis = np.zeros(dim, dtype=complex)
    for j in range(dim):
        basis[:] = 0.0
        basis[j] = 1.0
        st = apply_op(prepare(layout, basis))
        out[:, j] = st.amps[:dim]
    return out


def prepare_matrix(lcu: LcuOperator, width: int | None = None) -> np.ndarray:
    """Dense weight-preparation unitary (oracle / cached-composite building block)."""
    width = lcu.l if width is None else width
    dim = 2 ** width
    w = lcu.prepare_vector(width)
    e0 = np.zeros_like(w)
    e0[0] = 1.0
    axis = e0 - w
    nrm = np.linalg.norm(axis)
    if nrm < 1e-14:
        return np.eye(dim, dtype=complex)
    u = (axis / nrm)[:, None]
    return np.eye(dim, dtype=complex) - 2.0 * (u @ u.T)


def select_matrix(lcu: LcuOperator) -> np.ndarray:
    """Dense select dispatch: block-diagonal in the ancilla index."""
    if lcu.l + lcu.n > DENSE_DIM_CAP_QUBITS:
        raise ValueError("select matrix exceeds the dense cap")
    sys_dim = 2 ** lcu.n
    blocks = []
    for j in range(2 ** lcu.l):
        if j < len(lcu.terms):
            blocks.append(lcu.terms[j].to_dense())
        else:
            blocks.append(np.eye(sys_dim, dtype=complex))
    out = np.zeros((sys_dim * 2 ** lcu.l,) * 2, dtype=complex)
    for j, b in enumerate(blocks):
        out[j * sys_dim: (j + 1) * sys_dim, j * sys_dim: (j + 1) * sys_dim] = b
    return out


def block_unitary_matrix(lcu: LcuOperator) -> np.ndarray:
    """Dense encoding sandwich on ancilla (x) system (most significant first)."""
    if lcu.l + lcu.n > DENSE_DIM_CAP_QUBITS:
        raise ValueError("block unitary matrix exceeds the dense cap")
    eye = np.eye(2 ** lcu.n, dtype=complex)
    b = np.kron(prepare_matrix(lcu), eye)
    return b.conj().T @ select_matrix(lcu) @ b


@dataclass(frozen=True)
class ResourceReport:
    qubits: int
    op_count_bound: int


def estimate_resources(n: int, L: int, a: int, strategy: str) -> ResourceReport:
    """Qubit and operation-count formulas for the two powering strategies.

    successive: n + 1 + ceil(log2(L+1)) qubits; permutation: a + n +
    ceil(log2(L+1)).  The operation bound is 2^a * n * L (constant factor 1).
    """
    if n < 1 or L < 1 or a < 1:
        raise ValueError("n, L, a must all be >= 1")
    width = L.bit_length()  # ceil(log2(L+1))
    if strategy == "successive":
        qubits = n + 1 + width
    elif strategy == "permutation":
        qubits = a + n + width
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return ResourceReport(qubits=qubits, op_count_bound=(2 ** a) * n * L)
