"""Matrix-free statevector kernels.

A state lives in a flat complex array indexed by packed register bits:
system occupies the least-significant bits, then the ancilla (select index)
register, then the power-doubling stack, then an optional phase qubit as the
most significant bit.  Every primitive below is a single O(2^m) pass of
strided numpy work; nothing here ever materializes a full-space matrix.

A StateVector is owned by one logical task while it is being mutated;
primitives mutate in place and return the state for chaining.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliTerm, _parity_vector

Control = tuple[int, int]  # (qubit index, required bit value)

_DUMP_MAGIC = b"LCUPEA\x00"
_HEADER_LEN = 16


@dataclass(frozen=True)
class RegisterLayout:
    """Qubit counts per register: phase (0/1), doubling, ancilla, system."""

    phase: int = 0
    doubling: int = 0
    ancilla: int = 0
    system: int = 1

    def __post_init__(self) -> None:
        if self.phase not in (0, 1):
            raise ValueError("phase register is 0 or 1 qubits")
        if self.doubling < 0 or self.ancilla < 0 or self.system < 1:
            raise ValueError("bad register widths")

    @property
    def total(self) -> int:
        return self.phase + self.doubling + self.ancilla + self.system

    @property
    def system_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.system))

    @property
    def ancilla_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.system, self.system + self.ancilla))

    @property
    def doubling_qubits(self) -> tuple[int, ...]:
        a = self.system + self.ancilla
        return tuple(range(a, a + self.doubling))

    @property
    def phase_qubit(self) -> int:
        if not self.phase:
            raise ValueError("layout has no phase qubit")
        return self.total - 1

    def axis(self, qubit: int) -> int:
        """Tensor axis of a qubit when amps is reshaped to (2,)*total."""
        if not 0 <= qubit < self.total:
            raise ValueError(f"qubit {qubit} outside layout of {self.total}")
        return self.total - 1 - qubit


@dataclass
class StateVector:
    """Amplitudes over a RegisterLayout; `normalized` is cleared by projection."""

    layout: RegisterLayout
    amps: np.ndarray
    normalized: bool = True

    def view(self) -> np.ndarray:
        return self.amps.reshape((2,) * self.layout.total)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> "StateVector":
        return StateVector(self.layout, self.amps.copy(), self.normalized)


def prepare(layout: RegisterLayout, system_state: np.ndarray) -> StateVector:
    """All non-system registers in |0>, the system register in `system_state`."""
    vec = np.asarray(system_state, dtype=complex).reshape(-1)
    if vec.size != 2 ** layout.system:
        raise ValueError(f"system state has dim {vec.size}, expected {2 ** layout.system}")
    if abs(np.linalg.norm(vec) - 1.0) > 1e-10:
        raise ValueError("system state must be normalized to 1e-10")
    amps = np.zeros(2 ** layout.total, dtype=complex)
    amps[: vec.size] = vec
    return StateVector(layout, amps)


def _indexer(layout: RegisterLayout, conditions: list[Control]) -> tuple:
    """Axis indexer pinning qubits to bit values, keeping all axes (size-1 slices)."""
    idx: list[slice] = [slice(None)] * layout.total
    seen = set()
    for qubit, bit in conditions:
        if bit not in (0, 1):
            raise ValueError(f"control bit must be 0/1, got {bit}")
        if qubit in seen:
            raise ValueError(f"duplicate condition on qubit {qubit}")
        seen.add(qubit)
        idx[layout.axis(qubit)] = slice(bit, bit + 1)
    return tuple(idx)


def _as_conditions(control) -> list[Control]:
    if control is None:
        return []
    if isinstance(control, tuple) and len(control) == 2 and isinstance(control[0], int):
        return [control]
    return list(control)


def apply_pauli_term(state: StateVector, term: PauliTerm, control=None) -> StateVector:
    """Apply a unit-modulus-coefficient Pauli term to the system register.

    `control` is an optional (qubit, bit) pair or collection of them; control
    qubits must lie outside the system register.  One pass over the selected
    amplitudes: bit flips for X/Y, sign/phase factors for Y/Z.
    """
    layout = state.layout
    if abs(abs(term.coeff) - 1.0) > 1e-12:
        raise ValueError(f"Pauli term coefficient must be unit modulus, got {term.coeff}")
    if term.n != layout.system:
        raise ValueError(f"term on {term.n} qubits, system register has {layout.system}")
    conds = _as_conditions(control)
    for q, _ in conds:
        if q < layout.system:
            raise ValueError("controls must reference qubits outside the system register")

    flip, phase_mask, y_count = term.string.masks()
    scalar = complex(term.coeff) * (1j ** y_count)
    n = layout.system
    view = state.view()
    idx = _indexer(layout, conds)
    sub = view[idx]
    work = np.ascontiguousarray(sub).reshape(-1, 2 ** n)
    if flip or phase_mask:
        perm = np.arange(2 ** n) ^ flip
        phases = _parity_vector(n, phase_mask)
        work = scalar * (phases[perm])[None, :] * work[:, perm]
    else:
        work = scalar * work
    view[idx] = work.reshape(sub.shape)
    return state


def apply_hadamard(state: StateVector, qubit: int, control=None) -> StateVector:
    """Hadamard on one qubit (used on the phase qubit by the estimation loop)."""
    layout = state.layout
    view = state.view()
    idx = list(_indexer(layout, _as_conditions(control)))
    ax = layout.axis(qubit)
    if idx[ax] != slice(None):
        raise ValueError("cannot control on the target qubit")
    i0, i1 = list(idx), list(idx)
    i0[ax] = slice(0, 1)
    i1[ax] = slice(1, 2)
    a0 = view[tuple(i0)].copy()
    a1 = view[tuple(i1)].copy()
    rt = 1.0 / np.sqrt(2.0)
    view[tuple(i0)] = rt * (a0 + a1)
    view[tuple(i1)] = rt * (a0 - a1)
    return state


def apply_phase_rotation(state: StateVector, qubit: int, angle: float, control=None) -> StateVector:
    """diag(1, e^{i angle}) on one qubit (the feedback rotation primitive)."""
    layout = state.layout
    conds = _as_conditions(control) + [(qubit, 1)]
    view = state.view()
    view[_indexer(layout, conds)] *= np.exp(1j * angle)
    return state


def reflect_about_zero(state: StateVector, qubits, control=None) -> StateVector:
    """Fix amplitudes whose selected bits are all zero; negate every other one."""
    qubits = tuple(qubits)
    if not qubits:
        raise ValueError("reflection register selection is empty")
    layout = state.layout
    conds = _as_conditions(control)
    if set(q for q, _ in conds) & set(qubits):
        raise ValueError("control overlaps the reflection register")
    view = state.view()
    idx = _indexer(layout, conds)
    view[idx] *= -1.0
    zero = _indexer(layout, conds + [(q, 0) for q in qubits])
    view[zero] *= -1.0
    return state


def flip_if_nonzero(state: StateVector, flip_qubit: int, watched, control=None) -> StateVector:
    """X on `flip_qubit` wherever the watched bits are not all zero; self-inverse."""
    watched = tuple(watched)
    if flip_qubit in watched:
        raise ValueError("flip qubit cannot be in the watched set")
    layout = state.layout
    conds = _as_conditions(control)
    view = state.view()
    idx = _indexer(layout, conds)
    sub = view[idx]
    flipped = np.flip(sub, axis=layout.axis(flip_qubit)).copy()
    zero_rel = _zero_relative(layout, conds, watched)
    flipped[zero_rel] = sub[zero_rel]
    view[idx] = flipped
    return state


def _zero_relative(layout: RegisterLayout, conds: list[Control], watched) -> tuple:
    """Indexer for watched-bits-all-zero inside an already-sliced sub-view."""
    idx: list[slice] = [slice(None)] * layout.total
    pinned = {layout.axis(q) for q, _ in conds}
    for q in watched:
        ax = layout.axis(q)
        if ax in pinned:
            raise ValueError("control overlaps the watched set")
        idx[ax] = slice(0, 1)
    return tuple(idx)


def project_ancilla_zero(state: StateVector) -> tuple[StateVector, float]:
    """Zero every amplitude with a nonzero ancilla or doubling bit.

    Returns the (unnormalized) state and the 2-norm of the surviving
    component; the squared norm is the unnormalized success probability.
    """
    layout = state.layout
    qubits = layout.ancilla_qubits + layout.doubling_qubits
    state.normalized = False
    if not qubits:
        return state, state.norm()
    view = state.view()
    zero = _indexer(layout, [(q, 0) for q in qubits])
    kept_block = view[zero].copy()
    kept_norm = float(np.linalg.norm(kept_block))
    state.amps[:] = 0.0
    view[zero] = kept_block
    return state, kept_norm


def phase_qubit_statistics(state: StateVector) -> tuple[float, float]:
    """Summed |amp|^2 with phase bit 0 vs 1 (not renormalized after projection)."""
    layout = state.layout
    if not layout.phase:
        raise ValueError("layout has no phase qubit")
    halves = state.amps.reshape(2, -1)
    p0 = float(np.sum(np.abs(halves[0]) ** 2))
    p1 = float(np.sum(np.abs(halves[1]) ** 2))
    return p0, p1


def save_state(state: StateVector, path) -> None:
    """Debug dump: 16-byte header then little-endian (re, im) float64 pairs."""
    header = _DUMP_MAGIC + struct.pack("<H", state.layout.total)
    header += b"\x00" * (_HEADER_LEN - len(header))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(state.amps, dtype="<c16").tobytes())


def load_state(path) -> tuple[int, np.ndarray]:
    """Read a dump back as (qubit count, amplitudes); layout is not stored."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER_LEN)
        if len(header) != _HEADER_LEN or not header.startswith(_DUMP_MAGIC):
            raise ValueError("not a state dump (bad header)")
        (m,) = struct.unpack("<H", header[len(_DUMP_MAGIC): len(_DUMP_MAGIC) + 2])
        amps = np.frombuffer(fh.read(), dtype="<c16").astype(complex)
    if amps.size != 1 << m:
        raise ValueError(f"dump holds {amps.size} amplitudes, header says {1 << m}")
    return m, amps
