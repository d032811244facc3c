"""Iterative phase estimation over the block-encoded operator.

One recycled phase qubit, largest power first: each iteration applies a
controlled 2^k-th power of the amplified block unitary (by successive
application, by permutation doubling, or by a dense exact oracle), undoes the
previously measured bits with a feedback rotation, and reads one bit from the
unnormalized phase-qubit statistics.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .amplify import AmplifiedOperator, tune_repetitions
from .lcu import LcuOperator, build_lcu
from .pauli import DENSE_QUBIT_CAP, PauliSum, exact_spectrum
from .state import (
    RegisterLayout,
    StateVector,
    _as_conditions,
    apply_hadamard,
    apply_phase_rotation,
    flip_if_nonzero,
    phase_qubit_statistics,
    prepare,
    project_ancilla_zero,
    save_state,
)

STRATEGIES = ("successive", "permutation", "exact_oracle")

DEFAULT_MEM_CAP_QUBITS = 26


class MemoryCapError(RuntimeError):
    """The requested register stack exceeds the configured qubit cap."""


@dataclass
class PeaConfig:
    """Parameters of one estimation run."""

    hamiltonian: PauliSum
    bits: int
    kappa: float
    strategy: str = "successive"
    amplify_m: int | str = 0  # nonnegative int, or "auto" to scan
    eigenvector: str = "exact_ground"  # exact_ground | basis:<i> | file:<path>
    shots: int = 0  # 0 = deterministic readout from exact probabilities
    seed: int | None = None
    mem_cap_qubits: int = DEFAULT_MEM_CAP_QUBITS
    dump_dir: str | None = None

    def __post_init__(self) -> None:
        if self.bits < 1:
            raise ValueError("bit count must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if isinstance(self.amplify_m, str) and self.amplify_m != "auto":
            raise ValueError("amplify_m is a nonnegative int or 'auto'")
        if isinstance(self.amplify_m, int) and self.amplify_m < 0:
            raise ValueError("amplify_m is a nonnegative int or 'auto'")
        if self.shots < 0:
            raise ValueError("shots must be nonnegative")


@dataclass(frozen=True)
class PeaIterationRecord:
    """One iteration: power exponent, extracted bit, raw statistics."""

    k: int
    bit: int
    p0_unnorm: float
    p1_unnorm: float
    feedback_angle: float
    degenerate: bool = False


@dataclass(frozen=True)
class PeaResult:
    records: tuple[PeaIterationRecord, ...]
    phase: float
    energy: float
    exact_energy: float | None
    abs_error: float | None

    @property
    def bits(self) -> str:
        """Measured bits in execution order (least-significant phase bit first)."""
        return "".join(str(r.bit) for r in self.records)


def feedback_angle(prior_bits) -> float:
    """-2*pi*(0.0 b1 b2 ...) with the most recently measured bit first."""
    frac = 0.0
    for t, b in enumerate(prior_bits):
        frac += b / 2.0 ** (t + 2)
    return -2.0 * math.pi * frac


def phase_from_bits(bits_lsb_first) -> float:
    """Reassemble the phase from bits in measurement order (LSB first)."""
    a = len(bits_lsb_first)
    return sum(b * 2.0 ** (i - a) for i, b in enumerate(bits_lsb_first))


def bits_of_phase(phase: float, a: int) -> list[int]:
    """Exact a-bit expansion of phase = x / 2^a, LSB first (test helper)."""
    x = round(phase * 2 ** a)
    if not math.isclose(x, phase * 2 ** a, rel_tol=0, abs_tol=1e-9):
        raise ValueError("phase is not an exact a-bit fraction")
    return [(x >> i) & 1 for i in range(a)]


def recover_energy(phase: float, kappa: float) -> float:
    """kappa * arcsin(Im(e^{-2*pi*i*phase})); valid while |energy|/kappa stays
    well inside the arcsine's principal branch."""
    return kappa * math.asin(cmath.exp(-2j * math.pi * phase).imag)


def _apply_rows_matrix(state: StateVector, mat: np.ndarray, sub_qubits: int, control) -> StateVector:
    """Apply `mat` on the lowest `sub_qubits` bits for control-matching rows."""
    dim = 2 ** sub_qubits
    if mat.shape != (dim, dim):
        raise ValueError("matrix does not match the target subspace")
    conds = _as_conditions(control)
    for q, _ in conds:
        if q < sub_qubits:
            raise ValueError("controls must sit above the matrix subspace")
    block = state.amps.reshape(-1, dim)
    if not conds:
        block[:] = block @ mat.T
        return state
    rows = np.arange(block.shape[0])
    mask = np.ones_like(rows, dtype=bool)
    for q, b in conds:
        mask &= ((rows >> (q - sub_qubits)) & 1) == b
    sel = np.nonzero(mask)[0]
    block[sel] = block[sel] @ mat.T
    return state


def controlled_power_successive(
    state: StateVector,
    amp_op: AmplifiedOperator,
    k: int,
    control=None,
    use_cache: bool | None = None,
) -> StateVector:
    """Apply the amplified step 2^k times, each application controlled.

    When the ancilla+system subspace fits the dense cap, the composite's
    matrix is squared k times instead of being applied sequentially; the two
    routes compute the same linear operator.
    """
    if use_cache is None:
        use_cache = amp_op.cacheable
    if use_cache:
        mat = amp_op.power_matrix(k)
        return _apply_rows_matrix(state, mat, amp_op.lcu.l + amp_op.lcu.n, control)
    for _ in range(2 ** k):
        amp_op.apply(state, control=control)
    return state


def controlled_power_permutation(
    state: StateVector,
    amp_op: AmplifiedOperator,
    k: int,
    control=None,
    use_cache: bool | None = None,
) -> StateVector:
    """Recursive power doubling with conditional-flip interleaving.

    Level j applies the level-(j-1) operator twice around a flip of doubling
    qubit j conditioned on the ancilla+lower-doubling bits being nonzero; that
    evacuates leaked amplitude, so the retained block squares exactly.
    """
    layout = state.layout
    if layout.doubling < k:
        raise ValueError(f"doubling register has {layout.doubling} qubits, need {k}")
    if use_cache is None:
        use_cache = amp_op.cacheable
    dq = layout.doubling_qubits
    anc = layout.ancilla_qubits
    sub = amp_op.lcu.l + amp_op.lcu.n

    def base() -> None:
        if use_cache:
            _apply_rows_matrix(state, amp_op.step_matrix(), sub, control)
        else:
            amp_op.apply(state, control=control)

    def level(j: int) -> None:
        if j == 0:
            base()
            return
        level(j - 1)
        flip_if_nonzero(state, dq[j - 1], anc + dq[: j - 1], control=control)
        level(j - 1)

    level(k)
    return state


@lru_cache(maxsize=8)
def _spectrum_cached(h: PauliSum) -> tuple[np.ndarray, np.ndarray]:
    return exact_spectrum(h)


def exact_power_matrix(h: PauliSum, kappa: float, s: float, k: int) -> np.ndarray:
    """Dense ((I - iH/kappa)/s)^(2^k) via eigendecomposition (validation path).

    Contraction is allowed: moduli below the floating-point floor underflow
    to zero, mirroring the projection bookkeeping of the unitary strategies.
    """
    if h.n > DENSE_QUBIT_CAP:
        raise ValueError(f"exact oracle capped at {DENSE_QUBIT_CAP} system qubits")
    evals, evecs = _spectrum_cached(h)
    w = (1.0 - 1j * evals / kappa) / s
    power = 2.0 ** k
    mags = np.exp(power * np.log(np.abs(w)))
    angles = np.remainder(power * np.angle(w), 2.0 * math.pi)
    diag = mags * np.exp(1j * angles)
    return (evecs * diag[None, :]) @ evecs.conj().T


def controlled_power_exact(
    state: StateVector, h: PauliSum, kappa: float, s: float, k: int, control=None
) -> StateVector:
    """Apply the exact dense block power to the system register (controlled)."""
    mat = exact_power_matrix(h, kappa, s, k)
    return _apply_rows_matrix(state, mat, state.layout.system, control)


def resolve_eigenvector(config: PeaConfig) -> np.ndarray:
    """Materialize the configured system input state as a normalized vector."""
    spec = config.eigenvector
    n = config.hamiltonian.n
    dim = 2 ** n
    if spec == "exact_ground":
        if n > DENSE_QUBIT_CAP:
            raise ValueError("exact_ground eigenvector needs the dense oracle (n <= cap)")
        _, evecs = _spectrum_cached(config.hamiltonian)
        return np.asarray(evecs[:, 0], dtype=complex)
    if spec.startswith("basis:"):
        idx = int(spec.split(":", 1)[1])
        if not 0 <= idx < dim:
            raise ValueError(f"basis index {idx} out of range for {n} qubits")
        vec = np.zeros(dim, dtype=complex)
        vec[idx] = 1.0
        return vec
    if spec.startswith("file:"):
        path = spec.split(":", 1)[1]
        data = np.loadtxt(path, ndmin=2, comments="#")
        if data.shape[1] == 1:
            vec = data[:, 0].astype(complex)
        elif data.shape[1] == 2:
            vec = data[:, 0] + 1j * data[:, 1]
        else:
            raise ValueError("eigenvector file must have 1 or 2 columns")
        if vec.size != dim:
            raise ValueError(
                f"eigenvector file dimension {vec.size} != system dimension {dim}"
            )
        nrm = np.linalg.norm(vec)
        if nrm == 0:
            raise ValueError("eigenvector file holds a zero vector")
        return vec / nrm
    raise ValueError(f"unknown eigenvector source {spec!r}")


def _required_qubits(config: PeaConfig, lcu: LcuOperator) -> int:
    if config.strategy == "successive":
        return 1 + lcu.l + lcu.n
    if config.strategy == "permutation":
        return config.bits + lcu.l + lcu.n  # 1 phase + (bits-1) doubling
    return 1 + lcu.n


def run_ipea(config: PeaConfig) -> PeaResult:
    """Run the full estimation loop and recover the energy.

    Iterates k = bits-1 down to 0 (least-significant phase bit first):
    prepare |0..0>|phi>, Hadamard the phase qubit, apply the controlled
    2^k-th power, rotate by the feedback angle, Hadamard again, project the
    ancilla+doubling registers to zero, and take the bit from the
    unnormalized phase-qubit statistics.
    """
    h = config.hamiltonian
    lcu = build_lcu(h, config.kappa)
    need = _required_qubits(config, lcu)
    if need > config.mem_cap_qubits:
        raise MemoryCapError(
            f"{config.strategy} run needs {need} qubits, cap is {config.mem_cap_qubits}"
        )
    vec = resolve_eigenvector(config)

    if config.amplify_m == "auto":
        m = 0 if config.strategy == "exact_oracle" else tune_repetitions(lcu, vec)
    else:
        m = int(config.amplify_m)
    amp_op = AmplifiedOperator(lcu, m)

    rng = np.random.default_rng(config.seed) if config.shots else None
    a = config.bits
    bits_so_far: list[int] = []
    records: list[PeaIterationRecord] = []
    for i in range(a):
        k = a - 1 - i
        if config.strategy == "successive":
            layout = RegisterLayout(phase=1, doubling=0, ancilla=lcu.l, system=lcu.n)
        elif config.strategy == "permutation":
            layout = RegisterLayout(phase=1, doubling=k, ancilla=lcu.l, system=lcu.n)
        else:
            layout = RegisterLayout(phase=1, doubling=0, ancilla=0, system=lcu.n)
        st = prepare(layout, vec)
        pq = layout.phase_qubit
        apply_hadamard(st, pq)
        control = (pq, 1)
        if config.strategy == "successive":
            controlled_power_successive(st, amp_op, k, control=control)
        elif config.strategy == "permutation":
            controlled_power_permutation(st, amp_op, k, control=control)
        else:
            controlled_power_exact(st, h, config.kappa, lcu.s, k, control=control)
        angle = feedback_angle(list(reversed(bits_so_far)))
        apply_phase_rotation(st, pq, angle)
        apply_hadamard(st, pq)
        project_ancilla_zero(st)
        p0, p1 = phase_qubit_statistics(st)

        degenerate = p0 == p1
        if rng is not None:
            total = p0 + p1
            prob1 = 0.5 if total == 0 else p1 / total
            ones = int(rng.binomial(config.shots, prob1))
            bit = 1 if 2 * ones > config.shots else 0
        else:
            bit = 1 if p1 > p0 else 0
        if config.dump_dir is not None:
            save_state(st, Path(config.dump_dir) / f"state_iter{i + 1:02d}_k{k:02d}.bin")
        records.append(
            PeaIterationRecord(
                k=k, bit=bit, p0_unnorm=p0, p1_unnorm=p1,
                feedback_angle=angle, degenerate=degenerate,
            )
        )
        bits_so_far.append(bit)

    phase = phase_from_bits(bits_so_far)
    energy = recover_energy(phase, config.kappa)
    if h.n <= DENSE_QUBIT_CAP:
        exact_energy = float(_spectrum_cached(h)[0][0])
        abs_error = abs(energy - exact_energy)
    else:
        exact_energy = None
        abs_error = None
    return PeaResult(
        records=tuple(records),
        phase=phase,
        energy=energy,
        exact_energy=exact_energy,
        abs_error=abs_error,
    )
