"""Statevector kernels against generic dense embeddings and brute-force scans."""
import numpy as np
import pytest

from lcupea import (
    PauliString,
    PauliTerm,
    RegisterLayout,
    StateVector,
    apply_hadamard,
    apply_pauli_term,
    apply_phase_rotation,
    flip_if_nonzero,
    phase_qubit_statistics,
    prepare,
    project_ancilla_zero,
    reflect_about_zero,
)
from lcupea.state import load_state, save_state

from oracles import dense_word, embed, random_state, random_word

H2x2 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def _state(layout, amps):
    return StateVector(layout, np.asarray(amps, dtype=complex))


def _rand(layout, seed):
    rng = np.random.default_rng(seed)
    return StateVector(layout, random_state(rng, layout.total))


class TestPrepare:
    def test_single_qubit(self):
        st = prepare(RegisterLayout(0, 0, 0, 1), [1.0, 0.0])
        assert np.array_equal(st.amps, [1.0, 0.0])

    def test_index_arithmetic_with_registers(self):
        st = prepare(RegisterLayout(1, 0, 2, 1), [0.0, 1.0])
        nz = np.nonzero(st.amps)[0]
        assert list(nz) == [1]  # phase=0, ancilla=00, system=1

    def test_norm_preserved(self):
        rng = np.random.default_rng(3)
        vec = random_state(rng, 2)
        st = prepare(RegisterLayout(1, 1, 1, 2), vec)
        assert st.norm() == pytest.approx(1.0, abs=1e-12)

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError):
            prepare(RegisterLayout(0, 0, 0, 1), [1.0, 1.0])


class TestPauliTermKernel:
    def test_bit_flip(self):
        st = prepare(RegisterLayout(0, 0, 0, 1), [1.0, 0.0])
        apply_pauli_term(st, PauliTerm(1.0, PauliString.from_word("X")))
        assert np.allclose(st.amps, [0.0, 1.0])

    def test_controlled_phase_bookkeeping(self):
        # (|0> + |1>)_phase x |1>_sys, then (-i)Z on the system controlled on
        # phase=1: the (phase=1, sys=1) amplitude picks up (-i)(-1) = +i.
        layout = RegisterLayout(1, 0, 0, 1)
        st = _state(layout, [0.0, 1 / np.sqrt(2), 0.0, 1 / np.sqrt(2)])
        apply_pauli_term(
            st, PauliTerm(-1j, PauliString.from_word("Z")), control=(layout.phase_qubit, 1)
        )
        assert st.amps[1] == pytest.approx(1 / np.sqrt(2))
        assert st.amps[3] == pytest.approx(1j / np.sqrt(2))

    def test_random_term_matches_dense_oracle(self):
        rng = np.random.default_rng(23)
        layout = RegisterLayout(0, 0, 0, 3)
        for _ in range(25):
            word = random_word(rng, 3)
            coeff = np.exp(2j * np.pi * rng.uniform())
            st = _rand(layout, int(rng.integers(1 << 30)))
            ref = dense_word(word) @ st.amps * coeff
            apply_pauli_term(st, PauliTerm(coeff, PauliString.from_word(word)))
            assert np.max(np.abs(st.amps - ref)) < 1e-14

    def test_controlled_dense_equivalence(self):
        rng = np.random.default_rng(29)
        layout = RegisterLayout(1, 1, 1, 2)
        m = layout.total
        for _ in range(15):
            word = random_word(rng, 2)
            conds = [(int(q), int(rng.integers(2))) for q in
                     rng.choice(list(range(2, m)), size=int(rng.integers(3)), replace=False)]
            st = _rand(layout, int(rng.integers(1 << 30)))
            full = embed(dense_word(word), [0, 1], m, conditions=conds)
            ref = full @ st.amps
            apply_pauli_term(st, PauliTerm(1.0, PauliString.from_word(word)), control=conds)
            assert np.max(np.abs(st.amps - ref)) < 1e-12

    def test_non_unit_coefficient_rejected(self):
        st = prepare(RegisterLayout(0, 0, 0, 1), [1.0, 0.0])
        with pytest.raises(ValueError):
            apply_pauli_term(st, PauliTerm(0.5, PauliString.from_word("X")))

    def test_control_inside_system_rejected(self):
        st = prepare(RegisterLayout(0, 0, 1, 2), [1, 0, 0, 0])
        with pytest.raises(ValueError):
            apply_pauli_term(st, PauliTerm(1.0, PauliString.from_word("XX")), control=(1, 1))

    def test_unitarity_on_random_states(self):
        rng = np.random.default_rng(31)
        for m_sys in (2, 4):
            layout = RegisterLayout(1, 2, 3, m_sys)  # up to 10 qubits total
            st = _rand(layout, int(rng.integers(1 << 30)))
            apply_pauli_term(st, PauliTerm(1j, PauliString.from_word(random_word(rng, m_sys))))
            assert st.norm() == pytest.approx(1.0, abs=1e-12)


class TestReflect:
    def test_single_qubit_sign_pattern(self):
        layout = RegisterLayout(0, 0, 1, 1)
        a, b = 0.6, 0.8
        st = _state(layout, [a, 0.0, b, 0.0])  # ancilla qubit is bit 1
        reflect_about_zero(st, layout.ancilla_qubits)
        assert np.allclose(st.amps, [a, 0.0, -b, 0.0])

    def test_involution(self):
        layout = RegisterLayout(1, 1, 2, 2)
        st = _rand(layout, 7)
        ref = st.amps.copy()
        reflect_about_zero(st, layout.ancilla_qubits)
        reflect_about_zero(st, layout.ancilla_qubits)
        assert np.max(np.abs(st.amps - ref)) < 1e-15

    def test_two_qubit_register_dense(self):
        layout = RegisterLayout(0, 0, 2, 1)
        st = _rand(layout, 9)
        full = embed(np.diag([1.0, -1.0, -1.0, -1.0]).astype(complex),
                     layout.ancilla_qubits, layout.total)
        ref = full @ st.amps
        reflect_about_zero(st, layout.ancilla_qubits)
        assert np.max(np.abs(st.amps - ref)) < 1e-12

    def test_empty_selection_rejected(self):
        st = prepare(RegisterLayout(0, 0, 0, 1), [1.0, 0.0])
        with pytest.raises(ValueError):
            reflect_about_zero(st, ())


class TestFlipIfNonzero:
    def test_marks_nonzero_watched(self):
        layout = RegisterLayout(0, 1, 1, 1)
        st = _state(layout, np.zeros(8))
        st.amps[0b010] = 1.0  # doubling=0 ancilla=1 system=0
        flip_if_nonzero(st, layout.doubling_qubits[0], layout.ancilla_qubits)
        assert st.amps[0b110] == 1.0 and st.amps[0b010] == 0.0

    def test_all_zero_fixed_point(self):
        layout = RegisterLayout(0, 1, 1, 1)
        st = _state(layout, np.zeros(8))
        st.amps[0] = 1.0
        flip_if_nonzero(st, layout.doubling_qubits[0], layout.ancilla_qubits)
        assert st.amps[0] == 1.0

    def test_self_inverse(self):
        layout = RegisterLayout(1, 2, 2, 1)
        st = _rand(layout, 13)
        ref = st.amps.copy()
        args = (layout.doubling_qubits[1], layout.ancilla_qubits + layout.doubling_qubits[:1])
        flip_if_nonzero(st, *args)
        flip_if_nonzero(st, *args)
        assert np.max(np.abs(st.amps - ref)) < 1e-15

    def test_matches_block_swap_permutation_up_to_relabeling(self):
        # On (flip, watched) = 2 qubits our conditional flip equals the
        # textbook 4-block swap conjugated by a CNOT relabeling.
        layout = RegisterLayout(0, 1, 1, 1)
        m = layout.total
        ours = np.zeros((8, 8), dtype=complex)
        for col in range(8):
            st = _state(layout, np.eye(8)[col])
            flip_if_nonzero(st, layout.doubling_qubits[0], layout.ancilla_qubits)
            ours[:, col] = st.amps
        eye2 = np.eye(2, dtype=complex)
        block_swap = np.zeros((4, 4), dtype=complex)  # swaps (0,1) <-> (1,0)
        block_swap[0, 0] = block_swap[3, 3] = 1.0
        block_swap[1, 2] = block_swap[2, 1] = 1.0
        cnot = np.zeros((4, 4), dtype=complex)  # flips watched bit when flip bit is 1
        cnot[0, 0] = cnot[1, 1] = 1.0
        cnot[2, 3] = cnot[3, 2] = 1.0
        relabeled = cnot @ block_swap @ cnot
        full = embed(relabeled, (layout.ancilla_qubits[0], layout.doubling_qubits[0]), m)
        assert np.max(np.abs(ours - full)) < 1e-15

    def test_overlap_rejected(self):
        layout = RegisterLayout(0, 1, 1, 1)
        st = _state(layout, np.zeros(8))
        st.amps[0] = 1.0
        with pytest.raises(ValueError):
            flip_if_nonzero(st, layout.doubling_qubits[0], layout.doubling_qubits)

    def test_controlled_flip_dense_equivalence(self):
        layout = RegisterLayout(1, 2, 1, 1)
        st = _rand(layout, 43)
        flip_q = layout.doubling_qubits[1]
        watched = layout.ancilla_qubits + layout.doubling_qubits[:1]
        ctrl = (layout.phase_qubit, 1)
        # 3-qubit permutation on (watched0, watched1, flip): flip the top bit
        # when either watched bit is set
        qubits = (watched[0], watched[1], flip_q)
        op = np.zeros((8, 8), dtype=complex)
        for col in range(8):
            row = col ^ (0b100 if (col & 0b011) else 0)
            op[row, col] = 1.0
        full = embed(op, qubits, layout.total, conditions=[ctrl])
        ref = full @ st.amps
        flip_if_nonzero(st, flip_q, watched, control=ctrl)
        assert np.max(np.abs(st.amps - ref)) < 1e-12


class TestProjection:
    def test_zero_sector_keeps_everything(self):
        layout = RegisterLayout(1, 0, 2, 1)
        rng = np.random.default_rng(5)
        st = prepare(layout, random_state(rng, 1))
        _, kept = project_ancilla_zero(st)
        assert kept == pytest.approx(1.0, abs=1e-12)

    def test_uniform_single_ancilla(self):
        layout = RegisterLayout(0, 0, 1, 1)
        st = _state(layout, [0.5, 0.5, 0.5, 0.5])
        _, kept = project_ancilla_zero(st)
        assert kept == pytest.approx(1 / np.sqrt(2), abs=1e-12)
        assert not st.normalized

    def test_brute_force_index_scan(self):
        layout = RegisterLayout(1, 1, 2, 2)
        st = _rand(layout, 17)
        amps = st.amps.copy()
        zero_qubits = layout.ancilla_qubits + layout.doubling_qubits
        expected = 0.0
        for idx, amp in enumerate(amps):
            if all(((idx >> q) & 1) == 0 for q in zero_qubits):
                expected += abs(amp) ** 2
        _, kept = project_ancilla_zero(st)
        assert kept ** 2 == pytest.approx(expected, abs=1e-12)
        # every surviving amplitude sits in the zero sector
        for idx, amp in enumerate(st.amps):
            in_zero = all(((idx >> q) & 1) == 0 for q in zero_qubits)
            assert in_zero or amp == 0.0


class TestPhaseStatistics:
    def test_phase_zero_state(self):
        layout = RegisterLayout(1, 0, 0, 2)
        rng = np.random.default_rng(19)
        st = prepare(layout, random_state(rng, 2))
        p0, p1 = phase_qubit_statistics(st)
        assert p0 == pytest.approx(1.0, abs=1e-12)
        assert p1 == pytest.approx(0.0, abs=1e-12)

    def test_equal_superposition(self):
        layout = RegisterLayout(1, 0, 0, 1)
        st = prepare(layout, [1.0, 0.0])
        apply_hadamard(st, layout.phase_qubit)
        p0, p1 = phase_qubit_statistics(st)
        assert p0 == pytest.approx(0.5) and p1 == pytest.approx(0.5)

    def test_sums_to_norm(self):
        layout = RegisterLayout(1, 1, 1, 2)
        st = _rand(layout, 21)
        st.amps *= 0.7  # unnormalized on purpose
        p0, p1 = phase_qubit_statistics(st)
        assert p0 + p1 == pytest.approx(st.norm() ** 2, abs=1e-12)

    def test_missing_phase_qubit_rejected(self):
        st = prepare(RegisterLayout(0, 0, 0, 1), [1.0, 0.0])
        with pytest.raises(ValueError):
            phase_qubit_statistics(st)


class TestSingleQubitGates:
    def test_hadamard_dense_equivalence(self):
        layout = RegisterLayout(1, 1, 1, 1)
        st = _rand(layout, 25)
        ref = embed(H2x2, [layout.phase_qubit], layout.total) @ st.amps
        apply_hadamard(st, layout.phase_qubit)
        assert np.max(np.abs(st.amps - ref)) < 1e-12

    def test_hadamard_squares_to_identity(self):
        layout = RegisterLayout(1, 0, 0, 2)
        st = _rand(layout, 27)
        ref = st.amps.copy()
        apply_hadamard(st, layout.phase_qubit)
        apply_hadamard(st, layout.phase_qubit)
        assert np.max(np.abs(st.amps - ref)) < 1e-12

    def test_phase_rotation_dense_equivalence(self):
        layout = RegisterLayout(1, 0, 1, 1)
        st = _rand(layout, 33)
        angle = 0.7343
        gate = np.diag([1.0, np.exp(1j * angle)])
        ref = embed(gate, [layout.phase_qubit], layout.total) @ st.amps
        apply_phase_rotation(st, layout.phase_qubit, angle)
        assert np.max(np.abs(st.amps - ref)) < 1e-12

    def test_norm_preserved_up_to_ten_qubits(self):
        layout = RegisterLayout(1, 3, 3, 3)
        st = _rand(layout, 35)
        apply_hadamard(st, layout.phase_qubit)
        apply_phase_rotation(st, layout.phase_qubit, -1.234)
        reflect_about_zero(st, layout.ancilla_qubits)
        flip_if_nonzero(st, layout.doubling_qubits[0], layout.ancilla_qubits)
        assert st.norm() == pytest.approx(1.0, abs=1e-12)


class TestStateDump:
    def test_round_trip(self, tmp_path):
        layout = RegisterLayout(1, 0, 1, 2)
        st = _rand(layout, 37)
        path = tmp_path / "state.bin"
        save_state(st, path)
        raw = path.read_bytes()
        assert raw[:7] == b"LCUPEA\x00"
        assert len(raw) == 16 + 16 * st.amps.size
        m, amps = load_state(path)
        assert m == layout.total
        assert np.array_equal(amps, st.amps)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOTDUMP!" + b"\x00" * 24)
        with pytest.raises(ValueError):
            load_state(path)
