"""
Tests for the operator core: Pauli algebra, statevector simulation and the
dense oracle.
"""

import numpy as np
import pytest
import scipy.linalg

from ensemble_vqe.config import settings
from ensemble_vqe.exceptions import DimensionError, SizeLimitError, ValidationError
from ensemble_vqe.operators import (
    DenseHermitian,
    PauliOperator,
    PauliSum,
    PauliWord,
    Statevector,
    apply_cnot,
    apply_pauli_rotation,
    eigendecompose,
    expectation,
    matrix_element,
    states_to_matrix,
    to_dense,
)


def random_state(rng, qubits):
    amps = rng.normal(size=1 << qubits) + 1j * rng.normal(size=1 << qubits)
    return Statevector(qubits, amps / np.linalg.norm(amps))


def random_word(rng, qubits):
    return PauliWord.from_letters("".join(rng.choice(list("IXYZ"), size=qubits)))


def random_operator(rng, qubits, terms=12):
    return PauliOperator(qubits, {random_word(rng, qubits): rng.normal() for _ in range(terms)})


# ============================================
# Pauli Words
# ============================================

class TestPauliWord:
    """Test symplectic Pauli words"""

    def test_letters_round_trip(self):
        """Letters are listed qubit 0 first"""
        word = PauliWord.from_letters("XIYZ")
        assert word.letters == "XIYZ"
        assert word.x_mask == 0b0101
        assert word.z_mask == 0b1100
        assert word.weight == 3

    def test_identity(self):
        word = PauliWord.identity(3)
        assert word.is_identity
        assert word.letters == "III"

    def test_unknown_letter(self):
        with pytest.raises(ValidationError):
            PauliWord.from_letters("XQ")

    def test_mask_out_of_range(self):
        with pytest.raises(ValidationError):
            PauliWord(2, 4, 0)

    def test_from_sparse(self):
        word = PauliWord.from_sparse(3, {2: "Y"})
        assert word.letters == "IIY"
        with pytest.raises(DimensionError):
            PauliWord.from_sparse(2, {2: "X"})

    def test_single_qubit_dense(self):
        """Dense matrices of the four letters"""
        assert np.allclose(PauliWord.from_letters("Y").to_dense(), [[0, -1j], [1j, 0]])
        assert np.allclose(PauliWord.from_letters("Z").to_dense(), np.diag([1, -1]))

    def test_compose_matches_dense(self, rng):
        """Symbolic product agrees with the matrix product"""
        for _ in range(30):
            a, b = random_word(rng, 3), random_word(rng, 3)
            phase, word = a.compose(b)
            assert np.allclose(phase * word.to_dense(), a.to_dense() @ b.to_dense(), atol=1e-12)

    def test_commutation(self, rng):
        for _ in range(30):
            a, b = random_word(rng, 3), random_word(rng, 3)
            da, db = a.to_dense(), b.to_dense()
            assert a.commutes_with(b) == np.allclose(da @ db, db @ da)

    def test_apply_matches_dense(self, rng):
        """Word action on amplitudes equals the Kronecker matrix"""
        for _ in range(20):
            word = random_word(rng, 4)
            state = random_state(rng, 4)
            assert np.allclose(word.apply(state.amplitudes), word.to_dense() @ state.amplitudes, atol=1e-12)

    def test_apply_batch(self, rng):
        word = random_word(rng, 3)
        batch = np.stack([random_state(rng, 3).amplitudes for _ in range(4)], axis=1)
        assert np.allclose(word.apply(batch), word.to_dense() @ batch)


# ============================================
# Operators
# ============================================

class TestPauliOperator:
    """Test real-weighted Pauli sums"""

    def test_zero_terms_pruned(self):
        op = PauliOperator.from_labels({"XZ": 0.5, "II": 0.0})
        assert len(op) == 1
        assert op.coefficient("XZ") == 0.5
        assert op.coefficient("II") == 0.0

    def test_duplicate_words_merged(self):
        word = PauliWord.from_letters("ZZ")
        op = PauliOperator(2, {word: 1.0}) + PauliOperator(2, {word: 0.5})
        assert op.coefficient(word) == 1.5

    def test_scaling(self):
        op = 2.0 * PauliOperator.from_labels({"Z": 1.0})
        assert op.coefficient("Z") == 2.0

    def test_mixed_register_sizes(self):
        with pytest.raises(DimensionError):
            PauliOperator.from_labels({"Z": 1.0, "ZZ": 1.0})

    def test_sparse_matrix_matches_dense(self, rng):
        op = random_operator(rng, 4)
        assert np.allclose(op.sparse_matrix.toarray(), to_dense(op).entries, atol=1e-12)

    def test_pauli_sum_hermitian_check(self):
        word = PauliWord.from_letters("X")
        with pytest.raises(ValidationError):
            PauliSum(1, {word: 1j}).to_operator()
        assert PauliSum(1, {word: 2.0 + 0j}).to_operator().coefficient(word) == 2.0

    def test_pauli_sum_product(self):
        """X Y = iZ"""
        x = PauliSum(1, {PauliWord.from_letters("X"): 1.0})
        y = PauliSum(1, {PauliWord.from_letters("Y"): 1.0})
        product = (x @ y).terms
        assert product == {PauliWord.from_letters("Z"): 1j}


# ============================================
# Statevector Simulation
# ============================================

class TestSimulation:
    """Test rotations, CNOTs and expectation values"""

    def test_zero_angle_is_identity(self, rng):
        state = random_state(rng, 3)
        out = apply_pauli_rotation(state, random_word(rng, 3), 0.0)
        assert np.allclose(out.amplitudes, state.amplitudes, atol=1e-15)

    def test_y_rotation(self):
        """exp(-i theta Y)|0> = cos(theta)|0> + sin(theta)|1>"""
        theta = 0.37
        out = apply_pauli_rotation(Statevector.basis(1, 0), PauliWord.from_letters("Y"), theta)
        assert np.allclose(out.amplitudes, [np.cos(theta), np.sin(theta)], atol=1e-15)

    def test_rotation_matches_expm(self, rng):
        """Random 3-qubit word against the dense matrix exponential"""
        for angle in (np.pi, 0.81, -2.3):
            word = random_word(rng, 3)
            state = random_state(rng, 3)
            expected = scipy.linalg.expm(-1j * angle * word.to_dense()) @ state.amplitudes
            out = apply_pauli_rotation(state, word, angle)
            assert np.allclose(out.amplitudes, expected, atol=1e-12)

    def test_norm_preserved(self, rng):
        state = random_state(rng, 4)
        for _ in range(50):
            state = apply_pauli_rotation(state, random_word(rng, 4), rng.uniform(-np.pi, np.pi))
        assert abs(state.norm - 1.0) <= 1e-12

    def test_rotation_inverse(self, rng):
        state = random_state(rng, 3)
        word = random_word(rng, 3)
        back = apply_pauli_rotation(apply_pauli_rotation(state, word, 1.1), word, -1.1)
        assert np.allclose(back.amplitudes, state.amplitudes, atol=1e-12)

    def test_rotation_qubit_mismatch(self, rng):
        with pytest.raises(DimensionError):
            apply_pauli_rotation(random_state(rng, 2), PauliWord.from_letters("XXX"), 0.1)

    def test_cnot(self):
        """|q1 q0> = |01> -> |11> with control 0, target 1"""
        out = apply_cnot(Statevector.from_bitstring("01"), 0, 1)
        assert out.amplitudes[3] == 1.0
        with pytest.raises(ValidationError):
            apply_cnot(Statevector.from_bitstring("01"), 1, 1)
        with pytest.raises(DimensionError):
            apply_cnot(Statevector.from_bitstring("01"), 0, 2)

    def test_from_bitstring_is_big_endian(self):
        assert Statevector.from_bitstring("0101").amplitudes[5] == 1.0

    def test_statevector_size_check(self):
        with pytest.raises(DimensionError):
            Statevector(2, np.ones(3))

    def test_expectation_identity(self, rng):
        op = PauliOperator.identity(3, 1.7)
        assert expectation(random_state(rng, 3), op) == pytest.approx(1.7, abs=1e-12)

    def test_expectation_z_on_one(self):
        op = PauliOperator.from_labels({"Z": 1.0})
        assert expectation(Statevector.basis(1, 1), op) == -1.0

    def test_expectation_matches_oracle(self, rng):
        for qubits in range(1, 7):
            op = random_operator(rng, qubits)
            state = random_state(rng, qubits)
            dense = np.vdot(state.amplitudes, to_dense(op).entries @ state.amplitudes)
            assert abs(dense.imag) <= 1e-12
            assert expectation(state, op) == pytest.approx(dense.real, abs=1e-12)

    def test_matrix_element(self, rng):
        op = random_operator(rng, 4)
        a, b = random_state(rng, 4), random_state(rng, 4)
        dense = to_dense(op).entries
        assert matrix_element(a, b, op) == pytest.approx(np.vdot(a.amplitudes, dense @ b.amplitudes), abs=1e-12)
        assert matrix_element(a, b, op) == pytest.approx(np.conj(matrix_element(b, a, op)), abs=1e-12)
        assert matrix_element(a, a, op) == pytest.approx(expectation(a, op), abs=1e-12)

    def test_matrix_element_orthogonal_identity(self):
        op = PauliOperator.identity(2)
        assert matrix_element(Statevector.basis(2, 0), Statevector.basis(2, 3), op) == 0

    def test_states_to_matrix(self):
        mat = states_to_matrix([Statevector.basis(2, 0), Statevector.basis(2, 1)])
        assert mat.shape == (4, 2)
        with pytest.raises(ValidationError):
            states_to_matrix([])


# ============================================
# Dense Oracle
# ============================================

class TestDenseOracle:
    """Test dense expansion and the eigensolver"""

    def test_identity_expansion(self):
        assert np.allclose(to_dense(PauliOperator.identity(2)).entries, np.eye(4))

    def test_single_z(self):
        assert np.allclose(to_dense(PauliOperator.from_labels({"Z": 1.0})).entries, np.diag([1, -1]))

    def test_xz_kronecker(self):
        """X on qubit 0, Z on qubit 1 is Z (x) X in matrix order"""
        expected = np.array([
            [0, 1, 0, 0],
            [1, 0, 0, 0],
            [0, 0, 0, -1],
            [0, 0, -1, 0],
        ])
        assert np.allclose(to_dense(PauliOperator.from_labels({"XZ": 1.0})).entries, expected)

    def test_size_limit(self, monkeypatch):
        monkeypatch.setattr(settings, "MAX_DENSE_QUBITS", 2)
        with pytest.raises(SizeLimitError):
            to_dense(PauliOperator.identity(3))

    def test_diagonal_eigenvalues(self):
        values, _ = eigendecompose(DenseHermitian(np.diag([3.0, 1.0, 2.0])))
        assert np.allclose(values, [1.0, 2.0, 3.0])

    def test_pauli_x_eigenvalues(self):
        values, _ = eigendecompose(DenseHermitian([[0, 1], [1, 0]]))
        assert np.allclose(values, [-1.0, 1.0])

    def test_random_hermitian_residual(self, rng):
        a = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
        h = DenseHermitian(0.5 * (a + a.conj().T))
        values, vectors = eigendecompose(h)
        norm = np.linalg.norm(h.entries, 2)
        assert np.all(np.diff(values) >= 0)
        assert np.linalg.norm(h.entries @ vectors - vectors * values) <= 1e-10 * norm
        assert np.allclose(vectors.conj().T @ vectors, np.eye(16), atol=1e-10)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValidationError):
            DenseHermitian([[0, 1], [0, 0]])

    def test_non_square_rejected(self):
        with pytest.raises(DimensionError):
            DenseHermitian(np.zeros((2, 3)))


# ============================================
# Run Tests
# ============================================

if __name__ == "__main__":
    pytest.main([__file__, '-v', '--cov=ensemble_vqe', '--cov-report=html'])
