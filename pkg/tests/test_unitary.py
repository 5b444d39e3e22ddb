import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_hermitian, random_unitary
from qsynth.errors import SizeError, ValidationError
from qsynth.unitary import (
    UnitaryMatrix,
    dagger,
    distance,
    hs_overlap,
    kron,
    load_unitary,
    matmul,
    matrix_exp_hermitian,
    save_unitary,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)

seeds = st.integers(0, 2**32 - 1)


def test_construction_checks_unitarity():
    with pytest.raises(ValidationError):
        UnitaryMatrix(np.array([[1, 1], [0, 1]], dtype=complex), 1)


def test_construction_checks_size():
    with pytest.raises(SizeError):
        UnitaryMatrix(np.eye(4), 1)
    with pytest.raises(SizeError):
        UnitaryMatrix(np.eye(2**8), 8)
    with pytest.raises(SizeError):
        UnitaryMatrix.from_array(np.eye(3))


def test_rejects_non_finite():
    m = np.eye(2, dtype=complex)
    m[0, 0] = np.nan
    with pytest.raises(ValidationError):
        UnitaryMatrix(m, 1)


def test_matrix_is_read_only():
    u = UnitaryMatrix(np.eye(2), 1)
    with pytest.raises(ValueError):
        u.matrix[0, 0] = 2


def test_from_array_renormalizes_drift(rng):
    u = random_unitary(8, rng)
    drifted = u + 1e-7 * rng.normal(size=u.shape)
    with pytest.raises(ValidationError):
        UnitaryMatrix.from_array(drifted)
    fixed = UnitaryMatrix.from_array(drifted, renormalize=True)
    assert fixed.num_qubits == 3
    assert np.max(np.abs(fixed.matrix - u)) < 1e-6


def test_distance_trivial_cases(rng):
    u = random_unitary(4, rng)
    assert distance(u, u) == pytest.approx(0, abs=1e-15)
    assert distance(u, np.exp(1j * np.pi / 3) * u) == pytest.approx(0, abs=1e-15)
    assert distance(np.eye(2), X) == 1.0


def test_distance_size_mismatch():
    with pytest.raises(SizeError):
        distance(np.eye(2), np.eye(4))


def test_matmul_and_kron_errors():
    with pytest.raises(SizeError):
        matmul(np.eye(2), np.eye(4))
    with pytest.raises(SizeError):
        kron(np.eye(64), np.eye(4))


def test_kron_puts_first_factor_on_qubit_zero():
    # |10> has index 2 when qubit 0 is the most significant bit
    state = kron(X, np.eye(2)) @ np.eye(4)[:, 0]
    assert np.argmax(np.abs(state)) == 2


def test_exp_trivial_and_diagonal():
    assert np.allclose(matrix_exp_hermitian(Z, 0).matrix, np.eye(2), atol=1e-12)
    # exp(-i pi Z) = diag(e^{-i pi}, e^{i pi}) = -I
    assert np.allclose(matrix_exp_hermitian(Z, np.pi).matrix, -np.eye(2), atol=1e-12)


def test_exp_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        matrix_exp_hermitian(np.array([[0, 1], [0, 0]], dtype=complex), 1.0)


def test_json_round_trip(tmp_path, rng):
    u = UnitaryMatrix(random_unitary(8, rng), 3)
    path = tmp_path / "u.json"
    save_unitary(u, path)
    doc = json.loads(path.read_text())
    assert set(doc) == {"num_qubits", "real", "imag"}
    assert np.array_equal(load_unitary(path).matrix, u.matrix)


def test_json_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ValidationError):
        load_unitary(path)
    path.write_text(json.dumps({"num_qubits": 1, "real": [[1, 0], [0, 1]]}))
    with pytest.raises(ValidationError):
        load_unitary(path)


@given(seeds, st.integers(1, 3), st.floats(0, 2 * np.pi))
def test_distance_properties(seed, n, phase):
    rng = np.random.default_rng(seed)
    u, v = random_unitary(2**n, rng), random_unitary(2**n, rng)
    d = distance(u, v)
    assert 0.0 <= d <= 1.0
    assert d == pytest.approx(distance(v, u), abs=1e-12)
    assert distance(u, np.exp(1j * phase) * v) == pytest.approx(d, abs=1e-12)


@given(seeds)
def test_kron_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_unitary(2, rng) for _ in range(3))
    assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) < 1e-12


@given(seeds, st.integers(1, 3))
def test_overlap_matches_trace_definition(seed, n):
    rng = np.random.default_rng(seed)
    u, v = random_unitary(2**n, rng), random_unitary(2**n, rng)
    assert abs(hs_overlap(u, v) - np.trace(matmul(dagger(u), v))) < 1e-12


@given(seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_exp_group_property(seed, s, t):
    rng = np.random.default_rng(seed)
    h = random_hermitian(4, rng)
    lhs = matrix_exp_hermitian(h, s + t).matrix
    rhs = matmul(matrix_exp_hermitian(h, s), matrix_exp_hermitian(h, t))
    assert np.max(np.abs(lhs - rhs)) < 1e-9


@given(seeds, st.floats(-5, 5))
def test_exp_is_unitary(seed, t):
    rng = np.random.default_rng(seed)
    u = matrix_exp_hermitian(random_hermitian(8, rng), t).matrix
    assert np.max(np.abs(u.conj().T @ u - np.eye(8))) < 1e-9
