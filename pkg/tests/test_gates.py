import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from qsynth.errors import ArityError, ValidationError
from qsynth.gates import (
    ENTANGLERS,
    EntanglerSet,
    GateKind,
    gate_gradient,
    gate_matrix,
    u3_params_from_matrix,
)

angles = st.floats(-10, 10, allow_nan=False)


def finite_difference(kind, p, k, h=1e-6):
    e = np.zeros(3)
    e[k] = h
    return (gate_matrix(kind, p + e) - gate_matrix(kind, p - e)) / (2 * h)


def test_param_counts():
    assert GateKind.U3.param_count == 3
    for kind in GateKind:
        if kind is not GateKind.U3:
            assert kind.param_count == 0


def test_u3_zero_is_identity():
    assert np.array_equal(gate_matrix(GateKind.U3, [0, 0, 0]), np.eye(2))


def test_u3_pi_0_pi_is_x():
    x = np.array([[0, 1], [1, 0]])
    assert np.max(np.abs(gate_matrix(GateKind.U3, [np.pi, 0, np.pi]) - x)) < 1e-12


@pytest.mark.parametrize(
    "root,full", [(GateKind.SQCNOT, GateKind.CNOT), (GateKind.SQISW, GateKind.ISWAP)]
)
def test_square_roots(root, full):
    r = gate_matrix(root)
    assert np.max(np.abs(r @ r - gate_matrix(full))) < 1e-12
    # principal branch agrees with a general-purpose matrix square root
    assert np.max(np.abs(r - scipy.linalg.sqrtm(gate_matrix(full)))) < 1e-12


def test_cnot_control_is_first_qubit():
    m = gate_matrix(GateKind.CNOT)
    assert m[3, 2] == 1 and m[2, 3] == 1 and m[1, 1] == 1


def test_arity_errors():
    with pytest.raises(ArityError):
        gate_matrix(GateKind.U3, [0, 0])
    with pytest.raises(ArityError):
        gate_matrix(GateKind.CNOT, [0.1])
    with pytest.raises(ArityError):
        gate_gradient(GateKind.U3, [])


def test_fixed_gates_have_no_gradient():
    assert gate_gradient(GateKind.CNOT) == []


def test_phi_derivative_at_origin():
    d = gate_gradient(GateKind.U3, [0, 0, 0])[1]
    expected = finite_difference(GateKind.U3, np.zeros(3), 1)
    assert np.max(np.abs(d - expected)) < 1e-6
    # only the (1, 1) entry moves with phi at theta = 0
    assert np.count_nonzero(np.abs(d) > 1e-12) == 1 and abs(d[1, 1] - 1j) < 1e-12


def test_entangler_set_validation():
    assert list(EntanglerSet.parse("cnot, iswap")) == [GateKind.CNOT, GateKind.ISWAP]
    assert str(EntanglerSet.parse("sqcnot")) == "sqcnot"
    with pytest.raises(ValidationError):
        EntanglerSet(())
    with pytest.raises(ValidationError):
        EntanglerSet.parse("cnot,cnot")
    with pytest.raises(ValidationError):
        EntanglerSet.parse("u3")
    with pytest.raises(ValidationError):
        EntanglerSet.parse("toffoli")


def test_all_gates_unitary_over_random_draws():
    rng = np.random.default_rng(0)
    for p in rng.uniform(-4 * np.pi, 4 * np.pi, size=(1000, 3)):
        m = gate_matrix(GateKind.U3, p)
        assert np.max(np.abs(m.conj().T @ m - np.eye(2))) < 1e-12
    for kind in ENTANGLERS + (GateKind.IDENTITY1,):
        m = gate_matrix(kind)
        assert np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) < 1e-12


@given(angles, angles, angles)
def test_u3_periodicity(t, p, l):
    base = gate_matrix(GateKind.U3, [t, p, l])
    for shifted in ([t + 4 * np.pi, p, l], [t, p + 2 * np.pi, l], [t, p, l + 2 * np.pi]):
        assert np.max(np.abs(gate_matrix(GateKind.U3, shifted) - base)) < 1e-12


@given(angles, angles, angles)
def test_gradient_matches_finite_difference(t, p, l):
    x = np.array([t, p, l])
    grads = gate_gradient(GateKind.U3, x)
    for k in range(3):
        assert np.max(np.abs(grads[k] - finite_difference(GateKind.U3, x, k))) < 1e-6


@given(angles, angles, angles)
def test_params_from_matrix_round_trip(t, p, l):
    m = gate_matrix(GateKind.U3, [t, p, l]) * np.exp(0.7j)
    back = gate_matrix(GateKind.U3, u3_params_from_matrix(m))
    overlap = abs(np.vdot(m, back)) / 2
    assert overlap == pytest.approx(1.0, abs=1e-12)
