import itertools

import numpy as np
import pytest

from qsynth import benchmarks as B
from qsynth.errors import ValidationError
from qsynth.unitary import UnitaryMatrix, matrix_exp_hermitian


def simulate(gate, n, bits):
    """Truth-table simulator for the reversible benchmarks."""
    a = list(bits)
    if gate == "toffoli":
        a[2] ^= a[0] & a[1]
    elif gate == "fredkin":
        if a[0]:
            a[1], a[2] = a[2], a[1]
    elif gate == "peres":
        a[2] ^= a[0] & a[1]
        a[1] ^= a[0]
    elif gate == "or":
        a[2] ^= a[0] | a[1]
    elif gate == "cnot":
        a[1] ^= a[0]
    return a


@pytest.mark.parametrize("name,n", [("toffoli", 3), ("fredkin", 3), ("peres", 3), ("or", 3), ("cnot", 2)])
def test_permutation_gates_match_truth_table(name, n):
    u = B.generate(B.parse(name)).matrix
    for bits in itertools.product([0, 1], repeat=n):
        i = int("".join(map(str, bits)), 2)
        j = int("".join(map(str, simulate(name, n, bits))), 2)
        column = np.zeros(2**n)
        column[j] = 1
        assert np.array_equal(u[:, i], column)


def test_toffoli_swaps_last_two_states():
    u = B.toffoli().matrix
    expected = np.eye(8)
    expected[[6, 7]] = expected[[7, 6]]
    assert np.array_equal(u, expected)


def test_qft2_matrix():
    expected = 0.5 * np.array(
        [[1, 1, 1, 1], [1, 1j, -1, -1j], [1, -1, 1, -1], [1, -1j, -1, 1j]]
    )
    assert np.max(np.abs(B.qft(2).matrix - expected)) < 1e-15


def test_generators_are_unitary():
    for text in ["qft1", "qft4", "identity2", "tfim3:t=0.7", "toffoli", "tfim4:t=2,steps=3"]:
        assert isinstance(B.generate(B.parse(text)), UnitaryMatrix)


def second_order_trotter(n, coupling, field, t, steps):
    zz = B.tfim_hamiltonian(n, coupling, 0.0)
    xx = B.tfim_hamiltonian(n, 0.0, field)
    dt = t / steps
    half = matrix_exp_hermitian(zz, dt / 2).matrix
    step = half @ matrix_exp_hermitian(xx, dt).matrix @ half
    return np.linalg.matrix_power(step, steps)


def test_tfim_matches_trotter_limit():
    for t in (0.3, 1.0, 2.5):
        exact = B.tfim(3, 1.0, 1.0, t).matrix
        assert np.max(np.abs(exact - second_order_trotter(3, 1.0, 1.0, t, 1000))) < 1e-4


def test_first_order_trotter_converges():
    exact = B.tfim(3, 1.0, 0.8, 1.0).matrix
    errs = [np.max(np.abs(B.tfim(3, 1.0, 0.8, 1.0, steps=k).matrix - exact)) for k in (10, 100)]
    assert errs[1] < errs[0] / 5


def test_tfim_hamiltonian_is_hermitian():
    h = B.tfim_hamiltonian(3, 0.5, 2.0)
    assert np.allclose(h, h.conj().T)
    # two ZZ bonds and three X sites on the open chain
    assert np.trace(h @ h).real == pytest.approx(8 * (2 * 0.25 + 3 * 4.0))


def test_parse():
    spec = B.parse("TFIM3:t=0.5,J=2")
    assert spec == B.BenchmarkSpec("tfim", 3, {"t": 0.5, "J": 2.0})
    assert B.parse("qft5").num_qubits == 5
    assert B.is_benchmark("toffoli") and not B.is_benchmark("grover3")


def test_unknown_names():
    with pytest.raises(LookupError):
        B.generate(B.BenchmarkSpec("grover", 3))
    with pytest.raises(LookupError):
        B.parse("mul4")
    with pytest.raises(ValidationError):
        B.generate(B.BenchmarkSpec("qft"))
