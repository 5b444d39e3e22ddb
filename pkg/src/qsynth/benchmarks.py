"""Generators for standard synthesis targets.

Names accepted by :func:`parse`: ``qft<n>``, ``identity<n>``, ``tfim<n>``
(optionally ``tfim<n>:t=..,J=..,h=..,steps=..``), ``toffoli``, ``fredkin``,
``peres``, ``or`` / ``logical_or`` and ``cnot``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable

import numpy as np

from .errors import ValidationError
from .unitary import UnitaryMatrix, matrix_exp_hermitian

_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


class UnknownBenchmark(ValidationError, LookupError):
    pass


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    num_qubits: int = 0
    parameters: dict = field(default_factory=dict)


def _bits(index: int, n: int) -> list[int]:
    return [(index >> (n - 1 - q)) & 1 for q in range(n)]


def _index(bits: list[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | b
    return out


def permutation_unitary(n: int, rule: Callable[[list[int]], list[int]]) -> UnitaryMatrix:
    """Unitary sending basis state |x> to |rule(x)>, given on bit lists."""
    dim = 2**n
    m = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(dim):
        m[_index(rule(_bits(i, n))), i] = 1.0
    return UnitaryMatrix(m, n)


def qft(n: int) -> UnitaryMatrix:
    dim = 2**n
    j = np.arange(dim)
    m = np.exp(2j * np.pi * np.outer(j, j) / dim) / np.sqrt(dim)
    return UnitaryMatrix.from_array(m, renormalize=True)


def identity(n: int) -> UnitaryMatrix:
    return UnitaryMatrix(np.eye(2**n, dtype=np.complex128), n)


def toffoli() -> UnitaryMatrix:
    return permutation_unitary(3, lambda b: [b[0], b[1], b[2] ^ (b[0] & b[1])])


def fredkin() -> UnitaryMatrix:
    return permutation_unitary(3, lambda b: [b[0], b[2], b[1]] if b[0] else b)


def peres() -> UnitaryMatrix:
    return permutation_unitary(3, lambda b: [b[0], b[0] ^ b[1], b[2] ^ (b[0] & b[1])])


def logical_or() -> UnitaryMatrix:
    return permutation_unitary(3, lambda b: [b[0], b[1], b[2] ^ (b[0] | b[1])])


def cnot() -> UnitaryMatrix:
    return permutation_unitary(2, lambda b: [b[0], b[0] ^ b[1]])


def _site_op(sites: dict[int, np.ndarray], n: int) -> np.ndarray:
    eye = np.eye(2, dtype=np.complex128)
    return reduce(np.kron, [sites.get(q, eye) for q in range(n)])


def tfim_hamiltonian(n: int, coupling: float = 1.0, field_strength: float = 1.0) -> np.ndarray:
    """``H = -J sum Z_i Z_{i+1} - h sum X_i`` on an open chain."""
    dim = 2**n
    h = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(n - 1):
        h -= coupling * _site_op({i: _Z, i + 1: _Z}, n)
    for i in range(n):
        h -= field_strength * _site_op({i: _X}, n)
    return h


def tfim(
    n: int, coupling: float = 1.0, field_strength: float = 1.0, t: float = 1.0, steps: int = 0
) -> UnitaryMatrix:
    """Time evolution ``exp(-i H t)`` of the transverse-field Ising chain.

    ``steps == 0`` gives the exact exponential; a positive value gives the
    first-order Trotter product with that many time steps, the form a
    step-by-step circuit generator would produce.
    """
    if steps <= 0:
        return matrix_exp_hermitian(tfim_hamiltonian(n, coupling, field_strength), t)
    dt = t / steps
    zz = tfim_hamiltonian(n, coupling, 0.0)
    xx = tfim_hamiltonian(n, 0.0, field_strength)
    step = matrix_exp_hermitian(xx, dt).matrix @ matrix_exp_hermitian(zz, dt).matrix
    return UnitaryMatrix.from_array(np.linalg.matrix_power(step, steps), renormalize=True)


_FIXED = {
    "toffoli": toffoli,
    "fredkin": fredkin,
    "peres": peres,
    "or": logical_or,
    "logical_or": logical_or,
    "cnot": cnot,
}
_SIZED = {"qft": qft, "identity": identity}


def generate(spec: BenchmarkSpec) -> UnitaryMatrix:
    name = spec.name.lower()
    if name in _FIXED:
        return _FIXED[name]()
    if name in _SIZED:
        if spec.num_qubits < 1:
            raise ValidationError(f"{name} needs a positive qubit count")
        return _SIZED[name](spec.num_qubits)
    if name == "tfim":
        p = spec.parameters
        return tfim(
            spec.num_qubits,
            float(p.get("J", 1.0)),
            float(p.get("h", 1.0)),
            float(p.get("t", 1.0)),
            int(p.get("steps", 0)),
        )
    raise UnknownBenchmark(f"unknown benchmark {spec.name!r}")


_NAME = re.compile(r"^([a-z_]+?)(\d*)(?::(.*))?$")


def parse(text: str) -> BenchmarkSpec:
    """Parse a benchmark string such as ``qft3`` or ``tfim3:t=0.5,h=1``."""
    m = _NAME.match(text.strip().lower())
    if not m:
        raise UnknownBenchmark(f"cannot parse benchmark name {text!r}")
    name, digits, rest = m.groups()
    if name not in _FIXED and name not in _SIZED and name != "tfim":
        raise UnknownBenchmark(f"unknown benchmark {text!r}")
    params = {}
    if rest:
        for item in rest.split(","):
            key, _, value = item.partition("=")
            if not value:
                raise ValidationError(f"malformed benchmark parameter {item!r}")
            key = {"j": "J"}.get(key.strip(), key.strip())
            params[key] = float(value)
    return BenchmarkSpec(name, int(digits) if digits else 0, params)


def is_benchmark(text: str) -> bool:
    try:
        parse(text)
    except ValidationError:
        return False
    return True
