"""Gate definitions: the U3 rotation and the fixed two-qubit entanglers."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ArityError, ValidationError


class GateKind(enum.Enum):
    U3 = "u3"
    CNOT = "cnot"
    ISWAP = "iswap"
    SQCNOT = "sqcnot"
    SQISW = "sqisw"
    IDENTITY1 = "id"

    @property
    def param_count(self) -> int:
        return 3 if self is GateKind.U3 else 0

    @property
    def num_qubits(self) -> int:
        return 1 if self in (GateKind.U3, GateKind.IDENTITY1) else 2

    @property
    def is_entangler(self) -> bool:
        return self.num_qubits == 2


_S = 1 / np.sqrt(2)
_W = np.exp(1j * np.pi / 4)

# First listed qubit of a link is the control (the more significant bit).
_FIXED = {
    GateKind.IDENTITY1: np.eye(2, dtype=np.complex128),
    GateKind.CNOT: np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
    ),
    GateKind.ISWAP: np.array(
        [[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
    ),
    # Principal square roots, written in closed form.
    GateKind.SQCNOT: np.array(
        [
            [1, 0, 0, 0],
            [0, 1, 0, 0],
            [0, 0, (1 + 1j) / 2, (1 - 1j) / 2],
            [0, 0, (1 - 1j) / 2, (1 + 1j) / 2],
        ],
        dtype=np.complex128,
    ),
    GateKind.SQISW: np.array(
        [[1, 0, 0, 0], [0, _S, 1j * _S, 0], [0, 1j * _S, _S, 0], [0, 0, 0, 1]],
        dtype=np.complex128,
    ),
}
for _m in _FIXED.values():
    _m.setflags(write=False)

ENTANGLERS = (GateKind.CNOT, GateKind.ISWAP, GateKind.SQCNOT, GateKind.SQISW)


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (lam + phi)) * c],
        ],
        dtype=np.complex128,
    )


def u3_batch(params: np.ndarray, with_grad: bool = False):
    """Vectorised U3 over a ``(k, 3)`` parameter array.

    Returns the ``(k, 2, 2)`` matrices and, if requested, the ``(k, 3, 2, 2)``
    partial derivatives with respect to (theta, phi, lambda).
    """
    p = np.asarray(params, dtype=float).reshape(-1, 3)
    half = 0.5 * p[:, 0]
    c, s = np.cos(half), np.sin(half)
    ep = np.exp(1j * p[:, 1])
    el = np.exp(1j * p[:, 2])
    u = np.empty((p.shape[0], 2, 2), dtype=np.complex128)
    u[:, 0, 0] = c
    u[:, 0, 1] = -el * s
    u[:, 1, 0] = ep * s
    u[:, 1, 1] = ep * el * c
    if not with_grad:
        return u
    du = np.zeros((p.shape[0], 3, 2, 2), dtype=np.complex128)
    # d/dtheta
    du[:, 0, 0, 0] = -0.5 * s
    du[:, 0, 0, 1] = -0.5 * el * c
    du[:, 0, 1, 0] = 0.5 * ep * c
    du[:, 0, 1, 1] = -0.5 * ep * el * s
    # d/dphi
    du[:, 1, 1, 0] = 1j * u[:, 1, 0]
    du[:, 1, 1, 1] = 1j * u[:, 1, 1]
    # d/dlambda
    du[:, 2, 0, 1] = 1j * u[:, 0, 1]
    du[:, 2, 1, 1] = 1j * u[:, 1, 1]
    return u, du


def u3_params_from_matrix(m) -> tuple[float, float, float]:
    """Angles of a U3 equal to the 2x2 unitary ``m`` up to global phase."""
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 matrix, got {m.shape}")
    a, b = abs(m[0, 0]), abs(m[1, 0])
    theta = 2.0 * np.arctan2(b, a)
    if a > 1e-12:
        alpha = np.angle(m[0, 0])
    else:
        alpha = np.angle(m[1, 0])
    if b > 1e-12:
        phi = np.angle(m[1, 0]) - alpha
        lam = np.angle(-m[0, 1]) - alpha
    else:
        phi = 0.0
        lam = np.angle(m[1, 1]) - alpha
    return (
        float(theta),
        float(np.mod(phi, 2 * np.pi)),
        float(np.mod(lam, 2 * np.pi)),
    )


def _check_arity(kind: GateKind, params: Sequence[float]) -> np.ndarray:
    p = np.asarray(params, dtype=float).ravel()
    if p.size != kind.param_count:
        raise ArityError(f"{kind.value} takes {kind.param_count} parameters, got {p.size}")
    return p


def gate_matrix(kind: GateKind, params: Sequence[float] = ()) -> np.ndarray:
    p = _check_arity(kind, params)
    if kind is GateKind.U3:
        return u3_matrix(*p)
    return _FIXED[kind]


def gate_gradient(kind: GateKind, params: Sequence[float] = ()) -> list[np.ndarray]:
    """Partial derivatives of :func:`gate_matrix` for each parameter."""
    p = _check_arity(kind, params)
    if kind is not GateKind.U3:
        return []
    _, du = u3_batch(p, with_grad=True)
    return [du[0, k].copy() for k in range(3)]


@dataclass(frozen=True)
class EntanglerSet:
    """Non-empty, duplicate-free tuple of two-qubit gate kinds."""

    kinds: tuple[GateKind, ...]

    def __post_init__(self):
        kinds = tuple(self.kinds)
        if not kinds:
            raise ValidationError("entangler set must not be empty")
        if len(set(kinds)) != len(kinds):
            raise ValidationError("entangler set contains duplicates")
        for k in kinds:
            if not isinstance(k, GateKind) or not k.is_entangler:
                raise ValidationError(f"{k!r} is not a two-qubit gate kind")
        object.__setattr__(self, "kinds", kinds)

    def __iter__(self):
        return iter(self.kinds)

    def __len__(self):
        return len(self.kinds)

    @classmethod
    def parse(cls, text: str) -> "EntanglerSet":
        """Parse a comma-separated list such as ``"cnot,iswap"``."""
        names = [t.strip().lower() for t in text.split(",") if t.strip()]
        kinds = []
        for name in names:
            try:
                kinds.append(GateKind(name))
            except ValueError:
                raise ValidationError(f"unknown gate kind {name!r}") from None
        return cls(tuple(kinds))

    def __str__(self):
        return ",".join(k.value for k in self.kinds)


CNOT_ONLY = EntanglerSet((GateKind.CNOT,))
