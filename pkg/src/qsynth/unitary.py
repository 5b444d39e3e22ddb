"""Dense complex matrix primitives for 2^n x 2^n operators.

Qubit 0 is the most significant bit of a basis-state index throughout the
package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SizeError, ValidationError

MAX_QUBITS = 7
MAX_DIM = 2**MAX_QUBITS
UNITARITY_TOL = 1e-10


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite square complex128 array."""
    if isinstance(a, UnitaryMatrix):
        return a.matrix
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise SizeError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix contains NaN or Inf entries")
    return m


def unitarity_error(m: np.ndarray) -> float:
    """Max-norm of ``m^dagger m - I``."""
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    """A validated unitary on ``num_qubits`` qubits.

    The backing array is made read-only so instances can be shared freely.
    """

    matrix: np.ndarray
    num_qubits: int

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise SizeError(f"num_qubits must be in [1, {MAX_QUBITS}], got {self.num_qubits}")
        if m.shape[0] != 2**self.num_qubits:
            raise SizeError(
                f"matrix dimension {m.shape[0]} does not match 2^{self.num_qubits}"
            )
        err = unitarity_error(m)
        if err > UNITARITY_TOL:
            raise ValidationError(f"matrix is not unitary (max |U^dag U - I| = {err:.3e})")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_array(cls, a, *, renormalize: bool = False) -> "UnitaryMatrix":
        """Build from a raw array, inferring the qubit count.

        With ``renormalize`` the nearest unitary (polar factor, via QR with
        sign correction) replaces a slightly drifted input.
        """
        m = as_matrix(a)
        dim = m.shape[0]
        n = dim.bit_length() - 1
        if 2**n != dim:
            raise SizeError(f"dimension {dim} is not a power of two")
        if dim > MAX_DIM:
            raise SizeError(f"dimension {dim} exceeds the supported maximum {MAX_DIM}")
        if renormalize and unitarity_error(m) > UNITARITY_TOL:
            m = nearest_unitary(m)
        return cls(m, n)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def nearest_unitary(m: np.ndarray) -> np.ndarray:
    """Project a nearly-unitary matrix back onto the unitary group.

    QR with the diagonal of R forced positive; for inputs close to unitary
    this agrees with the polar factor to second order.
    """
    q, r = np.linalg.qr(m)
    d = np.diag(r)
    phases = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    q = q * phases[None, :]
    # One Newton-Schulz polish step pulls the error to machine precision.
    return 1.5 * q - 0.5 * q @ q.conj().T @ q


def kron(a, b) -> np.ndarray:
    """Tensor product; ``a`` acts on the more significant qubits."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[0] * b.shape[0] > MAX_DIM:
        raise SizeError(
            f"tensor product dimension {a.shape[0] * b.shape[0]} exceeds {MAX_DIM}"
        )
    return np.kron(a, b)


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise SizeError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b


def dagger(a) -> np.ndarray:
    return as_matrix(a).conj().T


def _pair(u, v) -> tuple[np.ndarray, np.ndarray]:
    a, b = as_matrix(u), as_matrix(v)
    if a.shape != b.shape:
        raise SizeError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def hs_overlap(u, v) -> complex:
    """Hilbert-Schmidt inner product ``Tr(u^dagger v)``.

    Evaluated elementwise; the product matrix is never formed.
    """
    a, b = _pair(u, v)
    return complex(np.vdot(a, b))


def distance(u, v) -> float:
    """Phase-invariant distance ``1 - |Tr(u^dagger v)| / dim`` in ``[0, 1]``."""
    a, b = _pair(u, v)
    d = 1.0 - abs(np.vdot(a, b)) / a.shape[0]
    return float(min(max(d, 0.0), 1.0))


def is_hermitian(h, tol: float = 1e-10) -> bool:
    m = as_matrix(h)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def matrix_exp_hermitian(h, t: float) -> UnitaryMatrix:
    """``exp(-i t H)`` for Hermitian ``H`` via its eigendecomposition."""
    m = as_matrix(h)
    if not is_hermitian(m):
        raise ValidationError("matrix_exp_hermitian requires a Hermitian matrix")
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    u = (v * np.exp(-1j * t * w)[None, :]) @ v.conj().T
    return UnitaryMatrix.from_array(u, renormalize=True)


def unitary_to_dict(u: UnitaryMatrix) -> dict:
    m = u.matrix
    return {
        "num_qubits": u.num_qubits,
        "real": m.real.tolist(),
        "imag": m.imag.tolist(),
    }


def unitary_from_dict(d: dict) -> UnitaryMatrix:
    try:
        n = int(d["num_qubits"])
        re = np.asarray(d["real"], dtype=float)
        im = np.asarray(d["imag"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed unitary document: {exc}") from exc
    if re.shape != im.shape:
        raise SizeError("real and imag parts have different shapes")
    return UnitaryMatrix(re + 1j * im, n)


def save_unitary(u: UnitaryMatrix, path) -> None:
    Path(path).write_text(json.dumps(unitary_to_dict(u)))


def load_unitary(path) -> UnitaryMatrix:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    return unitary_from_dict(doc)
