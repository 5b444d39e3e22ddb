"""OpenQASM 2.0 output for placed circuits, and a reader for that output.

Angles are written with 17 significant digits so a round trip reproduces
the parameters exactly. Entanglers other than CNOT are declared as opaque
gates; a comment records their matrix convention.
"""

from __future__ import annotations

import re

import numpy as np

from .circuit import CircuitStructure, ExpansionLayer, PlacedCircuit
from .errors import ValidationError
from .gates import GateKind

_NAMES = {
    GateKind.CNOT: "cx",
    GateKind.ISWAP: "iswap",
    GateKind.SQCNOT: "sqcnot",
    GateKind.SQISW: "sqisw",
}
_KINDS = {v: k for k, v in _NAMES.items()}
_OPAQUE = {
    GateKind.ISWAP: "// iswap: |01> -> i|10>, |10> -> i|01>",
    GateKind.SQCNOT: "// sqcnot: principal square root of cx",
    GateKind.SQISW: "// sqisw: principal square root of iswap",
}


def _angle(x: float) -> str:
    return format(float(x), ".17g")


def to_qasm(c: PlacedCircuit) -> str:
    s = c.structure
    n = s.num_qubits
    used = {layer.entangler for layer in s.layers} - {GateKind.CNOT}
    kinds = sorted(used, key=list(GateKind).index)
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    for kind in kinds:
        lines.append(_OPAQUE[kind])
        lines.append(f"opaque {_NAMES[kind]} a,b;")
    lines.append(f"qreg q[{n}];")
    params = iter(c.params.reshape(-1, 3))
    for slot, (layer_index, q) in enumerate(s.slots):
        if slot >= n and (slot - n) % 2 == 0:
            layer = s.layers[layer_index - 1]
            lines.append(f"{_NAMES[layer.entangler]} q[{layer.link[0]}],q[{layer.link[1]}];")
        if slot in s.removed:
            continue
        theta, phi, lam = next(params)
        lines.append(f"u3({_angle(theta)},{_angle(phi)},{_angle(lam)}) q[{q}];")
    return "\n".join(lines) + "\n"


_QREG = re.compile(r"^qreg\s+(\w+)\s*\[\s*(\d+)\s*\]\s*;$")
_U3 = re.compile(r"^u3\s*\(([^)]*)\)\s+(\w+)\s*\[\s*(\d+)\s*\]\s*;$")
_TWO = re.compile(r"^(\w+)\s+(\w+)\s*\[\s*(\d+)\s*\]\s*,\s*(\w+)\s*\[\s*(\d+)\s*\]\s*;$")


def from_qasm(text: str) -> PlacedCircuit:
    """Parse QASM written by :func:`to_qasm` back into a placed circuit.

    Raises :class:`ValidationError` for anything outside that layered form.
    """
    n = None
    reg = None
    layers: list[ExpansionLayer] = []
    # per slot parameters, keyed by (layer index, qubit)
    slot_params: dict[tuple[int, int], tuple] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0].strip()
        if not line or line.startswith(("OPENQASM", "include", "opaque")):
            continue
        m = _QREG.match(line)
        if m:
            if n is not None:
                raise ValidationError(f"line {lineno}: only one qreg is supported")
            reg, n = m.group(1), int(m.group(2))
            continue
        if n is None:
            raise ValidationError(f"line {lineno}: gate before qreg declaration")
        m = _U3.match(line)
        if m:
            q = _qubit(m.group(2), m.group(3), reg, n, lineno)
            try:
                angles = tuple(float(x) for x in m.group(1).split(","))
            except ValueError:
                raise ValidationError(f"line {lineno}: bad u3 angles") from None
            if len(angles) != 3:
                raise ValidationError(f"line {lineno}: u3 takes three angles")
            k = len(layers)
            if k and q not in layers[-1].link:
                raise ValidationError(f"line {lineno}: u3 on q[{q}] does not follow its layer")
            if (k, q) in slot_params:
                raise ValidationError(f"line {lineno}: second u3 on q[{q}] in one layer")
            slot_params[(k, q)] = angles
            continue
        m = _TWO.match(line)
        if m and m.group(1) in _KINDS:
            a = _qubit(m.group(2), m.group(3), reg, n, lineno)
            b = _qubit(m.group(4), m.group(5), reg, n, lineno)
            try:
                layers.append(ExpansionLayer((a, b), _KINDS[m.group(1)]))
            except ValidationError as exc:
                raise ValidationError(f"line {lineno}: {exc}") from None
            continue
        raise ValidationError(f"line {lineno}: unsupported statement {line!r}")
    if n is None:
        raise ValidationError("no qreg declaration found")
    structure = CircuitStructure(n, tuple(layers))
    removed = []
    params = []
    for slot, key in enumerate(structure.slots):
        if key in slot_params:
            params.append(slot_params[key])
        else:
            removed.append(slot)
    structure = CircuitStructure(n, tuple(layers), frozenset(removed))
    flat = np.array(params, dtype=float).ravel()
    return PlacedCircuit(structure, flat)


def _qubit(name: str, index: str, reg: str, n: int, lineno: int) -> int:
    if name != reg:
        raise ValidationError(f"line {lineno}: unknown register {name!r}")
    q = int(index)
    if q >= n:
        raise ValidationError(f"line {lineno}: qubit {q} out of range")
    return q


def entangler_count(text: str) -> int:
    """Number of two-qubit gate statements in a QASM program."""
    count = 0
    for raw in text.splitlines():
        m = _TWO.match(raw.split("//", 1)[0].strip())
        if m and m.group(1) in _KINDS:
            count += 1
    return count


def save_qasm(c: PlacedCircuit, path) -> None:
    with open(path, "w") as fh:
        fh.write(to_qasm(c))


def load_qasm(path) -> PlacedCircuit:
    with open(path) as fh:
        return from_qasm(fh.read())
