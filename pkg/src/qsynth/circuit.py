"""Layered circuit structures, their evaluation, and the distance gradient.

A structure is an initial layer of one U3 per qubit followed by expansion
layers. Each expansion layer applies one entangler to a link and then a U3
on each of the two link qubits. Time runs left to right in the layer list;
matrices compose by left multiplication, so the circuit unitary is
``L_m ... L_1 K0``.

Parameters are packed slot by slot, three angles (theta, phi, lambda) per
U3: the initial layer in qubit order, then for every expansion layer the U3
on the lower-indexed link qubit followed by the higher-indexed one. Slots
listed in ``CircuitStructure.removed`` have been deleted (they act as the
identity) and carry no parameters.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ArityError, ConfigurationError, SizeError, ValidationError
from . import _kernels
from .gates import EntanglerSet, GateKind, gate_matrix
from .topology import CouplingGraph
from .unitary import MAX_QUBITS, UnitaryMatrix, as_matrix, distance

# Slot index -> (layer index, qubit); layer 0 is the initial layer.
Slot = tuple[int, int]


@dataclass(frozen=True)
class ExpansionLayer:
    link: tuple[int, int]
    entangler: GateKind = GateKind.CNOT

    def __post_init__(self):
        a, b = self.link
        if a == b:
            raise ValidationError(f"link qubits must differ, got {self.link}")
        if not self.entangler.is_entangler:
            raise ValidationError(f"{self.entangler} is not a two-qubit gate")
        object.__setattr__(self, "link", (int(a), int(b)))

    @property
    def qubits_sorted(self) -> tuple[int, int]:
        return tuple(sorted(self.link))


@dataclass(frozen=True)
class CircuitStructure:
    num_qubits: int
    layers: tuple[ExpansionLayer, ...] = ()
    removed: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise SizeError(f"num_qubits must be in [1, {MAX_QUBITS}], got {self.num_qubits}")
        layers = tuple(self.layers)
        for layer in layers:
            if max(layer.link) >= self.num_qubits or min(layer.link) < 0:
                raise ValidationError(
                    f"layer link {layer.link} out of range for {self.num_qubits} qubits"
                )
        object.__setattr__(self, "layers", layers)
        removed = frozenset(int(i) for i in self.removed)
        if removed and (min(removed) < 0 or max(removed) >= self.num_slots):
            raise ValidationError("removed slot index out of range")
        object.__setattr__(self, "removed", removed)

    @property
    def num_slots(self) -> int:
        return self.num_qubits + 2 * len(self.layers)

    @property
    def slots(self) -> list[Slot]:
        out = [(0, q) for q in range(self.num_qubits)]
        for k, layer in enumerate(self.layers, start=1):
            out.extend((k, q) for q in layer.qubits_sorted)
        return out

    @property
    def active_slots(self) -> list[int]:
        return [i for i in range(self.num_slots) if i not in self.removed]

    @property
    def param_count(self) -> int:
        return 3 * (self.num_slots - len(self.removed))

    @property
    def u3_count(self) -> int:
        return self.num_slots - len(self.removed)

    @property
    def cnot_count(self) -> int:
        return len(self.layers)

    def extend(self, layer: ExpansionLayer) -> "CircuitStructure":
        return CircuitStructure(self.num_qubits, self.layers + (layer,), self.removed)

    def key(self) -> tuple[int, ...]:
        """Flat integer encoding, used for hashing into RNG streams."""
        kinds = list(GateKind)
        out = [self.num_qubits]
        for layer in self.layers:
            out.extend((layer.link[0], layer.link[1], kinds.index(layer.entangler)))
        out.extend(sorted(self.removed))
        return tuple(out)

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "layers": [
                {"link": list(layer.link), "entangler": layer.entangler.value}
                for layer in self.layers
            ],
            "removed_u3": sorted(self.removed),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CircuitStructure":
        layers = tuple(
            ExpansionLayer(tuple(d["link"]), GateKind(d["entangler"])) for d in doc["layers"]
        )
        return cls(int(doc["num_qubits"]), layers, frozenset(doc.get("removed_u3", ())))


@dataclass(frozen=True, eq=False)
class PlacedCircuit:
    structure: CircuitStructure
    params: np.ndarray
    achieved_distance: float = float("nan")

    def __post_init__(self):
        p = np.array(self.params, dtype=float).ravel()
        if p.size != self.structure.param_count:
            raise ArityError(
                f"structure needs {self.structure.param_count} parameters, got {p.size}"
            )
        p.setflags(write=False)
        object.__setattr__(self, "params", p)

    @property
    def cnot_count(self) -> int:
        return self.structure.cnot_count

    @property
    def u3_count(self) -> int:
        return self.structure.u3_count

    def unitary(self) -> UnitaryMatrix:
        return instantiate(self.structure, self.params)

    def to_dict(self) -> dict:
        d = self.structure.to_dict()
        d["params"] = [float(x) for x in self.params]
        d["achieved_distance"] = float(self.achieved_distance)
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "PlacedCircuit":
        return cls(
            CircuitStructure.from_dict(doc),
            np.asarray(doc["params"], dtype=float),
            float(doc.get("achieved_distance", float("nan"))),
        )


def initial_structure(num_qubits: int) -> CircuitStructure:
    return CircuitStructure(num_qubits)


def successors(
    s: CircuitStructure, g: CouplingGraph, es: EntanglerSet
) -> list[CircuitStructure]:
    """One child per (edge, entangler kind), ordered by edge then kind."""
    if g.num_qubits != s.num_qubits:
        raise SizeError(
            f"coupling graph has {g.num_qubits} qubits, structure has {s.num_qubits}"
        )
    if not g.edges:
        raise ConfigurationError("coupling graph has no edges to place entanglers on")
    return [s.extend(ExpansionLayer(edge, kind)) for edge in g.edges for kind in es]


def cnot_count(s: CircuitStructure) -> int:
    return s.cnot_count


def critical_path_depth(s: CircuitStructure) -> int:
    """ASAP depth counting every U3 and entangler as one time step."""
    level = [0] * s.num_qubits
    removed = s.removed
    for q in range(s.num_qubits):
        if q not in removed:
            level[q] = 1
    slot = s.num_qubits
    for layer in s.layers:
        a, b = layer.link
        t = max(level[a], level[b]) + 1
        level[a] = level[b] = t
        for q in layer.qubits_sorted:
            if slot not in removed:
                level[q] += 1
            slot += 1
    return max(level)


def gate_count(s: CircuitStructure) -> int:
    return s.u3_count + s.cnot_count


def parallelism(s: CircuitStructure) -> float:
    """Gates per critical-path step (our definition: gate_count / depth)."""
    d = critical_path_depth(s)
    return gate_count(s) / d if d else 0.0


# ---------------------------------------------------------------------------
# evaluation


class CircuitEvaluator:
    """Flattened gate list for fast evaluation of one structure.

    Instances are cached per structure via :func:`evaluator`.
    """

    def __init__(self, s: CircuitStructure):
        self.structure = s
        self.n = n = s.num_qubits
        self.dim = 2**n
        self.active = np.array(s.active_slots, dtype=int)
        self.num_slots = s.num_slots
        removed = s.removed
        kinds, q0, q1, refs = [], [], [], []

        def add(kind, a, b, ref):
            kinds.append(kind)
            q0.append(a)
            q1.append(b)
            refs.append(ref)

        for q in range(n):
            if q not in removed:
                add(0, q, -1, q)
        fixed = []
        slot = n
        for k, layer in enumerate(s.layers):
            add(1, layer.link[0], layer.link[1], k)
            fixed.append(gate_matrix(layer.entangler))
            for q in layer.qubits_sorted:
                if slot not in removed:
                    add(0, q, -1, slot)
                slot += 1
        self.kinds = np.array(kinds, dtype=np.int64)
        self.q0 = np.array(q0, dtype=np.int64)
        self.q1 = np.array(q1, dtype=np.int64)
        self.refs = np.array(refs, dtype=np.int64)
        self.fixed = (
            np.array(fixed, dtype=np.complex128)
            if fixed
            else np.zeros((0, 4, 4), dtype=np.complex128)
        )

    def _slot_matrices(self, params, with_grad):
        p = np.asarray(params, dtype=float).ravel()
        if p.size != 3 * self.active.size:
            raise ArityError(
                f"structure needs {3 * self.active.size} parameters, got {p.size}"
            )
        full = np.zeros((self.num_slots, 3))
        full[self.active] = p.reshape(-1, 3)
        return _kernels.u3_tables(full, with_grad)

    def unitary(self, params) -> np.ndarray:
        u, _ = self._slot_matrices(params, False)
        return _kernels.forward(self.n, self.kinds, self.q0, self.q1, self.refs, u, self.fixed)

    def value_and_grad(self, params, target: np.ndarray):
        """Distance to ``target`` and its gradient with respect to ``params``."""
        u, du = self._slot_matrices(params, True)
        v, dtr = _kernels.trace_gradient(
            self.n, self.kinds, self.q0, self.q1, self.refs, u, du, self.fixed, target
        )
        value = distance(target, v)
        tr = complex(np.vdot(target, v))
        dtr = dtr[self.active].ravel()
        mag = abs(tr)
        if mag < 1e-300:
            return value, np.zeros(dtr.size)
        grad = -np.real(np.conj(tr) * dtr) / (mag * self.dim)
        return value, grad


@functools.lru_cache(maxsize=8192)
def evaluator(s: CircuitStructure) -> CircuitEvaluator:
    return CircuitEvaluator(s)


def instantiate(s: CircuitStructure, params: Sequence[float]) -> UnitaryMatrix:
    """The unitary implemented by ``s`` with the given parameters."""
    return UnitaryMatrix(evaluator(s).unitary(params), s.num_qubits)


def _target_array(s: CircuitStructure, target) -> np.ndarray:
    t = np.ascontiguousarray(as_matrix(target))
    if t.shape[0] != 2**s.num_qubits:
        raise SizeError(
            f"target dimension {t.shape[0]} does not match {s.num_qubits} qubits"
        )
    return t


def objective(s: CircuitStructure, params, target) -> float:
    t = _target_array(s, target)
    return distance(t, evaluator(s).unitary(params))


def objective_and_gradient(s: CircuitStructure, params, target) -> tuple[float, np.ndarray]:
    return evaluator(s).value_and_grad(params, _target_array(s, target))
