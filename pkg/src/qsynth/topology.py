"""Coupling graphs restricting where entanglers may be placed."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError


def _find(parent: list[int], i: int) -> int:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def is_connected(num_qubits: int, edges) -> bool:
    """Union-find connectivity check."""
    parent = list(range(num_qubits))
    components = num_qubits
    for a, b in edges:
        ra, rb = _find(parent, a), _find(parent, b)
        if ra != rb:
            parent[ra] = rb
            components -= 1
    return components <= 1


@dataclass(frozen=True)
class CouplingGraph:
    """Undirected qubit connectivity.

    Edges are stored as sorted ``(low, high)`` pairs in ascending order, which
    also fixes the order in which search successors are generated.
    """

    num_qubits: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValidationError("a coupling graph needs at least one qubit")
        norm = set()
        for e in self.edges:
            try:
                a, b = (int(x) for x in e)
            except (TypeError, ValueError):
                raise ValidationError(f"malformed edge {e!r}") from None
            if a == b:
                raise ValidationError(f"self-loop on qubit {a}")
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise ValidationError(
                    f"edge {e!r} references a qubit outside [0, {self.num_qubits})"
                )
            norm.add((min(a, b), max(a, b)))
        edges = tuple(sorted(norm))
        if not is_connected(self.num_qubits, edges):
            raise ValidationError("coupling graph is disconnected")
        object.__setattr__(self, "edges", edges)

    def to_dict(self) -> dict:
        return {"num_qubits": self.num_qubits, "edges": [list(e) for e in self.edges]}


def linear(n: int) -> CouplingGraph:
    return CouplingGraph(n, tuple((i, i + 1) for i in range(n - 1)))


def all_to_all(n: int) -> CouplingGraph:
    return CouplingGraph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def from_dict(doc: dict) -> CouplingGraph:
    try:
        return CouplingGraph(int(doc["num_qubits"]), tuple(tuple(e) for e in doc["edges"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed topology document: {exc}") from exc


def from_file(path) -> CouplingGraph:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    return from_dict(doc)


def resolve(spec: str, num_qubits: int) -> CouplingGraph:
    """Turn a CLI topology argument (``linear``, ``all`` or a path) into a graph."""
    if spec == "linear":
        return linear(num_qubits)
    if spec in ("all", "all_to_all", "all-to-all"):
        return all_to_all(num_qubits)
    g = from_file(spec)
    if g.num_qubits != num_qubits:
        raise ValidationError(
            f"topology has {g.num_qubits} qubits but the target has {num_qubits}"
        )
    return g
