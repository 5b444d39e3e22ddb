"""Topology-aware quantum circuit synthesis."""

from .benchmarks import BenchmarkSpec, generate
from .circuit import (
    CircuitStructure,
    ExpansionLayer,
    PlacedCircuit,
    initial_structure,
    instantiate,
    successors,
)
from .errors import (
    ArityError,
    ConfigurationError,
    DepthLimitError,
    SizeError,
    SynthesisError,
    ValidationError,
)
from .gates import EntanglerSet, GateKind, gate_matrix
from .optimize import MultistartConfig, lbfgs, multistart_minimize
from .postprocess import ResynthConfig, reduce_dimensionality, resynthesize
from .qasm import from_qasm, to_qasm
from .search import LeapConfig, Mode, SynthesisReport, leap_synthesize
from .topology import CouplingGraph, all_to_all, linear
from .unitary import UnitaryMatrix, distance

__all__ = [
    "ArityError",
    "BenchmarkSpec",
    "CircuitStructure",
    "ConfigurationError",
    "CouplingGraph",
    "DepthLimitError",
    "EntanglerSet",
    "ExpansionLayer",
    "GateKind",
    "LeapConfig",
    "Mode",
    "MultistartConfig",
    "PlacedCircuit",
    "ResynthConfig",
    "SizeError",
    "SynthesisError",
    "SynthesisReport",
    "UnitaryMatrix",
    "ValidationError",
    "all_to_all",
    "distance",
    "from_qasm",
    "gate_matrix",
    "generate",
    "initial_structure",
    "instantiate",
    "lbfgs",
    "leap_synthesize",
    "linear",
    "multistart_minimize",
    "reduce_dimensionality",
    "resynthesize",
    "successors",
    "to_qasm",
]
