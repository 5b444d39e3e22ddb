"""Command-line front end.

``qsynth synth`` runs the full pipeline (search, optional re-synthesis,
optional U3 deletion) and writes QASM plus a JSON report. ``qsynth verify``
re-reads a QASM file and checks it against a target.

Exit status: 0 on success, 1 on bad input, 2 when the search hits its depth
or evaluation limit (best-effort outputs are still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from . import benchmarks
from .circuit import PlacedCircuit, critical_path_depth, parallelism
from .errors import DepthLimitError, SynthesisError
from .gates import EntanglerSet
from .optimize import MultistartConfig
from .postprocess import (
    ResynthConfig,
    deleted_positions,
    deletion_histogram,
    reduce_dimensionality,
    resynthesize,
)
from .qasm import load_qasm, save_qasm
from .search import LeapConfig, Mode, leap_synthesize
from .topology import resolve
from .unitary import UnitaryMatrix, distance, load_unitary

logger = logging.getLogger("qsynth")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DEPTH = 2

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "success",
        "cnot_count",
        "u3_count",
        "depth",
        "parallelism",
        "distance",
        "wall_time_s",
        "nodes_evaluated",
        "nodes_expanded",
        "prefix_boundaries",
        "search_cnot_count",
        "deleted_u3_positions",
        "deleted_u3_histogram",
        "seed",
        "config",
        "circuit",
    ],
    "properties": {
        "success": {"type": "boolean"},
        "cnot_count": {"type": "integer", "minimum": 0},
        "u3_count": {"type": "integer", "minimum": 0},
        "depth": {"type": "integer", "minimum": 0},
        "parallelism": {"type": "number", "minimum": 0},
        "distance": {"type": "number", "minimum": 0, "maximum": 1},
        "wall_time_s": {"type": "number", "minimum": 0},
        "nodes_evaluated": {"type": "integer", "minimum": 0},
        "nodes_expanded": {"type": "integer", "minimum": 0},
        "prefix_boundaries": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "search_cnot_count": {"type": "integer", "minimum": 0},
        "deleted_u3_positions": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "deleted_u3_histogram": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "seed": {"type": "integer"},
        "config": {"type": "object"},
        "circuit": {
            "type": "object",
            "required": ["num_qubits", "layers", "removed_u3", "params"],
            "properties": {
                "num_qubits": {"type": "integer", "minimum": 1},
                "layers": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["link", "entangler"],
                        "properties": {
                            "link": {
                                "type": "array",
                                "items": {"type": "integer", "minimum": 0},
                                "minItems": 2,
                                "maxItems": 2,
                            },
                            "entangler": {"enum": ["cnot", "iswap", "sqcnot", "sqisw"]},
                        },
                    },
                },
                "removed_u3": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "params": {"type": "array", "items": {"type": "number"}},
            },
        },
    },
}


@dataclass(frozen=True)
class RunConfig:
    target: str
    topology: str = "linear"
    gateset: str = "cnot"
    epsilon: float = 1e-10
    delta: Optional[int] = None
    mode: str = "leap"
    heuristic_weight: float = 15.0
    num_starts: int = 4
    resynth: bool = True
    window: Optional[int] = None
    reduce: bool = True
    seed: int = 0
    workers: int = 1
    max_evaluations: Optional[int] = None
    qasm: Optional[str] = None
    report: Optional[str] = None
    trace: Optional[str] = None


def load_target(spec: str) -> UnitaryMatrix:
    """A benchmark name such as ``qft3``, or a path to a unitary JSON file."""
    if os.path.exists(spec):
        return load_unitary(spec)
    if benchmarks.is_benchmark(spec):
        return benchmarks.generate(benchmarks.parse(spec))
    raise FileNotFoundError(f"{spec!r} is neither a file nor a known benchmark")


def _build(cfg: RunConfig, n: int) -> tuple[LeapConfig, MultistartConfig]:
    ms = MultistartConfig(num_starts=cfg.num_starts, eval_budget=20_000, rng_seed=cfg.seed)
    leap = LeapConfig(
        epsilon=cfg.epsilon,
        delta=cfg.delta,
        heuristic_weight=cfg.heuristic_weight,
        mode=Mode(cfg.mode),
        rng_seed=cfg.seed,
        coupling=resolve(cfg.topology, n),
        entanglers=EntanglerSet.parse(cfg.gateset),
        max_evaluations=cfg.max_evaluations,
        workers=cfg.workers,
    )
    return leap, ms


def synthesize(cfg: RunConfig, target: Optional[UnitaryMatrix] = None) -> dict:
    """Run the pipeline and return the report dictionary.

    Raises :class:`DepthLimitError` with the best-effort report attached as
    ``exc.report`` (a dictionary) when the search fails.
    """
    start = time.perf_counter()
    target = target if target is not None else load_target(cfg.target)
    leap, ms = _build(cfg, target.num_qubits)
    trace_fh = open(cfg.trace, "w") if cfg.trace else None

    def trace(rec):
        trace_fh.write(json.dumps(rec) + "\n")

    try:
        result = leap_synthesize(target, leap, trace=trace if trace_fh else None)
    except DepthLimitError as exc:
        if exc.report is not None:
            exc.report = _report(cfg, target, exc.report, exc.report.circuit, start, False)
        raise
    finally:
        if trace_fh:
            trace_fh.close()
    circuit = result.circuit
    if cfg.resynth and result.prefix_boundaries:
        circuit = resynthesize(
            circuit,
            result.prefix_boundaries,
            target,
            ResynthConfig(window_cnots=cfg.window, multistart=ms),
            cfg.epsilon,
            leap,
        )
    if cfg.reduce:
        circuit = reduce_dimensionality(circuit, target, cfg.epsilon, ms)
    return _report(cfg, target, result, circuit, start, True)


def _report(cfg, target, result, circuit: PlacedCircuit, start, success) -> dict:
    s = circuit.structure
    positions = deleted_positions(s)
    return {
        "success": success,
        "cnot_count": circuit.cnot_count,
        "u3_count": circuit.u3_count,
        "depth": critical_path_depth(s),
        "parallelism": parallelism(s),
        "distance": distance(target, circuit.unitary()),
        "wall_time_s": time.perf_counter() - start,
        "nodes_evaluated": result.nodes_evaluated,
        "nodes_expanded": result.nodes_expanded,
        "prefix_boundaries": list(result.prefix_boundaries),
        "search_cnot_count": result.circuit.cnot_count,
        "deleted_u3_positions": positions,
        "deleted_u3_histogram": deletion_histogram(positions, s.cnot_count),
        "seed": cfg.seed,
        "config": asdict(cfg),
        "circuit": circuit.to_dict(),
    }


def _write_outputs(cfg: RunConfig, report: dict) -> None:
    if cfg.qasm:
        save_qasm(PlacedCircuit.from_dict(report["circuit"]), cfg.qasm)
    if cfg.report:
        with open(cfg.report, "w") as fh:
            json.dump(report, fh, indent=2)


def run(cfg: RunConfig) -> int:
    try:
        report = synthesize(cfg)
    except DepthLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.report, dict):
            _write_outputs(cfg, exc.report)
        return EXIT_DEPTH
    except (SynthesisError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _write_outputs(cfg, report)
    print(
        f"{report['cnot_count']} entanglers, {report['u3_count']} U3, "
        f"distance {report['distance']:.2e}, {report['wall_time_s']:.1f}s"
    )
    return EXIT_OK


def verify(qasm_path: str, target: str, epsilon: float = 1e-10) -> int:
    try:
        circuit = load_qasm(qasm_path)
        u = load_target(target)
        d = distance(u, circuit.unitary())
    except (SynthesisError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    ok = d <= epsilon
    print(f"distance {d:.3e} {'<=' if ok else '>'} {epsilon:.1e}")
    return EXIT_OK if ok else EXIT_INPUT


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qsynth", description="Topology-aware unitary synthesis.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="synthesize a circuit for a target unitary")
    s.add_argument("--target", required=True, help="benchmark name or unitary JSON file")
    s.add_argument("--topology", default="linear", help="linear, all, or a coupling-graph file")
    s.add_argument("--gateset", default="cnot", help="comma-separated entanglers")
    s.add_argument("--epsilon", type=float, default=1e-10)
    s.add_argument("--delta", type=int, default=None, help="maximum entangler depth")
    s.add_argument("--mode", choices=[m.value for m in Mode], default="leap")
    s.add_argument("--heuristic-weight", type=float, default=15.0)
    s.add_argument("--num-starts", type=int, default=4, help="multistart runs in post-processing")
    s.add_argument("--resynth", action=argparse.BooleanOptionalAction, default=True)
    s.add_argument("--window", type=int, default=None, help="re-synthesis window in entanglers")
    s.add_argument("--reduce", action=argparse.BooleanOptionalAction, default=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1, help="overridden by QSYNTH_WORKERS")
    s.add_argument("--max-evaluations", type=int, default=None)
    s.add_argument("--qasm", help="write the circuit as OpenQASM 2.0")
    s.add_argument("--report", help="write the JSON report")
    s.add_argument("--trace", help="write search events as JSON lines")

    v = sub.add_parser("verify", help="check a QASM circuit against a target")
    v.add_argument("qasm")
    v.add_argument("--target", required=True)
    v.add_argument("--epsilon", type=float, default=1e-10)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    if args.command == "verify":
        return verify(args.qasm, args.target, args.epsilon)
    fields = {k: v for k, v in vars(args).items() if k not in ("command", "verbose")}
    try:
        cfg = RunConfig(**fields)
    except (TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
