"""A* search over layered circuit structures with prefix formation.

Every node is a structure together with its best parameters and the
distance they achieve. The queue is ordered by
``heuristic(score, a) + cnot_depth`` with ties broken by score and then by
insertion order, so a run is deterministic for a fixed seed.

In ``LEAP`` mode the search keeps a history of (depth, best score) pairs
and fits a least-squares line through it. When a new overall best beats the
line's prediction at its depth, and enough nodes have been evaluated since
the last prefix, the search stops, fixes that node's structure as a prefix
and restarts from it with an empty queue. Parameters of the prefix remain
free in all later instantiations; the prefix's parameters only warm-start
its children.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .circuit import CircuitStructure, PlacedCircuit, _target_array, initial_structure, successors
from .errors import ConfigurationError, DepthLimitError, SizeError
from .gates import CNOT_ONLY, EntanglerSet
from .optimize import MultistartConfig, OptimizerResult, cheap_instantiate, multistart_minimize
from .topology import CouplingGraph, linear
from .unitary import UnitaryMatrix

logger = logging.getLogger(__name__)


class Mode(enum.Enum):
    QSEARCH = "qsearch"
    LEAP = "leap"


def default_delta(num_qubits: int) -> int:
    return max(1, round(3 * 4**num_qubits / 8))


@dataclass(frozen=True)
class LeapConfig:
    """Search settings.

    ``delta`` caps the CNOT depth of expanded nodes (``None`` picks
    :func:`default_delta`). ``coupling`` defaults to a linear chain.
    ``multistart`` switches node instantiation from the cheap tier (warm
    start plus ``restarts`` random restarts) to the full multistart driver.
    ``max_evaluations`` bounds the number of instantiated nodes.
    ``min_improvement`` is the score decrease that counts as progress; smaller
    gains are treated as optimizer noise on a plateau.
    """

    epsilon: float = 1e-10
    delta: Optional[int] = None
    heuristic_weight: float = 15.0
    min_history_points: int = 5
    min_nodes_since_prefix: int = 10
    mode: Mode = Mode.LEAP
    rng_seed: int = 0
    coupling: Optional[CouplingGraph] = None
    entanglers: EntanglerSet = CNOT_ONLY
    restarts: int = 4
    local_max_evals: int = 2000
    multistart: Optional[MultistartConfig] = None
    max_evaluations: Optional[int] = None
    workers: int = 1
    min_improvement: float = 1e-9

    def __post_init__(self):
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", Mode(self.mode))
        if not self.epsilon > 0:
            raise ConfigurationError("epsilon must be positive")
        if self.delta is not None and self.delta < 1:
            raise ConfigurationError("delta must be at least 1")
        if self.min_history_points < 2:
            raise ConfigurationError("min_history_points must be at least 2")
        if self.min_nodes_since_prefix < 0:
            raise ConfigurationError("min_nodes_since_prefix must be non-negative")
        if self.restarts < 0:
            raise ConfigurationError("restarts must be non-negative")
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")
        if self.min_improvement < 0:
            raise ConfigurationError("min_improvement must be non-negative")
        if self.max_evaluations is not None and self.max_evaluations < 1:
            raise ConfigurationError("max_evaluations must be positive")

    def delta_for(self, num_qubits: int) -> int:
        return self.delta if self.delta is not None else default_delta(num_qubits)

    def coupling_for(self, num_qubits: int) -> CouplingGraph:
        g = self.coupling if self.coupling is not None else linear(num_qubits)
        if g.num_qubits != num_qubits:
            raise SizeError(f"coupling graph has {g.num_qubits} qubits, target has {num_qubits}")
        return g


@dataclass(eq=False)
class SearchNode:
    structure: CircuitStructure
    best_params: np.ndarray
    score: float
    priority: float = 0.0

    @property
    def depth(self) -> int:
        return self.structure.cnot_count

    def placed(self) -> PlacedCircuit:
        return PlacedCircuit(self.structure, self.best_params, self.score)


@dataclass
class ProgressHistory:
    """Best scores against the depth at which they were found.

    A point is kept only if it is strictly better than the last one and
    lies at a strictly greater depth, so depths increase and scores
    decrease along the list.
    """

    points: list = field(default_factory=list)

    def add(self, depth: int, score: float) -> bool:
        if self.points:
            last_depth, last_score = self.points[-1]
            if depth <= last_depth or score >= last_score:
                return False
        self.points.append((int(depth), float(score)))
        return True

    def __len__(self):
        return len(self.points)


def heuristic(x: float, a: float) -> float:
    return x * a


def fit_line(points) -> tuple[float, float]:
    """Ordinary least squares ``(slope, intercept)`` through (x, y) pairs."""
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    xm, ym = xs.mean(), ys.mean()
    sxx = float(np.sum((xs - xm) ** 2))
    slope = float(np.sum((xs - xm) * (ys - ym)) / sxx) if sxx > 0 else 0.0
    return slope, float(ym - slope * xm)


def predict_score(history: ProgressHistory, d: int, min_points: int = 5) -> Optional[float]:
    if len(history) < min_points:
        return None
    slope, intercept = fit_line(history.points)
    return slope * d + intercept


@dataclass
class SynthesisReport:
    circuit: PlacedCircuit
    prefix_boundaries: list
    nodes_expanded: int
    nodes_evaluated: int
    wall_time: float
    success: bool = True
    events: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "circuit": self.circuit.to_dict(),
            "prefix_boundaries": list(self.prefix_boundaries),
            "nodes_expanded": self.nodes_expanded,
            "nodes_evaluated": self.nodes_evaluated,
            "wall_time": self.wall_time,
            "success": self.success,
        }


@dataclass
class SearchState:
    """Mutable bookkeeping shared by successive inner searches."""

    history: ProgressHistory = field(default_factory=ProgressHistory)
    best: Optional[SearchNode] = None
    nodes_expanded: int = 0
    nodes_evaluated: int = 0
    since_prefix: int = 0
    events: list = field(default_factory=list)
    trace: Optional[Callable[[dict], None]] = None

    def log(self, kind: str, node: SearchNode, **extra):
        rec = {
            "event": kind,
            "depth": node.depth,
            "score": float(node.score),
            "priority": float(node.priority),
        }
        rec.update(extra)
        self.events.append(rec)
        if self.trace is not None:
            self.trace(rec)


def candidate_rng(seed: int, structure: CircuitStructure) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, *structure.key()])


def _instantiate(
    structure: CircuitStructure,
    target: np.ndarray,
    warm: np.ndarray,
    accept: float,
    cfg: LeapConfig,
) -> OptimizerResult:
    if cfg.multistart is not None:
        seed = int(candidate_rng(cfg.rng_seed, structure).integers(2**32))
        ms = replace(cfg.multistart, rng_seed=seed)
        return multistart_minimize(structure, target, ms, cfg.epsilon, seeds=[warm])
    return cheap_instantiate(
        structure,
        target,
        warm,
        candidate_rng(cfg.rng_seed, structure),
        cfg.epsilon,
        restarts=cfg.restarts,
        max_evals=cfg.local_max_evals,
        accept=accept,
    )


def _instantiate_job(args):
    structure, target, warm, accept, cfg = args
    res = _instantiate(structure, target, warm, accept, cfg)
    return res.params, res.value


def _worker_count(cfg: LeapConfig) -> int:
    env = os.environ.get("QSYNTH_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigurationError(f"QSYNTH_WORKERS must be an integer, got {env!r}") from None
    return cfg.workers


def _evaluate_children(parent: SearchNode, children, target, cfg, pool) -> list[SearchNode]:
    warm = np.concatenate([parent.best_params, np.zeros(6)])
    # A child that cannot beat its parent from the warm start gets restarts.
    accept = parent.score - cfg.min_improvement
    jobs = [(c, target, warm, accept, cfg) for c in children]
    if pool is None:
        results = map(_instantiate_job, jobs)
    else:
        results = pool.map(_instantiate_job, jobs)
    return [
        SearchNode(c, np.asarray(p, dtype=float), float(v)) for c, (p, v) in zip(children, results)
    ]


def _root_node(target: np.ndarray, num_qubits: int, cfg: LeapConfig) -> SearchNode:
    s = initial_structure(num_qubits)
    res = _instantiate(s, target, np.zeros(s.param_count), cfg.epsilon, cfg)
    return SearchNode(s, res.params, res.value)


def inner_synthesize(
    target,
    root: SearchNode | CircuitStructure,
    cfg: LeapConfig,
    state: Optional[SearchState] = None,
    pool=None,
) -> tuple[SearchNode, bool]:
    """Run A* from ``root`` until a solution or a prefix is found.

    Returns ``(node, True)`` for a node within ``epsilon`` and
    ``(node, False)`` when a prefix formed at ``node``. Raises
    :class:`DepthLimitError` if the queue empties or the evaluation budget
    runs out first.
    """
    state = state if state is not None else SearchState()
    if isinstance(root, CircuitStructure):
        t = _target_array(root, target)
        warm = np.zeros(root.param_count)
        res = _instantiate(root, t, warm, cfg.epsilon, cfg)
        root = SearchNode(root, res.params, res.value)
        state.nodes_evaluated += 1
    n = root.structure.num_qubits
    t = _target_array(root.structure, target)
    graph = cfg.coupling_for(n)
    delta = cfg.delta_for(n)
    a = cfg.heuristic_weight

    if state.best is None or root.score < state.best.score:
        state.best = root
        state.history.add(root.depth, root.score)
    root.priority = heuristic(root.score, a) + root.depth
    if root.score < cfg.epsilon:
        return root, True
    if root.depth >= delta:
        raise DepthLimitError(f"no solution within depth {delta}", best=state.best)

    seq = itertools.count()
    queue = [(root.priority, root.score, next(seq), root)]
    state.log("pushed", root)
    while queue:
        _, _, _, node = heapq.heappop(queue)
        state.log("popped", node)
        state.nodes_expanded += 1
        children = successors(node.structure, graph, cfg.entanglers)
        if cfg.max_evaluations is not None:
            left = cfg.max_evaluations - state.nodes_evaluated
            if left <= 0:
                raise DepthLimitError("evaluation budget exhausted", best=state.best)
            children = children[:left]
        for child in _evaluate_children(node, children, t, cfg, pool):
            state.nodes_evaluated += 1
            state.since_prefix += 1
            child.priority = heuristic(child.score, a) + child.depth
            state.log("evaluated", child)
            if child.score < cfg.epsilon:
                state.best = child
                return child, True
            if child.score < state.best.score - cfg.min_improvement:
                predicted = predict_score(state.history, child.depth, cfg.min_history_points)
                state.history.add(child.depth, child.score)
                state.best = child
                if (
                    cfg.mode is Mode.LEAP
                    and child.depth < delta
                    and predicted is not None
                    and child.score < predicted
                    and state.since_prefix >= cfg.min_nodes_since_prefix
                ):
                    state.since_prefix = 0
                    state.log("prefix", child, predicted=float(predicted))
                    return child, False
            if child.depth < delta:
                heapq.heappush(queue, (child.priority, child.score, next(seq), child))
                state.log("pushed", child)
        if cfg.max_evaluations is not None and state.nodes_evaluated >= cfg.max_evaluations:
            raise DepthLimitError("evaluation budget exhausted", best=state.best)
    raise DepthLimitError(f"no solution within depth {delta}", best=state.best)


def leap_synthesize(
    target,
    cfg: LeapConfig = LeapConfig(),
    *,
    trace: Optional[Callable[[dict], None]] = None,
) -> SynthesisReport:
    """Synthesize ``target`` (a :class:`UnitaryMatrix` or square array).

    Raises :class:`DepthLimitError` with a best-effort report attached when
    the search fails.
    """
    if not isinstance(target, UnitaryMatrix):
        target = UnitaryMatrix.from_array(target)
    n = target.num_qubits
    t = np.ascontiguousarray(target.matrix)
    cfg.coupling_for(n)
    start = time.perf_counter()
    state = SearchState(trace=trace)
    boundaries: list[int] = []
    workers = _worker_count(cfg)
    pool = ProcessPoolExecutor(workers) if workers > 1 else None

    def report(node: SearchNode, success: bool) -> SynthesisReport:
        return SynthesisReport(
            node.placed(),
            list(boundaries),
            state.nodes_expanded,
            state.nodes_evaluated,
            time.perf_counter() - start,
            success,
            state.events,
        )

    try:
        root = _root_node(t, n, cfg)
        state.nodes_evaluated += 1
        state.log("evaluated", root)
        while True:
            try:
                node, final = inner_synthesize(t, root, cfg, state, pool)
            except DepthLimitError as exc:
                exc.report = report(exc.best, False)
                raise
            if final:
                break
            boundaries.append(node.depth)
            logger.info(
                "prefix at depth %d (score %.3e, %d nodes evaluated)",
                node.depth,
                node.score,
                state.nodes_evaluated,
            )
            root = node
    finally:
        if pool is not None:
            pool.shutdown()
    out = report(node, True)
    logger.info(
        "solved with %d CNOTs, distance %.2e, %d nodes, %.1fs",
        node.depth,
        node.score,
        out.nodes_evaluated,
        out.wall_time,
    )
    return out


def write_events(events, path) -> None:
    with open(path, "w") as fh:
        for rec in events:
            fh.write(json.dumps(rec) + "\n")


__all__ = [
    "LeapConfig",
    "Mode",
    "ProgressHistory",
    "SearchNode",
    "SearchState",
    "SynthesisReport",
    "default_delta",
    "fit_line",
    "heuristic",
    "inner_synthesize",
    "leap_synthesize",
    "predict_score",
    "write_events",
]
