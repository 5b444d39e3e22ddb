"""Parameter instantiation: a limited-memory BFGS minimiser and a multistart
driver with sample-admission rules.

The multistart driver samples the periodic box ``[0, 2*pi)^k`` uniformly and
starts a local run from a sample only if

1. the sample has not been used as a start before,
2. it is not already stationary (gradient max-norm above ``STATIONARY_GTOL``),
3. no other known point within the current radius has a smaller value.

The radius shrinks geometrically after each batch. Distances use per
coordinate wraparound, since every circuit parameter is an angle.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .circuit import CircuitStructure, _target_array, evaluator
from .errors import ArityError, ConfigurationError, ValidationError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
GTOL = 1e-9
STATIONARY_GTOL = 1e-6
DEFAULT_MAX_EVALS = 2000

Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass
class OptimizerResult:
    params: np.ndarray
    value: float
    evaluations: int
    converged: bool
    start: Optional[np.ndarray] = None
    runs: list = field(default_factory=list)

    def log_entry(self) -> dict:
        return {
            "start": None if self.start is None else [float(x) for x in self.start],
            "value": float(self.value),
            "evaluations": int(self.evaluations),
        }


@dataclass(frozen=True)
class MultistartConfig:
    num_starts: int = 12
    sample_batch: Optional[int] = None
    initial_radius: float = math.pi
    radius_decay: float = 0.7
    eval_budget: int = 200_000
    rng_seed: int = 0
    local_max_evals: int = DEFAULT_MAX_EVALS

    def __post_init__(self):
        if self.num_starts < 1:
            raise ConfigurationError("num_starts must be positive")
        if self.sample_batch is None:
            object.__setattr__(self, "sample_batch", 4 * self.num_starts)
        if self.sample_batch < 1:
            raise ConfigurationError("sample_batch must be positive")
        if self.eval_budget < 1:
            raise ConfigurationError("eval_budget must be positive")
        if not 0.0 < self.radius_decay < 1.0:
            raise ConfigurationError("radius_decay must lie in (0, 1)")
        if self.initial_radius <= 0:
            raise ConfigurationError("initial_radius must be positive")


# ---------------------------------------------------------------------------
# line search


class _Counter:
    def __init__(self, fun: Objective, limit: int):
        self.fun = fun
        self.limit = limit
        self.count = 0

    @property
    def exhausted(self) -> bool:
        return self.count >= self.limit

    def __call__(self, x):
        self.count += 1
        f, g = self.fun(x)
        return float(f), np.asarray(g, dtype=float)


def _cubic_step(a, fa, da, b, fb, db):
    """Minimiser of the cubic through two points with slopes, or None."""
    d1 = da + db - 3.0 * (fa - fb) / (a - b)
    rad = d1 * d1 - da * db
    if rad < 0:
        return None
    d2 = math.copysign(math.sqrt(rad), b - a)
    denom = db - da + 2.0 * d2
    if denom == 0:
        return None
    return b - (b - a) * (db + d2 - d1) / denom


def _zoom(phi, counter, f0, d0, lo, hi, c1, c2):
    # lo/hi are (alpha, f, g, dphi)
    for _ in range(30):
        if counter.exhausted:
            break
        a_lo, a_hi = lo[0], hi[0]
        width = abs(a_hi - a_lo)
        if width < 1e-16:
            break
        trial = _cubic_step(lo[0], lo[1], lo[3], hi[0], hi[1], hi[3])
        left, right = min(a_lo, a_hi), max(a_lo, a_hi)
        if trial is None or not (left + 0.1 * width <= trial <= right - 0.1 * width):
            trial = 0.5 * (a_lo + a_hi)
        f, g, dphi = phi(trial)
        if not math.isfinite(f) or f > f0 + c1 * trial * d0 or f >= lo[1]:
            hi = (trial, f, g, dphi)
        else:
            if abs(dphi) <= -c2 * d0:
                return trial, f, g
            if dphi * (a_hi - a_lo) >= 0:
                hi = lo
            lo = (trial, f, g, dphi)
    if lo[0] > 0:
        return lo[0], lo[1], lo[2]
    return None


def _line_search(fun: _Counter, x, f0, g0, d, alpha1, c1=1e-4, c2=0.9):
    """Strong-Wolfe line search along ``d``; returns (alpha, f, g) or None."""
    d0 = float(g0 @ d)

    def phi(alpha):
        f, g = fun(x + alpha * d)
        return f, g, float(g @ d)

    prev = (0.0, f0, g0, d0)
    alpha = alpha1
    for i in range(25):
        if fun.exhausted:
            break
        f, g, dphi = phi(alpha)
        if not math.isfinite(f):
            alpha *= 0.5
            continue
        if f > f0 + c1 * alpha * d0 or (i > 0 and f >= prev[1]):
            return _zoom(phi, fun, f0, d0, prev, (alpha, f, g, dphi), c1, c2)
        if abs(dphi) <= -c2 * d0:
            return alpha, f, g
        if dphi >= 0:
            return _zoom(phi, fun, f0, d0, (alpha, f, g, dphi), prev, c1, c2)
        prev = (alpha, f, g, dphi)
        alpha *= 2.0
    if prev[0] > 0:
        return prev[0], prev[1], prev[2]
    return None


# ---------------------------------------------------------------------------
# local minimiser


def lbfgs(
    fun: Objective,
    x0: Sequence[float],
    *,
    tol: float = 0.0,
    max_evals: int = DEFAULT_MAX_EVALS,
    gtol: float = GTOL,
    ftol: float = 1e-10,
    memory: int = 10,
) -> OptimizerResult:
    """Minimise ``fun`` (returning value and gradient) from ``x0``.

    Stops when the value drops below ``tol``, the gradient max-norm drops
    below ``gtol``, the relative decrease of one iteration falls under
    ``ftol``, or ``max_evals`` objective calls have been spent. The best
    value is non-increasing over iterations.
    """
    x = np.array(x0, dtype=float)
    start = x.copy()
    counted = _Counter(fun, max_evals)
    f, g = counted(x)
    if not math.isfinite(f) or not np.all(np.isfinite(g)):
        raise ValidationError("objective is not finite at the starting point")
    if f < tol:
        return OptimizerResult(x, f, counted.count, True, start)
    s_hist: deque = deque(maxlen=memory)
    y_hist: deque = deque(maxlen=memory)
    converged = False
    first = True
    while not counted.exhausted:
        if np.max(np.abs(g)) < gtol:
            converged = True
            break
        q = g.copy()
        alphas = []
        for s, y in zip(reversed(s_hist), reversed(y_hist)):
            rho = 1.0 / float(y @ s)
            a = rho * float(s @ q)
            alphas.append((a, rho, s, y))
            q -= a * y
        if s_hist:
            s, y = s_hist[-1], y_hist[-1]
            q *= float(s @ y) / float(y @ y)
        for a, rho, s, y in reversed(alphas):
            b = rho * float(y @ q)
            q += (a - b) * s
        d = -q
        if float(d @ g) >= 0:
            s_hist.clear()
            y_hist.clear()
            d = -g
        step0 = min(1.0, 1.0 / max(np.max(np.abs(g)), 1e-300)) if first or not s_hist else 1.0
        found = _line_search(counted, x, f, g, d, step0)
        if found is None:
            if s_hist:
                s_hist.clear()
                y_hist.clear()
                first = True
                continue
            break
        alpha, f_new, g_new = found
        s = alpha * d
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-16 * float(y @ y):
            s_hist.append(s)
            y_hist.append(y)
        x = x + s
        f_prev, f, g = f, f_new, g_new
        first = False
        if f < tol:
            converged = True
            break
        if f_prev - f <= ftol * max(abs(f), 1e-300):
            break
    if not converged and np.max(np.abs(g)) < gtol:
        converged = True
    return OptimizerResult(x, f, counted.count, converged, start)


def _structure_objective(structure: CircuitStructure, target) -> Objective:
    ev = evaluator(structure)
    t = _target_array(structure, target)
    return lambda x: ev.value_and_grad(x, t)


def local_minimize(
    structure: CircuitStructure,
    target,
    x0: Sequence[float],
    tol: float,
    max_evals: int = DEFAULT_MAX_EVALS,
) -> OptimizerResult:
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != structure.param_count:
        raise ArityError(f"x0 has {x0.size} entries, structure needs {structure.param_count}")
    return lbfgs(_structure_objective(structure, target), x0, tol=tol, max_evals=max_evals)


# ---------------------------------------------------------------------------
# multistart


def wrapped_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distance on the torus ``[0, 2*pi)^k``; broadcasts over rows."""
    diff = np.abs(np.mod(a - b, TWO_PI))
    diff = np.minimum(diff, TWO_PI - diff)
    return np.sqrt(np.sum(diff * diff, axis=-1))


@dataclass
class _Point:
    x: np.ndarray
    value: float
    gnorm: float
    explored: bool = False


def multistart(
    fun: Objective,
    num_params: int,
    cfg: MultistartConfig,
    tol: float,
    *,
    seeds: Sequence[Sequence[float]] = (),
    local: Optional[Callable[[np.ndarray, int], OptimizerResult]] = None,
) -> OptimizerResult:
    """Run local minimisations from admitted samples; return the best result.

    ``seeds`` are user-supplied points added to the pool ahead of the first
    uniform batch. ``local(x0, max_evals)`` overrides the local method.
    """
    if local is None:

        def local(x0, max_evals):
            return lbfgs(fun, x0, tol=tol, max_evals=max_evals)

    rng = np.random.default_rng(cfg.rng_seed)
    pool: list[_Point] = []
    runs: list[dict] = []
    evals = 0
    radius = cfg.initial_radius
    best: Optional[OptimizerResult] = None
    started = 0

    def consider(res: OptimizerResult):
        nonlocal best
        if best is None or res.value < best.value:
            best = res

    def sample(xs):
        nonlocal evals
        for x in xs:
            if evals >= cfg.eval_budget:
                break
            f, g = fun(x)
            evals += 1
            pool.append(_Point(np.asarray(x, dtype=float), float(f), float(np.max(np.abs(g)))))
            consider(OptimizerResult(np.asarray(x, dtype=float), float(f), 0, False, None))

    if num_params == 0:
        f, _ = fun(np.zeros(0))
        return OptimizerResult(np.zeros(0), float(f), 1, True, np.zeros(0))

    seed_points = [np.asarray(s, dtype=float).ravel() for s in seeds]
    first_batch = True
    while started < cfg.num_starts and evals < cfg.eval_budget:
        if best is not None and best.value < tol:
            break
        before = len(pool)
        if first_batch and seed_points:
            sample(seed_points)
        sample(rng.uniform(0.0, TWO_PI, size=(cfg.sample_batch, num_params)))
        first_batch = False
        if len(pool) == before:
            break
        xs = np.array([p.x for p in pool])
        vals = np.array([p.value for p in pool])
        admitted = []
        for i, p in enumerate(pool):
            if p.explored or p.gnorm <= STATIONARY_GTOL:
                continue
            near = wrapped_distance(xs, p.x) <= radius
            near[i] = False
            if np.any(vals[near] < p.value):
                continue
            admitted.append(i)
        admitted.sort(key=lambda i: (pool[i].value, i))
        for i in admitted:
            if started >= cfg.num_starts or evals >= cfg.eval_budget:
                break
            p = pool[i]
            p.explored = True
            res = local(p.x.copy(), min(cfg.local_max_evals, cfg.eval_budget - evals))
            res.start = p.x.copy()
            started += 1
            evals += res.evaluations
            runs.append(res.log_entry() | {"radius": radius})
            pool.append(_Point(res.params.copy(), res.value, 0.0, True))
            consider(res)
            if res.value < tol:
                break
        radius *= cfg.radius_decay
    assert best is not None
    out = OptimizerResult(
        best.params, best.value, evals, bool(best.value < tol or best.converged), best.start
    )
    out.runs = runs
    logger.debug("multistart: %d runs, %d evaluations, best %.3e", started, evals, out.value)
    return out


def multistart_minimize(
    structure: CircuitStructure,
    target,
    cfg: MultistartConfig,
    tol: float,
    seeds: Sequence[Sequence[float]] = (),
) -> OptimizerResult:
    fun = _structure_objective(structure, target)
    return multistart(fun, structure.param_count, cfg, tol, seeds=seeds)


def cheap_instantiate(
    structure: CircuitStructure,
    target,
    warm_start: Sequence[float],
    rng: np.random.Generator,
    tol: float,
    restarts: int = 4,
    max_evals: int = DEFAULT_MAX_EVALS,
    accept: Optional[float] = None,
) -> OptimizerResult:
    """Search-time instantiation: one warm start, random restarts on failure.

    A run counts as a failure while its value stays at or above ``accept``
    (defaults to ``tol``). Restarts stop at the first success.
    """
    threshold = tol if accept is None else accept
    fun = _structure_objective(structure, target)
    best = lbfgs(fun, warm_start, tol=tol, max_evals=max_evals)
    total = best.evaluations
    for _ in range(restarts):
        if best.value < threshold:
            break
        x0 = rng.uniform(0.0, TWO_PI, size=structure.param_count)
        res = lbfgs(fun, x0, tol=tol, max_evals=max_evals)
        total += res.evaluations
        if res.value < best.value:
            best = res
    best.evaluations = total
    return best
