"""Passes that shrink a finished circuit.

``resynthesize`` cuts a slab of layers around each prefix boundary, lifts
it to a unitary, searches for a shorter replacement and splices it back.
``reduce_dimensionality`` deletes U3 gates one at a time while the circuit
can still be instantiated within epsilon.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .circuit import CircuitStructure, PlacedCircuit, _target_array, evaluator, instantiate
from .errors import ConfigurationError, DepthLimitError, ValidationError
from .gates import u3_matrix, u3_params_from_matrix
from .optimize import MultistartConfig, local_minimize, multistart_minimize
from .search import LeapConfig, Mode, leap_synthesize
from .unitary import UnitaryMatrix, distance

logger = logging.getLogger(__name__)


def default_window(num_qubits: int) -> int:
    return 7 if num_qubits <= 4 else 5


@dataclass(frozen=True)
class ResynthConfig:
    """Re-synthesis settings.

    ``mode`` is the search mode used on each slab. Slab searches are short
    (at most ``window_cnots - 1`` layers), so the default is the exhaustive
    A* mode; prefix formation pays off only on long searches.
    """

    window_cnots: Optional[int] = None
    passes: int = 1
    mode: Mode = Mode.QSEARCH
    multistart: MultistartConfig = MultistartConfig(num_starts=4, eval_budget=20_000)

    def __post_init__(self):
        if self.window_cnots is not None and self.window_cnots < 1:
            raise ConfigurationError("window_cnots must be at least 1")
        if self.passes < 0:
            raise ConfigurationError("passes must be non-negative")
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", Mode(self.mode))

    def window_for(self, num_qubits: int) -> int:
        return self.window_cnots if self.window_cnots is not None else default_window(num_qubits)


def _measure(structure: CircuitStructure, params, target) -> float:
    return distance(_target_array(structure, target), evaluator(structure).unitary(params))


def slab_bounds(num_layers: int, boundary: int, window: int) -> tuple[int, int]:
    """Layer range ``[lo, hi)`` of the slab centred on ``boundary``.

    Near either end the slab slides inward to keep ``window`` layers.
    """
    lo = max(0, min(boundary - (window + 1) // 2, num_layers - window))
    hi = min(num_layers, lo + window)
    return lo, hi


def _layer_slots(n: int, k: int) -> tuple[int, int]:
    # slots of expansion layer k (0-based), lower qubit first
    return n + 2 * k, n + 2 * k + 1


def slab_unitary(c: PlacedCircuit, lo: int, hi: int) -> UnitaryMatrix:
    """Unitary of layers ``lo..hi-1`` of ``c`` on their own."""
    s = c.structure
    n = s.num_qubits
    sub = CircuitStructure(n, s.layers[lo:hi])
    p = c.params.reshape(-1, 3)
    params = np.zeros((sub.num_slots, 3))
    a, _ = _layer_slots(n, lo)
    b, _ = _layer_slots(n, hi)
    params[n:] = p[a:b]
    return instantiate(sub, params.ravel())


def splice(c: PlacedCircuit, lo: int, hi: int, replacement: PlacedCircuit) -> tuple:
    """Replace layers ``lo..hi-1`` of ``c`` by ``replacement``.

    The replacement's initial U3 on each qubit is folded into the last U3 on
    that qubit before the slab, so the result has no extra gates. Returns
    ``(structure, params)``.
    """
    s = c.structure
    n = s.num_qubits
    p = c.params.reshape(-1, 3).copy()
    last = list(range(n))
    for k in range(lo):
        for slot, q in zip(_layer_slots(n, k), s.layers[k].qubits_sorted):
            last[q] = slot
    r = replacement.params.reshape(-1, 3)
    for q in range(n):
        merged = u3_matrix(*r[q]) @ u3_matrix(*p[last[q]])
        p[last[q]] = u3_params_from_matrix(merged)
    a, _ = _layer_slots(n, lo)
    b, _ = _layer_slots(n, hi)
    params = np.concatenate([p[:a], r[n:], p[b:]]).ravel()
    layers = s.layers[:lo] + replacement.structure.layers + s.layers[hi:]
    return CircuitStructure(n, layers), params


def resynthesize(
    c: PlacedCircuit,
    boundaries: Sequence[int],
    target,
    cfg: ResynthConfig = ResynthConfig(),
    epsilon: float = 1e-10,
    search: Optional[LeapConfig] = None,
) -> PlacedCircuit:
    """Re-synthesize a slab around every boundary once per pass.

    ``search`` supplies topology, gate set and seed for the slab searches.
    A replacement is kept only if it has strictly fewer entanglers and the
    spliced circuit stays within ``epsilon`` of ``target``.
    """
    s = c.structure
    if s.removed:
        raise ValidationError("resynthesize expects a circuit without deleted U3 gates")
    for b in boundaries:
        if not 0 <= b <= s.cnot_count:
            raise ValidationError(f"boundary {b} outside circuit of {s.cnot_count} layers")
    search = search if search is not None else LeapConfig(epsilon=epsilon)
    n = s.num_qubits
    window = cfg.window_for(n)
    current = c
    bounds = sorted(set(int(b) for b in boundaries))
    for _ in range(cfg.passes):
        for i, b in enumerate(bounds):
            lo, hi = slab_bounds(current.cnot_count, b, window)
            k = hi - lo
            if k < 1:
                continue
            slab = slab_unitary(current, lo, hi)
            slab_cfg = replace(
                search,
                epsilon=epsilon,
                delta=max(1, k - 1),
                mode=cfg.mode,
                multistart=replace(cfg.multistart, rng_seed=search.rng_seed),
            )
            try:
                found = leap_synthesize(slab, slab_cfg).circuit
            except DepthLimitError:
                logger.debug("boundary %d: no shorter slab within %d layers", b, k - 1)
                continue
            if found.cnot_count >= k:
                continue
            structure, params = splice(current, lo, hi, found)
            d = _measure(structure, params, target)
            if d > epsilon:
                res = local_minimize(structure, target, params, tol=epsilon)
                params, d = res.params, res.value
            if d > epsilon:
                logger.debug("boundary %d: spliced circuit misses epsilon (%.2e)", b, d)
                continue
            saved = k - found.cnot_count
            logger.info("boundary %d: slab %d -> %d entanglers", b, k, found.cnot_count)
            current = PlacedCircuit(structure, params, d)
            # later boundaries move left by the number of removed layers
            bounds = bounds[: i + 1] + [x - saved for x in bounds[i + 1 :]]
        bounds = [min(x, current.cnot_count) for x in bounds]
    return current


def _without_slot(structure: CircuitStructure, params: np.ndarray, slot: int):
    active = structure.active_slots
    pos = active.index(slot)
    p = np.delete(params.reshape(-1, 3), pos, axis=0).ravel()
    return CircuitStructure(structure.num_qubits, structure.layers, structure.removed | {slot}), p


def reduce_dimensionality(
    c: PlacedCircuit,
    target,
    epsilon: float = 1e-10,
    cfg: MultistartConfig = MultistartConfig(num_starts=4, eval_budget=20_000),
) -> PlacedCircuit:
    """Delete U3 gates front to back while the circuit still meets ``epsilon``.

    Each tentative deletion is re-instantiated with the multistart driver,
    seeded with the current parameters of the remaining gates. Sweeps repeat
    until one deletes nothing, so the result is a fixed point of the pass.
    """
    d0 = _measure(c.structure, c.params, target)
    if d0 > epsilon:
        raise ValidationError(f"input circuit distance {d0:.3e} exceeds epsilon {epsilon:.1e}")
    structure, params, d = c.structure, np.asarray(c.params), d0
    changed = True
    while changed:
        changed = False
        for slot in list(structure.active_slots):
            trial_s, trial_p = _without_slot(structure, params, slot)
            res = multistart_minimize(trial_s, target, cfg, epsilon, seeds=[trial_p])
            if res.value <= epsilon:
                structure, params, d = trial_s, res.params, res.value
                changed = True
                logger.debug("deleted U3 slot %d (distance %.2e)", slot, d)
    if structure == c.structure:
        return c
    return PlacedCircuit(structure, params, d)


def deleted_positions(structure: CircuitStructure) -> list[int]:
    """Layer index of every deleted U3 slot (0 is the initial layer)."""
    slots = structure.slots
    return sorted(slots[i][0] for i in structure.removed)


def deletion_histogram(positions: Sequence[int], num_layers: int) -> list[int]:
    counts = Counter(positions)
    return [counts.get(k, 0) for k in range(num_layers + 1)]
