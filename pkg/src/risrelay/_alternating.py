"""Accept-guarded alternating minimization over phase configurations."""

import logging

import numpy as np

from .exceptions import ConvergenceError, InfeasibleError

logger = logging.getLogger(__name__)


def best_candidate(evaluate, candidates):
    """Evaluate candidate phase tuples and return ``(phases, stage)`` of the cheapest.

    Candidates whose beamforming stage fails are skipped. Returns
    ``(None, None)`` if every candidate fails.
    """
    best = (None, None)
    for phases in candidates:
        try:
            stage = evaluate(phases)
        except (InfeasibleError, ConvergenceError) as exc:
            logger.debug("candidate rejected: %s", exc)
            continue
        if best[1] is None or stage.power < best[1].power:
            best = (phases, stage)
    return best


def alternate(evaluate, updates, phases, tol=1e-4, max_outer=50):
    """Run outer iterations until the relative power change is at most ``tol``.

    ``evaluate(phases)`` re-solves the precoders for a tuple of phase
    vectors and returns an object with a ``power`` attribute. Each entry of
    ``updates`` maps ``(phases, stage)`` to candidate phase tuples; the
    cheapest candidate replaces the current point only if it strictly lowers
    the power, so the recorded history never increases.
    """
    stage = evaluate(phases)
    history = [stage.power]
    converged = False
    iterations = 0
    for iterations in range(1, max_outer + 1):
        for update in updates:
            cand, cand_stage = best_candidate(evaluate, update(phases, stage))
            if cand_stage is not None and cand_stage.power < stage.power:
                phases, stage = cand, cand_stage
        history.append(stage.power)
        prev = history[-2]
        if abs(prev - history[-1]) <= tol * max(prev, np.finfo(float).tiny) or prev == 0:
            converged = True
            break
    # closing refresh of the precoders for the final phases
    stage = evaluate(phases)
    return phases, stage, history, converged, iterations
