"""Finite-resolution RIS phases: quantization, coordinate descent and exhaustive search.

Each element takes one of ``2**b`` equally spaced phases
``{0, d, 2 d, ..., (2**b - 1) d}`` with ``d = 2 pi / 2**b``. A configuration
is stored as integer level indices, one row per RIS phase vector (two rows
for the half-duplex system, one otherwise).
"""

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from . import baselines, full_duplex, half_duplex
from ._validation import check_channel_set, check_choice, check_rate_threshold
from .exceptions import ConvergenceError, DomainError, InfeasibleError, SearchSpaceError
from .precoding import PhaseVector, extract_phases

__all__ = [
    "DISCRETE_MODES",
    "DiscretePhaseConfig",
    "DiscreteSolution",
    "brute_force_oracle",
    "continuous_solution",
    "discrete_objective",
    "quantize_phases",
    "quantize_solution",
    "successive_refinement",
]

logger = logging.getLogger(__name__)

DISCRETE_MODES = ("hd", "fd", "ris-only")
MAX_SEARCH_BITS = 16
DEFAULT_SWEEPS = 3

_FROM_PHASES = {
    "hd": half_duplex.solution_from_phases,
    "fd": full_duplex.solution_from_phases,
    "ris-only": baselines.solution_from_phases,
}


@dataclass(frozen=True)
class DiscretePhaseConfig:
    """Resolution of the RIS phase shifters.

    Parameters
    ----------
    b : int
        Bits per element, at least 1.
    """

    b: int = 1

    def __post_init__(self):
        if isinstance(self.b, bool) or not isinstance(self.b, (int, np.integer)) or self.b < 1:
            raise DomainError(f"b must be an integer >= 1, got {self.b!r}")
        object.__setattr__(self, "b", int(self.b))

    @property
    def n_levels(self):
        return 2 ** self.b

    @property
    def step(self):
        return 2.0 * np.pi / self.n_levels

    @property
    def levels(self):
        """Level angles ``k * 2 pi / 2**b`` for ``k = 0 .. 2**b - 1``."""
        return np.arange(self.n_levels) * self.step

    def phase_vector(self, indices):
        """Phase vector realizing the given level indices."""
        idx = np.asarray(indices, dtype=int)
        return PhaseVector(np.exp(1j * self.levels[idx % self.n_levels]))


@dataclass(eq=False)
class DiscreteSolution:
    """Best discrete configuration found and the solver record behind it."""

    solution: object
    indices: np.ndarray
    b: int
    power_history: list = field(default_factory=list)
    sweeps: int = 0
    converged: bool = True
    evaluations: int = 0

    @property
    def total_power(self):
        return self.solution.total_power

    @property
    def phases(self):
        return self.solution.phases


def _level_index(theta, b):
    """Nearest level index, exact midpoints going to the lower level."""
    n = 2 ** b
    x = np.mod(np.asarray(theta, dtype=float), 2.0 * np.pi) * (n / (2.0 * np.pi))
    return (np.ceil(x - 0.5).astype(int)) % n


def quantize_phases(theta, b):
    """Round each phase to the nearest of ``2**b`` uniform levels.

    Distances are circular, so angles just below ``2 pi`` go to 0. A phase
    exactly halfway between two levels goes to the lower one (for the pair
    straddling ``2 pi`` that is the top level).

    Parameters
    ----------
    theta : array_like or PhaseVector
        Continuous phases in radians, any range.
    b : int
        Bits per element.

    Returns
    -------
    numpy.ndarray
        Quantized angles in ``[0, 2 pi)``.
    """
    cfg = DiscretePhaseConfig(b)
    if isinstance(theta, PhaseVector):
        theta = extract_phases(theta)
    return cfg.levels[_level_index(theta, cfg.b)]


def _n_vectors(mode):
    return 2 if mode == "hd" else 1


def _check_mode(mode):
    return check_choice(mode, "mode", DISCRETE_MODES)


def quantize_solution(phases, b):
    """Level indices (one row per phase vector) nearest to continuous phases."""
    return np.array([_level_index(extract_phases(p), b) for p in phases], dtype=int)


def discrete_objective(ch, mode, rate_threshold, b, indices, relay_solver="duality"):
    """Solve the precoders for a discrete configuration.

    Returns the mode's solution record; raises if the stage is infeasible.
    """
    _check_mode(mode)
    cfg = DiscretePhaseConfig(b)
    phases = tuple(cfg.phase_vector(row) for row in np.atleast_2d(indices))
    fn = _FROM_PHASES[mode]
    if mode == "ris-only":
        return fn(ch, phases, rate_threshold)
    return fn(ch, phases, rate_threshold, relay_solver=relay_solver)


def _try(ch, mode, rate_threshold, b, indices, relay_solver):
    try:
        return discrete_objective(ch, mode, rate_threshold, b, indices, relay_solver)
    except (InfeasibleError, ConvergenceError) as exc:
        logger.debug("discrete configuration rejected: %s", exc)
        return None


def continuous_solution(ch, mode, rate_threshold, relay_solver="duality"):
    """Continuous-phase solution for ``mode`` (the usual quantization starting point)."""
    if mode == "hd":
        return half_duplex.solve_half_duplex(ch, rate_threshold, relay_solver=relay_solver)
    if mode == "fd":
        return full_duplex.solve_full_duplex(ch, rate_threshold, relay_solver=relay_solver)
    return baselines.solve_ris_only(ch, rate_threshold)


def successive_refinement(
    ch,
    mode,
    rate_threshold,
    b,
    init=None,
    relay_solver="duality",
    max_sweeps=DEFAULT_SWEEPS,
):
    """Coordinate descent over discrete phase levels.

    Elements are visited in ascending index order (first phase vector before
    the second in half-duplex mode). For each element every level is tried
    with ``W`` and ``U`` fully re-solved, and the cheapest level is kept; the
    current level wins ties, so the power never increases. Sweeps repeat
    until one changes nothing or ``max_sweeps`` is reached.

    Parameters
    ----------
    ch : ChannelSet
    mode : {"hd", "fd", "ris-only"}
    rate_threshold : float
    b : int
        Bits per element.
    init : array_like of int, sequence of PhaseVector, or None
        Starting level indices with shape ``(n_vectors, L)``, or continuous
        phases to quantize. ``None`` quantizes the continuous solver's output.
    relay_solver : {"duality", "zf"}
    max_sweeps : int

    Returns
    -------
    DiscreteSolution

    Raises
    ------
    InfeasibleError
        If the starting configuration is infeasible.
    """
    check_channel_set(ch)
    _check_mode(mode)
    rate_threshold = check_rate_threshold(rate_threshold)
    cfg = DiscretePhaseConfig(b)
    if max_sweeps < 1:
        raise DomainError("max_sweeps must be >= 1")
    nv = _n_vectors(mode)
    if init is None:
        init = continuous_solution(ch, mode, rate_threshold, relay_solver=relay_solver).phases
    if len(init) and isinstance(init[0], PhaseVector):
        idx = quantize_solution(init, cfg.b)
    else:
        idx = np.array(init, dtype=int) % cfg.n_levels
        if idx.size == nv * ch.L:
            idx = idx.reshape(nv, ch.L)
    if idx.shape != (nv, ch.L):
        raise DomainError(f"init must describe {nv} phase vector(s) of length {ch.L}")

    best = discrete_objective(ch, mode, rate_threshold, cfg.b, idx, relay_solver)
    history = [best.total_power]
    evaluations = 1
    sweeps = 0
    converged = ch.L == 0
    for sweeps in range(1, max_sweeps + 1):
        if ch.L == 0:
            break
        changed = False
        for j in range(nv):
            for ell in range(ch.L):
                current = idx[j, ell]
                for level in range(cfg.n_levels):
                    if level == current:
                        continue
                    trial = idx.copy()
                    trial[j, ell] = level
                    sol = _try(ch, mode, rate_threshold, cfg.b, trial, relay_solver)
                    evaluations += 1
                    if sol is not None and sol.total_power < best.total_power:
                        best, idx, changed = sol, trial, True
                history.append(best.total_power)
        if not changed:
            converged = True
            break
    return DiscreteSolution(
        solution=best,
        indices=idx,
        b=cfg.b,
        power_history=history,
        sweeps=sweeps,
        converged=converged,
        evaluations=evaluations,
    )


def brute_force_oracle(ch, mode, rate_threshold, b, relay_solver="duality"):
    """Exhaustively search every discrete configuration.

    The search space has ``2**(b * L)`` points (``2**(2 b L)`` in half-duplex
    mode) and is refused above ``2**16``. Ties keep the first configuration
    in lexicographic order of level indices. The returned
    ``power_history`` lists every enumerated power in that order, with
    ``inf`` marking infeasible configurations.

    Raises
    ------
    SearchSpaceError
        If the search space is too large.
    InfeasibleError
        If no configuration is feasible.
    """
    check_channel_set(ch)
    _check_mode(mode)
    rate_threshold = check_rate_threshold(rate_threshold)
    cfg = DiscretePhaseConfig(b)
    nv = _n_vectors(mode)
    bits = cfg.b * ch.L * nv
    if bits > MAX_SEARCH_BITS:
        raise SearchSpaceError(
            f"search space 2**{bits} exceeds the limit 2**{MAX_SEARCH_BITS}"
        )
    best, best_idx, powers = None, None, []
    for combo in itertools.product(range(cfg.n_levels), repeat=nv * ch.L):
        idx = np.array(combo, dtype=int).reshape(nv, ch.L)
        sol = _try(ch, mode, rate_threshold, cfg.b, idx, relay_solver)
        powers.append(np.inf if sol is None else sol.total_power)
        if sol is not None and (best is None or sol.total_power < best.total_power):
            best, best_idx = sol, idx
    if best is None:
        raise InfeasibleError("no discrete configuration is feasible")
    return DiscreteSolution(
        solution=best,
        indices=best_idx,
        b=cfg.b,
        power_history=powers,
        sweeps=0,
        converged=True,
        evaluations=len(powers),
    )
