"""Benchmark systems: relay without RIS, and RIS without relay."""

from dataclasses import dataclass, field

import numpy as np

from ._alternating import alternate
from ._validation import check_channel_set, check_choice, check_rate_threshold
from .exceptions import DomainError
from .full_duplex import solve_full_duplex
from .half_duplex import VIOLATION_TOL, ValidationReport, solve_half_duplex
from .precoding import (
    PhaseVector,
    duality_beamforming,
    effective_channels,
    fixed_point_phase,
    sinr_all,
    summed_coupling_block,
)

__all__ = [
    "RisOnlySolution",
    "baseline_solve",
    "ris_only_precoders",
    "solve_relay_only",
    "solve_ris_only",
    "validate_ris_only",
]


@dataclass(eq=False)
class Stage:
    W: np.ndarray
    power: float


@dataclass(eq=False)
class RisOnlySolution:
    W: np.ndarray
    U: np.ndarray
    theta: PhaseVector
    total_power: float
    user_rates: np.ndarray
    rate_threshold: float
    power_history: list = field(default_factory=list)
    converged: bool = False
    outer_iterations: int = 0

    mode = "ris-only"

    @property
    def phases(self):
        return (self.theta,)

    @property
    def achieved_min_rate(self):
        return float(np.min(self.user_rates))


def solve_relay_only(ch, rate_threshold, duplex="fd", **options):
    """Run the relay-assisted solver with every reflected path removed."""
    check_choice(duplex, "duplex", ("hd", "fd"))
    dead = check_channel_set(ch).without_ris()
    if duplex == "hd":
        return solve_half_duplex(dead, rate_threshold, **options)
    return solve_full_duplex(dead, rate_threshold, **options)


def ris_only_precoders(ch, theta, rate_threshold):
    eff = effective_channels(ch, theta)
    targets = np.full(ch.K, 2.0 ** rate_threshold - 1.0)
    W = duality_beamforming(eff.h_TI, ch.noise_power, targets)
    return Stage(W=W, power=float(np.sum(np.abs(W) ** 2)))


def solve_ris_only(ch, rate_threshold, tol=1e-4, inner_tol=1e-6, max_outer=50, max_inner=1000, init=None):
    """Single-hop BS-to-users design through the RIS, relay switched off.

    ``W`` comes from uplink-downlink duality on the cascaded BS-user rows and
    the RIS maximizes the users' received BS signal by fixed-point iteration.
    """
    check_channel_set(ch)
    rate_threshold = check_rate_threshold(rate_threshold)
    if ch.K > ch.M:
        raise DomainError("RIS-only operation needs K <= M")
    if init is None:
        init = PhaseVector.identity(ch.L)

    def evaluate(phases):
        return ris_only_precoders(ch, phases[0], rate_threshold)

    def update(phases, stage):
        S = summed_coupling_block(ch, stage.W, "bs")
        fp = fixed_point_phase(S, phases[0].normalized(), inner_tol, max_inner)
        return [(fp.phases.normalized(),)]

    updates = [update] if ch.L > 0 and rate_threshold > 0 else []
    phases, stage, history, converged, iterations = alternate(
        evaluate, updates, (init,), tol=tol, max_outer=max_outer
    )
    return _solution(ch, phases, stage, rate_threshold, history, converged, iterations)


def _solution(ch, phases, stage, rate_threshold, history, converged, iterations):
    (theta,) = phases
    eff = effective_channels(ch, theta)
    rates = np.log2(1.0 + sinr_all(eff.h_TI, stage.W, ch.noise_power))
    return RisOnlySolution(
        W=stage.W,
        U=np.zeros((ch.N, ch.K), dtype=complex),
        theta=theta,
        total_power=stage.power,
        user_rates=rates,
        rate_threshold=rate_threshold,
        power_history=history,
        converged=converged,
        outer_iterations=iterations,
    )


def solution_from_phases(ch, phases, rate_threshold):
    stage = ris_only_precoders(ch, phases[0], rate_threshold)
    return _solution(ch, tuple(phases), stage, rate_threshold, [stage.power], True, 0)


def validate_ris_only(ch, solution, rate_threshold, tol=VIOLATION_TOL):
    eff = effective_channels(ch, solution.theta)
    rates = np.log2(1.0 + sinr_all(eff.h_TI, solution.W, ch.noise_power))
    return ValidationReport(relay_margin=np.inf, user_margins=rates - rate_threshold, tol=tol)


def baseline_solve(ch, mode, rate_threshold, duplex="fd", **options):
    """Dispatch to the relay-only or RIS-only benchmark."""
    if mode == "relay-only":
        return solve_relay_only(ch, rate_threshold, duplex=duplex, **options)
    if mode == "ris-only":
        options.pop("relay_solver", None)
        return solve_ris_only(ch, rate_threshold, **options)
    raise DomainError(f"baseline mode must be 'relay-only' or 'ris-only', got {mode!r}")
