"""Full-duplex relay: one RIS configuration serves both hops at once.

The relay must decode ``K R_th`` bits per symbol and each user must reach
``R_th`` while treating every BS stream as interference. Self-interference
at the relay is taken as perfectly cancelled.
"""

from dataclasses import dataclass, field

import numpy as np

from ._alternating import alternate
from ._validation import check_channel_set, check_choice, check_rate_threshold
from .half_duplex import RELAY_SOLVERS, ValidationReport, VIOLATION_TOL, relay_precoder
from .precoding import (
    PhaseVector,
    effective_channels,
    fixed_point_phase,
    linearized_phase_step,
    relay_rate,
    summed_coupling_block,
    surrogate_relay_rate,
    svd_waterfilling,
)

__all__ = [
    "FullDuplexSolution",
    "bs_interference",
    "full_duplex_precoders",
    "full_duplex_rates",
    "solve_full_duplex",
    "validate_full_duplex",
]


@dataclass(eq=False)
class Stage:
    W: np.ndarray
    U: np.ndarray
    nu: np.ndarray
    power: float


@dataclass(eq=False)
class FullDuplexSolution:
    W: np.ndarray
    U: np.ndarray
    theta: PhaseVector
    total_power: float
    relay_rate: float
    user_rates: np.ndarray
    rate_threshold: float
    power_history: list = field(default_factory=list)
    converged: bool = False
    outer_iterations: int = 0

    mode = "fd"

    @property
    def phases(self):
        return (self.theta,)

    @property
    def achieved_min_rate(self):
        K = self.W.shape[1]
        return float(min(self.relay_rate / K, np.min(self.user_rates)))


def bs_interference(h_TI, W):
    """Total BS power leaking to each user, ``sum_i |h_TI,k w_i|^2``."""
    return np.sum(np.abs(h_TI @ W) ** 2, axis=1)


def full_duplex_precoders(ch, theta, rate_threshold, relay_solver="duality"):
    """``W`` ignores the BS-to-user interference; ``U`` counts it as noise."""
    sigma2 = ch.noise_power
    eff = effective_channels(ch, theta)
    W, _ = svd_waterfilling(eff.H_TIR, sigma2, ch.K * rate_threshold, ch.K)
    nu = bs_interference(eff.h_TI, W) + sigma2
    targets = np.full(ch.K, 2.0 ** rate_threshold - 1.0)
    U = relay_precoder(eff.h_RI, targets, nu, relay_solver)
    power = np.sum(np.abs(W) ** 2) + np.sum(np.abs(U) ** 2)
    return Stage(W=W, U=U, nu=nu, power=float(power))


def full_duplex_rates(ch, theta, W, U, include_bs_interference=True):
    """Relay rate and per-user rates for given precoders."""
    sigma2 = ch.noise_power
    eff = effective_channels(ch, theta)
    rr = relay_rate(eff.H_TIR, W, sigma2)
    G = np.abs(eff.h_RI @ U) ** 2
    signal = np.diag(G)
    denom = G.sum(axis=1) - signal + sigma2
    if include_bs_interference:
        denom = denom + bs_interference(eff.h_TI, W)
    return rr, np.log2(1.0 + signal / denom)


def _theta_candidates(ch, inner_tol, max_inner):
    def update(phases, stage):
        (theta,) = phases
        sur = surrogate_relay_rate(ch, theta, stage.W)
        by_rate = linearized_phase_step(sur, theta)
        S = summed_coupling_block(ch, stage.U, "relay")
        fp = fixed_point_phase(S, theta.normalized(), inner_tol, max_inner)
        return [(by_rate,), (fp.phases.normalized(),)]

    return update


def solve_full_duplex(
    ch,
    rate_threshold,
    relay_solver="duality",
    tol=1e-4,
    inner_tol=1e-6,
    max_outer=50,
    max_inner=1000,
    init=None,
):
    """Alternate between (W, U) and the RIS configuration.

    The phase proposal maximizing the relay-rate surrogate competes with
    the one maximizing the users' received relay signal; the cheaper is
    adopted if it lowers the total power.
    """
    check_channel_set(ch)
    rate_threshold = check_rate_threshold(rate_threshold)
    check_choice(relay_solver, "relay_solver", RELAY_SOLVERS)
    if init is None:
        init = PhaseVector.identity(ch.L)

    def evaluate(phases):
        return full_duplex_precoders(ch, phases[0], rate_threshold, relay_solver)

    updates = []
    if ch.L > 0 and rate_threshold > 0:
        updates = [_theta_candidates(ch, inner_tol, max_inner)]
    phases, stage, history, converged, iterations = alternate(
        evaluate, updates, (init,), tol=tol, max_outer=max_outer
    )
    return _solution(ch, phases, stage, rate_threshold, history, converged, iterations)


def _solution(ch, phases, stage, rate_threshold, history, converged, iterations):
    (theta,) = phases
    rr, rates = full_duplex_rates(ch, theta, stage.W, stage.U)
    return FullDuplexSolution(
        W=stage.W,
        U=stage.U,
        theta=theta,
        total_power=stage.power,
        relay_rate=rr,
        user_rates=rates,
        rate_threshold=rate_threshold,
        power_history=history,
        converged=converged,
        outer_iterations=iterations,
    )


def solution_from_phases(ch, phases, rate_threshold, relay_solver="duality"):
    stage = full_duplex_precoders(ch, phases[0], rate_threshold, relay_solver)
    return _solution(ch, tuple(phases), stage, rate_threshold, [stage.power], True, 0)


def validate_full_duplex(ch, solution, rate_threshold, tol=VIOLATION_TOL):
    rr, rates = full_duplex_rates(ch, solution.theta, solution.W, solution.U)
    return ValidationReport(
        relay_margin=rr - ch.K * rate_threshold,
        user_margins=rates - rate_threshold,
        tol=tol,
    )
