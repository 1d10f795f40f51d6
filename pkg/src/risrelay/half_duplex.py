"""Two-phase (half-duplex) relay with separate RIS configurations per phase.

Phase 1: the BS serves the relay (and, weakly, the users) through ``Theta1``.
Phase 2: the relay forwards to the users through ``Theta2``. Each user
combines both phases, so the requirement ``R_k / 2 >= R_th`` becomes
``log2(1 + gamma_k1 + gamma_k2) >= 2 R_th`` and the relay must decode
``2 K R_th`` bits per symbol. Power is duty-cycled by 1/2 in both phases.
"""

from dataclasses import dataclass, field

import numpy as np

from ._alternating import alternate
from ._validation import check_channel_set, check_choice, check_rate_threshold
from .precoding import (
    PhaseVector,
    duality_beamforming,
    effective_channels,
    fixed_point_phase,
    linearized_phase_step,
    relay_rate,
    sinr_all,
    summed_coupling_block,
    surrogate_relay_rate,
    svd_waterfilling,
    zero_forcing,
)

__all__ = [
    "HalfDuplexSolution",
    "ValidationReport",
    "compute_eta",
    "half_duplex_precoders",
    "solve_half_duplex",
    "validate_half_duplex",
]

RELAY_SOLVERS = ("duality", "zf")
VIOLATION_TOL = 1e-6


@dataclass(eq=False)
class Stage:
    """Precoders for fixed phases."""

    W: np.ndarray
    U: np.ndarray
    eta: np.ndarray
    power: float


@dataclass(eq=False)
class HalfDuplexSolution:
    W: np.ndarray
    U: np.ndarray
    theta1: PhaseVector
    theta2: PhaseVector
    total_power: float
    relay_rate: float
    user_rates: np.ndarray
    rate_threshold: float
    power_history: list = field(default_factory=list)
    converged: bool = False
    outer_iterations: int = 0

    mode = "hd"

    @property
    def phases(self):
        return (self.theta1, self.theta2)

    @property
    def achieved_min_rate(self):
        """Worst per-user rate per channel use, comparable with ``R_th``."""
        K = self.W.shape[1]
        return float(min(self.relay_rate / (2 * K), np.min(self.user_rates) / 2))


@dataclass
class ValidationReport:
    relay_margin: float
    user_margins: np.ndarray
    tol: float = VIOLATION_TOL

    @property
    def min_margin(self):
        return float(min(self.relay_margin, np.min(self.user_margins)))

    @property
    def ok(self):
        return self.min_margin >= -self.tol


def _eta_from_gamma(gamma1, rate_threshold):
    return np.maximum(0.0, 2.0 ** (2.0 * rate_threshold) - 1.0 - gamma1)


def compute_eta(ch, theta1, W, rate_threshold, k):
    """Second-phase SINR target left for user ``k`` after the first phase."""
    eff = effective_channels(ch, theta1)
    gamma1 = sinr_all(eff.h_TI, W, ch.noise_power)
    return float(_eta_from_gamma(gamma1, rate_threshold)[k])


def relay_precoder(rows, targets, noise, relay_solver):
    if relay_solver == "zf":
        return zero_forcing(rows, targets, noise)
    return duality_beamforming(rows, noise, targets)


def half_duplex_precoders(ch, theta1, theta2, rate_threshold, relay_solver="duality"):
    """Solve ``W`` (SVD + water-filling) then ``U`` for fixed phases."""
    sigma2 = ch.noise_power
    eff = effective_channels(ch, theta1, theta2)
    W, _ = svd_waterfilling(eff.H_TIR, sigma2, 2 * ch.K * rate_threshold, ch.K)
    gamma1 = sinr_all(eff.h_TI, W, sigma2)
    eta = _eta_from_gamma(gamma1, rate_threshold)
    U = relay_precoder(eff.h_RI, eta, sigma2, relay_solver)
    power = 0.5 * (np.sum(np.abs(W) ** 2) + np.sum(np.abs(U) ** 2))
    return Stage(W=W, U=U, eta=eta, power=float(power))


def _theta1_candidates(ch, inner_tol, max_inner):
    def update(phases, stage):
        theta1, theta2 = phases
        sur = surrogate_relay_rate(ch, theta1, stage.W)
        by_rate = linearized_phase_step(sur, theta1)
        S = summed_coupling_block(ch, stage.W, "bs")
        fp = fixed_point_phase(S, theta1.normalized(), inner_tol, max_inner)
        by_users = fp.phases.normalized()
        return [(by_rate, theta2), (by_users, theta2)]

    return update


def _theta2_candidates(ch, inner_tol, max_inner):
    def update(phases, stage):
        theta1, theta2 = phases
        S = summed_coupling_block(ch, stage.U, "relay")
        fp = fixed_point_phase(S, theta2.normalized(), inner_tol, max_inner)
        return [(theta1, fp.phases.normalized())]

    return update


def solve_half_duplex(
    ch,
    rate_threshold,
    relay_solver="duality",
    tol=1e-4,
    inner_tol=1e-6,
    max_outer=50,
    max_inner=1000,
    init=None,
):
    """Alternate between (W, U) and the two RIS configurations.

    Each outer iteration proposes ``Theta1`` from the relay-rate surrogate
    and from the users' first-phase signal power and keeps the cheaper one,
    then proposes ``Theta2`` from the users' second-phase signal power. A
    proposal is adopted only if it lowers the total power. Stops when the
    relative power change is at most ``tol``.

    Raises
    ------
    InfeasibleError
        If the precoders for the initial phases cannot be found.
    """
    check_channel_set(ch)
    rate_threshold = check_rate_threshold(rate_threshold)
    check_choice(relay_solver, "relay_solver", RELAY_SOLVERS)
    if init is None:
        init = (PhaseVector.identity(ch.L), PhaseVector.identity(ch.L))

    def evaluate(phases):
        return half_duplex_precoders(ch, phases[0], phases[1], rate_threshold, relay_solver)

    updates = []
    if ch.L > 0 and rate_threshold > 0:
        updates = [
            _theta1_candidates(ch, inner_tol, max_inner),
            _theta2_candidates(ch, inner_tol, max_inner),
        ]
    phases, stage, history, converged, iterations = alternate(
        evaluate, updates, tuple(init), tol=tol, max_outer=max_outer
    )
    return _solution(ch, phases, stage, rate_threshold, history, converged, iterations)


def _solution(ch, phases, stage, rate_threshold, history, converged, iterations):
    theta1, theta2 = phases
    eff = effective_channels(ch, theta1, theta2)
    rr = relay_rate(eff.H_TIR, stage.W, ch.noise_power)
    g1 = sinr_all(eff.h_TI, stage.W, ch.noise_power)
    g2 = sinr_all(eff.h_RI, stage.U, ch.noise_power)
    return HalfDuplexSolution(
        W=stage.W,
        U=stage.U,
        theta1=theta1,
        theta2=theta2,
        total_power=stage.power,
        relay_rate=rr,
        user_rates=np.log2(1.0 + g1 + g2),
        rate_threshold=rate_threshold,
        power_history=history,
        converged=converged,
        outer_iterations=iterations,
    )


def solution_from_phases(ch, phases, rate_threshold, relay_solver="duality"):
    """Solution record for fixed phases (used by the discrete-phase search)."""
    stage = half_duplex_precoders(ch, phases[0], phases[1], rate_threshold, relay_solver)
    return _solution(ch, tuple(phases), stage, rate_threshold, [stage.power], True, 0)


def validate_half_duplex(ch, solution, rate_threshold, tol=VIOLATION_TOL):
    """Recompute the relay and user rates from scratch and report constraint margins."""
    eff = effective_channels(ch, solution.theta1, solution.theta2)
    sigma2 = ch.noise_power
    rr = relay_rate(eff.H_TIR, solution.W, sigma2)
    g1 = sinr_all(eff.h_TI, solution.W, sigma2)
    g2 = sinr_all(eff.h_RI, solution.U, sigma2)
    rates = np.log2(1.0 + g1 + g2)
    return ValidationReport(
        relay_margin=rr - 2 * ch.K * rate_threshold,
        user_margins=rates - 2 * rate_threshold,
        tol=tol,
    )
