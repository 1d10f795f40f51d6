"""Estimator-style wrappers around the solvers.

``fit`` takes a :class:`~risrelay.channels.ChannelSet` in place of a data
matrix and stores the design in trailing-underscore attributes. There is no
``predict``: the fitted precoders and phases are the output.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from . import discrete
from ._validation import check_channel_set, check_choice, check_rate_threshold
from .baselines import solve_relay_only, solve_ris_only, validate_ris_only
from .full_duplex import solve_full_duplex, validate_full_duplex
from .half_duplex import RELAY_SOLVERS, solve_half_duplex, validate_half_duplex

__all__ = [
    "DiscretePhaseBeamformer",
    "FullDuplexBeamformer",
    "HalfDuplexBeamformer",
    "NotFittedError",
    "RISOnlyBeamformer",
    "RelayOnlyBeamformer",
]


class _Beamformer(BaseEstimator):
    """Shared fit bookkeeping; subclasses implement ``_solve`` and ``_validate``."""

    def _check_params(self):
        check_rate_threshold(self.rate_threshold)
        if hasattr(self, "relay_solver"):
            check_choice(self.relay_solver, "relay_solver", RELAY_SOLVERS)

    def fit(self, X, y=None):
        """Design the beamformers for the channel realization ``X``.

        Parameters
        ----------
        X : ChannelSet
        y : ignored

        Returns
        -------
        self
        """
        ch = check_channel_set(X)
        self._check_params()
        sol = self._solve(ch)
        self.solution_ = sol
        self.W_ = sol.W
        self.U_ = sol.U
        self.phases_ = tuple(sol.phases)
        self.total_power_ = float(sol.total_power)
        self.total_power_dbm_ = float(10.0 * np.log10(sol.total_power))
        self.power_history_ = np.asarray(getattr(sol, "power_history", [sol.total_power]))
        self.converged_ = bool(getattr(sol, "converged", True))
        self.n_iter_ = int(getattr(sol, "outer_iterations", 0))
        self.achieved_min_rate_ = float(sol.achieved_min_rate)
        self.n_users_ = ch.K
        return self

    def constraint_report(self, X):
        """Recompute the rate margins of the fitted design on ``X``."""
        check_is_fitted(self, "solution_")
        return self._validate(check_channel_set(X), self.solution_)

    def score(self, X, y=None):
        """Negative transmit power in dBm (higher is better)."""
        check_is_fitted(self, "solution_")
        return -self.total_power_dbm_


class HalfDuplexBeamformer(_Beamformer):
    """Relay and RIS design with a half-duplex relay (two RIS configurations)."""

    def __init__(self, rate_threshold=1.0, relay_solver="duality", tol=1e-4, max_outer=50):
        self.rate_threshold = rate_threshold
        self.relay_solver = relay_solver
        self.tol = tol
        self.max_outer = max_outer

    def _solve(self, ch):
        return solve_half_duplex(
            ch, self.rate_threshold, relay_solver=self.relay_solver, tol=self.tol, max_outer=self.max_outer
        )

    def _validate(self, ch, sol):
        return validate_half_duplex(ch, sol, self.rate_threshold)


class FullDuplexBeamformer(_Beamformer):
    """Relay and RIS design with a full-duplex relay."""

    def __init__(self, rate_threshold=1.0, relay_solver="duality", tol=1e-4, max_outer=50):
        self.rate_threshold = rate_threshold
        self.relay_solver = relay_solver
        self.tol = tol
        self.max_outer = max_outer

    def _solve(self, ch):
        return solve_full_duplex(
            ch, self.rate_threshold, relay_solver=self.relay_solver, tol=self.tol, max_outer=self.max_outer
        )

    def _validate(self, ch, sol):
        return validate_full_duplex(ch, sol, self.rate_threshold)


class RelayOnlyBeamformer(_Beamformer):
    """Relay benchmark: the RIS links of ``X`` are ignored."""

    def __init__(self, rate_threshold=1.0, duplex="fd", relay_solver="duality", tol=1e-4, max_outer=50):
        self.rate_threshold = rate_threshold
        self.duplex = duplex
        self.relay_solver = relay_solver
        self.tol = tol
        self.max_outer = max_outer

    def _check_params(self):
        super()._check_params()
        check_choice(self.duplex, "duplex", ("hd", "fd"))

    def _solve(self, ch):
        return solve_relay_only(
            ch,
            self.rate_threshold,
            duplex=self.duplex,
            relay_solver=self.relay_solver,
            tol=self.tol,
            max_outer=self.max_outer,
        )

    def _validate(self, ch, sol):
        fn = validate_half_duplex if self.duplex == "hd" else validate_full_duplex
        return fn(ch.without_ris(), sol, self.rate_threshold)


class RISOnlyBeamformer(_Beamformer):
    """RIS benchmark: the relay is switched off."""

    def __init__(self, rate_threshold=1.0, tol=1e-4, max_outer=50):
        self.rate_threshold = rate_threshold
        self.tol = tol
        self.max_outer = max_outer

    def _solve(self, ch):
        return solve_ris_only(ch, self.rate_threshold, tol=self.tol, max_outer=self.max_outer)

    def _validate(self, ch, sol):
        return validate_ris_only(ch, sol, self.rate_threshold)


class DiscretePhaseBeamformer(_Beamformer):
    """Design with ``2**b``-level RIS phases.

    ``strategy="quantized"`` rounds the continuous design; ``"refinement"``
    then runs coordinate descent; ``"oracle"`` searches exhaustively (small
    ``L`` only).
    """

    def __init__(self, mode="fd", rate_threshold=1.0, b=1, strategy="refinement", relay_solver="duality", max_sweeps=3):
        self.mode = mode
        self.rate_threshold = rate_threshold
        self.b = b
        self.strategy = strategy
        self.relay_solver = relay_solver
        self.max_sweeps = max_sweeps

    def _check_params(self):
        super()._check_params()
        check_choice(self.mode, "mode", discrete.DISCRETE_MODES)
        check_choice(self.strategy, "strategy", ("quantized", "refinement", "oracle"))
        discrete.DiscretePhaseConfig(self.b)

    def _solve(self, ch):
        if self.strategy == "oracle":
            found = discrete.brute_force_oracle(ch, self.mode, self.rate_threshold, self.b, self.relay_solver)
        else:
            cont = discrete.continuous_solution(ch, self.mode, check_rate_threshold(self.rate_threshold), self.relay_solver)
            idx = discrete.quantize_solution(cont.phases, self.b)
            if self.strategy == "quantized":
                sol = discrete.discrete_objective(ch, self.mode, self.rate_threshold, self.b, idx, self.relay_solver)
                self.level_indices_ = idx
                return sol
            found = discrete.successive_refinement(
                ch, self.mode, self.rate_threshold, self.b, init=idx,
                relay_solver=self.relay_solver, max_sweeps=self.max_sweeps,
            )
        self.level_indices_ = found.indices
        return found.solution

    def _validate(self, ch, sol):
        if self.mode == "hd":
            return validate_half_duplex(ch, sol, self.rate_threshold)
        if self.mode == "fd":
            return validate_full_duplex(ch, sol, self.rate_threshold)
        return validate_ris_only(ch, sol, self.rate_threshold)
