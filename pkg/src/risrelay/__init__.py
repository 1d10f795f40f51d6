"""Joint BS, relay and RIS beamforming for power-minimal multiuser MISO downlink."""

from .baselines import baseline_solve, solve_relay_only, solve_ris_only
from .channels import ChannelSet, FadingParams, SystemGeometry, generate_scenario
from .discrete import (
    DiscretePhaseConfig,
    brute_force_oracle,
    quantize_phases,
    successive_refinement,
)
from .estimators import (
    DiscretePhaseBeamformer,
    FullDuplexBeamformer,
    HalfDuplexBeamformer,
    RelayOnlyBeamformer,
    RISOnlyBeamformer,
)
from .exceptions import ConvergenceError, DomainError, InfeasibleError, SearchSpaceError
from .full_duplex import solve_full_duplex
from .half_duplex import solve_half_duplex
from .harness import ExperimentConfig, run_experiment
from .precoding import PhaseVector

__version__ = "0.1.0"

__all__ = [
    "ChannelSet",
    "ConvergenceError",
    "DiscretePhaseBeamformer",
    "DiscretePhaseConfig",
    "DomainError",
    "ExperimentConfig",
    "FadingParams",
    "FullDuplexBeamformer",
    "HalfDuplexBeamformer",
    "InfeasibleError",
    "PhaseVector",
    "RISOnlyBeamformer",
    "RelayOnlyBeamformer",
    "SearchSpaceError",
    "SystemGeometry",
    "baseline_solve",
    "brute_force_oracle",
    "generate_scenario",
    "quantize_phases",
    "run_experiment",
    "solve_full_duplex",
    "solve_half_duplex",
    "solve_relay_only",
    "solve_ris_only",
    "successive_refinement",
]
