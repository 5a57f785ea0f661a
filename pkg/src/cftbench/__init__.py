"""Classical fidelity thresholds through effective entanglement-breaking channels."""

from .bloch import QubitScenario, closed_form_cft, scenario_ensemble
from .channels import Channel, average_fidelity, map_channel
from .ensembles import StateEnsemble, effective_eb_channel, sqrt_povm, uniform_ensemble
from .exceptions import CftError, ConfigError, ContractError, DimensionError, SolverError, TruncationError
from .solvers import (
    certify,
    deterministic_cft_qubit,
    fidelity_for_povm,
    helstrom_bound,
    probabilistic_cft,
    werner_cft,
)

__version__ = "0.1.0"

__all__ = [
    "QubitScenario",
    "closed_form_cft",
    "scenario_ensemble",
    "Channel",
    "average_fidelity",
    "map_channel",
    "StateEnsemble",
    "effective_eb_channel",
    "sqrt_povm",
    "uniform_ensemble",
    "CftError",
    "ConfigError",
    "ContractError",
    "DimensionError",
    "SolverError",
    "TruncationError",
    "certify",
    "deterministic_cft_qubit",
    "fidelity_for_povm",
    "helstrom_bound",
    "probabilistic_cft",
    "werner_cft",
]
