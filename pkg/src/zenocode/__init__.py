"""Exact simulation of Zeno-type error prevention with four- and two-particle codes."""

__version__ = "0.1.0"

from .codes import (  # noqa: E402
    CODE_NAMES,
    Code,
    check_prevention_condition,
    decode,
    encode,
    error_orbit,
    make_code,
    search_three_qubit_codes,
)
from .experiments import ExperimentSpec, fit_loglog_slope, load_config, run_experiment  # noqa: E402
from .gadgets import GadgetProtocol, GadgetStep, protocol_for, run_gadget  # noqa: E402
from .kernel import DensityMatrix, Operator, PureState, QubitRegister  # noqa: E402
from .noise import Channel, CouplingSpec, derive_channel, kick_noise  # noqa: E402

__all__ = [
    "CODE_NAMES",
    "Channel",
    "Code",
    "CouplingSpec",
    "DensityMatrix",
    "ExperimentSpec",
    "GadgetProtocol",
    "GadgetStep",
    "Operator",
    "PureState",
    "QubitRegister",
    "check_prevention_condition",
    "decode",
    "derive_channel",
    "encode",
    "error_orbit",
    "fit_loglog_slope",
    "kick_noise",
    "load_config",
    "make_code",
    "protocol_for",
    "run_experiment",
    "run_gadget",
    "search_three_qubit_codes",
]
