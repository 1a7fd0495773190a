"""Lattice and uncoded schemes for sending s1 - s2 over a two-user Gaussian MAC."""

from .analysis import ChannelModel, SchemeParams, ThresholdError
from .lattice import Lattice, make_lattice
from .simulate import ExperimentConfig, SimulationReport, run_experiment, sweep
from .sources import SourceBlock, SourceModel, generate_block

__all__ = [
    "ChannelModel",
    "ExperimentConfig",
    "Lattice",
    "SchemeParams",
    "SimulationReport",
    "SourceBlock",
    "SourceModel",
    "ThresholdError",
    "generate_block",
    "make_lattice",
    "run_experiment",
    "sweep",
]
