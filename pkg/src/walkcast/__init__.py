"""Random-walk message broadcasting: simulation engines, predictions, sweeps."""

from .graph import (
    DiscretizationReport,
    RoadGraph,
    VertexKind,
    build_complete,
    build_cycle,
    build_torus_grid,
    discretize,
    load_network,
)
from .kn_fast import SuccessModel, phase_chain_expectation, phase_chain_sample, phase_probability, simulate_kn
from .process import BroadcastOutcome, ProcessConfig, Status, run
from .theory import classify_and_predict, harmonic

__version__ = "0.1.0"
