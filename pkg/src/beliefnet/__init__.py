"""Signed belief-network growth simulator and experiment harness."""

from .config import RND, Override, SimConfig, load_config
from .engine import CycleReport, SimulationResult, run_cycle, run_simulation
from .network import (
    ConfigurationError,
    ContractError,
    DumpFormatError,
    EdgeSign,
    SignCounts,
    SignedNetwork,
    VertexAttrs,
    attachment_weights,
    draw_sign,
    forget_edges,
    killing,
    neighbor_weights,
    sign_probs_from_counts,
    walk_endpoint_distribution,
)

__all__ = [
    "RND",
    "ConfigurationError",
    "ContractError",
    "CycleReport",
    "DumpFormatError",
    "EdgeSign",
    "Override",
    "SignCounts",
    "SignedNetwork",
    "SimConfig",
    "SimulationResult",
    "VertexAttrs",
    "attachment_weights",
    "draw_sign",
    "forget_edges",
    "killing",
    "load_config",
    "neighbor_weights",
    "run_cycle",
    "run_simulation",
    "sign_probs_from_counts",
    "walk_endpoint_distribution",
]
