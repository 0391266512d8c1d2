"""Identification of unitary quantum gates from pure probe states and fast state tomography."""

from .identification import (
    GateEstimate,
    calibrate_phase,
    gauge_distance,
    identify_gate,
    rearrange_to_D,
    reconstruct_gate,
)
from .quantum import load_gate, named_gate

__all__ = [
    "GateEstimate",
    "calibrate_phase",
    "gauge_distance",
    "identify_gate",
    "load_gate",
    "named_gate",
    "rearrange_to_D",
    "reconstruct_gate",
]

__version__ = "0.1.0"
