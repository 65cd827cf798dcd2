"""Tailored QMC rules (lattice and interlaced polynomial lattice) and a 1D PDE test harness."""

from .lattice import GeneratingVector, cbc_construct, construct_embedded, shift_avg_wce_sq, theorem1_bound
from .polylattice import DigitalRule, cbc_construct_interlaced, theorem3_bound
from .weights import PODWeights, SPODWeights, WeightParams, pod_weights, spod_weights

__all__ = [
    "GeneratingVector", "cbc_construct", "construct_embedded", "shift_avg_wce_sq", "theorem1_bound",
    "DigitalRule", "cbc_construct_interlaced", "theorem3_bound",
    "PODWeights", "SPODWeights", "WeightParams", "pod_weights", "spod_weights",
]
