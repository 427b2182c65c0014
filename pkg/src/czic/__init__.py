"""Rate regions, generalized Gel'fand-Pinsker capacity and coding simulation
for discrete memoryless cognitive Z-interference channels."""

from czic.bounds import (
    KINDS,
    RateRegion,
    SearchConfig,
    capacity_rates,
    inner_rates,
    max_r2,
    optimize_point,
    outer_rates,
    trace_region,
)
from czic.channel import AuxScheme, CognitiveZic, RatePair, assemble_joint, load_channel
from czic.errors import CzicError
from czic.gp import GpProblem, check_gp_reduction, generalized_gp_capacity, gp_capacity
from czic.prob import JointDist, conditional_mi, entropy
from czic.sim import SimReport, derive_rate_alloc, simulate

__all__ = [
    "KINDS", "RateRegion", "SearchConfig", "capacity_rates", "inner_rates", "max_r2",
    "optimize_point", "outer_rates", "trace_region", "AuxScheme", "CognitiveZic", "RatePair",
    "assemble_joint", "load_channel", "CzicError", "GpProblem", "check_gp_reduction",
    "generalized_gp_capacity", "gp_capacity", "JointDist", "conditional_mi", "entropy",
    "SimReport", "derive_rate_alloc", "simulate",
]
