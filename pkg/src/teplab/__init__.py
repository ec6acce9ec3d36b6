"""Exact and Monte Carlo tools for the two envelopes problem and its relatives."""

from .dist import (
    DiscreteDist,
    DistributionError,
    Log2Decomposition,
    StepDensityDist,
    double,
    expectation,
    log2_decompose,
    mixture,
    normalize,
    prob_event,
    quantile,
    tv_distance,
)
from .model import TepJoint, build, e_b_given_a, e_b_unconditional, p_delta_given_a
from .order import TheoremViolation

__version__ = "0.1.0"
