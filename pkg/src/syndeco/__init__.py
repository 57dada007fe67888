"""Order-wise synergy decomposition of channel mutual information.

The mutual information between the inputs and the output of a finite
channel is split into non-negative contributions ``d_1, ..., d_N``, one per
interaction order, by KL-projecting the channel onto nested exponential
families with iterative scaling.
"""
from .core import (
    Channel,
    ChannelSpace,
    InfiniteDivergenceError,
    InputDistribution,
    JointDistribution,
    SpaceMismatchError,
    ValidationError,
    channel_divergence,
    compose_joint,
    entropy,
    kl_divergence,
    marginalize,
    mutual_information,
    pushforward,
)
from .decomposition import DecompositionError, DecompositionProfile, decompose, interaction_information, synergy
from .projection import (
    ConvergenceError,
    ProjectionResult,
    SolverConfig,
    brute_force_project,
    ipf_project,
    project_constant,
)

__version__ = "0.1.0"
