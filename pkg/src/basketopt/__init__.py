"""Bayesian hierarchical basket-trial designs: inference, decision rules,
simulation of operating characteristics, and utility-based prior
optimization."""

from .core import (
    ArmSpec,
    CostBenefit,
    HalfCauchy,
    HyperPrior,
    Partition,
    PriorSpec,
    ScaledInvChiSq,
    ThreeRegion,
    TrialSpec,
    TwoRegion,
    UtilitySpec,
    empirical_sigma_max,
    enumerate_partitions,
    inv_theta_offset,
    mean_utility,
    theta_offset,
    uniform_weights,
    utility,
)
from .inference import (
    McmcControl,
    ObservedData,
    PosteriorDraws,
    beta_binomial_posterior,
    beta_tail_prob,
    bhm_sample,
    posterior_efficacy_prob,
    posterior_futility_prob,
)

__version__ = "0.1.0"
