"""Core domain types for multi-arm basket trial designs.

Holds the trial structure (arms, interim schedules), sensitivity
partitions, the logit-offset parameterization of treatment effects,
shrinkage-prior parameterizations, and the tradeoff utilities that
score a design's power against its type I error inflation.

Everything here is an immutable value object or a pure function, safe
to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Union

import numpy as np

__all__ = [
    "ArmSpec",
    "TrialSpec",
    "Partition",
    "HyperPrior",
    "ScaledInvChiSq",
    "HalfCauchy",
    "PriorSpec",
    "TwoRegion",
    "ThreeRegion",
    "CostBenefit",
    "Tradeoff",
    "UtilitySpec",
    "uniform_weights",
    "logit",
    "expit",
    "theta_offset",
    "inv_theta_offset",
    "enumerate_partitions",
    "utility",
    "mean_utility",
    "empirical_sigma_max",
]

# Finite stand-in for an "effectively infinite" penalty slope, so that
# utilities stay totally ordered floats.
PENALTY_CAP = 1e6


def logit(p: float) -> float:
    """log(p / (1-p)), rejecting the endpoints."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie strictly in (0, 1), got {p}")
    return math.log(p / (1.0 - p))


def expit(z: float) -> float:
    """Inverse of logit, numerically stable on both tails."""
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def theta_offset(p: float, p0: float) -> float:
    """Treatment effect on the logit scale relative to the null rate ``p0``."""
    return logit(p) - logit(p0)


def inv_theta_offset(theta: float, p0: float) -> float:
    """Map a logit-scale effect back to a response probability."""
    return expit(theta + logit(p0))


@dataclass(frozen=True)
class ArmSpec:
    """One disease cohort: null/target rates and its interim schedule.

    ``interim_ns`` lists the cumulative sample sizes at which the arm is
    analyzed; the last entry is the final analysis and must equal
    ``max_n``.
    """

    p0: float
    p1: float
    max_n: int
    interim_ns: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "interim_ns", tuple(int(n) for n in self.interim_ns))
        if not (0.0 < self.p0 < 1.0 and 0.0 < self.p1 < 1.0):
            raise ValueError(f"rates must lie in (0, 1), got p0={self.p0}, p1={self.p1}")
        if self.p0 >= self.p1:
            raise ValueError(f"null rate must be below target rate, got {self.p0} >= {self.p1}")
        if self.max_n < 1:
            raise ValueError("max_n must be a positive integer")
        if not self.interim_ns:
            raise ValueError("at least one analysis is required")
        if any(n < 1 for n in self.interim_ns):
            raise ValueError("interim sample sizes must be >= 1")
        if any(a >= b for a, b in zip(self.interim_ns, self.interim_ns[1:])):
            raise ValueError("interim sample sizes must be strictly increasing")
        if self.interim_ns[-1] != self.max_n:
            raise ValueError("the final analysis must occur at max_n")

    @property
    def n_looks(self) -> int:
        return len(self.interim_ns)

    @property
    def rate_pair(self) -> tuple[float, float]:
        return (self.p0, self.p1)


@dataclass(frozen=True)
class TrialSpec:
    """An ordered collection of at least two arms."""

    arms: tuple[ArmSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))
        if len(self.arms) < 2:
            raise ValueError("hierarchical borrowing requires at least two arms")

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @property
    def p0(self) -> tuple[float, ...]:
        return tuple(a.p0 for a in self.arms)

    @property
    def p1(self) -> tuple[float, ...]:
        return tuple(a.p1 for a in self.arms)

    @property
    def max_looks(self) -> int:
        return max(a.n_looks for a in self.arms)


@dataclass(frozen=True)
class Partition:
    """Assignment of each arm to the sensitive or insensitive set.

    All-sensitive and all-insensitive are both legal (the global
    alternative and global null).
    """

    sensitive: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "sensitive", tuple(bool(b) for b in self.sensitive))

    @property
    def n_arms(self) -> int:
        return len(self.sensitive)

    @property
    def n_sensitive(self) -> int:
        return sum(self.sensitive)

    @property
    def sensitive_indices(self) -> tuple[int, ...]:
        return tuple(j for j, s in enumerate(self.sensitive) if s)

    @property
    def insensitive_indices(self) -> tuple[int, ...]:
        return tuple(j for j, s in enumerate(self.sensitive) if not s)

    def true_rates(self, spec: TrialSpec) -> tuple[float, ...]:
        """Scenario response rates: target where sensitive, null elsewhere."""
        if len(self.sensitive) != spec.n_arms:
            raise ValueError("partition length does not match arm count")
        return tuple(
            a.p1 if s else a.p0 for a, s in zip(spec.arms, self.sensitive)
        )


@dataclass(frozen=True)
class HyperPrior:
    """Normal hyperprior on the common logit-scale mean."""

    alpha0: float = 0.0
    tau0_sq: float = 100.0

    def __post_init__(self):
        if self.tau0_sq <= 0.0:
            raise ValueError("tau0_sq must be positive")


@dataclass(frozen=True)
class ScaledInvChiSq:
    """Scaled inverse chi-square prior on the shrinkage variance.

    ``v0`` acts as a prior effective sample size and ``sigma0_sq`` is the
    prior mean scale. Equivalent to an inverse-gamma with a0 = v0/2 and
    b0 = v0 * sigma0_sq / 2; the conversion is exact both ways.
    """

    v0: float
    sigma0_sq: float

    def __post_init__(self):
        if self.v0 <= 0.0 or self.sigma0_sq <= 0.0:
            raise ValueError("v0 and sigma0_sq must be positive")

    @property
    def a0(self) -> float:
        return self.v0 / 2.0

    @property
    def b0(self) -> float:
        return self.v0 * self.sigma0_sq / 2.0

    @classmethod
    def from_inverse_gamma(cls, a0: float, b0: float) -> "ScaledInvChiSq":
        if a0 <= 0.0 or b0 <= 0.0:
            raise ValueError("inverse-gamma parameters must be positive")
        return cls(v0=2.0 * a0, sigma0_sq=b0 / a0)


@dataclass(frozen=True)
class HalfCauchy:
    """Half-Cauchy prior on the shrinkage standard deviation."""

    scale_a: float

    def __post_init__(self):
        if self.scale_a <= 0.0:
            raise ValueError("scale must be positive")


PriorSpec = Union[ScaledInvChiSq, HalfCauchy]


@dataclass(frozen=True)
class TwoRegion:
    """Change-point tradeoff: slope ``lambda1`` below ``eta``, slope
    ``lambda1 + lambda2`` above it."""

    lambda1: float
    lambda2: float
    eta: float

    def __post_init__(self):
        if self.lambda1 < 0.0 or self.lambda2 < 0.0:
            raise ValueError("penalty weights must be nonnegative")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")

    def penalty(self, gamma: float) -> float:
        extra = self.lambda2 * (gamma - self.eta) if gamma > self.eta else 0.0
        return self.lambda1 * gamma + extra

    def gain(self, j: int, rho: float) -> float:
        return rho


@dataclass(frozen=True)
class ThreeRegion:
    """Three-slope tradeoff with change points ``eta1 < eta2``."""

    lambda1: float
    lambda2: float
    lambda3: float
    eta1: float
    eta2: float

    def __post_init__(self):
        if min(self.lambda1, self.lambda2, self.lambda3) < 0.0:
            raise ValueError("penalty weights must be nonnegative")
        if not (0.0 < self.eta1 < 1.0 and 0.0 < self.eta2 < 1.0):
            raise ValueError("change points must lie in (0, 1)")
        if self.eta1 >= self.eta2:
            raise ValueError("eta1 must be below eta2")

    def penalty(self, gamma: float) -> float:
        pen = self.lambda1 * gamma
        if gamma > self.eta1:
            pen += self.lambda2 * (gamma - self.eta1)
        if gamma > self.eta2:
            pen += self.lambda3 * (gamma - self.eta2)
        return pen

    def gain(self, j: int, rho: float) -> float:
        return rho


@dataclass(frozen=True)
class CostBenefit:
    """Cost-effectiveness tradeoff: per-arm gains for true positives,
    two-slope losses for false positives."""

    gains: tuple[float, ...]
    f1: float
    f2: float
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "gains", tuple(float(q) for q in self.gains))
        if any(q < 0.0 for q in self.gains):
            raise ValueError("gains must be nonnegative")
        if self.f1 < 0.0 or self.f2 < 0.0:
            raise ValueError("losses must be nonnegative")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")

    def penalty(self, gamma: float) -> float:
        extra = self.f2 * (gamma - self.eta) if gamma > self.eta else 0.0
        return self.f1 * gamma + extra

    def gain(self, j: int, rho: float) -> float:
        return self.gains[j] * rho


Tradeoff = Union[TwoRegion, ThreeRegion, CostBenefit]


@dataclass(frozen=True)
class UtilitySpec:
    """A tradeoff function plus partition weights summing to one."""

    tradeoff: Tradeoff
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if any(w < 0.0 for w in self.weights):
            raise ValueError("partition weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"partition weights must sum to 1, got {sum(self.weights)!r}")

    def with_weights(self, weights) -> "UtilitySpec":
        return UtilitySpec(tradeoff=self.tradeoff, weights=tuple(weights))


def uniform_weights(n_partitions: int) -> tuple[float, ...]:
    """Equal weight on every partition."""
    return tuple([1.0 / n_partitions] * n_partitions)


def enumerate_partitions(spec: TrialSpec) -> list[Partition]:
    """All distinct sensitivity partitions of the trial's arms.

    Assignments that coincide up to permutation of arms sharing the same
    (p0, p1) pair are collapsed to one canonical representative, the
    lexicographically smallest boolean vector. Output is ordered by the
    number of sensitive arms, then lexicographically, which makes weight
    vectors indexable without ambiguity.
    """
    groups: dict[tuple[float, float], list[int]] = {}
    for j, arm in enumerate(spec.arms):
        groups.setdefault(arm.rate_pair, []).append(j)
    group_members = list(groups.values())

    reps = []
    for counts in product(*(range(len(g) + 1) for g in group_members)):
        flags = [False] * spec.n_arms
        for members, c in zip(group_members, counts):
            # marking the last c arms of each group sensitive yields the
            # lexicographically smallest vector in the equivalence class
            for j in members[len(members) - c:]:
                flags[j] = True
        reps.append(tuple(flags))
    reps.sort(key=lambda f: (sum(f), f))
    return [Partition(sensitive=f) for f in reps]


def utility(
    partition: Partition,
    powers,
    type1s,
    spec: UtilitySpec,
) -> float:
    """Score one partition: summed gains over sensitive arms minus summed
    penalties over insensitive arms.

    ``powers`` holds one claim probability per sensitive arm (in arm
    order) and ``type1s`` one per insensitive arm.
    """
    sens = partition.sensitive_indices
    insens = partition.insensitive_indices
    powers = list(powers)
    type1s = list(type1s)
    if len(powers) != len(sens):
        raise ValueError(f"expected {len(sens)} powers, got {len(powers)}")
    if len(type1s) != len(insens):
        raise ValueError(f"expected {len(insens)} type I rates, got {len(type1s)}")
    for r in powers + type1s:
        if not 0.0 <= r <= 1.0:
            raise ValueError(f"rates must lie in [0, 1], got {r}")
    trade = spec.tradeoff
    total = sum(trade.gain(j, rho) for j, rho in zip(sens, powers))
    total -= sum(trade.penalty(g) for g in type1s)
    return total


def mean_utility(utilities, weights) -> float:
    """Weighted average of per-partition utilities."""
    utilities = list(utilities)
    weights = list(weights)
    if len(utilities) != len(weights):
        raise ValueError("one weight is required per partition utility")
    total_w = sum(weights)
    if abs(total_w - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {total_w!r}")
    return float(sum(w * u for w, u in zip(weights, utilities)))


def empirical_sigma_max(spec: TrialSpec) -> float:
    """Largest sample variance of the logit-scale effects over partitions.

    Under each partition the arm effects are theta_offset(p1, p0) where
    sensitive and 0 where insensitive; the variance uses divisor J-1.
    Used to bound the shrinkage-scale search space.
    """
    best = 0.0
    for part in enumerate_partitions(spec):
        thetas = [
            theta_offset(p, arm.p0)
            for p, arm in zip(part.true_rates(spec), spec.arms)
        ]
        best = max(best, float(np.var(thetas, ddof=1)))
    return best
