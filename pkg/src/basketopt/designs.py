"""Decision engines mapping interim data to per-arm go/no-go decisions.

Five designs share one stopping rule (stop an arm when its posterior
futility probability exceeds a sample-size-adaptive cutoff) and differ
in how the posterior is computed: independent beta-binomial arms, a
hierarchical model under a vague or an optimized shrinkage prior, a
cluster-then-borrow variant, and a model-averaged variant that mixes
per-partition hierarchical fits by their posterior model probabilities.

All analyze functions are pure given their seed inputs; batched
counterparts (used by the simulator) produce bit-identical probabilities
for each replicate, whatever the batch composition.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from ._rng import derive_seed
from .core import HyperPrior, Partition, PriorSpec, TrialSpec, enumerate_partitions, theta_offset
from .inference import McmcControl, ObservedData, run_posterior_batch

__all__ = [
    "ArmStatus",
    "ArmDecision",
    "StoppingPolicy",
    "DesignKind",
    "DesignSpec",
    "bop2_cutoff",
    "independent_analyze",
    "bhm_analyze",
    "cobhm_analyze",
    "aobhm_analyze",
    "cluster_arms",
    "model_likelihood",
    "bma_weights",
]

DEFAULT_BETA_PRIOR = (0.1, 0.1)


class ArmStatus(enum.Enum):
    CONTINUE = "continue"
    STOPPED_FUTILE = "stopped_futile"
    STOPPED_SUPERIOR = "stopped_superior"
    FINAL_EFFECTIVE = "final_effective"
    FINAL_NOT_EFFECTIVE = "final_not_effective"

    @property
    def is_claim(self) -> bool:
        return self in (ArmStatus.STOPPED_SUPERIOR, ArmStatus.FINAL_EFFECTIVE)

    @property
    def is_stopped(self) -> bool:
        return self is not ArmStatus.CONTINUE


@dataclass(frozen=True)
class StoppingPolicy:
    """Per-arm futility boundary parameters, plus an optional shared
    superiority cutoff."""

    zeta: tuple[float, ...]
    delta: tuple[float, ...]
    superiority_cutoff: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "zeta", tuple(float(z) for z in self.zeta))
        object.__setattr__(self, "delta", tuple(float(d) for d in self.delta))
        if len(self.zeta) != len(self.delta):
            raise ValueError("zeta and delta must have one entry per arm")
        if any(not 0.0 < z < 1.0 for z in self.zeta):
            raise ValueError("each zeta must lie in (0, 1)")
        if any(d < 0.0 for d in self.delta):
            raise ValueError("each delta must be nonnegative")
        if self.superiority_cutoff is not None and not 0.0 < self.superiority_cutoff < 1.0:
            raise ValueError("superiority cutoff must lie in (0, 1)")

    def with_zeta(self, zeta) -> "StoppingPolicy":
        return StoppingPolicy(tuple(zeta), self.delta, self.superiority_cutoff)


@dataclass(frozen=True)
class ArmDecision:
    status: ArmStatus
    futility_prob: float
    n_at_decision: int


class DesignKind(enum.Enum):
    INDEPENDENT = "independent"
    VAGUE_BHM = "bhm"
    OBHM = "obhm"
    COBHM = "cobhm"
    AOBHM = "aobhm"


class DecisionMode(enum.Enum):
    MODEL_AVERAGE = "model_average"
    MODEL_SELECT = "model_select"


@dataclass(frozen=True)
class DesignSpec:
    """One configured design: its kind, its priors, and its boundaries."""

    kind: DesignKind
    policy: StoppingPolicy
    prior: Optional[PriorSpec] = None
    cluster_prior: Optional[PriorSpec] = None
    omega: float = 2.0
    per_partition_priors: Optional[tuple[PriorSpec, ...]] = None
    model_prior: Optional[tuple[float, ...]] = None
    beta_prior: tuple[float, float] = DEFAULT_BETA_PRIOR
    decision_mode: DecisionMode = DecisionMode.MODEL_AVERAGE

    def __post_init__(self):
        a1, b1 = self.beta_prior
        if a1 <= 0.0 or b1 <= 0.0:
            raise ValueError("beta prior parameters must be positive")
        if self.kind in (DesignKind.VAGUE_BHM, DesignKind.OBHM) and self.prior is None:
            raise ValueError(f"{self.kind.value} requires a shrinkage prior")
        if self.kind is DesignKind.COBHM:
            if self.cluster_prior is None:
                raise ValueError("cobhm requires a cluster prior")
            if self.omega <= 0.0:
                raise ValueError("cobhm requires omega > 0")
        if self.kind is DesignKind.AOBHM:
            if not self.per_partition_priors:
                raise ValueError("aobhm requires one prior per partition")
            if self.model_prior is None:
                raise ValueError("aobhm requires a model prior over partitions")
            if len(self.model_prior) != len(self.per_partition_priors):
                raise ValueError("model prior and per-partition priors must align")
            if abs(sum(self.model_prior) - 1.0) > 1e-9:
                raise ValueError("model prior must sum to 1")

    def with_policy(self, policy: StoppingPolicy) -> "DesignSpec":
        return DesignSpec(
            kind=self.kind, policy=policy, prior=self.prior,
            cluster_prior=self.cluster_prior, omega=self.omega,
            per_partition_priors=self.per_partition_priors,
            model_prior=self.model_prior, beta_prior=self.beta_prior,
            decision_mode=self.decision_mode,
        )

    def with_prior(self, prior: PriorSpec) -> "DesignSpec":
        """Swap the shrinkage prior this design optimizes over."""
        if self.kind is DesignKind.COBHM:
            return DesignSpec(
                kind=self.kind, policy=self.policy, prior=self.prior,
                cluster_prior=prior, omega=self.omega,
                per_partition_priors=self.per_partition_priors,
                model_prior=self.model_prior, beta_prior=self.beta_prior,
                decision_mode=self.decision_mode,
            )
        return DesignSpec(
            kind=self.kind, policy=self.policy, prior=prior,
            cluster_prior=self.cluster_prior, omega=self.omega,
            per_partition_priors=self.per_partition_priors,
            model_prior=self.model_prior, beta_prior=self.beta_prior,
            decision_mode=self.decision_mode,
        )


def bop2_cutoff(n: int, max_n: int, zeta: float, delta: float) -> float:
    """Sample-size-adaptive futility probability cutoff 1 - zeta (n/N)^delta."""
    if not 1 <= n <= max_n:
        raise ValueError(f"need 1 <= n <= max_n, got n={n}, max_n={max_n}")
    return 1.0 - zeta * (n / max_n) ** delta


def _binom_logpmf(x, n, p):
    x = np.asarray(x, dtype=float)
    n = np.asarray(n, dtype=float)
    coef = special.gammaln(n + 1) - special.gammaln(x + 1) - special.gammaln(n - x + 1)
    return coef + special.xlogy(x, p) + special.xlog1py(n - x, -p)


def _arm_arrays(spec: TrialSpec):
    l0 = np.array([math.log(a.p0 / (1.0 - a.p0)) for a in spec.arms])
    eff_off = np.array([theta_offset(a.p1, a.p0) for a in spec.arms])
    return l0, eff_off


def _full_mask(n_arms: int) -> int:
    return (1 << n_arms) - 1


def _subset_mask(arms) -> int:
    m = 0
    for j in arms:
        m |= 1 << j
    return m


def _beta_tail_batch(x, n, a1, b1, t, upper: bool):
    """Vectorized Pr(p > t) (upper) or Pr(p <= t) for Beta(x+a1, n-x+b1)."""
    cdf = special.betainc(x + a1, n - x + b1, t)
    return 1.0 - cdf if upper else cdf


def independent_probs_batch(design: DesignSpec, spec: TrialSpec, x, n):
    """Exact per-arm futility and efficacy tail probabilities."""
    a1, b1 = design.beta_prior
    p0 = np.array(spec.p0)
    p1 = np.array(spec.p1)
    fut = _beta_tail_batch(x, n, a1, b1, p0[None, :], upper=False)
    eff = _beta_tail_batch(x, n, a1, b1, p1[None, :], upper=True)
    return fut, eff


def bhm_probs_batch(design: DesignSpec, spec: TrialSpec, x, n, seeds,
                    control: McmcControl, hyper: HyperPrior):
    l0, eff_off = _arm_arrays(spec)
    mask = _full_mask(spec.n_arms)
    sub_seeds = [derive_seed(int(s), mask) for s in seeds]
    fut, eff, _, _ = run_posterior_batch(
        x, n, l0, eff_off, design.prior, hyper, sub_seeds, control
    )
    return fut, eff


def cluster_assignments_batch(spec: TrialSpec, x, n, omega: float, beta_prior):
    """Vectorized sensitive-cluster membership for every replicate."""
    a1, b1 = beta_prior
    mid = (np.array(spec.p0) + np.array(spec.p1)) / 2.0
    max_n = np.array([a.max_n for a in spec.arms], dtype=float)
    prob_above = _beta_tail_batch(x, n, a1, b1, mid[None, :], upper=True)
    threshold = 0.5 * (n / max_n[None, :]) ** omega
    return prob_above > threshold


def cobhm_probs_batch(design: DesignSpec, spec: TrialSpec, x, n, seeds,
                      control: McmcControl, hyper: HyperPrior):
    """Cluster, then borrow within clusters of two or more arms.

    Replicates are regrouped by their cluster pattern so each distinct
    sub-model runs as one batch; per-replicate seeds keyed by the member
    subset keep results independent of the grouping.
    """
    R, J = x.shape
    a1, b1 = design.beta_prior
    sens = cluster_assignments_batch(spec, x, n, design.omega, design.beta_prior)
    l0, eff_off = _arm_arrays(spec)
    p0 = np.array(spec.p0)
    p1 = np.array(spec.p1)
    fut = np.empty((R, J))
    eff = np.empty((R, J))
    seeds = np.asarray(seeds, dtype=np.uint64)

    patterns = {}
    for r in range(R):
        patterns.setdefault(tuple(bool(v) for v in sens[r]), []).append(r)

    for pattern, rows in patterns.items():
        rows = np.array(rows)
        for member in (True, False):
            arms = [j for j in range(J) if pattern[j] == member]
            if not arms:
                continue
            if len(arms) == 1:
                j = arms[0]
                fut[rows, j] = _beta_tail_batch(x[rows, j], n[rows, j], a1, b1, p0[j], upper=False)
                eff[rows, j] = _beta_tail_batch(x[rows, j], n[rows, j], a1, b1, p1[j], upper=True)
                continue
            mask = _subset_mask(arms)
            sub_seeds = [derive_seed(int(seeds[r]), mask) for r in rows]
            f, e, _, _ = run_posterior_batch(
                x[np.ix_(rows, arms)], n[np.ix_(rows, arms)],
                l0[arms], eff_off[arms], design.cluster_prior, hyper,
                sub_seeds, control,
            )
            fut[np.ix_(rows, arms)] = f
            eff[np.ix_(rows, arms)] = e
    return fut, eff


def _log_model_likelihoods(spec: TrialSpec, partitions, x, n):
    """(R, G) log likelihoods with each partition's point response rates."""
    R, J = x.shape
    G = len(partitions)
    out = np.empty((R, G))
    for g, part in enumerate(partitions):
        p = np.array(part.true_rates(spec))
        out[:, g] = _binom_logpmf(x, n, p[None, :]).sum(axis=1)
    return out


def aobhm_probs_batch(design: DesignSpec, spec: TrialSpec, x, n, seeds,
                      control: McmcControl, hyper: HyperPrior):
    """Model-averaged (or model-selected) futility probabilities.

    Every per-partition hierarchical fit reuses the same per-replicate
    random stream, so identical priors give identical fits and the
    average collapses exactly.
    """
    partitions = enumerate_partitions(spec)
    G = len(partitions)
    if len(design.per_partition_priors) != G:
        raise ValueError(f"expected {G} per-partition priors, got {len(design.per_partition_priors)}")
    R, J = x.shape
    l0, eff_off = _arm_arrays(spec)
    mask = _full_mask(J)
    sub_seeds = [derive_seed(int(s), mask) for s in seeds]

    fut_g = np.empty((G, R, J))
    eff_g = np.empty((G, R, J))
    for g, prior in enumerate(design.per_partition_priors):
        f, e, _, _ = run_posterior_batch(x, n, l0, eff_off, prior, hyper, sub_seeds, control)
        fut_g[g] = f
        eff_g[g] = e

    logl = _log_model_likelihoods(spec, partitions, x, n)
    with np.errstate(divide="ignore"):
        logw = logl + np.log(np.array(design.model_prior))[None, :]
    logw -= special.logsumexp(logw, axis=1, keepdims=True)

    if design.decision_mode is DecisionMode.MODEL_SELECT:
        pick = np.argmax(logw, axis=1)
        fut = fut_g[pick, np.arange(R)]
        eff = eff_g[pick, np.arange(R)]
    else:
        w = np.exp(logw)
        fut = np.einsum("rg,grj->rj", w, fut_g)
        eff = np.einsum("rg,grj->rj", w, eff_g)
    return fut, eff


def futility_probs_batch(design: DesignSpec, spec: TrialSpec, x, n, seeds,
                         control: McmcControl, hyper: HyperPrior):
    """Dispatch to the design's posterior engine; x and n are (R, J)."""
    x = np.ascontiguousarray(x, dtype=np.int64)
    n = np.ascontiguousarray(n, dtype=np.int64)
    if design.kind is DesignKind.INDEPENDENT:
        return independent_probs_batch(design, spec, x, n)
    if design.kind in (DesignKind.VAGUE_BHM, DesignKind.OBHM):
        return bhm_probs_batch(design, spec, x, n, seeds, control, hyper)
    if design.kind is DesignKind.COBHM:
        return cobhm_probs_batch(design, spec, x, n, seeds, control, hyper)
    if design.kind is DesignKind.AOBHM:
        return aobhm_probs_batch(design, spec, x, n, seeds, control, hyper)
    raise ValueError(f"unknown design kind {design.kind!r}")


def decide_from_probs(fut, eff, data: ObservedData, spec: TrialSpec,
                      policy: StoppingPolicy) -> list[ArmDecision]:
    """Apply the stopping boundaries to one data snapshot.

    An arm at its maximum sample size receives a final verdict; interim
    arms either continue or stop. Ties go to continuation (the rule is a
    strict inequality).
    """
    decisions = []
    for j, arm in enumerate(spec.arms):
        nj = data.n[j]
        cut = bop2_cutoff(nj, arm.max_n, policy.zeta[j], policy.delta[j])
        is_final = nj >= arm.max_n
        if fut[j] > cut:
            status = ArmStatus.FINAL_NOT_EFFECTIVE if is_final else ArmStatus.STOPPED_FUTILE
        elif policy.superiority_cutoff is not None and eff[j] > policy.superiority_cutoff:
            status = ArmStatus.FINAL_EFFECTIVE if is_final else ArmStatus.STOPPED_SUPERIOR
        elif is_final:
            status = ArmStatus.FINAL_EFFECTIVE
        else:
            status = ArmStatus.CONTINUE
        decisions.append(ArmDecision(status=status, futility_prob=float(fut[j]), n_at_decision=nj))
    return decisions


def _analyze(design: DesignSpec, data: ObservedData, spec: TrialSpec,
             control: McmcControl, hyper: HyperPrior) -> list[ArmDecision]:
    if data.n_arms != spec.n_arms:
        raise ValueError("data must have one entry per trial arm")
    if len(design.policy.zeta) != spec.n_arms:
        raise ValueError("stopping policy must have one boundary per arm")
    x = np.array([data.x], dtype=np.int64)
    n = np.array([data.n], dtype=np.int64)
    fut, eff = futility_probs_batch(design, spec, x, n, [control.seed], control, hyper)
    return decide_from_probs(fut[0], eff[0], data, spec, design.policy)


def independent_analyze(data: ObservedData, spec: TrialSpec, design: DesignSpec,
                        control: McmcControl = McmcControl(),
                        hyper: HyperPrior = HyperPrior()) -> list[ArmDecision]:
    """Arm-by-arm decisions from exact beta-binomial posteriors."""
    if design.kind is not DesignKind.INDEPENDENT:
        raise ValueError("independent_analyze requires an independent design")
    return _analyze(design, data, spec, control, hyper)


def bhm_analyze(data: ObservedData, spec: TrialSpec, design: DesignSpec,
                control: McmcControl = McmcControl(),
                hyper: HyperPrior = HyperPrior()) -> list[ArmDecision]:
    """Joint hierarchical fit over all arms, then per-arm boundaries.

    Stopped arms are expected to arrive with their frozen counts; they
    stay in the likelihood and keep informing the hierarchy.
    """
    if design.kind not in (DesignKind.VAGUE_BHM, DesignKind.OBHM):
        raise ValueError("bhm_analyze requires a bhm or obhm design")
    return _analyze(design, data, spec, control, hyper)


def cobhm_analyze(data: ObservedData, spec: TrialSpec, design: DesignSpec,
                  control: McmcControl = McmcControl(),
                  hyper: HyperPrior = HyperPrior()) -> list[ArmDecision]:
    """Cluster arms, borrow within clusters, then apply the boundaries."""
    if design.kind is not DesignKind.COBHM:
        raise ValueError("cobhm_analyze requires a cobhm design")
    return _analyze(design, data, spec, control, hyper)


def aobhm_analyze(data: ObservedData, spec: TrialSpec, design: DesignSpec,
                  control: McmcControl = McmcControl(),
                  hyper: HyperPrior = HyperPrior()) -> list[ArmDecision]:
    """Average per-partition fits by posterior model probability."""
    if design.kind is not DesignKind.AOBHM:
        raise ValueError("aobhm_analyze requires an aobhm design")
    return _analyze(design, data, spec, control, hyper)


def cluster_arms(data: ObservedData, spec: TrialSpec, omega: float,
                 beta_prior=DEFAULT_BETA_PRIOR) -> Partition:
    """Sensitive/insensitive split by the adaptive posterior rule.

    An arm joins the sensitive cluster when its posterior mass above the
    midpoint of (p0, p1) beats 0.5 (n/N)^omega; the cutoff tightens as
    enrollment grows.
    """
    if data.n_arms != spec.n_arms:
        raise ValueError("data must have one entry per trial arm")
    x = np.array([data.x], dtype=np.int64)
    n = np.array([data.n], dtype=np.int64)
    sens = cluster_assignments_batch(spec, x, n, omega, beta_prior)
    return Partition(sensitive=tuple(bool(v) for v in sens[0]))


def model_likelihood(data: ObservedData, partition: Partition, spec: TrialSpec) -> float:
    """Binomial likelihood of the data under a partition's point rates."""
    if data.n_arms != spec.n_arms:
        raise ValueError("data must have one entry per trial arm")
    x = np.array([data.x], dtype=np.int64)
    n = np.array([data.n], dtype=np.int64)
    logl = _log_model_likelihoods(spec, [partition], x, n)
    return float(np.exp(logl[0, 0]))


def bma_weights(data: ObservedData, spec: TrialSpec, partitions,
                model_prior) -> np.ndarray:
    """Posterior model probabilities over partitions via log-sum-exp."""
    model_prior = np.asarray(model_prior, dtype=float)
    if len(partitions) != model_prior.size:
        raise ValueError("one prior probability is required per partition")
    if abs(model_prior.sum() - 1.0) > 1e-9:
        raise ValueError("model prior must sum to 1")
    x = np.array([data.x], dtype=np.int64)
    n = np.array([data.n], dtype=np.int64)
    logl = _log_model_likelihoods(spec, partitions, x, n)[0]
    with np.errstate(divide="ignore"):
        logw = logl + np.log(model_prior)
    norm = special.logsumexp(logw)
    if not np.isfinite(norm):
        raise FloatingPointError("all model likelihoods vanished")
    return np.exp(logw - norm)
