"""Replicated trial simulation and operating characteristics.

Each replicate draws one patient-response stream per arm, keyed only by
(base seed, replicate, arm), so every design under comparison sees the
same patients (common random numbers) and results are invariant to
execution order, chunking, and thread count. Analyses at each look run
batched across replicates but reproduce exactly what a standalone
single-replicate run would produce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import STREAM_ANALYSIS, STREAM_PATIENTS, derive_seed, generator
from .core import HyperPrior, Partition, TrialSpec
from .designs import (
    ArmDecision,
    ArmStatus,
    DesignSpec,
    bop2_cutoff,
    futility_probs_batch,
)
from .inference import McmcControl

__all__ = [
    "ScenarioTruth",
    "OperatingCharacteristics",
    "replicate_seed",
    "run_replicates",
    "simulate_trial",
    "operating_characteristics",
    "oc_under_partition",
]

# integer status codes used inside the vectorized engine
_CONTINUE = 0
_STOP_FUT = 1
_STOP_SUP = 2
_FINAL_EFF = 3
_FINAL_NOT = 4

_STATUS_BY_CODE = {
    _CONTINUE: ArmStatus.CONTINUE,
    _STOP_FUT: ArmStatus.STOPPED_FUTILE,
    _STOP_SUP: ArmStatus.STOPPED_SUPERIOR,
    _FINAL_EFF: ArmStatus.FINAL_EFFECTIVE,
    _FINAL_NOT: ArmStatus.FINAL_NOT_EFFECTIVE,
}


@dataclass(frozen=True)
class ScenarioTruth:
    """True response rate per arm for one simulation scenario."""

    true_p: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "true_p", tuple(float(p) for p in self.true_p))
        if any(not 0.0 < p < 1.0 for p in self.true_p):
            raise ValueError("true response rates must lie in (0, 1)")

    @classmethod
    def from_partition(cls, partition: Partition, spec: TrialSpec) -> "ScenarioTruth":
        return cls(true_p=partition.true_rates(spec))


@dataclass(frozen=True)
class OperatingCharacteristics:
    """Per-arm summary over replicates.

    ``claim_prob`` is the fraction of replicates claiming the treatment
    effective (power for sensitive arms, type I error for insensitive
    ones); ``mc_se`` is its binomial Monte Carlo standard error.
    """

    claim_prob: np.ndarray
    mean_n: np.ndarray
    early_stop_prob: np.ndarray
    mc_se: np.ndarray
    n_reps: int

    def __post_init__(self):
        for arr in (self.claim_prob, self.mean_n, self.early_stop_prob, self.mc_se):
            arr.setflags(write=False)


def replicate_seed(base_seed: int, r: int) -> int:
    """The stateless per-replicate seed mix."""
    return derive_seed(base_seed, r)


def _patient_cumsums(seeds, truth: ScenarioTruth, spec: TrialSpec) -> np.ndarray:
    """(R, J, max_n + 1) cumulative responder counts for each stream."""
    R = len(seeds)
    J = spec.n_arms
    width = max(a.max_n for a in spec.arms)
    out = np.zeros((R, J, width + 1), dtype=np.int64)
    for r, seed in enumerate(seeds):
        for j, arm in enumerate(spec.arms):
            g = generator(derive_seed(seed, STREAM_PATIENTS, j))
            resp = g.random(arm.max_n) < truth.true_p[j]
            out[r, j, 1 : arm.max_n + 1] = np.cumsum(resp)
            if arm.max_n < width:
                out[r, j, arm.max_n + 1 :] = out[r, j, arm.max_n]
    return out


class _ReplicateBlock:
    """Final per-arm outcomes for a block of replicates."""

    def __init__(self, R: int, J: int):
        self.status = np.full((R, J), _CONTINUE, dtype=np.int8)
        self.n_final = np.zeros((R, J), dtype=np.int64)
        self.fut_at_decision = np.full((R, J), np.nan)

    @property
    def claimed(self) -> np.ndarray:
        return (self.status == _STOP_SUP) | (self.status == _FINAL_EFF)


def run_replicates(truth: ScenarioTruth, spec: TrialSpec, design: DesignSpec,
                   seeds, control: McmcControl, hyper: HyperPrior,
                   probs_provider=None, patient_cums=None) -> _ReplicateBlock:
    """Carry a block of replicates through every look of the trial.

    ``probs_provider(look, x, n, analysis_seeds)`` may replace the direct
    posterior computation (the calibration engine memoizes through this
    hook); it must return the same probabilities the direct call would.
    ``patient_cums`` may supply the response streams precomputed by
    ``_patient_cumsums`` for these seeds, for callers that re-run the
    same replicates many times.
    """
    if len(truth.true_p) != spec.n_arms:
        raise ValueError("scenario truth must cover every arm")
    R = len(seeds)
    J = spec.n_arms
    cums = patient_cums if patient_cums is not None else _patient_cumsums(seeds, truth, spec)
    analysis_base = [derive_seed(s, STREAM_ANALYSIS) for s in seeds]

    block = _ReplicateBlock(R, J)
    active = np.ones((R, J), dtype=bool)
    n_cur = np.zeros((R, J), dtype=np.int64)
    policy = design.policy

    for k in range(1, spec.max_looks + 1):
        has_look = np.array([k <= a.n_looks for a in spec.arms])
        look_n = np.array([a.interim_ns[k - 1] if k <= a.n_looks else 0 for a in spec.arms])
        grows = active & has_look[None, :]
        n_cur = np.where(grows, look_n[None, :], n_cur)
        x_cur = np.take_along_axis(cums, n_cur[:, :, None], axis=2)[:, :, 0]
        look_seeds = [derive_seed(s, k) for s in analysis_base]
        if probs_provider is None:
            fut, eff = futility_probs_batch(design, spec, x_cur, n_cur, look_seeds, control, hyper)
        else:
            fut, eff = probs_provider(k, x_cur, n_cur, look_seeds)

        for j, arm in enumerate(spec.arms):
            if not has_look[j]:
                continue
            rows = active[:, j]
            if not rows.any():
                continue
            cut = bop2_cutoff(int(look_n[j]), arm.max_n, policy.zeta[j], policy.delta[j])
            is_final = k == arm.n_looks
            stop_f = rows & (fut[:, j] > cut)
            newly = stop_f.copy()
            block.status[stop_f, j] = _FINAL_NOT if is_final else _STOP_FUT
            if policy.superiority_cutoff is not None:
                stop_s = rows & ~stop_f & (eff[:, j] > policy.superiority_cutoff)
                block.status[stop_s, j] = _FINAL_EFF if is_final else _STOP_SUP
                newly |= stop_s
            if is_final:
                passed = rows & ~newly
                block.status[passed, j] = _FINAL_EFF
                newly |= passed
            block.n_final[newly, j] = look_n[j]
            block.fut_at_decision[newly, j] = fut[newly, j]
            active[newly, j] = False
    return block


def _default_control(control) -> McmcControl:
    return control if control is not None else McmcControl()


def simulate_trial(truth: ScenarioTruth, spec: TrialSpec, design: DesignSpec,
                   seed: int, control: McmcControl | None = None,
                   hyper: HyperPrior = HyperPrior()) -> list[ArmDecision]:
    """One replicate: accrue to each look, analyze, freeze stopped arms.

    Bit-identical output for identical inputs.
    """
    block = run_replicates(truth, spec, design, [seed], _default_control(control), hyper)
    return [
        ArmDecision(
            status=_STATUS_BY_CODE[int(block.status[0, j])],
            futility_prob=float(block.fut_at_decision[0, j]),
            n_at_decision=int(block.n_final[0, j]),
        )
        for j in range(spec.n_arms)
    ]


def operating_characteristics(truth: ScenarioTruth, spec: TrialSpec, design: DesignSpec,
                              n_reps: int, base_seed: int,
                              control: McmcControl | None = None,
                              hyper: HyperPrior = HyperPrior(),
                              probs_provider=None) -> OperatingCharacteristics:
    """Aggregate replicated trials into per-arm operating characteristics.

    Replicate r uses the stateless seed mix of (base_seed, r), so the
    result does not depend on execution order or degree of parallelism.
    """
    if n_reps < 1:
        raise ValueError("n_reps must be at least 1")
    seeds = [replicate_seed(base_seed, r) for r in range(n_reps)]
    block = run_replicates(truth, spec, design, seeds, _default_control(control), hyper,
                           probs_provider=probs_provider)
    max_n = np.array([a.max_n for a in spec.arms])
    claimed = block.claimed
    early = (block.status != _CONTINUE) & (block.n_final < max_n[None, :])
    claim_prob = claimed.mean(axis=0)
    return OperatingCharacteristics(
        claim_prob=claim_prob,
        mean_n=block.n_final.mean(axis=0),
        early_stop_prob=early.mean(axis=0),
        mc_se=np.sqrt(claim_prob * (1.0 - claim_prob) / n_reps),
        n_reps=n_reps,
    )


def oc_under_partition(partition: Partition, spec: TrialSpec, design: DesignSpec,
                       n_reps: int, base_seed: int,
                       control: McmcControl | None = None,
                       hyper: HyperPrior = HyperPrior()):
    """Powers (sensitive arms) and type I errors (insensitive arms) under
    the scenario a partition implies."""
    truth = ScenarioTruth.from_partition(partition, spec)
    oc = operating_characteristics(truth, spec, design, n_reps, base_seed, control, hyper)
    rho = tuple(float(oc.claim_prob[j]) for j in partition.sensitive_indices)
    gamma = tuple(float(oc.claim_prob[j]) for j in partition.insensitive_indices)
    return rho, gamma
