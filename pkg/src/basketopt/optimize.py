"""Utility-maximizing prior search and boundary calibration.

The prior search walks a grid over the shrinkage prior's parameters
(degrees of freedom and scale for the scaled inverse chi-square, or the
half-Cauchy scale), simulating every partition's operating
characteristics at each grid point under common random numbers, scoring
them with the tradeoff utility, and returning the mean-utility argmax.
A cheap first pass over the whole grid is refined with more replicates
at the leading candidates.

Boundary calibration bisects each arm-equivalence class's zeta until the
global-null claim probability hits the target type I error. Because a
replicate's analysis at a look depends on zeta only through which arms
froze earlier, posterior computations are memoized by their data
pattern, making later bisection steps nearly free.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    HalfCauchy,
    HyperPrior,
    PriorSpec,
    ScaledInvChiSq,
    TrialSpec,
    UtilitySpec,
    empirical_sigma_max,
    enumerate_partitions,
    mean_utility,
    utility,
)
from .designs import DesignKind, DesignSpec, StoppingPolicy, futility_probs_batch
from .inference import McmcControl
from .simulate import (
    ScenarioTruth,
    _patient_cumsums,
    oc_under_partition,
    replicate_seed,
    run_replicates,
)

__all__ = [
    "GridSpec",
    "GridPoint",
    "OptimizationResult",
    "CalibrationReport",
    "grid_search_prior",
    "optimize_half_cauchy",
    "per_partition_priors",
    "calibrate_zeta",
    "calibrate_zeta_report",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    """Search-space resolution and simulation effort for the prior search.

    The degrees-of-freedom range defaults to [0.1, J] (a prior effective
    sample size between near-zero and the number of arms) and the scale
    range to (0, 5 * sigma_max_hat], five times the largest empirical
    effect variance over partitions. ``refine_top`` leading candidates
    from the first pass are re-simulated with ``refine_reps`` replicates.
    """

    v0_count: int = 8
    sigma0_count: int = 10
    reps_per_point: int = 1000
    v0_min: float = 0.1
    v0_max: Optional[float] = None
    sigma0_sq_max: Optional[float] = None
    half_cauchy_count: int = 8
    half_cauchy_a_max: Optional[float] = None
    refine_reps: int = 5000
    refine_top: int = 3

    def __post_init__(self):
        if min(self.v0_count, self.sigma0_count, self.half_cauchy_count) < 1:
            raise ValueError("grid step counts must be at least 1")
        if self.reps_per_point < 1 or self.refine_reps < 1:
            raise ValueError("replicate counts must be at least 1")
        if self.v0_min <= 0.0:
            raise ValueError("v0_min must be positive")
        if self.refine_top < 0:
            raise ValueError("refine_top must be nonnegative")

    def inv_chisq_candidates(self, spec: TrialSpec) -> list[ScaledInvChiSq]:
        v0_hi = self.v0_max if self.v0_max is not None else float(spec.n_arms)
        s_hi = self.sigma0_sq_max if self.sigma0_sq_max is not None else 5.0 * empirical_sigma_max(spec)
        v0s = np.linspace(self.v0_min, v0_hi, self.v0_count)
        # the scale interval is open at zero, so the grid starts one step in
        scales = np.linspace(s_hi / self.sigma0_count, s_hi, self.sigma0_count)
        return [ScaledInvChiSq(v0=float(v), sigma0_sq=float(s)) for v in v0s for s in scales]

    def half_cauchy_candidates(self, spec: TrialSpec) -> list[HalfCauchy]:
        a_hi = self.half_cauchy_a_max
        if a_hi is None:
            a_hi = math.sqrt(5.0 * empirical_sigma_max(spec))
        scales = np.linspace(a_hi / self.half_cauchy_count, a_hi, self.half_cauchy_count)
        return [HalfCauchy(scale_a=float(a)) for a in scales]


@dataclass(frozen=True)
class GridPoint:
    """One evaluated candidate: per-partition rates, utilities, and the
    weighted mean. Partitions with zero weight are skipped (None rates,
    NaN utility)."""

    prior: PriorSpec
    rho: tuple
    gamma: tuple
    utilities: tuple[float, ...]
    mean_utility: float
    n_reps: int


@dataclass(frozen=True)
class OptimizationResult:
    best_prior: PriorSpec
    best_mean_utility: float
    grid_trace: tuple[GridPoint, ...]


def _tie_key(prior: PriorSpec) -> tuple:
    # prefer the less informative prior on exact utility ties
    if isinstance(prior, ScaledInvChiSq):
        return (prior.sigma0_sq, prior.v0)
    return (prior.scale_a,)


def _evaluate_candidate(prior, spec, util: UtilitySpec, partitions, design_template,
                        n_reps, base_seed, control, hyper) -> GridPoint:
    design = design_template.with_prior(prior)
    rho_all, gamma_all, utils = [], [], []
    for g, part in enumerate(partitions):
        if util.weights[g] == 0.0:
            rho_all.append(None)
            gamma_all.append(None)
            utils.append(math.nan)
            continue
        rho, gamma = oc_under_partition(part, spec, design, n_reps, base_seed, control, hyper)
        rho_all.append(rho)
        gamma_all.append(gamma)
        utils.append(utility(part, rho, gamma, util))
    mean_u = sum(w * u for w, u in zip(util.weights, utils) if w > 0.0)
    return GridPoint(prior=prior, rho=tuple(rho_all), gamma=tuple(gamma_all),
                     utilities=tuple(utils), mean_utility=float(mean_u), n_reps=n_reps)


def _search(candidates, spec, util, partitions, design_template, grid: GridSpec,
            base_seed, control, hyper) -> OptimizationResult:
    if not candidates:
        raise ValueError("the search grid is empty")
    if len(util.weights) != len(partitions):
        raise ValueError(f"utility must carry {len(partitions)} partition weights")
    trace = [
        _evaluate_candidate(c, spec, util, partitions, design_template,
                            grid.reps_per_point, base_seed, control, hyper)
        for c in candidates
    ]
    order = sorted(range(len(trace)),
                   key=lambda i: (-trace[i].mean_utility, _tie_key(trace[i].prior)))
    if grid.refine_top > 0 and grid.refine_reps != grid.reps_per_point:
        for i in order[: grid.refine_top]:
            trace[i] = _evaluate_candidate(
                trace[i].prior, spec, util, partitions, design_template,
                grid.refine_reps, base_seed, control, hyper,
            )
        order = sorted(range(len(trace)),
                       key=lambda i: (-trace[i].mean_utility, _tie_key(trace[i].prior)))
    best = trace[order[0]]
    logger.info("prior search best %s with mean utility %.4f", best.prior, best.mean_utility)
    return OptimizationResult(best_prior=best.prior,
                              best_mean_utility=best.mean_utility,
                              grid_trace=tuple(trace))


def _design_template(design_kind: DesignKind, policy: StoppingPolicy,
                     omega: float, beta_prior) -> DesignSpec:
    placeholder = ScaledInvChiSq(v0=1.0, sigma0_sq=1.0)
    if design_kind is DesignKind.COBHM:
        return DesignSpec(kind=design_kind, policy=policy, cluster_prior=placeholder,
                          omega=omega, beta_prior=beta_prior)
    if design_kind in (DesignKind.OBHM, DesignKind.VAGUE_BHM):
        return DesignSpec(kind=design_kind, policy=policy, prior=placeholder,
                          beta_prior=beta_prior)
    raise ValueError(f"prior search does not apply to {design_kind}")


def grid_search_prior(spec: TrialSpec, util: UtilitySpec, policy: StoppingPolicy,
                      grid: GridSpec, design_kind: DesignKind = DesignKind.OBHM,
                      base_seed: int = 0, *, omega: float = 2.0,
                      beta_prior=(0.1, 0.1), control: McmcControl | None = None,
                      hyper: HyperPrior = HyperPrior()) -> OptimizationResult:
    """Grid search for the mean-utility-maximizing shrinkage prior.

    Every grid point reuses the same base seed, so all candidates see
    identical patient streams and the argmax is not blurred by
    between-point Monte Carlo noise.
    """
    partitions = enumerate_partitions(spec)
    template = _design_template(design_kind, policy, omega, beta_prior)
    return _search(grid.inv_chisq_candidates(spec), spec, util, partitions,
                   template, grid, base_seed, control, hyper)


def optimize_half_cauchy(spec: TrialSpec, util: UtilitySpec, policy: StoppingPolicy,
                         grid: GridSpec, base_seed: int = 0, *,
                         design_kind: DesignKind = DesignKind.OBHM,
                         omega: float = 2.0, beta_prior=(0.1, 0.1),
                         control: McmcControl | None = None,
                         hyper: HyperPrior = HyperPrior()) -> OptimizationResult:
    """One-dimensional search over the half-Cauchy scale."""
    partitions = enumerate_partitions(spec)
    template = _design_template(design_kind, policy, omega, beta_prior)
    return _search(grid.half_cauchy_candidates(spec), spec, util, partitions,
                   template, grid, base_seed, control, hyper)


def per_partition_priors(spec: TrialSpec, util: UtilitySpec, policy: StoppingPolicy,
                         grid: GridSpec, base_seed: int = 0, *,
                         half_cauchy: bool = False,
                         control: McmcControl | None = None,
                         hyper: HyperPrior = HyperPrior()) -> tuple[PriorSpec, ...]:
    """One optimal prior per partition, for the model-averaged design.

    Each partition is optimized with full weight on itself and zero on
    the others, so only its own operating characteristics are simulated.
    """
    partitions = enumerate_partitions(spec)
    G = len(partitions)
    out = []
    search = optimize_half_cauchy if half_cauchy else grid_search_prior
    for g in range(G):
        w = [0.0] * G
        w[g] = 1.0
        res = search(spec, util.with_weights(w), policy, grid, base_seed=base_seed,
                     control=control, hyper=hyper)
        out.append(res.best_prior)
    return tuple(out)


@dataclass(frozen=True)
class CalibrationReport:
    """Outcome of the zeta calibration: achieved global-null claim rates
    and whether any class ran into the search boundary."""

    zeta: tuple[float, ...]
    claim_prob: tuple[float, ...]
    target: float
    n_reps: int
    steps: int
    at_boundary: tuple[bool, ...]


class _MemoizedLookProbs:
    """Posterior look probabilities memoized by (look, data-size pattern).

    With patient streams fixed, a replicate's data at a look is a pure
    function of which arms froze earlier; re-evaluations under different
    boundaries therefore only pay for patterns never seen before.
    """

    def __init__(self, design, spec, n_reps, control, hyper):
        self.design = design
        self.spec = spec
        self.n_reps = n_reps
        self.control = control
        self.hyper = hyper
        self.store: dict = {}

    def __call__(self, look, x, n, seeds):
        R, J = x.shape
        fut = np.empty((R, J))
        eff = np.empty((R, J))
        groups: dict[tuple, list[int]] = {}
        for r in range(R):
            groups.setdefault(tuple(int(v) for v in n[r]), []).append(r)
        seeds = np.asarray(seeds, dtype=np.uint64)
        for pattern, rows in groups.items():
            rows = np.array(rows)
            entry = self.store.get((look, pattern))
            if entry is None:
                entry = (np.empty((self.n_reps, J)), np.empty((self.n_reps, J)),
                         np.zeros(self.n_reps, dtype=bool))
                self.store[(look, pattern)] = entry
            e_fut, e_eff, filled = entry
            need = rows[~filled[rows]]
            if need.size:
                f, e = futility_probs_batch(self.design, self.spec, x[need], n[need],
                                            seeds[need], self.control, self.hyper)
                e_fut[need] = f
                e_eff[need] = e
                filled[need] = True
            fut[rows] = e_fut[rows]
            eff[rows] = e_eff[rows]
        return fut, eff


def calibrate_zeta_report(spec: TrialSpec, design: DesignSpec, target_alpha: float,
                          n_reps: int, base_seed: int, *,
                          control: McmcControl | None = None,
                          hyper: HyperPrior = HyperPrior(), tol: float = 0.005,
                          max_steps: int = 30,
                          bracket: tuple[float, float] = (0.01, 0.999),
                          ) -> tuple[StoppingPolicy, CalibrationReport]:
    """Bisect per-class zetas to the target global-null claim probability.

    Arms sharing (p0, p1, max_n, interim schedule, delta) form one class
    and share one zeta; each class's claim probability (averaged over its
    arms) is monotone nonincreasing in its zeta. Unattainable targets
    stop at the bracket boundary with a logged diagnostic.
    """
    if not 0.0 < target_alpha < 1.0:
        raise ValueError("target_alpha must lie in (0, 1)")
    J = spec.n_arms
    policy = design.policy
    if len(policy.zeta) != J:
        raise ValueError("design policy must have one boundary per arm")
    truth = ScenarioTruth(true_p=tuple(a.p0 for a in spec.arms))
    seeds = [replicate_seed(base_seed, r) for r in range(n_reps)]
    control = control if control is not None else McmcControl()
    memo = _MemoizedLookProbs(design, spec, n_reps, control, hyper)
    cums = _patient_cumsums(seeds, truth, spec)

    class_key = [
        (a.p0, a.p1, a.max_n, a.interim_ns, policy.delta[j])
        for j, a in enumerate(spec.arms)
    ]
    classes: dict[tuple, list[int]] = {}
    for j, key in enumerate(class_key):
        classes.setdefault(key, []).append(j)
    members = list(classes.values())
    C = len(members)

    def class_claims(zetas_by_class):
        z = [0.0] * J
        for c, arms in enumerate(members):
            for j in arms:
                z[j] = zetas_by_class[c]
        d = design.with_policy(policy.with_zeta(z))
        block = run_replicates(truth, spec, d, seeds, control, hyper,
                               probs_provider=memo, patient_cums=cums)
        per_arm = block.claimed.mean(axis=0)
        return np.array([per_arm[arms].mean() for arms in members]), per_arm

    lo = np.full(C, bracket[0])
    hi = np.full(C, bracket[1])
    claims_lo, _ = class_claims(lo)
    claims_hi, _ = class_claims(hi)
    best = np.where(np.abs(claims_lo - target_alpha) <= np.abs(claims_hi - target_alpha), lo, hi)
    best_err = np.minimum(np.abs(claims_lo - target_alpha), np.abs(claims_hi - target_alpha))
    at_boundary = [False] * C
    for c in range(C):
        if claims_hi[c] > target_alpha + tol:
            at_boundary[c] = True
            logger.warning(
                "calibration class %d: claim %.4f at zeta=%.3f still above target %.3f",
                c, claims_hi[c], bracket[1], target_alpha)
        if claims_lo[c] < target_alpha - tol:
            at_boundary[c] = True
            logger.warning(
                "calibration class %d: claim %.4f at zeta=%.3f still below target %.3f",
                c, claims_lo[c], bracket[0], target_alpha)

    steps = 0
    for _ in range(max_steps):
        mid = (lo + hi) / 2.0
        claims, _ = class_claims(mid)
        steps += 1
        err = np.abs(claims - target_alpha)
        improve = err < best_err
        best[improve] = mid[improve]
        best_err[improve] = err[improve]
        above = claims > target_alpha
        lo[above] = mid[above]
        hi[~above] = mid[~above]
        if np.all(best_err <= 0.001):
            break

    final_class, per_arm = class_claims(best)
    zeta = [0.0] * J
    for c, arms in enumerate(members):
        for j in arms:
            zeta[j] = float(best[c])
    for c in range(C):
        if abs(final_class[c] - target_alpha) > tol and not at_boundary[c]:
            logger.warning(
                "calibration class %d settled %.4f away from target (attainability gap)",
                c, final_class[c] - target_alpha)
    report = CalibrationReport(
        zeta=tuple(zeta),
        claim_prob=tuple(float(v) for v in per_arm),
        target=target_alpha,
        n_reps=n_reps,
        steps=steps,
        at_boundary=tuple(bool(at_boundary[_class_of(j, members)]) for j in range(J)),
    )
    return policy.with_zeta(zeta), report


def _class_of(j: int, members) -> int:
    for c, arms in enumerate(members):
        if j in arms:
            return c
    raise KeyError(j)


def calibrate_zeta(spec: TrialSpec, design: DesignSpec, target_alpha: float,
                   n_reps: int, base_seed: int, **kwargs) -> StoppingPolicy:
    """Calibrated stopping policy; see calibrate_zeta_report for details."""
    policy, _ = calibrate_zeta_report(spec, design, target_alpha, n_reps, base_seed, **kwargs)
    return policy
