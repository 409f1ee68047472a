"""Posterior computation for the hierarchical binomial-logit model.

Two inference routes live here. Exact conjugate beta-binomial posteriors
(with regularized-incomplete-beta tail probabilities) serve the
independent analysis, the clustering rule, and singleton clusters. A
Metropolis-within-Gibbs sampler serves the hierarchical model: each
arm-level effect moves by a random walk on the logit scale, while the
common mean and the shrinkage variance use their conjugate updates (the
variance falls back to a random walk on the log standard deviation under
a half-Cauchy prior, where conjugacy is lost).

The sampler is deterministic: every chain consumes a pregenerated block
of random draws from a stream keyed only by its seed, so a replicate
produces bit-identical output whether it runs alone or inside a batch,
serially or in parallel.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange
from scipy import special

from ._rng import generator
from .core import HyperPrior, HalfCauchy, PriorSpec, ScaledInvChiSq, TrialSpec, theta_offset

__all__ = [
    "ObservedData",
    "McmcControl",
    "PosteriorDraws",
    "beta_binomial_posterior",
    "beta_tail_prob",
    "bhm_sample",
    "posterior_futility_prob",
    "posterior_efficacy_prob",
]

logger = logging.getLogger(__name__)

# Reps are processed in fixed-size blocks purely to bound the memory of
# pregenerated random draws; block size never affects results.
_CHUNK_REPS = 256


@dataclass(frozen=True)
class ObservedData:
    """Per-arm enrollment and responder counts at an analysis time."""

    n: tuple[int, ...]
    x: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        object.__setattr__(self, "x", tuple(int(v) for v in self.x))
        if len(self.n) != len(self.x):
            raise ValueError("n and x must have one entry per arm")
        for nj, xj in zip(self.n, self.x):
            if nj < 0 or xj < 0 or xj > nj:
                raise ValueError(f"need 0 <= x <= n per arm, got x={xj}, n={nj}")

    @property
    def n_arms(self) -> int:
        return len(self.n)


@dataclass(frozen=True)
class McmcControl:
    """Chain length, thinning, seed, and random-walk step size.

    ``min_kept`` is the floor on retained draws below which tail
    probabilities become too noisy for go/no-go decisions; lower it only
    in tests.
    """

    burn_in: int = 2000
    kept_draws: int = 10000
    thin: int = 1
    seed: int = 0
    step_scale: float = 0.8
    min_kept: int = 1000

    def __post_init__(self):
        if self.burn_in < 1:
            raise ValueError("burn_in must be a positive integer")
        if self.kept_draws < max(1, self.min_kept):
            raise ValueError(
                f"kept_draws must be at least {max(1, self.min_kept)} (configurable via min_kept)"
            )
        if self.thin < 1:
            raise ValueError("thin must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.step_scale <= 0.0:
            raise ValueError("step_scale must be positive")

    @property
    def total_iterations(self) -> int:
        return self.burn_in + self.kept_draws * self.thin

    def with_seed(self, seed: int) -> "McmcControl":
        return McmcControl(
            burn_in=self.burn_in,
            kept_draws=self.kept_draws,
            thin=self.thin,
            seed=seed,
            step_scale=self.step_scale,
            min_kept=self.min_kept,
        )


@dataclass(frozen=True)
class PosteriorDraws:
    """Retained posterior samples from one hierarchical fit.

    ``p`` has one column per arm with response-rate draws strictly inside
    (0, 1); ``theta`` and ``sigma2`` hold the common mean and shrinkage
    variance. ``accept_rate`` is the per-arm Metropolis acceptance
    fraction after burn-in, kept as a mixing diagnostic.
    """

    p: np.ndarray
    theta_arms: np.ndarray
    theta: np.ndarray
    sigma2: np.ndarray
    accept_rate: np.ndarray

    def __post_init__(self):
        for arr in (self.p, self.theta_arms, self.theta, self.sigma2, self.accept_rate):
            arr.setflags(write=False)

    @property
    def n_draws(self) -> int:
        return self.p.shape[0]

    @property
    def n_arms(self) -> int:
        return self.p.shape[1]


def beta_binomial_posterior(x: int, n: int, a1: float, b1: float) -> tuple[float, float]:
    """Beta posterior parameters after observing x responders in n patients."""
    if a1 <= 0.0 or b1 <= 0.0:
        raise ValueError("beta prior parameters must be positive")
    if x < 0 or n < 0 or x > n:
        raise ValueError(f"need 0 <= x <= n, got x={x}, n={n}")
    return (x + a1, n - x + b1)


def beta_tail_prob(params: tuple[float, float], t: float, direction: str = "greater") -> float:
    """Exact Beta tail probability via the regularized incomplete beta."""
    a, b = params
    if a <= 0.0 or b <= 0.0:
        raise ValueError("beta parameters must be positive")
    if direction not in ("greater", "leq"):
        raise ValueError(f"direction must be 'greater' or 'leq', got {direction!r}")
    t = min(max(t, 0.0), 1.0)
    cdf = float(special.betainc(a, b, t))
    return cdf if direction == "leq" else 1.0 - cdf


@njit(cache=True)
def _log1pexp(v):
    if v > 33.0:
        return v
    return math.log1p(math.exp(v))


@njit(cache=True, parallel=True)
def _mwg_invchisq(x, n, l0, eff_off, alpha0, tau0_sq, b0, step,
                  burn, kept, thin, sig2_init,
                  z, logu, zmu, gam,
                  fut, eff, acc, draws, record):
    R, T, J = z.shape
    for r in prange(R):
        theta = np.zeros(J)
        loglik = np.empty(J)
        for j in range(J):
            eta = l0[j]
            loglik[j] = x[r, j] * eta - n[r, j] * _log1pexp(eta)
        mu = alpha0
        sig2 = sig2_init
        kidx = 0
        for t in range(T):
            for j in range(J):
                prop = theta[j] + step * z[r, t, j]
                eta = prop + l0[j]
                ll = x[r, j] * eta - n[r, j] * _log1pexp(eta)
                dprior = ((theta[j] - mu) ** 2 - (prop - mu) ** 2) / (2.0 * sig2)
                if logu[r, t, j] < ll - loglik[j] + dprior:
                    theta[j] = prop
                    loglik[j] = ll
                    if t >= burn:
                        acc[r, j] += 1
            s = 0.0
            for j in range(J):
                s += theta[j]
            prec = J / sig2 + 1.0 / tau0_sq
            mu = (s / sig2 + alpha0 / tau0_sq) / prec + zmu[r, t] / math.sqrt(prec)
            ss = 0.0
            for j in range(J):
                ss += (theta[j] - mu) ** 2
            sig2 = (b0 + 0.5 * ss) / gam[r, t]
            if t >= burn and (t - burn) % thin == thin - 1:
                for j in range(J):
                    if theta[j] <= 0.0:
                        fut[r, j] += 1
                    if theta[j] >= eff_off[j]:
                        eff[r, j] += 1
                if record:
                    for j in range(J):
                        draws[r, kidx, j] = theta[j]
                    draws[r, kidx, J] = mu
                    draws[r, kidx, J + 1] = sig2
                kidx += 1


@njit(cache=True, parallel=True)
def _mwg_halfcauchy(x, n, l0, eff_off, alpha0, tau0_sq, scale_a, step,
                    burn, kept, thin, sig2_init,
                    z, logu, zmu, zs, logus,
                    fut, eff, acc, draws, record):
    R, T, J = z.shape
    a_sq = scale_a * scale_a
    for r in prange(R):
        theta = np.zeros(J)
        loglik = np.empty(J)
        for j in range(J):
            eta = l0[j]
            loglik[j] = x[r, j] * eta - n[r, j] * _log1pexp(eta)
        mu = alpha0
        lsig = 0.5 * math.log(sig2_init)
        sig2 = sig2_init
        kidx = 0
        for t in range(T):
            for j in range(J):
                prop = theta[j] + step * z[r, t, j]
                eta = prop + l0[j]
                ll = x[r, j] * eta - n[r, j] * _log1pexp(eta)
                dprior = ((theta[j] - mu) ** 2 - (prop - mu) ** 2) / (2.0 * sig2)
                if logu[r, t, j] < ll - loglik[j] + dprior:
                    theta[j] = prop
                    loglik[j] = ll
                    if t >= burn:
                        acc[r, j] += 1
            s = 0.0
            for j in range(J):
                s += theta[j]
            prec = J / sig2 + 1.0 / tau0_sq
            mu = (s / sig2 + alpha0 / tau0_sq) / prec + zmu[r, t] / math.sqrt(prec)
            ss = 0.0
            for j in range(J):
                ss += (theta[j] - mu) ** 2
            # random walk on log(sigma); the +y term is the Jacobian of the
            # transform, and the Cauchy term is the prior on sigma itself
            y = lsig + step * zs[r, t]
            s2_prop = math.exp(2.0 * y)
            cur = -J * lsig - ss / (2.0 * sig2) - math.log1p(sig2 / a_sq) + lsig
            new = -J * y - ss / (2.0 * s2_prop) - math.log1p(s2_prop / a_sq) + y
            if logus[r, t] < new - cur:
                lsig = y
                sig2 = s2_prop
            if t >= burn and (t - burn) % thin == thin - 1:
                for j in range(J):
                    if theta[j] <= 0.0:
                        fut[r, j] += 1
                    if theta[j] >= eff_off[j]:
                        eff[r, j] += 1
                if record:
                    for j in range(J):
                        draws[r, kidx, j] = theta[j]
                    draws[r, kidx, J] = mu
                    draws[r, kidx, J + 1] = sig2
                kidx += 1


def _pregen_blocks(seeds, T: int, J: int, prior: PriorSpec):
    """Pregenerate each replicate's random draws in the canonical order.

    The order (proposal normals, acceptance uniforms, mean normals, then
    the variance-update draws) defines the per-seed stream; both the
    single-fit and batched paths consume exactly this layout.
    """
    R = len(seeds)
    z = np.empty((R, T, J))
    logu = np.empty((R, T, J))
    zmu = np.empty((R, T))
    aux1 = np.empty((R, T))
    aux2 = np.empty((R, T)) if isinstance(prior, HalfCauchy) else np.empty((0, 0))
    if isinstance(prior, ScaledInvChiSq):
        a_post = prior.a0 + J / 2.0
    for r, seed in enumerate(seeds):
        g = generator(seed)
        z[r] = g.standard_normal((T, J))
        logu[r] = np.log(g.random((T, J)))
        zmu[r] = g.standard_normal(T)
        if isinstance(prior, ScaledInvChiSq):
            aux1[r] = g.standard_gamma(a_post, T)
        else:
            aux1[r] = g.standard_normal(T)
            aux2[r] = np.log(g.random(T))
    return z, logu, zmu, aux1, aux2


def _initial_sigma_sq(prior: PriorSpec) -> float:
    if isinstance(prior, ScaledInvChiSq):
        return prior.sigma0_sq
    return prior.scale_a**2


def run_posterior_batch(x, n, l0, eff_off, prior: PriorSpec, hyper: HyperPrior,
                        seeds, control: McmcControl, record: bool = False):
    """Run one hierarchical chain per replicate over a shared arm subset.

    ``x`` and ``n`` are (R, J) integer arrays, ``l0`` the per-arm null
    logits, ``eff_off`` the per-arm logit-scale efficacy offsets, and
    ``seeds`` one stream seed per replicate. Returns futility and
    efficacy tail probabilities of shape (R, J), acceptance rates, and
    the recorded draws when ``record`` is set (shape (R, kept, J + 2),
    columns are arm effects, then common mean, then variance).
    """
    x = np.ascontiguousarray(x, dtype=np.int64)
    n = np.ascontiguousarray(n, dtype=np.int64)
    R, J = x.shape
    l0 = np.ascontiguousarray(l0, dtype=np.float64)
    eff_off = np.ascontiguousarray(eff_off, dtype=np.float64)
    T = control.total_iterations
    kept = control.kept_draws
    sig2_init = _initial_sigma_sq(prior)

    fut = np.zeros((R, J), dtype=np.int64)
    eff = np.zeros((R, J), dtype=np.int64)
    acc = np.zeros((R, J), dtype=np.int64)
    draws = np.empty((R, kept, J + 2)) if record else np.empty((1, 1, J + 2))

    for lo in range(0, R, _CHUNK_REPS):
        hi = min(lo + _CHUNK_REPS, R)
        z, logu, zmu, aux1, aux2 = _pregen_blocks(seeds[lo:hi], T, J, prior)
        d = draws[lo:hi] if record else draws
        if isinstance(prior, ScaledInvChiSq):
            _mwg_invchisq(x[lo:hi], n[lo:hi], l0, eff_off,
                          hyper.alpha0, hyper.tau0_sq, prior.b0, control.step_scale,
                          control.burn_in, kept, control.thin, sig2_init,
                          z, logu, zmu, aux1,
                          fut[lo:hi], eff[lo:hi], acc[lo:hi], d, record)
        elif isinstance(prior, HalfCauchy):
            _mwg_halfcauchy(x[lo:hi], n[lo:hi], l0, eff_off,
                            hyper.alpha0, hyper.tau0_sq, prior.scale_a, control.step_scale,
                            control.burn_in, kept, control.thin, sig2_init,
                            z, logu, zmu, aux1, aux2,
                            fut[lo:hi], eff[lo:hi], acc[lo:hi], d, record)
        else:
            raise TypeError(f"unsupported prior {prior!r}")

    fut_prob = fut / float(kept)
    eff_prob = eff / float(kept)
    accept = acc / float(T - control.burn_in)
    if not np.all(np.isfinite(fut_prob)):
        raise FloatingPointError("non-finite tail probability from sampler")
    return fut_prob, eff_prob, accept, (draws if record else None)


def bhm_sample(data: ObservedData, spec: TrialSpec, prior: PriorSpec,
               hyper: HyperPrior, control: McmcControl) -> PosteriorDraws:
    """Fit the hierarchical model to one data snapshot.

    Arms with n = 0 contribute no likelihood but still receive draws from
    the hierarchy. Identical (data, seed) give bit-identical draws.
    """
    if data.n_arms != spec.n_arms:
        raise ValueError("data must have one entry per trial arm")
    J = spec.n_arms
    l0 = np.array([math.log(a.p0 / (1.0 - a.p0)) for a in spec.arms])
    eff_off = np.array([theta_offset(a.p1, a.p0) for a in spec.arms])
    x = np.array([data.x], dtype=np.int64)
    n = np.array([data.n], dtype=np.int64)
    _, _, accept, draws = run_posterior_batch(
        x, n, l0, eff_off, prior, hyper, [control.seed], control, record=True
    )
    theta_arms = draws[0, :, :J].copy()
    theta = draws[0, :, J].copy()
    sigma2 = draws[0, :, J + 1].copy()
    p = 1.0 / (1.0 + np.exp(-(theta_arms + l0[None, :])))
    rate = accept[0]
    logger.debug("bhm_sample acceptance rates: %s", np.round(rate, 3))
    if np.any(rate < 0.1) or np.any(rate > 0.6):
        logger.info(
            "Metropolis acceptance rate outside [0.1, 0.6]: %s (step_scale=%s)",
            np.round(rate, 3), control.step_scale,
        )
    return PosteriorDraws(p=p, theta_arms=theta_arms, theta=theta,
                          sigma2=sigma2, accept_rate=rate.copy())


def posterior_futility_prob(draws: PosteriorDraws, arm: int, p0: float) -> float:
    """Monte Carlo estimate of Pr(p_arm <= p0 | data)."""
    return float(np.mean(draws.p[:, arm] <= p0))


def posterior_efficacy_prob(draws: PosteriorDraws, arm: int, p1: float) -> float:
    """Monte Carlo estimate of Pr(p_arm >= p1 | data)."""
    return float(np.mean(draws.p[:, arm] >= p1))
