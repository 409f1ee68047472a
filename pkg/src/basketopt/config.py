"""Run configuration: YAML schema, embedded presets, strict validation.

A run document names the trial, the designs to compare (possibly with
``optimize`` directives where the optimizer supplies the prior), the
tradeoff utility, the simulation scenarios, and the sampler/grid knobs.
Unknown keys are rejected, and every diagnostic carries the field path
it refers to. Partition weights address partitions by their sensitive
arm index sets, never by position.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Optional

import yaml

from .core import (
    ArmSpec,
    CostBenefit,
    HalfCauchy,
    PriorSpec,
    ScaledInvChiSq,
    ThreeRegion,
    TrialSpec,
    TwoRegion,
    UtilitySpec,
    enumerate_partitions,
    uniform_weights,
)
from .designs import DecisionMode, DesignKind, DesignSpec, StoppingPolicy
from .inference import McmcControl
from .optimize import GridSpec
from .simulate import ScenarioTruth

__all__ = ["ConfigError", "DesignConfig", "RunConfig", "load_config", "load_preset", "PRESETS"]

OPTIMIZE = "optimize"
OPTIMIZE_HALF_CAUCHY = "optimize-half-cauchy"
_DIRECTIVES = (OPTIMIZE, OPTIMIZE_HALF_CAUCHY)


class ConfigError(ValueError):
    """Schema or content violation, annotated with its field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


def _expect_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected a mapping, got {type(value).__name__}")
    return value


def _expect_list(value, path: str) -> list:
    if not isinstance(value, list):
        raise ConfigError(path, f"expected a list, got {type(value).__name__}")
    return value


def _check_keys(d: dict, path: str, allowed: set[str], required: set[str] = frozenset()):
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(path, f"unknown keys {sorted(unknown)}; allowed keys are {sorted(allowed)}")
    missing = required - set(d)
    if missing:
        raise ConfigError(path, f"missing required keys {sorted(missing)}")


def _number(d: dict, key: str, path: str, default=None, required=False):
    if key not in d:
        if required:
            raise ConfigError(path, f"missing required key '{key}'")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    return v


def _integer(d: dict, key: str, path: str, default=None, required=False):
    v = _number(d, key, path, default=default, required=required)
    if v is None:
        return None
    if int(v) != v:
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
    return int(v)


def _parse_prior(value, path: str):
    """A prior mapping, or an ``optimize`` / ``optimize-half-cauchy`` directive."""
    if value in _DIRECTIVES:
        return value
    d = _expect_mapping(value, path)
    family = d.get("family")
    if family == "inv-chisq":
        _check_keys(d, path, {"family", "v0", "sigma0_sq"}, {"v0", "sigma0_sq"})
        try:
            return ScaledInvChiSq(v0=_number(d, "v0", path, required=True),
                                  sigma0_sq=_number(d, "sigma0_sq", path, required=True))
        except ValueError as e:
            raise ConfigError(path, str(e)) from e
    if family == "inverse-gamma":
        _check_keys(d, path, {"family", "a0", "b0"}, {"a0", "b0"})
        try:
            return ScaledInvChiSq.from_inverse_gamma(_number(d, "a0", path, required=True),
                                                     _number(d, "b0", path, required=True))
        except ValueError as e:
            raise ConfigError(path, str(e)) from e
    if family == "half-cauchy":
        _check_keys(d, path, {"family", "scale"}, {"scale"})
        try:
            return HalfCauchy(scale_a=_number(d, "scale", path, required=True))
        except ValueError as e:
            raise ConfigError(path, str(e)) from e
    raise ConfigError(
        f"{path}.family",
        f"expected one of 'inv-chisq', 'inverse-gamma', 'half-cauchy', got {family!r}",
    )


@dataclass
class DesignConfig:
    """A design entry as configured; priors may still be directives."""

    name: str
    kind: DesignKind
    policy: StoppingPolicy
    prior: Any = None
    cluster_prior: Any = None
    omega: float = 2.0
    per_partition_priors: Any = None
    model_prior: Optional[tuple[float, ...]] = None
    beta_prior: tuple[float, float] = (0.1, 0.1)
    decision_mode: DecisionMode = DecisionMode.MODEL_AVERAGE
    half_cauchy: bool = False

    @property
    def needs_optimization(self) -> bool:
        return any(v in _DIRECTIVES
                   for v in (self.prior, self.cluster_prior, self.per_partition_priors))

    def resolve(self, overrides: dict | None = None) -> DesignSpec:
        """Concrete DesignSpec, applying optimizer outputs where given."""
        overrides = overrides or {}
        prior = overrides.get("prior", self.prior)
        cluster_prior = overrides.get("cluster_prior", self.cluster_prior)
        ppp = overrides.get("per_partition_priors", self.per_partition_priors)
        policy = overrides.get("policy", self.policy)
        for label, v in (("prior", prior), ("cluster_prior", cluster_prior),
                         ("per_partition_priors", ppp)):
            if v in _DIRECTIVES:
                raise ConfigError(
                    f"designs.{self.name}.{label}",
                    "still set to 'optimize'; run the optimize-prior command first "
                    "and pass its output via --priors",
                )
        return DesignSpec(
            kind=self.kind, policy=policy, prior=prior, cluster_prior=cluster_prior,
            omega=self.omega,
            per_partition_priors=tuple(ppp) if ppp else None,
            model_prior=self.model_prior, beta_prior=self.beta_prior,
            decision_mode=self.decision_mode,
        )


@dataclass
class RunConfig:
    """Everything a pipeline command needs, fully validated."""

    trial: TrialSpec
    designs: list[DesignConfig]
    utility: UtilitySpec
    scenarios: list[tuple[str, ScenarioTruth]]
    mcmc: McmcControl
    grid: GridSpec
    n_reps: int
    base_seed: int
    output_dir: str
    target_alpha: float
    common_random_numbers: bool
    raw: dict = field(repr=False, default_factory=dict)

    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _parse_trial(doc, path: str) -> TrialSpec:
    d = _expect_mapping(doc, path)
    _check_keys(d, path, {"arms"}, {"arms"})
    arms = []
    for i, a in enumerate(_expect_list(d["arms"], f"{path}.arms")):
        apath = f"{path}.arms[{i}]"
        am = _expect_mapping(a, apath)
        _check_keys(am, apath, {"p0", "p1", "max_n", "interims"}, {"p0", "p1", "max_n", "interims"})
        interims = _expect_list(am["interims"], f"{apath}.interims")
        try:
            arms.append(ArmSpec(
                p0=_number(am, "p0", apath, required=True),
                p1=_number(am, "p1", apath, required=True),
                max_n=_integer(am, "max_n", apath, required=True),
                interim_ns=tuple(interims),
            ))
        except ValueError as e:
            raise ConfigError(apath, str(e)) from e
    try:
        return TrialSpec(arms=tuple(arms))
    except ValueError as e:
        raise ConfigError(path, str(e)) from e


def _parse_weights(value, trial: TrialSpec, path: str) -> tuple[float, ...]:
    partitions = enumerate_partitions(trial)
    if value == "uniform" or value is None:
        return uniform_weights(len(partitions))
    d = _expect_mapping(value, path)
    index = {}
    for g, part in enumerate(partitions):
        index[part.sensitive] = g
    weights = [None] * len(partitions)
    for key, w in d.items():
        kpath = f"{path}[{key!r}]"
        if isinstance(w, bool) or not isinstance(w, (int, float)):
            raise ConfigError(kpath, f"expected a number, got {w!r}")
        try:
            sens_set = set() if str(key).strip() == "" else {int(t) for t in str(key).split(",")}
        except ValueError:
            raise ConfigError(kpath, "keys are comma-separated arm indices, e.g. '0,2' or ''")
        if any(j < 0 or j >= trial.n_arms for j in sens_set):
            raise ConfigError(kpath, f"arm index out of range 0..{trial.n_arms - 1}")
        flags = tuple(j in sens_set for j in range(trial.n_arms))
        canon = _canonical_flags(flags, trial)
        if canon not in index:
            raise ConfigError(kpath, "does not identify a partition of this trial")
        g = index[canon]
        if weights[g] is not None:
            raise ConfigError(kpath, "names the same partition as an earlier key")
        weights[g] = float(w)
    for g, w in enumerate(weights):
        if w is None:
            raise ConfigError(path, f"no weight given for partition {partitions[g].sensitive_indices}")
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ConfigError(path, f"weights must sum to 1, got {sum(weights)}")
    return tuple(weights)


def _canonical_flags(flags: tuple[bool, ...], trial: TrialSpec) -> tuple[bool, ...]:
    """Canonical representative of the equivalence class of ``flags``."""
    groups: dict[tuple[float, float], list[int]] = {}
    for j, arm in enumerate(trial.arms):
        groups.setdefault(arm.rate_pair, []).append(j)
    out = [False] * len(flags)
    for members in groups.values():
        c = sum(flags[j] for j in members)
        for j in members[len(members) - c:] if c else []:
            out[j] = True
    return tuple(out)


def _parse_utility(doc, trial: TrialSpec, path: str) -> UtilitySpec:
    d = _expect_mapping(doc, path)
    _check_keys(d, path, {"tradeoff", "weights"}, {"tradeoff"})
    t = _expect_mapping(d["tradeoff"], f"{path}.tradeoff")
    tpath = f"{path}.tradeoff"
    ttype = t.get("type")
    try:
        if ttype == "two-region":
            _check_keys(t, tpath, {"type", "lambda1", "lambda2", "eta"}, {"lambda1", "lambda2", "eta"})
            trade = TwoRegion(lambda1=_number(t, "lambda1", tpath, required=True),
                              lambda2=_number(t, "lambda2", tpath, required=True),
                              eta=_number(t, "eta", tpath, required=True))
        elif ttype == "three-region":
            _check_keys(t, tpath, {"type", "lambda1", "lambda2", "lambda3", "eta1", "eta2"},
                        {"lambda1", "lambda2", "lambda3", "eta1", "eta2"})
            trade = ThreeRegion(lambda1=_number(t, "lambda1", tpath, required=True),
                                lambda2=_number(t, "lambda2", tpath, required=True),
                                lambda3=_number(t, "lambda3", tpath, required=True),
                                eta1=_number(t, "eta1", tpath, required=True),
                                eta2=_number(t, "eta2", tpath, required=True))
        elif ttype == "cost-benefit":
            _check_keys(t, tpath, {"type", "gains", "f1", "f2", "eta"}, {"gains", "f1", "f2", "eta"})
            gains = _expect_list(t["gains"], f"{tpath}.gains")
            if len(gains) != trial.n_arms:
                raise ConfigError(f"{tpath}.gains", f"expected {trial.n_arms} per-arm gains")
            trade = CostBenefit(gains=tuple(gains), f1=_number(t, "f1", tpath, required=True),
                                f2=_number(t, "f2", tpath, required=True),
                                eta=_number(t, "eta", tpath, required=True))
        else:
            raise ConfigError(f"{tpath}.type",
                              f"expected 'two-region', 'three-region' or 'cost-benefit', got {ttype!r}")
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(tpath, str(e)) from e
    weights = _parse_weights(d.get("weights"), trial, f"{path}.weights")
    return UtilitySpec(tradeoff=trade, weights=weights)


_DESIGN_KEYS = {
    "name", "kind", "zeta", "delta", "superiority_cutoff", "prior", "cluster_prior",
    "omega", "per_partition_priors", "model_prior", "beta_prior", "decision_mode",
}


def _parse_design(doc, trial: TrialSpec, path: str) -> DesignConfig:
    d = _expect_mapping(doc, path)
    _check_keys(d, path, _DESIGN_KEYS, {"kind", "zeta", "delta"})
    try:
        kind = DesignKind(d["kind"])
    except ValueError:
        raise ConfigError(f"{path}.kind",
                          f"expected one of {[k.value for k in DesignKind]}, got {d['kind']!r}")
    name = d.get("name", kind.value)
    J = trial.n_arms
    zeta = _expect_list(d["zeta"], f"{path}.zeta")
    delta = _expect_list(d["delta"], f"{path}.delta")
    if len(zeta) != J or len(delta) != J:
        raise ConfigError(path, f"zeta and delta need one entry per arm (J={J})")
    try:
        policy = StoppingPolicy(zeta=tuple(zeta), delta=tuple(delta),
                                superiority_cutoff=d.get("superiority_cutoff"))
    except ValueError as e:
        raise ConfigError(path, str(e)) from e

    prior = _parse_prior(d["prior"], f"{path}.prior") if "prior" in d else None
    cluster_prior = _parse_prior(d["cluster_prior"], f"{path}.cluster_prior") if "cluster_prior" in d else None
    ppp = None
    if "per_partition_priors" in d:
        v = d["per_partition_priors"]
        if v in _DIRECTIVES:
            ppp = v
        else:
            items = _expect_list(v, f"{path}.per_partition_priors")
            G = len(enumerate_partitions(trial))
            if len(items) != G:
                raise ConfigError(f"{path}.per_partition_priors",
                                  f"expected {G} priors (one per partition), got {len(items)}")
            ppp = tuple(_parse_prior(it, f"{path}.per_partition_priors[{i}]")
                        for i, it in enumerate(items))
    model_prior = None
    if kind is DesignKind.AOBHM:
        G = len(enumerate_partitions(trial))
        mp = d.get("model_prior", "uniform")
        if mp == "uniform":
            model_prior = uniform_weights(G)
        else:
            items = _expect_list(mp, f"{path}.model_prior")
            if len(items) != G:
                raise ConfigError(f"{path}.model_prior", f"expected {G} probabilities")
            model_prior = tuple(float(v) for v in items)
        if ppp is None:
            ppp = OPTIMIZE

    beta_prior = (0.1, 0.1)
    if "beta_prior" in d:
        bp = _expect_list(d["beta_prior"], f"{path}.beta_prior")
        if len(bp) != 2:
            raise ConfigError(f"{path}.beta_prior", "expected [a1, b1]")
        beta_prior = (float(bp[0]), float(bp[1]))
    mode = DecisionMode(d.get("decision_mode", "model_average"))

    half_cauchy = any(
        isinstance(v, HalfCauchy) or v == OPTIMIZE_HALF_CAUCHY
        for v in (prior, cluster_prior, ppp)
    )
    cfg = DesignConfig(name=str(name), kind=kind, policy=policy, prior=prior,
                       cluster_prior=cluster_prior, omega=float(d.get("omega", 2.0)),
                       per_partition_priors=ppp, model_prior=model_prior,
                       beta_prior=beta_prior, decision_mode=mode, half_cauchy=half_cauchy)
    # a fully concrete entry must build a valid DesignSpec right away
    if not cfg.needs_optimization:
        try:
            cfg.resolve()
        except ValueError as e:
            raise ConfigError(path, str(e)) from e
    return cfg


def _parse_scenarios(doc, trial: TrialSpec, path: str):
    out = []
    for i, s in enumerate(_expect_list(doc, path)):
        spath = f"{path}[{i}]"
        d = _expect_mapping(s, spath)
        _check_keys(d, spath, {"name", "true_p"}, {"true_p"})
        true_p = _expect_list(d["true_p"], f"{spath}.true_p")
        if len(true_p) != trial.n_arms:
            raise ConfigError(f"{spath}.true_p",
                              f"expected {trial.n_arms} rates, got {len(true_p)}")
        try:
            truth = ScenarioTruth(true_p=tuple(true_p))
        except ValueError as e:
            raise ConfigError(f"{spath}.true_p", str(e)) from e
        out.append((str(d.get("name", i + 1)), truth))
    if not out:
        raise ConfigError(path, "at least one scenario is required")
    return out


def _parse_mcmc(doc, path: str) -> McmcControl:
    if doc is None:
        return McmcControl()
    d = _expect_mapping(doc, path)
    _check_keys(d, path, {"burn_in", "kept_draws", "thin", "step_scale", "min_kept"})
    try:
        return McmcControl(
            burn_in=_integer(d, "burn_in", path, default=2000),
            kept_draws=_integer(d, "kept_draws", path, default=10000),
            thin=_integer(d, "thin", path, default=1),
            step_scale=_number(d, "step_scale", path, default=0.8),
            min_kept=_integer(d, "min_kept", path, default=1000),
        )
    except ValueError as e:
        raise ConfigError(path, str(e)) from e


def _parse_grid(doc, path: str) -> GridSpec:
    if doc is None:
        return GridSpec()
    d = _expect_mapping(doc, path)
    allowed = {"v0_count", "sigma0_count", "reps_per_point", "v0_min", "v0_max",
               "sigma0_sq_max", "half_cauchy_count", "half_cauchy_a_max",
               "refine_reps", "refine_top"}
    _check_keys(d, path, allowed)
    kwargs = {}
    for k in allowed:
        if k in d:
            v = _number(d, k, path, required=True)
            kwargs[k] = v
    for k in ("v0_count", "sigma0_count", "reps_per_point", "half_cauchy_count",
              "refine_reps", "refine_top"):
        if k in kwargs:
            kwargs[k] = int(kwargs[k])
    try:
        return GridSpec(**kwargs)
    except ValueError as e:
        raise ConfigError(path, str(e)) from e


_TOP_KEYS = {
    "preset", "trial", "designs", "utility", "scenarios", "mcmc", "grid",
    "n_reps", "base_seed", "output_dir", "target_alpha", "common_random_numbers",
}


def build_config(doc: dict, source: str = "<config>") -> RunConfig:
    d = _expect_mapping(doc, "")
    if "preset" in d:
        name = d["preset"]
        if name not in PRESETS:
            raise ConfigError("preset", f"unknown preset {name!r}; available: {sorted(PRESETS)}")
        merged = copy.deepcopy(PRESETS[name])
        for k, v in d.items():
            if k != "preset":
                merged[k] = v
        d = merged
    _check_keys(d, "", _TOP_KEYS, {"trial", "designs", "utility", "scenarios"})
    trial = _parse_trial(d["trial"], "trial")
    designs = []
    for i, entry in enumerate(_expect_list(d["designs"], "designs")):
        designs.append(_parse_design(entry, trial, f"designs[{i}]"))
    names = [dc.name for dc in designs]
    if len(set(names)) != len(names):
        raise ConfigError("designs", f"design names must be unique, got {names}")
    cfg = RunConfig(
        trial=trial,
        designs=designs,
        utility=_parse_utility(d["utility"], trial, "utility"),
        scenarios=_parse_scenarios(d["scenarios"], trial, "scenarios"),
        mcmc=_parse_mcmc(d.get("mcmc"), "mcmc"),
        grid=_parse_grid(d.get("grid"), "grid"),
        n_reps=_integer(d, "n_reps", "", default=5000),
        base_seed=_integer(d, "base_seed", "", default=20240601),
        output_dir=str(d.get("output_dir", "out")),
        target_alpha=_number(d, "target_alpha", "", default=0.10),
        common_random_numbers=bool(d.get("common_random_numbers", True)),
        raw=d,
    )
    if cfg.n_reps < 1:
        raise ConfigError("n_reps", "must be at least 1")
    if not 0.0 < cfg.target_alpha < 1.0:
        raise ConfigError("target_alpha", "must lie in (0, 1)")
    return cfg


def load_config(path: str) -> RunConfig:
    """Parse and validate a YAML run document."""
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError("", f"config file not found: {path}")
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError("", f"YAML parse failure{where}: {e}")
    if doc is None:
        raise ConfigError("", f"empty config; required keys are {sorted({'trial', 'designs', 'utility', 'scenarios'})}")
    return build_config(doc, source=path)


def load_preset(name: str) -> RunConfig:
    """One of the embedded benchmark configurations."""
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return build_config({"preset": name})


def _paper_4arm() -> dict:
    arms = [
        {"p0": 0.05, "p1": 0.20, "max_n": 20, "interims": [10, 20]},
        {"p0": 0.05, "p1": 0.20, "max_n": 20, "interims": [10, 20]},
        {"p0": 0.05, "p1": 0.20, "max_n": 20, "interims": [10, 20]},
        {"p0": 0.15, "p1": 0.30, "max_n": 20, "interims": [10, 20]},
    ]
    d3, d0 = [0.32, 0.32, 0.32, 0.0], [0.0, 0.0, 0.0, 0.0]
    return {
        "trial": {"arms": arms},
        "designs": [
            {"name": "independent", "kind": "independent", "zeta": [0.75] * 4, "delta": d0},
            {"name": "bhm", "kind": "bhm",
             "prior": {"family": "inverse-gamma", "a0": 0.0005, "b0": 0.000005},
             "zeta": [0.715, 0.715, 0.715, 0.70], "delta": d3},
            {"name": "obhm", "kind": "obhm",
             "prior": {"family": "inverse-gamma", "a0": 2, "b0": 8},
             "zeta": [0.715, 0.715, 0.715, 0.70], "delta": d3},
            {"name": "cobhm", "kind": "cobhm",
             "cluster_prior": {"family": "inverse-gamma", "a0": 1, "b0": 1.44},
             "omega": 2, "zeta": [0.715, 0.715, 0.715, 0.72], "delta": d3},
            {"name": "aobhm", "kind": "aobhm", "per_partition_priors": "optimize",
             "model_prior": "uniform",
             "zeta": [0.73, 0.73, 0.73, 0.70], "delta": d3},
        ],
        "utility": {"tradeoff": {"type": "two-region", "lambda1": 1, "lambda2": 2, "eta": 0.2},
                    "weights": "uniform"},
        "scenarios": [
            {"name": "1", "true_p": [0.05, 0.05, 0.05, 0.15]},
            {"name": "2", "true_p": [0.20, 0.20, 0.20, 0.30]},
            {"name": "3", "true_p": [0.20, 0.20, 0.05, 0.30]},
            {"name": "4", "true_p": [0.20, 0.20, 0.05, 0.15]},
            {"name": "5", "true_p": [0.20, 0.05, 0.05, 0.30]},
            {"name": "6", "true_p": [0.20, 0.20, 0.20, 0.15]},
            {"name": "7", "true_p": [0.05, 0.05, 0.05, 0.30]},
            {"name": "8", "true_p": [0.20, 0.05, 0.05, 0.15]},
        ],
        "mcmc": {"burn_in": 2000, "kept_draws": 10000, "thin": 1, "step_scale": 0.8},
        "grid": {"v0_count": 8, "sigma0_count": 10, "reps_per_point": 1000,
                 "refine_reps": 5000, "refine_top": 3},
        "n_reps": 5000,
        "base_seed": 20240601,
        "target_alpha": 0.10,
    }


def _paper_3arm() -> dict:
    arms = [{"p0": 0.05, "p1": 0.20, "max_n": 20, "interims": [10, 20]} for _ in range(3)]
    d3, d0 = [0.32, 0.32, 0.32], [0.0, 0.0, 0.0]
    return {
        "trial": {"arms": arms},
        "designs": [
            {"name": "independent", "kind": "independent", "zeta": [0.75] * 3, "delta": d0},
            {"name": "bhm", "kind": "bhm",
             "prior": {"family": "inverse-gamma", "a0": 0.0005, "b0": 0.000005},
             "zeta": [0.715] * 3, "delta": d3},
            {"name": "obhm", "kind": "obhm", "prior": "optimize",
             "zeta": [0.715] * 3, "delta": d3},
            {"name": "cobhm", "kind": "cobhm", "cluster_prior": "optimize",
             "omega": 2, "zeta": [0.715] * 3, "delta": d3},
            {"name": "aobhm", "kind": "aobhm", "per_partition_priors": "optimize",
             "model_prior": "uniform", "zeta": [0.73] * 3, "delta": d3},
        ],
        "utility": {"tradeoff": {"type": "two-region", "lambda1": 1, "lambda2": 2, "eta": 0.2},
                    "weights": "uniform"},
        "scenarios": [
            {"name": "1", "true_p": [0.05, 0.05, 0.05]},
            {"name": "2", "true_p": [0.20, 0.20, 0.20]},
            {"name": "3", "true_p": [0.20, 0.20, 0.05]},
            {"name": "4", "true_p": [0.20, 0.05, 0.05]},
        ],
        "mcmc": {"burn_in": 2000, "kept_draws": 10000, "thin": 1, "step_scale": 0.8},
        "grid": {"v0_count": 8, "sigma0_count": 10, "reps_per_point": 1000,
                 "refine_reps": 5000, "refine_top": 3},
        "n_reps": 5000,
        "base_seed": 20240601,
        "target_alpha": 0.10,
    }


PRESETS: dict[str, dict] = {
    "paper-4arm": _paper_4arm(),
    "paper-3arm": _paper_3arm(),
}
