"""Command-line pipeline: optimize priors, calibrate boundaries, simulate
operating characteristics, and render comparison tables.

Commands compose through files: ``optimize-prior`` writes the chosen
priors, ``calibrate`` writes the boundary parameters, and ``simulate`` /
``oc-table`` accept both via ``--priors`` and ``--policy``. Every CSV
carries the config hash, base seed, and tool version in comment lines,
so any table can be reproduced from its own metadata. Outputs are
written atomically (temp file, then rename).
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from ._rng import derive_seed
from .config import (
    OPTIMIZE_HALF_CAUCHY,
    ConfigError,
    RunConfig,
    load_config,
    load_preset,
    _parse_prior,
)
from .core import HalfCauchy, HyperPrior, PriorSpec, ScaledInvChiSq, enumerate_partitions
from .designs import DesignKind, DesignSpec, StoppingPolicy, futility_probs_batch
from .inference import bhm_sample, ObservedData
from .optimize import (
    GridPoint,
    calibrate_zeta_report,
    grid_search_prior,
    optimize_half_cauchy,
    per_partition_priors,
)
from .simulate import operating_characteristics

_HYPER_DEFAULT = HyperPrior()

logger = logging.getLogger(__name__)

THREADS_ENV = "BASKETOPT_THREADS"


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_csv(path: Path, meta: dict, fieldnames: list[str], rows: list[dict]):
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    out = [",".join(fieldnames)]
    for row in rows:
        out.append(",".join(str(row.get(k, "")) for k in fieldnames))
    _atomic_write(path, "\n".join(lines + out) + "\n")


def _prior_to_doc(prior: PriorSpec) -> dict:
    if isinstance(prior, ScaledInvChiSq):
        return {"family": "inv-chisq", "v0": prior.v0, "sigma0_sq": prior.sigma0_sq}
    return {"family": "half-cauchy", "scale": prior.scale_a}


def _design_base_seed(config: RunConfig, design_index: int) -> int:
    if config.common_random_numbers:
        return config.base_seed
    return derive_seed(config.base_seed, 7777, design_index)


def _load_priors_file(path: str) -> dict:
    with open(path) as fh:
        doc = yaml.safe_load(fh) or {}
    out = {}
    for name, entry in doc.items():
        o = {}
        if "prior" in entry:
            o["prior"] = _parse_prior(entry["prior"], f"{name}.prior")
        if "cluster_prior" in entry:
            o["cluster_prior"] = _parse_prior(entry["cluster_prior"], f"{name}.cluster_prior")
        if "per_partition_priors" in entry:
            o["per_partition_priors"] = tuple(
                _parse_prior(p, f"{name}.per_partition_priors[{i}]")
                for i, p in enumerate(entry["per_partition_priors"])
            )
        out[name] = o
    return out


def _load_policy_file(path: str) -> dict:
    with open(path) as fh:
        doc = yaml.safe_load(fh) or {}
    out = {}
    for name, entry in doc.items():
        out[name] = StoppingPolicy(
            zeta=tuple(entry["zeta"]), delta=tuple(entry["delta"]),
            superiority_cutoff=entry.get("superiority_cutoff"),
        )
    return out


def _resolved_designs(config: RunConfig, priors_file: str | None,
                      policy_file: str | None) -> list[tuple[str, DesignSpec]]:
    prior_overrides = _load_priors_file(priors_file) if priors_file else {}
    policy_overrides = _load_policy_file(policy_file) if policy_file else {}
    out = []
    for dc in config.designs:
        ov = dict(prior_overrides.get(dc.name, {}))
        if dc.name in policy_overrides:
            ov["policy"] = policy_overrides[dc.name]
        out.append((dc.name, dc.resolve(ov)))
    return out


def _trace_rows(trace: tuple[GridPoint, ...], partitions, n_arms: int):
    rows = []
    for point in trace:
        p = point.prior
        for g, part in enumerate(partitions):
            if point.rho[g] is None:
                continue
            row = {
                "v0": p.v0 if isinstance(p, ScaledInvChiSq) else "",
                "sigma0_sq": p.sigma0_sq if isinstance(p, ScaledInvChiSq) else "",
                "scale_a": p.scale_a if isinstance(p, HalfCauchy) else "",
                "partition_id": g,
                "sensitive_arms": " ".join(str(j) for j in part.sensitive_indices),
                "U_g": point.utilities[g],
                "mean_utility": point.mean_utility,
                "n_reps": point.n_reps,
            }
            for j, rho in zip(part.sensitive_indices, point.rho[g]):
                row[f"rho_{j}"] = rho
            for j, gam in zip(part.insensitive_indices, point.gamma[g]):
                row[f"gamma_{j}"] = gam
            rows.append(row)
    fields = (["v0", "sigma0_sq", "scale_a", "partition_id", "sensitive_arms"]
              + [f"rho_{j}" for j in range(n_arms)]
              + [f"gamma_{j}" for j in range(n_arms)]
              + ["U_g", "mean_utility", "n_reps"])
    return fields, rows


def cmd_optimize_prior(config: RunConfig, out: Path, meta: dict) -> list[Path]:
    """Resolve every ``optimize`` directive by grid search; write traces
    and the chosen priors."""
    partitions = enumerate_partitions(config.trial)
    chosen: dict = {}
    written = []
    for i, dc in enumerate(config.designs):
        if not dc.needs_optimization:
            continue
        seed = _design_base_seed(config, i)
        entry = {}
        if dc.prior in (OPTIMIZE_HALF_CAUCHY, "optimize") or dc.cluster_prior in (OPTIMIZE_HALF_CAUCHY, "optimize"):
            kind = dc.kind
            search = optimize_half_cauchy if dc.half_cauchy else grid_search_prior
            res = search(config.trial, config.utility, dc.policy, config.grid,
                         design_kind=kind, base_seed=seed, omega=dc.omega,
                         beta_prior=dc.beta_prior, control=config.mcmc)
            key = "cluster_prior" if kind is DesignKind.COBHM else "prior"
            entry[key] = _prior_to_doc(res.best_prior)
            fields, rows = _trace_rows(res.grid_trace, partitions, config.trial.n_arms)
            trace_path = out / f"prior_trace_{dc.name}.csv"
            _write_csv(trace_path, meta, fields, rows)
            written.append(trace_path)
            logger.info("%s: best prior %s (mean utility %.4f)",
                        dc.name, res.best_prior, res.best_mean_utility)
        if dc.per_partition_priors in ("optimize", OPTIMIZE_HALF_CAUCHY):
            priors = per_partition_priors(
                config.trial, config.utility, dc.policy, config.grid,
                base_seed=seed, half_cauchy=dc.half_cauchy, control=config.mcmc,
            )
            entry["per_partition_priors"] = [_prior_to_doc(p) for p in priors]
            logger.info("%s: per-partition priors %s", dc.name, priors)
        chosen[dc.name] = entry
    path = out / "optimized_priors.yaml"
    _atomic_write(path, yaml.safe_dump(chosen, sort_keys=True))
    written.append(path)
    return written


def cmd_calibrate(config: RunConfig, out: Path, meta: dict,
                  priors_file: str | None) -> list[Path]:
    """Recalibrate every design's zeta to the target global-null rate."""
    doc = {}
    for i, (name, design) in enumerate(_resolved_designs(config, priors_file, None)):
        policy, report = calibrate_zeta_report(
            config.trial, design, config.target_alpha, config.n_reps,
            _design_base_seed(config, i), control=config.mcmc,
        )
        doc[name] = {
            "zeta": [float(z) for z in policy.zeta],
            "delta": [float(d) for d in policy.delta],
            "superiority_cutoff": policy.superiority_cutoff,
            "claim_prob": [float(c) for c in report.claim_prob],
            "target": report.target,
            "n_reps": report.n_reps,
            "bisection_steps": report.steps,
            "at_boundary": list(report.at_boundary),
        }
        logger.info("%s calibrated: zeta=%s claims=%s", name,
                    np.round(policy.zeta, 4), np.round(report.claim_prob, 4))
    path = out / "calibrated_policy.yaml"
    _atomic_write(path, yaml.safe_dump(doc, sort_keys=True))
    return [path]


class _ChainDumper:
    """Wraps the batched posterior call and additionally records the
    replicate-0 chain of a plain hierarchical design at each look."""

    def __init__(self, design, spec, control, out: Path, tag: str):
        self.design = design
        self.spec = spec
        self.control = control
        self.out = out
        self.tag = tag
        self.paths: list[Path] = []

    def __call__(self, look, x, n, seeds):
        fut, eff = futility_probs_batch(self.design, self.spec, x, n, seeds,
                                        self.control, _HYPER_DEFAULT)
        mask = (1 << self.spec.n_arms) - 1
        ctrl = self.control.with_seed(derive_seed(int(seeds[0]), mask))
        draws = bhm_sample(ObservedData(n=tuple(int(v) for v in n[0]),
                                        x=tuple(int(v) for v in x[0])),
                           self.spec, self.design.prior, _HYPER_DEFAULT, ctrl)
        path = self.out / f"chains_{self.tag}_look{look}.csv"
        J = self.spec.n_arms
        fields = ["iteration"] + [f"theta_{j + 1}" for j in range(J)] + ["theta", "sigma2"]
        rows = []
        for it in range(draws.n_draws):
            row = {"iteration": it + 1, "theta": draws.theta[it], "sigma2": draws.sigma2[it]}
            for j in range(J):
                row[f"theta_{j + 1}"] = draws.theta_arms[it, j]
            rows.append(row)
        _write_csv(path, {}, fields, rows)
        self.paths.append(path)
        return fut, eff


def _simulate_all(config: RunConfig, out: Path, meta: dict, priors_file,
                  policy_file, dump_chains: bool):
    """Per-(scenario, design) operating characteristics, written as CSV."""
    designs = _resolved_designs(config, priors_file, policy_file)
    results = {}
    written = []
    fields = ["scenario", "design", "arm", "claim_prob", "mc_se", "mean_n",
              "early_stop_prob", "n_reps", "seed"]
    for s_name, truth in config.scenarios:
        for i, (d_name, design) in enumerate(designs):
            seed = _design_base_seed(config, i)
            provider = None
            if dump_chains and design.kind in (DesignKind.VAGUE_BHM, DesignKind.OBHM):
                provider = _ChainDumper(design, config.trial, config.mcmc, out,
                                        f"{s_name}_{d_name}")
            oc = operating_characteristics(truth, config.trial, design,
                                           config.n_reps, seed, control=config.mcmc,
                                           probs_provider=provider)
            if provider is not None:
                written.extend(provider.paths)
            results[(s_name, d_name)] = oc
            rows = [
                {
                    "scenario": s_name, "design": d_name, "arm": j + 1,
                    "claim_prob": float(oc.claim_prob[j]), "mc_se": float(oc.mc_se[j]),
                    "mean_n": float(oc.mean_n[j]),
                    "early_stop_prob": float(oc.early_stop_prob[j]),
                    "n_reps": oc.n_reps, "seed": seed,
                }
                for j in range(config.trial.n_arms)
            ]
            path = out / f"oc_{s_name}_{d_name}.csv"
            _write_csv(path, meta, fields, rows)
            written.append(path)
            logger.info("scenario %s, %s: claim%%=%s", s_name, d_name,
                        np.round(oc.claim_prob * 100, 2))
    return results, written


def render_table(config: RunConfig, results: dict) -> str:
    """Text table: one block per scenario, one row per design, one column
    per arm; sensitive arms (truth at target or above) are starred."""
    J = config.trial.n_arms
    names = [dc.name for dc in config.designs]
    width = max(len(n) for n in names) + 2
    lines = ["Probability (%) of claiming treatment effective", ""]
    header = " " * width + "".join(f"{('arm ' + str(j + 1)):>9}" for j in range(J))
    for s_name, truth in config.scenarios:
        flags = ["*" if truth.true_p[j] >= config.trial.arms[j].p1 else "" for j in range(J)]
        truth_str = "  ".join(f"{truth.true_p[j]:.2f}{flags[j]}" for j in range(J))
        lines.append(f"Scenario {s_name}  (true p: {truth_str}; * = sensitive)")
        lines.append(header)
        for d_name in names:
            oc = results.get((s_name, d_name))
            if oc is None:
                continue
            cells = "".join(f"{100 * oc.claim_prob[j]:9.2f}" for j in range(J))
            lines.append(f"{d_name:<{width}}{cells}")
        lines.append("")
    return "\n".join(lines)


def run_pipeline(config: RunConfig, command: str, *, out_dir: str | None = None,
                 priors_file: str | None = None, policy_file: str | None = None,
                 dump_chains: bool = False) -> int:
    """Execute one pipeline command; returns a process exit status."""
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "config_hash": config.config_hash(),
        "base_seed": config.base_seed,
        "version": __version__,
    }
    if command == "optimize-prior":
        cmd_optimize_prior(config, out, meta)
    elif command == "calibrate":
        cmd_calibrate(config, out, meta, priors_file)
    elif command == "simulate":
        _simulate_all(config, out, meta, priors_file, policy_file, dump_chains)
    elif command == "oc-table":
        results, _ = _simulate_all(config, out, meta, priors_file, policy_file, dump_chains)
        text = render_table(config, results)
        _atomic_write(out / "oc_table.txt", text)
        print(text)
    else:
        raise ValueError(f"unknown command {command!r}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="basketopt",
        description="Design, calibrate, and simulate Bayesian hierarchical basket trials.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "optimize-prior": "grid-search the utility-maximizing shrinkage priors",
        "calibrate": "recalibrate stopping boundaries to the target type I error",
        "simulate": "write operating-characteristic CSVs per scenario and design",
        "oc-table": "simulate and render the scenario-by-design claim table",
    }
    for cmd, h in helps.items():
        p = sub.add_parser(cmd, help=h)
        p.add_argument("--config", help="path to a YAML run configuration")
        p.add_argument("--preset", help="embedded configuration name (e.g. paper-4arm)")
        p.add_argument("--seed", type=int, help="override the base seed")
        p.add_argument("--reps", type=int, help="override the replicate count")
        p.add_argument("--threads", type=int,
                       help=f"worker thread cap (default from ${THREADS_ENV})")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--priors", help="optimized_priors.yaml from optimize-prior")
        p.add_argument("--policy", help="calibrated_policy.yaml from calibrate")
        p.add_argument("--dump-chains", action="store_true",
                       help="write replicate-0 sampler chains per look (bhm/obhm designs)")
    return parser


def _apply_threads(threads: int | None):
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else None
    if threads is not None:
        import numba

        numba.set_num_threads(max(1, threads))


def _load_with_overrides(args) -> RunConfig:
    """Build the run config with CLI overrides folded into the document,
    so the reported config hash reflects what actually ran."""
    import yaml as _yaml

    from .config import PRESETS, build_config

    if bool(args.config) == bool(args.preset):
        raise ConfigError("", "exactly one of --config or --preset is required")
    if args.config:
        load_config(args.config)  # full validation with file diagnostics first
        with open(args.config) as fh:
            doc = _yaml.safe_load(fh)
    else:
        if args.preset not in PRESETS:
            raise ConfigError("preset", f"unknown preset {args.preset!r}")
        doc = {"preset": args.preset}
    if args.reps is not None:
        if args.reps < 1:
            raise ConfigError("n_reps", "must be at least 1")
        doc["n_reps"] = args.reps
    if args.seed is not None:
        doc["base_seed"] = args.seed
    return build_config(doc)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        config = _load_with_overrides(args)
        _apply_threads(args.threads)
        return run_pipeline(
            config, args.command, out_dir=args.out,
            priors_file=args.priors, policy_file=args.policy,
            dump_chains=args.dump_chains,
        )
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # pragma: no cover - defensive
        logger.exception("pipeline failed")
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
