import textwrap
from pathlib import Path

import pytest
import yaml

from basketopt.cli import main

CFG = """
trial:
  arms:
    - {p0: 0.05, p1: 0.20, max_n: 20, interims: [10, 20]}
    - {p0: 0.05, p1: 0.20, max_n: 20, interims: [10, 20]}
    - {p0: 0.15, p1: 0.30, max_n: 20, interims: [10, 20]}
designs:
  - {name: independent, kind: independent, zeta: [0.75, 0.75, 0.75], delta: [0, 0, 0]}
  - name: obhm
    kind: obhm
    prior: {family: inverse-gamma, a0: 2, b0: 8}
    zeta: [0.715, 0.715, 0.70]
    delta: [0.32, 0.32, 0]
utility:
  tradeoff: {type: two-region, lambda1: 1, lambda2: 2, eta: 0.2}
scenarios:
  - {name: s-null, true_p: [0.05, 0.05, 0.15]}
  - {name: s-alt, true_p: [0.20, 0.20, 0.30]}
mcmc: {burn_in: 150, kept_draws: 500, min_kept: 1}
grid: {v0_count: 2, sigma0_count: 2, reps_per_point: 30, refine_reps: 30, refine_top: 0}
n_reps: 40
base_seed: 5
"""


@pytest.fixture()
def cfg_path(tmp_path):
    p = tmp_path / "run.yaml"
    p.write_text(textwrap.dedent(CFG) + f"output_dir: {tmp_path / 'out'}\n")
    return p


class TestSimulateCommand:
    def test_writes_csvs_with_metadata(self, cfg_path, tmp_path):
        assert main(["simulate", "--config", str(cfg_path)]) == 0
        out = tmp_path / "out"
        files = sorted(p.name for p in out.glob("oc_*.csv"))
        assert files == [
            "oc_s-alt_independent.csv", "oc_s-alt_obhm.csv",
            "oc_s-null_independent.csv", "oc_s-null_obhm.csv",
        ]
        text = (out / "oc_s-alt_obhm.csv").read_text()
        assert text.startswith("# config_hash: ")
        assert "# base_seed: 5" in text
        assert "# version:" in text
        header = [l for l in text.splitlines() if not l.startswith("#")][0]
        assert header == "scenario,design,arm,claim_prob,mc_se,mean_n,early_stop_prob,n_reps,seed"

    def test_reruns_are_byte_identical(self, cfg_path, tmp_path):
        main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "a")])
        main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "b")])
        for name in ("oc_s-alt_obhm.csv", "oc_s-null_independent.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_zero_reps_rejected(self, cfg_path, capsys):
        assert main(["simulate", "--config", str(cfg_path), "--reps", "0"]) == 2
        assert "n_reps" in capsys.readouterr().err

    def test_dump_chains(self, cfg_path, tmp_path):
        out = tmp_path / "chains"
        assert main(["simulate", "--config", str(cfg_path), "--out", str(out),
                     "--dump-chains"]) == 0
        dumps = sorted(p.name for p in out.glob("chains_*.csv"))
        assert "chains_s-alt_obhm_look1.csv" in dumps
        assert "chains_s-alt_obhm_look2.csv" in dumps
        lines = (out / "chains_s-alt_obhm_look1.csv").read_text().splitlines()
        assert lines[0] == "iteration,theta_1,theta_2,theta_3,theta,sigma2"
        assert len(lines) == 1 + 500


class TestPipelineComposition:
    def test_optimize_calibrate_simulate(self, tmp_path):
        cfg = tmp_path / "run.yaml"
        cfg.write_text(textwrap.dedent(CFG).replace(
            "prior: {family: inverse-gamma, a0: 2, b0: 8}", "prior: optimize",
        ) + f"output_dir: {tmp_path / 'out'}\n")
        out = tmp_path / "out"
        assert main(["optimize-prior", "--config", str(cfg)]) == 0
        priors = out / "optimized_priors.yaml"
        doc = yaml.safe_load(priors.read_text())
        assert "obhm" in doc and doc["obhm"]["prior"]["family"] == "inv-chisq"
        assert (out / "prior_trace_obhm.csv").exists()
        trace = (out / "prior_trace_obhm.csv").read_text().splitlines()
        hdr = [l for l in trace if not l.startswith("#")][0]
        assert hdr.startswith("v0,sigma0_sq,scale_a,partition_id,sensitive_arms,rho_0")

        # simulate without resolving the directive must fail loudly
        assert main(["simulate", "--config", str(cfg)]) == 2

        assert main(["calibrate", "--config", str(cfg), "--priors", str(priors)]) == 0
        policy = out / "calibrated_policy.yaml"
        pdoc = yaml.safe_load(policy.read_text())
        assert set(pdoc) == {"independent", "obhm"}
        assert len(pdoc["obhm"]["zeta"]) == 3
        assert pdoc["obhm"]["target"] == 0.1

        assert main(["simulate", "--config", str(cfg), "--priors", str(priors),
                     "--policy", str(policy)]) == 0
        assert (out / "oc_s-null_obhm.csv").exists()

    def test_oc_table_renders(self, cfg_path, tmp_path, capsys):
        assert main(["oc-table", "--config", str(cfg_path)]) == 0
        txt = (tmp_path / "out" / "oc_table.txt").read_text()
        assert "Scenario s-null" in txt
        assert "Scenario s-alt" in txt
        assert "0.20*" in txt  # sensitive arms flagged
        assert "independent" in txt and "obhm" in txt
        shown = capsys.readouterr().out
        assert "Probability (%) of claiming treatment effective" in shown


class TestArgumentHandling:
    def test_requires_config_or_preset(self, capsys):
        assert main(["simulate"]) == 2
        assert "--config or --preset" in capsys.readouterr().err

    def test_rejects_both(self, cfg_path, capsys):
        assert main(["simulate", "--config", str(cfg_path), "--preset", "paper-4arm"]) == 2

    def test_empty_config_file(self, tmp_path, capsys):
        p = tmp_path / "empty.yaml"
        p.write_text("")
        assert main(["simulate", "--config", str(p)]) == 2
        err = capsys.readouterr().err
        assert "trial" in err and "designs" in err

    def test_unknown_preset(self, capsys):
        assert main(["simulate", "--preset", "nope"]) == 2

    def test_seed_override_changes_hash(self, cfg_path, tmp_path):
        main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "h1")])
        main(["simulate", "--config", str(cfg_path), "--seed", "99",
              "--out", str(tmp_path / "h2")])
        a = (tmp_path / "h1" / "oc_s-null_obhm.csv").read_text().splitlines()[0]
        b = (tmp_path / "h2" / "oc_s-null_obhm.csv").read_text().splitlines()[0]
        assert a != b
