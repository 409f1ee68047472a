import numpy as np
import pytest
from scipy import special, stats

from basketopt.core import ArmSpec, HyperPrior, Partition, ScaledInvChiSq, TrialSpec
from basketopt.designs import ArmStatus, DesignKind, DesignSpec, StoppingPolicy
from basketopt.inference import McmcControl
from basketopt.simulate import (
    ScenarioTruth,
    oc_under_partition,
    operating_characteristics,
    replicate_seed,
    simulate_trial,
)

HYPER = HyperPrior()
IG28 = ScaledInvChiSq.from_inverse_gamma(2.0, 8.0)


def independent(paper4, zeta=0.70, delta=0.0):
    J = paper4.n_arms
    return DesignSpec(kind=DesignKind.INDEPENDENT,
                      policy=StoppingPolicy(zeta=(zeta,) * J, delta=(delta,) * J))


def exact_independent_claim(p_true, p0, interims, max_n, zeta, delta, a1=0.1, b1=0.1):
    """Enumeration over interim outcome pairs (two-look designs)."""
    n1, n2 = interims
    c1 = 1 - zeta * (n1 / max_n) ** delta
    c2 = 1 - zeta * (n2 / max_n) ** delta
    total = 0.0
    for x1 in range(n1 + 1):
        if special.betainc(x1 + a1, n1 - x1 + b1, p0) > c1:
            continue
        for x2 in range(n2 - n1 + 1):
            if special.betainc(x1 + x2 + a1, n2 - x1 - x2 + b1, p0) > c2:
                continue
            total += stats.binom.pmf(x1, n1, p_true) * stats.binom.pmf(x2, n2 - n1, p_true)
    return total


class TestSimulateTrial:
    def test_all_responders_always_claim(self, paper4):
        truth = ScenarioTruth((0.999,) * 4)
        for r in range(5):
            decisions = simulate_trial(truth, paper4, independent(paper4), replicate_seed(7, r))
            assert all(d.status is ArmStatus.FINAL_EFFECTIVE for d in decisions)
            assert all(d.n_at_decision == 20 for d in decisions)

    def test_near_zero_rate_stops_early(self, paper4):
        truth = ScenarioTruth((1e-9,) * 4)
        oc = operating_characteristics(truth, paper4, independent(paper4), 200, 11)
        assert np.all(oc.claim_prob == 0.0)
        assert np.all(oc.early_stop_prob > 0.95)
        assert np.all(oc.mean_n < 11)

    def test_two_looks_at_ten_and_twenty(self, paper4):
        truth = ScenarioTruth((0.2, 0.2, 0.2, 0.3))
        decisions = simulate_trial(truth, paper4, independent(paper4), replicate_seed(3, 0))
        assert all(d.n_at_decision in (10, 20) for d in decisions)

    def test_bit_identical_for_same_inputs(self, paper4, fast_control):
        truth = ScenarioTruth((0.2, 0.05, 0.05, 0.15))
        design = DesignSpec(kind=DesignKind.OBHM,
                            policy=StoppingPolicy((0.715,) * 4, (0.32,) * 4), prior=IG28)
        a = simulate_trial(truth, paper4, design, 12345, fast_control)
        b = simulate_trial(truth, paper4, design, 12345, fast_control)
        assert [(d.status, d.futility_prob, d.n_at_decision) for d in a] == \
               [(d.status, d.futility_prob, d.n_at_decision) for d in b]


class TestOperatingCharacteristics:
    def test_matches_exact_enumeration(self, paper4):
        truth = ScenarioTruth((0.2, 0.2, 0.2, 0.3))
        oc = operating_characteristics(truth, paper4, independent(paper4), 3000, 5150)
        exact_a = exact_independent_claim(0.2, 0.05, (10, 20), 20, 0.70, 0.0)
        exact_4 = exact_independent_claim(0.3, 0.15, (10, 20), 20, 0.70, 0.0)
        for j in range(3):
            assert abs(oc.claim_prob[j] - exact_a) < 0.03
        assert abs(oc.claim_prob[3] - exact_4) < 0.03

    def test_replicate_aggregation_matches_single_runs(self, paper4, fast_control):
        truth = ScenarioTruth((0.2, 0.05, 0.05, 0.15))
        design = DesignSpec(kind=DesignKind.OBHM,
                            policy=StoppingPolicy((0.715,) * 4, (0.32,) * 4), prior=IG28)
        oc = operating_characteristics(truth, paper4, design, 12, 909, fast_control)
        claims = np.zeros(4)
        for r in range(12):
            decisions = simulate_trial(truth, paper4, design, replicate_seed(909, r), fast_control)
            claims += [d.status.is_claim for d in decisions]
        assert np.allclose(oc.claim_prob, claims / 12, atol=1e-15)

    def test_determinism_and_mc_se(self, paper4):
        truth = ScenarioTruth((0.2, 0.2, 0.2, 0.3))
        a = operating_characteristics(truth, paper4, independent(paper4), 400, 77)
        b = operating_characteristics(truth, paper4, independent(paper4), 400, 77)
        assert np.array_equal(a.claim_prob, b.claim_prob)
        assert np.array_equal(a.mean_n, b.mean_n)
        assert np.allclose(a.mc_se, np.sqrt(a.claim_prob * (1 - a.claim_prob) / 400))

    def test_thread_count_invariance(self, paper4, fast_control):
        import numba

        truth = ScenarioTruth((0.2, 0.05, 0.05, 0.15))
        design = DesignSpec(kind=DesignKind.OBHM,
                            policy=StoppingPolicy((0.715,) * 4, (0.32,) * 4), prior=IG28)
        saved = numba.get_num_threads()
        try:
            numba.set_num_threads(1)
            a = operating_characteristics(truth, paper4, design, 60, 31, fast_control)
            numba.set_num_threads(2)
            b = operating_characteristics(truth, paper4, design, 60, 31, fast_control)
        finally:
            numba.set_num_threads(saved)
        assert np.array_equal(a.claim_prob, b.claim_prob)
        assert np.array_equal(a.mean_n, b.mean_n)

    def test_same_truth_arm_identical_across_scenarios(self, paper4):
        # common random numbers: an independent arm's results depend only
        # on its own truth, so they coincide exactly across scenarios
        design = independent(paper4)
        a = operating_characteristics(ScenarioTruth((0.2, 0.2, 0.2, 0.3)), paper4, design, 500, 42)
        b = operating_characteristics(ScenarioTruth((0.2, 0.05, 0.05, 0.15)), paper4, design, 500, 42)
        assert a.claim_prob[0] == b.claim_prob[0]
        assert a.mean_n[0] == b.mean_n[0]

    def test_mean_n_within_bounds(self, paper4):
        truth = ScenarioTruth((0.05, 0.05, 0.05, 0.15))
        oc = operating_characteristics(truth, paper4, independent(paper4), 300, 13)
        assert np.all(oc.mean_n >= 10.0)
        assert np.all(oc.mean_n <= 20.0)

    def test_rejects_zero_reps(self, paper4):
        with pytest.raises(ValueError):
            operating_characteristics(ScenarioTruth((0.2,) * 4), paper4,
                                      independent(paper4), 0, 1)


class TestOcUnderPartition:
    def test_global_null_all_type1(self, paper4):
        part = Partition((False,) * 4)
        rho, gamma = oc_under_partition(part, paper4, independent(paper4), 200, 5)
        assert rho == ()
        assert len(gamma) == 4

    def test_global_alternative_all_power(self, paper4):
        part = Partition((True,) * 4)
        rho, gamma = oc_under_partition(part, paper4, independent(paper4), 200, 5)
        assert len(rho) == 4
        assert gamma == ()

    def test_mixed_partition_split(self, paper4):
        part = Partition((True, False, False, True))
        rho, gamma = oc_under_partition(part, paper4, independent(paper4), 200, 5)
        assert len(rho) == 2
        assert len(gamma) == 2
