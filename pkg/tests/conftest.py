import numpy as np
import pytest

from basketopt.core import ArmSpec, ScaledInvChiSq, TrialSpec, TwoRegion, UtilitySpec, uniform_weights
from basketopt.designs import DesignKind, DesignSpec, StoppingPolicy
from basketopt.inference import McmcControl


@pytest.fixture(scope="session")
def paper4() -> TrialSpec:
    arm = ArmSpec(0.05, 0.20, 20, (10, 20))
    return TrialSpec(arms=(arm, arm, arm, ArmSpec(0.15, 0.30, 20, (10, 20))))


@pytest.fixture(scope="session")
def paper3() -> TrialSpec:
    arm = ArmSpec(0.05, 0.20, 20, (10, 20))
    return TrialSpec(arms=(arm, arm, arm))


@pytest.fixture(scope="session")
def paper_policy4() -> StoppingPolicy:
    return StoppingPolicy(zeta=(0.715, 0.715, 0.715, 0.70), delta=(0.32, 0.32, 0.32, 0.0))


@pytest.fixture(scope="session")
def paper_utility4() -> UtilitySpec:
    return UtilitySpec(tradeoff=TwoRegion(lambda1=1.0, lambda2=2.0, eta=0.2),
                       weights=uniform_weights(8))


@pytest.fixture(scope="session")
def obhm4(paper_policy4) -> DesignSpec:
    return DesignSpec(kind=DesignKind.OBHM, policy=paper_policy4,
                      prior=ScaledInvChiSq.from_inverse_gamma(2.0, 8.0))


@pytest.fixture()
def fast_control() -> McmcControl:
    # short chains for structural tests that do not assert tail accuracy
    return McmcControl(burn_in=200, kept_draws=800, seed=0, min_kept=1)
