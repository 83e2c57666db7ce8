import pytest

from analytics.bounded_risk import BoundedStoragePolicy
from schema.models import PlatformParams, WorkloadSpec

# 10^5 Komponenten, je 100 Jahre MTBF
MU_E_RISK = 31536.0
# 10^5 Komponenten, je 10 Jahre MTBF
MU_E_PATTERN = 3153.6


def make_params(c=600.0, r=600.0, d=0.0, mu_e=MU_E_RISK, mu_d=None, v=None) -> PlatformParams:
    return PlatformParams(
        checkpoint_cost=c,
        recovery_cost=r,
        downtime=d,
        verification_cost=v,
        error_rate=1.0 / mu_e,
        detection_rate=None if mu_d is None else 1.0 / mu_d,
    )


@pytest.fixture
def scenario_a() -> PlatformParams:
    """C = R = 600 s, mu_d = mu_e / 30."""
    return make_params(c=600.0, r=600.0, mu_d=MU_E_RISK / 30.0)


@pytest.fixture
def scenario_b() -> PlatformParams:
    """Wie A, mit C = R = 60 s."""
    return make_params(c=60.0, r=60.0, mu_d=MU_E_RISK / 30.0)


@pytest.fixture
def ten_days() -> WorkloadSpec:
    return WorkloadSpec(total_work="10d")


@pytest.fixture
def policy_k3() -> BoundedStoragePolicy:
    return BoundedStoragePolicy(k=3, epsilon=1e-4)


@pytest.fixture
def pattern_params():
    """Fabrik für die Musterszenarien mit mu = 10y / 10^5."""
    def factory(v: float, c: float) -> PlatformParams:
        return make_params(c=c, r=c, mu_e=MU_E_PATTERN, v=v)
    return factory
