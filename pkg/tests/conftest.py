import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from biastol.distributions import GenGammaSpec
from biastol.quantile_map import analytic_map, identity_map

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

EXP2 = GenGammaSpec(1.0, 2.0)


@pytest.fixture(scope="session")
def exp2_map():
    """Exp(rate 2) target observed under length bias."""
    return analytic_map(EXP2, 1.0)


@pytest.fixture(scope="session")
def ident():
    return identity_map()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
