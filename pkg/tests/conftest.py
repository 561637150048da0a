import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from quadlin.coeffs import CoefficientFamily

settings.register_profile(
    "quadlin", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("quadlin")

TAU0S = (0.5, 1.0, 2.0)


def all_families():
    fams = [CoefficientFamily.rectangular(t, 0.4) for t in TAU0S]
    fams += [CoefficientFamily.rhombic(t, 2.95) for t in TAU0S]
    fams.append(CoefficientFamily.degenerate(0.4))
    return fams


def fam_id(fam):
    return f"{fam.regime}-{fam.tau0}"


@pytest.fixture(scope="session", params=all_families(), ids=fam_id)
def family(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


@pytest.fixture(scope="session")
def rect():
    return CoefficientFamily.rectangular(1.0, 0.4)


@pytest.fixture(scope="session")
def rhomb():
    return CoefficientFamily.rhombic(1.0, 2.95)


def near_pi(x, margin=0.1):
    r = (x - math.pi) % (2 * math.pi)
    return min(r, 2 * math.pi - r) < margin
