import numpy as np
import pytest

from tomostat import (
    FilterSpec,
    GaussianStateSpec,
    PatternFn,
    fock_coefficients,
    operator_cf,
)

# the worked example: x-squeezed state probed with the width-1.8 filter
SQ_VX, SQ_VP = 0.5, 2.0
FILTER_W = 1.8
N_RUN = 100_000
N_MAX = 20


@pytest.fixture(scope="session")
def squeezed_state():
    return GaussianStateSpec(0j, SQ_VX, SQ_VP, 0.0)


@pytest.fixture(scope="session")
def vacuum_state():
    return GaussianStateSpec(0j, 1.0, 1.0, 0.0)


@pytest.fixture(scope="session")
def filt():
    return FilterSpec(FILTER_W)


@pytest.fixture(scope="session")
def op_at_min(filt):
    return operator_cf(filt, 0.6)


@pytest.fixture(scope="session")
def op_origin(filt):
    return operator_cf(filt, 0.0)


@pytest.fixture(scope="session")
def fock_coeffs(filt):
    return fock_coefficients(filt.kernel(), N_MAX)


@pytest.fixture(scope="session")
def pattern_at_min(op_at_min):
    return PatternFn(op_at_min)


@pytest.fixture(scope="session")
def pattern_origin(op_origin):
    return PatternFn(op_origin)


def random_physical_state(rng) -> GaussianStateSpec:
    """A random valid Gaussian state with moderate squeezing and mean."""
    vx = rng.uniform(0.4, 2.5)
    purity_slack = rng.uniform(1.0, 1.8)
    cxp = rng.uniform(-0.3, 0.3)
    vp = (purity_slack + cxp ** 2) / vx
    mean = complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
    return GaussianStateSpec(mean, vx, vp, cxp)
