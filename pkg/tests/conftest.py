import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from statbundle import gallery as ga

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def entries():
    """One entry per gallery id (n = 3 where the dimension is free)."""
    return ga.default_entries(3)


@pytest.fixture(scope="session")
def fisher_half():
    return ga.gaussian_fisher(0.5)


def all_entries():
    return ga.default_entries(3) + [ga.gaussian_fisher(0.5), ga.torus_bump(2),
                                    ga.paper_hessian(2), ga.euclid_trivial(2)]


ENTRY_PARAMS = [pytest.param(e, id=e.structure.name) for e in all_entries()]


def rng(seed=0):
    return np.random.default_rng(seed)
