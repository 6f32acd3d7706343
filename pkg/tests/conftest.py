"""Shared fixtures and hypothesis settings for the test suite."""

import pytest
from hypothesis import HealthCheck, settings

from conalflow import dynamics

# Numeric tests routinely take tens of milliseconds per example (ODE
# integrations); the wall-clock deadline is noise, not signal.
settings.register_profile(
    "numeric",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("numeric")


@pytest.fixture(scope="session")
def metzler():
    return dynamics.builtin_system("linear_metzler")


@pytest.fixture(scope="session")
def rotation():
    return dynamics.builtin_system("rotation")


@pytest.fixture(scope="session")
def bistable():
    return dynamics.builtin_system("bistable_tanh")
