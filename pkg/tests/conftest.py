"""Shared fixtures: benchmark models and scale contexts at the rates the
suite exercises. Contexts are session-scoped since they are immutable."""

import pytest

from levystop import fixtures, make_context


@pytest.fixture(scope="session")
def weibull():
    return fixtures.weibull_model()


@pytest.fixture(scope="session")
def brownian():
    return fixtures.brownian_model()


@pytest.fixture(scope="session")
def ctx_005(weibull):
    return make_context(weibull, r=0.05)


@pytest.fixture(scope="session")
def ctx_05(weibull):
    return make_context(weibull, r=0.5)


@pytest.fixture(scope="session")
def ctx_2(weibull):
    return make_context(weibull, r=2.0)


@pytest.fixture(scope="session")
def bctx_2(brownian):
    return make_context(brownian, r=2.0)
