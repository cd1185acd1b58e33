import pytest

from plantransfer.fixtures import load_fixtures
from plantransfer.rewrite import run_plan


@pytest.fixture(scope="session")
def fx():
    return load_fixtures()


@pytest.fixture(scope="session")
def source_trace(fx):
    return run_plan(fx.initial, fx.plan)
