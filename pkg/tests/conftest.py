import pytest

from orderon.base import Global, make_rng


@pytest.fixture(autouse=True)
def quiet_globals():
    Global.clear()
    Global.VERBOSITY = 1
    yield
    Global.clear()


@pytest.fixture
def rng():
    return make_rng(2024)
