import pytest

from ffkoopman.koopman import build_reduction
from ffkoopman.sysdef import load_example

from workedexample import reference_matrices


@pytest.fixture(scope="session")
def biochem():
    return load_example("biochem")


@pytest.fixture(scope="session")
def obs3():
    return load_example("obs3")


@pytest.fixture(scope="session")
def d1():
    return load_example("d1")


@pytest.fixture(scope="session")
def hidden():
    return load_example("hidden")


@pytest.fixture(scope="session")
def obs3_red(obs3):
    return build_reduction(obs3)


@pytest.fixture(scope="session")
def biochem_red(biochem):
    return build_reduction(biochem)


@pytest.fixture
def reference_pair():
    return reference_matrices()
