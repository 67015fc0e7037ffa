import pytest

from spinsim import core


def _shipped(name):
    from importlib import resources
    text = resources.files("spinsim").joinpath(
        "data", "systems", name).read_text(encoding="utf-8")
    return core.parse_spin_system(text, source=name)


@pytest.fixture(scope="session")
def citrate():
    return _shipped("citrate.spin")


@pytest.fixture(scope="session")
def citrate_es(citrate):
    return core.eigensystem(citrate)


@pytest.fixture(scope="session")
def citrate_cat(citrate_es):
    return core.transition_catalog(citrate_es)


@pytest.fixture(scope="session")
def compound1_es():
    return core.eigensystem(_shipped("compound1.spin"))


@pytest.fixture(scope="session")
def demo3():
    return _shipped("demo3.spin")


@pytest.fixture(scope="session")
def demo3_es(demo3):
    return core.eigensystem(demo3)


@pytest.fixture(scope="session")
def demo3_cat(demo3_es):
    return core.transition_catalog(demo3_es)


@pytest.fixture(scope="session")
def demo4_es():
    return core.eigensystem(_shipped("demo4.spin"))


@pytest.fixture(scope="session")
def demo4_cat(demo4_es):
    return core.transition_catalog(demo4_es)
