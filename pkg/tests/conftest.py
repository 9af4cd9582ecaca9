import os

import pytest
from hypothesis import settings

from glw.cmodule import load_module
from glw.filters import improper_filter, load_filter, trivial_filter
from glw.presentation import load_category

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(__file__)), "glw", "fixtures")

settings.register_profile("glw", deadline=None, max_examples=60)
settings.load_profile("glw")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


@pytest.fixture(scope="session")
def w5():
    return load_category(fixture_path("w5.gcat"))


@pytest.fixture(scope="session")
def dual():
    return load_category(fixture_path("d.gcat"))


@pytest.fixture(scope="session")
def point():
    return load_category(fixture_path("point.gcat"))


@pytest.fixture(scope="session")
def w5_rep_v2(w5):
    return load_module(fixture_path("w5_rep_v2.gmod"), w5)


@pytest.fixture(scope="session")
def dual_trivial(dual):
    return trivial_filter(dual)


@pytest.fixture(scope="session")
def dual_improper(dual):
    return improper_filter(dual)


@pytest.fixture(scope="session")
def dual_epsilon(dual):
    return load_filter(fixture_path("d_epsilon.gfil"), dual)


@pytest.fixture(scope="session")
def w5_trivial(w5):
    return trivial_filter(w5)
