import random

import pytest

from sci_workbench.catalog import load_catalog


@pytest.fixture(scope="session")
def default_catalog():
    return load_catalog()


@pytest.fixture(scope="session")
def spectral_source(default_catalog):
    return default_catalog.first("spectral_source").problem


@pytest.fixture
def rng():
    return random.Random(0)
