import pytest

from gearsynth.catalogue import load_catalogue


@pytest.fixture(scope="session")
def cat():
    return load_catalogue()
