import pytest

from evote.canonical import derive_rng
from evote.groups import TEST_GROUP


class StubRng:
    """Feeds predetermined values to code expecting random.Random."""

    def __init__(self, values):
        self.values = list(values)

    def randrange(self, a, b=None):
        return self.values.pop(0)


@pytest.fixture
def grp():
    return TEST_GROUP


@pytest.fixture
def rng():
    return derive_rng("tests", "default")
