import pytest

from maasslab import sieve


@pytest.fixture(scope="session")
def table_small():
    return sieve.build_table(10 ** 4)


@pytest.fixture(scope="session")
def table_medium():
    return sieve.build_table(10 ** 6)
