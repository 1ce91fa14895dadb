import pytest

from beliefgames import beliefs, catalog


@pytest.fixture(scope="session")
def gamma_spec():
    return catalog.gamma()


@pytest.fixture(scope="session")
def gamma_chain(gamma_spec):
    """Mid-size chain shared by solver tests (512 nodes is plenty: the
    clamped tail sits at reach probability ~2^-250)."""
    return beliefs.reduce(gamma_spec, beliefs.initial_belief(gamma_spec), 512)


@pytest.fixture(scope="session")
def gamma_chain_small(gamma_spec):
    return beliefs.reduce(gamma_spec, beliefs.initial_belief(gamma_spec), 64)
