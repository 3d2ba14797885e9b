import pytest

from kerrgate import load_config, resolve


@pytest.fixture(scope="session")
def default_run():
    """Default operating point, resolved once for the whole suite."""
    return resolve(load_config(None))
