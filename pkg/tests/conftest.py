import pytest

from money_multiplier.src.config import Config
from money_multiplier.src.models import ModelParameters


@pytest.fixture
def params():
    return ModelParameters()


@pytest.fixture
def prefs(params):
    return params.preferences


@pytest.fixture
def costs(params):
    return params.bank_costs


@pytest.fixture
def scarce_policy(params):
    return params.policy(i=0.05, i_r=0.0, chi=0.1)


@pytest.fixture
def ample_policy(params):
    return params.policy(i=0.039, i_r=0.04, chi=0.1)


@pytest.fixture
def no_banking_policy(params):
    return params.policy(i=0.001, i_r=0.0, chi=0.1)


@pytest.fixture
def config():
    return Config()


@pytest.fixture
def write_csv(tmp_path):
    """Write CSV text to a temporary file and return its path"""

    def _write(text, name="scenario.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return _write
