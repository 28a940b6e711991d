import pytest

from money_multiplier.src.config import Config, load_config
from money_multiplier.src.errors import ConfigError
from money_multiplier.src.models import ModelParameters, OutputDefinition, WelfareShare


def test_default_config_is_the_pre_2008_calibration():
    config = load_config(None)
    assert config.params == ModelParameters()
    assert config.params.theta == 0.454
    assert config.params.sigma2 == pytest.approx(0.123)
    assert config.output_definition == OutputDefinition.UTILITY_SCALE
    assert config.welfare_share == WelfareShare.PRINTED
    assert config.threads == 1


def test_load_flat_file(write_csv):
    path = write_csv(
        "# robustness run\n"
        "a=1.25\n"
        "A=0.002\n"
        "theta=0.5\n"
        "output_definition=cm_normalized\n"
        "welfare_share=kalai\n"
        "calibration_starts=4\n",
        name="params.env",
    )
    config = load_config(path)
    assert config.params.a == 1.25
    assert config.params.A == 0.002
    assert config.params.theta == 0.5
    assert config.params.B == 0.825
    assert config.output_definition == OutputDefinition.CM_NORMALIZED
    assert config.welfare_share == WelfareShare.KALAI
    assert config.calibration_starts == 4


@pytest.mark.parametrize(
    "text, message",
    [
        ("thetta=0.5\n", "unknown key 'thetta'"),
        ("Theta=0.5\n", "unknown key 'Theta'"),
        ("theta=\n", "no value"),
        ("theta=1.5\n", "theta"),
        ("sigma1=0.5\n", "exceeds 1"),
        ("threads=0\n", "threads"),
    ],
)
def test_bad_config_values(write_csv, text, message):
    with pytest.raises(ConfigError, match=message):
        load_config(write_csv(text, name="bad.env"))


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "missing.env"))


def test_from_mapping_reports_its_source():
    with pytest.raises(ConfigError, match="^cli: unknown key 'x'"):
        Config.from_mapping({"x": "1"}, source="cli")
