# src/config.py
import logging
from typing import Dict, Mapping, Optional

from dotenv import dotenv_values
from pydantic import Field, ValidationError

from .errors import ConfigError
from .models import FrozenModel, ModelParameters, OutputDefinition, WelfareShare

logger = logging.getLogger(__name__)

PARAMETER_KEYS = ("theta", "B", "b", "A", "a", "E", "k", "sigma1", "sigma3")


class Config(FrozenModel):
    """Everything a command needs besides its own flags"""

    params: ModelParameters = Field(default_factory=ModelParameters)
    output_definition: OutputDefinition = OutputDefinition.UTILITY_SCALE
    welfare_share: WelfareShare = WelfareShare.PRINTED
    invariant_tol: float = Field(default=1e-10, gt=0)
    calibration_starts: int = Field(default=16, ge=1)
    calibration_seed: int = 0
    calibration_max_iter: int = Field(default=4000, ge=1)
    threads: int = Field(default=1, ge=1)

    @classmethod
    def from_mapping(cls, values: Mapping[str, Optional[str]], source: str = "<mapping>") -> "Config":
        """Build a config from flat string values, rejecting unknown keys"""
        params: Dict[str, str] = {}
        settings: Dict[str, str] = {}
        for key, value in values.items():
            if value is None or value == "":
                raise ConfigError(f"{source}: key '{key}' has no value")
            if key in PARAMETER_KEYS:
                params[key] = value
            elif key in cls.model_fields and key != "params":
                settings[key] = value
            else:
                raise ConfigError(f"{source}: unknown key '{key}'")
        try:
            return cls(params=ModelParameters(**params), **settings)
        except ValidationError as e:
            raise ConfigError(f"{source}: {e}") from e


def load_config(path: Optional[str] = None) -> Config:
    """Load a flat KEY=value file; no path gives the default calibration"""
    if path is None:
        logger.debug("No config file given, using default parameters")
        return Config()
    try:
        with open(path, "r", encoding="utf-8") as f:
            values = dotenv_values(stream=f)
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    config = Config.from_mapping(values, source=path)
    logger.info(f"Loaded configuration from {path}")
    return config
