"""
Experiment configuration: file grammar, desk-scale preset and flag merging.

Config files are flat text, one setting per line:

    # comment
    seed = 7
    hidden_widths = [64, 64]
    epsilon_scale = auto

Values are typed as YAML scalars/lists. Files ending in .yaml or .yml
are read as a flat YAML mapping instead. Precedence, lowest first:
built-in defaults, desk-scale preset, config file, command-line flags.
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import yaml
from dotenv import load_dotenv
from pydantic import Field, ValidationError, field_validator, model_validator

from src.training.config import REGIME_ORDER, Regime, TrainConfig

logger = logging.getLogger(__name__)

DEFAULT_OUT_DIR = "./runs"
OUT_DIR_ENV = "PGGAN_OUT"

# Shrunken grid (20 x 10 labels) and epoch budget with the bands compressed
# proportionally; applied only to keys the user did not set.
DESK_SCALE_PRESET: Dict[str, Any] = {
    'v0_min': 1.0,
    'v0_max': 20.0,
    'v0_step': 1.0,
    'phi_min': 0.0,
    'phi_max': 90.0,
    'phi_step': 10.0,
    'pretrain_epochs': 2000,
    'total_epochs': 10000,
    'epsilon_starts': [2000, 4000, 6000, 8000],
    'epsilon_scale': 'auto',
    'log_every': 500,
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key(s)."""


def default_out_dir() -> str:
    """$PGGAN_OUT (after loading .env) or ./runs."""
    load_dotenv()
    return os.getenv(OUT_DIR_ENV) or DEFAULT_OUT_DIR


class ExperimentConfig(TrainConfig):
    """
    TrainConfig plus the experiment grid: which regimes and seeds to run
    and where to write them.
    """
    regimes: List[Regime] = Field(default_factory=lambda: list(REGIME_ORDER))
    seeds: List[int] = Field(default_factory=lambda: [1, 2, 3])
    out_dir: str = Field(default_factory=default_out_dir)
    desk_scale: bool = False
    workers: int = Field(1, ge=1)

    @field_validator('seeds')
    @classmethod
    def _distinct_seeds(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("seeds must not be empty")
        if len(set(v)) != len(v):
            raise ValueError(f"seeds must be distinct, got {v}")
        if any(s < 0 for s in v):
            raise ValueError(f"seeds must be non-negative, got {v}")
        return v

    @field_validator('regimes')
    @classmethod
    def _regimes(cls, v: List[Regime]) -> List[Regime]:
        if not v:
            raise ValueError("regimes must not be empty")
        if len(set(v)) != len(v):
            raise ValueError(f"regimes must be distinct, got {[r.value for r in v]}")
        return sorted(v, key=REGIME_ORDER.index)

    @model_validator(mode='after')
    def _every_regime_valid(self) -> 'ExperimentConfig':
        for regime in self.regimes:
            self.for_run(regime, self.seeds[0])
        return self

    def run_configs(self) -> List[TrainConfig]:
        """One TrainConfig per (regime, seed) cell, regime-major."""
        return [self.for_run(regime, seed) for regime in self.regimes for seed in self.seeds]

    def run_keys(self) -> List[Tuple[Regime, int]]:
        """(regime, seed) of every configured cell, regime-major."""
        return [(regime, seed) for regime in self.regimes for seed in self.seeds]

    @property
    def out_path(self) -> Path:
        return Path(self.out_dir)


def known_keys() -> List[str]:
    """Every accepted key: field names and their aliases."""
    keys = []
    for name, info in ExperimentConfig.model_fields.items():
        keys.append(name)
        if info.alias:
            keys.append(info.alias)
    return keys


def _parse_value(raw: str) -> Any:
    try:
        return yaml.safe_load(raw)
    except yaml.YAMLError:
        return raw


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, Any]:
    """
    Parse the flat `key = value` grammar.

    Raises:
        ConfigError: Malformed line or repeated key

    Examples:
        >>> parse_config_text("seed = 9  # override\\nlambda = 0")
        {'seed': 9, 'lambda': 0}
    """
    values: Dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition('=')
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: key '{key}' set twice")
        values[key] = _parse_value(raw.strip())
    return values


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a config file into a flat mapping.

    Raises:
        ConfigError: Missing file or malformed content
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    text = path.read_text(encoding='utf-8')
    if path.suffix.lower() in ('.yaml', '.yml'):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: invalid YAML: {e}") from e
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a mapping of keys to values")
        return {str(k): v for k, v in data.items()}
    return parse_config_text(text, str(path))


def _canonical(key: str) -> str:
    info = ExperimentConfig.model_fields.get(key)
    if info is not None:
        return key
    for name, info in ExperimentConfig.model_fields.items():
        if info.alias == key:
            return name
    return key


def _format_errors(err: ValidationError) -> str:
    fields = {name: info.alias or name for name, info in ExperimentConfig.model_fields.items()}
    parts = []
    for e in err.errors():
        loc = [str(p) for p in e['loc']]
        key = fields.get(loc[0], loc[0]) if loc else "config"
        where = ".".join([key] + loc[1:]) if loc else key
        parts.append(f"{where}: {e['msg']}")
    return "; ".join(parts)


def parse_config(
    path: Optional[Union[str, Path]] = None,
    flags: Optional[Mapping[str, Any]] = None
) -> ExperimentConfig:
    """
    Build the experiment configuration.

    Args:
        path: Optional config file
        flags: Values given on the command line (only the ones set)

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigError: Unknown key, type mismatch or invalid value; the
                     message names the key(s)
    """
    file_values = read_config_file(path) if path is not None else {}
    flag_values = dict(flags or {})

    accepted = set(known_keys())
    unknown = sorted(k for k in list(file_values) + list(flag_values) if k not in accepted)
    if unknown:
        raise ConfigError(f"Unknown config key(s): {', '.join(unknown)}")

    merged: Dict[str, Any] = {}
    for source in (file_values, flag_values):
        for key, value in source.items():
            merged[_canonical(key)] = value

    if merged.get('desk_scale') is True:
        for key, value in DESK_SCALE_PRESET.items():
            merged.setdefault(key, value)

    try:
        cfg = ExperimentConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {_format_errors(e)}") from e

    logger.debug(f"Resolved configuration: {cfg.model_dump(mode='json', by_alias=True)}")
    return cfg
