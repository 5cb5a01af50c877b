"""
Experiment configuration loading: JSON file, then flag overrides, then validation.
"""
import json
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

from pydantic import ValidationError

from src.errors import ConfigError
from src.estimators.config import ExperimentConfig

LAMBDA_KEYS = ("lambda", "lam", "lambda_ratio")


def _field_path(error: Dict[str, Any]) -> str:
    return ".".join(str(part) for part in error.get("loc", ())) or "config"


def format_validation_error(exc: ValidationError) -> str:
    first = exc.errors()[0]
    message = f"{_field_path(first)}: {first.get('msg', 'invalid value')}"
    extra = exc.error_count() - 1
    return message + (f" (and {extra} more)" if extra else "")


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """JSON object from a file; an empty file is an empty object."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror or e}") from e
    if not text.strip():
        return {}
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: line {e.lineno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
    require: Sequence[str] = ("graph",),
) -> ExperimentConfig:
    """Defaults, then the file, then flag overrides; schema errors name the field path.

    Keys in ``require`` must come from the file or the flags.
    """
    data = read_config_file(path) if path is not None else {}
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    # a flag for one form of lambda replaces the other form from the file
    if any(key in overrides for key in LAMBDA_KEYS):
        for key in LAMBDA_KEYS:
            data.pop(key, None)
    data.update(overrides)
    missing = [key for key in require if data.get(key) is None]
    if missing:
        raise ConfigError(f"{missing[0]}: Field required")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(format_validation_error(e)) from e
