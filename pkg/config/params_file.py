"""
Plain-text ``key = value`` parameter files shared by the simulator and every
command. Keys are the field names of the target pydantic model.
"""
from enum import Enum
from typing import Any, Mapping, Optional, TypeVar

from dotenv import dotenv_values
from path import Path
from pydantic import BaseModel, ValidationError

from utils.errors import ConfigError
from utils.validators import SimConfig

M = TypeVar('M', bound=BaseModel)


def _key_lines(text: str) -> dict[str, int]:
    lines: dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith('#'):
            continue
        if stripped.startswith('export '):
            stripped = stripped[len('export '):]
        key = stripped.split('=', 1)[0].strip()
        lines.setdefault(key, number)
    return lines


def read_params_file(path: Path) -> tuple[dict[str, Optional[str]], dict[str, int]]:
    """Raw values and the 1-based line of each key."""
    path = Path(path)
    if not path.isfile():
        raise ConfigError(f"config file not found: {path}")
    return dict(dotenv_values(path, interpolate=False)), _key_lines(path.read_text(encoding='utf-8'))


def load_params(model_cls: type[M], path: Optional[Path] = None,
                overrides: Optional[Mapping[str, Any]] = None) -> M:
    """
    Validate ``model_cls`` from an optional file plus overrides (overrides win).

    Raises:
        ConfigError: unknown key, key without value, or a value pydantic rejects
    """
    values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    if path is not None:
        raw, lines = read_params_file(path)
        for key, value in raw.items():
            if key not in model_cls.model_fields:
                raise ConfigError("unknown key", key=key, line=lines.get(key))
            if value is None:
                raise ConfigError("key without a value", key=key, line=lines.get(key))
            values[key] = value
    overrides = dict(overrides or {})
    values.update(overrides)

    try:
        return model_cls.model_validate(values)
    except ValidationError as exc:
        error = exc.errors()[0]
        key = str(error['loc'][0]) if error['loc'] else None
        message = "missing required key" if error['type'] == 'missing' else error['msg']
        line = None if key is None or key in overrides else lines.get(key)
        raise ConfigError(message, key=key, line=line) from exc


def load_sim_config(path: Path, overrides: Optional[Mapping[str, Any]] = None) -> SimConfig:
    return load_params(SimConfig, path, overrides)


def _render(value: Any) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ','.join(_render(item) for item in value)
    return str(value)


def dump_params(model: BaseModel) -> str:
    """Render a model as a parameter file; ``load_params`` on it reproduces the model."""
    lines = [f"{name} = {_render(value)}"
             for name, value in model if value is not None]
    return '\n'.join(lines) + '\n'
