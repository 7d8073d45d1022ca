"""INI-like run config text <-> validated `RunConfig`, plus run-id hashing."""

import hashlib
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, ValidationError

from src.models.errors import ConfigIssue, ConfigurationError, ConfigValidationError
from src.models.kinds import StrategyKind
from src.models.run_config import (
    DetectorSettings,
    MemorySettings,
    ModelSettings,
    RunConfig,
    RunSettings,
    StreamSettings,
    TrainingSettings,
)

logger = logging.getLogger("Config")

# Mapping of section headers to their settings models, in render order
SECTION_MODELS: Dict[str, type[BaseModel]] = {
    "stream": StreamSettings,
    "model": ModelSettings,
    "memory": MemorySettings,
    "training": TrainingSettings,
    "detector": DetectorSettings,
    "run": RunSettings,
}

LIST_KEYS = {("stream", "drift_tasks"), ("stream", "drift_classes"), ("model", "hidden_dims")}
COMMENT_PREFIXES = ("#", ";")


def _split_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def parse_config(text: str) -> RunConfig:
    """Parses flat `[section]` / `key = value` text into a validated RunConfig.

    Every problem is collected before raising, each tagged with its section,
    key and line number (None for keys that are missing altogether).

    Raises:
        ConfigValidationError: On unknown sections or keys, duplicates,
            malformed lines, missing required keys or out-of-range values.
    """
    issues: list[ConfigIssue] = []
    data: Dict[str, Dict[str, Any]] = {}
    key_lines: Dict[tuple[str, str], int] = {}
    section_lines: Dict[str, int] = {}
    section: Optional[str] = None

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(COMMENT_PREFIXES):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in SECTION_MODELS:
                issues.append(ConfigIssue(section, "", number, "unknown section"))
                section = None
                continue
            if section in section_lines:
                issues.append(ConfigIssue(section, "", number, "section declared twice"))
            section_lines.setdefault(section, number)
            data.setdefault(section, {})
            continue
        if "=" not in line:
            issues.append(ConfigIssue(section or "", line, number, "expected 'key = value'"))
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if section is None:
            issues.append(ConfigIssue("", key, number, "key outside of a known section"))
            continue
        if key not in SECTION_MODELS[section].model_fields:
            issues.append(ConfigIssue(section, key, number, "unknown key"))
            continue
        if (section, key) in key_lines:
            issues.append(ConfigIssue(section, key, number, f"duplicate of line {key_lines[(section, key)]}"))
            continue
        key_lines[(section, key)] = number
        if (section, key) in LIST_KEYS:
            data[section][key] = _split_list(value)
        elif (section, key) == ("training", "strategy"):
            try:
                data[section][key] = StrategyKind.parse(value).value
            except ValueError:
                issues.append(ConfigIssue(section, key, number, f"unknown strategy '{value}'"))
        else:
            data[section][key] = value

    if "stream" not in data:
        issues.append(ConfigIssue("stream", "", None, "required section is missing"))

    if not issues:
        try:
            return RunConfig.model_validate(data)
        except ValidationError as e:
            for error in e.errors():
                issues.append(_issue_from_error(error, key_lines, section_lines))
    raise ConfigValidationError(issues)


def _issue_from_error(
    error: Dict[str, Any], key_lines: Dict[tuple[str, str], int], section_lines: Dict[str, int]
) -> ConfigIssue:
    loc = error.get("loc", ())
    section = str(loc[0]) if loc else ""
    key = str(loc[1]) if len(loc) > 1 else ""
    line = key_lines.get((section, key), section_lines.get(section) if not key else None)
    problem = "required key is missing" if error.get("type") == "missing" else error.get("msg", "invalid value")
    return ConfigIssue(section, key, line, problem)


def _render_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(_render_value(item) for item in value)
    return str(value)


def render_config(config: RunConfig) -> str:
    """Renders a config as text that `parse_config` maps back to an equal config."""
    blocks = []
    for section in SECTION_MODELS:
        settings: BaseModel = getattr(config, section)
        lines = [f"[{section}]"]
        for key in type(settings).model_fields:
            value = getattr(settings, key)
            if value is None:
                continue
            lines.append(f"{key} = {_render_value(value)}".rstrip())
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def load_config(path: "str | Path") -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e}") from e
    logger.debug(f"Parsing run config {path}")
    return parse_config(text)


def _digest(params: Dict[str, Any]) -> str:
    # Sorted keys keep the digest independent of declaration order
    param_string = json.dumps(params, sort_keys=True)
    return hashlib.sha256(param_string.encode()).hexdigest()


def config_hash(config: RunConfig) -> str:
    """Digest of every setting that affects results; the `[run]` section is excluded."""
    return _digest(config.model_dump(mode="json", exclude={"run"}))


def stream_key(config: RunConfig) -> str:
    """Digest of the stream definition alone, shared by runs that may be compared."""
    return _digest(config.stream.model_dump(mode="json", exclude={"data_root"}))


def run_id(config: RunConfig) -> str:
    return f"{config.training.strategy.value}-{config_hash(config)[:12]}-s{config.run.seed}"
