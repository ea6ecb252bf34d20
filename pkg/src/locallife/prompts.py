"""Loader for the versioned prompt catalog shipped as package data."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import InternalError

_SLOT_RE = re.compile(r"\{([a-z_]+)\}")


@lru_cache(maxsize=1)
def catalog() -> dict[str, Any]:
    text = resources.files("locallife.data").joinpath("prompt_catalog.toml").read_text("utf-8")
    return tomllib.loads(text)


def fill(template: str, **slots: str) -> str:
    """Substitute declared {slot} names; any other brace pattern passes through."""

    def _sub(match: re.Match) -> str:
        name = match.group(1)
        return str(slots[name]) if name in slots else match.group(0)

    return _SLOT_RE.sub(_sub, template)


def agent_prompt(section: str, name: str) -> tuple[str, str]:
    """(system, user-template) pair for e.g. ('synthesis', 'merchant_agent')."""
    try:
        entry = catalog()[section][name]
        return entry["system"], entry["user"]
    except KeyError as exc:
        raise InternalError(f"prompt catalog has no entry {section}.{name}") from exc


def workflow_catalog(workflow_id: str) -> tuple[list[str], dict[str, str]]:
    """Ordered step names and per-step prompt templates for one workflow."""
    try:
        entry = catalog()["workflows"][workflow_id]
        return list(entry["step_names"]), dict(entry["prompts"])
    except KeyError as exc:
        raise InternalError(f"prompt catalog has no workflow {workflow_id!r}") from exc


def render_input_block(values: dict[str, str]) -> str:
    """key: value lines, in the order given, used by all agent prompts."""
    return "\n".join(f"{key}: {value}" for key, value in values.items())
