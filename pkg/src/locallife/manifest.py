"""Sidecar manifests binding every artifact to its configuration and inputs."""

from __future__ import annotations

from pathlib import Path
from typing import Any

from . import __version__
from .ioutil import sha256_file, write_json


def build_manifest(
    command: str,
    config_hash: str | None,
    seed: int | None,
    input_paths: dict[str, Path],
    extra: dict[str, Any] | None = None,
) -> dict[str, Any]:
    manifest: dict[str, Any] = {
        "tool_version": __version__,
        "command": command,
        "config_hash": config_hash,
        "seed": seed,
        "inputs": {
            name: {"path": str(path), "sha256": sha256_file(path)}
            for name, path in sorted(input_paths.items())
        },
    }
    if extra:
        manifest.update(extra)
    return manifest


def write_manifest(artifact_path: Path, manifest: dict[str, Any]) -> Path:
    path = Path(str(artifact_path) + ".manifest.json")
    write_json(path, manifest)
    return path
