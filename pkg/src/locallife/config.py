"""TOML run configuration with strict key validation and CLI overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .benchmark.qc import QCConfig
from .errors import DataError, UsageError
from .gateway import EndpointConfig, MockScript
from .ioutil import canonical_dumps, read_json, sha256_text

_TOP_KEYS = {"seed", "city", "strict", "output_dir", "paths", "qc", "synthesis",
             "strategy", "bench", "endpoints"}
_PATH_KEYS = {"merchants", "users", "interactions", "reviews", "calendar", "denylist"}
_QC_KEYS = {"min_days_per_condition", "balance_tolerance", "min_annotators",
            "bootstrap_resamples", "ci_level"}
_SYNTHESIS_KEYS = {"mode", "n_merchants", "n_users", "n_interactions", "target_pairs"}
_STRATEGY_KEYS = {"kind", "k", "role", "exemplar_pool"}
_BENCH_KEYS = {"questions_per_task"}
_ENDPOINT_KEYS = {"endpoint_id", "kind", "model_name", "base_url", "auth_env",
                  "max_parallel", "retry_max_attempts", "retry_base_backoff_ms",
                  "timeout_s", "mock_fallback", "mock_fixtures"}


@dataclass
class RunConfig:
    source_path: Path
    seed: int | None
    city: str | None
    strict: bool
    output_dir: Path
    store_paths: dict[str, Path]
    denylist_path: Path | None
    qc: QCConfig
    synthesis: dict[str, Any]
    strategy: dict[str, Any]
    bench: dict[str, Any]
    endpoints: dict[str, EndpointConfig]
    resolved: dict[str, Any] = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        return sha256_text(canonical_dumps(self.resolved))

    def endpoint(self, endpoint_id: str) -> EndpointConfig:
        if endpoint_id not in self.endpoints:
            raise UsageError(
                f"endpoint {endpoint_id!r} is not configured; known: {sorted(self.endpoints)}"
            )
        return self.endpoints[endpoint_id]

    def require_seed(self) -> int:
        if self.seed is None:
            raise DataError("this command requires a seed (config `seed` or --seed)")
        return self.seed


def _reject_unknown(section: str, raw: dict, allowed: set[str]) -> None:
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise UsageError(f"unknown key(s) in {section}: {', '.join(unknown)}")


def _build_endpoint(raw: dict, base_dir: Path) -> EndpointConfig:
    _reject_unknown(f"endpoints[{raw.get('endpoint_id', '?')}]", raw, _ENDPOINT_KEYS)
    if "endpoint_id" not in raw:
        raise UsageError("every endpoint needs an endpoint_id")
    kind = raw.get("kind", "mock")
    script = None
    if kind == "mock":
        fixtures: dict[str, str] = {}
        fixtures_path = raw.get("mock_fixtures")
        if fixtures_path:
            fixtures = {
                str(k): str(v) for k, v in read_json(base_dir / fixtures_path).items()
            }
        script = MockScript(fixtures=fixtures, fallback=raw.get("mock_fallback", "agent_echo"))
    return EndpointConfig(
        endpoint_id=raw["endpoint_id"],
        kind=kind,
        model_name=raw.get("model_name", "mock-model"),
        base_url=raw.get("base_url", ""),
        auth_env=raw.get("auth_env", ""),
        max_parallel=int(raw.get("max_parallel", 4)),
        retry_max_attempts=int(raw.get("retry_max_attempts", 3)),
        retry_base_backoff_ms=int(raw.get("retry_base_backoff_ms", 250)),
        timeout_s=float(raw.get("timeout_s", 60.0)),
        mock_script=script,
    )


def load_config(path: Path, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Parse, validate, and resolve a run configuration.

    Overrides (from command-line flags) always win over file values.  Unknown
    keys are a usage error; invariant violations (e.g. QC below the strict
    floor) are a data error.
    """
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"config file {path} is not valid TOML: {exc}") from exc

    _reject_unknown("config", raw, _TOP_KEYS)
    _reject_unknown("paths", raw.get("paths", {}), _PATH_KEYS)
    _reject_unknown("qc", raw.get("qc", {}), _QC_KEYS)
    _reject_unknown("synthesis", raw.get("synthesis", {}), _SYNTHESIS_KEYS)
    _reject_unknown("strategy", raw.get("strategy", {}), _STRATEGY_KEYS)
    _reject_unknown("bench", raw.get("bench", {}), _BENCH_KEYS)

    overrides = overrides or {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("seed", "city", "strict"):
            raw[key] = value
        elif key == "mode":
            raw.setdefault("synthesis", {})["mode"] = value
        elif key == "output_dir":
            raw["output_dir"] = str(value)

    base_dir = path.parent
    qc_raw = raw.get("qc", {})
    qc = QCConfig(
        min_days_per_condition=int(qc_raw.get("min_days_per_condition", 10)),
        balance_tolerance=float(qc_raw.get("balance_tolerance", 0.2)),
        min_annotators=int(qc_raw.get("min_annotators", 2)),
        bootstrap_resamples=int(qc_raw.get("bootstrap_resamples", 1000)),
        ci_level=float(qc_raw.get("ci_level", 0.95)),
    )
    strict = bool(raw.get("strict", True))
    if strict:
        qc.enforce_strict_floors()

    store_paths = {
        kind: (base_dir / raw["paths"][kind])
        for kind in ("merchants", "users", "interactions", "reviews", "calendar")
        if "paths" in raw and kind in raw["paths"]
    }
    denylist_path = None
    if raw.get("paths", {}).get("denylist"):
        denylist_path = base_dir / raw["paths"]["denylist"]

    endpoints = {}
    for entry in raw.get("endpoints", []):
        endpoint = _build_endpoint(entry, base_dir)
        if endpoint.endpoint_id in endpoints:
            raise UsageError(f"duplicate endpoint_id {endpoint.endpoint_id!r}")
        endpoints[endpoint.endpoint_id] = endpoint

    synthesis = {
        "mode": raw.get("synthesis", {}).get("mode", "multi_agent"),
        "n_merchants": int(raw.get("synthesis", {}).get("n_merchants", 5)),
        "n_users": int(raw.get("synthesis", {}).get("n_users", 5)),
        "n_interactions": int(raw.get("synthesis", {}).get("n_interactions", 5)),
        "target_pairs": int(raw.get("synthesis", {}).get("target_pairs", 0)) or None,
    }
    strategy = {
        "kind": raw.get("strategy", {}).get("kind", "zero_shot"),
        "k": int(raw.get("strategy", {}).get("k", 0)),
        "role": raw.get("strategy", {}).get("role", ""),
        "exemplar_pool": raw.get("strategy", {}).get("exemplar_pool", ""),
    }
    bench = {"questions_per_task": int(raw.get("bench", {}).get("questions_per_task", 4))}

    resolved = {
        "seed": raw.get("seed"),
        "city": raw.get("city"),
        "strict": strict,
        "output_dir": str(raw.get("output_dir", "out")),
        "paths": {k: str(v) for k, v in store_paths.items()},
        "denylist": str(denylist_path) if denylist_path else None,
        "qc": {
            "min_days_per_condition": qc.min_days_per_condition,
            "balance_tolerance": qc.balance_tolerance,
            "min_annotators": qc.min_annotators,
            "bootstrap_resamples": qc.bootstrap_resamples,
            "ci_level": qc.ci_level,
        },
        "synthesis": synthesis,
        "strategy": strategy,
        "bench": bench,
        "endpoints": sorted(endpoints),
    }
    seed = raw.get("seed")
    return RunConfig(
        source_path=path,
        seed=int(seed) if seed is not None else None,
        city=raw.get("city"),
        strict=strict,
        output_dir=base_dir / str(raw.get("output_dir", "out")),
        store_paths=store_paths,
        denylist_path=denylist_path,
        qc=qc,
        synthesis=synthesis,
        strategy=strategy,
        bench=bench,
        endpoints=endpoints,
        resolved=json.loads(canonical_dumps(resolved)),
    )
