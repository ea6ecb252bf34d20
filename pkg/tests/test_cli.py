from __future__ import annotations

import json
from pathlib import Path

import pytest

from locallife.cli import main
from locallife.config import load_config
from locallife.demo import write_demo_data
from locallife.errors import (
    EXIT_DATA,
    EXIT_ENDPOINT,
    EXIT_INTERNAL,
    EXIT_OK,
    EXIT_USAGE,
    DataError,
    EndpointError,
    InternalError,
    UsageError,
)

CONFIG_TEMPLATE = """
seed = 7
city = "riverton"
strict = {strict}
output_dir = "out"

[paths]
merchants = "data/merchants.jsonl"
users = "data/users.jsonl"
interactions = "data/interactions.jsonl"
reviews = "data/reviews.jsonl"
calendar = "data/calendar.jsonl"

[qc]
min_days_per_condition = {min_days}

[bench]
questions_per_task = 2

[synthesis]
mode = "template_only"
n_merchants = 3
n_users = 2
n_interactions = 2

[[endpoints]]
endpoint_id = "mock-main"
kind = "mock"
mock_fallback = "agent_echo"

[[endpoints]]
endpoint_id = "remote-x"
kind = "remote"
model_name = "some-model"
base_url = "http://example.invalid/v1"
auth_env = "LL_CLI_TEST_TOKEN"
"""


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    work = tmp_path_factory.mktemp("cli")
    write_demo_data(work / "data", seed=7)
    (work / "run.toml").write_text(
        CONFIG_TEMPLATE.format(strict="true", min_days="10"), encoding="utf-8"
    )
    return work


def run_cli(workdir, *args, expect=EXIT_OK, capsys=None):
    import contextlib
    import io
    import os

    cwd = os.getcwd()
    os.chdir(workdir)
    out = io.StringIO()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(io.StringIO()):
            code = main(list(args))
    finally:
        os.chdir(cwd)
    assert code == expect, f"{args} exited {code}, expected {expect}"
    lines = [line for line in out.getvalue().splitlines() if line.strip()]
    return json.loads(lines[-1]) if lines and expect == EXIT_OK else {}


def test_exit_code_mapping_is_exhaustive():
    assert UsageError("x").exit_code == EXIT_USAGE == 1
    assert DataError("x").exit_code == EXIT_DATA == 2
    assert EndpointError("x").exit_code == EXIT_ENDPOINT == 3
    assert InternalError("x").exit_code == EXIT_INTERNAL == 4
    assert EXIT_OK == 0


def test_unknown_command_is_usage_error(workdir):
    run_cli(workdir, "frobnicate", expect=EXIT_USAGE)


def test_unknown_config_key_lists_it(workdir, tmp_path):
    bad = workdir / "bad.toml"
    bad.write_text("seed = 1\nmystery_knob = true\n", encoding="utf-8")
    run_cli(workdir, "ingest", "--config", "bad.toml", expect=EXIT_USAGE)


def test_missing_config_file_is_usage_error(workdir):
    run_cli(workdir, "ingest", "--config", "absent.toml", expect=EXIT_USAGE)


def test_strict_mode_rejects_low_qc_floor(workdir):
    low = workdir / "low.toml"
    low.write_text(CONFIG_TEMPLATE.format(strict="true", min_days="3"), encoding="utf-8")
    run_cli(workdir, "bench", "build", "--config", "low.toml", expect=EXIT_DATA)


def test_relaxed_mode_accepts_low_qc_floor(workdir):
    low = workdir / "low_relaxed.toml"
    low.write_text(CONFIG_TEMPLATE.format(strict="false", min_days="3"), encoding="utf-8")
    config = load_config(low)
    assert config.qc.min_days_per_condition == 3


def test_flag_seed_overrides_file_seed(workdir):
    config = load_config(workdir / "run.toml", {"seed": 9})
    assert config.seed == 9
    assert load_config(workdir / "run.toml").seed == 7


def test_missing_seed_is_data_error(workdir):
    noseed = workdir / "noseed.toml"
    text = "\n".join(
        line for line in CONFIG_TEMPLATE.format(strict="true", min_days="10").splitlines()
        if not line.startswith("seed")
    )
    noseed.write_text(text, encoding="utf-8")
    run_cli(workdir, "bench", "build", "--config", "noseed.toml", expect=EXIT_DATA)


def test_eval_run_with_unset_auth_env_is_endpoint_error(workdir, monkeypatch):
    monkeypatch.delenv("LL_CLI_TEST_TOKEN", raising=False)
    summary = run_cli(workdir, "bench", "build", "--config", "run.toml")
    run_cli(
        workdir,
        "eval", "run", "--config", "run.toml", "--endpoint", "remote-x",
        "--benchmark", summary["benchmark"],
        expect=EXIT_ENDPOINT,
    )


def test_unknown_endpoint_is_usage_error(workdir):
    summary = run_cli(workdir, "bench", "build", "--config", "run.toml")
    run_cli(
        workdir,
        "eval", "run", "--config", "run.toml", "--endpoint", "nope",
        "--benchmark", summary["benchmark"],
        expect=EXIT_USAGE,
    )


def test_verify_table_reports_rows_and_worst(workdir):
    summary = run_cli(workdir, "eval", "verify-table", "--tolerance", "0.5")
    assert len(summary["rows"]) == 30
    assert summary["worst"]["model"] == "Phi-3 mini"
    assert summary["tolerance"] == 0.5
    # At a tolerance wide enough to absorb the one inconsistent published row,
    # every row reconciles.
    summary = run_cli(workdir, "eval", "verify-table", "--tolerance", "2.0")
    assert summary["all_passed"] is True


def test_full_cli_chain_produces_manifests(workdir):
    summary = run_cli(workdir, "bench", "build", "--config", "run.toml")
    bench = workdir / summary["benchmark"]
    assert bench.exists()
    manifest = json.loads(Path(str(bench) + ".manifest.json").read_text())
    assert manifest["seed"] == 7
    assert manifest["tool_version"]
    assert manifest["config_hash"]
    assert manifest["config_resolved"]["city"] == "riverton"
    assert set(manifest["inputs"]) >= {"merchants", "users", "interactions", "reviews", "calendar"}

    run_summary = run_cli(
        workdir, "eval", "run", "--config", "run.toml", "--endpoint", "mock-main",
        "--benchmark", str(bench),
    )
    score_summary = run_cli(
        workdir, "eval", "score", "--run", run_summary["run"], "--benchmark", str(bench),
    )
    assert (workdir / score_summary["scores"]).exists()
    report = run_cli(
        workdir, "report", "--scores", score_summary["scores"], "--format", "markdown",
    )
    assert report["tables"] == 1


def test_synthesize_summary_has_agent_counts(workdir):
    summary = run_cli(
        workdir, "synthesize", "--config", "run.toml", "--endpoint", "mock-main",
        "--mode", "multi_agent",
    )
    assert set(summary["pairs_by_agent"]) == {"template", "merchant", "user", "interaction"}
    assert (workdir / summary["dataset"]).exists()


def test_eval_correlate_needs_three_runs(workdir):
    summary = run_cli(workdir, "bench", "build", "--config", "run.toml")
    bench = summary["benchmark"]
    run_summary = run_cli(
        workdir, "eval", "run", "--config", "run.toml", "--endpoint", "mock-main",
        "--benchmark", bench,
    )
    run_cli(
        workdir, "eval", "correlate", "--benchmark", bench,
        "--runs", run_summary["run"], run_summary["run"],
        expect=EXIT_DATA,
    )
