from __future__ import annotations

from pathlib import Path

import pytest

from locallife.demo import write_demo_data
from locallife.gateway import Gateway, MockScript, configure_mock
from locallife.platform_data import load_bundle


@pytest.fixture(scope="session")
def demo_paths(tmp_path_factory) -> dict[str, Path]:
    out = tmp_path_factory.mktemp("demo-data")
    return write_demo_data(out, seed=7, city="riverton")


@pytest.fixture(scope="session")
def bundle(demo_paths):
    loaded, _reports = load_bundle(demo_paths)
    return loaded


@pytest.fixture()
def gateway() -> Gateway:
    return Gateway()


@pytest.fixture()
def echo_endpoint():
    return configure_mock(MockScript(fallback="agent_echo"), endpoint_id="mock-echo")


@pytest.fixture()
def letter_endpoint():
    return configure_mock(MockScript(fallback="letter"), endpoint_id="mock-letter")
