import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from autonorm.cli import ScenarioConfig, build_plan

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def load_config(name: str) -> ScenarioConfig:
    return ScenarioConfig.load(CONFIGS / f"{name}.json")


def config_dict(name: str) -> dict:
    return json.loads((CONFIGS / f"{name}.json").read_text())


@pytest.fixture(scope="session")
def generic_config() -> ScenarioConfig:
    return load_config("generic_m3")


@pytest.fixture(scope="session")
def generic_plan(generic_config):
    return build_plan(generic_config)


@pytest.fixture(scope="session")
def kernel_plan():
    return build_plan(load_config("kernel_balanced"))
