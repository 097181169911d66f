"""Shared fixtures: shipped configs, fake backends, synthetic records."""

from __future__ import annotations

from pathlib import Path
from random import Random

import pytest

from langloop.backends import Backend, ScriptedBackend, load_rules
from langloop.config import EmbodimentConfig, load_embodiment_config
from langloop.records import StepRecord
from langloop.sim import load_scenario

REPO_ROOT = Path(__file__).resolve().parents[1]
CONFIGS = REPO_ROOT / "configs"

EMBODIMENTS = ("wheeled", "limb", "rov")


def config_paths(name: str) -> dict[str, Path]:
    base = CONFIGS / name
    return {
        "robot": base / "robot.txt",
        "actions": base / "actions.json",
        "task": base / "task.txt",
        "scenario": base / "scenario.json",
        "rules": base / "controller_rules.json",
    }


def load_embodiment(name: str) -> EmbodimentConfig:
    paths = config_paths(name)
    return load_embodiment_config(paths["robot"], paths["actions"], paths["task"])


@pytest.fixture
def wheeled_config() -> EmbodimentConfig:
    return load_embodiment("wheeled")


@pytest.fixture
def limb_config() -> EmbodimentConfig:
    return load_embodiment("limb")


@pytest.fixture
def rov_config() -> EmbodimentConfig:
    return load_embodiment("rov")


@pytest.fixture
def wheeled_adapter():
    return load_scenario(config_paths("wheeled")["scenario"])


def scripted_controller(name: str) -> ScriptedBackend:
    return ScriptedBackend(load_rules(config_paths(name)["rules"]))


class QueueBackend:
    """Returns canned responses in order; records every request it saw."""

    backend_id = "queue"

    def __init__(self, responses: list[str]):
        self.responses = list(responses)
        self.requests: list[list] = []

    def complete(self, messages) -> str:
        self.requests.append(list(messages))
        if not self.responses:
            raise AssertionError("QueueBackend exhausted")
        return self.responses.pop(0)


def make_record(
    step: int,
    action: str = "forward",
    ack: str = "ok",
    observations: list[tuple[str, str]] | None = None,
    rng: Random | None = None,
) -> StepRecord:
    """Synthetic but structurally complete step record."""
    record = StepRecord(step=step)
    record.prompt_digest = f"digest{step:04d}"
    record.query = "Is the target visible?"
    record.observations = observations or [("cam_forward", "No: nothing visible.")]
    record.reasoning = "synthetic"
    record.action = action
    record.ack = ack
    record.proprio = {"joints": {}, "pose": [float(step), 0.0, 0.0]}
    if rng is not None:
        record.query = f"Is object {rng.randrange(100)} visible?"
    return record
