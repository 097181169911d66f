import json

import pytest

from langloop.config import (
    ActionHistory,
    ProprioState,
    config_from_dict,
    config_to_dict,
    load_action_interface,
    load_embodiment_config,
    load_robot_description,
    load_task_spec,
    validate_action,
)
from langloop.errors import DuplicateActionName, MissingFile, SchemaViolation, UnknownAction

from conftest import EMBODIMENTS, config_paths, load_embodiment


@pytest.mark.parametrize(
    "name,expected_k", [("wheeled", 4), ("limb", 9), ("rov", 6)]
)
def test_shipped_configs_action_counts(name, expected_k):
    config = load_embodiment(name)
    assert config.interface.action_count == expected_k


@pytest.mark.parametrize("name", EMBODIMENTS)
def test_every_action_validates_against_own_interface(name):
    interface = load_embodiment(name).interface
    for action in interface.actions:
        assert validate_action(action.name, interface) is action


@pytest.mark.parametrize("name", EMBODIMENTS)
def test_config_round_trip(name):
    config = load_embodiment(name)
    assert config_from_dict(config_to_dict(config)) == config


def test_missing_file():
    paths = config_paths("wheeled")
    with pytest.raises(MissingFile):
        load_embodiment_config("nope.txt", paths["actions"], paths["task"])


def test_duplicate_action_name(tmp_path):
    doc = {"actions": [
        {"name": "forward", "description": "go"},
        {"name": "forward", "description": "go again"},
    ]}
    p = tmp_path / "actions.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(DuplicateActionName):
        load_action_interface(p)


def test_unknown_top_level_key_rejected(tmp_path):
    p = tmp_path / "actions.json"
    p.write_text(json.dumps({"actions": [], "extra": 1}))
    with pytest.raises(SchemaViolation, match="extra"):
        load_action_interface(p)


def test_unknown_action_key_named(tmp_path):
    doc = {"actions": [{"name": "go", "description": "d", "speed": 3}]}
    p = tmp_path / "actions.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(SchemaViolation, match="speed"):
        load_action_interface(p)


def test_identifier_grammar_enforced(tmp_path):
    doc = {"actions": [{"name": "Forward", "description": "d"}]}
    p = tmp_path / "actions.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(SchemaViolation, match="Forward"):
        load_action_interface(p)


def test_degenerate_parameter_range(tmp_path):
    doc = {"actions": [{
        "name": "go",
        "description": "d",
        "parameters": [{"name": "thrust", "min": 5, "max": 5, "default": 5}],
    }]}
    p = tmp_path / "actions.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(SchemaViolation, match="thrust"):
        load_action_interface(p)


def test_validate_action_known_and_unknown(rov_config):
    assert validate_action("yaw_left", rov_config.interface).name == "yaw_left"
    with pytest.raises(UnknownAction) as exc:
        validate_action("fly", rov_config.interface)
    assert exc.value.name == "fly"
    assert "surge_forward" in exc.value.admissible


def test_validate_action_case_sensitive(wheeled_config):
    with pytest.raises(UnknownAction):
        validate_action("Forward", wheeled_config.interface)


def test_robot_description_requires_cameras_line(tmp_path):
    p = tmp_path / "robot.txt"
    p.write_text("A robot with no declared cameras.\n")
    with pytest.raises(SchemaViolation, match="cameras"):
        load_robot_description(p)


def test_robot_description_bad_facing(tmp_path):
    p = tmp_path / "robot.txt"
    p.write_text("A robot.\nCameras: cam_a=sideways\n")
    with pytest.raises(SchemaViolation, match="sideways"):
        load_robot_description(p)


def test_robot_description_facings_and_axes(limb_config):
    robot = limb_config.robot
    assert robot.camera_ids == ("cam_a", "cam_b", "cam_side_l", "cam_side_r")
    assert robot.facing_of("cam_b").name == "front-right"
    assert robot.axes == ("horizontal", "vertical", "rotational", "finger")


def test_task_target_and_hint_lines(wheeled_config):
    task = wheeled_config.task
    assert task.target_label == "fire extinguisher"
    assert task.success_hint is not None
    assert "fire extinguisher" in task.objective
    assert "Target:" not in task.objective


def test_empty_task_objective_rejected(tmp_path):
    p = tmp_path / "task.txt"
    p.write_text("Target: thing\n")
    with pytest.raises(SchemaViolation):
        load_task_spec(p)


def test_action_history_strictly_increasing():
    history = ActionHistory()
    history.append(1, "forward", {})
    history.append(2, "forward", {})
    with pytest.raises(ValueError):
        history.append(4, "forward", {})


def test_proprio_serialization_is_ordered():
    proprio = ProprioState(joint_displacements={"b": 1.0, "a": 2.0}, pose_estimate=(1, 2, 90))
    assert list(proprio.to_dict()["joints"]) == ["a", "b"]
