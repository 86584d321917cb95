import json

import pytest
import yaml

from trajtalk import (
    ApplyParams,
    FileFormatError,
    load_landmarks,
    load_params,
    load_replies,
    load_trajectory,
    save_trajectory,
)


class TestTrajectoryFiles:
    def test_yaml_round_trip(self, tmp_path, simple_traj):
        path = tmp_path / "traj.yaml"
        save_trajectory(path, simple_traj)
        assert load_trajectory(path) == simple_traj

    def test_json_round_trip(self, tmp_path, simple_traj):
        path = tmp_path / "traj.json"
        save_trajectory(path, simple_traj)
        assert json.loads(path.read_text())  # really JSON
        assert load_trajectory(path) == simple_traj

    def test_errors_name_file_and_record(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("- {t: 0, pos: [0, 0, 0], vel: 0.1}\n")
        with pytest.raises(FileFormatError, match=r"bad\.yaml.*record 0"):
            load_trajectory(path)

    def test_invariant_violations_reported(self, tmp_path):
        path = tmp_path / "bad.yaml"
        records = [
            {"t": 1.0, "pos": [0, 0, 0], "vel": 0.1, "force": 1},
            {"t": 0.5, "pos": [1, 0, 0], "vel": 0.1, "force": 1},
        ]
        path.write_text(yaml.safe_dump(records))
        with pytest.raises(FileFormatError, match="strictly increasing"):
            load_trajectory(path)

    def test_not_a_list(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("hello: world\n")
        with pytest.raises(FileFormatError, match="list"):
            load_trajectory(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileFormatError, match="gone"):
            load_trajectory(tmp_path / "gone.yaml")


class TestLandmarkFiles:
    def test_round_trip(self, tmp_path, body):
        path = tmp_path / "lms.yaml"
        path.write_text(yaml.safe_dump(body.to_dict()))
        assert load_landmarks(path) == body

    def test_rejects_non_mapping(self, tmp_path):
        path = tmp_path / "lms.yaml"
        path.write_text("- a\n- b\n")
        with pytest.raises(FileFormatError, match="mapping"):
            load_landmarks(path)


class TestParamsFiles:
    def test_none_gives_defaults(self):
        assert load_params(None) == ApplyParams()

    def test_overrides(self, tmp_path):
        path = tmp_path / "params.yaml"
        path.write_text("k_p: 0.25\nv_max: 0.2\n")
        params = load_params(path)
        assert params.k_p == 0.25 and params.v_max == 0.2 and params.sigma == 0.07

    def test_unknown_key_named(self, tmp_path):
        path = tmp_path / "params.yaml"
        path.write_text("flux_capacitor: 1.21\n")
        with pytest.raises(FileFormatError, match="flux_capacitor"):
            load_params(path)


class TestRepliesFiles:
    def test_loads_mapping(self, tmp_path):
        path = tmp_path / "replies.yaml"
        path.write_text('"go faster": "```yaml\\n```\\nok"\n')
        assert load_replies(path) == {"go faster": "```yaml\n```\nok"}

    def test_rejects_non_string_values(self, tmp_path):
        path = tmp_path / "replies.yaml"
        path.write_text("go faster: 3\n")
        with pytest.raises(FileFormatError, match="utterance strings"):
            load_replies(path)
