"""CLI subcommands driven through click's test runner."""

import json

import pytest
from click.testing import CliRunner

from higs.cli import main
from higs.graph import RelationEdge, RelationType, SceneGraph
from higs.serialization import save_scene

from conftest import make_node


@pytest.fixture
def runner():
    return CliRunner()


def generate_scene(runner, tmp_path, steps="desk:a lamp and a book", seed=5):
    scene = tmp_path / "scene.json"
    session = tmp_path / "session.json"
    result = runner.invoke(
        main,
        [
            "generate",
            "--text",
            "a bedroom with a bed, a desk and a wardrobe",
            "--steps",
            steps,
            "--seed",
            str(seed),
            "--out",
            str(scene),
            "--session",
            str(session),
        ],
    )
    assert result.exit_code == 0, result.output
    return scene, session


class TestGenerate:
    def test_writes_scene_and_session(self, runner, tmp_path):
        scene, session = generate_scene(runner, tmp_path)
        assert scene.exists() and session.exists()
        doc = json.loads(scene.read_text())
        assert doc["version"] == "higs-scene/1"
        assert len(doc["nodes"]) >= 5

    def test_unknown_anchor_category_fails(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["generate", "--text", "a desk", "--steps", "spaceship:a lamp", "--out", str(tmp_path / "s.json")],
        )
        assert result.exit_code != 0
        assert "spaceship" in result.output


class TestValidate:
    def test_golden_scene_passes(self, runner, tmp_path):
        scene, _ = generate_scene(runner, tmp_path)
        result = runner.invoke(main, ["validate", str(scene)])
        assert result.exit_code == 0, result.output
        assert "0 violation" in result.output

    def test_json_mode(self, runner, tmp_path):
        scene, _ = generate_scene(runner, tmp_path)
        result = runner.invoke(main, ["validate", str(scene), "--json"])
        assert json.loads(result.output) == {"violations": []}

    def test_corrupt_file_fails(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        result = runner.invoke(main, ["validate", str(bad)])
        assert result.exit_code != 0


class TestOptimize:
    def lamp_off_desk_fixture(self, tmp_path):
        g = SceneGraph()
        g.add_node(make_node(1, "desk", pos=(0, 0, 0.375), half=(0.6, 0.35, 0.375)))
        g.add_node(make_node(2, "lamp", pos=(1.0, 0.0, 0.95), half=(0.09, 0.09, 0.2)))
        g.add_edge(RelationEdge(1, 2, RelationType.ON))
        path = tmp_path / "fixture.json"
        path.write_bytes(save_scene(g))
        return path

    def test_reports_single_stability_correction(self, runner, tmp_path):
        fixture = self.lamp_off_desk_fixture(tmp_path)
        out = tmp_path / "fixed.json"
        report = tmp_path / "report.json"
        result = runner.invoke(
            main, ["optimize", str(fixture), "--out", str(out), "--report", str(report), "--json"]
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(report.read_text())
        stability = [c for c in doc["corrections"] if c["reason"] == "stability"]
        assert len(stability) == 1 and stability[0]["nid"] == 2
        assert runner.invoke(main, ["validate", str(out)]).exit_code == 0

    def test_stats_counts_violation_before_fix(self, runner, tmp_path):
        fixture = self.lamp_off_desk_fixture(tmp_path)
        stats = json.loads(runner.invoke(main, ["stats", str(fixture), "--json"]).output)
        assert stats["onViolations"] == 1


class TestReplay:
    def test_replay_ok(self, runner, tmp_path):
        _, session = generate_scene(runner, tmp_path)
        result = runner.invoke(main, ["replay", str(session)])
        assert result.exit_code == 0, result.output

    def test_tampered_session_diverges(self, runner, tmp_path):
        _, session = generate_scene(runner, tmp_path)
        doc = json.loads(session.read_text())
        doc["scene"]["nodes"][1]["pos"][0] += 0.5
        session.write_text(json.dumps(doc))
        result = runner.invoke(main, ["replay", str(session)])
        assert result.exit_code == 1
        assert "differs" in result.output


class TestStats:
    def test_three_step_session_scale(self, runner, tmp_path):
        scene, _ = generate_scene(
            runner,
            tmp_path,
            steps="desk:a lamp, a book and a mug;bed:a plant and two books",
        )
        stats = json.loads(runner.invoke(main, ["stats", str(scene), "--json"]).output)
        assert stats["nodes"] >= 10
        assert stats["strongDepth"] >= 2
        assert stats["onViolations"] == 0
        assert stats["categories"]["floor"] == 1
