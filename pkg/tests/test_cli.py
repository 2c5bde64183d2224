import json

import pytest

from formfind import amortizer, cli
from formfind.tasks import ShellTask, TowerTask


def write_model(out_dir, task_name="shells", kind="ours", task=None):
    task = task or (ShellTask(grid_side=6) if task_name == "shells" else TowerTask(5, 8))
    model = amortizer.build_model(kind, task, hidden=16, seed=0)
    path = out_dir / f"model_{task_name}_{kind}.json"
    path.write_text(amortizer.model_to_json(model))
    return path


class TestGenerate:
    def test_writes_jsonl(self, tmp_path, capsys):
        cli.main(["generate", "--task", "shells", "--count", "3", "--out", str(tmp_path)])
        lines = (tmp_path / "dataset_shells.jsonl").read_text().strip().splitlines()
        assert len(lines) == 3
        doc = json.loads(lines[0])
        assert doc["kind"] == "shell"
        assert len(doc["target"]) == 36

    def test_tower_dataset(self, tmp_path):
        cli.main(["generate", "--task", "towers", "--count", "2", "--out", str(tmp_path)])
        lines = (tmp_path / "dataset_towers.jsonl").read_text().strip().splitlines()
        assert len(lines) == 2
        assert json.loads(lines[0])["kind"] == "tower"


class TestOptimize:
    def test_writes_trace_and_obj(self, tmp_path, capsys):
        cli.main([
            "optimize", "--task", "shells", "--count", "1",
            "--opt-iters", "5", "--export-obj", "--out", str(tmp_path),
        ])
        trace = (tmp_path / "trace_shells_0.csv").read_text()
        assert trace.startswith("iteration,elapsed_ms,loss,grad_norm")
        obj = (tmp_path / "optimized_shells_0.obj").read_text()
        assert obj.startswith("v ")
        assert "best loss" in capsys.readouterr().out

    def test_warm_start_needs_model_file(self, tmp_path):
        with pytest.raises(SystemExit):
            cli.main([
                "optimize", "--task", "shells", "--count", "1",
                "--init", "warm_start", "--out", str(tmp_path),
            ])


class TestEval:
    def test_report_for_untrained_model(self, tmp_path, capsys):
        write_model(tmp_path)
        cli.main([
            "eval", "--task", "shells", "--methods", "ours",
            "--test-size", "2", "--out", str(tmp_path),
        ])
        report = json.loads((tmp_path / "report_shells.json").read_text())
        assert "ours" in report["methods"]
        assert "shape" in capsys.readouterr().out


class TestConfigFile:
    def test_config_sets_defaults(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"count": 2}))
        cli.main([
            "generate", "--task", "shells", "--out", str(tmp_path),
            "--config", str(cfg),
        ])
        lines = (tmp_path / "dataset_shells.jsonl").read_text().strip().splitlines()
        assert len(lines) == 2

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"banana": 1}))
        with pytest.raises(SystemExit):
            cli.main([
                "generate", "--task", "shells", "--out", str(tmp_path),
                "--config", str(cfg),
            ])


class TestParser:
    def test_requires_subcommand(self):
        with pytest.raises(SystemExit):
            cli.main([])

    def test_rejects_unknown_task(self):
        with pytest.raises(SystemExit):
            cli.main(["train", "--task", "bridges"])
