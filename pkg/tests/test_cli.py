import json
import shutil
import subprocess
from pathlib import Path

import pytest

from levelset_lab import MODULE_VERSIONS, __version__
from levelset_lab.cli import EXIT_GATE, EXIT_OK, EXIT_USAGE, config_hash, main
from levelset_lab.simulate import read_path_csv, read_paths_binary

CONFIGS = Path(__file__).resolve().parents[1] / "scripts" / "configs"


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg, indent=2) + "\n")
    return p


def run(sub, cfg_path, out, *extra):
    return main([sub, "--config", str(cfg_path), "--out", str(out), *extra])


CANTOR_DIM = {"experiment": "dim", "seed": 3, "set": {"kind": "cantor", "ratio": 1 / 3, "depth": 10},
              "method": "box", "expected": 0.6309297535714574, "tolerance": {"box": 0.03}}


class TestReports:
    def test_symbol_report(self, tmp_path):
        assert run("symbol-report", CONFIGS / "symbol_report.json", tmp_path) == EXIT_OK
        s = json.loads((tmp_path / "symbol-report" / "summary.json").read_text())
        assert s["passed"] and s["experiment"] == "symbol-report"
        assert len(s["config_hash"]) == 64
        assert s["versions"] == {"package": __version__, **MODULE_VERSIONS}
        for f in s["files"]:
            assert (tmp_path / "symbol-report" / f).exists()

    def test_config_hash_tracks_seed_and_body(self, tmp_path):
        cfg = write(tmp_path, CANTOR_DIM)
        assert run("dim", cfg, tmp_path / "a") == EXIT_OK
        assert run("dim", cfg, tmp_path / "b", "--seed", "4") == EXIT_OK
        ha = json.loads((tmp_path / "a" / "dim" / "summary.json").read_text())["config_hash"]
        hb = json.loads((tmp_path / "b" / "dim" / "summary.json").read_text())["config_hash"]
        body = {k: v for k, v in CANTOR_DIM.items() if k not in ("experiment", "seed")}
        assert ha == config_hash(body, 3) and hb == config_hash(body, 4) and ha != hb

    def test_box_count_table(self, tmp_path):
        assert run("dim", write(tmp_path, CANTOR_DIM), tmp_path) == EXIT_OK
        lines = (tmp_path / "dim" / "box_counts.csv").read_text().splitlines()
        assert lines[0] == "k,count" and lines[1] == "0,1"

    def test_gate_failure(self, tmp_path):
        cfg = write(tmp_path, {**CANTOR_DIM, "expected": 0.9})
        assert run("dim", cfg, tmp_path) == EXIT_GATE
        s = json.loads((tmp_path / "dim" / "summary.json").read_text())
        assert not s["passed"] and not s["gates"][0]["passed"]

    def test_simulate_writes_paths(self, tmp_path):
        assert run("simulate", CONFIGS / "simulate.json", tmp_path) == EXIT_OK
        d = tmp_path / "simulate"
        paths = read_paths_binary(d / "paths.bin")
        assert len(paths) == 4
        assert (read_path_csv(d / "path_0002.csv").values == paths[2].values).all()


class TestUsageErrors:
    def test_malformed_json_reports_position(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text('{\n  "experiment": "dim",\n  "seed": 3,\n  "set": {"kind": "cantor",,}\n}\n')
        assert run("dim", p, tmp_path) == EXIT_USAGE
        assert f"{p}:4:" in capsys.readouterr().err

    def test_unknown_key_reports_line(self, tmp_path, capsys):
        p = write(tmp_path, {**CANTOR_DIM, "bogus_key": 1})
        assert run("dim", p, tmp_path) == EXIT_USAGE
        err = capsys.readouterr().err
        line = next(i for i, s in enumerate(p.read_text().splitlines(), 1) if "bogus_key" in s)
        assert "bogus_key" in err and f":{line}:" in err

    def test_experiment_mismatch(self, tmp_path):
        assert run("indices", write(tmp_path, CANTOR_DIM), tmp_path) == EXIT_USAGE

    def test_missing_seed(self, tmp_path, capsys):
        cfg = {k: v for k, v in CANTOR_DIM.items() if k != "seed"}
        assert run("dim", write(tmp_path, cfg), tmp_path) == EXIT_USAGE
        assert "seed" in capsys.readouterr().err

    def test_polar_points_rejected(self, tmp_path, capsys):
        cfg = {"experiment": "zero-level-dim", "seed": 1, "alpha": 0.8, "paths": 2, "steps": 1024}
        assert run("zero-level-dim", write(tmp_path, cfg), tmp_path) == EXIT_USAGE
        assert "polar" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run("dim", tmp_path / "nope.json", tmp_path) == EXIT_USAGE

    @pytest.mark.parametrize("argv", [["no-such-experiment", "--config", "x.json"], ["dim"], []])
    def test_bad_invocation(self, argv):
        assert main(argv) == EXIT_USAGE

    def test_version(self):
        assert main(["--version"]) == EXIT_OK


@pytest.mark.skipif(shutil.which("levelset-lab") is None, reason="console script not installed")
def test_console_script(tmp_path):
    r = subprocess.run(["levelset-lab", "dim", "--config", str(write(tmp_path, CANTOR_DIM)), "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == EXIT_OK
    assert (tmp_path / "dim" / "summary.json").exists()
