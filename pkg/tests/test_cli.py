import json
import os
import shutil
import subprocess
import sys

import pytest

from faceaes.cli import main


def run_cli(*argv):
    return main(list(argv))


def synth_dataset(out_dir, task="classification", n=24, blocks="a=5,b=3",
                  seed=0, extra=()):
    rc = run_cli("synth", "--out", str(out_dir), "--task", task,
                 "--n", str(n), "--blocks", blocks, "--seed", str(seed),
                 "--margin", "2.0", *extra)
    assert rc == 0
    return os.path.join(str(out_dir), "manifest.json")


EVAL_FAST = ("--rounds", "1", "--folds", "3", "--epochs", "6")


class TestSynthCommand:
    def test_writes_dataset(self, tmp_path, capsys):
        manifest = synth_dataset(tmp_path / "ds")
        out = capsys.readouterr().out
        assert "manifest:" in out and "truth:" in out
        assert os.path.exists(manifest)

    def test_bare_dims_get_generated_names(self, tmp_path):
        synth_dataset(tmp_path / "ds", blocks="6,4")
        doc = json.loads((tmp_path / "ds" / "manifest.json").read_text())
        assert sorted(doc["blocks"]) == ["S0", "S1"]

    def test_deterministic_across_runs(self, tmp_path):
        synth_dataset(tmp_path / "a", seed=3)
        synth_dataset(tmp_path / "b", seed=3)
        for name in ("manifest.json", "a.fvec", "b.fvec", "truth.json"):
            assert (tmp_path / "a" / name).read_bytes() == \
                (tmp_path / "b" / name).read_bytes()

    def test_bad_blocks_spec(self, tmp_path, capsys):
        rc = run_cli("synth", "--out", str(tmp_path / "d"), "--blocks", " , ")
        assert rc == 1
        assert "error:" in capsys.readouterr().err


class TestValidateCommand:
    def test_ok(self, tmp_path, capsys):
        manifest = synth_dataset(tmp_path / "ds")
        assert run_cli("validate", "--manifest", manifest) == 0
        out = capsys.readouterr().out
        assert "block a: 24 x 5 ok" in out
        assert "block b: 24 x 3 ok" in out
        assert "validate: ok" in out

    def test_missing_block_file(self, tmp_path, capsys):
        manifest = synth_dataset(tmp_path / "ds")
        os.remove(tmp_path / "ds" / "b.fvec")
        assert run_cli("validate", "--manifest", manifest) == 1
        err = capsys.readouterr().err
        assert "block b: FAIL" in err

    def test_corrupted_payload(self, tmp_path, capsys):
        manifest = synth_dataset(tmp_path / "ds")
        path = tmp_path / "ds" / "a.fvec"
        data = bytearray(path.read_bytes())
        data[-8] ^= 0xFF  # inside the payload, before the trailing checksum
        path.write_bytes(bytes(data))
        assert run_cli("validate", "--manifest", manifest) == 1
        assert "block a: FAIL" in capsys.readouterr().err

    def test_row_count_mismatch(self, tmp_path, capsys):
        manifest = synth_dataset(tmp_path / "ds")
        doc = json.loads((tmp_path / "ds" / "manifest.json").read_text())
        doc["samples"] = doc["samples"][:-1]
        (tmp_path / "ds" / "manifest.json").write_text(json.dumps(doc))
        assert run_cli("validate", "--manifest", manifest) == 1
        assert "FAIL" in capsys.readouterr().err


class TestEvaluateCommand:
    def test_svm_run_artifacts(self, tmp_path, capsys):
        manifest = synth_dataset(tmp_path / "ds")
        out = tmp_path / "run"
        rc = run_cli("evaluate", "--manifest", manifest, "--method", "svm",
                     "--out", str(out), *EVAL_FAST)
        assert rc == 0
        stdout = capsys.readouterr().out
        assert "GCR" in stdout and "seed: 0" in stdout
        for name in ("report.json", "summary.txt", "rounds.png",
                     "resolved_config.json"):
            assert (out / name).exists()
        report = json.loads((out / "report.json").read_text())
        assert report["metric_name"] == "gcr"
        assert report["rounds"] == 1 and report["n_folds"] == 3

    def test_no_figures(self, tmp_path):
        manifest = synth_dataset(tmp_path / "ds")
        out = tmp_path / "run"
        rc = run_cli("evaluate", "--manifest", manifest, "--method", "svm",
                     "--out", str(out), "--no-figures", *EVAL_FAST)
        assert rc == 0
        assert (out / "report.json").exists()
        assert not (out / "rounds.png").exists()

    def test_svr_run(self, tmp_path, capsys):
        manifest = synth_dataset(tmp_path / "ds", task="regression")
        out = tmp_path / "run"
        rc = run_cli("evaluate", "--manifest", manifest, "--method", "svr",
                     "--out", str(out), *EVAL_FAST)
        assert rc == 0
        assert "LCC" in capsys.readouterr().out

    def test_ga_run_writes_trace(self, tmp_path):
        manifest = synth_dataset(tmp_path / "ds")
        out = tmp_path / "run"
        rc = run_cli("evaluate", "--manifest", manifest, "--method", "ga",
                     "--task", "classification", "--out", str(out),
                     "--ga-pop", "6", "--ga-gens", "2", *EVAL_FAST)
        assert rc == 0
        assert (out / "ga_trace.csv").exists()
        assert (out / "ga_trace.png").exists()
        report = json.loads((out / "report.json").read_text())
        assert report["predictor"] == "ga"
        assert len(report["selected_counts"]) == 1
        trace = (out / "ga_trace.csv").read_text().strip().splitlines()
        assert trace[0].startswith("generation,")
        assert len(trace) == 4  # header + generations 0..2

    def test_method_task_conflict(self, tmp_path, capsys):
        manifest = synth_dataset(tmp_path / "ds")
        rc = run_cli("evaluate", "--manifest", manifest, "--method", "svm",
                     "--task", "regression", "--out", str(tmp_path / "r"))
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_method(self, tmp_path, capsys):
        manifest = synth_dataset(tmp_path / "ds")
        rc = run_cli("evaluate", "--manifest", manifest,
                     "--out", str(tmp_path / "r"))
        assert rc == 1
        assert "--method" in capsys.readouterr().err

    def test_ga_requires_task(self, tmp_path, capsys):
        manifest = synth_dataset(tmp_path / "ds")
        rc = run_cli("evaluate", "--manifest", manifest, "--method", "ga",
                     "--out", str(tmp_path / "r"))
        assert rc == 1
        assert "--task" in capsys.readouterr().err

    def test_block_subset(self, tmp_path):
        manifest = synth_dataset(tmp_path / "ds")
        out = tmp_path / "run"
        rc = run_cli("evaluate", "--manifest", manifest, "--method", "svm",
                     "--blocks", "a", "--out", str(out), *EVAL_FAST)
        assert rc == 0
        resolved = json.loads((out / "resolved_config.json").read_text())
        assert resolved["blocks_used"] == ["a"]
        assert resolved["dim"] == 5

    def test_deterministic_report(self, tmp_path):
        manifest = synth_dataset(tmp_path / "ds")
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run_cli("evaluate", "--manifest", manifest, "--method",
                           "svm", "--out", str(out), "--seed", "7",
                           *EVAL_FAST) == 0
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
        assert (a / "rounds.png").read_bytes() == (b / "rounds.png").read_bytes()


class TestConfigPrecedence:
    def test_file_then_flags(self, tmp_path):
        manifest = synth_dataset(tmp_path / "ds")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"rounds": 1, "folds": 3, "epochs": 5,
                                   "seed": 11}))
        out = tmp_path / "run"
        rc = run_cli("evaluate", "--manifest", manifest, "--method", "svm",
                     "--config", str(cfg), "--seed", "42", "--out", str(out))
        assert rc == 0
        resolved = json.loads((out / "resolved_config.json").read_text())
        assert resolved["rounds"] == 1  # from file
        assert resolved["folds"] == 3  # from file
        assert resolved["epochs"] == 5  # from file
        assert resolved["seed"] == 42  # flag beats file
        report = json.loads((out / "report.json").read_text())
        assert report["master_seed"] == 42 and report["rounds"] == 1

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        manifest = synth_dataset(tmp_path / "ds")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"roundz": 2}))
        rc = run_cli("evaluate", "--manifest", manifest, "--method", "svm",
                     "--config", str(cfg), "--out", str(tmp_path / "r"))
        assert rc == 1
        assert "roundz" in capsys.readouterr().err

    def test_threads_env_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FACEAES_THREADS", "2")
        manifest = synth_dataset(tmp_path / "ds")
        out = tmp_path / "run"
        rc = run_cli("evaluate", "--manifest", manifest, "--method", "svm",
                     "--out", str(out), *EVAL_FAST)
        assert rc == 0
        resolved = json.loads((out / "resolved_config.json").read_text())
        assert resolved["threads"] == 2


class TestSweepCommand:
    def test_artifacts_and_rows(self, tmp_path, capsys):
        manifest = synth_dataset(tmp_path / "ds")
        out = tmp_path / "run"
        rc = run_cli("sweep", "--manifest", manifest, "--task",
                     "classification", "--out", str(out),
                     "--ga-pop", "6", "--ga-gens", "2", *EVAL_FAST)
        assert rc == 0
        stdout = capsys.readouterr().out
        assert "#features" in stdout
        for name in ("sweep.txt", "sweep.csv", "sweep_reports.json",
                     "sweep.png", "resolved_config.json"):
            assert (out / name).exists()
        csv_lines = (out / "sweep.csv").read_text().strip().splitlines()
        # two blocks: a, b, a+b, then the GA row
        assert len(csv_lines) == 5
        reports = json.loads((out / "sweep_reports.json").read_text())
        assert sorted(reports) == ["a", "a+b", "a+b/ga", "b"]

    def test_no_ga(self, tmp_path):
        manifest = synth_dataset(tmp_path / "ds")
        out = tmp_path / "run"
        rc = run_cli("sweep", "--manifest", manifest, "--task",
                     "classification", "--no-ga", "--out", str(out),
                     "--no-figures", *EVAL_FAST)
        assert rc == 0
        csv_lines = (out / "sweep.csv").read_text().strip().splitlines()
        assert len(csv_lines) == 4
        assert all(line.split(",")[3] == "0" for line in csv_lines[1:])

    def test_requires_task(self, tmp_path, capsys):
        manifest = synth_dataset(tmp_path / "ds")
        rc = run_cli("sweep", "--manifest", manifest,
                     "--out", str(tmp_path / "r"))
        assert rc == 1
        assert "--task" in capsys.readouterr().err


def canonical_dataset(tmp_path, drop=None, region_mode=None):
    out = tmp_path / "canon"
    rc = run_cli("synth", "--out", str(out), "--task", "classification",
                 "--n", "4", "--blocks", "IQ=4096,IA=4096,FA=2048",
                 "--seed", "5")
    assert rc == 0
    if drop or region_mode:
        doc = json.loads((out / "manifest.json").read_text())
        if drop:
            del doc["blocks"][drop]
        if region_mode:
            doc.setdefault("metadata", {})["region_mode"] = region_mode
        (out / "manifest.json").write_text(json.dumps(doc))
    return os.path.join(str(out), "manifest.json")


class TestExtractCheckCommand:
    def test_ok_with_crcs(self, tmp_path, capsys):
        manifest = canonical_dataset(tmp_path, region_mode="face")
        assert run_cli("extract-check", "--manifest", manifest) == 0
        out = capsys.readouterr().out
        assert "block IQ: 4 x 4096 crc32 0x" in out
        assert "block IA: 4 x 4096 crc32 0x" in out
        assert "block FA: 4 x 2048 crc32 0x" in out
        assert "region mode: face" in out
        assert "extract-check: ok" in out

    def test_missing_canonical_block(self, tmp_path, capsys):
        manifest = canonical_dataset(tmp_path, drop="FA")
        assert run_cli("extract-check", "--manifest", manifest) == 1
        assert "missing canonical block(s) ['FA']" in capsys.readouterr().err

    def test_corrupt_block_fails(self, tmp_path, capsys):
        manifest = canonical_dataset(tmp_path)
        path = tmp_path / "canon" / "IA.fvec"
        data = bytearray(path.read_bytes())
        data[-10] ^= 0x01
        path.write_bytes(bytes(data))
        assert run_cli("extract-check", "--manifest", manifest) == 1
        assert "block IA: FAIL" in capsys.readouterr().err


class TestEntryPoint:
    def test_console_script(self, tmp_path):
        exe = shutil.which("faceaes")
        if exe is None:
            pytest.skip("console script not installed")
        proc = subprocess.run(
            [exe, "synth", "--out", str(tmp_path / "d"), "--n", "8",
             "--blocks", "x=4"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert "manifest:" in proc.stdout

    def test_module_invocation(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "faceaes.cli", "synth", "--out",
             str(tmp_path / "d"), "--n", "8", "--blocks", "x=4"],
            capture_output=True, text=True)
        assert proc.returncode == 0
