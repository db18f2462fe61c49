import json
import subprocess
import sys

from amalgam.cli import run


def invoke(args, out):
    return run(list(args) + ["--out", str(out)])


class TestCheckTuple:
    def test_theorem_accept(self, tmp_path, capsys):
        code = invoke(["check-tuple", "--set", "theorem", "--n", "1",
                       "--sigma", "0.3", "--qt", "2", "--rt", "inf",
                       "--q", "10", "--r", "inf"], tmp_path)
        assert code == 0
        assert "accept" in capsys.readouterr().out
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["verdict"] == "accept"

    def test_classical_reject_is_exit_zero(self, tmp_path, capsys):
        code = invoke(["check-tuple", "--set", "classical", "--q", "2",
                       "--r", "inf", "--n", "2"], tmp_path)
        assert code == 0  # a verdict, not a failure
        assert "reject" in capsys.readouterr().out

    def test_proposition_case_tag(self, tmp_path):
        code = invoke(["check-tuple", "--set", "proposition", "--n", "1",
                       "--sigma", "0.2", "--rt", "inf", "--r", "10"], tmp_path)
        assert code == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["case"] == "c3"

    def test_rational_exponents(self, tmp_path):
        code = invoke(["check-tuple", "--set", "classical", "--q", "10/3",
                       "--r", "5", "--n", "2"], tmp_path)
        assert code == 0
        report = json.loads((tmp_path / "report.json").read_text())
        # 2/(10/3) + 2/5 = 3/5 + 2/5 = 1 = n/2 exactly
        assert report["verdict"] == "accept"


class TestUsageErrors:
    def test_unknown_flag(self, tmp_path):
        assert invoke(["check-tuple", "--set", "theorem", "--n", "1",
                       "--bogus", "3"], tmp_path) == 2

    def test_missing_required(self, tmp_path):
        assert invoke(["check-tuple", "--n", "1"], tmp_path) == 2

    def test_unknown_command(self, tmp_path):
        assert run(["frobnicate"]) == 2

    def test_bad_value(self, tmp_path):
        assert invoke(["check-tuple", "--set", "classical", "--q", "spam",
                       "--r", "2", "--n", "1"], tmp_path) == 2


class TestManifest:
    def test_written_before_results_and_finalized(self, tmp_path):
        code = invoke(["norm", "--kind", "lebesgue", "--gen", "gaussian",
                       "--grid-npts", "128", "--p", "2"], tmp_path)
        assert code == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["status"] == "complete"
        assert manifest["wall_time_s"] is not None
        assert (tmp_path / "results.csv").exists()

    def test_env_var_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("AMALGAM_OUT", str(tmp_path / "envdir"))
        code = run(["norm", "--kind", "lebesgue", "--gen", "gaussian",
                    "--grid-npts", "128", "--p", "2"])
        assert code == 0
        assert (tmp_path / "envdir" / "results.csv").exists()


class TestDeterminism:
    def test_identical_csv_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["norm", "--kind", "amalgam", "--gen", "band-limited",
                "--seed", "7", "--grid-npts", "256", "--p", "2", "--q", "4"]
        assert invoke(args, a) == 0
        assert invoke(args, b) == 0
        assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()

    def test_region_mesh_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["region", "--set", "proposition", "--n", "1", "--sigma", "0.3",
                "--free", "rt,r", "--resolution", "16"]
        assert invoke(args, a) == 0
        assert invoke(args, b) == 0
        assert (a / "mesh.csv").read_bytes() == (b / "mesh.csv").read_bytes()


class TestConfigFile:
    def test_config_supplies_flags(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("sigma = 0.2\nrt = inf\nr = 10\nn = 1\n")
        code = run(["--config", str(cfg), "check-tuple", "--set", "proposition",
                    "--out", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["verdict"] == "accept"

    def test_command_line_overrides_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("r = 10\n")
        code = run(["--config", str(cfg), "check-tuple", "--set", "proposition",
                    "--n", "1", "--sigma", "0.3", "--rt", "inf",
                    "--r", "4", "--out", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["verdict"] == "reject"  # r=4 from the command line wins


class TestCommands:
    def test_evolve_writes_slices(self, tmp_path):
        code = invoke(["evolve", "--gen", "gaussian", "--grid-npts", "256",
                       "--times", "0.1,0.5,1.0", "--save-field"], tmp_path)
        assert code == 0
        lines = (tmp_path / "results.csv").read_text().strip().splitlines()
        assert len(lines) == 4  # header + 3 slices
        assert (tmp_path / "evolved.bin").exists()

    def test_norm_roundtrip_via_file(self, tmp_path):
        code = invoke(["evolve", "--gen", "gaussian", "--grid-npts", "128",
                       "--times", "0.2", "--save-field"], tmp_path)
        assert code == 0
        code = invoke(["norm", "--kind", "lebesgue", "--p", "2",
                       "--input", str(tmp_path / "evolved.bin")], tmp_path)
        assert code == 0

    def test_suite_small(self, tmp_path, capsys):
        code = invoke(["suite", "--corpus-size", "8"], tmp_path)
        assert code == 0
        assert "PASS" in capsys.readouterr().out

    def test_hls_reject_and_accept(self, tmp_path):
        assert invoke(["hls", "--p", "2", "--alpha", "0.5"], tmp_path) == 0
        assert invoke(["hls", "--p", "4/3", "--alpha", "0.5",
                       "--trials", "20"], tmp_path) == 0

    def test_bilinear_identity(self, tmp_path):
        code = invoke(["bilinear", "--grid-npts", "32", "--ntimes", "5",
                       "--pairs", "3"], tmp_path)
        assert code == 0

    def test_ratio(self, tmp_path):
        code = invoke(["ratio", "--n", "1", "--sigma", "0.3", "--qt", "2",
                       "--rt", "inf", "--q", "10", "--r", "inf",
                       "--grid-npts", "512", "--t-outer", "8"], tmp_path)
        assert code == 0

    def test_fit_decay_flat_case(self, tmp_path, capsys):
        code = invoke(["fit-decay", "--n", "1", "--sigma", "0.3",
                       "--rt", "inf", "--r", "inf", "--grid-l", "32",
                       "--grid-npts", "1024", "--per-decade", "8"], tmp_path)
        assert code == 0
        out = capsys.readouterr().out
        assert "small-time" in out and "large-time" in out


class TestConsoleScript:
    def test_help_runs(self):
        proc = subprocess.run([sys.executable, "-m", "amalgam.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "check-tuple" in proc.stdout
