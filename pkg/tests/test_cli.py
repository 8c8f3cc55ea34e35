import json

import pytest

import steklov.acceptance
from steklov.cli import main


def run(argv, tmp_path, monkeypatch, subdir="out"):
    out = tmp_path / subdir
    monkeypatch.delenv("STEKLOV_OUT", raising=False)
    code = main(argv + ["--out", str(out)])
    return code, out


class TestConstants:
    def test_json_output(self, tmp_path, monkeypatch, capsys):
        code, out = run(["constants"], tmp_path, monkeypatch)
        assert code == 0
        payload = json.loads((out / "constants.json").read_text())
        names = [c["name"] for c in payload]
        assert "T_{1,0}" in names and "t_10" in names
        t10 = next(c for c in payload if c["name"] == "T_{1,0}")
        assert abs(float(t10["value"]) - 1.1996786402577337) < 1e-12
        assert "T_{1,0}" in capsys.readouterr().out

    def test_csv_output(self, tmp_path, monkeypatch):
        code, out = run(["constants", "--format", "csv"], tmp_path, monkeypatch)
        assert code == 0
        lines = (out / "constants.csv").read_text().splitlines()
        assert lines[0] == "name,equation,value,residual"


class TestSpectrum:
    def test_closed_form_csv(self, tmp_path, monkeypatch):
        code, out = run(["spectrum", "--surface", "cylinder", "--T", "1.0",
                         "--count", "6", "--format", "csv"], tmp_path, monkeypatch)
        assert code == 0
        text = (out / "spectrum-cylinder-T1-closed-form.csv").read_text()
        assert text.splitlines()[0] == "k,sigma,sigma_bar,multiplicity"

    def test_both_methods_report_discrepancy(self, tmp_path, monkeypatch, capsys):
        code, out = run(["spectrum", "--surface", "disk", "--count", "5",
                         "--method", "both", "--resolution", "0.08"],
                        tmp_path, monkeypatch)
        assert code == 0
        rows = json.loads((out / "spectrum-disk-discrepancy.json").read_text())
        assert max(r["rel_discrepancy"] for r in rows[1:]) < 0.02
        assert "worst relative discrepancy" in capsys.readouterr().out

    def test_missing_T_is_usage_error(self, tmp_path, monkeypatch, capsys):
        code, _ = run(["spectrum", "--surface", "cylinder"], tmp_path, monkeypatch)
        assert code == 2
        assert "usage error" in capsys.readouterr().err

    def test_unknown_flag_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["spectrum", "--surface", "disk", "--bogus", "1"])
        assert err.value.code == 2

    def test_no_partial_output_on_usage_error(self, tmp_path, monkeypatch):
        code, out = run(["spectrum", "--surface", "mobius", "--T", "-1.0"],
                        tmp_path, monkeypatch)
        assert code == 2
        assert not out.exists() or not list(out.iterdir())


class TestSweepAndCompare:
    def test_two_disk_sweep(self, tmp_path, monkeypatch, capsys):
        code, out = run(["sweep", "--preset", "two-disks", "--k", "2",
                         "--rho", "0.1,0.05", "--resolution", "0.07"],
                        tmp_path, monkeypatch)
        assert code == 0
        files = sorted(p.name for p in out.iterdir())
        assert any(name.startswith("sweep-two-disks-") and name.endswith(".json")
                   for name in files)
        assert any(name.endswith(".csv") for name in files)
        assert "verdict: pass" in capsys.readouterr().out

    def test_mobius_critical_preset(self, tmp_path, monkeypatch, capsys):
        code, out = run(["sweep", "--preset", "mobius-critical", "--k", "2",
                         "--rho", "0.08", "--resolution", "0.07"],
                        tmp_path, monkeypatch)
        assert code == 0
        assert "verdict: pass" in capsys.readouterr().out

    def test_compare_annulus(self, tmp_path, monkeypatch, capsys):
        code, out = run(["compare", "--surface", "annulus", "--k", "2"],
                        tmp_path, monkeypatch)
        assert code == 0
        text = capsys.readouterr().out
        assert "margin +4.19" in text

    def test_compare_k1_usage_error(self, tmp_path, monkeypatch):
        code, _ = run(["compare", "--surface", "mobius", "--k", "1"],
                      tmp_path, monkeypatch)
        assert code == 2

    def test_sweep_rejects_increasing_rho(self, tmp_path, monkeypatch):
        code, _ = run(["sweep", "--preset", "two-disks", "--rho", "0.05,0.1"],
                      tmp_path, monkeypatch)
        assert code == 2


class TestDeterminism:
    def test_byte_identical_reruns(self, tmp_path, monkeypatch):
        argv = ["spectrum", "--surface", "mobius", "--T", "0.65848",
                "--count", "5", "--format", "csv", "--seed", "3"]
        _, out1 = run(argv, tmp_path, monkeypatch, "a")
        _, out2 = run(argv, tmp_path, monkeypatch, "b")
        for name in sorted(p.name for p in out1.iterdir()):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


class TestEnvOverride:
    def test_steklov_out_wins(self, tmp_path, monkeypatch):
        env_dir = tmp_path / "env"
        monkeypatch.setenv("STEKLOV_OUT", str(env_dir))
        code = main(["constants", "--out", str(tmp_path / "flag")])
        assert code == 0
        assert (env_dir / "constants.json").exists()
        assert not (tmp_path / "flag").exists()


class TestVerify:
    def test_exit_codes_follow_results(self, tmp_path, monkeypatch, capsys):
        from steklov.acceptance import CriterionResult

        def fake_pass():
            return [CriterionResult(1, "stub", True, 0.0, {})]

        def fake_fail():
            return [CriterionResult(1, "stub", True, 0.0, {}),
                    CriterionResult(2, "stub2", False, 0.0, {"why": "x"})]

        monkeypatch.setattr(steklov.acceptance, "run_all", fake_pass)
        code, out = run(["verify"], tmp_path, monkeypatch, "v1")
        assert code == 0
        assert (out / "verify.json").exists()

        monkeypatch.setattr(steklov.acceptance, "run_all", fake_fail)
        code, _ = run(["verify"], tmp_path, monkeypatch, "v2")
        assert code == 1
        assert "1/2 criteria passed" in capsys.readouterr().out
