import json
import os

import pytest

from hamcap.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCapacity:
    def test_prints_value(self, capsys):
        code, out, _ = run_cli(capsys, "capacity", "--R", "1", "--u", "0",
                               "--ell", "2", "--a", "-inf")
        assert code == 0
        assert out.strip() == "2"

    def test_writes_artifacts(self, capsys, tmp_path):
        out_dir = str(tmp_path / "cap")
        code, _, _ = run_cli(capsys, "capacity", "--R", "2", "--u", "1",
                             "--ell", "-1", "--a", "5",
                             "--output-dir", out_dir)
        assert code == 0
        data = json.loads(open(os.path.join(out_dir, "capacity.json")).read())
        assert data["value"] == 4.0
        manifest = json.loads(open(os.path.join(out_dir, "manifest.json")).read())
        assert "capacity.json" in manifest["files"]

    def test_bad_flags_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["capacity", "--R", "1"])
        assert exc.value.code == 2


class TestHomology:
    def test_transfer_rank_row(self, capsys):
        code, out, _ = run_cli(capsys, "homology", "--n", "1", "--table",
                               "t-rank", "--a", "1.5", "--c", "2", "--ell",
                               "1", "--u", "0", "--R", "1")
        assert code == 0
        assert json.loads(out)["dims"] == [1, 2, 1, 0]

    def test_betti_table(self, capsys):
        code, out, _ = run_cli(capsys, "homology", "--table", "betti",
                               "--m", "3")
        assert code == 0
        assert json.loads(out)["dims"] == [1, 3, 3, 1]

    def test_morse_table(self, capsys):
        code, out, _ = run_cli(capsys, "homology", "--table", "morse-full",
                               "--n", "1")
        assert code == 0
        data = json.loads(out)
        assert data["indexCounts"] == [1, 3, 3, 1]
        assert data["minValue"] == -3.0


class TestSharpness:
    def test_pass_exit_zero(self, capsys):
        code, out, _ = run_cli(capsys, "sharpness", "--R", "1", "--u", "0",
                               "--n", "1", "--ell", "1", "--a", "-inf",
                               "--delta", "0.1", "--seed", "3")
        assert code == 0
        data = json.loads(out)
        assert data["pass"] is True
        assert data["markedInfimum"] == 0.9


class TestExists:
    def test_deep_plateau_pass(self, capsys):
        code, out, _ = run_cli(capsys, "exists", "--R", "1", "--u", "0",
                               "--n", "1", "--family", "plateau", "--s", "-4",
                               "--c", "1.5", "--ell", "1", "--seed", "2")
        assert code == 0
        data = json.loads(out)
        assert data["pass"] is True
        assert data["countLowerBound"] == 4


class TestOrbitsAndSpectrum:
    def test_orbits_outputs(self, capsys, tmp_path):
        out_dir = str(tmp_path / "orb")
        code, out, _ = run_cli(capsys, "orbits", "--R", "1", "--u", "0",
                               "--n", "1", "--family", "plateau", "--s", "-4",
                               "--c", "1", "--ell", "1", "--seeds", "300",
                               "--seed", "11", "--output-dir", out_dir)
        assert code == 0
        data = json.loads(out)
        assert len(data["analytic"]) == 4
        csv_text = open(os.path.join(out_dir, "orbits.csv")).read()
        assert csv_text.splitlines()[0] == "action,kind,level,dimension,morseBott"
        assert len(csv_text.splitlines()) == 5

    def test_spectrum_csv(self, capsys):
        code, out, _ = run_cli(capsys, "spectrum", "--R", "1", "--u", "0",
                               "--n", "1", "--family", "plateau", "--s", "4",
                               "--c", "1", "--ell", "2", "--format", "csv")
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 3
        actions = [float(line.split(",")[0]) for line in lines[1:]]
        assert actions == sorted(actions)

    def test_byte_stable_outputs(self, capsys):
        args = ("spectrum", "--R", "1", "--u", "0", "--n", "1", "--family",
                "plateau", "--s", "-2", "--c", "1", "--ell", "1")
        _, out1, _ = run_cli(capsys, *args)
        _, out2, _ = run_cli(capsys, *args)
        assert out1 == out2


class TestPlotProfile:
    def test_svg_written_with_manifest(self, capsys, tmp_path):
        out_dir = str(tmp_path / "plot")
        code, _, _ = run_cli(capsys, "plot-profile", "--R", "1", "--u", "0",
                             "--family", "plateau", "--s", "4", "--c", "1",
                             "--ell", "2", "--output-dir", out_dir)
        assert code == 0
        svg = open(os.path.join(out_dir, "profile.svg")).read()
        assert svg.startswith("<svg")
        assert "polyline" in svg
        assert svg.count("stroke-dasharray") == 2  # one tangent per root
        manifest = json.loads(open(os.path.join(out_dir, "manifest.json")).read())
        assert manifest["files"] == ["profile.svg"]

    def test_sharpness_plot_to_stdout(self, capsys):
        code, out, _ = run_cli(capsys, "plot-profile", "--R", "1", "--u", "0",
                               "--family", "sharpness", "--ell", "1",
                               "--a", "-inf", "--delta", "0.1")
        assert code == 0
        assert out.startswith("<svg")
        assert "stroke-dasharray" not in out  # no slope-ell roots exist


class TestErrors:
    def test_infeasible_reports_error(self, capsys):
        code, _, err = run_cli(capsys, "sharpness", "--R", "1", "--u", "0",
                               "--n", "1", "--ell", "1", "--a", "-inf",
                               "--delta", "2.0")
        assert code == 1
        assert "delta" in err
