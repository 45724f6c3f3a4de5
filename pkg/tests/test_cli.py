"""Command-line interface tests: exit codes, CSV contract, presets."""
from __future__ import annotations

import subprocess
import sys

import pytest

from dpimsim.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from dpimsim.harness import CSV_COLUMNS


def _run(argv):
    return main(argv)


class TestExitCodes:
    def test_success(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        code = _run(["simulate", "--scheme", "dpim", "--detector", "osd",
                     "--snr-start", "10", "--snr-stop", "12", "--snr-step", "2",
                     "--packets", "50", "--out", str(out)])
        assert code == EXIT_OK
        assert out.exists()
        captured = capsys.readouterr()
        assert "wrote" in captured.out

    def test_invalid_configuration(self, tmp_path, capsys):
        code = _run(["simulate", "--scheme", "mdpim", "--detector", "osd",
                     "--packets", "10",
                     "--out", str(tmp_path / "r.csv")])
        assert code == EXIT_CONFIG
        assert "configuration error" in capsys.readouterr().err

    def test_invalid_barrier_divisibility(self, tmp_path, capsys):
        code = _run(["simulate", "--scheme", "bdpim", "--detector",
                     "bdpim-osd", "--K", "10", "--Ns", "95", "--AL", "0.86",
                     "--packets", "10", "--out", str(tmp_path / "r.csv")])
        assert code == EXIT_CONFIG

    def test_invalid_channel_spec(self, tmp_path, capsys):
        code = _run(["simulate", "--channel", "gg:asdf",
                     "--packets", "10", "--out", str(tmp_path / "r.csv")])
        assert code == EXIT_CONFIG

    def test_numerical_failure(self, tmp_path, capsys):
        # Exhaustive sequence detection over a full-size packet exceeds the
        # enumeration cap.
        code = _run(["simulate", "--scheme", "dpim", "--detector", "mlsd",
                     "--Ns", "100", "--snr-start", "10", "--snr-stop", "10",
                     "--packets", "10", "--out", str(tmp_path / "r.csv")])
        assert code == EXIT_NUMERICAL
        assert "numerical failure" in capsys.readouterr().err


class TestSimulateOutput:
    def test_csv_schema(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        code = _run(["simulate", "--scheme", "bdpim", "--detector",
                     "bdpim-osd", "--K", "10", "--AL", "0.86",
                     "--snr-start", "12", "--snr-stop", "14", "--snr-step", "1",
                     "--packets", "40", "--seed", "3", "--out", str(out)])
        assert code == EXIT_OK
        lines = out.read_text().strip().split("\n")
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 4
        row = lines[1].split(",")
        assert row[1] == "bdpim"
        assert row[2] == "bdpim-osd"
        assert row[3] == "0"
        assert row[10] == "3"
        # Simulation and both bound columns populated.
        assert row[4] != "" and row[7] != "" and row[8] != ""

    def test_fading_channel_flag(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        code = _run(["simulate", "--channel", "gg:11.6,10.1",
                     "--snr-start", "20", "--snr-stop", "20",
                     "--packets", "30", "--out", str(out)])
        assert code == EXIT_OK

    def test_coded_flag_recorded(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        code = _run(["simulate", "--coded", "--scheme", "dpim",
                     "--detector", "osd", "--snr-start", "11",
                     "--snr-stop", "11", "--packets", "30", "--out", str(out)])
        assert code == EXIT_OK
        row = out.read_text().strip().split("\n")[1].split(",")
        assert row[3] == "1"


class TestBoundsCommand:
    def test_writes_bounds_only_rows(self, tmp_path, capsys):
        out = tmp_path / "b.csv"
        code = _run(["bounds", "--scheme", "dpim", "--detector", "otd",
                     "--snr-start", "10", "--snr-stop", "14", "--snr-step", "2",
                     "--out", str(out)])
        assert code == EXIT_OK
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 4
        row = lines[1].split(",")
        assert row[4] == "" and row[7] != ""

    def test_no_bound_for_baseline(self, tmp_path, capsys):
        code = _run(["bounds", "--scheme", "ppm", "--detector", "osd",
                     "--out", str(tmp_path / "b.csv")])
        assert code == EXIT_CONFIG


class TestOptimizeCommand:
    def test_single_point(self, capsys):
        code = _run(["optimize", "--scheme", "bdpim", "--detector",
                     "bdpim-osd", "--K", "10", "--snr", "16"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "A_L*=" in out and "A_H*=" in out

    def test_respects_power_constraint(self, capsys):
        code = _run(["optimize", "--K", "5", "--snr", "16",
                     "--scheme", "bdpim", "--detector", "bdpim-osd"])
        assert code == EXIT_OK
        text = capsys.readouterr().out
        a_l = float(text.split("A_L*=")[1].split()[0])
        a_h = float(text.split("A_H*=")[1].split()[0])
        assert 4 * a_l + a_h == pytest.approx(5.0, abs=1e-4)


class TestSweepPresets:
    def test_single_curve_preset(self, tmp_path, capsys):
        out = tmp_path / "fig4.csv"
        code = _run(["sweep", "--preset", "fig4", "--packets", "20",
                     "--out", str(out)])
        assert code == EXIT_OK
        lines = out.read_text().strip().split("\n")
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 1 + 17  # 8..24 dB inclusive

    def test_comparison_preset_stacks_curves(self, tmp_path, capsys):
        out = tmp_path / "fig8.csv"
        code = _run(["sweep", "--preset", "fig8", "--packets", "10",
                     "--out", str(out)])
        assert code == EXIT_OK
        lines = out.read_text().strip().split("\n")
        # Five curves over 10..20 dB share one file and one header.
        assert len(lines) == 1 + 5 * 11
        schemes = {l.split(",")[1] for l in lines[1:]}
        assert schemes == {"mdpim", "dpim", "bdpim"}

    def test_unknown_preset_rejected(self, tmp_path):
        with pytest.raises(SystemExit):
            _run(["sweep", "--preset", "fig3", "--out", str(tmp_path / "x.csv")])


class TestConsoleScript:
    def test_installed_entry_point(self, tmp_path):
        out = tmp_path / "r.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "dpimsim.cli", "simulate",
             "--snr-start", "10", "--snr-stop", "10", "--packets", "20",
             "--out", str(out)],
            capture_output=True, text=True, timeout=300,
        )
        assert proc.returncode == EXIT_OK, proc.stderr
        assert out.exists()
