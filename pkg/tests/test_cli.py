"""Command-line behaviors: exit codes, artifacts, determinism."""

import json

import pytest

from adcradio.cli import main
from adcradio.fileio import read_bits, read_records, read_trace


@pytest.fixture()
def mini_scenario(tmp_path):
    doc = {
        "schema_version": 1,
        "seed": 42,
        "channel": {"g_tx_dbi": 6.5, "distance_m": 1.0},
        "dut": {
            "n_paths": 2,
            "adc": {"sample_rate_hz": 16000.0, "samples_per_block": 16},
            "default_coupling": {"noise_sigma": 2.0},
            "coupling": [
                {
                    "path": 1,
                    "resonances": [
                        {"center_hz": 500e6, "bandwidth_hz": 60e6, "peak_gain": 30.0}
                    ],
                    "noise_sigma": 2.0,
                }
            ],
        },
        "transmission": {
            "path": 1,
            "config_index": 57,
            "freq_hz": 500e6,
            "power_dbm": 30.0,
            "bit_rate_hz": 1000.0,
            "dc_window_symbols": 41,
        },
    }
    path = tmp_path / "mini.json"
    path.write_text(json.dumps(doc))
    return path


def run_cli(*argv):
    return main([str(a) for a in argv])


class TestLinkBudget:
    def test_reference_20m_values(self, capsys):
        code = run_cli(
            "linkbudget", "--power-dbm", 43, "--gain-tx", 6.5,
            "--distance", 20, "--freq", 868e6,
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "57.24 dB" in out
        assert "-7.74 dBm" in out

    def test_zero_distance_is_usage_error(self, capsys):
        code = run_cli("linkbudget", "--power-dbm", 0, "--distance", 0, "--freq", 868e6)
        assert code == 2
        assert "error" in capsys.readouterr().err


class TestSweepCommand:
    def sweep(self, scenario, out, seed=None, extra=()):
        args = [
            "sweep", "--scenario", scenario, "--out", out,
            "--paths", "all", "--configs", "0,57",
            "--freq-points", "5",
        ]
        if seed is not None:
            args += ["--seed", seed]
        return run_cli(*args, *extra)

    def test_produces_results_and_manifest(self, mini_scenario, tmp_path):
        out = tmp_path / "run1"
        assert self.sweep(mini_scenario, out) == 0
        header, records = read_records(out / "results.jsonl")
        assert len(records) == 2 * 2 * 5
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "sweep"
        assert manifest["seed"] == 42
        assert str(out / "results.jsonl") in manifest["outputs"]

    def test_same_seed_byte_identical(self, mini_scenario, tmp_path):
        self.sweep(mini_scenario, tmp_path / "a", seed=7)
        self.sweep(mini_scenario, tmp_path / "b", seed=7)
        a = (tmp_path / "a" / "results.jsonl").read_bytes()
        b = (tmp_path / "b" / "results.jsonl").read_bytes()
        assert a == b

    def test_missing_scenario_exit_2(self, tmp_path, capsys):
        code = self.sweep(tmp_path / "ghost.json", tmp_path / "out")
        assert code == 2
        assert "scenario not found" in capsys.readouterr().err


class TestSimulateAndDemod:
    def test_round_trip_through_files(self, mini_scenario, tmp_path, capsys):
        trace_path = tmp_path / "link.trace"
        code = run_cli(
            "simulate", "--scenario", mini_scenario, "--bits", 400,
            "--out", trace_path,
        )
        assert code == 0
        trace = read_trace(trace_path)
        assert trace.meta["samples_per_symbol"] == 16
        assert len(trace) == 400 * 16  # payload duration at the ADC rate
        bits_path = trace_path.with_suffix(".bits")
        assert len(read_bits(bits_path)) == 400

        out_bits = tmp_path / "decoded.bits"
        # no --dc-window: the calibrated window must travel in the trace meta
        code = run_cli(
            "demod", "--trace", trace_path, "--out", out_bits,
            "--reference", bits_path,
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out.splitlines()[-1])
        assert payload["error_count"] == 0

    def test_deterministic_trace(self, mini_scenario, tmp_path):
        a, b = tmp_path / "a.trace", tmp_path / "b.trace"
        run_cli("simulate", "--scenario", mini_scenario, "--bits", 100, "--out", a)
        run_cli("simulate", "--scenario", mini_scenario, "--bits", 100, "--out", b)
        assert a.read_bytes() == b.read_bytes()

    def test_zero_bits_header_only(self, mini_scenario, tmp_path):
        out = tmp_path / "empty.trace"
        assert run_cli("simulate", "--scenario", mini_scenario, "--bits", 0, "--out", out) == 0
        assert len(read_trace(out)) == 0

    def test_wrong_trace_schema_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.trace"
        bad.write_text(json.dumps({"schema_version": 9, "kind": "adc-trace"}) + "\n")
        assert run_cli("demod", "--trace", bad) == 2

    def test_incompatible_bit_rate_exit_2(self, mini_scenario, tmp_path):
        code = run_cli(
            "simulate", "--scenario", mini_scenario, "--bits", 10,
            "--bit-rate", 7000.0, "--out", tmp_path / "x.trace",
        )
        assert code == 2


class TestBerCommand:
    def test_compare_mode(self, tmp_path, capsys):
        a = tmp_path / "a.bits"
        b = tmp_path / "b.bits"
        a.write_text("0\n1\n1\n0\n")
        b.write_text("0\n1\n0\n0\n")
        assert run_cli("ber", "--decoded", a, "--reference", b) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["error_count"] == 1
        assert report["ber"] == 0.25

    def test_out_of_range_power_is_runtime_failure(self, mini_scenario, capsys):
        # source limit is 43 dBm: exit code 1, not a usage error
        code = run_cli("ber", "--scenario", mini_scenario, "--powers", "200", "--bits", 100)
        assert code == 1
        assert "power" in capsys.readouterr().err

    def test_curve_mode(self, mini_scenario, tmp_path, capsys):
        out = tmp_path / "curve.json"
        code = run_cli(
            "ber", "--scenario", mini_scenario, "--powers", "10,30",
            "--bits", 300, "--out", out,
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["kind"] == "ber-curve"
        assert len(doc["points"]) == 2
        assert doc["points"][0]["ber"] >= doc["points"][1]["ber"]


class TestReportCommand:
    @pytest.fixture()
    def results(self, mini_scenario, tmp_path):
        out = tmp_path / "run"
        run_cli(
            "sweep", "--scenario", mini_scenario, "--out", out,
            "--configs", "recommended", "--freq-points", "9",
        )
        return out / "results.jsonl"

    def test_heatmap(self, results, tmp_path):
        prefix = tmp_path / "heat"
        assert run_cli("report", "--results", results, "--kind", "heatmap", "--out", prefix) == 0
        svg = (tmp_path / "heat.svg").read_text()
        assert svg.startswith("<svg") and "http" not in svg.split("xmlns")[0]
        rows = (tmp_path / "heat.csv").read_text().splitlines()
        assert rows[0] == "path_index,config_index,peak_freq_hz,peak_snr"
        assert len(rows) == 1 + 2 * 8

    def test_spectrum_defaults_to_best_cell(self, results, tmp_path):
        prefix = tmp_path / "spec"
        assert run_cli("report", "--results", results, "--kind", "spectrum", "--out", prefix) == 0
        rows = (tmp_path / "spec.csv").read_text().splitlines()
        assert len(rows) == 1 + 9
        # the planted 500 MHz resonance is the visible peak (grid is 100 MHz)
        best = max(
            (r.split(",") for r in rows[1:] if not r.endswith(("high", "none"))),
            key=lambda f: float(f[1]),
        )
        assert abs(float(best[0]) - 500e6) <= 100e6

    def test_eye_from_trace(self, mini_scenario, tmp_path):
        trace_path = tmp_path / "eye.trace"
        run_cli("simulate", "--scenario", mini_scenario, "--bits", 200, "--out", trace_path)
        prefix = tmp_path / "eye"
        assert run_cli("report", "--results", trace_path, "--kind", "eye", "--out", prefix) == 0
        assert (tmp_path / "eye.svg").exists()
        assert (tmp_path / "eye.csv").exists()

    def test_ber_curve_report(self, mini_scenario, tmp_path):
        curve = tmp_path / "curve.json"
        run_cli("ber", "--scenario", mini_scenario, "--powers", "10,30", "--bits", 200, "--out", curve)
        prefix = tmp_path / "bercurve"
        assert run_cli("report", "--results", curve, "--kind", "ber-curve", "--out", prefix) == 0
        assert (tmp_path / "bercurve.svg").exists()

    def test_empty_results_exit_2(self, tmp_path, capsys):
        empty = tmp_path / "empty.jsonl"
        empty.write_text(json.dumps({"schema_version": 1, "kind": "sensitivity-records"}) + "\n")
        code = run_cli("report", "--results", empty, "--kind", "heatmap", "--out", tmp_path / "x")
        assert code == 2
        assert "no records" in capsys.readouterr().err


class TestProtocolLoopbackCommand:
    def test_loopback_identical(self, mini_scenario, capsys):
        assert run_cli("protocol-loopback", "--scenario", mini_scenario) == 0
        assert "byte-identical" in capsys.readouterr().out


class TestBundledScenarioNames:
    def test_bundled_name_resolution(self, tmp_path):
        out = tmp_path / "demo.trace"
        code = run_cli("simulate", "--scenario", "link_3m", "--bits", 50, "--out", out)
        assert code == 0


class TestBundledLinkReproduction:
    """The shipped near/far scenarios decode as calibrated, end to end
    through the file-based CLI workflow."""

    def decode(self, name, tmp_path, capsys):
        trace = tmp_path / f"{name}.trace"
        assert run_cli("simulate", "--scenario", name, "--bits", 12565, "--out", trace) == 0
        capsys.readouterr()
        code = run_cli(
            "demod", "--trace", trace,
            "--reference", trace.with_suffix(".bits"),
            "--out", tmp_path / f"{name}.decoded",
        )
        assert code == 0
        return json.loads(capsys.readouterr().out.splitlines()[-1])

    def test_3m_trace_error_free(self, tmp_path, capsys):
        report = self.decode("link_3m", tmp_path, capsys)
        assert report["error_count"] == 0

    def test_20m_trace_ber_band(self, tmp_path, capsys):
        report = self.decode("link_20m", tmp_path, capsys)
        assert 0.03 <= report["ber"] <= 0.10
