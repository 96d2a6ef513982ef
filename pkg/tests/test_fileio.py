"""Trace/results/bits file formats and scenario documents."""

import json

import numpy as np
import pytest

from adcradio.backend import ReceptionPathId
from adcradio.fileio import (
    FileFormatError,
    read_bits,
    read_records,
    read_trace,
    write_bits,
    write_records,
    write_trace,
)
from adcradio.scenario import (
    ScenarioError,
    bundled_scenario_path,
    build_rig,
    load_scenario,
    scenario_from_dict,
    save_scenario,
)
from adcradio.signals import generate_bits
from adcradio.simulator import AdcConfig, AdcTrace
from adcradio.sweep import SensitivityRecord, SnrEstimate, enumerate_configs


def minimal_scenario_doc(**overrides):
    doc = {
        "schema_version": 1,
        "seed": 5,
        "dut": {
            "n_paths": 2,
            "adc": {"sample_rate_hz": 10000.0, "samples_per_block": 8},
            "default_coupling": {"noise_sigma": 1.0},
        },
    }
    doc.update(overrides)
    return doc


class TestTraceFiles:
    def test_round_trip(self, tmp_path):
        trace = AdcTrace(
            samples=np.array([0, 17, 4095, 2048], np.int32),
            config=AdcConfig(samples_per_block=4),
            meta={"path": 3, "seed": 9},
        )
        path = tmp_path / "t.trace"
        write_trace(path, trace, extra_meta={"samples_per_symbol": 2})
        back = read_trace(path)
        np.testing.assert_array_equal(back.samples, trace.samples)
        assert back.config == trace.config
        assert back.meta["path"] == 3
        assert back.meta["samples_per_symbol"] == 2

    def test_lf_terminated_decimal_lines(self, tmp_path):
        trace = AdcTrace(samples=np.array([1, 2], np.int32), config=AdcConfig())
        path = tmp_path / "t.trace"
        write_trace(path, trace)
        raw = path.read_bytes()
        assert raw.endswith(b"\n") and b"\r" not in raw
        lines = raw.decode().splitlines()
        assert lines[1:] == ["1", "2"]

    def test_wrong_schema_version_rejected(self, tmp_path):
        path = tmp_path / "bad.trace"
        path.write_text(json.dumps({"schema_version": 99, "kind": "adc-trace"}) + "\n1\n")
        with pytest.raises(FileFormatError, match="schema_version"):
            read_trace(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileFormatError, match="not found"):
            read_trace(tmp_path / "nope.trace")

    def test_garbage_sample_line(self, tmp_path):
        path = tmp_path / "bad.trace"
        header = {
            "schema_version": 1,
            "kind": "adc-trace",
            "resolution_bits": 12,
            "sample_rate_hz": 1000.0,
            "oversampling_ratio": 1,
            "samples_per_block": 4,
        }
        path.write_text(json.dumps(header) + "\n12\nxyz\n")
        with pytest.raises(FileFormatError, match="invalid sample"):
            read_trace(path)


class TestResultsFiles:
    def make_records(self):
        cfg = enumerate_configs()[57]
        path = ReceptionPathId(4, "P4")
        return [
            SensitivityRecord(path, cfg, 2e8, 2050.0, 2048.0, 2.0, 0.5, SnrEstimate.finite(9.0)),
            SensitivityRecord(path, cfg, 3e8, 2060.0, 2048.0, 12.0, 0.0, SnrEstimate.high()),
            SensitivityRecord(path, cfg, 4e8, 2048.0, 2048.0, 0.0, 0.0, SnrEstimate.none()),
            SensitivityRecord(
                path, cfg, 5e8, None, None, None, None, SnrEstimate.none(),
                failed=True, error="injected",
            ),
        ]

    def test_round_trip(self, tmp_path):
        records = self.make_records()
        path = tmp_path / "results.jsonl"
        write_records(path, records, header_extra={"seed": 5})
        header, back = read_records(path)
        assert header["schema_version"] == 1
        assert header["seed"] == 5
        assert len(back) == 4
        assert back[0].snr == SnrEstimate.finite(9.0)
        assert back[1].snr.is_high
        assert back[2].snr.is_none
        assert back[3].failed and back[3].error == "injected"
        assert back[0].config == records[0].config

    def test_snr_encoding_on_the_wire(self, tmp_path):
        path = tmp_path / "results.jsonl"
        write_records(path, self.make_records())
        lines = path.read_text().splitlines()
        assert json.loads(lines[1])["snr"] == {"db": 9.0}
        assert json.loads(lines[2])["snr"] == "high"
        assert json.loads(lines[3])["snr"] == "none"

    def test_schema_version_is_first_line(self, tmp_path):
        path = tmp_path / "results.jsonl"
        write_records(path, [])
        first = json.loads(path.read_text().splitlines()[0])
        assert first["schema_version"] == 1

    def test_wrong_kind_rejected(self, tmp_path):
        path = tmp_path / "results.jsonl"
        path.write_text(json.dumps({"schema_version": 1, "kind": "something"}) + "\n")
        with pytest.raises(FileFormatError, match="not a results file"):
            read_records(path)


class TestBitsFiles:
    def test_round_trip(self, tmp_path):
        bits = generate_bits(100, seed=3)
        path = tmp_path / "payload.bits"
        write_bits(path, bits)
        assert read_bits(path) == bits

    def test_rejects_non_binary_lines(self, tmp_path):
        path = tmp_path / "bad.bits"
        path.write_text("0\n1\n2\n")
        with pytest.raises(FileFormatError, match="expected 0 or 1"):
            read_bits(path)


class TestScenario:
    def test_minimal_document(self):
        s = scenario_from_dict(minimal_scenario_doc())
        assert s.n_paths == 2
        assert s.adc.samples_per_block == 8
        assert s.default_model.noise_sigma == 1.0

    def test_round_trip(self, tmp_path):
        s = load_scenario(bundled_scenario_path("link_20m"))
        path = tmp_path / "copy.json"
        save_scenario(s, path)
        again = load_scenario(path)
        assert again.n_paths == s.n_paths
        assert again.coupling == s.coupling
        assert again.adc == s.adc
        assert again.transmission == s.transmission

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError, match="not found"):
            load_scenario(tmp_path / "ghost.json")

    def test_bad_schema_version(self):
        with pytest.raises(ScenarioError, match="schema_version"):
            scenario_from_dict(minimal_scenario_doc(schema_version=3))

    def test_unknown_coupling_keys_rejected(self):
        doc = minimal_scenario_doc()
        doc["dut"]["coupling"] = [{"path": 0, "resonance_gain": 5}]
        with pytest.raises(ScenarioError, match="unknown keys"):
            scenario_from_dict(doc)

    def test_out_of_range_path_rejected(self):
        doc = minimal_scenario_doc()
        doc["dut"]["coupling"] = [{"path": 7, "noise_sigma": 1.0}]
        with pytest.raises(ScenarioError, match="outside"):
            scenario_from_dict(doc)

    def test_config_specific_entry(self):
        doc = minimal_scenario_doc()
        doc["dut"]["coupling"] = [
            {
                "path": 1,
                "config": {
                    "mode": "analog",
                    "pupd": "pull_up",
                    "output_value": "low",
                    "output_type": "open_drain",
                },
                "noise_sigma": 2.0,
            }
        ]
        s = scenario_from_dict(doc)
        ((key, model),) = s.coupling.items()
        assert key[0] == 1 and key[1] is not None
        assert model.noise_sigma == 2.0

    def test_build_rig_reproducible(self):
        s = load_scenario(bundled_scenario_path("link_3m"))
        backend_a, _ = build_rig(s)
        backend_b, _ = build_rig(s)
        assert backend_a.dut.seed == backend_b.dut.seed == s.seed

    def test_bundled_unknown_name(self):
        with pytest.raises(ScenarioError, match="no bundled scenario"):
            bundled_scenario_path("does_not_exist")
