"""On-disk formats shared by the CLI and the library.

All formats are line-oriented, LF-terminated text with a JSON header line
carrying a schema_version, so they stay bit-exact, diffable, and readable:

    trace files    - header object, then one decimal ADC code per line
    results files  - header object, then one sensitivity record object per line
    bits files     - ASCII '0'/'1', one per line
    manifests      - a single JSON object tying outputs to their inputs/seed
"""

from __future__ import annotations

import json
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .backend import PathConfig, ReceptionPathId
from .receiver import BerReport
from .scenario import ScenarioError, config_from_dict, config_to_dict
from .signals import BitSequence
from .simulator import AdcConfig, AdcTrace
from .sweep import SensitivityRecord, SnrEstimate

TRACE_SCHEMA_VERSION = 1
RESULTS_SCHEMA_VERSION = 1
MANIFEST_SCHEMA_VERSION = 1


class FileFormatError(ValueError):
    """Unreadable or schema-incompatible artifact file."""


# -- trace files ---------------------------------------------------------------


def write_trace(path: str | Path, trace: AdcTrace, extra_meta: dict | None = None) -> None:
    meta = dict(trace.meta)
    if extra_meta:
        meta.update(extra_meta)
    config = meta.get("config")
    if isinstance(config, PathConfig):
        meta["config"] = config_to_dict(config)
    header = {
        "schema_version": TRACE_SCHEMA_VERSION,
        "kind": "adc-trace",
        "resolution_bits": trace.config.resolution_bits,
        "sample_rate_hz": trace.config.sample_rate_hz,
        "oversampling_ratio": trace.config.oversampling_ratio,
        "samples_per_block": trace.config.samples_per_block,
        **meta,
    }
    with open(path, "w", newline="\n") as f:
        f.write(json.dumps(header) + "\n")
        for code in trace.samples:
            f.write(f"{int(code)}\n")


def read_trace(path: str | Path) -> AdcTrace:
    path = Path(path)
    if not path.exists():
        raise FileFormatError(f"trace not found: {path}")
    with open(path) as f:
        first = f.readline()
        try:
            header = json.loads(first)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: bad trace header: {exc}") from None
        if header.get("schema_version") != TRACE_SCHEMA_VERSION:
            raise FileFormatError(
                f"{path}: unsupported trace schema_version {header.get('schema_version')!r}"
            )
        if header.get("kind") != "adc-trace":
            raise FileFormatError(f"{path}: not a trace file (kind={header.get('kind')!r})")
        samples = []
        for lineno, line in enumerate(f, start=2):
            text = line.strip()
            if not text:
                continue
            try:
                samples.append(int(text))
            except ValueError:
                raise FileFormatError(f"{path}:{lineno}: invalid sample {text!r}") from None
    config = AdcConfig(
        resolution_bits=int(header["resolution_bits"]),
        sample_rate_hz=float(header["sample_rate_hz"]),
        oversampling_ratio=int(header["oversampling_ratio"]),
        samples_per_block=int(header["samples_per_block"]),
    )
    meta = {
        k: v
        for k, v in header.items()
        if k
        not in (
            "schema_version",
            "kind",
            "resolution_bits",
            "sample_rate_hz",
            "oversampling_ratio",
            "samples_per_block",
        )
    }
    return AdcTrace(samples=np.asarray(samples, np.int32), config=config, meta=meta)


# -- results files -------------------------------------------------------------


def record_to_dict(record: SensitivityRecord) -> dict:
    out = {
        "path": {"index": record.path.index, "label": record.path.label},
        "config": config_to_dict(record.config),
        "freq_hz": record.freq_hz,
        "mean_on": record.mean_on,
        "mean_off": record.mean_off,
        "diff": record.diff,
        "var_off": record.var_off,
        "snr": record.snr.to_json(),
    }
    if record.failed:
        out["failed"] = True
        out["error"] = record.error
    return out


def record_from_dict(obj: dict) -> SensitivityRecord:
    try:
        path = ReceptionPathId(
            index=int(obj["path"]["index"]), label=str(obj["path"].get("label", ""))
        )
        return SensitivityRecord(
            path=path,
            config=config_from_dict(obj["config"]),
            freq_hz=float(obj["freq_hz"]),
            mean_on=obj["mean_on"],
            mean_off=obj["mean_off"],
            diff=obj["diff"],
            var_off=obj["var_off"],
            snr=SnrEstimate.from_json(obj["snr"]),
            failed=bool(obj.get("failed", False)),
            error=obj.get("error"),
        )
    except (KeyError, TypeError, ValueError, ScenarioError) as exc:
        raise FileFormatError(f"bad sensitivity record {obj!r}: {exc}") from None


def write_records(path: str | Path, records, header_extra: dict | None = None) -> None:
    header = {
        "schema_version": RESULTS_SCHEMA_VERSION,
        "kind": "sensitivity-records",
        **(header_extra or {}),
    }
    with open(path, "w", newline="\n") as f:
        f.write(json.dumps(header) + "\n")
        for record in records:
            f.write(json.dumps(record_to_dict(record)) + "\n")


def read_records(path: str | Path) -> tuple[dict, list[SensitivityRecord]]:
    path = Path(path)
    if not path.exists():
        raise FileFormatError(f"results not found: {path}")
    with open(path) as f:
        try:
            header = json.loads(f.readline())
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: bad results header: {exc}") from None
        if header.get("schema_version") != RESULTS_SCHEMA_VERSION:
            raise FileFormatError(
                f"{path}: unsupported results schema_version "
                f"{header.get('schema_version')!r}"
            )
        if header.get("kind") != "sensitivity-records":
            raise FileFormatError(f"{path}: not a results file (kind={header.get('kind')!r})")
        records = []
        for lineno, line in enumerate(f, start=2):
            text = line.strip()
            if not text:
                continue
            try:
                records.append(record_from_dict(json.loads(text)))
            except json.JSONDecodeError as exc:
                raise FileFormatError(f"{path}:{lineno}: invalid JSON: {exc}") from None
    return header, records


# -- bits files ----------------------------------------------------------------


def write_bits(path: str | Path, bits: BitSequence) -> None:
    with open(path, "w", newline="\n") as f:
        for b in bits.bits:
            f.write("1\n" if b else "0\n")


def read_bits(path: str | Path) -> BitSequence:
    path = Path(path)
    if not path.exists():
        raise FileFormatError(f"bits file not found: {path}")
    values = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            text = line.strip()
            if not text:
                continue
            if text not in ("0", "1"):
                raise FileFormatError(f"{path}:{lineno}: expected 0 or 1, got {text!r}")
            values.append(int(text))
    return BitSequence(bits=np.asarray(values, np.uint8))


# -- BER report ----------------------------------------------------------------


def ber_report_to_dict(report: BerReport) -> dict:
    out = asdict(report)
    out["error_positions"] = list(report.error_positions)
    out["burst_runs"] = [list(run) for run in report.burst_runs]
    return out


# -- run manifests ---------------------------------------------------------------


def write_manifest(
    path: str | Path,
    command: str,
    argv: list[str],
    seed: int | None,
    outputs: list[str | Path],
    scenario: str | Path | None = None,
    extra: dict | None = None,
) -> None:
    from . import __version__

    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "kind": "run-manifest",
        "tool": "adcradio",
        "version": __version__,
        "command": command,
        "argv": list(argv),
        "seed": seed,
        "scenario": str(scenario) if scenario is not None else None,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "outputs": [str(p) for p in outputs],
        **(extra or {}),
    }
    with open(path, "w", newline="\n") as f:
        f.write(json.dumps(manifest, indent=2) + "\n")
