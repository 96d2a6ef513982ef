"""Command-line surface for every workflow in the toolkit.

Exit codes: 0 success, 1 runtime failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .backend import BackendError, ReceptionPathId, RfSourceError, RfStimulus
from .fileio import (
    FileFormatError,
    ber_report_to_dict,
    read_bits,
    read_records,
    read_trace,
    write_bits,
    write_manifest,
    write_records,
    write_trace,
)
from .plots import render_ber_curve, render_eye, render_heatmap, render_spectrum
from .protocol import DutProtocolServer, LoopbackTransport, SerialBackend
from .receiver import DemodParams, ber, demodulate, ideal_sync_ber_experiment
from .scenario import ScenarioError, bundled_scenario_path, build_rig, load_scenario
from .signals import (
    BitSequence,
    LinkBudget,
    dbm_to_mw,
    fspl_db,
    generate_bits,
    incident_power_dbm,
    modulate_ook,
)
from .sweep import (
    SweepPlan,
    classify_sensitive,
    enumerate_configs,
    peak_snr,
    recommended_configs,
    run_sweep,
    spectra_from_records,
)


class UsageError(Exception):
    """Bad flags or unusable input files (exit code 2)."""


def _resolve_scenario(spec: str):
    """Accept a filesystem path or the name of a bundled scenario."""
    path = Path(spec)
    if path.exists():
        return load_scenario(path), path
    if "/" not in spec and "\\" not in spec:
        try:
            bundled = bundled_scenario_path(spec)
            return load_scenario(bundled), bundled
        except ScenarioError:
            pass
    raise ScenarioError(f"scenario not found: {spec}")


def _parse_paths(arg: str, n_paths: int, labels) -> list[ReceptionPathId]:
    def make(i: int) -> ReceptionPathId:
        label = labels[i] if i < len(labels) else f"P{i}"
        return ReceptionPathId(index=i, label=label)

    if arg == "all":
        return [make(i) for i in range(n_paths)]
    try:
        indices = [int(tok) for tok in arg.split(",") if tok != ""]
    except ValueError:
        raise UsageError(f"--paths must be 'all' or comma-separated indices, got {arg!r}")
    if not indices:
        raise UsageError("--paths is empty")
    for i in indices:
        if not 0 <= i < n_paths:
            raise UsageError(f"path {i} outside 0..{n_paths - 1}")
    return [make(i) for i in indices]


def _parse_configs(arg: str):
    if arg == "recommended":
        return recommended_configs()
    if arg == "all":
        return enumerate_configs()
    try:
        indices = [int(tok) for tok in arg.split(",") if tok != ""]
    except ValueError:
        raise UsageError(
            f"--configs must be 'recommended', 'all', or comma-separated "
            f"indices into the 64-entry enumeration, got {arg!r}"
        )
    allc = enumerate_configs()
    for i in indices:
        if not 0 <= i < len(allc):
            raise UsageError(f"config index {i} outside 0..{len(allc) - 1}")
    return [allc[i] for i in indices]


# -- subcommands -----------------------------------------------------------------


def cmd_sweep(args) -> int:
    scenario, scenario_path = _resolve_scenario(args.scenario)
    seed = args.seed if args.seed is not None else scenario.seed
    backend, source = build_rig(scenario, seed=seed)
    paths = _parse_paths(args.paths, scenario.n_paths, scenario.path_labels)
    configs = _parse_configs(args.configs)
    freqs = np.linspace(args.freq_start, args.freq_stop, args.freq_points)
    plan = SweepPlan(
        paths=tuple(paths),
        configs=tuple(configs),
        freqs_hz=tuple(freqs),
        power_dbm=args.power_dbm,
        samples_per_block=args.samples_per_block,
        blocks_per_state=args.blocks_per_state,
        adc=scenario.adc,
    )
    records = run_sweep(plan, backend, source)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results_path = out_dir / "results.jsonl"
    write_records(results_path, records, header_extra={"seed": seed})
    sensitive = [s for s in spectra_from_records(records) if classify_sensitive(s, args.threshold_db)]
    write_manifest(
        out_dir / "manifest.json",
        command="sweep",
        argv=sys.argv[1:],
        seed=seed,
        outputs=[results_path],
        scenario=scenario_path,
        extra={"records": len(records), "sensitive_cells": len(sensitive)},
    )
    print(
        f"{len(records)} records -> {results_path} "
        f"({len(sensitive)} sensitive cells at {args.threshold_db:.1f} dB)"
    )
    return 0


def cmd_demod(args) -> int:
    trace = read_trace(args.trace)
    sps = args.samples_per_symbol
    if sps is None:
        sps = trace.meta.get("samples_per_symbol")
    if sps is None:
        raise UsageError(
            "--samples-per-symbol required (trace metadata carries no hint)"
        )
    window = args.dc_window
    if window is None:
        window = trace.meta.get("dc_window_symbols", 15)
    params = DemodParams(samples_per_symbol=int(sps), dc_window_symbols=int(window))
    bits = demodulate(trace, params)
    outputs = []
    if args.out:
        write_bits(args.out, bits)
        outputs.append(args.out)
        print(f"{len(bits)} bits -> {args.out}")
    else:
        print(f"{len(bits)} bits decoded")
    if args.reference:
        reference = read_bits(args.reference)
        if len(bits) < len(reference):
            raise UsageError(
                f"decoded only {len(bits)} bits but reference has {len(reference)}"
            )
        # Block-aligned captures may run a little past the payload; score the
        # known payload span only.
        decoded = BitSequence(bits=bits.bits[: len(reference)])
        report = ber(decoded, reference)
        print(json.dumps(ber_report_to_dict(report) | {"kind": "ber-report"}))
        if args.out:
            report_path = Path(args.out).with_suffix(".ber.json")
            report_path.write_text(json.dumps(ber_report_to_dict(report), indent=2) + "\n")
            outputs.append(report_path)
    if args.out:
        write_manifest(
            Path(args.out).with_suffix(".manifest.json"),
            command="demod",
            argv=sys.argv[1:],
            seed=None,
            outputs=outputs,
        )
    return 0


def cmd_ber(args) -> int:
    if args.decoded and args.reference:
        report = ber(read_bits(args.decoded), read_bits(args.reference))
        text = json.dumps(ber_report_to_dict(report), indent=2)
        print(text)
        if args.out:
            Path(args.out).write_text(text + "\n")
        return 0
    if not args.scenario:
        raise UsageError("ber needs either --decoded + --reference or --scenario")
    scenario, scenario_path = _resolve_scenario(args.scenario)
    seed = args.seed if args.seed is not None else scenario.seed
    try:
        powers = [float(tok) for tok in args.powers.split(",") if tok != ""]
    except ValueError:
        raise UsageError(f"--powers must be comma-separated dBm values, got {args.powers!r}")
    if not powers:
        raise UsageError("--powers is empty")
    tx = scenario.transmission
    config = enumerate_configs()[tx.config_index]
    path = ReceptionPathId(index=tx.path, label=f"P{tx.path}")
    points = []
    for i, power in enumerate(powers):
        backend, source = build_rig(scenario, seed=seed + i)
        report = ideal_sync_ber_experiment(
            backend,
            source,
            path,
            config,
            scenario.adc,
            freq_hz=tx.freq_hz,
            power_dbm=power,
            n_bits=args.bits,
            samples_per_bit=args.samples_per_bit,
            seed=seed + i,
        )
        incident = scenario.channel.incident_dbm(power, tx.freq_hz)
        points.append(
            {
                "power_dbm": power,
                "incident_dbm": round(incident, 3),
                "bits": report.total_bits,
                "errors": report.error_count,
                "ber": report.ber,
            }
        )
        print(
            f"P_tx {power:+.1f} dBm  incident {incident:+.1f} dBm  "
            f"BER {report.ber:.4g} ({report.error_count}/{report.total_bits})"
        )
    if args.out:
        payload = {"kind": "ber-curve", "schema_version": 1, "points": points}
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
        write_manifest(
            Path(args.out).with_suffix(".manifest.json"),
            command="ber",
            argv=sys.argv[1:],
            seed=seed,
            outputs=[args.out],
            scenario=scenario_path,
        )
    return 0


def cmd_report(args) -> int:
    out_svg = Path(f"{args.out}.svg")
    out_csv = Path(f"{args.out}.csv")
    if args.kind == "heatmap":
        _, records = read_records(args.results)
        if not records:
            raise UsageError("no records")
        info = render_heatmap(records, out_svg, out_csv)
    elif args.kind == "spectrum":
        _, records = read_records(args.results)
        if not records:
            raise UsageError("no records")
        spectra = spectra_from_records(records)
        if args.path is not None:
            matches = [s for s in spectra if s.path.index == args.path]
            if args.config_index is not None:
                matches = [
                    s
                    for s in matches
                    if spectra_config_index(spectra, s) == args.config_index
                ]
            if not matches:
                raise UsageError("no spectrum matches --path/--config-index")
            spectrum = matches[0]
        else:
            spectrum = max(spectra, key=lambda s: peak_snr(s)[1].sort_value())
        info = render_spectrum(spectrum, out_svg, out_csv)
    elif args.kind == "ber-curve":
        try:
            doc = json.loads(Path(args.results).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise FileFormatError(f"cannot read ber-curve input: {exc}")
        if doc.get("kind") != "ber-curve":
            raise UsageError(f"{args.results} is not a ber-curve file")
        if not doc.get("points"):
            raise UsageError("no records")
        info = render_ber_curve(doc["points"], out_svg, out_csv)
    elif args.kind == "eye":
        trace = read_trace(args.results)
        sps = args.samples_per_symbol or trace.meta.get("samples_per_symbol")
        if sps is None:
            raise UsageError("--samples-per-symbol required for eye reports")
        info = render_eye(trace, int(sps), out_svg, out_csv)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown report kind {args.kind}")
    write_manifest(
        Path(f"{args.out}.manifest.json"),
        command="report",
        argv=sys.argv[1:],
        seed=None,
        outputs=[out_svg, out_csv],
        extra=info,
    )
    print(f"{args.kind} -> {out_svg} + {out_csv}")
    return 0


def spectra_config_index(spectra, spectrum) -> int:
    configs: list = []
    for s in spectra:
        if s.config not in configs:
            configs.append(s.config)
    return configs.index(spectrum.config)


def cmd_linkbudget(args) -> int:
    budget = LinkBudget(
        p_tx_dbm=args.power_dbm,
        g_tx_dbi=args.gain_tx,
        g_rx_dbi=args.gain_rx,
        distance_m=args.distance,
        freq_hz=args.freq,
    )
    loss = fspl_db(budget.distance_m, budget.freq_hz)
    incident = incident_power_dbm(budget)
    print(f"FSPL({budget.distance_m} m, {budget.freq_hz / 1e6:.1f} MHz) = {loss:.2f} dB")
    print(f"incident power = {incident:.2f} dBm = {dbm_to_mw(incident):.4g} mW")
    return 0


def cmd_simulate(args) -> int:
    scenario, scenario_path = _resolve_scenario(args.scenario)
    seed = args.seed if args.seed is not None else scenario.seed
    tx = scenario.transmission
    freq = args.freq if args.freq is not None else tx.freq_hz
    power = args.power_dbm if args.power_dbm is not None else tx.power_dbm
    bit_rate = args.bit_rate if args.bit_rate is not None else tx.bit_rate_hz
    path_index = args.path if args.path is not None else tx.path
    config_index = args.config_index if args.config_index is not None else tx.config_index

    rate = scenario.adc.sample_rate_hz
    sps = rate / bit_rate
    if sps != int(sps) or int(sps) < 2:
        raise UsageError(
            f"ADC rate {rate} Hz / bit rate {bit_rate} Hz must be an integer "
            f"samples-per-symbol >= 2, got {sps}"
        )
    sps = int(sps)

    bits = generate_bits(args.bits, seed)
    envelope = modulate_ook(bits, sps, amplitude=1.0, symbol_rate_hz=bit_rate)
    backend, source = build_rig(scenario, seed=seed)
    config = enumerate_configs()[config_index]
    path = ReceptionPathId(index=path_index, label=f"P{path_index}")
    backend.configure(path, config, scenario.adc)
    source.rf_set(
        RfStimulus(freq_hz=freq, power_dbm=power, enabled=True, envelope=envelope)
    )
    total_samples = len(bits) * sps
    n_blocks = -(-total_samples // scenario.adc.samples_per_block) if total_samples else 0
    trace = backend.capture(n_blocks)

    out = Path(args.out)
    write_trace(
        out,
        trace,
        extra_meta={
            "samples_per_symbol": sps,
            "bit_rate_hz": bit_rate,
            "payload_bits": len(bits),
            "payload_seed": seed,
            "dc_window_symbols": tx.dc_window_symbols,
        },
    )
    outputs = [out]
    bits_path = out.with_suffix(".bits")
    write_bits(bits_path, bits)
    outputs.append(bits_path)
    write_manifest(
        out.with_suffix(".manifest.json"),
        command="simulate",
        argv=sys.argv[1:],
        seed=seed,
        outputs=outputs,
        scenario=scenario_path,
        extra={"bits": len(bits), "bit_rate_hz": bit_rate, "freq_hz": freq},
    )
    print(f"{len(trace)} samples ({len(bits)} bits at {bit_rate:.0f} bps) -> {out}")
    return 0


def cmd_protocol_loopback(args) -> int:
    scenario, _ = _resolve_scenario(args.scenario)
    seed = args.seed if args.seed is not None else scenario.seed
    n_paths = min(scenario.n_paths, 4)
    paths = [ReceptionPathId(index=i, label=f"P{i}") for i in range(n_paths)]
    plan = SweepPlan(
        paths=tuple(paths),
        configs=tuple(recommended_configs()[:2]),
        freqs_hz=tuple(np.linspace(200e6, 1000e6, 9)),
        samples_per_block=scenario.adc.samples_per_block,
        adc=scenario.adc,
    )
    direct_backend, direct_source = build_rig(scenario, seed=seed)
    direct = run_sweep(plan, direct_backend, direct_source)

    loop_backend, loop_source = build_rig(scenario, seed=seed)
    server = DutProtocolServer(loop_backend)
    client = SerialBackend(LoopbackTransport(server))
    looped = run_sweep(plan, client, loop_source)

    from .fileio import record_to_dict

    direct_bytes = "\n".join(json.dumps(record_to_dict(r)) for r in direct)
    looped_bytes = "\n".join(json.dumps(record_to_dict(r)) for r in looped)
    if direct_bytes == looped_bytes:
        print(f"loopback OK: {len(direct)} records byte-identical through the codec")
        return 0
    print("loopback MISMATCH: direct and codec-driven sweeps differ", file=sys.stderr)
    return 1


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adcradio",
        description="Discover parasitic RF sensitivities and use them as OOK receivers.",
    )
    parser.add_argument("--version", action="version", version=f"adcradio {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a sensitivity sweep on a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--paths", default="all")
    p.add_argument("--configs", default="recommended")
    p.add_argument("--freq-start", type=float, default=200e6)
    p.add_argument("--freq-stop", type=float, default=1000e6)
    p.add_argument("--freq-points", type=int, default=81)
    p.add_argument("--power-dbm", type=float, default=43.0)
    p.add_argument("--samples-per-block", type=int, default=32)
    p.add_argument("--blocks-per-state", type=int, default=1)
    p.add_argument("--threshold-db", type=float, default=10.0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("demod", help="decode an OOK trace file")
    p.add_argument("--trace", required=True)
    p.add_argument("--out")
    p.add_argument("--reference")
    p.add_argument("--samples-per-symbol", type=int)
    p.add_argument("--dc-window", type=int, help="DC window in symbols (odd); "
                   "defaults to the trace's hint, else 15")
    p.set_defaults(func=cmd_demod)

    p = sub.add_parser("ber", help="compare bit files, or run the ideal-sync BER experiment")
    p.add_argument("--decoded")
    p.add_argument("--reference")
    p.add_argument("--scenario")
    p.add_argument("--powers", default="0")
    p.add_argument("--bits", type=int, default=10000)
    p.add_argument("--samples-per-bit", type=int, default=127)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ber)

    p = sub.add_parser("report", help="render SVG + CSV reports from result files")
    p.add_argument("--results", required=True)
    p.add_argument("--kind", required=True, choices=["heatmap", "spectrum", "ber-curve", "eye"])
    p.add_argument("--out", required=True, help="output prefix (writes .svg and .csv)")
    p.add_argument("--path", type=int)
    p.add_argument("--config-index", type=int)
    p.add_argument("--samples-per-symbol", type=int)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("linkbudget", help="FSPL and incident power")
    p.add_argument("--power-dbm", type=float, required=True)
    p.add_argument("--gain-tx", type=float, default=0.0)
    p.add_argument("--gain-rx", type=float, default=0.0)
    p.add_argument("--distance", type=float, required=True)
    p.add_argument("--freq", type=float, required=True)
    p.set_defaults(func=cmd_linkbudget)

    p = sub.add_parser("simulate", help="transmit an OOK payload through a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--bits", type=int, default=12565)
    p.add_argument("--bit-rate", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--freq", type=float)
    p.add_argument("--power-dbm", type=float)
    p.add_argument("--path", type=int)
    p.add_argument("--config-index", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "protocol-loopback",
        help="verify the serial codec reproduces direct sweeps byte-exactly",
    )
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_protocol_loopback)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ScenarioError, FileFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BackendError, RfSourceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
