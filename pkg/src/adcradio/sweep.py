"""Exhaustive discovery of RF sensitivities.

The sweep walks (reception path x GPIO configuration x carrier frequency),
capturing ADC blocks with the RF source off and then on at each frequency,
and turns block-mean statistics into SNR estimates:

    d = mean(on block means) - mean(off block means)
    v = unbiased variance of the off block means
    SNR = 10*log10(d^2 / v)

Zero off-state variance with a nonzero difference is reported as the "high"
sentinel; zero difference with zero variance is "no response". With a single
block per state, the off variance is pooled across all frequencies of the
same path/configuration cell.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .backend import (
    BackendError,
    GpioMode,
    GpioPull,
    OutputType,
    OutputValue,
    PathConfig,
    ReceptionPathId,
    RfStimulus,
)
from .protocol import ProtocolError
from .simulator import AdcConfig, AdcTrace

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD_DB = 10.0


def default_sweep_frequencies() -> np.ndarray:
    """81 evenly spaced carrier frequencies from 200 MHz to 1000 MHz."""
    return np.linspace(200e6, 1000e6, 81)


@dataclass(frozen=True)
class SweepPlan:
    """What to sweep and how to sample each cell."""

    paths: tuple[ReceptionPathId, ...]
    configs: tuple[PathConfig, ...]
    freqs_hz: tuple[float, ...] = field(default_factory=lambda: tuple(default_sweep_frequencies()))
    power_dbm: float = 43.0
    samples_per_block: int = 32
    blocks_per_state: int = 1
    settle_blocks: int = 1  # discarded after each RF toggle
    adc: AdcConfig = AdcConfig()
    # None: pool the off-state variance across frequencies only when a single
    # block per state leaves no per-cell variance (the default regime).
    pool_off_variance: bool | None = None

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        object.__setattr__(self, "configs", tuple(self.configs))
        object.__setattr__(self, "freqs_hz", tuple(float(f) for f in self.freqs_hz))
        if not self.paths or not self.configs or not self.freqs_hz:
            raise ValueError("paths, configs, and freqs_hz must be non-empty")
        if any(b <= a for a, b in zip(self.freqs_hz, self.freqs_hz[1:])):
            raise ValueError("freqs_hz must be strictly increasing")
        if self.samples_per_block < 1 or self.blocks_per_state < 1:
            raise ValueError("samples_per_block and blocks_per_state must be >= 1")
        if self.settle_blocks < 0:
            raise ValueError("settle_blocks must be >= 0")

    @property
    def effective_adc(self) -> AdcConfig:
        return replace(self.adc, samples_per_block=self.samples_per_block)

    @property
    def n_cells(self) -> int:
        return len(self.paths) * len(self.configs) * len(self.freqs_hz)


class SnrEstimate:
    """Either a finite SNR in dB, the "high" sentinel (zero off-state
    variance with a response), or "none" (no response at all)."""

    __slots__ = ("kind", "db")

    def __init__(self, kind: str, db: float | None = None):
        if kind not in ("db", "high", "none"):
            raise ValueError(f"bad SnrEstimate kind {kind!r}")
        if (kind == "db") != (db is not None):
            raise ValueError("db value required exactly when kind == 'db'")
        self.kind = kind
        self.db = db

    @classmethod
    def finite(cls, db: float) -> "SnrEstimate":
        return cls("db", float(db))

    @classmethod
    def high(cls) -> "SnrEstimate":
        return cls("high")

    @classmethod
    def none(cls) -> "SnrEstimate":
        return cls("none")

    @property
    def is_high(self) -> bool:
        return self.kind == "high"

    @property
    def is_none(self) -> bool:
        return self.kind == "none"

    def sort_value(self) -> float:
        """Comparable magnitude: none < any finite dB < high."""
        if self.kind == "none":
            return -math.inf
        if self.kind == "high":
            return math.inf
        return self.db

    def to_json(self):
        if self.kind == "db":
            return {"db": self.db}
        return self.kind

    @classmethod
    def from_json(cls, obj) -> "SnrEstimate":
        if obj == "high":
            return cls.high()
        if obj == "none":
            return cls.none()
        if isinstance(obj, dict) and set(obj) == {"db"}:
            return cls.finite(float(obj["db"]))
        raise ValueError(f"bad serialized SNR {obj!r}")

    def __eq__(self, other):
        if not isinstance(other, SnrEstimate):
            return NotImplemented
        return self.kind == other.kind and self.db == other.db

    def __hash__(self):
        return hash((self.kind, self.db))

    def __repr__(self):
        if self.kind == "db":
            return f"SnrEstimate({self.db:.2f} dB)"
        return f"SnrEstimate({self.kind})"


@dataclass(frozen=True)
class SensitivityRecord:
    """One sweep cell: statistics and SNR for (path, config, frequency)."""

    path: ReceptionPathId
    config: PathConfig
    freq_hz: float
    mean_on: float | None
    mean_off: float | None
    diff: float | None
    var_off: float | None
    snr: SnrEstimate
    failed: bool = False
    error: str | None = None


@dataclass(frozen=True)
class SnrSpectrum:
    """SNR over frequency for one (path, config) combination."""

    path: ReceptionPathId
    config: PathConfig
    points: tuple[tuple[float, SnrEstimate], ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))


def block_mean(trace: AdcTrace | np.ndarray, block_len: int) -> np.ndarray:
    """Mean of consecutive sample blocks, order preserved."""
    samples = trace.samples if isinstance(trace, AdcTrace) else np.asarray(trace)
    if block_len < 1:
        raise ValueError("block_len must be >= 1")
    if samples.size % block_len != 0:
        raise ValueError(
            f"trace length {samples.size} not divisible by block length {block_len}"
        )
    return samples.reshape(-1, block_len).mean(axis=1)


def snr_from_stats(diff: float, var_off: float) -> SnrEstimate:
    """SNR sentinel logic from a mean difference and an off-state variance."""
    if var_off < 0:
        raise ValueError("var_off must be >= 0")
    if var_off == 0.0:
        return SnrEstimate.none() if diff == 0.0 else SnrEstimate.high()
    if diff == 0.0:
        return SnrEstimate.none()
    return SnrEstimate.finite(10.0 * math.log10(diff * diff / var_off))


def estimate_snr(on_means, off_means) -> SnrEstimate:
    """SNR from on/off block means of one cell.

    Needs at least two off means for a variance; with exactly one the
    variance is taken as zero and the sentinel rules apply (the sweep itself
    pools variance across frequencies in that regime instead).
    """
    on = np.asarray(on_means, dtype=np.float64)
    off = np.asarray(off_means, dtype=np.float64)
    if on.size == 0 or off.size == 0:
        raise ValueError("on_means and off_means must be non-empty")
    diff = float(on.mean() - off.mean())
    var_off = float(off.var(ddof=1)) if off.size >= 2 else 0.0
    return snr_from_stats(diff, var_off)


def run_sweep(plan: SweepPlan, backend, rf_source) -> list[SensitivityRecord]:
    """Drive backend + RF source over the full plan and emit one record per
    (path, config, frequency) cell, in plan order.

    Off-state blocks are captured before on-state blocks at each frequency,
    with ``settle_blocks`` discarded after each RF toggle. Backend or
    protocol errors mark the affected cells failed and the sweep continues.
    """
    adc = plan.effective_adc
    n_capture = plan.blocks_per_state + plan.settle_blocks
    records: list[SensitivityRecord] = []

    for path in plan.paths:
        for config in plan.configs:
            try:
                backend.configure(path, config, adc)
            except (BackendError, ProtocolError) as exc:
                logger.warning("configure failed for path %s %s: %s", path.index, config.short(), exc)
                records.extend(
                    _failed_record(path, config, freq, str(exc)) for freq in plan.freqs_hz
                )
                continue
            cell: list[tuple[float, np.ndarray | None, np.ndarray | None, str | None]] = []
            for freq in plan.freqs_hz:
                try:
                    off_stim = RfStimulus(freq_hz=freq, power_dbm=plan.power_dbm, enabled=False)
                    on_stim = RfStimulus(freq_hz=freq, power_dbm=plan.power_dbm, enabled=True)
                    rf_source.rf_set(off_stim)
                    off_means = block_mean(backend.capture(n_capture), plan.samples_per_block)
                    rf_source.rf_set(on_stim)
                    on_means = block_mean(backend.capture(n_capture), plan.samples_per_block)
                    rf_source.rf_set(off_stim)
                    cell.append(
                        (freq, on_means[plan.settle_blocks :], off_means[plan.settle_blocks :], None)
                    )
                except (BackendError, ProtocolError) as exc:
                    logger.warning(
                        "cell failed at path %s %s %.0f Hz: %s",
                        path.index,
                        config.short(),
                        freq,
                        exc,
                    )
                    cell.append((freq, None, None, str(exc)))
            pool = plan.pool_off_variance
            if pool is None:
                pool = plan.blocks_per_state == 1
            records.extend(_cell_records(path, config, cell, pool))
    return records


def _failed_record(path, config, freq, message) -> SensitivityRecord:
    return SensitivityRecord(
        path=path,
        config=config,
        freq_hz=float(freq),
        mean_on=None,
        mean_off=None,
        diff=None,
        var_off=None,
        snr=SnrEstimate.none(),
        failed=True,
        error=message,
    )


def _cell_records(path, config, cell, pool: bool) -> list[SensitivityRecord]:
    pooled_var: float | None = None
    if pool:
        off_all = np.concatenate(
            [off for _, _, off, err in cell if err is None] or [np.empty(0)]
        )
        pooled_var = float(np.var(off_all, ddof=1)) if off_all.size >= 2 else 0.0
    out = []
    for freq, on_means, off_means, err in cell:
        if err is not None:
            out.append(_failed_record(path, config, freq, err))
            continue
        mean_on = float(np.mean(on_means))
        mean_off = float(np.mean(off_means))
        diff = mean_on - mean_off
        var_off = pooled_var if pooled_var is not None else float(np.var(off_means, ddof=1))
        out.append(
            SensitivityRecord(
                path=path,
                config=config,
                freq_hz=float(freq),
                mean_on=mean_on,
                mean_off=mean_off,
                diff=diff,
                var_off=var_off,
                snr=snr_from_stats(diff, var_off),
            )
        )
    return out


def spectra_from_records(records) -> list[SnrSpectrum]:
    """Group records into per-(path, config) spectra, preserving order."""
    grouped: dict[tuple[int, PathConfig], list[tuple[float, SnrEstimate]]] = {}
    paths: dict[tuple[int, PathConfig], ReceptionPathId] = {}
    for rec in records:
        key = (rec.path.index, rec.config)
        grouped.setdefault(key, []).append((rec.freq_hz, rec.snr))
        paths.setdefault(key, rec.path)
    return [
        SnrSpectrum(path=paths[key], config=key[1], points=tuple(pts))
        for key, pts in grouped.items()
    ]


def peak_snr(spectrum: SnrSpectrum) -> tuple[float, SnrEstimate]:
    """Maximum-SNR point; "high" beats any finite value, ties go to the
    lowest frequency."""
    if not spectrum.points:
        raise ValueError("empty spectrum")
    best_freq, best = spectrum.points[0]
    for freq, snr in spectrum.points[1:]:
        if snr.sort_value() > best.sort_value():
            best_freq, best = freq, snr
    return best_freq, best


def classify_sensitive(spectrum: SnrSpectrum, threshold_db: float = DEFAULT_THRESHOLD_DB) -> bool:
    """True iff the peak SNR reaches the threshold (or is "high")."""
    _, best = peak_snr(spectrum)
    return best.sort_value() >= threshold_db


def enumerate_configs() -> list[PathConfig]:
    """All 64 GPIO configurations in deterministic mode-major order."""
    return [
        PathConfig(mode=m, pupd=p, output_value=v, output_type=t)
        for m, p, v, t in itertools.product(GpioMode, GpioPull, OutputValue, OutputType)
    ]


def recommended_configs() -> list[PathConfig]:
    """The eight configurations that cover the distinct sensitivity classes:
    pull-down/high and pull-up/low, each across the four modes, open-drain."""
    out = []
    for pupd, value in ((GpioPull.PULL_DOWN, OutputValue.HIGH), (GpioPull.PULL_UP, OutputValue.LOW)):
        for mode in GpioMode:
            out.append(
                PathConfig(
                    mode=mode,
                    pupd=pupd,
                    output_value=value,
                    output_type=OutputType.OPEN_DRAIN,
                )
            )
    return out
