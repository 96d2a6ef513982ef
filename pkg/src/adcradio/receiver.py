"""Lightweight software-defined OOK receiver.

The decode chain is deliberately simple enough to run on the device itself:

    remove_dc   - centered moving average subtraction (tracks slow drift)
    normalize   - scale by the P90-P10 percentile spread (adaptive scaling)
    recover_timing - grid search for the symbol phase maximizing transition
                     energy at hypothesized boundaries
    slice_bits  - average the central half of each symbol, threshold at 0

plus BER accounting against a known reference sequence and an eye-opening
metric for judging decodability at a given symbol rate.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .backend import RfStimulus
from .signals import BitSequence
from .simulator import AdcConfig, AdcTrace


@dataclass(frozen=True)
class DemodParams:
    """Demodulator settings. The DC window is in symbols and must be odd;
    timing_search is the phase grid resolution as a fraction of a symbol."""

    samples_per_symbol: int
    dc_window_symbols: int = 15
    timing_search: float = 1.0 / 16.0  # phase grid resolution, in symbols
    threshold_policy: str = "midpoint"  # fixed midpoint after normalization

    def __post_init__(self):
        if self.samples_per_symbol < 2:
            raise ValueError("samples_per_symbol must be >= 2")
        if self.dc_window_symbols < 3 or self.dc_window_symbols % 2 == 0:
            raise ValueError("dc_window_symbols must be an odd count >= 3")
        if not 0 < self.timing_search <= 0.5:
            raise ValueError("timing_search must be in (0, 0.5]")
        if self.threshold_policy != "midpoint":
            raise ValueError("only the 'midpoint' threshold policy is implemented")


@dataclass(frozen=True)
class BerReport:
    """Exact Hamming accounting between a decoded and a reference sequence."""

    total_bits: int
    error_count: int
    ber: float
    error_positions: tuple[int, ...]
    burst_runs: tuple[tuple[int, int], ...]  # (start, length) of consecutive errors

    def errors_in_runs_of_at_least(self, min_length: int) -> int:
        return sum(length for _, length in self.burst_runs if length >= min_length)


def moving_average(samples: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average; the window shrinks one-sidedly at the edges."""
    x = np.asarray(samples, dtype=np.float64)
    n = x.size
    if window < 1:
        raise ValueError("window must be >= 1")
    if window % 2 == 0:
        raise ValueError("window must be odd")
    if window > n:
        raise ValueError(f"window {window} larger than input length {n}")
    half = window // 2
    cs = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(n)
    lo = np.maximum(0, idx - half)
    hi = np.minimum(n, idx + half + 1)
    return (cs[hi] - cs[lo]) / (hi - lo)


def remove_dc(samples: np.ndarray, window: int) -> np.ndarray:
    """Subtract a centered moving average to strip DC and slow drift."""
    x = np.asarray(samples, dtype=np.float64)
    return x - moving_average(x, window)


def normalize(samples: np.ndarray) -> np.ndarray:
    """Scale to unit robust amplitude (1 / the P90-P10 spread).

    The output is invariant under positive gain changes of the input.
    """
    x = np.asarray(samples, dtype=np.float64)
    spread = float(np.percentile(x, 90) - np.percentile(x, 10))
    if spread == 0.0:
        raise ValueError("cannot normalize a constant signal (zero spread)")
    return x / spread


def recover_timing(samples: np.ndarray, samples_per_symbol: int, grid: int = 16) -> float:
    """Symbol phase in [0, 1) that maximizes transition energy.

    Scores each candidate phase by the summed |difference| across the sample
    pairs straddling its hypothesized symbol boundaries; the first best grid
    point wins. Requires a signal with transitions (>= 10 zero crossings).
    """
    x = np.asarray(samples, dtype=np.float64)
    sps = int(samples_per_symbol)
    if sps < 2:
        raise ValueError("samples_per_symbol must be >= 2")
    if grid < 2:
        raise ValueError("grid must be >= 2")
    n = x.size
    if n < 2 * sps:
        raise ValueError("need at least two symbols to recover timing")
    crossings = int(np.count_nonzero(np.diff(x > 0)))
    if crossings < 10:
        raise ValueError(
            f"too few transitions to recover timing ({crossings} zero crossings)"
        )
    # Boundaries are collected over the whole signal and clipped to a common
    # index range, so phases that round to the same physical boundaries score
    # identically and the tie goes to the lowest phase.
    ks = np.arange(0, int(n / sps) + 2)
    phases = np.arange(grid) / grid
    best_phase = 0.0
    best_energy = -1.0
    for phase in phases:
        b = np.rint((ks + phase) * sps).astype(np.int64)
        b = b[(b >= 1) & (b <= n - 1)]
        energy = float(np.abs(x[b] - x[b - 1]).sum())
        if energy > best_energy:
            best_energy = energy
            best_phase = float(phase)
    return best_phase


def _symbol_central_means(x: np.ndarray, phase: float, sps: int) -> np.ndarray:
    """Mean of the central 50% of each full symbol at the given phase.

    Symbols are counted from the rounded boundary positions, so a final
    symbol whose fractional end rounds onto the last sample still counts.
    """
    n = x.size
    ks = np.arange(0, int(n / sps) + 2)
    b = np.rint((ks + phase) * sps).astype(np.int64)
    b = b[(b >= 0) & (b <= n)]
    if b.size < 2:
        return np.empty(0)
    lo = b[:-1]
    hi = b[1:]
    span = hi - lo
    q = span // 4
    lo = lo + q
    hi = hi - q
    cs = np.concatenate(([0.0], np.cumsum(x)))
    return (cs[hi] - cs[lo]) / (hi - lo)


def slice_bits(samples: np.ndarray, phase: float, samples_per_symbol: int) -> BitSequence:
    """Decide one bit per symbol: central-mean > 0 -> 1, otherwise 0."""
    x = np.asarray(samples, dtype=np.float64)
    means = _symbol_central_means(x, float(phase), int(samples_per_symbol))
    return BitSequence(bits=(means > 0).astype(np.uint8))


def demodulate(trace: AdcTrace | np.ndarray, params: DemodParams) -> BitSequence:
    """Full decode: remove_dc -> normalize -> recover_timing -> slice_bits."""
    x = trace.samples if isinstance(trace, AdcTrace) else np.asarray(trace)
    x = x.astype(np.float64)
    if x.size == 0:
        return BitSequence(bits=np.empty(0, np.uint8))
    sps = params.samples_per_symbol
    window = min(params.dc_window_symbols * sps, x.size)
    if window % 2 == 0:
        window -= 1
    centered = remove_dc(x, window)
    scaled = normalize(centered)
    grid = max(2, int(round(1.0 / params.timing_search)))
    phase = recover_timing(scaled, sps, grid)
    return slice_bits(scaled, phase, sps)


def ber(decoded: BitSequence, reference: BitSequence) -> BerReport:
    """Bit error rate with positions and maximal runs of consecutive errors."""
    a = decoded.bits if isinstance(decoded, BitSequence) else np.asarray(decoded, np.uint8)
    b = reference.bits if isinstance(reference, BitSequence) else np.asarray(reference, np.uint8)
    if a.size != b.size:
        raise ValueError(f"length mismatch: decoded {a.size} vs reference {b.size}")
    errors = a != b
    positions = np.flatnonzero(errors)
    runs: list[tuple[int, int]] = []
    if positions.size:
        breaks = np.flatnonzero(np.diff(positions) > 1)
        starts = np.concatenate(([0], breaks + 1))
        ends = np.concatenate((breaks, [positions.size - 1]))
        runs = [
            (int(positions[s]), int(positions[e] - positions[s] + 1))
            for s, e in zip(starts, ends)
        ]
    total = int(a.size)
    count = int(positions.size)
    return BerReport(
        total_bits=total,
        error_count=count,
        ber=count / total if total else 0.0,
        error_positions=tuple(int(p) for p in positions),
        burst_runs=tuple(runs),
    )


def eye_opening(
    trace: AdcTrace | np.ndarray,
    samples_per_symbol: int,
    phase: float = 0.0,
    dc_window_symbols: int = 15,
) -> float:
    """Worst-case separation between 1-symbols and 0-symbols after
    normalization: P10 of the per-symbol central means over decoded 1-bits
    minus P90 over decoded 0-bits, clamped at 0."""
    x = trace.samples if isinstance(trace, AdcTrace) else np.asarray(trace)
    x = x.astype(np.float64)
    sps = int(samples_per_symbol)
    window = min(dc_window_symbols * sps, x.size)
    if window % 2 == 0:
        window -= 1
    scaled = normalize(remove_dc(x, window))
    means = _symbol_central_means(scaled, float(phase), sps)
    if means.size < 20:
        raise ValueError(f"need at least 20 symbols for an eye estimate, got {means.size}")
    ones = means[means > 0]
    zeros = means[means <= 0]
    if ones.size == 0 or zeros.size == 0:
        raise ValueError("eye opening needs both bit values present")
    eye = float(np.percentile(ones, 10) - np.percentile(zeros, 90))
    return max(0.0, eye)


def ideal_sync_ber_experiment(
    backend,
    rf_source,
    path,
    config,
    adc: AdcConfig,
    freq_hz: float,
    power_dbm: float,
    n_bits: int,
    samples_per_bit: int = 127,
    threshold_window: int = 127,
    seed: int = 0,
) -> BerReport:
    """Emulate the ideal-synchronization OOK experiment.

    The RF source is switched on or off per random bit, one ADC block of
    ``samples_per_bit`` samples is captured per bit, and each block mean is
    compared against a centered moving average of the block means (the
    adaptive decision threshold). Returns the BER against the known bits.
    """
    if n_bits < 1:
        raise ValueError("n_bits must be >= 1")
    if threshold_window % 2 == 0:
        raise ValueError("threshold_window must be odd")
    from .signals import generate_bits

    bits = generate_bits(n_bits, seed)
    block_adc = replace(adc, samples_per_block=int(samples_per_bit))
    backend.configure(path, config, block_adc)
    on = RfStimulus(freq_hz=freq_hz, power_dbm=power_dbm, enabled=True)
    off = RfStimulus(freq_hz=freq_hz, power_dbm=power_dbm, enabled=False)
    means = np.empty(n_bits)
    for i, bit in enumerate(bits.bits):
        rf_source.rf_set(on if bit else off)
        trace = backend.capture(1)
        means[i] = trace.samples.mean()
    window = min(threshold_window, n_bits if n_bits % 2 else n_bits - 1)
    if window < 1:
        window = 1
    threshold = moving_average(means, window)
    decoded = BitSequence(bits=(means > threshold).astype(np.uint8))
    return ber(decoded, bits)
