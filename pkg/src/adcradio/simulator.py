"""Parametric physics model of a radio-less embedded device.

Each reception path (optionally per GPIO configuration) is described by a
CouplingModel: where the path resonates, how incident RF power rectifies into
a baseband offset, how fast that offset can move (single-pole baseband
bandwidth), and which impairments ride on top (white noise, random-walk and
sinusoidal drift, self-interference offset bursts). An AdcConfig converts the
resulting analog envelope into integer sample codes, with hardware-style
oversampling realized as averaging of consecutive raw conversions.

A SimulatedDut strings these together behind a capture interface and is
bit-exactly reproducible from its seed and the sequence of commands applied
to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Hashable, Mapping

import numpy as np
from scipy.signal import lfilter

from .signals import LinkBudget, dbm_to_mw, incident_power_dbm

ALLOWED_OVERSAMPLING = (1, 2, 4, 8, 16, 32, 64, 128, 256)


@dataclass(frozen=True)
class Resonance:
    """One Lorentzian-shaped sensitive region of a reception path."""

    center_hz: float
    bandwidth_hz: float
    peak_gain: float

    def __post_init__(self):
        if self.center_hz <= 0:
            raise ValueError("center_hz must be positive")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be positive")
        if self.peak_gain < 0:
            raise ValueError("peak_gain must be >= 0")


@dataclass(frozen=True)
class DriftSpec:
    """Slow baseline motion: a random walk plus a sinusoid."""

    walk_step: float = 0.0  # codes per sqrt(sample)
    sine_amplitude: float = 0.0  # codes
    sine_period_s: float = 0.0  # 0 disables the sinusoid

    def __post_init__(self):
        if self.walk_step < 0 or self.sine_amplitude < 0 or self.sine_period_s < 0:
            raise ValueError("drift parameters must be >= 0")


@dataclass(frozen=True)
class BurstSpec:
    """Poisson-arriving rectangular offset bursts (self-interference events)."""

    rate_per_s: float = 0.0
    amplitude: float = 0.0  # codes, may be negative
    duration_s: float = 0.0

    def __post_init__(self):
        if self.rate_per_s < 0 or self.duration_s < 0:
            raise ValueError("burst rate and duration must be >= 0")


@dataclass(frozen=True)
class CouplingModel:
    """Full parametric description of one reception path configuration."""

    resonances: tuple[Resonance, ...] = ()
    nonlinearity_exponent: float = 1.0
    baseband_bandwidth_hz: float = 50e3
    noise_sigma: float = 0.0  # codes, per raw ADC conversion
    drift: DriftSpec = DriftSpec()
    burst: BurstSpec = BurstSpec()
    dc_operating_point: float = 2048.0

    def __post_init__(self):
        object.__setattr__(self, "resonances", tuple(self.resonances))
        if self.nonlinearity_exponent <= 0:
            raise ValueError("nonlinearity_exponent must be positive")
        if self.baseband_bandwidth_hz <= 0:
            raise ValueError("baseband_bandwidth_hz must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class AdcConfig:
    """ADC acquisition parameters, STM32-flavored defaults."""

    resolution_bits: int = 12
    sample_rate_hz: float = 10_000.0
    oversampling_ratio: int = 1
    samples_per_block: int = 32

    def __post_init__(self):
        if not 6 <= self.resolution_bits <= 16:
            raise ValueError("resolution_bits must be in [6, 16]")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if self.oversampling_ratio not in ALLOWED_OVERSAMPLING:
            raise ValueError(
                f"oversampling_ratio must be a power of two in {ALLOWED_OVERSAMPLING}"
            )
        if self.samples_per_block < 1:
            raise ValueError("samples_per_block must be >= 1")

    @property
    def full_scale(self) -> int:
        return (1 << self.resolution_bits) - 1

    @property
    def raw_rate_hz(self) -> float:
        """Rate of raw conversions feeding the oversampling averager."""
        return self.sample_rate_hz * self.oversampling_ratio


@dataclass(frozen=True, eq=False)
class AdcTrace:
    """A block of integer sample codes plus how they were acquired."""

    samples: np.ndarray
    config: AdcConfig
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.int32)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.samples.size)


def coupling_gain(model: CouplingModel, freq_hz: float) -> float:
    """Linear coupling gain at a carrier frequency: sum of Lorentzian kernels.

    Each resonance contributes peak_gain / (1 + ((f - f0)/bw)^2); a path with
    no resonances is insensitive (gain 0).
    """
    if freq_hz <= 0:
        raise ValueError("freq_hz must be positive")
    gain = 0.0
    for res in model.resonances:
        x = (freq_hz - res.center_hz) / res.bandwidth_hz
        gain += res.peak_gain / (1.0 + x * x)
    return gain


def detector_output(
    incident_power_mw: np.ndarray, gain: float, exponent: float = 1.0
) -> np.ndarray:
    """Rectified baseband offset (in codes) produced by incident RF power.

    offset[i] = gain * power[i]**exponent. With the default exponent 1 the DC
    shift is proportional to incident power, which makes the estimated SNR in
    dB climb with slope 2 versus power in dBm.
    """
    power = np.asarray(incident_power_mw, dtype=np.float64)
    if power.size and power.min() < 0:
        raise ValueError("incident power samples must be >= 0")
    if exponent == 1.0:
        return gain * power
    return gain * np.power(power, exponent)


def _lowpass_alpha(bandwidth_hz: float, sample_rate_hz: float) -> float:
    return 1.0 - math.exp(-2.0 * math.pi * bandwidth_hz / sample_rate_hz)


def _lowpass(values: np.ndarray, alpha: float, y_prev: float) -> tuple[np.ndarray, float]:
    """Single-pole IIR y[n] = y[n-1] + alpha*(x[n] - y[n-1]), continued from y_prev."""
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        return x.copy(), y_prev
    if alpha >= 1.0:
        out = x.copy()
        return out, float(out[-1])
    b = np.array([alpha])
    a = np.array([1.0, alpha - 1.0])
    zi = np.array([(1.0 - alpha) * y_prev])
    out, zf = lfilter(b, a, x, zi=zi)
    return out, float(zf[0]) / (1.0 - alpha)


def apply_bandwidth(
    values: np.ndarray, baseband_bandwidth_hz: float, sample_rate_hz: float
) -> np.ndarray:
    """First-order low-pass with cutoff at the baseband bandwidth.

    The discretization is exact for the exponential step response: a step
    reaches 63.2% after 1/(2*pi*bw) seconds. Initial state is 0.
    """
    if baseband_bandwidth_hz <= 0:
        raise ValueError("baseband_bandwidth_hz must be positive")
    if sample_rate_hz <= 0:
        raise ValueError("sample_rate_hz must be positive")
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        return x.copy()
    alpha = _lowpass_alpha(baseband_bandwidth_hz, sample_rate_hz)
    out, _ = _lowpass(x, alpha, 0.0)
    return out


@dataclass
class _DeviceState:
    """Mutable per-configuration analog state carried across captures."""

    sample_index: int = 0  # raw conversions since configure
    filter_value: float = 0.0
    walk_value: float = 0.0
    burst_left: int = 0  # raw samples of burst still active


def _impair(
    values: np.ndarray,
    model: CouplingModel,
    rng: np.random.Generator,
    state: _DeviceState,
    raw_rate_hz: float,
) -> np.ndarray:
    """Add noise, drift, and bursts in place of a fresh array; advances state."""
    n = values.size
    if n == 0:
        return values.copy()
    out = values
    if model.noise_sigma > 0:
        out = out + rng.normal(0.0, model.noise_sigma, n)
    drift = model.drift
    if drift.walk_step > 0:
        steps = rng.normal(0.0, drift.walk_step, n)
        walk = state.walk_value + np.cumsum(steps)
        state.walk_value = float(walk[-1])
        out = out + walk
    if drift.sine_amplitude > 0 and drift.sine_period_s > 0:
        t = (state.sample_index + np.arange(n)) / raw_rate_hz
        out = out + drift.sine_amplitude * np.sin(2.0 * math.pi * t / drift.sine_period_s)
    burst = model.burst
    if burst.rate_per_s > 0 and burst.duration_s > 0:
        p = burst.rate_per_s / raw_rate_hz
        starts = np.flatnonzero(rng.random(n) < p)
        dur = max(1, int(round(burst.duration_s * raw_rate_hz)))
        delta = np.zeros(n + 1)
        if state.burst_left > 0:
            delta[0] += 1
            delta[min(state.burst_left, n)] -= 1
        for s in starts:
            delta[s] += 1
            delta[min(s + dur, n)] -= 1
        active = np.cumsum(delta[:-1]) > 0
        if active.any():
            out = out + burst.amplitude * active
        ends = [state.burst_left] + [int(s) + dur for s in starts]
        state.burst_left = max(0, max(ends) - n)
    if out is values:
        out = values.copy()
    state.sample_index += n
    return out


def add_impairments(
    values: np.ndarray,
    model: CouplingModel,
    rng: np.random.Generator,
    sample_rate_hz: float = 1.0,
) -> np.ndarray:
    """White noise + random-walk/sine drift + Poisson offset bursts, from rest.

    ``sample_rate_hz`` converts the model's time-based parameters (burst rate
    and duration, sine period) to samples; with the default of 1 they are
    interpreted per-sample.
    """
    if sample_rate_hz <= 0:
        raise ValueError("sample_rate_hz must be positive")
    x = np.asarray(values, dtype=np.float64)
    return _impair(x, model, rng, _DeviceState(), raw_rate_hz=sample_rate_hz)


def adc_sample(
    values: np.ndarray, adc: AdcConfig, n_samples: int | None = None, meta: dict | None = None
) -> AdcTrace:
    """Quantize an analog envelope into ADC codes with oversampling.

    Each raw conversion rounds and clamps one envelope value into the ADC
    range; each output code is the rounded, clamped mean of
    ``oversampling_ratio`` consecutive raw conversions.
    """
    x = np.asarray(values, dtype=np.float64)
    n_out = adc.samples_per_block if n_samples is None else int(n_samples)
    ratio = adc.oversampling_ratio
    needed = n_out * ratio
    if x.size < needed:
        raise ValueError(
            f"envelope too short: need {needed} raw conversions, got {x.size}"
        )
    fs = float(adc.full_scale)
    raw = np.clip(np.rint(x[:needed]), 0.0, fs)
    if ratio > 1:
        raw = raw.reshape(n_out, ratio).mean(axis=1)
    codes = np.clip(np.rint(raw), 0.0, fs).astype(np.int32)
    return AdcTrace(samples=codes, config=adc, meta=meta or {})


@dataclass(frozen=True)
class RfChannel:
    """Propagation from the RF source to the device: antenna gains, distance,
    and a scalar attenuation term standing in for enclosures/shielding."""

    g_tx_dbi: float = 6.5
    g_rx_dbi: float = 0.0
    distance_m: float = 1.0
    attenuation_db: float = 0.0

    def __post_init__(self):
        if self.distance_m <= 0:
            raise ValueError("distance_m must be positive")

    def incident_dbm(self, power_dbm: float, freq_hz: float) -> float:
        budget = LinkBudget(
            p_tx_dbm=power_dbm,
            g_tx_dbi=self.g_tx_dbi,
            g_rx_dbi=self.g_rx_dbi,
            distance_m=self.distance_m,
            freq_hz=freq_hz,
        )
        return incident_power_dbm(budget) - self.attenuation_db


class SimulatedDut:
    """A seedable stand-in for an embedded board with parasitic RF sensitivity.

    The coupling map is keyed by (path_index, config) with two fallbacks: an
    optional per-path default (key (path_index, None)) and a global default
    model. A path with no entry anywhere couples nothing and only shows the
    default model's impairments.

    Identical seed + identical command sequence => bit-identical traces. One
    instance is single-owner; run separate instances for parallel work.
    """

    def __init__(
        self,
        n_paths: int,
        adc: AdcConfig,
        channel: RfChannel,
        coupling: Mapping[tuple[int, Hashable | None], CouplingModel] | None = None,
        default_model: CouplingModel = CouplingModel(),
        seed: int = 0,
        path_labels: list[str] | None = None,
    ):
        if n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        self.n_paths = int(n_paths)
        self.adc = adc
        self.channel = channel
        self.coupling = dict(coupling or {})
        self.default_model = default_model
        self.seed = int(seed)
        self.path_labels = list(path_labels or [])
        self._rng = np.random.default_rng(self.seed)
        self._path: int | None = None
        self._config: Hashable | None = None
        self._model: CouplingModel = default_model
        self._state = _DeviceState()

    @property
    def configured(self) -> bool:
        return self._path is not None

    @property
    def current(self) -> tuple[int, Hashable] | None:
        if self._path is None:
            return None
        return (self._path, self._config)

    def model_for(self, path_index: int, config: Hashable) -> CouplingModel:
        exact = self.coupling.get((path_index, config))
        if exact is not None:
            return exact
        per_path = self.coupling.get((path_index, None))
        if per_path is not None:
            return per_path
        return self.default_model

    def configure(self, path_index: int, config: Hashable, adc: AdcConfig) -> None:
        """Select a reception path + GPIO configuration; resets analog state."""
        if not 0 <= path_index < self.n_paths:
            raise ValueError(f"unknown path {path_index} (device has {self.n_paths})")
        self.adc = adc
        self._path = int(path_index)
        self._config = config
        self._model = self.model_for(self._path, config)
        self._state = _DeviceState()

    def set_adc_rate(self, sample_rate_hz: float, oversampling_ratio: int) -> None:
        """Update acquisition rate/oversampling without resetting analog state."""
        self.adc = replace(
            self.adc,
            sample_rate_hz=sample_rate_hz,
            oversampling_ratio=oversampling_ratio,
        )

    def reset(self) -> None:
        """Drop the current configuration (the RNG stream keeps running)."""
        self._path = None
        self._config = None
        self._model = self.default_model
        self._state = _DeviceState()

    def capture(self, n_blocks: int, stimulus=None) -> AdcTrace:
        """Acquire n_blocks * samples_per_block codes under the given stimulus.

        The stimulus is any object with freq_hz, power_dbm, enabled, and an
        optional envelope attribute (a BasebandEnvelope); None means RF off.
        """
        if self._path is None:
            raise RuntimeError("capture before configure")
        if n_blocks < 0:
            raise ValueError("n_blocks must be >= 0")
        adc = self.adc
        n_out = int(n_blocks) * adc.samples_per_block
        n_raw = n_out * adc.oversampling_ratio
        model = self._model
        if n_out == 0:
            return AdcTrace(samples=np.empty(0, np.int32), config=adc, meta=self._meta(stimulus))

        offset = np.zeros(n_raw)
        if stimulus is not None and getattr(stimulus, "enabled", False):
            inc_mw = dbm_to_mw(
                self.channel.incident_dbm(stimulus.power_dbm, stimulus.freq_hz)
            )
            envelope = getattr(stimulus, "envelope", None)
            if envelope is None:
                power = np.full(n_raw, inc_mw)
            elif len(envelope) == 0:
                power = np.zeros(n_raw)
            else:
                # Zero-order hold of the transmit envelope, anchored at the
                # device's configure time (raw sample index 0).
                t = (self._state.sample_index + np.arange(n_raw)) / adc.raw_rate_hz
                idx = np.floor(t * envelope.sample_rate).astype(np.int64)
                m = np.where(
                    idx < len(envelope), envelope.values[np.minimum(idx, len(envelope) - 1)], 0.0
                )
                power = inc_mw * m * m
            gain = coupling_gain(model, stimulus.freq_hz)
            if gain > 0:
                offset = detector_output(power, gain, model.nonlinearity_exponent)

        alpha = _lowpass_alpha(model.baseband_bandwidth_hz, adc.raw_rate_hz)
        filtered, self._state.filter_value = _lowpass(offset, alpha, self._state.filter_value)
        analog = filtered + model.dc_operating_point
        analog = _impair(analog, model, self._rng, self._state, adc.raw_rate_hz)
        return adc_sample(analog, adc, n_samples=n_out, meta=self._meta(stimulus))

    def _meta(self, stimulus) -> dict:
        meta = {
            "path": self._path,
            "config": self._config,
            "seed": self.seed,
        }
        if stimulus is not None:
            meta["stimulus"] = {
                "freq_hz": stimulus.freq_hz,
                "power_dbm": stimulus.power_dbm,
                "enabled": bool(stimulus.enabled),
            }
        return meta


def simulate_capture(
    dut: SimulatedDut, path_index: int, config: Hashable, stimulus, n_blocks: int
) -> AdcTrace:
    """Configure (if needed) and run the full chain for one capture."""
    if dut.current != (path_index, config):
        dut.configure(path_index, config, dut.adc)
    return dut.capture(n_blocks, stimulus)
