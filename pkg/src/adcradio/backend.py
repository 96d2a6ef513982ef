"""Uniform capture interface over devices under test.

A backend exposes configure/capture over a reception path of a DUT; an RF
source exposes set/readback of the stimulus. Two backends exist: an
in-process one wrapping SimulatedDut, and a serial-protocol client (see
protocol.py) that drives the same device through the line codec. Sweeps and
experiments only ever talk to these two interfaces, so a future hardware
backend can slot in without touching the analysis code.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .signals import BasebandEnvelope
from .simulator import ALLOWED_OVERSAMPLING, AdcConfig, AdcTrace, SimulatedDut


class BackendError(Exception):
    """Base class for configure/capture failures."""


class UnknownPathError(BackendError):
    pass


class UnsupportedSettingError(BackendError):
    pass


class NotConfiguredError(BackendError):
    pass


class RfSourceError(Exception):
    """Stimulus outside the source's power/frequency limits."""


class GpioMode(Enum):
    INPUT = "input"
    OUTPUT = "output"
    ALTERNATE_FUNCTION = "alternate_function"
    ANALOG = "analog"


class GpioPull(Enum):
    NONE = "none"
    PULL_UP = "pull_up"
    PULL_DOWN = "pull_down"
    RESERVED = "reserved"


class OutputValue(Enum):
    HIGH = "high"
    LOW = "low"


class OutputType(Enum):
    PUSH_PULL = "push_pull"
    OPEN_DRAIN = "open_drain"


@dataclass(frozen=True)
class PathConfig:
    """GPIO front-end settings on a reception path; 4*4*2*2 = 64 combinations."""

    mode: GpioMode
    pupd: GpioPull
    output_value: OutputValue
    output_type: OutputType

    def short(self) -> str:
        return (
            f"{self.mode.value}/{self.pupd.value}/"
            f"{self.output_value.value}/{self.output_type.value}"
        )


@dataclass(frozen=True)
class ReceptionPathId:
    """One connection an on-chip ADC can be multiplexed to."""

    index: int
    label: str = ""

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("path index must be >= 0")


@dataclass(frozen=True)
class RfStimulus:
    """Signal-generator state: carrier frequency, power, on/off, and an
    optional amplitude envelope for modulated transmissions."""

    freq_hz: float
    power_dbm: float
    enabled: bool = False
    envelope: BasebandEnvelope | None = None

    def __post_init__(self):
        if self.freq_hz <= 0:
            raise ValueError("freq_hz must be positive")


@dataclass(frozen=True)
class DutDescriptor:
    """Capabilities of a DUT as reported by its backend."""

    n_paths: int
    resolution_bits: int = 12
    max_sample_rate_hz: float = 1_000_000.0
    oversampling_ratios: tuple[int, ...] = ALLOWED_OVERSAMPLING
    path_labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")


class SimulatedRfSource:
    """Stands in for the signal generator + amplifier + antenna chain."""

    def __init__(
        self,
        min_power_dbm: float = -40.0,
        max_power_dbm: float = 43.0,
        min_freq_hz: float = 1e6,
        max_freq_hz: float = 6e9,
    ):
        self.min_power_dbm = min_power_dbm
        self.max_power_dbm = max_power_dbm
        self.min_freq_hz = min_freq_hz
        self.max_freq_hz = max_freq_hz
        self._stimulus: RfStimulus | None = None

    @property
    def stimulus(self) -> RfStimulus | None:
        return self._stimulus

    def rf_set(self, stimulus: RfStimulus) -> None:
        if not self.min_power_dbm <= stimulus.power_dbm <= self.max_power_dbm:
            raise RfSourceError(
                f"power {stimulus.power_dbm} dBm outside "
                f"[{self.min_power_dbm}, {self.max_power_dbm}] dBm"
            )
        if not self.min_freq_hz <= stimulus.freq_hz <= self.max_freq_hz:
            raise RfSourceError(
                f"frequency {stimulus.freq_hz} Hz outside "
                f"[{self.min_freq_hz}, {self.max_freq_hz}] Hz"
            )
        self._stimulus = stimulus


def rf_set(source: SimulatedRfSource, stimulus: RfStimulus) -> None:
    """Module-level alias for driving any RF source object."""
    source.rf_set(stimulus)


class SimulatorBackend:
    """In-process backend: configure/capture straight into a SimulatedDut."""

    def __init__(self, dut: SimulatedDut, source: SimulatedRfSource):
        self.dut = dut
        self.source = source

    def describe(self) -> DutDescriptor:
        return DutDescriptor(
            n_paths=self.dut.n_paths,
            resolution_bits=self.dut.adc.resolution_bits,
            path_labels=tuple(self.dut.path_labels),
        )

    def configure(self, path: ReceptionPathId, config: PathConfig, adc: AdcConfig) -> None:
        if path.index >= self.dut.n_paths:
            raise UnknownPathError(
                f"unknown path {path.index} (device has {self.dut.n_paths})"
            )
        if adc.oversampling_ratio not in ALLOWED_OVERSAMPLING:
            raise UnsupportedSettingError(
                f"unsupported oversampling ratio {adc.oversampling_ratio}"
            )
        self.dut.configure(path.index, config, adc)

    def capture(self, n_blocks: int) -> AdcTrace:
        if not self.dut.configured:
            raise NotConfiguredError("capture before configure")
        return self.dut.capture(n_blocks, self.source.stimulus)

    def reset(self) -> None:
        self.dut.reset()
