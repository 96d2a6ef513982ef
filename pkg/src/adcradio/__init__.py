"""adcradio: treat the ADC of a radio-less embedded device as a crude radio.

The toolkit simulates parasitic RF sensitivity of embedded boards, discovers
sensitive (path, configuration, frequency) combinations with an exhaustive
sweep, and decodes OOK transmissions with a lightweight software receiver,
including BER accounting and link-budget arithmetic.
"""

__version__ = "0.1.0"

from .backend import (
    BackendError,
    DutDescriptor,
    GpioMode,
    GpioPull,
    NotConfiguredError,
    OutputType,
    OutputValue,
    PathConfig,
    ReceptionPathId,
    RfSourceError,
    RfStimulus,
    SimulatedRfSource,
    SimulatorBackend,
    UnknownPathError,
    UnsupportedSettingError,
    rf_set,
)
from .protocol import (
    CaptureCommand,
    ConfigureCommand,
    DutProtocolServer,
    IdentifyCommand,
    LoopbackTransport,
    ProtocolError,
    ResetCommand,
    SerialBackend,
    decode_command,
    encode_command,
)
from .receiver import (
    BerReport,
    DemodParams,
    ber,
    demodulate,
    eye_opening,
    ideal_sync_ber_experiment,
    moving_average,
    normalize,
    recover_timing,
    remove_dc,
    slice_bits,
)
from .scenario import (
    Scenario,
    ScenarioError,
    build_rig,
    bundled_scenario_path,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .signals import (
    BasebandEnvelope,
    BitSequence,
    LinkBudget,
    dbm_to_mw,
    fspl_db,
    generate_bits,
    incident_power_dbm,
    modulate_ook,
    mw_to_dbm,
)
from .simulator import (
    AdcConfig,
    AdcTrace,
    BurstSpec,
    CouplingModel,
    DriftSpec,
    Resonance,
    RfChannel,
    SimulatedDut,
    adc_sample,
    add_impairments,
    apply_bandwidth,
    coupling_gain,
    detector_output,
    simulate_capture,
)
from .sweep import (
    SensitivityRecord,
    SnrEstimate,
    SnrSpectrum,
    SweepPlan,
    block_mean,
    classify_sensitive,
    default_sweep_frequencies,
    enumerate_configs,
    estimate_snr,
    peak_snr,
    recommended_configs,
    run_sweep,
    snr_from_stats,
    spectra_from_records,
)
