"""Block statistics, SNR estimation, configuration space, sweep orchestration."""

import numpy as np
import pytest

from adcradio.backend import (
    BackendError,
    GpioMode,
    GpioPull,
    OutputType,
    OutputValue,
    PathConfig,
    ReceptionPathId,
    SimulatedRfSource,
    SimulatorBackend,
)
from adcradio.simulator import AdcConfig, CouplingModel, Resonance, RfChannel, SimulatedDut
from adcradio.sweep import (
    SnrEstimate,
    SweepPlan,
    block_mean,
    classify_sensitive,
    enumerate_configs,
    estimate_snr,
    peak_snr,
    recommended_configs,
    run_sweep,
    snr_from_stats,
    spectra_from_records,
    SnrSpectrum,
)


class TestBlockMean:
    def test_arithmetic(self):
        np.testing.assert_allclose(block_mean(np.array([1, 1, 3, 3]), 2), [1.0, 3.0])

    def test_constant_trace(self):
        np.testing.assert_allclose(block_mean(np.full(64, 7), 32), [7.0, 7.0])

    def test_reference_block_sizing(self):
        means = block_mean(np.arange(1024), 32)
        assert means.shape == (32,)

    def test_indivisible_length_rejected(self):
        with pytest.raises(ValueError, match="not divisible"):
            block_mean(np.arange(10), 3)


class TestEstimateSnr:
    def test_identical_constants_no_response(self):
        est = estimate_snr([2048.0, 2048.0], [2048.0, 2048.0])
        assert est.is_none

    def test_zero_variance_with_shift_is_high(self):
        est = estimate_snr([2064.0, 2064.0], [2048.0, 2048.0])
        assert est.is_high

    def test_monte_carlo_matches_closed_form(self):
        # off ~ N(2048, 4), on ~ N(2064, 4): SNR = 10*log10((16/4)^2) = 12 dB
        rng = np.random.default_rng(2024)
        est = estimate_snr(
            rng.normal(2064.0, 4.0, 10_000), rng.normal(2048.0, 4.0, 10_000)
        )
        assert est.db == pytest.approx(12.0, abs=0.5)

    def test_empty_inputs_rejected(self):
        with pytest.raises(ValueError):
            estimate_snr([], [1.0, 2.0])

    def test_single_off_mean_uses_sentinels(self):
        assert estimate_snr([5.0], [1.0]).is_high
        assert estimate_snr([1.0], [1.0]).is_none

    def test_affine_invariance(self):
        rng = np.random.default_rng(7)
        on = rng.normal(2060.0, 3.0, 500)
        off = rng.normal(2048.0, 3.0, 500)
        base = estimate_snr(on, off).db
        for _ in range(100):
            a = rng.uniform(0.1, 10.0) * rng.choice([-1.0, 1.0])
            b = rng.uniform(-500.0, 500.0)
            est = estimate_snr(a * on + b, a * off + b)
            assert est.db == pytest.approx(base, abs=1e-9)


class TestSnrEstimateOrdering:
    def test_sort_values(self):
        assert SnrEstimate.none().sort_value() == -np.inf
        assert SnrEstimate.high().sort_value() == np.inf
        assert SnrEstimate.finite(3.0).sort_value() == 3.0

    def test_json_round_trip(self):
        for est in (SnrEstimate.none(), SnrEstimate.high(), SnrEstimate.finite(-4.5)):
            assert SnrEstimate.from_json(est.to_json()) == est

    def test_snr_from_stats_negative_variance_rejected(self):
        with pytest.raises(ValueError):
            snr_from_stats(1.0, -1.0)


def spectrum_of(points):
    cfg = enumerate_configs()[0]
    return SnrSpectrum(path=ReceptionPathId(0), config=cfg, points=tuple(points))


class TestPeakAndClassify:
    def test_single_point(self):
        s = spectrum_of([(100e6, SnrEstimate.finite(5.0))])
        assert peak_snr(s) == (100e6, SnrEstimate.finite(5.0))

    def test_high_beats_finite(self):
        s = spectrum_of(
            [(100e6, SnrEstimate.finite(10.0)), (200e6, SnrEstimate.high())]
        )
        freq, best = peak_snr(s)
        assert freq == 200e6 and best.is_high

    def test_tie_breaks_to_lowest_frequency(self):
        s = spectrum_of(
            [(100e6, SnrEstimate.finite(10.0)), (200e6, SnrEstimate.finite(10.0))]
        )
        assert peak_snr(s)[0] == 100e6

    def test_empty_spectrum_rejected(self):
        with pytest.raises(ValueError):
            peak_snr(spectrum_of([]))

    def test_classify_threshold_boundary(self):
        below = spectrum_of([(1e8, SnrEstimate.finite(9.9))])
        at = spectrum_of([(1e8, SnrEstimate.finite(10.0))])
        above = spectrum_of([(1e8, SnrEstimate.finite(33.0))])
        assert not classify_sensitive(below, 10.0)
        assert classify_sensitive(at, 10.0)
        assert classify_sensitive(above, 10.0)

    def test_all_none_is_insensitive(self):
        s = spectrum_of([(1e8, SnrEstimate.none()), (2e8, SnrEstimate.none())])
        assert not classify_sensitive(s, 10.0)

    def test_classify_monotone_in_threshold(self):
        rng = np.random.default_rng(3)
        s = spectrum_of(
            [(f, SnrEstimate.finite(rng.uniform(-5, 30))) for f in np.arange(1, 20) * 1e7]
        )
        decisions = [classify_sensitive(s, t) for t in np.linspace(-10, 40, 26)]
        # once False, never True again as threshold rises
        assert decisions == sorted(decisions, reverse=True)


class TestConfigSpace:
    def test_enumerate_64_unique(self):
        configs = enumerate_configs()
        assert len(configs) == 64
        assert len(set(configs)) == 64

    def test_enumerate_order_is_mode_major(self):
        first = enumerate_configs()[0]
        assert first == PathConfig(
            mode=GpioMode.INPUT,
            pupd=GpioPull.NONE,
            output_value=OutputValue.HIGH,
            output_type=OutputType.PUSH_PULL,
        )

    def test_recommended_eight_rows(self):
        rec = recommended_configs()
        assert len(rec) == 8
        # row 4 (index 3): analog, pull-down, high, open-drain
        assert rec[3] == PathConfig(
            mode=GpioMode.ANALOG,
            pupd=GpioPull.PULL_DOWN,
            output_value=OutputValue.HIGH,
            output_type=OutputType.OPEN_DRAIN,
        )
        # rows 1..4 pull-down/high, rows 5..8 pull-up/low, all open-drain
        for i, cfg in enumerate(rec):
            assert cfg.output_type == OutputType.OPEN_DRAIN
            if i < 4:
                assert (cfg.pupd, cfg.output_value) == (GpioPull.PULL_DOWN, OutputValue.HIGH)
            else:
                assert (cfg.pupd, cfg.output_value) == (GpioPull.PULL_UP, OutputValue.LOW)

    def test_recommended_subset_of_enumeration(self):
        assert set(recommended_configs()) <= set(enumerate_configs())


def small_rig(coupling=None, noise=0.0, seed=0, n_paths=3):
    adc = AdcConfig(samples_per_block=16)
    dut = SimulatedDut(
        n_paths=n_paths,
        adc=adc,
        channel=RfChannel(),
        coupling=coupling or {},
        default_model=CouplingModel(noise_sigma=noise),
        seed=seed,
    )
    source = SimulatedRfSource()
    return SimulatorBackend(dut, source), source, adc


class TestRunSweep:
    def make_plan(self, adc, n_paths=2, n_configs=2, n_freqs=3, **kwargs):
        return SweepPlan(
            paths=tuple(ReceptionPathId(i, f"P{i}") for i in range(n_paths)),
            configs=tuple(enumerate_configs()[:n_configs]),
            freqs_hz=tuple(np.linspace(300e6, 700e6, n_freqs)),
            samples_per_block=16,
            adc=adc,
            **kwargs,
        )

    def test_cardinality_and_order(self):
        backend, source, adc = small_rig()
        plan = self.make_plan(adc, 2, 2, 3)
        records = run_sweep(plan, backend, source)
        assert len(records) == 12
        expected = [
            (p.index, c, f)
            for p in plan.paths
            for c in plan.configs
            for f in plan.freqs_hz
        ]
        assert [(r.path.index, r.config, r.freq_hz) for r in records] == expected

    def test_zero_coupling_no_noise_all_no_response(self):
        backend, source, adc = small_rig(noise=0.0)
        records = run_sweep(plan := self.make_plan(adc), backend, source)
        assert all(rec.snr.is_none for rec in records)
        assert not any(rec.failed for rec in records)

    def test_planted_resonance_found_with_perfect_precision(self):
        target = enumerate_configs()[1]
        model = CouplingModel(resonances=(Resonance(500e6, 40e6, 300.0),))
        backend, source, adc = small_rig(
            coupling={(1, target): model}, noise=2.0, seed=5
        )
        plan = self.make_plan(adc, 3, 2, 9, blocks_per_state=8)
        records = run_sweep(plan, backend, source)
        flagged = {
            (s.path.index, s.config)
            for s in spectra_from_records(records)
            if classify_sensitive(s, 10.0)
        }
        assert flagged == {(1, target)}

    def test_strictly_increasing_frequencies_required(self):
        backend, source, adc = small_rig()
        with pytest.raises(ValueError, match="strictly increasing"):
            SweepPlan(
                paths=(ReceptionPathId(0),),
                configs=(enumerate_configs()[0],),
                freqs_hz=(2e8, 2e8),
                adc=adc,
            )

    def test_failed_cells_marked_not_dropped(self):
        class FlakyBackend(SimulatorBackend):
            def __init__(self, dut, source):
                super().__init__(dut, source)
                self.calls = 0

            def capture(self, n_blocks):
                self.calls += 1
                if self.calls % 7 == 3:
                    raise BackendError("injected fault")
                return super().capture(n_blocks)

        adc = AdcConfig(samples_per_block=16)
        dut = SimulatedDut(
            n_paths=2, adc=adc, channel=RfChannel(), default_model=CouplingModel(noise_sigma=1.0)
        )
        source = SimulatedRfSource()
        backend = FlakyBackend(dut, source)
        plan = self.make_plan(adc, 2, 2, 5)
        records = run_sweep(plan, backend, source)
        assert len(records) == 20
        failed = [r for r in records if r.failed]
        assert failed and all(r.error == "injected fault" for r in failed)
        assert all(r.snr.is_none for r in failed)

    def test_affine_invariance_through_pipeline(self):
        # one cell's records: shifting/scaling every sample leaves SNR alone;
        # realized here by scaling the detector gain and noise together via a
        # synthetic trace transform at the estimator level instead
        rng = np.random.default_rng(0)
        on = rng.normal(2060.0, 2.0, 64)
        off = rng.normal(2048.0, 2.0, 64)
        base = estimate_snr(on, off)
        moved = estimate_snr(3.5 * on - 100.0, 3.5 * off - 100.0)
        assert moved.db == pytest.approx(base.db, abs=1e-9)

    def test_deterministic_given_seed(self):
        results = []
        for _ in range(2):
            backend, source, adc = small_rig(noise=3.0, seed=77)
            plan = self.make_plan(adc)
            records = run_sweep(plan, backend, source)
            results.append([(r.mean_on, r.mean_off, r.var_off) for r in records])
        assert results[0] == results[1]
