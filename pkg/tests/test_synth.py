import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import thd_oracle
from pvrelay.detector import DetectorConfig, detect, ed_traces
from pvrelay.synth import (FAULT_TYPES, LOCATIONS, EventLabel, SweepConfig, SynthError, SynthParams,
                           add_noise, apply_ct_saturation, build_corpus, effective_gain, faulted_phases,
                           hif_path_current, synth_fault, synth_hif, synth_steady, synth_switching, zone_of)

M = 128


def fault(ft="ag", loc="f4", r=0.01, ang=0.0, pr="P"):
    return EventLabel("Fault", ft, loc, r, ang, pr)


def rms(x):
    return float(np.sqrt(np.mean(np.asarray(x) ** 2)))


class TestLabels:
    def test_zone_derivation_is_total(self):
        zones = [zone_of(loc) for loc in LOCATIONS]
        assert zones == ["backward"] * 3 + ["internal"] * 2 + ["forward"] * 3

    def test_fault_fields_required_for_faults(self):
        with pytest.raises(SynthError):
            EventLabel("Fault")
        with pytest.raises(SynthError):
            EventLabel("LoadSwitch", "ag", "f4")

    def test_unknown_codes_rejected(self):
        with pytest.raises(SynthError):
            EventLabel("Fault", "ad", "f4")
        with pytest.raises(SynthError):
            EventLabel("Fault", "ag", "f9")
        with pytest.raises(SynthError):
            EventLabel("Arc")

    def test_phase_classes(self):
        assert fault("abg").phase_class == "ab"
        assert fault("ac").phase_class == "ca"
        assert fault("abcg").phase_class == "abc"
        assert EventLabel("LoadSwitch").phase_class is None


class TestFault:
    def test_abcg_bolted_scales_all_phases(self):
        p = SynthParams()
        lab = fault("abcg", "f4", 0.01, 0.0)
        rec = synth_fault(lab, p, seed=1)
        n0 = rec.inception_index
        g = effective_gain(lab, p)
        lag = math.radians(p.fault_lag_deg["f4"])
        tau = p.dc_time_constant_s["f4"]
        th = 2 * np.pi * (np.arange(rec.n_samples) % M) / M
        t = np.arange(rec.n_samples - n0) / p.sample_rate_hz
        for k, x in enumerate(rec.currents):
            shift = -2 * np.pi * k / 3
            # closed-form model, written out independently of the generator
            expected = np.sin(th + shift)
            a_dc = p.dc_offset_fraction * (g - 1) * math.cos(math.radians(0.0 - 120.0 * k))
            expected[n0:] += (g - 1) * np.sin(th[n0:] + shift - lag) + a_dc * np.exp(-t / tau)
            np.testing.assert_allclose(x, expected, rtol=0, atol=1e-12)
            assert rms(x[n0:n0 + M]) >= 3.0 * rms(x[:M])

    def test_unit_gain_no_offset_is_passthrough(self):
        p = SynthParams(fault_current_gain={loc: 1.0 for loc in LOCATIONS}, dc_offset_fraction=0.0)
        rec = synth_fault(fault("abg", "f5", 0.0, 60.0), p, seed=3)
        steady = synth_steady(p)
        for x, s in zip(rec.currents, steady.currents):
            assert np.array_equal(x, s)

    def test_peak_inception_has_no_offset(self):
        lab = fault("ag", "f4", 0.01, 90.0)
        with_dc = synth_fault(lab, SynthParams(), seed=2)
        without = synth_fault(lab, SynthParams(dc_offset_fraction=0.0), seed=2)
        assert np.array_equal(with_dc.phase_a, without.phase_a)

    def test_dc_offset_sign_follows_point_on_wave(self):
        p0 = SynthParams(dc_offset_fraction=0.0)
        for ang, sign in ((0.0, 1.0), (180.0, -1.0)):
            lab = fault("ag", "f4", 0.01, ang)
            diff = synth_fault(lab, SynthParams(), 1).phase_a - synth_fault(lab, p0, 1).phase_a
            n0 = synth_fault(lab, p0, 1).inception_index
            assert np.sign(diff[n0]) == sign

    def test_unfaulted_phase_coupling_bounded(self):
        p = SynthParams()
        rec = synth_fault(fault("ag"), p, seed=4)
        steady = synth_steady(p)
        for k in (1, 2):
            dev = np.max(np.abs(rec.currents[k] - steady.currents[k]))
            assert dev <= 0.05 * p.prefault_amplitude + 1e-12

    def test_ground_fault_adds_zero_sequence(self):
        p = SynthParams()
        grounded = synth_fault(fault("abg"), p, seed=5)
        ungrounded = synth_fault(fault("ab"), p, seed=5)
        assert not np.array_equal(grounded.phase_a, ungrounded.phase_a)
        np.testing.assert_array_equal(grounded.phase_c, ungrounded.phase_c)

    def test_faulted_phases(self):
        assert faulted_phases("bcg") == (1, 2)
        assert faulted_phases("ac") == (0, 2)

    def test_errors(self):
        with pytest.raises(SynthError):
            synth_fault(fault(ang=360.0))
        with pytest.raises(SynthError):
            synth_fault(EventLabel("LoadSwitch"))
        with pytest.raises(SynthError):
            synth_fault(fault(r=-1.0))

    def test_ag_bolted_exceeds_reference_threshold(self):
        rec = synth_fault(fault("ag", "f4", 0.01, 0.0), seed=0)
        assert ed_traces(rec.currents, M)[0].max() > 0.06

    def test_record_length_and_rate(self):
        rec = synth_fault(fault())
        assert rec.n_samples == 6 * M
        assert rec.samples_per_cycle == M


class TestSwitching:
    def test_fast_damping_ring_dies_within_a_cycle(self):
        p = SynthParams(switch_damping_s=1e-6)
        rec = synth_switching("CapacitorSwitch", 0.0, p, seed=1)
        ed = ed_traces(rec.currents, M)
        n0 = rec.inception_index
        later = ed[:, n0 + 2 * M - (2 * M - 1):]
        assert later.max() < DetectorConfig().gamma

    def test_unit_step_is_steady(self):
        rec = synth_switching("LoadSwitch", 75.0, seed=2, step_factor=1.0)
        steady = synth_steady()
        for x, s in zip(rec.currents, steady.currents):
            assert np.array_equal(x, s)

    def test_load_step_factor_range(self):
        for rating in (1, 2, 3, 4):
            rec = synth_switching("LoadSwitch", 0.0, seed=0, rating=rating)
            assert 1.05 <= float(rec.meta["step_factor"]) <= 1.5

    def test_capacitor_ring_mirrors_at_half_cycle(self):
        def ring(angle):
            full = synth_switching("CapacitorSwitch", angle, seed=9)
            bare = synth_switching("CapacitorSwitch", angle, seed=9, ring_fraction=0.0)
            n0 = full.inception_index
            return (full.currents - bare.currents)[:, n0:n0 + 2 * M]
        np.testing.assert_allclose(ring(180.0), -ring(0.0), rtol=0, atol=1e-15)

    def test_osc_frequency_band(self):
        for bus in ("bus4", "bus8", "bus9"):
            for gen in ("connected", "disconnected"):
                rec = synth_switching("CapacitorSwitch", 0.0, seed=3, bus=bus, generator=gen)
                assert 300.0 <= float(rec.meta["osc_freq_hz"]) <= 900.0

    def test_rejects_unknown_kind(self):
        with pytest.raises(SynthError):
            synth_switching("Fault", 0.0)


class TestHif:
    def test_symmetric_sources_give_equal_peaks(self):
        p = SynthParams(hif_source_volts=(5.0, 5.0), hif_resistance_band=(100.0, 100.0))
        v = 187.8 * np.sin(2 * np.pi * np.arange(4 * M) / M)
        i = hif_path_current(v, p, np.random.default_rng(0))
        assert i.max() == pytest.approx(-i.min(), rel=1e-12)

    def test_dead_band_gives_no_current_and_no_trigger(self):
        p = SynthParams(hif_source_volts=(500.0, 400.0))
        rec = synth_hif(EventLabel("HIF", "ag", "f5", 0.0, 45.0), p, seed=1)
        assert np.array_equal(rec.currents, synth_steady(p).currents)
        assert not detect(rec, DetectorConfig()).triggered

    def test_default_band_is_nonstationary(self):
        p = SynthParams(record_cycles=13)
        rec = synth_hif(EventLabel("HIF", "ag", "f5", 0.0, 0.0), p, seed=4)
        path = rec.phase_a - synth_steady(p).phase_a
        n0 = rec.inception_index
        half = M // 2
        peaks = [np.max(np.abs(path[s:s + half])) for s in range(n0, n0 + 20 * half, half)]
        assert np.var(peaks) > 0.0

    @given(st.lists(st.floats(-300.0, 300.0), min_size=1, max_size=64), st.integers(0, 1000))
    @settings(max_examples=100, deadline=None)
    def test_conduction_rule_exact(self, volts, seed):
        p = SynthParams()
        v = np.array(volts)
        i = hif_path_current(v, p, np.random.default_rng(seed))
        vp, vn = p.hif_source_volts
        inside = (v > -vn) & (v < vp)
        assert np.all(i[inside] == 0.0)

    def test_asymmetric_half_cycles(self):
        p = SynthParams(hif_resistance_band=(100.0, 100.0))
        v = 187.8 * np.sin(2 * np.pi * np.arange(2 * M) / M)
        i = hif_path_current(v, p, np.random.default_rng(0))
        assert i.max() != pytest.approx(-i.min())

    def test_rejects_multiphase(self):
        with pytest.raises(SynthError):
            synth_hif(EventLabel("HIF", "ab", "f5", 0.0, 0.0))


class TestCtSaturation:
    def test_zero_burden_identity(self):
        rec = synth_fault(fault("abcg"), seed=1)
        out = apply_ct_saturation(rec, 0.0)
        assert np.array_equal(out.currents, rec.currents)

    def test_high_current_fault_distorts(self):
        rec = synth_fault(fault("abcg", "f4", 0.01, 90.0), seed=1)
        sat = apply_ct_saturation(rec, 20.0)
        n0 = rec.inception_index
        for k in range(3):
            assert thd_oracle(sat.currents[k][n0:], M) > thd_oracle(rec.currents[k][n0:], M)

    def test_low_steady_current_unchanged(self):
        p = SynthParams(prefault_amplitude=0.5)
        rec = synth_steady(p)
        out = apply_ct_saturation(rec, 20.0)
        np.testing.assert_allclose(out.currents, rec.currents, rtol=0, atol=1e-9)

    def test_label_and_length_preserved(self):
        rec = synth_fault(fault("bg"), seed=1)
        out = apply_ct_saturation(rec, 20.0)
        assert out.label == rec.label and out.n_samples == rec.n_samples

    def test_negative_burden_rejected(self):
        with pytest.raises(SynthError):
            apply_ct_saturation(synth_steady(), -1.0)


class TestNoise:
    def test_infinite_snr_identity(self):
        rec = synth_fault(fault())
        assert np.array_equal(add_noise(rec, math.inf, 0).currents, rec.currents)

    def test_measured_snr_matches_request(self):
        rec = synth_steady(SynthParams(record_cycles=12))
        noisy = add_noise(rec, 20.0, seed=11)
        for x, s in zip(noisy.currents, rec.currents):
            snr = 10 * np.log10(np.mean(s ** 2) / np.mean((x - s) ** 2))
            assert abs(snr - 20.0) <= 0.5

    def test_record_reference_on_fault(self):
        rec = synth_fault(fault("abcg"), SynthParams(record_cycles=12), seed=2)
        noisy = add_noise(rec, 20.0, seed=3, reference="record")
        for x, s in zip(noisy.currents, rec.currents):
            snr = 10 * np.log10(np.mean(s ** 2) / np.mean((x - s) ** 2))
            assert abs(snr - 20.0) <= 0.5

    def test_pre_event_reference_on_fault(self):
        rec = synth_fault(fault("abcg"), SynthParams(record_cycles=24), seed=2)
        noisy = add_noise(rec, 20.0, seed=3)
        n0 = rec.inception_index
        for x, s in zip(noisy.currents, rec.currents):
            snr = 10 * np.log10(np.mean(s[:2 * M] ** 2) / np.mean((x - s) ** 2))
            assert abs(snr - 20.0) <= 0.5
            assert n0 == 2 * M

    def test_deterministic(self):
        rec = synth_fault(fault())
        assert np.array_equal(add_noise(rec, 20.0, 5).currents, add_noise(rec, 20.0, 5).currents)
        assert not np.array_equal(add_noise(rec, 20.0, 5).currents, add_noise(rec, 20.0, 6).currents)

    def test_label_and_length_preserved(self):
        rec = synth_fault(fault())
        out = add_noise(rec, 30.0, 1)
        assert out.label == rec.label and out.n_samples == rec.n_samples

    def test_nan_rejected(self):
        with pytest.raises(SynthError):
            add_noise(synth_steady(), float("nan"), 0)


class TestCorpus:
    def test_desk_counts(self, desk_corpus):
        kinds = [r.label.kind for r in desk_corpus]
        assert kinds.count("Fault") == 960
        assert kinds.count("CapacitorSwitch") + kinds.count("LoadSwitch") == 480
        internal = sum(1 for r in desk_corpus if r.label.zone == "internal")
        assert internal >= 120
        assert len(desk_corpus) == SweepConfig().expected_count()

    def test_single_cell_sweep(self):
        sweep = SweepConfig(fault_locations=("f4",), fault_resistances=(1.0,), fault_angles=(0.0,),
                            fault_types=("ag",), fault_priorities=("P",), include_switching=False)
        assert len(build_corpus(sweep, 0)) == 1

    def test_full_fault_grid_size(self):
        sweep = dataclasses.replace(SweepConfig.full_grid(), include_switching=False)
        assert len(build_corpus(sweep, 0)) == 2880
        full = SweepConfig.full_grid()
        assert full.expected_count() == 2880 + 2400

    def test_empty_axis_rejected(self):
        with pytest.raises(SynthError):
            build_corpus(SweepConfig(fault_angles=()), 0)

    def test_pre_event_equals_steady(self, desk_corpus):
        steady = synth_steady().currents
        for rec in desk_corpus[::7]:
            n0 = rec.inception_index
            assert np.array_equal(rec.currents[:, :n0], steady[:, :n0])

    def test_deterministic_and_seeded(self):
        sweep = SweepConfig(fault_locations=("f5",), fault_resistances=(1.0,), switching_angles=(0.0,))
        a = build_corpus(sweep, 3)
        b = build_corpus(sweep, 3)
        assert all(np.array_equal(x.currents, y.currents) and x.seed == y.seed for x, y in zip(a, b))
        assert len({r.seed for r in a}) == len(a)

    def test_regenerate_from_stored_seed(self, desk_corpus):
        rec = next(r for r in desk_corpus if r.label.kind == "Fault")
        again = synth_fault(rec.label, SynthParams(), rec.seed)
        assert np.array_equal(again.currents, rec.currents)

    def test_all_fault_types_present(self, desk_corpus):
        assert {r.label.fault_type for r in desk_corpus if r.label.kind == "Fault"} == set(FAULT_TYPES)

    def test_scenario_params_applied(self):
        sweep = SweepConfig(fault_locations=("f4",), fault_resistances=(0.01,), fault_angles=(0.0,),
                            fault_types=("abcg",), fault_priorities=("P",), include_switching=False)
        rec = build_corpus(sweep, 0, SynthParams(noise_snr_db=20.0, ct_burden_ohm=20.0))[0]
        assert rec.meta["noise_snr_db"] == "20.0" and rec.meta["ct_burden_ohm"] == "20.0"


class TestParams:
    def test_validation(self):
        with pytest.raises(SynthError):
            SynthParams(sample_rate_hz=7000.0).validate()
        with pytest.raises(SynthError):
            SynthParams(record_cycles=3).validate()
        with pytest.raises(SynthError):
            SynthParams(fault_current_gain={"f1": 1.0}).validate()
        with pytest.raises(SynthError):
            SynthParams(hif_source_volts=(-1.0, 2.0)).validate()

    def test_gain_larger_near_relay(self):
        g = SynthParams().fault_current_gain
        assert min(g["f4"], g["f5"]) > max(g[k] for k in ("f1", "f2", "f3", "f6", "f7", "f8"))
