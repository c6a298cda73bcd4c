# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: test_channel.py
# ----------------------------------------------------------------------------------
# Purpose:
# This module provides tests for the UWB channel simulation and the scripted
# activity / environment library.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import logging
import math
import sys
from pathlib import Path
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

# Add the project root to Python path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from uwb_har.services.activities import Activity, SceneConfig, activity_profile, build_scene, empty_profile, environment
from uwb_har.services.channel import (
    SPEED_OF_LIGHT,
    ChannelError,
    MotionProfile,
    MotionSegment,
    NoiseModel,
    PathModel,
    PathOverride,
    RadioConfig,
    range_resolution,
    simulate_activity,
    synth_frame,
    synth_pulse,
)


class TestRadioConfig:
    """Test cases for radio parameters and the range grid."""

    @pytest.fixture
    def radio(self):
        return RadioConfig()

    def test_range_resolution_default_bandwidth(self, radio):
        """Test c/(2B) and 1/(2B) at 1.4 GHz."""
        dr, dt = range_resolution(radio)
        assert dr == pytest.approx(SPEED_OF_LIGHT / 2.8e9)
        assert dr == pytest.approx(0.1071, abs=1e-4)
        assert dt == pytest.approx(1.0 / 2.8e9)

    def test_sixty_bins_span_about_six_metres(self, radio):
        assert radio.fast_time_bins * radio.bin_spacing_m == pytest.approx(6.43, abs=0.01)

    def test_invalid_bandwidth_rejected(self):
        with pytest.raises(ChannelError) as excinfo:
            RadioConfig(bandwidth_hz=0.0)
        assert excinfo.value.kind == "invalid-argument"

    def test_fast_time_window_must_fit_frame_period(self):
        with pytest.raises(ChannelError):
            RadioConfig(pulse_repetition_hz=1e9)

    def test_bin_range_mapping_is_inverse(self, radio):
        for range_m in (0.5, 2.0, 4.7):
            assert radio.range_of_bin(radio.bin_of_range(range_m)) == pytest.approx(range_m)


class TestPulseAndFrames:
    """Test cases for pulse and frame synthesis."""

    @pytest.fixture
    def radio(self):
        return RadioConfig()

    def test_pulse_peaks_at_half_duration(self, radio):
        pulse = synth_pulse(radio, 16)
        assert pulse.shape == (16,)
        assert int(np.argmax(pulse)) == round(radio.pulse_duration_s / 2 / radio.adc_interval_s)
        assert pulse.max() <= radio.pulse_amplitude

    def test_pulse_needs_positive_length(self, radio):
        with pytest.raises(ChannelError):
            synth_pulse(radio, 0)

    def test_static_path_peaks_at_its_range_bin(self, radio):
        path = PathModel(attenuation=1.0, range_m=2.0)
        frame = synth_frame(radio, [path], 0, NoiseModel())
        assert frame.shape == (radio.fast_time_bins,)
        assert int(np.argmax(np.abs(frame))) == round(radio.bin_of_range(2.0))

    def test_one_metre_moves_peak_by_range_resolution(self, radio):
        near = synth_frame(radio, [PathModel(attenuation=1.0, range_m=1.5)], 0, NoiseModel())
        far = synth_frame(radio, [PathModel(attenuation=1.0, range_m=2.5)], 0, NoiseModel())
        shift = int(np.argmax(np.abs(far))) - int(np.argmax(np.abs(near)))
        assert abs(shift - round(1.0 / radio.bin_spacing_m)) <= 1

    def test_frame_matches_closed_form(self, radio):
        """Each path contributes a * p(t - tau) * exp(j 2 pi fc tau)."""
        path = PathModel(attenuation=0.3, range_m=3.1)
        frame = synth_frame(radio, [path], 0, NoiseModel())
        tau = 2 * path.range_m / radio.propagation_speed_mps
        t = np.arange(radio.fast_time_bins) * radio.adc_interval_s
        envelope = np.exp(-((t - tau - radio.pulse_duration_s / 2) ** 2) / (2 * radio.sigma_p**2))
        expected = 0.3 * envelope * np.exp(1j * 2 * math.pi * radio.carrier_freq_hz * tau)
        np.testing.assert_allclose(frame, expected, rtol=1e-9, atol=1e-12)

    def test_no_paths_no_noise_is_silent(self, radio):
        assert np.all(synth_frame(radio, [], 3, NoiseModel()) == 0)

    def test_frame_and_scene_agree_for_same_index(self, radio):
        paths = [PathModel(attenuation=1.0, range_m=2.7), PathModel(attenuation=0.2, range_m=1.3)]
        noise = NoiseModel(awgn_variance=1e-4, phase_jitter_std_rad=0.1, seed=11)
        profile = MotionProfile(label="static", segments=(MotionSegment(0.1),))
        scene = simulate_activity(radio, paths, profile, noise, 0.1)
        for k in (0, 7, scene.n_frames - 1):
            np.testing.assert_allclose(synth_frame(radio, paths, k, noise), scene.data[k], rtol=1e-10, atol=1e-14)



class TestChannelInvariants:
    """Test cases for superposition, spectral and energy properties of the channel."""

    @pytest.fixture
    def radio(self):
        return RadioConfig()

    def test_frame_is_linear_in_the_path_sum(self, radio):
        first = [PathModel(attenuation=1.0, range_m=2.7), PathModel(attenuation=0.4, range_m=1.1, radial_speed_mps=0.8)]
        second = [PathModel(attenuation=0.25, range_m=3.4, micro_amplitude_m=0.01, micro_freq_hz=1.5)]
        for k in (0, 37, 399):
            combined = synth_frame(radio, first + second, k, NoiseModel())
            separate = synth_frame(radio, first, k, NoiseModel()) + synth_frame(radio, second, k, NoiseModel())
            np.testing.assert_allclose(combined, separate, rtol=1e-12, atol=1e-15)

    def test_static_scene_energy_sits_at_zero_doppler(self, radio):
        paths = [PathModel(attenuation=1.0, range_m=2.7), PathModel(attenuation=0.3, range_m=1.6)]
        frames = simulate_activity(radio, paths, MotionProfile(label="static", segments=(MotionSegment(1.0),)), NoiseModel(), 1.0)
        for range_m in (2.7, 1.6):
            energy = np.abs(np.fft.fft(frames.data[:, round(radio.bin_of_range(range_m))])) ** 2
            assert energy[0] / energy.sum() >= 0.999

    def test_micro_motion_shows_sidebands_at_its_rate(self, radio):
        mover = PathModel(attenuation=1.0, range_m=radio.range_of_bin(20), micro_amplitude_m=0.001, micro_freq_hz=10.0)
        profile = MotionProfile(label="flutter", segments=(MotionSegment(1.0),), paths=(mover,))
        frames = simulate_activity(radio, [], profile, NoiseModel(), 1.0)
        spectrum = np.abs(np.fft.fft(frames.data[:, 20]))
        spectrum[0] = 0.0
        assert sorted(np.argsort(spectrum)[-2:].tolist()) == [10, 390]
        assert spectrum[10] == pytest.approx(spectrum[390], rel=1e-6)

    def test_doubling_attenuation_quadruples_power(self, radio):
        weak = synth_frame(radio, [PathModel(attenuation=0.3, range_m=2.2)], 5, NoiseModel())
        strong = synth_frame(radio, [PathModel(attenuation=0.6, range_m=2.2)], 5, NoiseModel())
        assert np.sum(np.abs(strong) ** 2) / np.sum(np.abs(weak) ** 2) == pytest.approx(4.0, rel=1e-12)

    def test_approaching_target_moves_to_earlier_bins(self, radio):
        profile = MotionProfile(label="approach", segments=(MotionSegment(1.0),), paths=(PathModel(attenuation=1.0, range_m=3.5, radial_speed_mps=-1.0),))
        frames = simulate_activity(radio, [], profile, NoiseModel(), 1.0)
        first, last = int(np.argmax(np.abs(frames.data[0]))), int(np.argmax(np.abs(frames.data[-1])))
        assert abs((first - last) - round(1.0 / radio.bin_spacing_m)) <= 1


class TestNoise:
    """Test cases for AWGN and phase jitter."""

    def test_awgn_total_variance_split_over_quadratures(self):
        radio = RadioConfig()
        noise = NoiseModel(awgn_variance=2.0, seed=5)
        frames = simulate_activity(radio, [], MotionProfile(label="empty", segments=(MotionSegment(5.0),)), noise, 5.0)
        samples = frames.data.ravel()
        assert np.mean(np.abs(samples) ** 2) == pytest.approx(2.0, rel=0.05)
        assert np.var(samples.real) == pytest.approx(1.0, rel=0.05)
        assert np.var(samples.imag) == pytest.approx(1.0, rel=0.05)

    def test_same_seed_same_frames(self):
        radio = RadioConfig()
        paths = [PathModel(attenuation=1.0, range_m=2.0)]
        profile = MotionProfile(label="static", segments=(MotionSegment(0.2),))
        a = simulate_activity(radio, paths, profile, NoiseModel(1e-3, 0.05, seed=3), 0.2)
        b = simulate_activity(radio, paths, profile, NoiseModel(1e-3, 0.05, seed=3), 0.2)
        c = simulate_activity(radio, paths, profile, NoiseModel(1e-3, 0.05, seed=4), 0.2)
        assert np.array_equal(a.data, b.data)
        assert not np.array_equal(a.data, c.data)

    def test_negative_variance_rejected(self):
        with pytest.raises(ChannelError):
            NoiseModel(awgn_variance=-1.0)


class TestSimulateActivity:
    """Test cases for scene simulation with moving scatterers."""

    @pytest.fixture
    def radio(self):
        return RadioConfig()

    @pytest.fixture
    def mock_logger(self):
        return MagicMock(spec=logging.Logger)

    def test_receding_target_moves_to_later_bins(self, radio):
        profile = MotionProfile(label="recede", segments=(MotionSegment(1.0),), paths=(PathModel(attenuation=1.0, range_m=2.0, radial_speed_mps=1.0),))
        frames = simulate_activity(radio, [], profile, NoiseModel(), 1.0)
        assert frames.data.shape == (400, radio.fast_time_bins)
        first, last = int(np.argmax(np.abs(frames.data[0]))), int(np.argmax(np.abs(frames.data[-1])))
        assert abs((last - first) - round(1.0 / radio.bin_spacing_m)) <= 1

    def test_segment_override_changes_speed(self, radio):
        profile = MotionProfile(
            label="start-stop",
            segments=(MotionSegment(0.5, {0: PathOverride(radial_speed_mps=0.0)}), MotionSegment(0.5, {0: PathOverride(radial_speed_mps=2.0)})),
            paths=(PathModel(attenuation=1.0, range_m=2.0),),
        )
        frames = simulate_activity(radio, [], profile, NoiseModel(), 1.0)
        still = np.abs(frames.data[:200])
        assert np.allclose(still, still[0])
        assert int(np.argmax(np.abs(frames.data[-1]))) > int(np.argmax(np.abs(frames.data[0])))

    def test_profile_through_antenna_raises(self, radio):
        profile = MotionProfile(label="crash", segments=(MotionSegment(1.0),), paths=(PathModel(attenuation=1.0, range_m=0.5, radial_speed_mps=-1.0),))
        with pytest.raises(ChannelError):
            simulate_activity(radio, [], profile, NoiseModel(), 1.0)

    def test_non_positive_duration_raises(self, radio):
        with pytest.raises(ChannelError):
            simulate_activity(radio, [], empty_profile(SceneConfig()), NoiseModel(), 0.0)

    def test_profile_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ChannelError) as excinfo:
            MotionProfile.from_dict({"label": "x", "segments": [{"duration_s": 1.0}], "speed": 3})
        assert excinfo.value.kind == "config"

    def test_profile_from_dict(self):
        profile = MotionProfile.from_dict(
            {
                "label": "wave",
                "paths": [{"attenuation": 0.5, "range_m": 2.0}],
                "segments": [{"duration_s": 0.5}, {"duration_s": 0.5, "overrides": {0: {"radial_speed_mps": 0.3}}}],
            }
        )
        assert profile.total_duration_s == pytest.approx(1.0)
        assert profile.segments[1].overrides[0].radial_speed_mps == pytest.approx(0.3)

    def test_simulation_logs_its_size(self, radio, mock_logger):
        with patch("uwb_har.services.channel.get_logger", return_value=mock_logger):
            simulate_activity(radio, [PathModel(1.0, 2.0)], empty_profile(SceneConfig()), NoiseModel(), 0.1)
        mock_logger.info.assert_called_once()
        assert "40 frames" in mock_logger.info.call_args[0][0]


class TestActivityLibrary:
    """Test cases for activities, environments and scene assembly."""

    @pytest.fixture
    def scene(self):
        return SceneConfig()

    def test_activity_codes_and_order(self):
        assert [a.code for a in Activity] == ["B", "F", "L", "SU", "SD", "SQ", "W"]
        assert Activity.parse("sd") is Activity.SITTING_DOWN
        assert Activity.parse("walking") is Activity.WALKING
        assert Activity.from_index(6) is Activity.WALKING

    def test_unknown_activity_raises(self):
        with pytest.raises(ChannelError):
            Activity.parse("jumping")

    def test_environment_is_deterministic(self):
        assert environment(3, seed=1) == environment(3, seed=1)
        assert environment(3, seed=1) != environment(4, seed=1)

    def test_clutter_stays_inside_range_window(self):
        radio = RadioConfig()
        for env_id in range(7):
            assert all(0 < path.range_m <= radio.max_range_m for path in environment(env_id, radio=radio).clutter)

    def test_scene_is_deterministic_per_sample_index(self, scene):
        env = environment(0)
        a = build_scene(Activity.BENDING, env, scene, seed=0, sample_index=0)
        b = build_scene(Activity.BENDING, env, scene, seed=0, sample_index=0)
        c = build_scene(Activity.BENDING, env, scene, seed=0, sample_index=1)
        assert a == b
        assert a != c

    def test_scatterer_geometry_follows_mount_height(self, scene):
        env = environment(0)
        built = build_scene(Activity.WALKING, env, scene, seed=0, distance_m=2.0)
        # head, torso, legs with gain / R^2 amplitudes
        for gain, path in zip((0.5, 1.0, 0.6), built.profile.paths):
            assert 2.0 <= path.range_m <= math.hypot(scene.mount_height_m, 2.0)
            assert path.attenuation * path.range_m**2 == pytest.approx(scene.human_gain * gain)

    def test_empty_room_has_no_subject(self, scene):
        built = build_scene(None, environment(1), scene, seed=0, occupied=False)
        assert built.profile.paths == ()
        assert built.profile.label == "empty"

    def test_idle_subject_only_breathes(self, scene):
        built = build_scene(None, environment(1), scene, seed=0)
        assert built.profile.label == "idle"
        assert all(p.radial_speed_mps == 0 for p in built.profile.paths)

    def test_scene_duration_includes_warmup(self, scene):
        built = build_scene(Activity.FALLING, environment(2), scene, seed=0)
        assert built.duration_s == pytest.approx(scene.warmup_s + scene.window_s)

    def test_every_activity_simulates(self, scene):
        radio = RadioConfig()
        env = environment(0)
        for activity in Activity:
            built = build_scene(activity, env, scene, seed=0)
            frames = simulate_activity(radio, built.static_paths, built.profile, built.noise, built.duration_s)
            assert frames.data.shape == (600, 60)

    def test_scripted_motion_starts_after_warmup(self, scene):
        for activity in Activity:
            if activity is Activity.WALKING:
                continue
            profile = activity_profile(activity, np.random.default_rng(5), scene, distance_m=1.5)
            onset, motion, rest = profile.segments
            assert profile.label == activity.value
            assert onset.duration_s > scene.warmup_s
            assert any(override.radial_speed_mps != 0 for override in motion.overrides.values())
            assert profile.total_duration_s >= scene.duration_s - 1e-9

    def test_walking_moves_for_the_whole_scene(self, scene):
        profile = activity_profile(Activity.WALKING, np.random.default_rng(0), scene, distance_m=1.0)
        assert len(profile.segments) == 1
        assert profile.segments[0].duration_s == pytest.approx(scene.duration_s)
        # close to the sensor the subject always walks away
        assert all(override.radial_speed_mps > 0 for override in profile.segments[0].overrides.values())
