"""Pulse, filter, and temporal-mode layer."""

import numpy as np
import pytest

from kerrgate import (
    GaussianPulse,
    ResolutionError,
    SpectralFilter,
    TemporalMode,
    default_time_grid,
    frequency_bandwidth,
    hermite_gauss_amplitude,
    mode_transmission,
    normalized_intensity,
    pulse_intensity_profile,
    sampled_fwhm,
    transform_limited_duration,
)
from kerrgate.kerr import SwitchProfile
from kerrgate.pulses import FWHM_TO_SIGMA, GAUSSIAN_TBP

# Hand-checked transform limits: 0.441 lambda^2 / (c dlambda), evaluated in
# extended precision and frozen here.
TL_800NM_1NM = 0.94145130228726e-12
TL_PUMP = 4.4831014394631637e-13  # 800 nm, 2.1 nm
TL_SIGNAL = 4.4957124038123732e-13  # 720.8 nm, 1.7 nm


def test_transform_limit_reference_value():
    assert transform_limited_duration(800e-9, 1.0e-9) == pytest.approx(TL_800NM_1NM, rel=1e-12)


def test_transform_limit_default_pulses():
    assert transform_limited_duration(800e-9, 2.1e-9) == pytest.approx(TL_PUMP, rel=1e-12)
    assert transform_limited_duration(720.8e-9, 1.7e-9) == pytest.approx(TL_SIGNAL, rel=1e-12)


def test_time_bandwidth_product_reciprocity():
    # duration * frequency bandwidth must recover the constant product
    rng = np.random.default_rng(7)
    for _ in range(200):
        lam = rng.uniform(400e-9, 1600e-9)
        dlam = rng.uniform(0.1e-9, 10e-9)
        product = transform_limited_duration(lam, dlam) * frequency_bandwidth(lam, dlam)
        assert abs(product - GAUSSIAN_TBP) <= 1e-9 * GAUSSIAN_TBP


def test_duration_inverse_in_bandwidth():
    assert transform_limited_duration(800e-9, 4.2e-9) == pytest.approx(TL_PUMP / 2.0, rel=1e-12)


def test_frequency_bandwidth_rejects_nonpositive():
    with pytest.raises(ValueError):
        frequency_bandwidth(-800e-9, 1e-9)
    with pytest.raises(ValueError):
        frequency_bandwidth(800e-9, 0.0)


def test_pulse_defaults_to_transform_limit():
    pulse = GaussianPulse(800e-9, 2.1e-9, 1e-9)
    assert pulse.fwhm_duration == pytest.approx(TL_PUMP, rel=1e-12)
    assert pulse.is_transform_limited


def test_pulse_rejects_sub_limit_duration():
    with pytest.raises(ValueError):
        GaussianPulse(800e-9, 2.1e-9, 1e-9, fwhm_duration=0.9 * TL_PUMP)


def test_pulse_accepts_broadened_duration():
    pulse = GaussianPulse(800e-9, 2.1e-9, 1e-9, fwhm_duration=10e-12)
    assert pulse.fwhm_duration == 10e-12
    assert not pulse.is_transform_limited


def test_sigma_fwhm_relation():
    pulse = GaussianPulse(800e-9, 2.1e-9, 1e-9)
    assert pulse.sigma == pytest.approx(pulse.fwhm_duration * FWHM_TO_SIGMA, rel=1e-15)
    assert FWHM_TO_SIGMA == pytest.approx(1.0 / (2.0 * np.sqrt(2.0 * np.log(2.0))), rel=1e-15)


def test_intensity_profile_energy_and_width():
    pulse = GaussianPulse(800e-9, 2.1e-9, 2.47e-9)
    grid = default_time_grid(40e-12, 16384)
    profile = pulse_intensity_profile(pulse, grid)
    assert np.trapezoid(profile, grid) == pytest.approx(pulse.pulse_energy, rel=1e-6)
    assert grid[np.argmax(profile)] == pytest.approx(0.0, abs=grid[1] - grid[0])
    assert sampled_fwhm(grid, profile) == pytest.approx(pulse.fwhm_duration, rel=1e-4)


def test_intensity_profile_zero_energy():
    pulse = GaussianPulse(800e-9, 2.1e-9, 0.0)
    grid = default_time_grid(40e-12, 16384)
    assert np.all(pulse_intensity_profile(pulse, grid) == 0.0)


def test_intensity_profile_grid_guards():
    pulse = GaussianPulse(800e-9, 2.1e-9, 1e-9)
    with pytest.raises(ValueError):
        # span shorter than 3 FWHM on each side
        pulse_intensity_profile(pulse, default_time_grid(2e-12, 4096))
    with pytest.raises(ResolutionError):
        pulse_intensity_profile(pulse, default_time_grid(40e-12, 64))
    with pytest.raises(ValueError):
        pulse_intensity_profile(pulse, np.array([0.0, -1e-12, 1e-12]))


def test_normalized_intensity_unit_area():
    grid = default_time_grid(40e-12, 8192)
    shape = normalized_intensity(1e-12, grid)
    assert np.trapezoid(shape, grid) == pytest.approx(1.0, rel=1e-9)
    with pytest.raises(ValueError):
        normalized_intensity(0.0, grid)


def test_default_time_grid_shape():
    grid = default_time_grid(40e-12, 16384)
    assert grid.size == 16384
    assert grid[0] == -20e-12 and grid[-1] == 20e-12
    with pytest.raises(ValueError):
        default_time_grid(40e-12, 1)


def test_spectral_filter_half_power_points():
    filt = SpectralFilter(720.8e-9, 1.7e-9, peak_transmission=0.93)
    half = filt.frequency_fwhm / 2.0
    trans = filt.intensity_transmission(np.array([-half, 0.0, half]))
    assert trans[1] == pytest.approx(0.93, rel=1e-12)
    assert trans[0] == pytest.approx(0.465, rel=1e-9)
    assert trans[2] == pytest.approx(0.465, rel=1e-9)
    amp = filt.amplitude_transmission(np.array([half]))
    assert amp[0] == pytest.approx(np.sqrt(0.465), rel=1e-9)


def test_spectral_filter_validation():
    with pytest.raises(ValueError):
        SpectralFilter(720.8e-9, -1.7e-9)
    with pytest.raises(ValueError):
        SpectralFilter(720.8e-9, 1.7e-9, peak_transmission=1.2)


def test_temporal_mode_matched_duration():
    signal = GaussianPulse(720.8e-9, 1.7e-9, 0.0)
    mode = TemporalMode.matched_to(signal, 3)
    assert mode.order == 3
    assert mode.characteristic_duration == pytest.approx(
        signal.fwhm_duration / (2.0 * np.sqrt(np.log(2.0))), rel=1e-12
    )
    with pytest.raises(ValueError):
        TemporalMode(-1, 1e-12)
    with pytest.raises(ValueError):
        TemporalMode(0, 0.0)


def test_hermite_gauss_orthonormality():
    grid = default_time_grid(40e-12, 8192)
    tau = 0.27e-12
    amps = [hermite_gauss_amplitude(TemporalMode(n, tau), grid) for n in range(7)]
    gram = np.array([[np.trapezoid(a * b, grid) for b in amps] for a in amps])
    assert np.max(np.abs(gram - np.eye(7))) < 1e-5


def test_hermite_gauss_order0_is_gaussian():
    signal = GaussianPulse(720.8e-9, 1.7e-9, 0.0)
    grid = default_time_grid(40e-12, 8192)
    psi = hermite_gauss_amplitude(TemporalMode.matched_to(signal, 0), grid)
    assert np.max(np.abs(psi**2 - normalized_intensity(signal.fwhm_duration, grid))) < 1e-6 * np.max(psi**2)


def test_hermite_gauss_node_count():
    grid = default_time_grid(40e-12, 8192)
    for n in (1, 2, 3, 4):
        psi = hermite_gauss_amplitude(TemporalMode(n, 0.27e-12), grid)
        # count strict sign changes away from the numerically-zero tails
        core = psi[np.abs(psi) > 1e-6 * np.max(np.abs(psi))]
        assert int(np.sum(np.diff(np.sign(core)) != 0)) == n


def _unit_gate(grid, lo, hi):
    eta = np.where((grid >= lo) & (grid <= hi), 1.0, 0.0)
    return SwitchProfile(time_grid=grid, efficiency=eta)


def test_mode_transmission_passthrough():
    grid = default_time_grid(40e-12, 8192)
    mode = TemporalMode(0, 0.27e-12)
    # open everywhere except the outermost samples so the width stays defined
    open_gate = _unit_gate(grid, grid[2], grid[-3])
    assert mode_transmission(mode, open_gate) == pytest.approx(1.0, abs=1e-9)
    wide = SpectralFilter(720.8e-9, 400e-9)
    assert mode_transmission(mode, None, wide, time_grid=grid) == pytest.approx(1.0, abs=1e-4)


def test_mode_transmission_combined_below_each_mask():
    grid = default_time_grid(40e-12, 8192)
    gate = _unit_gate(grid, -0.5e-12, 0.5e-12)
    filt = SpectralFilter(720.8e-9, 1.7e-9)
    for n in range(5):
        mode = TemporalMode(n, 0.27e-12)
        combined = mode_transmission(mode, gate, filt)
        time_only = mode_transmission(mode, gate)
        spectral_only = mode_transmission(mode, None, filt, time_grid=grid)
        assert combined <= time_only + 1e-12
        assert combined <= spectral_only + 1e-12


def test_mode_transmission_narrowing_gate_loses_energy():
    grid = default_time_grid(40e-12, 8192)
    mode = TemporalMode(0, 0.27e-12)
    widths = [2.0e-12, 1.0e-12, 0.5e-12, 0.25e-12]
    trans = [mode_transmission(mode, _unit_gate(grid, -w / 2, w / 2)) for w in widths]
    assert all(a > b for a, b in zip(trans, trans[1:]))


def test_mode_transmission_requires_some_mask_and_matching_grid():
    grid = default_time_grid(40e-12, 8192)
    mode = TemporalMode(0, 0.27e-12)
    with pytest.raises(ValueError):
        mode_transmission(mode)
    gate = _unit_gate(grid, -1e-12, 1e-12)
    with pytest.raises(ValueError):
        mode_transmission(mode, gate, time_grid=default_time_grid(40e-12, 4096))


def test_sampled_fwhm_gaussian():
    grid = default_time_grid(40e-12, 16384)
    fwhm = 1.3e-12
    curve = np.exp(-4.0 * np.log(2.0) * (grid / fwhm) ** 2)
    assert sampled_fwhm(grid, curve) == pytest.approx(fwhm, rel=1e-4)


def test_sampled_fwhm_guards():
    grid = np.linspace(0.0, 1.0, 101)
    with pytest.raises(ValueError):
        sampled_fwhm(grid, np.zeros_like(grid))
    with pytest.raises(ValueError):
        # curve still above half max at the grid edge
        sampled_fwhm(grid, np.exp(-((grid - 0.5) ** 2) / 10.0))
