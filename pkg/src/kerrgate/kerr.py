"""Physics of the pump-driven Kerr time gate.

The gate rides on cross-phase modulation in a short fiber: the pump sweeps
through the signal because of group-velocity walkoff, so the accumulated
nonlinear phase is the walkoff-averaged pump intensity.  With the pump
polarized at 45 degrees to the signal, the phase shift rotates the signal
polarization and a crossed polarizer converts that rotation into a
time-dependent transmission.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .errors import ResolutionError
from .pulses import (
    FWHM_TO_SIGMA,
    SPEED_OF_LIGHT,
    GaussianPulse,
    SpectralFilter,
    sampled_fwhm,
)

# z-quadrature nodes for the walkoff integral; 257 resolves the pump sweep
# to well below the time-grid step for all tested geometries.
DEFAULT_Z_SAMPLES = 257

# Delay chunk size for trace evaluation, bounds peak memory at ~20 MB.
_CHUNK = 64


@dataclass(frozen=True)
class FiberSpec:
    """Kerr medium parameters.

    ``walkoff_per_length`` is the difference of inverse group velocities
    between pump and signal (s/m); over the full length it sets the width of
    the flat-topped gate.  ``mode_area`` converts pulse power to intensity.
    """

    nonlinear_index: float  # m^2/W
    length: float  # m
    walkoff_per_length: float  # s/m
    mode_area: float  # m^2
    effective_length: float | None = None  # m; None means equal to length

    def __post_init__(self):
        if self.nonlinear_index <= 0 or self.length <= 0:
            raise ValueError("nonlinear_index and length must be positive")
        if self.walkoff_per_length <= 0:
            raise ValueError("walkoff_per_length must be positive")
        if self.mode_area <= 0:
            raise ValueError("mode_area must be positive")
        if self.effective_length is None:
            object.__setattr__(self, "effective_length", self.length)
        elif not 0 < self.effective_length <= self.length:
            raise ValueError("effective_length must lie in (0, length]")

    @property
    def total_walkoff(self) -> float:
        """Pump-signal delay accumulated over the full fiber (s)."""
        return self.walkoff_per_length * self.length


@dataclass(frozen=True)
class PumpNoiseModel:
    """Power-law model for pump-induced noise counts per pulse."""

    reference_energy: float  # J
    reference_counts_per_pulse: float
    exponent: float = 2.0

    def __post_init__(self):
        if self.reference_energy <= 0:
            raise ValueError("reference_energy must be positive")
        if self.reference_counts_per_pulse < 0:
            raise ValueError("reference_counts_per_pulse must be non-negative")


def pump_noise_counts(model: PumpNoiseModel, energy: float) -> float:
    """Noise counts per pulse extrapolated from the model's reference point."""
    if energy < 0:
        raise ValueError("energy must be non-negative")
    if energy == 0.0:
        return 0.0
    return model.reference_counts_per_pulse * (energy / model.reference_energy) ** model.exponent


def calibrated_mode_area(
    pump: GaussianPulse,
    length: float,
    walkoff_per_length: float,
    nonlinear_index: float,
    signal_wavelength: float,
    effective_length: float | None = None,
    target_peak_phase: float = np.pi,
) -> float:
    """Mode area (m^2) that puts the peak nonlinear phase at the target.

    For a Gaussian pump the walkoff integral has a closed form at the gate
    center, so the calibration is exact:

        peak phase = (8 pi n2 / 3 lambda_s) * (E / (A d_w)) * erf(w / (2 sqrt2 sigma)) * (L_eff / L)

    with w the total walkoff and sigma the pump's intensity standard
    deviation.  Solving for A at the target phase gives the returned area.
    """
    if target_peak_phase <= 0:
        raise ValueError("target_peak_phase must be positive")
    if signal_wavelength <= 0:
        raise ValueError("signal_wavelength must be positive")
    if effective_length is None:
        effective_length = length
    walk = walkoff_per_length * length
    sigma = pump.fwhm_duration * FWHM_TO_SIGMA
    shape = erf(walk / (2.0 * np.sqrt(2.0) * sigma))
    return (
        8.0
        * np.pi
        * nonlinear_index
        * pump.pulse_energy
        * shape
        * (effective_length / length)
        / (3.0 * signal_wavelength * walkoff_per_length * target_peak_phase)
    )


def nonlinear_phase_profile(
    pump: GaussianPulse,
    fiber: FiberSpec,
    time_grid: np.ndarray,
    signal_wavelength: float,
    z_samples: int = DEFAULT_Z_SAMPLES,
) -> np.ndarray:
    """Cross-phase-modulation phase (rad) in the co-moving signal frame.

    Evaluates phase(T) = (8 pi n2 / 3 lambda_s) * integral over z in [0, L]
    of I_pump(T - d_w z) by trapezoidal quadrature.  The pump peak enters the
    fiber at T = 0, so the gate is centered at T = d_w L / 2.  Attenuation is
    folded in as a uniform factor L_eff / L.

    Raises ResolutionError if the time step is coarser than
    min(pump FWHM, total walkoff) / 16.
    """
    if signal_wavelength <= 0:
        raise ValueError("signal_wavelength must be positive")
    grid = np.asarray(time_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("time grid must be 1-d and strictly increasing")
    walk = fiber.total_walkoff
    fwhm = pump.fwhm_duration
    step = float(np.max(np.diff(grid)))
    scale = min(fwhm, walk)
    if step > scale / 16.0:
        raise ResolutionError(
            "grid step %.3g s exceeds min(pump FWHM, walkoff)/16 = %.3g s"
            % (step, scale / 16.0)
        )
    margin = 3.0 * fwhm
    if grid[0] > -margin or grid[-1] < walk + margin:
        raise ValueError("time grid does not cover the gate support")
    if pump.pulse_energy == 0.0:
        return np.zeros_like(grid)

    sigma = pump.sigma
    peak_power = pump.pulse_energy / (fiber.mode_area * sigma * np.sqrt(2.0 * np.pi))
    z = np.linspace(0.0, fiber.length, z_samples)
    # (time, z) delay matrix; ~30 MB at default sizes, no chunking needed
    tau = grid[:, None] - fiber.walkoff_per_length * z[None, :]
    intensity = peak_power * np.exp(-(tau**2) / (2.0 * sigma**2))
    integral = np.trapezoid(intensity, z, axis=1)
    coeff = 8.0 * np.pi * fiber.nonlinear_index / (3.0 * signal_wavelength)
    return coeff * integral * (fiber.effective_length / fiber.length)


def switching_efficiency(theta: float, delta_phi) -> np.ndarray | float:
    """Crossed-polarizer transmission sin^2(2 theta) sin^2(delta_phi / 2)."""
    return np.sin(2.0 * theta) ** 2 * np.sin(np.asarray(delta_phi) / 2.0) ** 2


@dataclass(frozen=True)
class SwitchProfile:
    """Sampled time-dependent switching efficiency eta(T).

    ``fwhm`` and ``effective_width`` are derived from the samples on
    construction; ``effective_width`` is the plain integral of eta over time,
    which is the quantity that scales cw noise transmission.  Arrays are
    frozen to keep profiles safe to share across workers.
    """

    time_grid: np.ndarray
    efficiency: np.ndarray
    phase: np.ndarray | None = None
    fwhm: float = field(init=False, default=0.0)
    effective_width: float = field(init=False, default=0.0)

    def __post_init__(self):
        grid = np.asarray(self.time_grid, dtype=float)
        eta = np.asarray(self.efficiency, dtype=float)
        if grid.shape != eta.shape or grid.ndim != 1:
            raise ValueError("time_grid and efficiency must be matching 1-d arrays")
        if np.any(eta < -1e-12) or np.any(eta > 1.0 + 1e-12):
            raise ValueError("efficiency samples must lie in [0, 1]")
        eta = np.clip(eta, 0.0, 1.0)
        grid.flags.writeable = False
        eta.flags.writeable = False
        object.__setattr__(self, "time_grid", grid)
        object.__setattr__(self, "efficiency", eta)
        if self.phase is not None:
            phase = np.asarray(self.phase, dtype=float)
            phase.flags.writeable = False
            object.__setattr__(self, "phase", phase)
        width = float(np.trapezoid(eta, grid))
        object.__setattr__(self, "effective_width", width)
        fwhm = sampled_fwhm(grid, eta) if eta.max() > 0 else 0.0
        object.__setattr__(self, "fwhm", fwhm)

    @property
    def peak_efficiency(self) -> float:
        return float(self.efficiency.max())

    @property
    def centroid(self) -> float:
        """First moment of eta (s); the optimal signal arrival time."""
        if self.effective_width == 0.0:
            return 0.0
        return float(np.trapezoid(self.efficiency * self.time_grid, self.time_grid) / self.effective_width)

    def support(self, floor: float = 1e-3) -> tuple[float, float]:
        """Interval where eta exceeds ``floor`` times its peak."""
        peak = self.peak_efficiency
        if peak == 0.0:
            return (0.0, 0.0)
        idx = np.nonzero(self.efficiency > floor * peak)[0]
        return (float(self.time_grid[idx[0]]), float(self.time_grid[idx[-1]]))


def switch_profile(
    pump: GaussianPulse,
    fiber: FiberSpec,
    time_grid: np.ndarray,
    signal_wavelength: float,
    theta: float = np.pi / 4.0,
    z_samples: int = DEFAULT_Z_SAMPLES,
) -> SwitchProfile:
    """Build the switching-efficiency profile for the given pump and fiber."""
    phase = nonlinear_phase_profile(pump, fiber, time_grid, signal_wavelength, z_samples)
    eta = switching_efficiency(theta, phase)
    return SwitchProfile(time_grid=np.asarray(time_grid, dtype=float), efficiency=eta, phase=phase)


@dataclass(frozen=True)
class SwitchingTrace:
    """Switched efficiency versus pump-to-signal delay."""

    delays: np.ndarray
    efficiency: np.ndarray
    fwhm: float
    peak_value: float


def _plain_trace(profile: SwitchProfile, signal: GaussianPulse, delays: np.ndarray) -> np.ndarray:
    grid = profile.time_grid
    eta = profile.efficiency
    sigma = signal.sigma
    norm = 1.0 / (sigma * np.sqrt(2.0 * np.pi))
    out = np.empty(delays.size)
    for start in range(0, delays.size, _CHUNK):
        block = delays[start : start + _CHUNK]
        shifted = grid[None, :] - block[:, None]
        intensity = norm * np.exp(-(shifted**2) / (2.0 * sigma**2))
        out[start : start + block.size] = np.trapezoid(eta[None, :] * intensity, grid, axis=1)
    return out


def _filtered_trace(
    profile: SwitchProfile,
    signal: GaussianPulse,
    delays: np.ndarray,
    spectral_filter: SpectralFilter,
) -> np.ndarray:
    """Detected trace: gate in time, then the receiver bandpass in frequency.

    Each delayed signal field is amplitude-masked by sqrt(eta), Fourier
    transformed, masked by the filter amplitude response, and integrated for
    energy.  Normalization is the filter-only energy of the same pulse, so a
    unit-efficiency gate gives exactly 1.
    """
    grid = profile.time_grid
    dt = grid[1] - grid[0]
    amp_gate = np.sqrt(profile.efficiency)
    # field sigma: |field|^2 must reproduce the intensity envelope
    sigma = signal.sigma
    freqs = np.fft.fftfreq(grid.size, dt)
    carrier_offset = SPEED_OF_LIGHT / signal.center_wavelength - SPEED_OF_LIGHT / spectral_filter.center_wavelength
    amp_filter = spectral_filter.amplitude_transmission(freqs + carrier_offset)

    base_field = np.exp(-(grid**2) / (4.0 * sigma**2)).astype(complex)
    base_field /= np.sqrt(np.trapezoid(np.abs(base_field) ** 2, grid))
    baseline = np.trapezoid(np.abs(np.fft.ifft(np.fft.fft(base_field) * amp_filter)) ** 2, grid)

    out = np.empty(delays.size)
    for start in range(0, delays.size, _CHUNK):
        block = delays[start : start + _CHUNK]
        shifted = grid[None, :] - block[:, None]
        fields = np.exp(-(shifted**2) / (4.0 * sigma**2)).astype(complex)
        norms = np.sqrt(np.trapezoid(np.abs(fields) ** 2, grid, axis=1))
        fields /= norms[:, None]
        fields *= amp_gate[None, :]
        spectra = np.fft.fft(fields, axis=1) * amp_filter[None, :]
        gated = np.fft.ifft(spectra, axis=1)
        out[start : start + block.size] = np.trapezoid(np.abs(gated) ** 2, grid, axis=1)
    return out / baseline


def switching_trace(
    profile: SwitchProfile,
    signal: GaussianPulse,
    delays: np.ndarray,
    spectral_filter: SpectralFilter | None = None,
) -> SwitchingTrace:
    """Switched efficiency as a function of pump-to-signal delay.

    Without a filter this is the cross-correlation of eta with the
    unit-normalized signal intensity.  With a filter the trace is the
    detected energy fraction after the receiver bandpass, which narrows the
    apparent width because gating a pulse in time spreads its spectrum.

    The delay range must cover the gate support; a scan that never sees the
    gate edges would report a meaningless width.
    """
    if signal.fwhm_duration <= 0:
        raise ValueError("signal duration must be positive")
    delays = np.asarray(delays, dtype=float)
    if delays.ndim != 1 or delays.size < 3:
        raise ValueError("delays must be a 1-d array of at least 3 samples")
    if profile.peak_efficiency > 0.0:
        lo, hi = profile.support()
        if delays[0] > lo or delays[-1] < hi:
            raise ValueError(
                "delay range [%.3g, %.3g] s does not cover the gate support [%.3g, %.3g] s"
                % (delays[0], delays[-1], lo, hi)
            )
        trace = (
            _plain_trace(profile, signal, delays)
            if spectral_filter is None
            else _filtered_trace(profile, signal, delays, spectral_filter)
        )
    else:
        trace = np.zeros(delays.size)
    fwhm = sampled_fwhm(delays, trace) if trace.max() > 0 else 0.0
    return SwitchingTrace(
        delays=delays,
        efficiency=trace,
        fwhm=fwhm,
        peak_value=float(trace.max()),
    )


@dataclass(frozen=True)
class EnergyScan:
    """Switching efficiency versus pump energy."""

    energies: np.ndarray
    center_efficiency: np.ndarray  # gate efficiency at the profile center
    pulse_efficiency: np.ndarray  # signal-averaged efficiency at optimal delay


def switching_vs_energy(
    energies,
    pump_template: GaussianPulse,
    fiber: FiberSpec,
    signal: GaussianPulse,
    time_grid: np.ndarray,
    signal_wavelength: float | None = None,
    theta: float = np.pi / 4.0,
) -> EnergyScan:
    """Scan the switch response over pump energies.

    The phase profile is linear in pump energy, so it is computed once at a
    reference energy and rescaled.  ``center_efficiency`` samples eta at the
    gate center and follows sin^2(a E) exactly; ``pulse_efficiency``
    correlates the full signal intensity with the gate at the optimal delay
    and saturates slightly below 1 because the signal wings see the gate
    edges.
    """
    energies = np.asarray(energies, dtype=float)
    if np.any(energies < 0):
        raise ValueError("energies must be non-negative")
    if signal_wavelength is None:
        signal_wavelength = signal.center_wavelength
    ref_energy = pump_template.pulse_energy
    if ref_energy <= 0:
        raise ValueError("pump template must carry positive energy")
    base_phase = nonlinear_phase_profile(pump_template, fiber, time_grid, signal_wavelength)
    grid = np.asarray(time_grid, dtype=float)
    center_idx = int(np.argmax(base_phase))
    phase_center = base_phase[center_idx]

    center_eff = switching_efficiency(theta, phase_center * energies / ref_energy)

    sigma = signal.sigma
    norm = 1.0 / (sigma * np.sqrt(2.0 * np.pi))
    # optimal delay = centroid of the gate, identical for every energy
    weight = np.trapezoid(base_phase, grid)
    tau_opt = np.trapezoid(base_phase * grid, grid) / weight if weight > 0 else 0.0
    signal_shape = norm * np.exp(-((grid - tau_opt) ** 2) / (2.0 * sigma**2))
    pulse_eff = np.empty(energies.size)
    for i, energy in enumerate(energies):
        eta = switching_efficiency(theta, base_phase * (energy / ref_energy))
        pulse_eff[i] = np.trapezoid(eta * signal_shape, grid)
    return EnergyScan(
        energies=energies,
        center_efficiency=np.asarray(center_eff, dtype=float),
        pulse_efficiency=pulse_eff,
    )
