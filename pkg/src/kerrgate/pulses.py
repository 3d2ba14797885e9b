"""Gaussian pulses, transform-limit relations, spectral filters, and
Hermite-Gauss temporal modes.

All quantities are SI internally: times in seconds, lengths (including
wavelengths and bandwidths) in meters, energies in joules, rates in Hz.
Unit conversion happens only at the config boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import eval_hermite

SPEED_OF_LIGHT = 299792458.0  # m/s

# Gaussian time-bandwidth product: FWHM duration times FWHM frequency
# bandwidth for a chirp-free Gaussian envelope.
GAUSSIAN_TBP = 0.441

# Conversion between a Gaussian's FWHM and its standard deviation.
FWHM_TO_SIGMA = 1.0 / (2.0 * np.sqrt(2.0 * np.log(2.0)))


def frequency_bandwidth(center_wavelength: float, fwhm_bandwidth: float) -> float:
    """FWHM frequency bandwidth (Hz) of a spectrum given in wavelength terms."""
    if center_wavelength <= 0 or fwhm_bandwidth <= 0:
        raise ValueError("wavelength and bandwidth must be positive")
    return SPEED_OF_LIGHT * fwhm_bandwidth / center_wavelength**2


def transform_limited_duration(center_wavelength: float, fwhm_bandwidth: float) -> float:
    """FWHM duration (s) of a chirp-free Gaussian pulse with the given spectrum.

    Parameters
    ----------
    center_wavelength : float
        Carrier wavelength in meters.
    fwhm_bandwidth : float
        Spectral FWHM in meters.

    Returns
    -------
    float
        Duration such that duration * frequency_bandwidth = 0.441.
    """
    return GAUSSIAN_TBP / frequency_bandwidth(center_wavelength, fwhm_bandwidth)


@dataclass(frozen=True)
class GaussianPulse:
    """Chirp-free Gaussian envelope described by carrier, spectrum, and energy.

    When ``fwhm_duration`` is omitted the pulse is transform limited and the
    duration follows from the 0.441 time-bandwidth product.  An explicit
    duration longer than the transform limit models a temporally broadened
    pulse that keeps its spectral width.
    """

    center_wavelength: float  # m
    fwhm_bandwidth: float  # m
    pulse_energy: float  # J
    fwhm_duration: float | None = None  # s; None selects the transform limit

    def __post_init__(self):
        if self.center_wavelength <= 0:
            raise ValueError("center_wavelength must be positive")
        if self.fwhm_bandwidth <= 0:
            raise ValueError("fwhm_bandwidth must be positive")
        if self.pulse_energy < 0:
            raise ValueError("pulse_energy must be non-negative")
        limit = transform_limited_duration(self.center_wavelength, self.fwhm_bandwidth)
        if self.fwhm_duration is None:
            object.__setattr__(self, "fwhm_duration", limit)
        elif self.fwhm_duration < limit * (1.0 - 1e-9):
            raise ValueError(
                "explicit duration %.4g s is below the transform limit %.4g s"
                % (self.fwhm_duration, limit)
            )

    @property
    def sigma(self) -> float:
        """Standard deviation (s) of the intensity envelope."""
        return self.fwhm_duration * FWHM_TO_SIGMA

    @property
    def is_transform_limited(self) -> bool:
        limit = transform_limited_duration(self.center_wavelength, self.fwhm_bandwidth)
        return abs(self.fwhm_duration - limit) <= 1e-6 * limit


def default_time_grid(span: float = 40e-12, samples: int = 16384) -> np.ndarray:
    """Uniform time grid (s) of ``samples`` points covering ``span`` total."""
    if span <= 0 or samples < 2:
        raise ValueError("span must be positive and samples >= 2")
    return np.linspace(-span / 2.0, span / 2.0, samples)


def _check_grid(time_grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(time_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("time grid must be a 1-d array of at least 2 samples")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return grid


def pulse_intensity_profile(pulse: GaussianPulse, time_grid: np.ndarray) -> np.ndarray:
    """Instantaneous power (W) of the pulse sampled on ``time_grid``.

    The profile is a Gaussian of the pulse's FWHM duration centered at t = 0
    whose time integral equals the pulse energy.

    Raises
    ------
    ValueError
        If the grid is not strictly increasing or does not span at least
        three FWHM on both sides of center.
    ResolutionError
        If the grid resolves the FWHM with fewer than 16 samples.
    """
    from .errors import ResolutionError

    grid = _check_grid(time_grid)
    fwhm = pulse.fwhm_duration
    if grid[0] > -3.0 * fwhm or grid[-1] < 3.0 * fwhm:
        raise ValueError("time grid must span at least +-3 FWHM around center")
    step = np.max(np.diff(grid))
    if step > fwhm / 16.0:
        raise ResolutionError(
            "grid step %.3g s exceeds FWHM/16 = %.3g s" % (step, fwhm / 16.0)
        )
    if pulse.pulse_energy == 0.0:
        return np.zeros_like(grid)
    sigma = pulse.sigma
    peak = pulse.pulse_energy / (sigma * np.sqrt(2.0 * np.pi))
    return peak * np.exp(-(grid**2) / (2.0 * sigma**2))


def normalized_intensity(fwhm_duration: float, time_grid: np.ndarray) -> np.ndarray:
    """Unit-area Gaussian intensity (1/s) with the given FWHM, centered at 0."""
    if fwhm_duration <= 0:
        raise ValueError("fwhm_duration must be positive")
    grid = _check_grid(time_grid)
    sigma = fwhm_duration * FWHM_TO_SIGMA
    return np.exp(-(grid**2) / (2.0 * sigma**2)) / (sigma * np.sqrt(2.0 * np.pi))


@dataclass(frozen=True)
class SpectralFilter:
    """Gaussian bandpass filter described by its intensity transmission."""

    center_wavelength: float  # m
    fwhm_bandwidth: float  # m, intensity FWHM
    peak_transmission: float = 1.0

    def __post_init__(self):
        if self.center_wavelength <= 0 or self.fwhm_bandwidth <= 0:
            raise ValueError("filter wavelength and bandwidth must be positive")
        if not 0.0 <= self.peak_transmission <= 1.0:
            raise ValueError("peak_transmission must lie in [0, 1]")

    @property
    def frequency_fwhm(self) -> float:
        """Intensity FWHM (Hz) of the passband."""
        return frequency_bandwidth(self.center_wavelength, self.fwhm_bandwidth)

    def intensity_transmission(self, detuning: np.ndarray) -> np.ndarray:
        """Power transmission at frequency offsets ``detuning`` (Hz) from center."""
        detuning = np.asarray(detuning, dtype=float)
        width = self.frequency_fwhm
        return self.peak_transmission * np.exp(-4.0 * np.log(2.0) * (detuning / width) ** 2)

    def amplitude_transmission(self, detuning: np.ndarray) -> np.ndarray:
        return np.sqrt(self.intensity_transmission(detuning))


@dataclass(frozen=True)
class TemporalMode:
    """Hermite-Gauss temporal mode of a given order.

    ``characteristic_duration`` is the Gaussian parameter tau in
    exp(-t^2 / (2 tau^2)); the order-0 mode then has an intensity FWHM of
    2 sqrt(ln 2) tau, matching a Gaussian pulse of that FWHM.
    """

    order: int
    characteristic_duration: float  # s

    def __post_init__(self):
        if self.order < 0 or int(self.order) != self.order:
            raise ValueError("order must be a non-negative integer")
        if self.characteristic_duration <= 0:
            raise ValueError("characteristic_duration must be positive")

    @classmethod
    def matched_to(cls, pulse: GaussianPulse, order: int = 0) -> "TemporalMode":
        """Mode family whose order-0 intensity profile matches ``pulse``."""
        tau = pulse.fwhm_duration / (2.0 * np.sqrt(np.log(2.0)))
        return cls(order=order, characteristic_duration=tau)


def hermite_gauss_amplitude(mode: TemporalMode, time_grid: np.ndarray) -> np.ndarray:
    """Normalized real amplitude of the mode on ``time_grid``.

    Normalization is discrete: trapezoidal integral of |psi|^2 equals 1 on
    the supplied grid, so transmittances computed from it are exact ratios.
    """
    grid = _check_grid(time_grid)
    tau = mode.characteristic_duration
    x = grid / tau
    psi = eval_hermite(mode.order, x) * np.exp(-(x**2) / 2.0)
    norm = np.trapezoid(psi**2, grid)
    if norm <= 0:
        raise ValueError("mode amplitude vanishes on this grid")
    return psi / np.sqrt(norm)


def mode_transmission(
    mode: TemporalMode,
    time_gate=None,
    spectral_filter: SpectralFilter | None = None,
    time_grid: np.ndarray | None = None,
    center: float = 0.0,
) -> float:
    """Energy transmittance of a temporal mode through gate and/or filter.

    The mode amplitude is masked by sqrt(eta(T)) in time, Fourier
    transformed, masked by the filter's amplitude transmission in frequency,
    and the surviving energy fraction is returned.  Either mask may be
    omitted; at least one must be present.  The mode carrier is taken at the
    filter's center wavelength.

    ``time_gate`` is a SwitchProfile; its grid is used unless ``time_grid``
    is supplied, in which case the two must match.  ``center`` places the
    mode at a chosen arrival time, normally the gate center.
    """
    if time_gate is None and spectral_filter is None:
        raise ValueError("at least one of time_gate and spectral_filter is required")
    if time_gate is not None:
        gate_grid = time_gate.time_grid
        if time_grid is not None and not np.array_equal(np.asarray(time_grid), gate_grid):
            raise ValueError("time_grid does not match the gate's grid")
        grid = gate_grid
    else:
        if time_grid is None:
            raise ValueError("time_grid is required when no gate is given")
        grid = _check_grid(time_grid)

    psi = hermite_gauss_amplitude(mode, grid - center)
    energy_in = np.trapezoid(psi**2, grid)

    field = psi.astype(complex)
    if time_gate is not None:
        field = field * np.sqrt(np.clip(time_gate.efficiency, 0.0, 1.0))
    if spectral_filter is not None:
        dt = grid[1] - grid[0]
        freqs = np.fft.fftfreq(grid.size, dt)
        spectrum = np.fft.fft(field)
        spectrum *= spectral_filter.amplitude_transmission(freqs)
        field = np.fft.ifft(spectrum)
    energy_out = np.trapezoid(np.abs(field) ** 2, grid)
    return float(energy_out / energy_in)


def sampled_fwhm(x: np.ndarray, y: np.ndarray) -> float:
    """Full width at half maximum of a sampled curve.

    Crossing points of y = max/2 are located by linear interpolation between
    the bracketing samples; the curve must rise above half max on a single
    contiguous region wide enough to bracket both crossings.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 3:
        raise ValueError("x and y must be 1-d arrays of equal length >= 3")
    peak = y.max()
    if peak <= 0:
        raise ValueError("curve has no positive peak")
    half = peak / 2.0
    above = y >= half
    first = int(np.argmax(above))
    last = int(y.size - 1 - np.argmax(above[::-1]))
    if first == 0 or last == y.size - 1:
        raise ValueError("half-maximum crossings not bracketed by the grid")
    left = np.interp(half, [y[first - 1], y[first]], [x[first - 1], x[first]])
    # right edge: y falls through half max between last and last+1
    right = np.interp(half, [y[last + 1], y[last]], [x[last + 1], x[last]])
    return float(right - left)
