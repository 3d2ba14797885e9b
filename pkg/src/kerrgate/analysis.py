"""Experiment-level studies built on the switch and QKD layers.

Everything here produces small in-memory tables with stable column schemas:
noise and loss sweeps, threshold bisection, improvement factors, the
noise-reduction factor of the optical gate, the Hermite-Gauss mode
comparison, and the pulse-broadening (temporal fluctuation) study.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ThresholdNotFoundError
from .kerr import SwitchProfile
from .pulses import (
    GaussianPulse,
    SpectralFilter,
    TemporalMode,
    frequency_bandwidth,
    mode_transmission,
    normalized_intensity,
)
from .qkd import (
    ELECTRONIC,
    ULTRAFAST,
    ChannelScenario,
    DecoyParams,
    DetectorParams,
    binary_entropy,
    evaluate_scenario,
)


@dataclass
class Table:
    """Column-named rows with deterministic text serialization."""

    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def append(self, *values):
        if len(values) != len(self.columns):
            raise ValueError("row width does not match column count")
        self.rows.append(tuple(values))

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]

    def format_tsv(self, float_format: str = "%.10g") -> str:
        def cell(value) -> str:
            if value is None:
                return ""
            if isinstance(value, bool):
                return str(value).lower()
            if isinstance(value, (int, np.integer)):
                return str(int(value))
            if isinstance(value, (float, np.floating)):
                value = float(value)
                if value == 0.0:
                    value = 0.0  # normalize -0.0
                return float_format % value
            return str(value)

        lines = ["\t".join(self.columns)]
        for row in self.rows:
            lines.append("\t".join(cell(v) for v in row))
        return "\n".join(lines) + "\n"


def parallel_map(fn, items, jobs: int | None = None) -> list:
    """Ordered map over independent work items.

    ``jobs=1`` runs inline; otherwise a thread pool sized to ``jobs`` (or
    the CPU count) is used.  Results keep input order regardless.
    """
    items = list(items)
    if jobs == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    workers = jobs if jobs is not None else (os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# spectral overlap of a noise line with the gated passband


def spectral_overlap_factor(
    profile: SwitchProfile,
    spectral_filter: SpectralFilter,
    noise_linewidth: float | None,
    noise_center_wavelength: float | None = None,
) -> float:
    """Fraction of noise passed by the filter once the time gate chops it.

    Gating in time convolves the noise spectrum with the gate's spectral
    kernel |FFT(sqrt(eta))|^2, pushing part of the line outside the
    bandpass.  The returned factor is the transmitted noise power with that
    broadening relative to the ungated line, so it multiplies the gate's
    duty-cycle suppression.

    ``noise_linewidth`` of None selects the broadband bookkeeping (factor
    1.0: for noise much wider than the filter the gate kernel does not
    change what the filter accepts).  A zero linewidth is the monochromatic
    limit.  The line sits at the filter center unless a center wavelength
    is given.
    """
    if noise_linewidth is None:
        return 1.0
    if noise_linewidth < 0:
        raise ValueError("noise_linewidth must be non-negative or None")

    grid = profile.time_grid
    dt = grid[1] - grid[0]
    n = grid.size
    freqs = np.fft.fftshift(np.fft.fftfreq(n, dt))
    kernel = np.abs(np.fft.fftshift(np.fft.fft(np.sqrt(profile.efficiency)))) ** 2
    area = np.trapezoid(kernel, freqs)
    if area <= 0:
        raise ValueError("switch profile has no spectral content")
    kernel = kernel / area

    passband = spectral_filter.intensity_transmission(freqs)
    if noise_center_wavelength is None:
        line_offset = 0.0
    else:
        line_offset = (
            299792458.0 / noise_center_wavelength
            - 299792458.0 / spectral_filter.center_wavelength
        )

    if noise_linewidth == 0.0:
        # delta line: broadened spectrum is the kernel itself, centered on the line
        broadened = np.interp(freqs, freqs + line_offset, kernel, left=0.0, right=0.0)
        transmitted = np.trapezoid(broadened * passband, freqs)
        direct = spectral_filter.intensity_transmission(np.array([line_offset]))[0]
        return float(transmitted / direct)

    line_fwhm_hz = frequency_bandwidth(spectral_filter.center_wavelength, noise_linewidth)
    line = np.exp(-4.0 * np.log(2.0) * ((freqs - line_offset) / line_fwhm_hz) ** 2)
    line = line / np.trapezoid(line, freqs)
    df = freqs[1] - freqs[0]
    broadened = np.convolve(line, kernel, mode="same") * df
    transmitted = np.trapezoid(broadened * passband, freqs)
    direct = np.trapezoid(line * passband, freqs)
    return float(transmitted / direct)


def noise_reduction_factor(
    profile: SwitchProfile,
    electronic_window: float,
    noise_linewidth: float | None,
    spectral_filter: SpectralFilter,
) -> float:
    """Noise suppression of the optical gate relative to electronic gating.

    The electronic gate passes noise over its full window; the optical gate
    passes it over the profile's effective width scaled by the spectral
    overlap factor.  The ratio is the noise-reduction factor.
    """
    if electronic_window <= profile.effective_width:
        raise ValueError("electronic window must exceed the gate's effective width")
    overlap = spectral_overlap_factor(profile, spectral_filter, noise_linewidth)
    return float(electronic_window / (profile.effective_width * overlap))


# ---------------------------------------------------------------------------
# sweeps and thresholds


@dataclass(frozen=True)
class SweepSpec:
    """One-variable sweep attached to a fixed scenario."""

    variable: str  # "noise_rate" or "channel_loss_db"
    start: float
    stop: float
    samples: int
    spacing: str = "log"
    scenario: ChannelScenario = ChannelScenario(channel_loss_db=10.0)

    def __post_init__(self):
        if self.variable not in ("noise_rate", "channel_loss_db"):
            raise ValueError("variable must be noise_rate or channel_loss_db")
        if self.spacing not in ("log", "linear"):
            raise ValueError("spacing must be log or linear")
        if not self.start < self.stop:
            raise ValueError("start must be below stop")
        if self.spacing == "log" and self.start <= 0:
            raise ValueError("log spacing needs a positive start")
        if self.samples < 2:
            raise ValueError("samples must be >= 2")

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.logspace(np.log10(self.start), np.log10(self.stop), self.samples)
        return np.linspace(self.start, self.stop, self.samples)


_VARIABLE_COLUMNS = {"noise_rate": "noise_rate_hz", "channel_loss_db": "channel_loss_db"}


def keyrate_sweep(
    spec: SweepSpec,
    detector: DetectorParams,
    decoy: DecoyParams,
    switch: SwitchProfile,
    spectral_overlap: float = 1.0,
    jobs: int | None = None,
) -> Table:
    """Key-rate chain along the swept variable for both filter kinds."""
    column = _VARIABLE_COLUMNS[spec.variable]
    table = Table(
        columns=(
            column,
            "filter",
            "q_mu",
            "e_mu",
            "q1_lower",
            "e1_upper",
            "rate_per_pulse",
            "rate_per_second",
        )
    )

    def evaluate(point) -> list[tuple]:
        value, kind = point
        scenario = spec.scenario.with_(**{spec.variable: value}, filter_kind=kind)
        report = evaluate_scenario(scenario, detector, decoy, switch, spectral_overlap)
        return (
            value,
            kind,
            report.observed.q_mu,
            report.observed.e_mu,
            report.q1_lower,
            report.e1_upper,
            report.rate_per_pulse,
            report.rate_per_second,
        )

    points = [(float(v), kind) for v in spec.grid() for kind in (ELECTRONIC, ULTRAFAST)]
    for row in parallel_map(evaluate, points, jobs):
        table.append(*row)
    return table


@dataclass(frozen=True)
class ThresholdResult:
    threshold_value: float
    bracketing_interval: tuple[float, float]
    iterations: int


def _bisect_positive(rate_fn, lo: float, hi: float, rel_width: float, geometric: bool) -> ThresholdResult:
    """Largest argument with positive rate, assuming rate decreases."""
    if rate_fn(lo) <= 0.0:
        raise ThresholdNotFoundError(
            "rate is non-positive at the lower bracket end %.6g" % lo, side="low"
        )
    if rate_fn(hi) > 0.0:
        raise ThresholdNotFoundError(
            "rate is still positive at the upper bracket end %.6g" % hi, side="high"
        )
    iterations = 0
    while True:
        mid = float(np.sqrt(lo * hi)) if geometric else 0.5 * (lo + hi)
        if (hi - lo) <= rel_width * mid:
            return ThresholdResult(mid, (lo, hi), iterations)
        iterations += 1
        if rate_fn(mid) > 0.0:
            lo = mid
        else:
            hi = mid


def noise_threshold(
    scenario: ChannelScenario,
    detector: DetectorParams,
    decoy: DecoyParams,
    switch: SwitchProfile,
    spectral_overlap: float = 1.0,
    filter_kind: str | None = None,
    bracket: tuple[float, float] = (1.0, 1e12),
    rel_width: float = 0.005,
) -> ThresholdResult:
    """Largest noise rate (Hz) with positive key rate, by geometric bisection."""
    kind = filter_kind if filter_kind is not None else scenario.filter_kind

    def rate(noise: float) -> float:
        trial = scenario.with_(noise_rate=noise, filter_kind=kind)
        return evaluate_scenario(trial, detector, decoy, switch, spectral_overlap).rate_per_pulse

    return _bisect_positive(rate, bracket[0], bracket[1], rel_width, geometric=True)


def loss_threshold(
    scenario: ChannelScenario,
    detector: DetectorParams,
    decoy: DecoyParams,
    switch: SwitchProfile,
    spectral_overlap: float = 1.0,
    filter_kind: str | None = None,
    bracket: tuple[float, float] = (5.0, 45.0),
    rel_width: float = 0.005,
) -> ThresholdResult:
    """Largest channel loss (dB) with positive key rate, by linear bisection."""
    kind = filter_kind if filter_kind is not None else scenario.filter_kind

    def rate(loss_db: float) -> float:
        trial = scenario.with_(channel_loss_db=loss_db, filter_kind=kind)
        return evaluate_scenario(trial, detector, decoy, switch, spectral_overlap).rate_per_pulse

    return _bisect_positive(rate, bracket[0], bracket[1], rel_width, geometric=False)


# ---------------------------------------------------------------------------
# improvement factors


@dataclass
class ImprovementFactors:
    """Threshold ratios between the two filter arms.

    ``noise_ratio`` holds UTF/ETF noise thresholds per loss value;
    ``distance`` holds UTF/ETF loss thresholds per noise value.  Rows where
    a threshold does not exist inside its bracket stay in the table with an
    explanatory status.  ``crossover_noise`` is the interpolated noise rate
    where the distance improvement first exceeds 1.
    """

    noise_ratio: Table
    distance: Table
    crossover_noise: float | None
    max_improvement: float | None
    max_improvement_noise: float | None


def improvement_factors(
    loss_grid,
    noise_grid,
    scenario: ChannelScenario,
    detector: DetectorParams,
    decoy: DecoyParams,
    switch: SwitchProfile,
    spectral_overlap: float = 1.0,
    loss_bracket: tuple[float, float] = (5.0, 45.0),
    noise_bracket: tuple[float, float] = (1.0, 1e12),
    jobs: int | None = None,
) -> ImprovementFactors:
    """UTF-over-ETF threshold ratios across the two grids."""

    def one_noise_threshold(args) -> float | None:
        loss_db, kind = args
        trial = scenario.with_(channel_loss_db=loss_db)
        try:
            return noise_threshold(
                trial, detector, decoy, switch, spectral_overlap, kind, noise_bracket
            ).threshold_value
        except ThresholdNotFoundError:
            return None

    def one_loss_threshold(args) -> float | None:
        noise, kind = args
        trial = scenario.with_(noise_rate=noise)
        try:
            return loss_threshold(
                trial, detector, decoy, switch, spectral_overlap, kind, loss_bracket
            ).threshold_value
        except ThresholdNotFoundError:
            return None

    loss_grid = [float(v) for v in loss_grid]
    noise_grid = [float(v) for v in noise_grid]

    noise_ratio = Table(
        columns=("channel_loss_db", "etf_threshold_hz", "utf_threshold_hz", "ratio", "status")
    )
    pairs = [(loss, ELECTRONIC) for loss in loss_grid] + [(loss, ULTRAFAST) for loss in loss_grid]
    results = parallel_map(one_noise_threshold, pairs, jobs)
    etf_vals, utf_vals = results[: len(loss_grid)], results[len(loss_grid) :]
    for loss, etf, utf in zip(loss_grid, etf_vals, utf_vals):
        ratio = utf / etf if (etf and utf) else None
        noise_ratio.append(loss, etf, utf, ratio, _status(etf, utf))

    distance = Table(
        columns=("noise_rate_hz", "etf_threshold_db", "utf_threshold_db", "improvement", "status")
    )
    pairs = [(n, ELECTRONIC) for n in noise_grid] + [(n, ULTRAFAST) for n in noise_grid]
    results = parallel_map(one_loss_threshold, pairs, jobs)
    etf_vals, utf_vals = results[: len(noise_grid)], results[len(noise_grid) :]
    improvements: list[tuple[float, float]] = []
    for noise, etf, utf in zip(noise_grid, etf_vals, utf_vals):
        improvement = utf / etf if (etf and utf) else None
        distance.append(noise, etf, utf, improvement, _status(etf, utf))
        if improvement is not None:
            improvements.append((noise, improvement))

    crossover = None
    for (n0, d0), (n1, d1) in zip(improvements, improvements[1:]):
        if d0 < 1.0 <= d1:
            # interpolate in log noise; improvements vary smoothly on that scale
            frac = (1.0 - d0) / (d1 - d0)
            crossover = 10.0 ** (np.log10(n0) + frac * (np.log10(n1) - np.log10(n0)))
            break
    if crossover is None and improvements and improvements[0][1] >= 1.0:
        crossover = improvements[0][0]

    if improvements:
        best_noise, best = max(improvements, key=lambda item: item[1])
    else:
        best_noise, best = None, None
    return ImprovementFactors(
        noise_ratio=noise_ratio,
        distance=distance,
        crossover_noise=crossover,
        max_improvement=best,
        max_improvement_noise=best_noise,
    )


def _status(etf, utf) -> str:
    if etf is not None and utf is not None:
        return "ok"
    if etf is None and utf is None:
        return "both-unavailable"
    return "etf-unavailable" if etf is None else "utf-unavailable"


# ---------------------------------------------------------------------------
# Hermite-Gauss mode comparison


def hg_mode_comparison(
    max_order: int,
    gate: SwitchProfile,
    spectral_filter: SpectralFilter,
    signal: GaussianPulse,
) -> Table:
    """Per-order transmissions of the signal's mode family.

    Modes share the signal's characteristic duration and arrive centered on
    the gate.  Columns give the combined time-plus-frequency transmission
    and the spectral-only reference.
    """
    if max_order < 0:
        raise ValueError("max_order must be non-negative")
    table = Table(columns=("order", "t_combined", "t_spectral_only"))
    center = gate.centroid
    for order in range(max_order + 1):
        mode = TemporalMode.matched_to(signal, order)
        combined = mode_transmission(mode, gate, spectral_filter, center=center)
        spectral_only = mode_transmission(
            mode, None, spectral_filter, time_grid=gate.time_grid, center=center
        )
        table.append(order, combined, spectral_only)
    return table


# ---------------------------------------------------------------------------
# pulse-broadening study


@dataclass
class FluctuationStudy:
    """Key rates and loss thresholds under deterministic pulse broadening."""

    rates: Table
    thresholds: Table


def _single_photon_rate(
    gain: float, qber: float, sifting_q: float, error_correction_f: float
) -> float:
    """Key rate for an ideal single-photon source: no decoy bounds needed."""
    h = binary_entropy(qber)
    return sifting_q * gain * (1.0 - error_correction_f * h - h)


def fluctuation_study(
    broadened_durations,
    noise_levels,
    loss_grid,
    gate: SwitchProfile,
    visibility: float = 0.99,
    detector_efficiency: float = 0.8,
    dark_rate: float = 100.0,
    electronic_window: float = 1e-9,
    sifting_q: float = 0.5,
    error_correction_f: float = 1.22,
    loss_bracket: tuple[float, float] = (0.0, 80.0),
    jobs: int | None = None,
) -> FluctuationStudy:
    """Single-photon QKD under deterministic temporal broadening.

    Each scenario broadens the signal to a stated FWHM while Bob gates with
    the fixed optical gate; the electronic baseline keeps its full window,
    which passes every tested duration untouched.  The noise term uses the
    gate's effective width for the optical arm and the electronic window
    otherwise; dark counts are electronic in both arms.  Pump noise is not
    modeled here: the study isolates the temporal-overlap penalty.
    """
    if not 0.0 < visibility <= 1.0:
        raise ValueError("visibility must lie in (0, 1]")
    e_d = (1.0 - visibility) / 2.0
    durations = [float(d) for d in broadened_durations]
    noise_levels = [float(n) for n in noise_levels]
    loss_grid = [float(v) for v in loss_grid]

    grid = gate.time_grid
    center = gate.centroid

    def gate_overlap(duration: float) -> float:
        if duration <= 0:
            raise ValueError("durations must be positive")
        shape = normalized_intensity(duration, grid - center)
        return float(np.trapezoid(gate.efficiency * shape, grid))

    overlaps = {d: gate_overlap(d) for d in durations}

    def arm_terms(kind: str, duration: float, noise: float) -> tuple[float, float]:
        # returns (signal transmission, background yield)
        dark = dark_rate * electronic_window
        if kind == ELECTRONIC:
            transmission = 1.0 if duration <= electronic_window else electronic_window / duration
            return transmission, dark + noise * electronic_window
        return overlaps[duration], dark + noise * gate.effective_width

    def rate_at(kind: str, duration: float, noise: float, loss_db: float) -> float:
        transmission, y0 = arm_terms(kind, duration, noise)
        eta = 10.0 ** (-loss_db / 10.0) * detector_efficiency
        gain = y0 + eta * transmission
        qber = (0.5 * y0 + e_d * eta * transmission) / gain if gain > 0 else 0.5
        return _single_photon_rate(gain, qber, sifting_q, error_correction_f)

    rates = Table(
        columns=(
            "noise_rate_hz",
            "pulse_fwhm_ps",
            "filter",
            "channel_loss_db",
            "gain",
            "qber",
            "rate_per_pulse",
        )
    )
    combos = [
        (noise, duration, kind, loss)
        for noise in noise_levels
        for duration in durations
        for kind in (ELECTRONIC, ULTRAFAST)
        for loss in loss_grid
    ]

    def rate_row(combo):
        noise, duration, kind, loss = combo
        transmission, y0 = arm_terms(kind, duration, noise)
        eta = 10.0 ** (-loss / 10.0) * detector_efficiency
        gain = y0 + eta * transmission
        qber = (0.5 * y0 + e_d * eta * transmission) / gain if gain > 0 else 0.5
        rate = _single_photon_rate(gain, qber, sifting_q, error_correction_f)
        return (noise, duration * 1e12, kind, loss, gain, qber, rate)

    for row in parallel_map(rate_row, combos, jobs):
        rates.append(*row)

    thresholds = Table(
        columns=("noise_rate_hz", "pulse_fwhm_ps", "filter", "loss_threshold_db", "status")
    )

    def threshold_row(combo):
        noise, duration, kind = combo
        try:
            result = _bisect_positive(
                lambda loss: rate_at(kind, duration, noise, loss),
                loss_bracket[0],
                loss_bracket[1],
                0.005,
                geometric=False,
            )
            return (noise, duration * 1e12, kind, result.threshold_value, "ok")
        except ThresholdNotFoundError as exc:
            return (noise, duration * 1e12, kind, None, "no-threshold-%s" % exc.side)

    combos = [
        (noise, duration, kind)
        for noise in noise_levels
        for duration in durations
        for kind in (ELECTRONIC, ULTRAFAST)
    ]
    for row in parallel_map(threshold_row, combos, jobs):
        thresholds.append(*row)

    return FluctuationStudy(rates=rates, thresholds=thresholds)
