"""Acceptance gate: one test per release criterion, each printing a
single PASS/FAIL line with the measured numbers.

Everything here goes through the public API exactly as a user would,
starting from the default operating point.
"""

import time

import numpy as np
import pytest

from kerrgate import (
    ChannelScenario,
    DecoyParams,
    DetectorParams,
    ObservedRates,
    SpectralFilter,
    e1_upper_bound,
    fluctuation_study,
    hg_mode_comparison,
    improvement_factors,
    load_config,
    loss_threshold,
    noise_reduction_factor,
    noise_threshold,
    nonlinear_phase_profile,
    q1_lower_bound,
    resolve,
    switch_profile,
    switching_trace,
)
from kerrgate.qkd import ELECTRONIC, ULTRAFAST

_PS = 1e-12


def _report(criterion: str, ok: bool, detail: str):
    print("%s %s: %s" % ("PASS" if ok else "FAIL", criterion, detail))
    assert ok, detail


def test_criterion_01_switch_profile_width():
    start = time.perf_counter()
    run = resolve(load_config(None))
    elapsed = time.perf_counter() - start
    fwhm_ps = run.switch.fwhm / _PS
    ok = 0.99 <= fwhm_ps <= 1.05 and elapsed < 1.0
    _report(
        "criterion-01 switch profile",
        ok,
        "FWHM %.6f ps in [0.99, 1.05], built in %.3f s (< 1 s)" % (fwhm_ps, elapsed),
    )


def test_criterion_02_switching_trace(default_run):
    run = default_run
    trace = switching_trace(run.switch, run.signal, run.trace_delays(), run.spectral_filter)
    fwhm_ps = trace.fwhm / _PS
    peak_eta = run.switch.peak_efficiency
    ok = 0.89 <= fwhm_ps <= 0.95 and peak_eta >= 0.98
    _report(
        "criterion-02 switching trace",
        ok,
        "detected-trace FWHM %.6f ps in [0.89, 0.95], peak efficiency %.6f >= 0.98"
        % (fwhm_ps, peak_eta),
    )


def test_criterion_03_noise_reduction_factor(default_run):
    run = default_run
    window = run.detector.coincidence_window  # 2 ns electronic baseline
    broadband = noise_reduction_factor(run.switch, window, None, run.spectral_filter)
    narrow = noise_reduction_factor(run.switch, window, 0.0, run.spectral_filter)
    ok = abs(broadband - 1960.0) <= 0.05 * 1960.0 and abs(narrow - 2360.0) <= 0.05 * 2360.0
    _report(
        "criterion-03 noise reduction",
        ok,
        "broadband %.1f (1960 +- 5%%), narrow-line %.1f (2360 +- 5%%)" % (broadband, narrow),
    )


def test_criterion_04_suppression_constant():
    constant = DetectorParams().suppression_constant
    ok = constant == 0.16
    _report("criterion-04 electronic suppression", ok, "f_rep * dt = %r (expected 0.16)" % constant)


def test_criterion_05_mode_rejection(default_run):
    run = default_run
    table = hg_mode_comparison(10, run.switch, run.spectral_filter, run.signal)
    high_orders = [row for row in table.rows if row[0] > 4]
    worst_high = max(row[1] for row in high_orders)
    ordered = all(row[1] <= row[2] + 1e-12 for row in table.rows)
    ok = worst_high < 0.007 and ordered
    _report(
        "criterion-05 mode rejection",
        ok,
        "max T_combined for n > 4 is %.5f (< 0.007); combined <= spectral-only for all n: %s"
        % (worst_high, ordered),
    )


def test_criterion_06_decoy_bound_sandwich():
    rng = np.random.default_rng(2024)
    decoy = DecoyParams(mu=0.6, nu=0.3)
    mu, nu = decoy.mu, decoy.nu
    violations = 0
    start = time.perf_counter()
    for _ in range(1000):
        eta = 10.0 ** rng.uniform(-5.0, -0.3)
        y0 = 10.0 ** rng.uniform(-7.0, -2.0)
        e_d = rng.uniform(0.0, 0.08)

        def observed(mean):
            opened = 1.0 - np.exp(-eta * mean)
            return y0 + opened, (0.5 * y0 + e_d * opened) / (y0 + opened)

        q_mu, e_mu = observed(mu)
        q_nu, e_nu = observed(nu)
        rates = ObservedRates(q_mu=q_mu, q_nu=q_nu, e_mu=e_mu, e_nu=e_nu, y0=y0)
        q1_true = (y0 + eta) * mu * np.exp(-mu)
        e1_true = (0.5 * y0 + e_d * eta) / (y0 + eta)
        q1 = q1_lower_bound(rates, decoy)
        if q1 > q1_true * (1.0 + 1e-12):
            violations += 1
        elif q1 > 0.0 and e1_upper_bound(rates, decoy, q1) < e1_true * (1.0 - 1e-12):
            violations += 1
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 10.0
    _report(
        "criterion-06 decoy sandwich",
        ok,
        "%d violations over 1000 scenarios in %.2f s (< 10 s)" % (violations, elapsed),
    )


def test_criterion_07_improvement_structure(default_run):
    run = default_run
    detector = run.detector
    plateau = loss_threshold(
        run.scenario.with_(noise_rate=0.0),
        detector,
        run.decoy,
        run.switch,
        run.spectral_overlap,
        ULTRAFAST,
    ).threshold_value
    imp = improvement_factors(
        run.loss_grid(),
        run.noise_grid(),
        run.scenario,
        detector,
        run.decoy,
        run.switch,
        run.spectral_overlap,
        run.loss_bracket(),
        run.noise_bracket(),
    )
    plateau_ok = abs(plateau - 21.0) <= 1.0
    crossover_ok = 2.6e3 / 3.0 <= imp.crossover_noise <= 2.6e3 * 3.0
    max_ok = abs(imp.max_improvement - 4.2) <= 0.5
    near_ok = 8.5e4 / 3.0 <= imp.max_improvement_noise <= 8.5e4 * 3.0
    ok = plateau_ok and crossover_ok and max_ok and near_ok
    _report(
        "criterion-07 improvement structure",
        ok,
        "UTF plateau %.2f dB (21 +- 1), crossover %.0f Hz (2.6e3 within x3), "
        "max improvement %.2f (4.2 +- 0.5) at %.2e Hz (8.5e4 within x3)"
        % (plateau, imp.crossover_noise, imp.max_improvement, imp.max_improvement_noise),
    )


def test_criterion_08_noise_improvement_band(default_run):
    # the pump floor is an additive background unrelated to the channel
    # noise being filtered, so it is switched off for the ratio
    run = default_run
    detector = run.detector
    ratios = []
    for loss in (5.0, 10.0, 15.0, 20.0):
        base = run.scenario.with_(channel_loss_db=loss, pump_noise_per_pulse=0.0)
        etf = noise_threshold(
            base, detector, run.decoy, run.switch, run.spectral_overlap, ELECTRONIC
        ).threshold_value
        utf = noise_threshold(
            base, detector, run.decoy, run.switch, run.spectral_overlap, ULTRAFAST
        ).threshold_value
        ratios.append(utf / etf)
    ok = all(1200.0 <= r <= 2400.0 for r in ratios)
    _report(
        "criterion-08 noise improvement band",
        ok,
        "UTF/ETF noise-threshold ratio at 5/10/15/20 dB = %s, all in [1200, 2400]"
        % ", ".join("%.0f" % r for r in ratios),
    )


def test_criterion_09_broadening_crossover(default_run):
    study = fluctuation_study(
        [1e-12, 10e-12, 100e-12, 500e-12],
        [920.0, 8.0e6],
        np.linspace(0.0, 70.0, 71),
        default_run.switch,
    )
    got = {
        (row[0], round(row[1]), row[2]): row[3]
        for row in study.thresholds.rows
        if row[4] == "ok"
    }
    diff_920 = abs(got[(920.0, 10, ELECTRONIC)] - got[(920.0, 10, ULTRAFAST)])
    etf_hi = got[(8.0e6, 500, ELECTRONIC)]
    utf_hi = got[(8.0e6, 500, ULTRAFAST)]
    ok = diff_920 < 1.0 and utf_hi > etf_hi
    _report(
        "criterion-09 broadening crossover",
        ok,
        "at 920 Hz |ETF - UTF(10 ps)| = %.3f dB (< 1); at 8e6 Hz UTF(500 ps) %.2f dB > ETF %.2f dB"
        % (diff_920, utf_hi, etf_hi),
    )


def test_criterion_10_numerics_hygiene(default_run):
    run = default_run
    grid = run.time_grid
    signal = run.signal

    # trace equals a literal correlation integral
    delays = np.linspace(-3.5e-12, 4.5e-12, 25)
    trace = switching_trace(run.switch, signal, delays)
    sigma = signal.sigma
    worst_trace = 0.0
    for d, value in zip(delays, trace.efficiency):
        shape = np.exp(-((grid - d) ** 2) / (2.0 * sigma**2)) / (sigma * np.sqrt(2.0 * np.pi))
        direct = np.trapezoid(run.switch.efficiency * shape, grid)
        if direct > 1e-12:
            worst_trace = max(worst_trace, abs(value - direct) / direct)

    # phase scales linearly with pump energy
    half_pump = type(run.pump)(
        run.pump.center_wavelength, run.pump.fwhm_bandwidth, run.pump.pulse_energy / 2.0
    )
    half = nonlinear_phase_profile(half_pump, run.fiber, grid, signal.center_wavelength)
    full = run.switch.phase
    mask = full > full.max() * 1e-9
    worst_linearity = float(np.max(np.abs(2.0 * half[mask] / full[mask] - 1.0)))

    # FWHM outputs stable under grid refinement
    fwhms = {}
    for samples in (8192, 16384, 32768):
        span_grid = np.linspace(-20e-12, 20e-12, samples)
        profile = switch_profile(run.pump, run.fiber, span_grid, signal.center_wavelength)
        plain = switching_trace(profile, signal, np.linspace(-3.5e-12, 4.5e-12, 801))
        filtered = switching_trace(
            profile, signal, np.linspace(-3.5e-12, 4.5e-12, 801), run.spectral_filter
        )
        fwhms[samples] = (profile.fwhm, plain.fwhm, filtered.fwhm)
    ref = np.array(fwhms[32768])
    drift = max(
        float(np.max(np.abs(np.array(fwhms[s]) / ref - 1.0))) for s in (8192, 16384)
    )

    ok = worst_trace < 1e-6 and worst_linearity < 1e-9 and drift < 0.01
    _report(
        "criterion-10 numerics hygiene",
        ok,
        "trace-vs-correlation %.2e (< 1e-6), phase linearity %.2e (< 1e-9), "
        "FWHM refinement drift %.4f%% (< 1%%)" % (worst_trace, worst_linearity, 100 * drift),
    )
