"""Command-line front end.

Every subcommand is a pure function of its config document: the same config
produces byte-identical outputs (modulo the suppressible banner line).
Tables go to stdout or, with --out, to one .tsv file per table; logging goes
to stderr only.

Exit codes: 0 success, 2 config or domain error, 3 no threshold found
anywhere in a thresholds run, 4 numerical-resolution error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .analysis import (
    ImprovementFactors,
    SweepSpec,
    Table,
    fluctuation_study,
    hg_mode_comparison,
    improvement_factors,
    keyrate_sweep,
    noise_reduction_factor,
    noise_threshold,
)
from .config import RunConfig, dump_effective, load_config, resolve
from .errors import ConfigError, ResolutionError, ThresholdNotFoundError
from .kerr import switching_trace
from .qkd import (
    ELECTRONIC,
    ULTRAFAST,
    background_yield,
    simulate_observed_rates,
)

_PS = 1e-12


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kerrgate",
        description="Simulator of an optically time-gated QKD receiver",
    )
    parser.add_argument("--config", metavar="PATH", help="JSON config file; defaults are the built-in operating point")
    parser.add_argument("--out", metavar="DIR", help="write tables to files in DIR instead of stdout")
    parser.add_argument("--jobs", type=int, default=None, metavar="N", help="parallel workers for sweeps (default: cpu count)")
    parser.add_argument("--no-banner", action="store_true", help="suppress the version banner line")
    commands = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("switch-profile", "time-resolved switching efficiency of the optical gate"),
        ("trace", "detected switching efficiency versus pump-to-signal delay"),
        ("keyrate", "decoy-state key rates, gains, and QBERs over noise and loss"),
        ("thresholds", "noise/loss thresholds and improvement factors"),
        ("modes", "Hermite-Gauss mode transmissions through gate and filter"),
        ("fluctuations", "single-photon key rates under pulse broadening"),
        ("dump-defaults", "print the fully-resolved effective config as JSON"),
    ):
        commands.add_parser(name, help=doc)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        run = resolve(config)
        handler = _HANDLERS[args.command]
        return handler(args, run)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except ResolutionError as exc:
        print("resolution error: %s" % exc, file=sys.stderr)
        return 4
    except ThresholdNotFoundError as exc:
        print("threshold not found: %s" % exc, file=sys.stderr)
        return 3
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        # --out collisions and unwritable paths are usage errors, not crashes
        print("error: %s" % exc, file=sys.stderr)
        return 2


def _banner(args) -> str:
    if args.no_banner:
        return ""
    return "# kerrgate %s :: %s\n" % (__version__, args.command)


def _emit(args, outputs: dict[str, str]):
    """Write named text outputs to --out files or stdout."""
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for name, text in outputs.items():
            with open(os.path.join(args.out, name), "w") as handle:
                handle.write(_banner(args) + text)
        return
    multiple = len(outputs) > 1
    for name, text in outputs.items():
        if multiple:
            sys.stdout.write("# output: %s\n" % name)
        sys.stdout.write(_banner(args) + text)


def _cmd_switch_profile(args, run: RunConfig) -> int:
    table = Table(columns=("time_ps", "delta_phi_rad", "efficiency"))
    switch = run.switch
    for t, phi, eta in zip(switch.time_grid, switch.phase, switch.efficiency):
        table.append(t / _PS, phi, eta)
    footer = "# fwhm_ps = %.10g\teffective_width_ps = %.10g\n" % (
        switch.fwhm / _PS,
        switch.effective_width / _PS,
    )
    _emit(args, {"switch_profile.tsv": table.format_tsv() + footer})
    return 0


def _cmd_trace(args, run: RunConfig) -> int:
    delays = run.trace_delays()
    trace = switching_trace(run.switch, run.signal, delays, run.spectral_filter)
    table = Table(columns=("delay_ps", "switched_efficiency"))
    for d, eff in zip(trace.delays, trace.efficiency):
        table.append(d / _PS, eff)
    footer = "# fwhm_ps = %.10g\tpeak = %.10g\n" % (trace.fwhm / _PS, trace.peak_value)
    _emit(args, {"trace.tsv": table.format_tsv() + footer})
    return 0


def _cmd_keyrate(args, run: RunConfig) -> int:
    sweep_cfg = run.effective["sweep"]
    noise_levels = [float(v) for v in sweep_cfg["curve_noise_levels_hz"]]
    loss_levels = [float(v) for v in sweep_cfg["curve_loss_levels_db"]]

    vs_loss = Table(
        columns=(
            "noise_rate_hz",
            "channel_loss_db",
            "filter",
            "q_mu",
            "e_mu",
            "q1_lower",
            "e1_upper",
            "rate_per_pulse",
            "rate_per_second",
        )
    )
    for noise in noise_levels:
        spec = SweepSpec(
            variable="channel_loss_db",
            start=sweep_cfg["loss_min_db"],
            stop=sweep_cfg["loss_max_db"],
            samples=int(sweep_cfg["loss_samples"]),
            spacing="linear",
            scenario=run.scenario.with_(noise_rate=noise),
        )
        part = keyrate_sweep(spec, run.detector, run.decoy, run.switch, run.spectral_overlap, args.jobs)
        for row in part.rows:
            vs_loss.append(noise, *row)

    vs_noise = Table(
        columns=(
            "channel_loss_db",
            "noise_rate_hz",
            "filter",
            "q_mu",
            "e_mu",
            "q1_lower",
            "e1_upper",
            "rate_per_pulse",
            "rate_per_second",
        )
    )
    for loss in loss_levels:
        spec = SweepSpec(
            variable="noise_rate",
            start=sweep_cfg["noise_min_hz"],
            stop=sweep_cfg["noise_max_hz"],
            samples=int(sweep_cfg["noise_samples"]),
            spacing="log",
            scenario=run.scenario.with_(channel_loss_db=loss),
        )
        part = keyrate_sweep(spec, run.detector, run.decoy, run.switch, run.spectral_overlap, args.jobs)
        for row in part.rows:
            vs_noise.append(loss, *row)

    gains = Table(
        columns=(
            "channel_loss_db",
            "noise_rate_hz",
            "filter",
            "q_mu",
            "q_nu",
            "e_mu",
            "e_nu",
            "y0",
        )
    )
    for loss in loss_levels:
        for noise in run.noise_grid():
            for kind in (ELECTRONIC, ULTRAFAST):
                scenario = run.scenario.with_(
                    channel_loss_db=loss, noise_rate=float(noise), filter_kind=kind
                )
                y0 = background_yield(scenario, run.detector, run.switch, run.spectral_overlap)
                rates = simulate_observed_rates(scenario, run.detector, run.decoy, y0)
                gains.append(loss, float(noise), kind, rates.q_mu, rates.q_nu, rates.e_mu, rates.e_nu, rates.y0)

    _emit(
        args,
        {
            "keyrate_vs_loss.tsv": vs_loss.format_tsv(),
            "keyrate_vs_noise.tsv": vs_noise.format_tsv(),
            "gains_qber.tsv": gains.format_tsv(),
        },
    )
    return 0


def _cmd_thresholds(args, run: RunConfig) -> int:
    noise_table = Table(
        columns=("channel_loss_db", "filter", "threshold_hz", "iterations", "status")
    )
    ok_rows = 0
    for loss in run.loss_grid():
        for kind in (ELECTRONIC, ULTRAFAST):
            scenario = run.scenario.with_(channel_loss_db=float(loss))
            try:
                result = noise_threshold(
                    scenario,
                    run.detector,
                    run.decoy,
                    run.switch,
                    run.spectral_overlap,
                    kind,
                    run.noise_bracket(),
                    run.effective["thresholds"]["relative_width"],
                )
                noise_table.append(float(loss), kind, result.threshold_value, result.iterations, "ok")
                ok_rows += 1
            except ThresholdNotFoundError as exc:
                noise_table.append(float(loss), kind, None, None, "no-threshold-%s" % exc.side)

    imp = improvement_factors(
        run.loss_grid(),
        run.noise_grid(),
        run.scenario,
        run.detector,
        run.decoy,
        run.switch,
        run.spectral_overlap,
        run.loss_bracket(),
        run.noise_bracket(),
        args.jobs,
    )
    ok_rows += sum(1 for status in imp.distance.column("status") if status == "ok")

    summary = _summary_table(run, imp)
    _emit(
        args,
        {
            "noise_thresholds.tsv": noise_table.format_tsv(),
            "noise_improvement.tsv": imp.noise_ratio.format_tsv(),
            "loss_thresholds.tsv": imp.distance.format_tsv(),
            "summary.tsv": summary.format_tsv(),
        },
    )
    if ok_rows == 0:
        print("threshold not found: no bracket produced a positive key rate", file=sys.stderr)
        return 3
    return 0


def _summary_table(run: RunConfig, imp: ImprovementFactors) -> Table:
    table = Table(
        columns=(
            "crossover_noise_hz",
            "max_improvement",
            "max_improvement_noise_hz",
            "nrf_broadband",
            "nrf_narrow_line",
        )
    )
    nrf_broadband = noise_reduction_factor(
        run.switch, run.detector.coincidence_window, None, run.spectral_filter
    )
    nrf_narrow = noise_reduction_factor(
        run.switch, run.detector.coincidence_window, 0.0, run.spectral_filter
    )
    table.append(
        imp.crossover_noise,
        imp.max_improvement,
        imp.max_improvement_noise,
        nrf_broadband,
        nrf_narrow,
    )
    return table


def _cmd_modes(args, run: RunConfig) -> int:
    table = hg_mode_comparison(
        int(run.effective["modes"]["max_order"]),
        run.switch,
        run.spectral_filter,
        run.signal,
    )
    _emit(args, {"modes.tsv": table.format_tsv()})
    return 0


def _cmd_fluctuations(args, run: RunConfig) -> int:
    cfg = run.effective["fluctuation"]
    import numpy as np

    loss_grid = np.linspace(cfg["loss_min_db"], cfg["loss_max_db"], int(cfg["loss_samples"]))
    study = fluctuation_study(
        [d * _PS for d in cfg["pulse_fwhm_ps"]],
        cfg["noise_levels_hz"],
        loss_grid,
        run.switch,
        visibility=cfg["visibility"],
        detector_efficiency=cfg["detector_efficiency"],
        dark_rate=cfg["dark_rate_hz"],
        electronic_window=cfg["electronic_window_ns"] * 1e-9,
        sifting_q=run.decoy.sifting_q,
        error_correction_f=run.decoy.error_correction_f,
        jobs=args.jobs,
    )
    _emit(
        args,
        {
            "fluctuation_rates.tsv": study.rates.format_tsv(),
            "fluctuation_thresholds.tsv": study.thresholds.format_tsv(),
        },
    )
    return 0


def _cmd_dump_defaults(args, run: RunConfig) -> int:
    text = dump_effective(run)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "defaults.json"), "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


_HANDLERS = {
    "switch-profile": _cmd_switch_profile,
    "trace": _cmd_trace,
    "keyrate": _cmd_keyrate,
    "thresholds": _cmd_thresholds,
    "modes": _cmd_modes,
    "fluctuations": _cmd_fluctuations,
    "dump-defaults": _cmd_dump_defaults,
}


if __name__ == "__main__":
    sys.exit(main())
