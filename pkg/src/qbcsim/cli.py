"""Command-line front end: bound tables, simulations, link budget, security report.

Exit codes: 0 success, 2 usage or configuration error, 3 I/O failure,
4 unsupported receiver/alphabet combination.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .analytics import (
    classical_ep_lower_bound,
    erfc_eval,
    eve_exponent_ratio,
    eve_random_phase_ber,
    exponent_gain_db,
    pa_ep_upper_bound,
    power_divider_penalty,
    sfg_ep_upper_bound,
)
from .config import DEFAULT_SEED, ConfigError, load_config, parse_sweep
from .link import (
    channel_phase,
    mode_pairs,
    rtt_from_link_budget,
    thermal_occupancy,
)
from .montecarlo import BerCurve, derive_trial_seed, fit_error_exponent, run_experiment
from .receivers import ReceiverKind, UnsupportedAlphabetError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_UNSUPPORTED = 4

#: fixed column order of the bounds table
BOUND_COLUMNS = (
    "het_pam",
    "het_bpsk",
    "het_qpsk",
    "pa_pam",
    "pa_bpsk",
    "sfg_pam",
    "sfg_bpsk",
    "sfg_qpsk",
)


def _fmt(x: float) -> str:
    """Lossless double formatting: 17 significant digits."""
    return f"{x:.17g}"


def bound_table_row(s: float) -> dict[str, float]:
    """Analytic bound values at one sweep point of s = eta N_S M / N_Z.

    Expressed through the minimum squared distance of each scheme: OOK d^2 = eta,
    BPSK d^2 = 4 eta, QPSK d^2 = 2 eta.
    """
    return {
        "het_pam": 0.25 * erfc_eval(math.sqrt(s / 4.0)),
        "het_bpsk": 0.25 * erfc_eval(math.sqrt(s)),
        "het_qpsk": 0.125 * erfc_eval(math.sqrt(s / 2.0)),
        "pa_pam": math.exp(-s / 2.0),
        "pa_bpsk": math.exp(-2.0 * s),
        "sfg_pam": math.exp(-s),
        "sfg_bpsk": math.exp(-4.0 * s),
        "sfg_qpsk": min(1.0, 4.0 * math.exp(-s)),
    }


def _write_text(out: str | None, text: str) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_bounds(args) -> int:
    columns = args.columns.split(",") if args.columns else list(BOUND_COLUMNS)
    for col in columns:
        if col == "pa_qpsk":
            print(
                "pa_qpsk is unsupported: the PA statistic projects onto a single "
                "axis, so it offers no gain for QPSK.",
                file=sys.stderr,
            )
            return EXIT_UNSUPPORTED
        if col not in BOUND_COLUMNS:
            print(f"unknown bounds column {col!r}", file=sys.stderr)
            return EXIT_USAGE
    try:
        sweep = parse_sweep(args.sweep)
    except ValueError as exc:
        print(f"bad sweep: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rows = [{"s": s, **bound_table_row(s)} for s in sweep]
    if args.format == "json":
        payload = [{k: row[k] for k in ["s", *columns]} for row in rows]
        text = json.dumps(payload, indent=2) + "\n"
    else:
        lines = [",".join(["s", *columns])]
        for row in rows:
            lines.append(",".join(_fmt(row[k]) for k in ["s", *columns]))
        text = "\n".join(lines) + "\n"
    try:
        _write_text(args.out, text)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _curve_csv(curve: BerCurve) -> str:
    header = "s,empirical_ber,wilson_ci_low,wilson_ci_high,analytic_bound,trials,errors"
    lines = [header]
    for pt in curve.points:
        lines.append(
            ",".join(
                [
                    _fmt(pt.s),
                    _fmt(pt.empirical_ber),
                    _fmt(pt.wilson_ci_low),
                    _fmt(pt.wilson_ci_high),
                    _fmt(pt.analytic_bound),
                    str(pt.trials),
                    str(pt.errors),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _curve_json(curve: BerCurve) -> list[dict]:
    return [
        {
            "s": pt.s,
            "empirical_ber": pt.empirical_ber,
            "wilson_ci_low": pt.wilson_ci_low,
            "wilson_ci_high": pt.wilson_ci_high,
            "analytic_bound": pt.analytic_bound,
            "trials": pt.trials,
            "errors": pt.errors,
        }
        for pt in curve.points
    ]


#: exponent coefficients (per unit d^2 N_S M / N_Z) used for summary gains
_EXPONENT_COEFF = {
    ReceiverKind.HETERODYNE: 0.25,
    ReceiverKind.PA: 0.5,
    ReceiverKind.SFG: 1.0,
}


def cmd_simulate(args) -> int:
    try:
        cfg = load_config(args.config)
    except FileNotFoundError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except UnsupportedAlphabetError as exc:
        print(f"unsupported combination: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not cfg.experiments:
        print("config defines no experiment", file=sys.stderr)
        return EXIT_USAGE

    out_dir = Path(args.out) if args.out else cfg.output_directory
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_IO

    summary = []
    for name, exp in cfg.experiments:
        if args.seed is not None:
            from dataclasses import replace

            exp = replace(exp, master_seed=args.seed)
        try:
            curve = run_experiment(exp)
        except UnsupportedAlphabetError as exc:
            print(f"experiment {name!r}: {exc}", file=sys.stderr)
            return EXIT_UNSUPPORTED
        entry = {
            "experiment": name,
            "receiver": exp.receiver.kind.value,
            "alphabet": exp.alphabet_kind.value,
            "seed": exp.master_seed,
            "points": _curve_json(curve),
        }
        nonzero = [pt for pt in curve.points if pt.empirical_ber > 0]
        if len(nonzero) >= 3:
            slope = fit_error_exponent(curve, s_min=curve.points[0].s)
            # exponent in units of s, compared against the classical coefficient
            # scaled by this scheme's d^2/eta ratio
            d2_per_eta = {"pam": 1.0, "bpsk": 4.0, "qpsk": 2.0}[exp.alphabet_kind.value]
            classical_slope = 0.25 * d2_per_eta
            entry["fitted_exponent"] = slope
            entry["exponent_ratio_vs_classical"] = slope / classical_slope
            entry["gain_db_vs_classical"] = 10.0 * math.log10(max(slope, 1e-300) / classical_slope)
        summary.append(entry)

        fmt = cfg.output_format if args.format is None else args.format
        path = out_dir / f"{name}.{fmt}"
        try:
            if fmt == "json":
                path.write_text(json.dumps(entry, indent=2) + "\n")
            else:
                path.write_text(_curve_csv(curve))
        except OSError as exc:
            print(f"cannot write {path}: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"{name}: wrote {path}")
        if "fitted_exponent" in entry:
            print(
                f"{name}: fitted exponent {entry['fitted_exponent']:.4g} "
                f"(x{entry['exponent_ratio_vs_classical']:.3g} vs classical, "
                f"{entry['gain_db_vs_classical']:.3g} dB)"
            )

    summary_path = out_dir / "summary.json"
    try:
        summary_path.write_text(json.dumps(summary, indent=2) + "\n")
    except OSError as exc:
        print(f"cannot write {summary_path}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"summary: wrote {summary_path}")
    return EXIT_OK


def cmd_link_budget(args) -> int:
    from .link import LinkBudget

    try:
        lb = LinkBudget(
            G_t=args.gt,
            G_r=args.gr,
            omega=2.0 * math.pi * args.f_hz,
            R_t=args.rt,
            R_r=args.rr,
            sigma_Q=args.sigma_q,
            T=args.temperature,
            W=args.bandwidth,
            T_s=args.symbol_time,
            varphi_tag=args.tag_phase,
        )
        eta = rtt_from_link_budget(lb)
        n_z = thermal_occupancy(lb.omega, lb.T)
        m = mode_pairs(lb.W, lb.T_s)
        r_total = lb.R_t + lb.R_r
        phase_default = channel_phase(r_total, lb.varphi_tag, lb.omega)
        phase_strict = channel_phase(r_total, lb.varphi_tag, lb.omega, strict=True)
    except ValueError as exc:
        print(f"invalid link budget: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"eta = {_fmt(eta)}" + ("  (warning: exceeds 1, not physical)" if eta > 1 else ""))
    print(f"N_Z = {_fmt(n_z)}")
    print(f"M = {m}")
    print(f"phase (omega R / c convention) = {_fmt(phase_default)} rad")
    print(f"phase (2 pi R / c convention, verbatim) = {_fmt(phase_strict)} rad")
    return EXIT_OK


def cmd_security(args) -> int:
    try:
        ratio = eve_exponent_ratio()
        print(f"legitimate/eavesdropper exponent ratio = {_fmt(ratio)}")
        print(f"  ({10.0 * math.log10(ratio):.3g} dB; idler retention is the advantage)")
        print("power-divider penalty (multiplier on the error exponent):")
        for fraction in (1.0, 0.75, 0.5, 0.25):
            penalty = power_divider_penalty(fraction)
            note = "  <- negates the PA-receiver gain" if fraction == 0.5 else ""
            print(f"  fraction kept {fraction:4.2f}: penalty {_fmt(penalty)}{note}")
        if args.simulate:
            rng = np.random.Generator(
                np.random.PCG64(derive_trial_seed(args.seed, 0, 0))
            )
            ber = eve_random_phase_ber(
                args.eta, args.ns, args.m, args.nz, args.trials, rng
            )
            se = math.sqrt(max(ber * (1 - ber), 1e-12) / args.trials)
            print(
                f"random-phase defense: eavesdropper BER = {ber:.5f} "
                f"(+/- {se:.5f} SE over {args.trials} trials; 0.5 is chance)"
            )
    except ValueError as exc:
        print(f"invalid security arguments: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbcsim",
        description=(
            "Quantum-illumination backscatter link simulator: bound tables, "
            "Monte Carlo BER runs, link-budget and security calculators."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="write the analytic bound table over a sweep")
    p.add_argument("--sweep", default="0.1:20:100", help="s_min:s_max:n (default 0.1:20:100)")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument(
        "--columns",
        default=None,
        help="comma-separated subset of: " + ",".join(BOUND_COLUMNS),
    )
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help="accepted for interface uniformity; the table is deterministic")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="run the experiments of a config file")
    p.add_argument("config", help="path to a key=value run configuration")
    p.add_argument("--out", default=None, help="output directory (overrides config)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--seed", type=int, default=None, help="override every experiment seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("link-budget", help="effective channel parameters from physics")
    p.add_argument("--gt", type=float, required=True, help="transmit antenna gain")
    p.add_argument("--gr", type=float, required=True, help="receive antenna gain")
    p.add_argument("--f-hz", type=float, required=True, dest="f_hz", help="carrier frequency [Hz]")
    p.add_argument("--rt", type=float, required=True, help="transmitter-tag distance [m]")
    p.add_argument("--rr", type=float, required=True, help="tag-receiver distance [m]")
    p.add_argument("--sigma-q", type=float, required=True, dest="sigma_q", help="radar cross section [m^2]")
    p.add_argument("--t", type=float, required=True, dest="temperature", help="environment temperature [K]")
    p.add_argument("--w", type=float, required=True, dest="bandwidth", help="phase-matching bandwidth [Hz]")
    p.add_argument("--ts", type=float, required=True, dest="symbol_time", help="symbol duration [s]")
    p.add_argument("--tag-phase", type=float, default=0.0, dest="tag_phase", help="tag phase [rad]")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help="accepted for interface uniformity; the calculator is deterministic")
    p.set_defaults(func=cmd_link_budget)

    p = sub.add_parser("security", help="eavesdropping analytics")
    p.add_argument("--simulate", action="store_true", help="run the random-phase defense Monte Carlo")
    p.add_argument("--eta", type=float, default=0.01)
    p.add_argument("--ns", type=float, default=0.01)
    p.add_argument("--nz", type=float, default=100.0)
    p.add_argument("--m", type=int, default=10_000)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_security)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
