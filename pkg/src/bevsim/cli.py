"""Command-line front end.

Loads configs and cycles, dispatches scenarios, writes CSV traces and SVG
plots, and prints a versioned JSON summary to stdout. Exit codes: 0 on
success, 1 on configuration/cycle parse or validation problems (including
bad flags), 2 on runtime simulation or I/O errors. Diagnostics go to
stderr. Identical invocations produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

from . import experiments
from .cycle import DriveCycle, cycle_stats, load_udds, parse_cycle, repeat
from .engine import (
    TRACE_FIELDS,
    EnergyLedger,
    SimSummary,
    SimTrace,
    ledger_check,
    run,
)
from .errors import BevSimError, ConfigError, CycleError
from .params import (
    VehicleConfig,
    default_config,
    parse_config,
    serialize_config,
    validate,
    with_overrides,
)
from .plots import emit_plot

SCHEMA_VERSION = 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help; remap its usage errors to exit 1.
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (ConfigError, CycleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BevSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bevsim",
        description="Battery-electric vehicle longitudinal dynamics simulator.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", metavar="PATH",
        help="vehicle config JSON (defaults to the built-in configuration)",
    )
    common.add_argument(
        "--cycle", metavar="PATH",
        help="drive-cycle CSV with header t_s,v_kmh (defaults to bundled UDDS)",
    )
    common.add_argument(
        "--dt", type=float, metavar="S", help="override the integration step [s]",
    )
    common.add_argument(
        "--no-regen", action="store_true",
        help="disable battery charging from regenerative braking",
    )
    common.add_argument(
        "--regen-eff", type=float, metavar="F",
        help="override the regenerative recovery efficiency (conflicts with --no-regen)",
    )

    p = sub.add_parser(
        "simulate", parents=[common], help="run a drive cycle once (or repeated)",
    )
    p.add_argument("--out", metavar="PATH", help="write the per-step trace CSV here")
    p.add_argument("--plot", metavar="PATH", help="write a tracking SVG here")
    p.add_argument(
        "--every", type=int, default=1, metavar="N",
        help="keep every Nth trace record (default 1)",
    )
    p.add_argument(
        "--repeat", type=int, default=1, metavar="N",
        help="repeat the cycle N times (default 1)",
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "range", parents=[common],
        help="repeat the cycle until the SoC floor and report range",
    )
    p.add_argument(
        "--until-soc", type=float, metavar="F",
        help="SoC floor ending the run (default: config battery.soc_floor)",
    )
    p.add_argument(
        "--compare-regen", action="store_true",
        help="run regen on and off and report the range gain",
    )
    p.add_argument("--out", metavar="PATH", help="write the trace CSV here")
    p.add_argument("--plot", metavar="PATH", help="write a distance/SoC SVG here")
    p.add_argument(
        "--every", type=int, default=10, metavar="N",
        help="keep every Nth trace record (default 10)",
    )
    p.set_defaults(func=cmd_range)

    p = sub.add_parser(
        "accel", parents=[common], help="full-throttle time to a target speed",
    )
    p.add_argument(
        "--target", type=float, default=100.0, metavar="KMH",
        help="target speed [km/h] (default 100)",
    )
    p.add_argument("--plot", metavar="PATH", help="write an acceleration SVG here")
    p.set_defaults(func=cmd_accel)

    p = sub.add_parser(
        "topspeed", parents=[common],
        help="full-throttle settled top speed vs the force-balance oracle",
    )
    p.add_argument(
        "--duration", type=float, default=120.0, metavar="S",
        help="settling time to simulate [s] (default 120)",
    )
    p.add_argument("--plot", metavar="PATH", help="write a top-speed SVG here")
    p.set_defaults(func=cmd_topspeed)

    p = sub.add_parser(
        "compare-regen", parents=[common],
        help="range with vs without energy recovery",
    )
    p.add_argument(
        "--until-soc", type=float, metavar="F",
        help="SoC floor ending the runs (default: config battery.soc_floor)",
    )
    p.set_defaults(func=cmd_compare_regen)

    p = sub.add_parser(
        "size-motor", parents=[common],
        help="steady-state cruising power for a design speed (and the inverse)",
    )
    p.add_argument(
        "--speed", type=float, metavar="KMH",
        help="design speed [km/h] to size for (default 120 if --power absent)",
    )
    p.add_argument(
        "--power", type=float, metavar="KW",
        help="solve for the speed this power rating sustains [kW]",
    )
    p.set_defaults(func=cmd_size_motor)

    p = sub.add_parser("defaults", help="print the full default config JSON")
    p.set_defaults(func=cmd_defaults)

    p = sub.add_parser(
        "validate", parents=[common], help="validate a config file",
    )
    p.set_defaults(func=cmd_validate)
    return parser


def _load_config(args) -> VehicleConfig:
    if getattr(args, "no_regen", False) and getattr(args, "regen_eff", None) is not None:
        raise ConfigError("--no-regen conflicts with --regen-eff")
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file '{args.config}': {exc}") from None
        config = parse_config(text)
    else:
        config = default_config()
    overrides = {}
    if getattr(args, "dt", None) is not None:
        overrides["sim"] = {"dt": args.dt}
    if getattr(args, "regen_eff", None) is not None:
        overrides["drivetrain"] = {"regen_efficiency": args.regen_eff}
    if overrides:
        config = with_overrides(config, **overrides)
        violations = validate(config)
        if violations:
            raise ConfigError(
                "invalid configuration after overrides:\n  " + "\n  ".join(violations)
            )
    return config


def _load_cycle(args) -> DriveCycle:
    path = getattr(args, "cycle", None)
    if not path:
        return load_udds()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CycleError(f"cannot read cycle file '{path}': {exc}") from None
    name = os.path.splitext(os.path.basename(path))[0]
    return parse_cycle(text, name=name)


def _print_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def _summary_dict(summary: SimSummary) -> dict:
    d = asdict(summary)
    d["stop_reason"] = summary.stop_reason.value
    return d


def _ledger_dict(ledger: EnergyLedger) -> dict:
    d = asdict(ledger)
    d["residual"] = ledger.residual
    check = ledger_check(ledger)
    d["check_passed"] = check.passed
    d["residual_fraction"] = check.residual_fraction
    return d


def emit_trace(trace: SimTrace, path: str, every: int = 1) -> None:
    """Write the trace CSV (exact 15-column header, 6 significant digits)."""
    if every < 1:
        raise ValueError(f"--every must be >= 1 (got {every})")
    cols = [getattr(trace, f) for f in TRACE_FIELDS]
    lines = [",".join(TRACE_FIELDS)]
    for i in range(0, len(trace), every):
        lines.append(",".join(format(float(c[i]), ".6g") for c in cols))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_simulate(args) -> int:
    config = _load_config(args)
    cycle = _load_cycle(args)
    if args.repeat < 1:
        raise ConfigError(f"--repeat must be >= 1 (got {args.repeat})")
    if args.every < 1:
        raise ConfigError(f"--every must be >= 1 (got {args.every})")
    if args.repeat > 1:
        cycle = repeat(cycle, args.repeat)
    trace, summary, ledger = run(
        config, cycle, regen_enabled=not args.no_regen
    )
    if args.out:
        emit_trace(trace, args.out, every=args.every)
    if args.plot:
        emit_plot(trace, "tracking", args.plot)
    stats = cycle_stats(cycle)
    _print_json(
        {
            "schema_version": SCHEMA_VERSION,
            "command": "simulate",
            "cycle": {
                "name": cycle.name,
                "duration_s": stats.duration_s,
                "distance_km": stats.distance_km,
                "max_speed_kmh": stats.max_speed_kmh,
            },
            "summary": _summary_dict(summary),
            "ledger": _ledger_dict(ledger),
        }
    )
    return 0


def _range_report_dict(report: experiments.RangeReport) -> dict:
    return asdict(report)


def cmd_range(args) -> int:
    config = _load_config(args)
    cycle = _load_cycle(args)
    if args.until_soc is not None and args.until_soc >= config.battery.initial_soc:
        raise ConfigError(
            f"--until-soc {args.until_soc} must be below the initial SoC "
            f"{config.battery.initial_soc}"
        )
    if args.every < 1:
        raise ConfigError(f"--every must be >= 1 (got {args.every})")
    if args.compare_regen:
        if args.no_regen:
            raise ConfigError("--compare-regen conflicts with --no-regen")
        comparison = experiments.regen_comparison(
            config, cycle, soc_floor=args.until_soc, parallel=True
        )
        _print_json(
            {
                "schema_version": SCHEMA_VERSION,
                "command": "range",
                "cycle": cycle.name,
                "reports": {
                    "regen_on": _range_report_dict(comparison.regen_on),
                    "regen_off": _range_report_dict(comparison.regen_off),
                },
                "gain_percent": comparison.gain_percent,
                "reference_gain_percents": list(comparison.reference_gain_percents),
            }
        )
        return 0
    trace_every = args.every if (args.out or args.plot) else 0
    report, trace, _, ledger = experiments.range_test_detailed(
        config,
        cycle,
        regen_enabled=not args.no_regen,
        soc_floor=args.until_soc,
        trace_every=trace_every,
    )
    if args.out:
        emit_trace(trace, args.out)
    if args.plot:
        emit_plot(trace, "range_soc", args.plot)
    _print_json(
        {
            "schema_version": SCHEMA_VERSION,
            "command": "range",
            "cycle": cycle.name,
            "report": _range_report_dict(report),
            "ledger": _ledger_dict(ledger),
        }
    )
    return 0


def cmd_compare_regen(args) -> int:
    args.compare_regen = True
    args.out = None
    args.plot = None
    args.every = 10
    return cmd_range(args)


def cmd_accel(args) -> int:
    config = _load_config(args)
    report = experiments.accel_test(config, target_kmh=args.target)
    oracle_s = experiments.accel_time_oracle(config, args.target)
    if args.plot:
        emit_plot(report, "accel", args.plot)
    _print_json(
        {
            "schema_version": SCHEMA_VERSION,
            "command": "accel",
            "report": {
                "time_to_target_s": report.time_to_target_s,
                "target_kmh": report.target_kmh,
                "trajectory": [list(p) for p in report.speed_trajectory],
            },
            "oracle_time_s": oracle_s,
            "reference_time_to_100_s": experiments.REFERENCE_ACCEL_TIME_S,
        }
    )
    return 0


def cmd_topspeed(args) -> int:
    config = _load_config(args)
    report = experiments.top_speed_test(config, duration=args.duration)
    if args.plot:
        emit_plot(report, "topspeed", args.plot)
    _print_json(
        {
            "schema_version": SCHEMA_VERSION,
            "command": "topspeed",
            "report": {
                "vmax_kmh": report.vmax_kmh,
                "time_to_vmax_s": report.time_to_vmax_s,
                "oracle_vmax_kmh": report.oracle_vmax_kmh,
                "discrepancy_kmh": report.discrepancy_kmh,
            },
            "reference_top_speed_kmh": experiments.REFERENCE_TOP_SPEED_KMH,
        }
    )
    return 0


def cmd_size_motor(args) -> int:
    config = _load_config(args)
    payload: dict = {"schema_version": SCHEMA_VERSION, "command": "size-motor"}
    speed = args.speed
    if speed is None and args.power is None:
        speed = 120.0
    if speed is not None:
        payload["design_speed_kmh"] = speed
        payload["power_kw"] = experiments.size_motor(config, speed)
    if args.power is not None:
        payload["power_rating_kw"] = args.power
        payload["sustained_speed_kmh"] = experiments.design_speed_for_power(
            config, args.power
        )
    _print_json(payload)
    return 0


def cmd_defaults(args) -> int:
    sys.stdout.write(serialize_config(default_config()))
    return 0


def cmd_validate(args) -> int:
    if not getattr(args, "config", None):
        raise ConfigError("validate requires --config PATH")
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file '{args.config}': {exc}") from None
    config = parse_config(text)  # raises ConfigError listing all violations
    _print_json(
        {
            "schema_version": SCHEMA_VERSION,
            "command": "validate",
            "valid": True,
            "violations": validate(config),
        }
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
