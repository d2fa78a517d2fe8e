"""Command-line front end.

    timebin-dj validate   [--config FILE]
    timebin-dj run        [--config FILE] (--oracle FILE | --bv BITS) [--mode dj|bv]
    timebin-dj throughput [--config FILE] [--oracle FILE | --bv BITS]
    timebin-dj visibility [--config FILE] [--runs N] [--seed S] [--out CSV] [--counts-out CSV]
    timebin-dj sweep      [--config FILE] --knob K --values a,b,c [--runs N] [--seed S] [--out CSV]

Errors go to stderr as ``error[<category>]: <message>`` with a
category-specific exit code.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigFileError, ParsedConfig, default_config, load_config
from .detection import (
    SourceModel,
    expected_visibility,
    format_table,
    visibility_table,
)
from .experiment import (
    PRESETS,
    ConfigError,
    delay_inequalities_hold,
    loss_budget,
    propagate,
    run_ideal,
    validate_config,
)
from .oracles import OracleSpec, classify, oracle_bv, read_truth_table
from .timebin import all_bitstrings, format_bits, parse_bits

EXIT_CODES = {"usage": 2, "config": 3, "validation": 4, "oracle": 5, "io": 6}

SWEEP_KNOBS = ("eps", "sigma_phi", "v", "dark_rate", "mu")


class CliError(Exception):
    def __init__(self, category: str, message: str):
        self.category = category
        super().__init__(message)


def sci(x: float) -> str:
    """Scientific notation to 7 significant digits with a bare exponent, e.g. 7.8125e-3."""
    return np.format_float_scientific(x, precision=6, exp_digits=1, trim="-")


# helpers

def _load(args) -> ParsedConfig:
    cfg = load_config(args.config) if args.config else default_config(3)
    preset = getattr(args, "preset", None)
    if preset:
        cfg = replace(cfg, experiment=cfg.experiment.with_imperfections(PRESETS[preset]))
    return cfg


def _oracle(args, n: int, required: bool = True) -> OracleSpec | None:
    if args.oracle and args.bv:
        raise CliError("usage", "give either --oracle or --bv, not both")
    if args.bv:
        try:
            o = oracle_bv(parse_bits(args.bv))
        except ValueError as exc:
            raise CliError("oracle", str(exc)) from None
    elif args.oracle:
        try:
            o = read_truth_table(args.oracle)
        except OSError as exc:
            raise CliError("io", f"cannot read {args.oracle}: {exc.strerror}") from None
        except ValueError as exc:
            raise CliError("oracle", f"{args.oracle}: {exc}") from None
    elif required:
        raise CliError("usage", "an oracle is required (--oracle FILE or --bv BITS)")
    else:
        return None
    if o.n != n:
        raise CliError("oracle", f"oracle has n={o.n} but the configuration has n={n}")
    return o


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise CliError("io", f"cannot write {out}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def _write_manifest(args, outputs: list[str]) -> None:
    if not outputs:
        return
    manifest = {
        "command": args.command,
        "argv": sys.argv[1:],
        "config": args.config,
        "seed": getattr(args, "seed", None),
        "runs": getattr(args, "runs", None),
        "outputs": outputs,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    Path(outputs[0] + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# commands

def cmd_validate(args) -> int:
    cfg = load_config(args.config) if args.config else default_config(3)
    exp = cfg.experiment
    print(f"n={exp.n} deltas={','.join(map(str, exp.deltas))} arm_Ls={','.join(map(str, exp.arm_Ls))}")
    print(f"delay_inequalities={'hold' if delay_inequalities_hold(exp) else 'violated'}")
    print("valid")
    return 0


def cmd_run(args) -> int:
    cfg = _load(args)
    exp = cfg.experiment
    oracle = _oracle(args, exp.n)
    mode = args.mode or ("bv" if args.bv else "dj")
    dist = run_ideal(exp, oracle)
    result = propagate(exp, oracle)
    tp = loss_budget(exp, oracle).total
    zs = [format_bits(z) for z in all_bitstrings(exp.n)]
    if mode == "bv":
        k = int(np.argmax(dist))
        print(f"outcome={zs[k]}, P={dist[k]:.6f}, throughput={sci(tp)}")
    else:
        p0 = dist[0]
        if np.isclose(p0, 1.0, atol=1e-9):
            verdict = "constant"
        elif np.isclose(p0, 0.0, atol=1e-9):
            verdict = "balanced"
        else:
            verdict = "undetermined"
        print(f"verdict={verdict}, P(0)={p0:.6f}, throughput={sci(tp)}")
        print(f"oracle_class={classify(oracle).value}")
    for z, p in zip(zs, dist):
        print(f"z={z} P={p:.6f}")
    print(f"occupied_bins={result.occupied_bins}")
    return 0


def cmd_throughput(args) -> int:
    cfg = _load(args)
    exp = cfg.experiment
    oracle = _oracle(args, exp.n, required=False)
    b = loss_budget(exp, oracle)
    print(f"forward_power={sci(b.forward_power)}")
    print(f"interference_fraction={sci(b.interference_fraction)}")
    print(f"final_coupler_factor={sci(b.final_coupler_factor)}")
    print(f"throughput={sci(b.total)}")
    print(f"loss_db={b.loss_db + 0.0:.4f}")
    return 0


def _check_runs(runs: int) -> None:
    if runs < 1:
        raise CliError("usage", f"--runs must be >= 1, got {runs}")


def cmd_visibility(args) -> int:
    cfg = _load(args)
    _check_runs(args.runs)
    exp = cfg.experiment
    report = visibility_table(exp, cfg.source, cfg.detector, args.runs, args.seed, args.workers)
    text = _csv_text(["z", "V", "stderr"], [(z, f"{v:.10f}", f"{e:.10f}") for z, v, e in report.rows()])
    outputs = []
    _emit(text, args.out)
    if args.out:
        outputs.append(args.out)
    if args.counts_out:
        rows = []
        for h in report.histograms:
            for i, (z, c) in enumerate(h.as_dict().items()):
                rows.append((z, int(h.bin_times[i]), h.oracle, c, h.runs))
        _emit(_csv_text(["z", "bin_time_units", "oracle", "counts", "runs"], rows), args.counts_out)
        outputs.append(args.counts_out)
    if args.out:
        print(format_table(report))
    else:
        print(format_table(report), file=sys.stderr)
    _write_manifest(args, outputs)
    return 0


def _apply_knob(cfg: ParsedConfig, knob: str, value: float) -> ParsedConfig:
    exp = cfg.experiment
    imp = exp.imperfections
    if knob in ("eps", "sigma_phi", "v"):
        exp = exp.with_imperfections(replace(imp, **{knob: value}))
        violations = validate_config(exp)
        if violations:
            raise CliError("validation", f"{knob}={value}: {'; '.join(violations)}")
        return replace(cfg, experiment=exp)
    try:
        if knob == "dark_rate":
            return replace(cfg, detector=replace(cfg.detector, dark_rate_per_ns=value))
        return replace(cfg, source=SourceModel(value))
    except ValueError as exc:
        raise CliError("validation", f"{knob}={value}: {exc}") from None


def cmd_sweep(args) -> int:
    cfg = _load(args)
    _check_runs(args.runs)
    if args.knob not in SWEEP_KNOBS:
        raise CliError("usage", f"unknown knob {args.knob!r} (choose from {', '.join(SWEEP_KNOBS)})")
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise CliError("usage", f"--values must be comma-separated numbers, got {args.values!r}") from None
    if not values:
        raise CliError("usage", "--values is empty")
    rows = []
    for value in values:
        c = _apply_knob(cfg, args.knob, value)
        expected = expected_visibility(c.experiment, c.source, c.detector, args.runs)
        sampled = visibility_table(c.experiment, c.source, c.detector, args.runs, args.seed, args.workers)
        err = np.sqrt(np.nansum(sampled.stderr ** 2)) / len(sampled.stderr)
        rows.append((args.knob, repr(value), f"{np.nanmean(expected.V):.10f}", f"{np.nanmean(sampled.V):.10f}", f"{err:.10f}"))
    text = _csv_text(["knob", "value", "V_expected", "V_sampled", "stderr"], rows)
    _emit(text, args.out)
    _write_manifest(args, [args.out] if args.out else [])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timebin-dj", description="Time-bin DJ/BV setup simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", "-c", help="key=value configuration file (default: n=3 with default delays)")

    def add_oracle(p):
        p.add_argument("--oracle", help="truth-table file")
        p.add_argument("--bv", help="use the inner-product oracle f_j for this bit string")

    def add_mc(p, runs):
        p.add_argument("--runs", type=int, default=runs, help="runs per oracle (default %(default)s)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="CSV output path (default stdout)")
        p.add_argument("--workers", type=int, default=1, help="threads for Monte Carlo chunks")
        p.add_argument("--preset", choices=sorted(PRESETS), help="override the imperfection knobs")

    p = sub.add_parser("validate", help="check a configuration for bin collisions")
    add_config(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="ideal propagation for one oracle")
    add_config(p)
    add_oracle(p)
    p.add_argument("--mode", choices=("dj", "bv"))
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("throughput", help="loss budget")
    add_config(p)
    add_oracle(p)
    p.set_defaults(func=cmd_throughput)

    p = sub.add_parser("visibility", help="Monte Carlo visibility table over the BV family")
    add_config(p)
    add_mc(p, 500_000)
    p.add_argument("--counts-out", help="also write per-oracle counts CSV")
    p.set_defaults(func=cmd_visibility)

    p = sub.add_parser("sweep", help="visibility versus one imperfection or detector knob")
    add_config(p)
    add_mc(p, 100_000)
    p.add_argument("--knob", required=True, help=f"one of {', '.join(SWEEP_KNOBS)}")
    p.add_argument("--values", required=True, help="comma-separated knob values")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        category, msg = exc.category, str(exc)
    except ConfigFileError as exc:
        category, msg = exc.category, str(exc)
    except ConfigError as exc:
        category, msg = "validation", str(exc)
    except ValueError as exc:
        category, msg = "config", str(exc)
    print(f"error[{category}]: {msg}", file=sys.stderr)
    return EXIT_CODES.get(category, 1)


if __name__ == "__main__":
    sys.exit(main())
