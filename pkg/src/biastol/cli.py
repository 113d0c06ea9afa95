"""``biastol`` command line.

Every subcommand is a thin adapter over the library: it parses flags,
calls one API function and prints the result as JSON (default), as an
aligned table (``--pretty``) or writes CSV to ``-o``.

Exit codes: 0 success, 1 computation error (a JSON error object is
printed on stdout), 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Sequence

from biastol.errors import BiastolError
from biastol.fft_conv import FFTConfig
from biastol.quantile_map import DEFAULT_DRAWS, DEFAULT_KNOTS, QuantileMap, analytic_map, identity_map, monte_carlo_map
from biastol.tolerance_classic import (
    ToleranceSpec,
    exact_coverage,
    exact_sample_size,
    scheffe_tukey_coverage,
    scheffe_tukey_sample_size,
)

log = logging.getLogger("biastol")

WARN_FACTOR = 3


class UsageError(Exception):
    pass


def data_path(name: str) -> Path:
    return Path(str(resources.files("biastol") / "data" / name))


# ---------------------------------------------------------------- output


def _csv_text(rows: Sequence[dict], header: Sequence[str] | None = None) -> str:
    header = list(header or rows[0].keys())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([row.get(h, "") for h in header])
    return buf.getvalue()


def _pretty(rows: Sequence[dict]) -> str:
    header = list(rows[0].keys())
    cells = [[str(r.get(h, "")) for h in header] for r in rows]
    widths = [max(len(h), *(len(c[i]) for c in cells)) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def emit(result, args, header: Sequence[str] | None = None, csv_text: str | None = None) -> None:
    """Write ``result`` (a dict or a list of flat dicts) per the output flags."""
    rows = result if isinstance(result, list) else [result]
    out = getattr(args, "output", None)
    if out:
        flat = [{k: v for k, v in r.items() if not isinstance(v, (dict, list))} for r in rows]
        Path(out).write_text(csv_text if csv_text is not None else _csv_text(flat, header))
        return
    if getattr(args, "pretty", False):
        flat = [{k: v for k, v in r.items() if not isinstance(v, (dict, list))} for r in rows]
        print(_pretty(flat))
        return
    print(json.dumps(result))


def _warn_small(n: int, r: int, m: int) -> None:
    if n < WARN_FACTOR * (r + m):
        log.warning("n=%d is less than %d(r+m)=%d; the independence approximation may be poor",
                    n, WARN_FACTOR, WARN_FACTOR * (r + m))


def _fft_config(args) -> FFTConfig:
    return FFTConfig(epsilon=args.epsilon, target_cells=args.cells, padding=args.padding)


def _load_map(args) -> QuantileMap:
    if args.identity:
        return identity_map()
    return QuantileMap.load(args.map)


def _require_seed(args) -> int:
    if args.seed is None:
        raise UsageError(f"{args.command}: --seed is required")
    return args.seed


# ---------------------------------------------------------------- handlers


def cmd_classic_sample_size(args) -> None:
    spec = ToleranceSpec(args.r, args.m, args.q, args.alpha)
    fn = exact_sample_size if args.method == "exact" else scheffe_tukey_sample_size
    res = fn(spec)
    emit({"n": res.n, "method": res.method.value, "r": args.r, "m": args.m, "q": args.q,
          "alpha": args.alpha, "achieved": res.achieved, "diagnostics": res.diagnostics}, args)


def cmd_classic_coverage(args) -> None:
    fn = exact_coverage if args.method == "exact" else scheffe_tukey_coverage
    _warn_small(args.n, args.r, args.m)
    q = fn(args.n, args.r, args.m, args.alpha)
    emit({"q": q, "method": args.method, "n": args.n, "r": args.r, "m": args.m, "alpha": args.alpha}, args)


def cmd_biased_sample_size(args) -> None:
    from biastol.tolerance_fft import sample_size_fft
    from biastol.tolerance_inequality import sample_size_inequality

    spec = ToleranceSpec(args.r, args.m, args.q, args.alpha)
    qmap = _load_map(args)
    if args.method == "fft":
        res = sample_size_fft(spec, qmap, _fft_config(args))
    else:
        res = sample_size_inequality(spec, qmap)
    _warn_small(res.n, args.r, args.m)
    emit({"n": res.n, "method": res.method.value, "r": args.r, "m": args.m, "q": args.q,
          "alpha": args.alpha, "achieved": res.achieved, "diagnostics": res.diagnostics}, args)


def cmd_biased_coverage(args) -> None:
    from biastol.tolerance_fft import coverage_fft
    from biastol.tolerance_inequality import coverage_inequality

    qmap = _load_map(args)
    _warn_small(args.n, args.r, args.m)
    if args.method == "fft":
        q = coverage_fft(args.n, args.r, args.m, args.alpha, qmap, _fft_config(args))
    else:
        q = coverage_inequality(args.n, args.r, args.m, args.alpha, qmap)
    emit({"q": q, "method": args.method, "n": args.n, "r": args.r, "m": args.m, "alpha": args.alpha}, args)


def cmd_map_make(args) -> None:
    from biastol.distributions import GenGammaSpec

    if args.kind == "identity":
        qmap = identity_map()
    else:
        target = GenGammaSpec(args.shape, args.rate, args.delta)
        if args.kind == "analytic":
            qmap = analytic_map(target, args.kappa, args.knots)
        else:
            from biastol.sim_harness import _cell_seed, calibrate_lambda, observed_sampler, target_sampler

            seed = _require_seed(args)
            lam = None
            if args.censor_rate > 0:
                lam = calibrate_lambda(target, args.censor_rate, _cell_seed(seed, 1))
            qmap = monte_carlo_map(target_sampler(target), observed_sampler(target, lam, args.events_only),
                                   draws=args.draws, knot_count=args.knots, seed=_cell_seed(seed, 2),
                                   meta={"shape": args.shape, "rate": args.rate, "censor_rate": args.censor_rate,
                                         "lambda": lam, "seed": seed})
    if args.output:
        qmap.save(args.output)
    else:
        print(qmap.to_json())


def cmd_simulate(args) -> None:
    from biastol.sim_harness import SimConfig, rows_to_csv, run_grid

    text = Path(args.config).read_text() if args.config else data_path("coverage_grid.toml").read_text()
    try:
        config = SimConfig.from_toml(text, seed=args.seed, replications=args.replications,
                                     events_only=True if args.events_only else None)
    except BiastolError as exc:
        if "seed" in str(exc):
            raise UsageError("simulate: --seed is required (or set seed in the config)") from exc
        raise
    rows = run_grid(config, jobs=args.jobs, timing=not args.no_timing)
    emit(rows, args, csv_text=rows_to_csv(rows))


def _read_sample(args):
    from biastol.pilot import LENGTH_BIAS, SizeBias, read_pilot_csv

    bias = None if args.bias == "none" else (LENGTH_BIAS if args.kappa is None else SizeBias(args.kappa))
    return read_pilot_csv(args.data or data_path("synthetic_cohort.csv"), bias)


def cmd_pilot_fit(args) -> None:
    from biastol.pilot import empirical_ghat, npmle_fhat
    from biastol.quantile_map import pilot_map

    sample = _read_sample(args)
    ghat = empirical_ghat(sample)
    fhat = ghat if sample.bias is None else npmle_fhat(sample, keep_trace=False)
    if args.map_out:
        pilot_map(fhat, ghat, args.knots).save(args.map_out)
    result = {"records": len(sample), "censored_fraction": sample.censored_fraction,
              "ghat": json.loads(ghat.to_json()), "fhat": json.loads(fhat.to_json()),
              "iterations": fhat.info.get("iterations", 0)}
    if args.output:
        Path(args.output).write_text(fhat.to_json())
    else:
        print(json.dumps(result))


def cmd_pilot_report(args) -> None:
    from biastol.pilot import REPORT_HEADER, SWEEP_HEADER, design_report, report_csv, sweep_report

    sample = _read_sample(args)
    if args.mode == "table":
        rows = design_report(sample, args.r_grid, args.m_grid, args.q, args.alpha, _fft_config(args), args.jobs)
        header = REPORT_HEADER
    else:
        rows = sweep_report(sample, args.q_grid, args.confidence_grid, args.r, args.m, _fft_config(args), args.jobs)
        header = SWEEP_HEADER
    emit(rows, args, header=header, csv_text=report_csv(rows, header))


def cmd_pilot_synth(args) -> None:
    from biastol.pilot import synthetic_cohort, write_pilot_csv

    sample = synthetic_cohort(_require_seed(args), n=args.n, censor_rate=args.censor_rate)
    if args.output:
        write_pilot_csv(sample, args.output)
    else:
        print(json.dumps({"records": len(sample), "censored_fraction": sample.censored_fraction}))


# ---------------------------------------------------------------- parser


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in (0, 1)")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return v


def _int_list(text: str) -> list[int]:
    return [_positive_int(t) for t in text.split(",")]


def _prob_list(text: str) -> list[float]:
    return [_probability(t) for t in text.split(",")]


def _add_output(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("-o", "--output", help="write CSV (or the native file format) to this path")
    g.add_argument("--pretty", action="store_true", help="print an aligned table instead of JSON")


def _add_rm(p: argparse.ArgumentParser) -> None:
    p.add_argument("--r", type=_positive_int, required=True)
    p.add_argument("--m", type=_positive_int, required=True)


def _add_fft(p: argparse.ArgumentParser) -> None:
    d = FFTConfig()
    p.add_argument("--epsilon", type=float, default=d.epsilon)
    p.add_argument("--cells", type=int, default=d.target_cells)
    p.add_argument("--padding", choices=("nextpow2", "exact"), default=d.padding)


def _add_map(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--map", help="quantile map JSON file")
    g.add_argument("--identity", action="store_true", help="use the identity map (unbiased sampling)")


def _add_pilot_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", help="time,status CSV (default: bundled synthetic pilot)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--bias", choices=("length", "none"), default="length")
    g.add_argument("--kappa", type=float, help="size-bias degree (overrides length bias)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biastol", description="Nonparametric tolerance limits under biased sampling.")
    sub = parser.add_subparsers(dest="group", required=True)

    classic = sub.add_parser("classic", help="unbiased sampling").add_subparsers(dest="action", required=True)
    p = classic.add_parser("sample-size")
    _add_rm(p)
    p.add_argument("--q", type=_probability, required=True)
    p.add_argument("--alpha", type=_probability, required=True)
    p.add_argument("--method", choices=("exact", "scheffe"), default="exact")
    _add_output(p)
    p.set_defaults(func=cmd_classic_sample_size, command="classic sample-size")
    p = classic.add_parser("coverage")
    p.add_argument("--n", type=_positive_int, required=True)
    _add_rm(p)
    p.add_argument("--alpha", type=_probability, required=True)
    p.add_argument("--method", choices=("exact", "scheffe"), default="exact")
    _add_output(p)
    p.set_defaults(func=cmd_classic_coverage, command="classic coverage")

    biased = sub.add_parser("biased", help="biased sampling via a quantile map").add_subparsers(dest="action", required=True)
    p = biased.add_parser("sample-size")
    _add_rm(p)
    p.add_argument("--q", type=_probability, required=True)
    p.add_argument("--alpha", type=_probability, required=True)
    p.add_argument("--method", choices=("fft", "ineq"), default="fft")
    _add_map(p)
    _add_fft(p)
    _add_output(p)
    p.set_defaults(func=cmd_biased_sample_size, command="biased sample-size")
    p = biased.add_parser("coverage")
    p.add_argument("--n", type=_positive_int, required=True)
    _add_rm(p)
    p.add_argument("--alpha", type=_probability, required=True)
    p.add_argument("--method", choices=("fft", "ineq"), default="fft")
    _add_map(p)
    _add_fft(p)
    _add_output(p)
    p.set_defaults(func=cmd_biased_coverage, command="biased coverage")

    mp = sub.add_parser("map", help="quantile maps").add_subparsers(dest="action", required=True)
    p = mp.add_parser("make")
    p.add_argument("--kind", choices=("identity", "analytic", "montecarlo"), required=True)
    p.add_argument("--shape", type=float, default=1.0, help="target Gamma shape")
    p.add_argument("--rate", type=float, default=2.0, help="target Gamma rate")
    p.add_argument("--delta", type=float, default=1.0, help="Generalized Gamma power")
    p.add_argument("--kappa", type=float, default=1.0, help="size-bias degree (analytic)")
    p.add_argument("--knots", type=_positive_int, default=DEFAULT_KNOTS)
    p.add_argument("--draws", type=_positive_int, default=DEFAULT_DRAWS)
    p.add_argument("--censor-rate", type=float, default=0.0)
    p.add_argument("--events-only", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output", help="map JSON path (default: stdout)")
    p.set_defaults(func=cmd_map_make, command="map make")

    p = sub.add_parser("simulate", help="coverage simulation grid")
    p.add_argument("--config", help="TOML config (default: bundled coverage_grid.toml)")
    p.add_argument("--seed", type=int)
    p.add_argument("--replications", type=_positive_int)
    p.add_argument("--jobs", type=_positive_int, default=os.cpu_count() or 1)
    p.add_argument("--no-timing", action="store_true", help="write runtime_ms = 0 for byte-reproducible output")
    p.add_argument("--events-only", action="store_true", help="order statistics from uncensored times only")
    _add_output(p)
    p.set_defaults(func=cmd_simulate, command="simulate")

    pilot = sub.add_parser("pilot", help="pilot-data route").add_subparsers(dest="action", required=True)
    p = pilot.add_parser("fit")
    _add_pilot_input(p)
    p.add_argument("--knots", type=_positive_int, default=DEFAULT_KNOTS)
    p.add_argument("--map-out", help="also write the pilot quantile map JSON here")
    p.add_argument("-o", "--output", help="write the F estimate JSON here")
    p.set_defaults(func=cmd_pilot_fit, command="pilot fit")
    p = pilot.add_parser("report")
    _add_pilot_input(p)
    p.add_argument("--mode", choices=("table", "sweep"), default="table")
    p.add_argument("--r-grid", type=_int_list, default=[1, 3, 5, 10])
    p.add_argument("--m-grid", type=_int_list, default=[1, 2, 7, 12])
    p.add_argument("--q", type=_probability, default=0.80)
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--q-grid", type=_prob_list, default=[0.80, 0.85, 0.90, 0.95])
    p.add_argument("--confidence-grid", type=_prob_list, default=[0.90, 0.925, 0.95])
    p.add_argument("--r", type=_positive_int, default=1)
    p.add_argument("--m", type=_positive_int, default=1)
    p.add_argument("--jobs", type=_positive_int, default=os.cpu_count() or 1)
    _add_fft(p)
    _add_output(p)
    p.set_defaults(func=cmd_pilot_report, command="pilot report")
    p = pilot.add_parser("synth")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=_positive_int, default=821)
    p.add_argument("--censor-rate", type=float, default=0.21)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_pilot_synth, command="pilot synth")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("BIASTOL_LOG", "WARNING").upper()
    if not isinstance(logging.getLevelName(level), int):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"biastol: error: {exc}", file=sys.stderr)
        return 2
    except (BiastolError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "command": args.command}))
        return 1
    log.info("%s finished in %.3f s", args.command, time.perf_counter() - t0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
