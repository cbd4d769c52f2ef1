"""Command-line front end: ``backsim {calibrate,simulate,curve,validate}``.

Exit codes: 0 success, 1 usage or scenario error, 2 infeasible calibration,
3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from itertools import combinations
from pathlib import Path

from . import scenario as scenario_io
from .analytics import correlation_curve
from .calibration import CalibratedModel, InfeasibleCalibration, calibrate
from .simulation import SimulationConfig, simulate
from .validation import run_checks

EXIT_USAGE, EXIT_INFEASIBLE, EXIT_VALIDATION = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, type=Path, help="scenario YAML file")
    common.add_argument("--out", type=Path, help="output directory (default: scenario 'out')")
    common.add_argument("--seed", type=int, help="override the scenario seed")
    common.add_argument("--paths", type=int, help="override the number of paths")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="path-generation workers (default: all cores)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="backsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("calibrate", parents=[common], help="fit mixture weights to the target")
    sub.add_parser("simulate", parents=[common], help="write event and count CSVs")
    sub.add_parser("curve", parents=[common], help="write correlation curves per pair")
    v = sub.add_parser("validate", parents=[common], help="run statistical self-checks")
    v.add_argument("--corrupt-weights", action="store_true", help=argparse.SUPPRESS)
    return parser


def _out_dir(args, scen) -> Path:
    out = args.out or Path(scen.out or Path("out") / scen.name)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _calibrate(scen) -> CalibratedModel:
    return calibrate(scen.structures(), scen.target(), scen.horizon, scen.tol)


def _write_calibration(model: CalibratedModel, out: Path) -> None:
    _write_rows(out / "weights.csv", ["structure", "weight"],
                ((str(e), repr(float(w))) for e, w in zip(model.structures, model.weights)))
    pairs = list(combinations(range(model.d), 2))
    _write_rows(out / "extreme_corrs.csv", ["structure", "k", "l", "correlation"],
                ((str(e), k + 1, l + 1, repr(float(C[k, l])))
                 for e, C in zip(model.structures, model.extreme_corrs) for k, l in pairs))
    _write_rows(out / "admissible_ranges.csv", ["k", "l", "c_min", "c_max", "target"],
                ((k + 1, l + 1, repr(float(model.ranges[k, l, 0])),
                  repr(float(model.ranges[k, l, 1])), repr(float(model.target[k, l])))
                 for k, l in pairs))


def cmd_calibrate(args, scen) -> int:
    model = _calibrate(scen)
    out = _out_dir(args, scen)
    _write_calibration(model, out)
    print(f"calibrated {model.d} marginals: {sum(model.weights > 0)} of "
          f"{len(model.weights)} extreme measures active, residual {model.residual():.2e}")
    print(f"wrote {out / 'weights.csv'}")
    return 0


def _simulate(args, scen, model):
    config = SimulationConfig(model, scen.periods, args.paths or scen.paths,
                              scen.seed if args.seed is None else args.seed)
    start = time.perf_counter()
    paths = simulate(config, threads=args.threads)
    elapsed = time.perf_counter() - start
    print(f"simulated {config.paths} paths x {config.periods} periods in {elapsed:.2f}s "
          f"({config.paths / max(elapsed, 1e-9):,.0f} paths/sec)")
    return paths


def cmd_simulate(args, scen) -> int:
    model = _calibrate(scen)
    paths = _simulate(args, scen, model)
    out = _out_dir(args, scen)
    paths.to_csv(out / "events.csv", out / "counts.csv")
    print(f"wrote {out / 'events.csv'} and {out / 'counts.csv'}")
    return 0


def cmd_curve(args, scen) -> int:
    model = _calibrate(scen)
    paths = _simulate(args, scen, model)
    out = _out_dir(args, scen)
    times = scen.time_grid()
    for k, l in combinations(range(model.d), 2):
        curve = correlation_curve(model, paths, (k, l), times)
        target = out / f"curve_{k + 1}_{l + 1}.csv"
        curve.to_csv(target)
        print(f"wrote {target}")
    return 0


def cmd_validate(args, scen) -> int:
    results = run_checks(scen, seed=args.seed, paths=args.paths, threads=args.threads,
                         corrupt_weights=args.corrupt_weights)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VALIDATION if failed else 0


COMMANDS = {"calibrate": cmd_calibrate, "simulate": cmd_simulate,
            "curve": cmd_curve, "validate": cmd_validate}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1 or (args.paths is not None and args.paths < 1):
        print("error: --threads and --paths must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        scen = scenario_io.load(args.scenario)
    except OSError as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except scenario_io.ScenarioError as exc:
        print(f"error: {args.scenario}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, scen)
    except InfeasibleCalibration as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
