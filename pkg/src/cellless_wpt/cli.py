"""Command-line interface.

Exit codes: 0 success, 1 validation or assertion failure, 2 usage or
scenario parse error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import FeasibilityError, ScenarioError
from .smallcell import HARVEST_MODES
from .sweep import (
    MODES,
    SweepSpec,
    compare_csv,
    run_compare,
    run_once,
    run_sweep,
    run_validation,
)
from .topology import default_scenario_path


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wpt",
        description="Cell-less RF wireless power transfer network simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one seeded realization and write metrics")
    run.add_argument("--scenario", default=None, help="scenario JSON (default: packaged example)")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--mode", choices=MODES, default="cellless")
    run.add_argument("--smallcell-mode", choices=HARVEST_MODES, default="physical")
    run.add_argument("--out", required=True, help="output directory")

    sweep = sub.add_parser("sweep", help="Monte Carlo sweep over powers and antenna counts")
    sweep.add_argument("--scenario", default=None)
    sweep.add_argument("--powers", type=_float_list, required=True, help="dBm values, comma separated")
    sweep.add_argument("--antennas", type=_int_list, required=True, help="antenna counts, comma separated")
    sweep.add_argument("--trials", type=int, default=100)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--modes", default="cellless,smallcell", help="comma separated subset of cellless,smallcell")
    sweep.add_argument("--out", required=True)

    validate = sub.add_parser("validate", help="optimality/feasibility checks on random instances")
    validate.add_argument("--scenario", default=None)
    validate.add_argument("--instances", type=int, default=20)
    validate.add_argument("--seed", type=int, default=0)
    validate.add_argument(
        "--self-test",
        action="store_true",
        help="inject a corrupted beamformer and confirm the feasibility check trips",
    )

    compare = sub.add_parser("compare", help="paired cell-less vs small-cell trials with gap columns")
    compare.add_argument("--scenario", default=None)
    compare.add_argument("--seed", type=int, default=0)
    compare.add_argument("--trials", type=int, default=100)
    compare.add_argument("--out", required=True)
    return parser


def _scenario(arg: str | None) -> Path:
    return Path(arg) if arg is not None else default_scenario_path()


def _cmd_run(args) -> int:
    report = run_once(_scenario(args.scenario), args.seed, args.mode, args.smallcell_mode)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.csv").write_text(report.to_csv(), encoding="utf-8", newline="\n")
    (out / "summary.txt").write_text(report.summary(), encoding="utf-8", newline="\n")
    print(report.summary(), end="")
    return 0


def _cmd_sweep(args) -> int:
    modes = tuple(m for m in args.modes.split(",") if m)
    spec = SweepSpec(
        power_dbm_values=tuple(args.powers),
        antenna_counts=tuple(args.antennas),
        trials=args.trials,
        base_seed=args.seed,
        modes=modes,
    )
    result = run_sweep(_scenario(args.scenario), spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep_rows.csv").write_text(result.rows_csv(), encoding="utf-8", newline="\n")
    (out / "sweep_summary.csv").write_text(result.summary_csv(), encoding="utf-8", newline="\n")
    print(f"wrote {len(result.rows)} rows to {out / 'sweep_rows.csv'}")
    return 0


def _cmd_validate(args) -> int:
    report = run_validation(
        args.scenario if args.scenario is None else Path(args.scenario),
        args.instances,
        args.seed,
        self_test=args.self_test,
    )
    for line in report.lines:
        print(line)
    if report.failures:
        for failure in report.failures:
            print(f"FAIL: {failure}", file=sys.stderr)
        return 1
    print(f"all {report.checks} checks passed over {report.instances} instances")
    return 0


def _cmd_compare(args) -> int:
    rows = run_compare(_scenario(args.scenario), args.seed, args.trials)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "compare.csv").write_text(compare_csv(rows), encoding="utf-8", newline="\n")
    wins = sum(r.gap_mw >= 0.0 for r in rows)
    mean_gap = sum(r.gap_mw for r in rows) / len(rows)
    print(f"cell-less >= small-cell in {wins}/{len(rows)} trials, mean gap {mean_gap:.6g} mW")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "validate": _cmd_validate,
    "compare": _cmd_compare,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"invalid arguments: {exc}", file=sys.stderr)
        return 2
    except FeasibilityError as exc:
        print(f"feasibility failure: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
