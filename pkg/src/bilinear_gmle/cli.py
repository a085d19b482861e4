"""Command-line interface.

Every subcommand that writes a file also writes ``<output>.manifest.json``
holding the resolved options, the package version and the argv needed to
reproduce the output with ``bilinear-gmle rerun <manifest>``.

Exit codes: 0 success (for ``test``: H0 not rejected), 1 ``test`` rejected
H0, 2 invalid input, 3 non-stationary parameters, 4 singular design or
covariance.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidLength, NonStationaryParams, SingularDesign, SingularSigma, ZeroDenominator
from .estimation import confidence_intervals, fit_gmle
from .inference import boundary_interval, test_b_zero
from .likelihood import ParamSpace
from .model import ErrorLaw, ModelParams, read_series_csv, region_reports, simulate, write_series_csv
from .montecarlo import ExperimentSpec, run_experiment, table1_spec, table2_spec, table3_spec, write_summaries

EXIT_OK, EXIT_REJECT, EXIT_INVALID, EXIT_NONSTATIONARY, EXIT_SINGULAR = 0, 1, 2, 3, 4

PRESETS = {
    "table1": (table1_spec, 300, 1000),
    "table2": (table2_spec, 300, 1000),
    "table3": (table3_spec, 2000, 10000),
}


def _law(args) -> ErrorLaw:
    return ErrorLaw(args.law, args.df if args.law == "student_t" else None)


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _write_manifest(output: str | None, args, argv: list[str]) -> None:
    if output is None or output == "-":
        return
    resolved = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "package": "bilinear_gmle",
        "version": __version__,
        "command": args.command,
        "seed": resolved.get("seed"),
        "resolved": resolved,
        "argv": argv,
    }
    Path(str(output) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _add_law_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--law", choices=("gaussian", "student_t", "uniform"), default="gaussian")
    p.add_argument("--df", type=float, default=8.0, help="degrees of freedom for student_t (> 4)")


def cmd_simulate(args) -> int:
    params = ModelParams(args.mu, args.phi, args.sigma2, args.b)
    data = simulate(params, _law(args), args.n, args.burn_in, args.seed, force=args.force)
    if args.output in (None, "-"):
        sys.stdout.write("y\n" + "".join(f"{v:.17g}\n" for v in data.values))
    else:
        write_series_csv(args.output, data)
    return EXIT_OK


def _space(args) -> ParamSpace:
    return ParamSpace.boundary() if args.mode == "boundary" else ParamSpace()


def cmd_estimate(args) -> int:
    data = read_series_csv(args.input)
    result = fit_gmle(data, _space(args), args.tol)
    out = result.to_dict()
    if result.at_boundary:
        intervals = boundary_interval(result, level=args.level, draws=args.draws, seed=args.seed)
        out["interval_method"] = "boundary_limit"
    else:
        intervals = confidence_intervals(result, level=args.level)
        out["interval_method"] = "wald"
    out["level"] = args.level
    out["confidence_intervals"] = [{"parameter": k, "lo": lo, "hi": hi} for k, lo, hi in intervals]
    _write_text(args.output, json.dumps(out, indent=2) + "\n")
    return EXIT_OK


def cmd_test(args) -> int:
    data = read_series_csv(args.input)
    result = test_b_zero(data, args.level, restricted=args.restricted)
    _write_text(args.output, json.dumps(result.to_dict(), indent=2) + "\n")
    return EXIT_REJECT if result.reject else EXIT_OK


def cmd_montecarlo(args) -> int:
    if (args.config is None) == (args.preset is None):
        raise ValueError("give exactly one of --config or --preset")
    if args.config is not None:
        spec = ExperimentSpec.from_json(args.config)
    else:
        build, desk, full = PRESETS[args.preset]
        reps = args.replications or (full if args.full_scale else desk)
        spec = build(replications=reps) if args.master_seed is None else build(reps, args.master_seed)
    summaries = run_experiment(spec, workers=args.workers)
    write_summaries(args.output, spec, summaries)
    if args.spec_out:
        Path(args.spec_out).write_text(json.dumps(spec.to_dict(), indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_region(args) -> int:
    phi = np.linspace(args.phi_min, args.phi_max, args.phi_num)
    b = np.linspace(args.b_min, args.b_max, args.b_num)
    reports = region_reports(_law(args), phi, b, args.sigma2)
    records = [r.to_record() for row in reports for r in row]
    if args.format == "json":
        text = json.dumps(records, indent=1) + "\n"
    else:
        lines = ["phi,b,gamma,std_error,stationary"]
        for r in records:
            gamma = "-inf" if r["gamma"] is None else f"{r['gamma']:.17g}"
            lines.append(f"{r['phi']:.17g},{r['b']:.17g},{gamma},{r['std_error']:.17g},{str(r['stationary']).lower()}")
        text = "\n".join(lines) + "\n"
    _write_text(args.output, text)
    return EXIT_OK


def cmd_rerun(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    return main(manifest["argv"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bilinear-gmle",
        description="Simulate, estimate and test Y_t = mu + phi Y_{t-2} + b Y_{t-2} eps_{t-1} + eps_t.",
        epilog="Exit codes: 0 ok, 1 test rejected H0, 2 invalid input, 3 non-stationary parameters, 4 singular data.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a stationary path to CSV")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--burn-in", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force", action="store_true", help="simulate even if E ln|phi + b eps| >= 0")
    _add_law_options(p)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="fit the quasi-likelihood estimator to a CSV series")
    p.add_argument("input")
    p.add_argument("--mode", choices=("interior", "boundary"), default="interior",
                   help="interior: b2 >= 1e-8; boundary: b2 >= 0")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--draws", type=int, default=100_000, help="limit-law draws for boundary intervals")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("test", help="test H0: b = 0 (exit 1 when H0 is rejected, 0 otherwise)")
    p.add_argument("input")
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--restricted", action="store_true", help="refit (mu, phi, sigma2) with b2 = 0 for sigma44")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("montecarlo", help="run a replication experiment and write a summary CSV")
    p.add_argument("--config", default=None, help="JSON experiment spec")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--full-scale", action="store_true", help="use 1000 / 10000 replications")
    p.add_argument("--master-seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--spec-out", default=None, help="write the resolved spec JSON here")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("region", help="tabulate E ln|phi + b eps| over a (phi, b) grid")
    p.add_argument("--phi-min", type=float, default=-2.0)
    p.add_argument("--phi-max", type=float, default=2.0)
    p.add_argument("--phi-num", type=int, default=81)
    p.add_argument("--b-min", type=float, default=-3.0)
    p.add_argument("--b-max", type=float, default=3.0)
    p.add_argument("--b-num", type=int, default=121)
    p.add_argument("--sigma2", type=float, default=1.0)
    _add_law_options(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("rerun", help="re-execute the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_rerun)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except NonStationaryParams as exc:
        print(f"error: non-stationary parameters: {exc}", file=sys.stderr)
        return EXIT_NONSTATIONARY
    except (SingularDesign, SingularSigma, ZeroDenominator) as exc:
        print(f"error: degenerate data: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (InvalidLength, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.command != "rerun":
        _write_manifest(getattr(args, "output", None), args, argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
