"""Command-line surface: ``fit``, ``predict``, ``simulate``, ``plot``.

Every subcommand is deterministic given its flags (seeds are explicit) and
fails with a single machine-parseable line on stderr::

    error: <Code>: <message>

Exit codes: 0 success, 2 validation, 3 numeric failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import dataio
from .divergences import kl
from .errors import EsovregError, NumericError, ValidationError, ZeroPart
from .evalsim import SimConfig, kl_density_summary, run_comparison
from .models import ModelKind, fit, inverse_link
from .zeros import DEFAULT_DELTA_FRACTION, ZeroPolicy, replace_zeros
from .compositions import CompositionalDataset

GRID_SAMPLE_SIZES = (25, 50, 75, 100)
GRID_COMPONENTS = (6, 11, 16)
#: components that carry injected zeros for each grid D
GRID_ZERO_COUNTS = {6: 2, 11: 4, 16: 6}


def _parts_list(text: str) -> list[str]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if len(parts) < 2:
        raise argparse.ArgumentTypeError("--parts needs at least two column names")
    return parts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esovreg",
        description="Divergence-based regression for compositional data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a regression model to a CSV dataset")
    p_fit.add_argument("--input", required=True, help="input CSV with header row")
    p_fit.add_argument("--parts", required=True, type=_parts_list,
                       help="comma-separated response part columns")
    p_fit.add_argument("--model", default="esov",
                       help="esov | aitchison | kl | ols | wjs:LAMBDA | jeffreys")
    p_fit.add_argument("--zero-replace", choices=["multiplicative"], default=None,
                       help="impute zero parts before fitting")
    p_fit.add_argument("--delta-fraction", type=float, default=DEFAULT_DELTA_FRACTION,
                       help="fraction of the column minimum used as the imputed value")
    p_fit.add_argument("--multistart", type=int, default=0,
                       help="extra random optimizer starts (default: single "
                            "deterministic start)")
    p_fit.add_argument("--seed", type=int, default=0,
                       help="seed for --multistart draws")
    p_fit.add_argument("--out", default=None, help="write the fit as JSON here")
    p_fit.set_defaults(func=cmd_fit)

    p_pred = sub.add_parser("predict", help="predict compositions for new covariates")
    p_pred.add_argument("--fit", required=True, help="fit JSON from `esovreg fit`")
    p_pred.add_argument("--input", required=True,
                        help="CSV with the fit's covariate columns")
    p_pred.add_argument("--out", required=True, help="output CSV of predicted parts")
    p_pred.set_defaults(func=cmd_predict)

    p_sim = sub.add_parser("simulate",
                           help="Monte-Carlo comparison of ES-OV vs the baseline")
    p_sim.add_argument("--n", type=int, default=None, help="sample size")
    p_sim.add_argument("--D", type=int, default=None, help="number of components")
    p_sim.add_argument("--p", type=int, default=2, help="number of covariates")
    p_sim.add_argument("--reps", type=int, default=200, help="replications")
    p_sim.add_argument("--seed", type=int, default=0, help="master seed")
    p_sim.add_argument("--inject-zeros", type=int, default=None, metavar="K",
                       help="inject zeros into the last K components")
    p_sim.add_argument("--zero-prob", type=float, default=0.5,
                       help="per-entry zeroing probability")
    p_sim.add_argument("--grid", action="store_true",
                       help="run the full n x D benchmark grid")
    p_sim.add_argument("--zeros", action="store_true",
                       help="with --grid: inject zeros (2/4/6 components for "
                            "D=6/11/16)")
    p_sim.add_argument("--workers", type=int, default=1,
                       help="parallel replication workers (results unchanged)")
    p_sim.add_argument("--out", default=None, help="write report JSON here "
                       "(a CSV of per-replication scores lands next to it)")
    p_sim.add_argument("--svg", default=None,
                       help="render score density curves to this SVG")
    p_sim.set_defaults(func=cmd_simulate)

    p_plot = sub.add_parser("plot", help="render a ternary diagram or "
                                         "per-component panels")
    p_plot.add_argument("--input", required=True, help="input CSV with header row")
    p_plot.add_argument("--parts", required=True, type=_parts_list,
                        help="comma-separated response part columns")
    p_plot.add_argument("--fit", default=None,
                        help="fit JSON; draws fitted values and, with one "
                             "covariate, a fitted curve")
    p_plot.add_argument("--per-component", action="store_true",
                        help="covariate-vs-share panels (required when D != 3)")
    p_plot.add_argument("--svg", required=True, help="output SVG path")
    p_plot.set_defaults(func=cmd_plot)

    return parser


def cmd_fit(args) -> int:
    model = ModelKind.parse(args.model)
    data = dataio.read_dataset(args.input, args.parts)
    observed = data.responses
    if args.zero_replace == "multiplicative" and data.has_zeros():
        policy = ZeroPolicy.multiplicative(args.delta_fraction)
        data = CompositionalDataset(
            replace_zeros(data.responses, policy), data.design,
            part_names=data.part_names, covariate_names=data.covariate_names,
        )
    try:
        if model.tag == "aitchison":
            result = fit(data, model)
        else:
            result = fit(data, model, multistart=args.multistart, seed=args.seed)
    except ZeroPart as exc:
        if args.zero_replace is None:
            raise ZeroPart(f"{exc}; pass --zero-replace multiplicative to "
                           f"impute zeros before fitting") from exc
        raise
    mean_kl = float(np.sum(kl(observed, result.fitted))) / data.n
    if args.out:
        dataio.write_fit_json(args.out, result)
    print(f"objective: {result.objective:.10g}")
    print(f"mean-kl: {mean_kl:.10g}")
    return 0


def cmd_predict(args) -> int:
    doc = dataio.read_fit_json(args.fit)
    design = dataio.read_covariates(args.input, doc["covariates"])
    preds = inverse_link(doc["coefficients"], design)
    dataio.write_predictions(args.out, np.atleast_2d(preds), doc["parts"])
    print(f"wrote {np.atleast_2d(preds).shape[0]} predictions to {args.out}")
    return 0


def _csv_sibling(json_path: str) -> Path:
    p = Path(json_path)
    return p.with_suffix(".csv") if p.suffix else p.with_name(p.name + ".csv")


def _single_config(args) -> SimConfig:
    if args.n is None or args.D is None:
        raise ValidationError("simulate needs --n and --D (or --grid)")
    injection = None
    if args.inject_zeros is not None:
        injection = (args.inject_zeros, args.zero_prob)
    return SimConfig(n=args.n, D=args.D, p=args.p, replications=args.reps,
                     zero_injection=injection, seed=args.seed)


def cmd_simulate(args) -> int:
    from . import plotting  # deferred: matplotlib is slow to import

    if args.grid:
        reports = []
        for D in GRID_COMPONENTS:
            for n in GRID_SAMPLE_SIZES:
                injection = (GRID_ZERO_COUNTS[D], args.zero_prob) if args.zeros else None
                cfg = SimConfig(n=n, D=D, p=args.p, replications=args.reps,
                                zero_injection=injection, seed=args.seed)
                reports.append(run_comparison(cfg, workers=args.workers))
        _print_grid_table(reports, zeros=args.zeros)
        if args.out:
            dataio.write_report_json(args.out, reports)
            dataio.write_report_csv(_csv_sibling(args.out), reports)
        if args.svg:
            cells = [(r.config.n, r.config.D, kl_density_summary(r))
                     for r in reports]
            plotting.save_figure(
                plotting.density_grid_figure(cells), args.svg)
        return 0

    report = run_comparison(_single_config(args), workers=args.workers)
    print(f"win-proportion: {report.win_proportion:.4g}")
    print(f"mean-kl esov: {report.mean_scores['esov']:.6g}  "
          f"aitchison: {report.mean_scores['aitchison']:.6g}  "
          f"failed: {report.n_failed}")
    if args.out:
        dataio.write_report_json(args.out, report)
        dataio.write_report_csv(_csv_sibling(args.out), report)
    if args.svg:
        plotting.save_figure(plotting.density_figure(kl_density_summary(report)),
                             args.svg)
    return 0


def _print_grid_table(reports, zeros: bool) -> None:
    title = "with zero values" if zeros else "no zero values"
    print(f"Win proportion of ES-OV over Aitchison (LOOCV KL), data {title}")
    by_cell = {(r.config.n, r.config.D): r.win_proportion for r in reports}
    header = "n".rjust(6) + "".join(f"D={D}".rjust(9) for D in GRID_COMPONENTS)
    print(header)
    for n in GRID_SAMPLE_SIZES:
        row = f"{n}".rjust(6)
        for D in GRID_COMPONENTS:
            row += f"{by_cell[(n, D)]:.3f}".rjust(9)
        print(row)


def cmd_plot(args) -> int:
    from . import plotting  # deferred: matplotlib is slow to import

    data = dataio.read_dataset(args.input, args.parts)
    fitted = None
    curve = None
    if args.fit:
        doc = dataio.read_fit_json(args.fit)
        if list(doc["covariates"]) != list(data.covariate_names):
            raise ValidationError(
                f"fit covariates {doc['covariates']} do not match dataset "
                f"covariates {list(data.covariate_names)}"
            )
        fitted = inverse_link(doc["coefficients"], data.design)
        if data.n_covariates == 1:
            x = data.design[:, 1]
            grid = np.linspace(x.min(), x.max(), 200)
            gdesign = np.column_stack([np.ones(grid.size), grid])
            curve = inverse_link(doc["coefficients"], gdesign)

    if args.per_component:
        fig = plotting.component_panels(data, fitted)
    else:
        fig = plotting.ternary_figure(data.responses, labels=data.part_names,
                                      curve=curve)
    plotting.save_figure(fig, args.svg)
    print(f"wrote {args.svg}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        return _fail(exc, 2)
    except NumericError as exc:
        return _fail(exc, 3)
    except EsovregError as exc:
        return _fail(exc, 3)
    except OSError as exc:
        return _fail(exc, 4)


def _fail(exc: BaseException, code: int) -> int:
    message = " ".join(str(exc).split())
    print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
