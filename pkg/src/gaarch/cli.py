"""
Command-line interface.

Exit codes: 0 success, 1 input or parameter error, 2 the optimizer did not
converge (the fit file is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gaarch import __version__
from gaarch.data import load_csv, load_fit, load_params, save_csv, save_fit
from gaarch.estimate import NESTED_MODELS, RESTRICTION_DF, FitConfig, FitResult, fit, lrt
from gaarch.exceptions import GaarchError
from gaarch.model import attribute, simulate
from gaarch.skewt import NU_CAP

COLUMNS = (
    "alpha_risk_adj",
    "alpha_true",
    "gamma_comp",
    "sigma0",
    "eta_minus",
    "eta_plus",
    "beta",
    "nu_minus",
    "nu_plus",
)
HEADERS = ("a_hat", "alpha", "Gamma", "sigma0", "eta-", "eta+", "beta", "nu-", "nu+")


@dataclass(frozen=True)
class ReportRow:
    """One table row: annualized % returns/volatility, raw coefficients and tails."""

    label: str
    alpha_risk_adj: float
    alpha_true: float
    gamma_comp: float
    sigma0: float
    eta_minus: float
    eta_plus: float
    beta: float
    nu_minus: float
    nu_plus: float
    boundary: tuple[str, ...] = ()

    @classmethod
    def from_fit(cls, result: FitResult) -> "ReportRow":
        att = attribute(result.params)
        p = result.params
        return cls(
            label=result.label,
            alpha_risk_adj=att.alpha_risk_adj,
            alpha_true=att.alpha_true,
            gamma_comp=att.gamma_comp,
            sigma0=att.sigma0,
            eta_minus=p.eta_minus,
            eta_plus=p.eta_plus,
            beta=p.beta,
            nu_minus=p.tails.nu_minus,
            nu_plus=p.tails.nu_plus,
            boundary=tuple(k for k, v in result.boundary_flags.items() if v),
        )

    def cells(self) -> list[str]:
        # a_hat is shown as the sum of the rounded parts so the row adds up
        alpha = round(self.alpha_true, 2)
        conv = round(self.gamma_comp, 2)
        out = [_fmt(alpha + conv), _fmt(alpha), _fmt(conv), _fmt(self.sigma0)]
        for key in ("eta_minus", "eta_plus", "beta"):
            value = getattr(self, key)
            out.append("." if key in self.boundary and value == 0.0 else _fmt(value))
        for key in ("nu_minus", "nu_plus"):
            value = getattr(self, key)
            out.append("200." if value >= NU_CAP else _fmt(value))
        return out


def _fmt(value: float) -> str:
    text = f"{value:.2f}"
    if text == "-0.00":
        text = "0.00"
    if text.startswith("0."):
        return text[1:]
    if text.startswith("-0."):
        return "-" + text[2:]
    return text


def render_table(rows: list[ReportRow]) -> str:
    width = max([len("Index")] + [len(r.label) for r in rows])
    lines = ["Index".ljust(width) + "".join(h.rjust(9) for h in HEADERS)]
    for row in rows:
        lines.append(row.label.ljust(width) + "".join(c.rjust(9) for c in row.cells()))
    return "\n".join(lines) + "\n"


def render_csv(rows: list[ReportRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("label",) + COLUMNS)
    for row in rows:
        writer.writerow([row.label] + [repr(float(getattr(row, c))) for c in COLUMNS])
    return buf.getvalue()


# --------------------------------------------------------------------------
# commands


def _load_series(args):
    return load_csv(
        args.csv_path,
        date_column=args.date_col,
        value_column=args.value_col,
        percent=args.percent,
        label=getattr(args, "label", None),
    )


def cmd_fit(args) -> int:
    series = _load_series(args)
    config = FitConfig(
        n_multistarts=args.multistarts,
        nested_model=args.nested,
        seed=args.seed,
        se_method=args.se_method,
    )
    result = fit(series, config)
    out = Path(args.out) if args.out else Path(args.csv_path).with_suffix(".fit.json")
    save_fit(result, out)
    sys.stdout.write(render_table([ReportRow.from_fit(result)]))
    if not result.converged:
        print(f"warning: optimizer did not converge; result written to {out}", file=sys.stderr)
        return 2
    return 0


def cmd_simulate(args) -> int:
    params = load_params(args.params_path)
    series, _ = simulate(params, args.n, np.random.default_rng(args.seed), start=args.start)
    if args.out:
        save_csv(series, args.out)
    else:
        sys.stdout.write("date,ret\n")
        for d, r in zip(series.dates, series.returns):
            sys.stdout.write(f"{d},{float(r)!r}\n")
    return 0


def cmd_lrt(args) -> int:
    series = _load_series(args)
    config = FitConfig(n_multistarts=args.multistarts, seed=args.seed)
    res = lrt(series, args.restriction, config)
    print(f"restriction  {res.restriction}")
    print(f"loglik_full  {res.loglik_full:.6f}")
    print(f"loglik_restr {res.loglik_restricted:.6f}")
    print(f"statistic    {res.statistic:.6f}")
    print(f"df           {res.df}")
    print(f"p_value      {res.p_value:.6g}")
    return 0


def cmd_report(args) -> int:
    rows = []
    for path in args.fit_files:
        try:
            rows.append(ReportRow.from_fit(load_fit(path)))
        except (OSError, GaarchError, ValueError) as exc:
            print(f"error: cannot read fit file {path}: {exc}", file=sys.stderr)
            return 1
    sys.stdout.write(render_table(rows))
    if args.csv:
        Path(args.csv).write_text(render_csv(rows), encoding="utf-8")
    return 0


def cmd_attribute(args) -> int:
    params = load_params(args.params_path)
    att = attribute(params, args.periods_per_year)
    print(f"alpha_risk_adj {att.alpha_risk_adj:.4f}")
    print(f"alpha_true     {att.alpha_true:.4f}")
    print(f"gamma_comp     {att.gamma_comp:.4f}")
    print(f"sigma0         {att.sigma0:.4f}")
    print(f"gamma_monthly  {att.gamma_raw:.6g}")
    print(f"persistence    {params.persistence:.6f}")
    return 0


def _add_series_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("csv_path", help="CSV file with a header row")
    p.add_argument("--percent", action="store_true", help="values are in percent")
    p.add_argument("--date-col", default="date")
    p.add_argument("--value-col", default=None, help="defaults to first non-date column")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--multistarts", type=int, default=5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaarch", description=__doc__.splitlines()[1])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="estimate the model from a return CSV")
    _add_series_args(p)
    p.add_argument("--nested", choices=NESTED_MODELS, default="full")
    p.add_argument("--se-method", choices=("hessian", "bootstrap"), default="hessian")
    p.add_argument("--label", default=None)
    p.add_argument("--out", default=None, help="fit file (default: <csv>.fit.json)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="simulate returns from a parameter file")
    p.add_argument("params_path")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--start", default="2000-01")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "lrt", aliases=["test"], help="likelihood-ratio test of a nested restriction"
    )
    _add_series_args(p)
    p.add_argument("--restriction", choices=tuple(RESTRICTION_DF), required=True)
    p.set_defaults(func=cmd_lrt)

    p = sub.add_parser("report", help="tabulate fit files")
    p.add_argument("fit_files", nargs="+")
    p.add_argument("--csv", default=None, help="also write a machine-readable CSV")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("attribute", help="annualized attribution of a parameter file")
    p.add_argument("params_path")
    p.add_argument("--periods-per-year", type=int, default=12)
    p.set_defaults(func=cmd_attribute)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GaarchError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
