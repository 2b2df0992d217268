"""Command-line front-end.

Subcommands: ``price`` a scenario file, ``curve`` a time sweep (optionally a
bundled figure preset) to CSV, and ``validate`` the closed form against the
PDE and Monte Carlo engines.

Exit codes: 0 ok, 2 validation error, 3 unsupported barrier regime,
4 accuracy failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

from .errors import DefbondError, ScenarioError, UnsupportedRegimeError
from .figures import FIGURE_PRESETS
from .montecarlo import SimConfig, simulate_price
from .normal import DEFAULT_QMC
from .pde import GridSpec, sample, solve_endogenous_cascade, solve_exogenous_cascade
from .pricing import PriceReport, price_endogenous, price_exogenous
from .scenario import Scenario, apply_sweep_value, load_scenario

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_UNSUPPORTED_REGIME = 3
EXIT_ACCURACY = 4


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _price_report(scenario: Scenario, t: float | None = None) -> PriceReport:
    when = scenario.evaluation.t if t is None else t
    firm = scenario.firm_value(when)
    if scenario.recovery.mode == "exogenous":
        return price_exogenous(
            scenario.market, scenario.schedule, scenario.recovery, firm, when, DEFAULT_QMC
        )
    return price_endogenous(
        scenario.market, scenario.schedule, scenario.recovery, firm, when, DEFAULT_QMC
    )


def _record(report: PriceReport) -> dict:
    return {
        "price": report.price,
        "relative_price": report.relative_price,
        "survival_prob": report.survival_prob,
        "credit_spread": report.credit_spread,
        "interval_index": report.interval_index,
        "cdf_error": report.diagnostics["cdf_error"],
        "quadrature_error": report.diagnostics["quadrature_error"],
    }


def cmd_price(args) -> int:
    scenario = load_scenario(args.scenario)
    report = _price_report(scenario)
    if args.json:
        print(json.dumps(_record(report), sort_keys=True))
        return EXIT_OK
    print(f"interval_index    {report.interval_index}")
    print(f"price             {_fmt(report.price)}")
    print(f"relative_price    {_fmt(report.relative_price)}")
    if report.survival_prob is not None:
        print(f"survival_prob     {_fmt(report.survival_prob)}")
    print(f"credit_spread     {_fmt(report.credit_spread)}")
    print(f"cdf_error         {report.diagnostics['cdf_error']:.3e}")
    print(f"quadrature_error  {report.diagnostics['quadrature_error']:.3e}")
    return EXIT_OK


def _series_label(parameter: str, value) -> str:
    if isinstance(value, tuple):
        return f"{parameter}=" + "/".join(_fmt(v) for v in value)
    return f"{parameter}={_fmt(value)}"


def curve_rows(scenario: Scenario, parameter: str, values, quantity: str, points: int):
    """Header plus one row per grid time on [0, maturity)."""
    maturity = scenario.schedule.maturity
    ts = [k * maturity / points for k in range(points)]
    clipped = [t for t in ts if t < maturity]
    if len(clipped) < len(ts):
        print("warning: t grid touched maturity; trailing points clipped", file=sys.stderr)
    header = ["t"] + [_series_label(parameter, v) for v in values]
    variants = [apply_sweep_value(scenario, parameter, v) for v in values]
    rows = []
    for t in clipped:
        row = [_fmt(t)]
        for variant in variants:
            report = _price_report(variant, t)
            value = report.price if quantity == "price" else report.credit_spread
            row.append(_fmt(value))
        rows.append(row)
    return header, rows


def cmd_curve(args) -> int:
    scenario = load_scenario(args.scenario)
    figure = args.figure
    if figure is not None and figure != "custom":
        try:
            figure = int(figure)
        except ValueError:
            raise ScenarioError(
                "BAD_SWEEP", f"--figure takes 1..18 or 'custom', got {args.figure!r}"
            ) from None
        if figure not in FIGURE_PRESETS:
            raise ScenarioError("BAD_SWEEP", f"no figure preset {figure}; valid: 1..18")
        preset = FIGURE_PRESETS[figure]
        for parameter, value in preset.base_overrides:
            scenario = apply_sweep_value(scenario, parameter, value)
        parameter, values, quantity = preset.parameter, preset.values, preset.quantity
    else:
        if scenario.sweep is None:
            raise ScenarioError("BAD_SWEEP", "curve needs --figure or a sweep in the scenario")
        parameter, values = scenario.sweep.parameter, scenario.sweep.values
        quantity = args.quantity
    if args.points < 2:
        raise ScenarioError("BAD_VALUE", "--points must be >= 2")

    header, rows = curve_rows(scenario, parameter, values, quantity, args.points)
    if args.out == "-":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    return EXIT_OK


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    market, schedule, recovery = scenario.market, scenario.schedule, scenario.recovery
    times = args.times if args.times else [scenario.evaluation.t]
    if any(not 0.0 <= t < schedule.maturity for t in times):
        raise ScenarioError("BAD_VALUE", f"--times must lie in [0, {schedule.maturity})")
    x_ref = scenario.firm_value() / math.exp(
        -market.r * (schedule.maturity - scenario.evaluation.t)
    )

    grid = GridSpec.auto(
        market, schedule, x_ref, recovery, n_space=args.n_space, n_time_per_interval=args.n_time
    )
    check = args.pde_tol if args.grid_check else None
    if recovery.mode == "exogenous":
        solution = solve_exogenous_cascade(market, schedule, recovery, grid, check_tolerance=check)
    else:
        solution = solve_endogenous_cascade(market, schedule, recovery, grid, check_tolerance=check)

    sim = SimConfig(n_paths=args.paths, seed=args.seed, antithetic=True)
    all_ok = True
    print(f"{'t':>6} {'closed':>14} {'pde':>14} {'|diff|':>10} "
          f"{'mc':>14} {'sigma':>6}  status")
    for t in times:
        df = math.exp(-market.r * (schedule.maturity - t))
        firm = scenario.firm_value(t)  # x-scenarios rescale V, V-scenarios hold it
        report = _price_report(scenario, t)
        closed = report.price
        pde_price = df * sample(solution, firm / df, t)
        mc = simulate_price(market, schedule, recovery, firm, sim, t)

        pde_ok = abs(closed - pde_price) <= args.pde_tol
        mc_tol = max(args.mc_sigmas * mc.std_error, 1e-9)
        mc_ok = abs(closed - mc.price_estimate) <= mc_tol
        sigma_dist = abs(closed - mc.price_estimate) / mc.std_error if mc.std_error > 0 else 0.0
        ok = pde_ok and mc_ok
        all_ok = all_ok and ok
        print(
            f"{t:6.2f} {closed:14.9f} {pde_price:14.9f} {abs(closed - pde_price):10.3e} "
            f"{mc.price_estimate:14.9f} {sigma_dist:6.2f}  {'PASS' if ok else 'FAIL'}"
        )
        if report.survival_prob is not None:
            w_se = math.sqrt(
                max(report.survival_prob * (1 - report.survival_prob), 1e-300) / mc.n_paths
            )
            w_sig = abs(mc.survival_freq - report.survival_prob) / w_se
            print(
                f"{'':6} survival {report.survival_prob:14.9f} vs mc "
                f"{mc.survival_freq:14.9f} ({w_sig:.2f} sigma)"
            )
    if solution.accuracy_warning:
        print(f"warning: {solution.accuracy_warning}", file=sys.stderr)
    print(f"pde tol {args.pde_tol:.1e}, mc tol {args.mc_sigmas:.1f} sigma")
    if all_ok:
        print("VALIDATION PASS")
        return EXIT_OK
    print("VALIDATION FAIL")
    return EXIT_ACCURACY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="defbond",
        description="Defaultable zero-coupon bond pricing with discrete default information",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_price = sub.add_parser("price", help="price one scenario")
    p_price.add_argument("scenario", help="scenario YAML file")
    p_price.add_argument("--json", action="store_true", help="emit a JSON record instead of text")
    p_price.set_defaults(func=cmd_price)

    p_curve = sub.add_parser("curve", help="sweep a parameter over a time grid, emit CSV")
    p_curve.add_argument("scenario")
    p_curve.add_argument(
        "--figure", help="bundled figure preset 1..18, or 'custom' for the file's sweep"
    )
    p_curve.add_argument("--points", type=int, default=121, help="time grid points on [0, T)")
    p_curve.add_argument(
        "--quantity", choices=("price", "spread"), default="price",
        help="series quantity for custom sweeps",
    )
    p_curve.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    p_curve.set_defaults(func=cmd_curve)

    p_val = sub.add_parser("validate", help="closed form vs PDE vs Monte Carlo")
    p_val.add_argument("scenario")
    p_val.add_argument("--n-space", type=int, default=2048)
    p_val.add_argument("--n-time", type=int, default=2048)
    p_val.add_argument("--paths", type=int, default=200_000)
    p_val.add_argument("--seed", type=int, default=0)
    p_val.add_argument("--pde-tol", type=float, default=1e-3)
    p_val.add_argument("--mc-sigmas", type=float, default=3.0)
    p_val.add_argument(
        "--times", type=float, nargs="+",
        help="probe times (default: the scenario's evaluation time)",
    )
    p_val.add_argument(
        "--grid-check", action="store_true",
        help="re-solve on a coarser grid and surface a Richardson accuracy warning",
    )
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnsupportedRegimeError as exc:
        print(f"error UNSUPPORTED_REGIME: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED_REGIME
    except ScenarioError as exc:
        print(f"error {exc.code}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DefbondError as exc:
        print(f"error BAD_VALUE: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
