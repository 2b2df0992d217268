#!/usr/bin/env python3
"""Three-way validation of the closed forms on the bundled base scenarios.

For each scenario and probe time, prints the closed-form price next to the
PDE-cascade and Monte Carlo values with their distances.
"""

from __future__ import annotations

import argparse
import math
from pathlib import Path

import defbond as db
from defbond.scenario import load_scenario

ROOT = Path(__file__).resolve().parent.parent

SCENARIOS = (
    "base_exogenous.yaml",
    "base_endogenous_low_barrier.yaml",
    "base_endogenous_high_barrier.yaml",
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-space", type=int, default=2048)
    parser.add_argument("--n-time", type=int, default=2048)
    parser.add_argument("--paths", type=int, default=1_000_000)
    parser.add_argument("--seed", type=int, default=20240311)
    parser.add_argument("--times", type=float, nargs="+", default=[0.0, 1.5, 3.0, 4.5])
    args = parser.parse_args()

    worst_pde = 0.0
    worst_mc = 0.0
    for name in SCENARIOS:
        scn = load_scenario(ROOT / "scenarios" / name)
        market, schedule, recovery = scn.market, scn.schedule, scn.recovery
        grid = db.GridSpec.auto(
            market, schedule, scn.evaluation.x, recovery,
            n_space=args.n_space, n_time_per_interval=args.n_time,
        )
        if recovery.mode == "exogenous":
            solution = db.solve_exogenous_cascade(market, schedule, recovery, grid)
            price = db.price_exogenous
        else:
            solution = db.solve_endogenous_cascade(market, schedule, recovery, grid)
            price = db.price_endogenous
        print(f"\n=== {name} ===")
        print(f"{'t':>5} {'closed':>12} {'pde':>12} {'|diff|':>10} {'mc':>12} {'sigma':>7}")
        for t in args.times:
            df = math.exp(-market.r * (schedule.maturity - t))
            V = scn.evaluation.x * df
            closed = price(market, schedule, recovery, V, t).price
            pde_c = df * db.sample(solution, scn.evaluation.x, t)
            mc = db.simulate_price(
                market, schedule, recovery, V, db.SimConfig(n_paths=args.paths, seed=args.seed), t
            )
            z = abs(closed - mc.price_estimate) / mc.std_error if mc.std_error else 0.0
            worst_pde = max(worst_pde, abs(closed - pde_c))
            worst_mc = max(worst_mc, z)
            print(
                f"{t:5.2f} {closed:12.8f} {pde_c:12.8f} {abs(closed - pde_c):10.2e} "
                f"{mc.price_estimate:12.8f} {z:7.2f}"
            )
    print(f"\nworst |closed - pde| = {worst_pde:.3e}, worst mc distance = {worst_mc:.2f} sigma")
    return 0 if (worst_pde <= 1e-3 and worst_mc <= 3.0) else 4


if __name__ == "__main__":
    raise SystemExit(main())
