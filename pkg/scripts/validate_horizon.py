#!/usr/bin/env python3
"""Empirical validation of the gathering round budget k*7*(nG+1).

Executions get three times the budget; the script reports the worst observed
rounds-to-gather as a fraction of the budget, per strategy. Any execution
exceeding the budget (or failing to gather at all) is a failure.
"""
import argparse
import random
import sys
from collections import defaultdict

sys.path.insert(0, "src")

from robogather import gather2d, model, verify
from robogather.scalars import EXACT, FLOAT64


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=200, help="runs per backend")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--ng-min", type=int, default=3)
    parser.add_argument("--ng-max", type=int, default=8)
    args = parser.parse_args()

    worst = defaultdict(float)
    failures = 0
    master = random.Random(args.seed)
    for backend in (EXACT, FLOAT64):
        for _ in range(args.runs):
            run_seed = master.randrange(2**62)
            rng = random.Random(run_seed)
            n = rng.randint(args.ng_min, args.ng_max)
            kind = rng.choice(["round_robin", "all_active", "random_kfair", "single_mover"])
            strat = verify.make_strategy(kind, n, backend, seed=rng.randrange(2**62))
            conf = verify.gen_initial(n, rng, backend)
            bound = verify.horizon_for(strat.k, n)
            r = gather2d.robogram(backend)
            trace = model.execute(
                r,
                strat,
                conf,
                3 * bound,
                backend,
                stop=lambda c: gather2d.gathering_point(c, backend) is not None,
            )
            got = verify.first_gathered_round(trace, backend)
            if got is None or got > bound:
                failures += 1
                print(f"FAIL seed {run_seed} [{backend.name}/{kind}]: {got} vs budget {bound}")
                continue
            worst[kind] = max(worst[kind], got / bound)
    for kind in sorted(worst):
        print(f"{kind:>14s}: worst rounds-to-gather = {100 * worst[kind]:.1f}% of budget")
    if failures:
        print(f"{failures} executions exceeded the budget")
        return 1
    print("budget holds on every sampled execution")
    return 0


if __name__ == "__main__":
    sys.exit(main())
