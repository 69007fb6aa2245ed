"""Momentum-map drift for case A as a function of the adaptive tolerance."""
import argparse
import time
from dataclasses import replace

from qcosym import fastslow as fs
from qcosym.config import builtin_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t-max", type=float, default=200.0)
    ap.add_argument("--rtols", type=float, nargs="+", default=[1e-6, 1e-7, 1e-8, 1e-9, 1e-10])
    args = ap.parse_args()

    base = builtin_scenario("case-a")
    print(f"{'rtol':>8} {'steps':>7} {'J drift':>10} {'H drift':>10} {'seconds':>8}")
    for rtol in args.rtols:
        integ = replace(base.integrator, rtol=rtol, atol=rtol * 1e-3)
        cfg = replace(base, t_max=args.t_max, integrator=integ)
        start = time.perf_counter()
        traj, diag = fs.run_scenario(cfg)
        elapsed = time.perf_counter() - start
        print(f"{rtol:8.0e} {traj.n_steps:7d} {diag.J_rel_drift:10.2e} {diag.H_rel_drift:10.2e} {elapsed:8.2f}")


if __name__ == "__main__":
    main()
