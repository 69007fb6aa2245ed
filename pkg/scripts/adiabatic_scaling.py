"""Drift of the fast action over t in [0, 1/eps] for a ladder of eps values.

Prints the drift, its ratio to the next smaller eps and a least-squares
exponent in drift ~ eps^k.
"""
import argparse

import numpy as np

from qcosym import fastslow as fs
from qcosym.flow import IntegratorConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025, 0.0125])
    ap.add_argument("--rtol", type=float, default=1e-9)
    args = ap.parse_args()

    drifts = []
    for eps in args.eps:
        horizon = 1.0 / eps
        cfg = fs.ScenarioConfig(case="case-b", eps=eps, t_max=horizon,
                                integrator=IntegratorConfig(t_max=horizon, rtol=args.rtol, record_every=1))
        drifts.append(fs.run_scenario(cfg)[1].adiabatic_drift)
    print(f"{'eps':>8} {'max |I - I0|':>13} {'ratio':>7}")
    for i, (eps, d) in enumerate(zip(args.eps, drifts)):
        ratio = f"{d / drifts[i + 1]:7.3f}" if i + 1 < len(drifts) else ""
        print(f"{eps:8.4f} {d:13.4e} {ratio}")
    k = np.polyfit(np.log(args.eps), np.log(drifts), 1)[0]
    print(f"fitted exponent: {k:.3f}")


if __name__ == "__main__":
    main()
