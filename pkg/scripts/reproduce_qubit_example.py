"""Rotated-qubit example: dynamic distance, curve length and two Bures values over a range of angles.

    python scripts/reproduce_qubit_example.py --p1 0.7 --eps 0.05 0.1 0.3 0.8
"""

import argparse
import csv
import sys
import time

from isodist.bures import QubitExample, bures_distance, qubit_example
from isodist.dynamics import curve_length
from isodist.geodesics import OptimizerConfig, dynamic_distance


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p1", type=float, default=0.7)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.2])
    ap.add_argument("--n-max", type=int, default=256)
    ap.add_argument("--n-starts", type=int, default=8)
    args = ap.parse_args(argv)

    cfg = OptimizerConfig(n_max=args.n_max, n_starts=args.n_starts)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["eps", "D_optimizer", "L_curve", "D_B_fidelity", "D_B_closed_form", "D_minus_eps", "seconds"])
    for eps in args.eps:
        res = qubit_example(QubitExample(args.p1, 1 - args.p1, eps), args.n_max)
        t0 = time.perf_counter()
        d, _ = dynamic_distance(res.rho0, res.rho1, cfg)
        elapsed = time.perf_counter() - t0
        out.writerow([eps, f"{d:.10f}", f"{curve_length(res.curve):.10f}", f"{bures_distance(res.rho0, res.rho1):.10f}",
                      f"{res.d_bures_closed_form:.10f}", f"{d - eps:.3e}", f"{elapsed:.2f}"])


if __name__ == "__main__":
    main()
