"""Map the strict-stationarity region E ln|phi + b eps| < 0 over a (b, phi) grid.

Writes a CSV (phi, b, gamma, std_error, stationary) and prints a coarse
character map: '#' stationary, '.' not.

    python scripts/stationarity_region.py --law gaussian -o region.csv
    python scripts/stationarity_region.py --law student_t --df 6
"""
from __future__ import annotations

import argparse
import math

import numpy as np

from bilinear_gmle.model import ErrorLaw, ModelParams, region_reports, stationarity_gamma


def critical_b(law: ErrorLaw, phi: float = 0.0, lo: float = 1e-3, hi: float = 10.0) -> float:
    """Bisection for the |b| where gamma crosses zero at fixed phi."""
    g = lambda b: stationarity_gamma(ModelParams(0.0, phi, 1.0, b), law).gamma
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if g(mid) < 0 else (lo, mid)
    return 0.5 * (lo + hi)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--law", choices=("gaussian", "student_t", "uniform"), default="gaussian")
    ap.add_argument("--df", type=float, default=6.0)
    ap.add_argument("--phi-num", type=int, default=41)
    ap.add_argument("--b-num", type=int, default=61)
    ap.add_argument("-o", "--output", default="region.csv")
    args = ap.parse_args()

    law = ErrorLaw(args.law, args.df if args.law == "student_t" else None)
    phis = np.linspace(-2.0, 2.0, args.phi_num)
    bs = np.linspace(-3.0, 3.0, args.b_num)
    reports = region_reports(law, phis, bs)

    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write("phi,b,gamma,std_error,stationary\n")
        for row in reports:
            for r in row:
                gamma = "-inf" if not math.isfinite(r.gamma) else f"{r.gamma:.17g}"
                fh.write(f"{r.phi:.17g},{r.b:.17g},{gamma},{r.std_error:.17g},{str(r.is_stationary).lower()}\n")

    print(f"law: {law.describe()}   rows phi = 2 .. -2, columns b = -3 .. 3")
    for i in range(len(phis) - 1, -1, -1):
        print(f"{phis[i]:+5.2f} " + "".join("#" if r.is_stationary else "." for r in reports[i]))
    print(f"critical |b| at phi = 0: {critical_b(law):.4f}")
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
