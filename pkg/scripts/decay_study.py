#!/usr/bin/env python3
"""Fit the error-decay constant of each Mertens-type residual for zeta.

For each report kind, residuals are collected over a log grid and
log|residual| is regressed against sqrt(log x); the slope estimates the
decay constant in the exp(-C sqrt(log x)) error envelope.
"""

import argparse

from selmer import lfunc, mertens


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--xmax-exp", type=int, default=7,
                    help="largest grid decade (default 1e7, minimum 5)")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    if args.xmax_exp < 5:
        ap.error("--xmax-exp must be >= 5 (the fit needs at least 4 points)")

    zeta = lfunc.zeta_instance()
    xs = [10.0 ** (k / 2) for k in range(6, 2 * args.xmax_exp + 1)]
    M = mertens.mertens_constant_M(zeta, 10**6, threads=args.threads).value
    M1 = mertens.mertens_constant_M1(zeta, 10**6, M=M, threads=args.threads).value

    runners = {
        "mertens3": lambda x: mertens.mertens3_report(zeta, x, threads=args.threads),
        "mertens2": lambda x: mertens.mertens2_report(zeta, x, M=M, threads=args.threads),
        "mertens1": lambda x: mertens.mertens1_report(zeta, x, M1=M1, threads=args.threads),
        "pnt": lambda x: mertens.pnt_report(zeta, x, threads=args.threads),
    }
    for kind, run in runners.items():
        pts = []
        for x in xs:
            rep = run(x)
            resid = rep.rel_residual if kind in ("mertens3", "pnt") else rep.residual
            pts.append((x, resid))
        fit = mertens.fit_decay(pts)
        print(f"{kind:9s} C = {fit.C_estimate:7.4f}  intercept = {fit.intercept:8.4f}  "
              f"rms misfit = {fit.rms_misfit:.3f}  ({len(fit.points)} points)")


if __name__ == "__main__":
    main()
