#!/usr/bin/env python3
"""Emit report tables for all built-in instances over a shared grid.

Produces one CSV per (instance, kind) pair under --outdir, ready for
plotting or for `selmer fit`.
"""

import argparse
from pathlib import Path

from selmer import cli


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="out/tables")
    ap.add_argument("--xs", default="1e2:1e6:log10")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--tau-limit", default="1e5")
    args = ap.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    # the convolution grid is clamped to its coefficient coverage
    rankin_xs = f"1e2:{args.tau_limit}:log10"
    instances = [
        ("zeta", [], args.xs),
        ("dirichlet", ["--discriminant", "-4"], args.xs),
        ("dedekind", ["--discriminant", "-4"], args.xs),
        ("rankin", ["--tau-limit", args.tau_limit], rankin_xs),
    ]
    for name, extra, xs in instances:
        for kind in ("mertens1", "mertens2", "mertens3", "pnt"):
            out = outdir / f"{name}_{kind}.csv"
            rc = cli.main([
                "table", "--instance", name, *extra, "--kind", kind,
                "--xs", xs, "--threads", str(args.threads),
                "--out", str(out),
            ])
            status = "ok" if rc == 0 else f"exit {rc}"
            print(f"{name:10s} {kind:9s} -> {out} [{status}]")


if __name__ == "__main__":
    main()
