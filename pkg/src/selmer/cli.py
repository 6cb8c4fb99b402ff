"""Command-line front end: table, constants, verify, perron, fit.

Exit codes: 0 success, 2 bad usage / unknown instance, 3 coverage or
capacity exceeded, 4 I/O failure, 1 verification failure.  Output files
are written to a temporary path and renamed on success, so failures
leave no partial files.  Numbers are serialized with 17 significant
digits and round-trip bit-faithfully.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import analysis, lfunc, mertens
from .errors import (
    AccuracyError,
    CapacityError,
    CoverageError,
    SelmerError,
    UnknownInstanceError,
    ValidationError,
)

VALID_INSTANCES = ("zeta", "dirichlet", "dedekind", "rankin")

TABLE_FIELDS = (
    "x", "value", "main_term", "constant", "residual",
    "rel_residual", "imag_residue", "elapsed_s",
)


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def _atomic_write(path: str, text: str) -> None:
    out = Path(path)
    fd, tmp = tempfile.mkstemp(dir=out.parent or Path("."), prefix=out.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(rows: list[dict], fields: tuple[str, ...], fmt: str,
          out: str | None) -> None:
    if fmt == "csv":
        lines = [",".join(fields)]
        lines += [",".join(_fmt(row[f]) for f in fields) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        payload = [{f: row[f] for f in fields} for row in rows]
        text = json.dumps(payload, indent=2) + "\n"
    if out:
        _atomic_write(out, text)
    else:
        sys.stdout.write(text)


def parse_grid(spec: str) -> list[float]:
    """Grid spec: 'start:stop:log10' (decade steps) or 'x1,x2,...'."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3 or parts[2] != "log10":
            raise ValidationError(
                f"grid spec {spec!r} must be 'start:stop:log10' or a comma list"
            )
        start, stop = float(parts[0]), float(parts[1])
        if start < 2 or stop < start:
            raise ValidationError("grid must be ascending with all x >= 2")
        xs = []
        v = start
        while v <= stop * (1 + 1e-12):
            xs.append(v)
            v *= 10.0
        return xs
    xs = [float(t) for t in spec.split(",") if t.strip()]
    if not xs or any(v < 2 for v in xs) or any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValidationError("grid must be ascending with all x >= 2")
    return xs


def _read_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = text.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


_COERCE = {
    "xs": str, "instance": str, "kind": str, "out": str, "format": str,
    "coeff_file": str, "coeff_file_g": str, "input": str,
    "discriminant": int, "weight": int, "threads": int, "max_nodes": int,
    "tau_limit": lambda s: int(float(s)),
    "pmax": lambda s: int(float(s)), "umax": lambda s: int(float(s)),
    "xmax": lambda s: int(float(s)),
    "x": float, "tol": float, "quad_tol": float, "leading": float,
}


def _merge(args: argparse.Namespace, defaults: dict) -> dict:
    """flags override config-file values override built-in defaults."""
    cfg = dict(defaults)
    file_vals = _read_config(getattr(args, "config", None))
    for key, raw in file_vals.items():
        if key not in _COERCE:
            raise ValidationError(f"unknown config key {key!r}")
        cfg[key] = _COERCE[key](raw)
    for key in defaults:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    if cfg.get("threads") is None:
        cfg["threads"] = int(os.environ.get("SELMER_THREADS", "1"))
    return cfg


def build_instance(cfg: dict) -> lfunc.SelbergInstance:
    name = cfg.get("instance")
    if name not in VALID_INSTANCES:
        raise UnknownInstanceError(
            f"unknown instance {name!r}; valid instances: {', '.join(VALID_INSTANCES)}"
        )
    if name == "zeta":
        return lfunc.zeta_instance()
    if name in ("dirichlet", "dedekind"):
        d = cfg.get("discriminant")
        if d is None:
            raise ValidationError(f"--discriminant is required for {name}")
        maker = lfunc.dirichlet_instance if name == "dirichlet" else lfunc.dedekind_instance
        return maker(int(d))
    leading = None
    if cfg.get("leading") is not None:
        leading = lfunc.LeadingSource.config(float(cfg["leading"]))
    if cfg.get("coeff_file"):
        weight = cfg.get("weight")
        if weight is None:
            raise ValidationError("--weight is required with --coeff-file")
        tf = lfunc.load_coefficients(cfg["coeff_file"], int(weight))
        tg = None
        if cfg.get("coeff_file_g"):
            tg = lfunc.load_coefficients(cfg["coeff_file_g"], int(weight))
        return lfunc.rankin_instance(tf, tg, leading=leading)
    table = lfunc.tau_coefficient_table(int(cfg.get("tau_limit") or 10**5))
    return lfunc.rankin_instance(table, name="rankin(tau,tau)", leading=leading)


def _leading_samples_if_needed(instance, xs, threads):
    """Empirical-fit instances need partial-product samples; others don't."""
    if instance.leading.kind != "empirical-fit":
        return None
    cov = min(instance.coverage, 10**6)
    grid = np.logspace(math.log10(30.0), math.log10(cov), 8)
    fit_xs = sorted({x for x in xs if x <= cov} | {float(v) for v in grid})
    return mertens.empirical_leading_samples(instance, fit_xs, threads=threads)


def _report_row(rep: mertens.MertensReport) -> dict:
    return {
        "x": rep.x, "value": rep.value, "main_term": rep.main_term,
        "constant": rep.constant_used, "residual": rep.residual,
        "rel_residual": rep.rel_residual, "imag_residue": rep.imag_residue,
        "elapsed_s": rep.elapsed_seconds,
    }


def cmd_table(args) -> int:
    cfg = _merge(args, {
        "instance": None, "kind": None, "xs": None, "out": None,
        "format": "csv", "threads": None, "pmax": None, "umax": None,
        "xmax": None, "discriminant": None, "coeff_file": None,
        "coeff_file_g": None, "weight": None, "tau_limit": None,
        "leading": None,
    })
    if not cfg["kind"] or cfg["kind"] not in ("mertens1", "mertens2", "mertens3", "pnt"):
        raise ValidationError("--kind must be one of mertens1, mertens2, mertens3, pnt")
    if not cfg["xs"]:
        raise ValidationError("--xs is required")
    xs = parse_grid(cfg["xs"])
    instance = build_instance(cfg)
    threads = cfg["threads"]
    kind = cfg["kind"]

    samples = _leading_samples_if_needed(instance, xs, threads)
    kwargs = {"threads": threads}
    if kind == "mertens3":
        kwargs["leading"] = lfunc.leading_coefficient(instance, samples).value
        runner = mertens.mertens3_report
    elif kind == "mertens2":
        P = cfg["pmax"] or int(min(max(max(xs), 1e4), min(instance.coverage, 1e6)))
        kwargs["M"] = mertens.mertens_constant_M(
            instance, P, samples=samples, threads=threads).value
        runner = mertens.mertens2_report
    elif kind == "mertens1":
        U = cfg["umax"] or int(min(max(max(xs), 1e4), min(instance.coverage, 1e6)))
        x_max = cfg["xmax"] or U
        kwargs["M1"] = mertens.mertens_constant_M1(
            instance, U, x_max=x_max, samples=samples, threads=threads).value
        runner = mertens.mertens1_report
    else:
        runner = mertens.pnt_report

    rows = [_report_row(runner(instance, x, **kwargs)) for x in xs]
    _emit(rows, TABLE_FIELDS, cfg["format"], cfg["out"])
    return 0


CONSTANT_FIELDS = (
    "instance", "pmax", "M", "M_tail_bound", "M_limit", "M_gap",
    "umax", "xmax", "M1_integral", "M1_tail_uncertainty", "M1_limit",
    "M1_gap", "M1_inconsistent", "leading_value", "leading_uncertainty",
    "log_leading",
)


def cmd_constants(args) -> int:
    cfg = _merge(args, {
        "instance": None, "out": None, "format": "csv", "threads": None,
        "pmax": 10**8, "umax": None, "xmax": None, "discriminant": None,
        "coeff_file": None, "coeff_file_g": None, "weight": None,
        "tau_limit": None, "leading": None,
    })
    instance = build_instance(cfg)
    threads = cfg["threads"]
    pmax = int(min(cfg["pmax"], instance.coverage))
    umax = int(min(cfg["umax"] or pmax, instance.coverage))
    xmax = int(min(cfg["xmax"] or umax, instance.coverage))

    samples = _leading_samples_if_needed(instance, [float(pmax)], threads)
    lead = lfunc.leading_coefficient(instance, samples)
    Mc = mertens.mertens_constant_M(instance, pmax, leading=lead.value,
                                    threads=threads)
    M_limit = mertens.mertens_constant_M_limit(instance, pmax, threads=threads)
    m1 = mertens.mertens_constant_M1(instance, umax, M=Mc.value, x_max=xmax,
                                     leading=lead.value, threads=threads)
    row = {
        "instance": instance.name, "pmax": pmax,
        "M": Mc.value, "M_tail_bound": Mc.tail_bound,
        "M_limit": M_limit, "M_gap": abs(Mc.value - M_limit),
        "umax": umax, "xmax": xmax,
        "M1_integral": m1.value, "M1_tail_uncertainty": m1.tail_uncertainty,
        "M1_limit": m1.limit_estimate, "M1_gap": m1.gap,
        "M1_inconsistent": m1.inconsistent,
        "leading_value": lead.value, "leading_uncertainty": lead.uncertainty,
        "log_leading": math.log(lead.value),
    }
    if cfg["out"]:
        _emit([row], CONSTANT_FIELDS, cfg["format"], cfg["out"])
    else:
        for k in CONSTANT_FIELDS:
            v = row[k]
            print(f"{k} = {v if isinstance(v, (str, bool, int)) else _fmt(v)}")
    return 0


def cmd_verify(args) -> int:
    cfg = _merge(args, {"tol": 1e-9, "threads": None})
    tol = cfg["tol"]
    checks: list[tuple[str, float, float]] = []
    for w in (0.1, 1.0, 5.0):
        rep = analysis.circle_identity_report(w)
        checks.append((f"uniform circle integral = 2*pi       (w={w})", rep.uniform_error, 1e-10))
        checks.append((f"weighted circle integral = 2*pi*i*Ein (w={w})", rep.weighted_error, tol))
        checks.append((f"int_0^w (e^-u - 1)/u = -(g+log w+E1)  (w={w})", rep.series_error, tol))
    gamma_err = abs(analysis.gamma_euler() - analysis.EULER_GAMMA)
    checks.append(("gamma via Ein(1) - E1(1)", gamma_err, 1e-12))
    for w in (1e-3, 0.1, 1.0, 5.0, 20.0):
        err = abs(analysis.ein(w) - (analysis.EULER_GAMMA + math.log(w)
                                     + analysis.exp_integral_E1(w)))
        checks.append((f"Ein/E1 identity (w={w})", err, 1e-10))
    failed = 0
    for label, err, bound in checks:
        ok = err <= bound
        failed += 0 if ok else 1
        print(f"{'PASS' if ok else 'FAIL'}  {label:48s} |err| = {err:.3e} (tol {bound:.1e})")
    print(f"{len(checks) - failed}/{len(checks)} identity checks passed")
    return 0 if failed == 0 else 1


PERRON_FIELDS = ("instance", "x", "b", "T", "integral_re", "integral_im",
                 "partial_sum", "abs_gap", "quad_nodes", "evaluator_check")


def cmd_perron(args) -> int:
    cfg = _merge(args, {
        "instance": None, "x": 1e3, "pmax": 10**6, "quad_tol": 1e-9,
        "max_nodes": 200000, "out": None, "format": "csv", "threads": None,
        "discriminant": None, "coeff_file": None, "coeff_file_g": None,
        "weight": None, "tau_limit": None, "leading": None,
    })
    instance = build_instance(cfg)
    spec = analysis.ContourSpec.from_x(cfg["x"], quad_tol=cfg["quad_tol"],
                                       max_nodes=cfg["max_nodes"])
    rep = analysis.perron_truncated(instance, spec, cfg["pmax"],
                                    threads=cfg["threads"])
    row = {
        "instance": rep.instance, "x": rep.x, "b": rep.b, "T": rep.T,
        "integral_re": rep.integral.real, "integral_im": rep.integral.imag,
        "partial_sum": rep.partial_sum, "abs_gap": rep.abs_gap,
        "quad_nodes": rep.quad_nodes, "evaluator_check": rep.evaluator_check,
    }
    if cfg["out"]:
        _emit([row], PERRON_FIELDS, cfg["format"], cfg["out"])
    else:
        for k in PERRON_FIELDS:
            print(f"{k} = {row[k] if isinstance(row[k], (str, int)) else _fmt(row[k])}")
    return 0


FIT_FIELDS = ("C_estimate", "intercept", "rms_misfit", "n_points", "n_dropped")


def cmd_fit(args) -> int:
    cfg = _merge(args, {"input": None, "out": None, "format": "csv",
                        "threads": None})
    if not cfg["input"]:
        raise ValidationError("--in is required")
    points = []
    with open(cfg["input"]) as fh:
        header = fh.readline().strip().split(",")
        try:
            ix, ir = header.index("x"), header.index("residual")
        except ValueError:
            raise ValidationError("input table needs 'x' and 'residual' columns")
        for line in fh:
            if not line.strip():
                continue
            cells = line.strip().split(",")
            points.append((float(cells[ix]), float(cells[ir])))
    fit = mertens.fit_decay(points)
    row = {
        "C_estimate": fit.C_estimate, "intercept": fit.intercept,
        "rms_misfit": fit.rms_misfit, "n_points": len(fit.points),
        "n_dropped": fit.n_dropped,
    }
    if cfg["out"]:
        _emit([row], FIT_FIELDS, cfg["format"], cfg["out"])
    else:
        for k in FIT_FIELDS:
            print(f"{k} = {row[k] if isinstance(row[k], int) else _fmt(row[k])}")
    return 0


def _add_instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", help="zeta | dirichlet | dedekind | rankin")
    p.add_argument("--discriminant", type=int,
                   help="fundamental discriminant for dirichlet/dedekind")
    p.add_argument("--coeff-file", dest="coeff_file",
                   help="eigenvalue table for rankin (p,lambda or p,a_raw)")
    p.add_argument("--coeff-file-g", dest="coeff_file_g",
                   help="second form's table for rankin with f != g")
    p.add_argument("--weight", type=int, help="modular weight for --coeff-file")
    p.add_argument("--tau-limit", dest="tau_limit", type=lambda s: int(float(s)),
                   help="coverage of the built-in rankin tau table (default 1e5)")
    p.add_argument("--leading", type=float,
                   help="override the leading coefficient at s = 1")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file; flags win")
    p.add_argument("--threads", type=int,
                   help="thread budget (or env SELMER_THREADS; default 1)")
    p.add_argument("--out", help="output file (written atomically)")
    p.add_argument("--format", choices=("csv", "json"),
                   help="output format (default csv)")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="selmer",
        description="Mertens-type sums, constants, and contour identities "
                    "for Euler-product L-functions",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", help="evaluate a report kind over an x grid")
    _add_instance_flags(t)
    _add_common_flags(t)
    t.add_argument("--kind", help="mertens1 | mertens2 | mertens3 | pnt")
    t.add_argument("--xs", help="grid: 'start:stop:log10' or comma list")
    t.add_argument("--pmax", type=lambda s: int(float(s)),
                   help="truncation prime for the constant M")
    t.add_argument("--umax", type=lambda s: int(float(s)),
                   help="integral endpoint for the constant M1")
    t.add_argument("--xmax", type=lambda s: int(float(s)),
                   help="limit-estimator endpoint for M1")
    t.set_defaults(func=cmd_table)

    c = sub.add_parser("constants", help="M, M1 (both estimators), leading coefficient")
    _add_instance_flags(c)
    _add_common_flags(c)
    c.add_argument("--pmax", type=lambda s: int(float(s)),
                   help="truncation prime for M (default 1e8)")
    c.add_argument("--umax", type=lambda s: int(float(s)),
                   help="integral endpoint for M1 (default pmax)")
    c.add_argument("--xmax", type=lambda s: int(float(s)),
                   help="limit-estimator endpoint for M1 (default umax)")
    c.set_defaults(func=cmd_constants)

    v = sub.add_parser("verify", help="run the contour/special-function identity checks")
    _add_common_flags(v)
    v.add_argument("--tol", type=float, help="tolerance for quadrature checks (default 1e-9)")
    v.set_defaults(func=cmd_verify)

    pr = sub.add_parser("perron", help="truncated vertical-line integral vs. partial sum")
    _add_instance_flags(pr)
    _add_common_flags(pr)
    pr.add_argument("--x", type=float, help="evaluation point (default 1e3, max 1e4)")
    pr.add_argument("--pmax", type=lambda s: int(float(s)),
                    help="Euler-product cross-check cutoff (default 1e6)")
    pr.add_argument("--quad-tol", dest="quad_tol", type=float)
    pr.add_argument("--max-nodes", dest="max_nodes", type=int)
    pr.set_defaults(func=cmd_perron)

    f = sub.add_parser("fit", help="decay-constant fit from an emitted table")
    _add_common_flags(f)
    f.add_argument("--in", dest="input", help="CSV table with x and residual columns")
    f.set_defaults(func=cmd_fit)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnknownInstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CoverageError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4
    except AccuracyError as exc:
        print(f"accuracy error: {exc}", file=sys.stderr)
        return 1
    except (ValidationError, SelmerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
