"""Command-line driver: ``fracflow {synth,integrate,roughpath,invert,report,verify}``.

Exit codes: 0 success, 1 a verification check failed, 2 usage or input error.
``FRACFLOW_THREADS`` caps the BLAS thread pools.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import FracflowError
from .integrals import (PartitionSpec, Polynomial, correction_discrete,
                        riemann_sum, skorohod_integral, stratonovich_integral,
                        young_pl_integral)
from .inversion import recover_bm
from .io import load_noise, read_path_csv, save_noise, write_path_csv
from .kernels import HurstParams
from .roughpath import chen_check, level2, level3, scaling_report
from .synthesis import (FbmPath, Mollifier, NoiseField, calibrate_noise_step,
                        synth_exact, synth_gamma, synth_kernel, synth_mollified,
                        synth_poisson)
from .verify import (CHECK_NAMES, GROUPS, ExperimentConfig, parse_grid, run_verify, select_checks,
                     strat_self_integral_rms)

SUMMARY_HEADER = ["source", "check", "criterion", "name", "estimate", "target", "standard_error",
                  "n", "comparison", "tolerance", "verdict"]


def _dump_json(obj, dest):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if dest in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text)


def _tolist(x):
    return np.asarray(x).tolist()


# --------------------------------------------------------------------------
# synth


def cmd_synth(args) -> int:
    p = HurstParams(args.H)
    times = parse_grid(args.grid)
    n = args.n
    if args.method == "exact":
        path = synth_exact(times, p, d=args.d, seed=args.seed, n_paths=n)
        noise_fields = None
    elif args.method == "gamma":
        path = synth_gamma(times, p, args.param or 0.01, seed=args.seed, d=args.d, n_paths=n)
        noise_fields = None
    else:
        cal = calibrate_noise_step(times, p, R=args.noise_R)
        R, h = cal["R"], (args.noise_h or cal["h"])
        from .synthesis import noise_batch
        noise_fields = noise_batch(args.seed, n, R, h, d=args.d)
        if args.method == "kernel":
            path = synth_kernel(times, p, noise_fields)
        elif args.method == "mollified":
            path = synth_mollified(times, p, noise_fields, Mollifier(args.mollifier, args.param or 0.1))
        else:
            path = synth_poisson(times, p, noise_fields, args.param or 0.5)
    out = Path(args.out)
    if n == 1 and out.suffix == ".csv":
        out.parent.mkdir(parents=True, exist_ok=True)
        write_path_csv(path.select(0), out)
        written = [out]
    else:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for i in range(n):
            dest = out / f"path_{i:04d}.csv"
            write_path_csv(path.select(i), dest)
            written.append(dest)
    if args.save_noise and noise_fields is not None:
        base = Path(args.save_noise)
        base.mkdir(parents=True, exist_ok=True)
        for i, f in enumerate(noise_fields):
            save_noise(f, base / f"noise_{i:04d}.fnf")
    print(f"wrote {len(written)} path file(s), method={path.method}")
    return 0


# --------------------------------------------------------------------------
# integrate


def _partition_from_spec(spec: dict, path: FbmPath) -> PartitionSpec:
    a, b = spec.get("interval", [float(path.times[0]), float(path.times[-1])])
    rule = spec.get("rule", "midpoint")
    part = spec.get("partition", 16)
    if isinstance(part, int):
        return PartitionSpec.uniform(a, b, part, rule)
    return PartitionSpec(np.asarray(part, dtype=float), rule, spec.get("offsets"))


def cmd_integrate(args) -> int:
    p = HurstParams(args.H)
    path = read_path_csv(args.path, p)
    try:
        spec = json.loads(Path(args.spec).read_text()) if args.spec else {}
    except (OSError, json.JSONDecodeError) as exc:
        raise FracflowError("CONFIG_INVALID", f"integration spec: {exc}") from exc
    F = Polynomial.from_dict(spec.get("F", {"univariate": [0, 1]}))
    part = _partition_from_spec(spec, path)
    kind = spec.get("kind", "stratonovich")
    corr = 0.0
    if kind == "stratonovich":
        value = stratonovich_integral(F, path, part, p).value
    elif kind == "skorohod":
        res = skorohod_integral(F, path, part, p)
        value, corr = res.value, res.correction_value
    elif kind == "young_pl":
        value = young_pl_integral(F, path, part).value
    elif kind == "riemann":
        fx = F(np.moveaxis(path.at(part.taus()), -2, -1))
        dx = np.diff(path.at(part.nodes), axis=-1)
        value = np.einsum("nm,dn->md", fx, dx)
        corr = correction_discrete(F, path, part, p)
    else:
        raise FracflowError("CONFIG_INVALID", f"unknown kind {kind!r}")
    out = {"kind": kind, "value": _tolist(value), "correction_value": _tolist(corr),
           "partition": {"a": part.a, "b": part.b, "cells": part.n_cells, "rule": part.rule, "mesh": part.mesh},
           "F": F.to_dict(), "H": p.H}
    if F.d == 1 and F.m == 1 and kind in ("stratonovich", "young_pl"):
        # chain rule reference G(X_b) - G(X_a) with G' = F
        e, c = F.exponents[:, 0], F.coefficients[0]
        xa, xb = path.at([part.a, part.b])[0]
        ref = float(sum(ci * (xb ** (ei + 1) - xa ** (ei + 1)) / (ei + 1) for ei, ci in zip(e, c)))
        out["chain_rule_reference"] = ref
        out["abs_difference"] = abs(float(np.asarray(value).ravel()[0]) - ref)
        uniform = np.allclose(np.diff(part.nodes), part.mesh)
        if kind == "stratonovich" and F.degree == 1 and uniform and not c[e == 0].any():
            # 3 x exact RMS of the midpoint error for F(x) = c x
            rms = strat_self_integral_rms(p.H, part.n_cells, part.a, part.b)
            out["tolerance"] = 3.0 * abs(float(c[e == 1].sum())) * rms
    _dump_json(out, args.out)
    return 0


# --------------------------------------------------------------------------
# roughpath


def cmd_roughpath(args) -> int:
    p = HurstParams(args.H)
    paths = [read_path_csv(f, p) for f in args.path]
    first = paths[0]
    a, b = (float(x) for x in args.interval.split(":")) if args.interval else (first.times[0], first.times[-1])
    c = first.times[np.searchsorted(first.times, 0.5 * (a + b))]
    out = {"interval": [float(a), float(b)], "H": p.H, "paths": []}
    for path in paths:
        l2 = level2(path, a, b)
        out["paths"].append({
            "level2": _tolist(l2.values),
            "levy_area": _tolist(l2.levy_area),
            "level3": _tolist(level3(path, a, b).values),
            "chen_max_residual": float(np.abs(chen_check(path, a, c, b)).max()),
        })
    if len(paths) >= 2:
        batch = FbmPath(first.times, np.stack([q.values for q in paths]), p, "csv")
        span = b - a
        lengths = [span / 2 ** k for k in range(4, -1, -1)]
        out["scaling"] = [scaling_report(batch, lengths, level, a) for level in (2, 3)]
    _dump_json(out, args.out)
    return 0


# --------------------------------------------------------------------------
# invert


def cmd_invert(args) -> int:
    p = HurstParams(args.H)
    path = read_path_csv(args.path, p)
    R = args.R or float(min(-path.times[0], path.times[-1]))
    inner = path.times[np.abs(path.times) <= 0.25 * R + 1e-12]
    b_hat = recover_bm(path, inner, p, R)
    recovered = FbmPath(inner, b_hat, p, f"recovered(R={R:g})")
    write_path_csv(recovered, args.out)
    # quadratic variation per unit time at a few strides; tends to 1 once the
    # stride is a few grid steps (the finest step is smoothed by the kernel)
    qv = {}
    for k in (1, 2, 4, 8, 16):
        if k < len(inner):
            inc = b_hat[..., k::k] - b_hat[..., :-k:k]
            qv[str(k)] = float(np.mean(inc ** 2 / (inner[k::k] - inner[:-k:k])))
    report = {"R": R, "H": p.H, "n_times": len(inner), "variance_per_time_by_stride": qv}
    if args.noise:
        noise = load_noise(args.noise)
        truth = noise.brownian(inner)
        err = b_hat - truth
        report["rms_error"] = float(np.sqrt(np.mean(err ** 2)))
        report["relative_error_at_max_t"] = float(abs(err[..., -1]).max() / max(abs(truth[..., -1]).max(), 1e-300))
    _dump_json(report, args.report)
    return 0


# --------------------------------------------------------------------------
# report


def _collect_reports(src: Path):
    for f in sorted(src.glob("*.json")):
        try:
            data = json.loads(f.read_text())
        except json.JSONDecodeError:
            continue
        checks = data.get("checks", []) if isinstance(data, dict) else []
        for chk in checks:
            for r in chk.get("reports", []):
                yield f.name, chk.get("name", ""), chk.get("criterion", ""), r


def cmd_report(args) -> int:
    src = Path(args.input)
    if not src.is_dir():
        raise FracflowError("IO", f"{src} is not a directory")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "summary.csv", "w", newline="") as fh, open(out / "series.csv", "w", newline="") as sh:
        summary = csv.writer(fh, lineterminator="\n")
        series = csv.writer(sh, lineterminator="\n")
        summary.writerow(SUMMARY_HEADER)
        series.writerow(["source", "check", "name", "key", "index", "value"])
        for source, check, crit, r in _collect_reports(src):
            summary.writerow([source, check, crit] + [r.get(k, "") if r.get(k) is not None else ""
                                                      for k in SUMMARY_HEADER[3:]])
            for key, val in sorted(r.get("metadata", {}).items()):
                if isinstance(val, list) and all(isinstance(v, (int, float)) for v in val):
                    for i, v in enumerate(val):
                        series.writerow([source, check, r["name"], key, i, repr(float(v))])
    print(f"wrote {out / 'summary.csv'} and {out / 'series.csv'}")
    return 0


# --------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.select:
        overrides["checks"] = select_checks(args.select)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.n is not None:
        overrides["n"] = args.n
        overrides["n_small"] = max(100, args.n // 10)
    if args.tolerance_scale is not None:
        overrides["tolerance_scale"] = args.tolerance_scale
    if args.H:
        overrides["H"] = args.H
    if args.method:
        overrides["methods"] = args.method
    if args.grid:
        overrides["grid"] = args.grid
    if args.out:
        overrides["output"] = args.out
    cfg = ExperimentConfig.from_dict({**cfg.to_dict(), **overrides})
    suite = run_verify(cfg, progress=print)
    return 0 if suite.passed else 1


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracflow", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="sample fBm paths to CSV")
    s.add_argument("--H", type=float, required=True)
    s.add_argument("--method", choices=["exact", "kernel", "mollified", "poisson", "gamma"], default="exact")
    s.add_argument("--grid", required=True, help="start:end:cells")
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--param", type=float, help="mollifier width, Poisson y or Gamma lambda")
    s.add_argument("--mollifier", choices=["triangle", "gaussian"], default="triangle")
    s.add_argument("--noise-R", type=float, dest="noise_R")
    s.add_argument("--noise-h", type=float, dest="noise_h")
    s.add_argument("--save-noise", help="directory for FNF1 noise files")
    s.add_argument("--out", required=True, help="CSV file (n=1) or directory")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("integrate", help="integral of a polynomial against a path CSV")
    s.add_argument("--path", required=True)
    s.add_argument("--spec", help="JSON {F, interval, partition, rule, kind}")
    s.add_argument("--H", type=float, required=True)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_integrate)

    s = sub.add_parser("roughpath", help="level-2/3 tensors and scaling fit")
    s.add_argument("--path", required=True, action="append")
    s.add_argument("--H", type=float, required=True)
    s.add_argument("--interval", help="a:b (grid nodes)")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_roughpath)

    s = sub.add_parser("invert", help="recover the driving Brownian motion")
    s.add_argument("--path", required=True)
    s.add_argument("--H", type=float, required=True)
    s.add_argument("--R", type=float)
    s.add_argument("--noise", help="FNF1 file of the driving noise, for error reporting")
    s.add_argument("--out", required=True, help="recovered BM CSV")
    s.add_argument("--report", default="-")
    s.set_defaults(func=cmd_invert)

    s = sub.add_parser("report", help="aggregate JSON reports into CSV tables")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("verify", help="run the acceptance checks",
                       description=f"groups: {', '.join(GROUPS)}; checks: {', '.join(CHECK_NAMES)}")
    s.add_argument("select", nargs="*", help="check or group names (default: all)")
    s.add_argument("--config")
    s.add_argument("--seed", type=int)
    s.add_argument("--n", type=int, help="large Monte Carlo size (the small one is n/10)")
    s.add_argument("--H", type=float, action="append")
    s.add_argument("--method", action="append")
    s.add_argument("--grid")
    s.add_argument("--tolerance-scale", type=float, dest="tolerance_scale")
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify)
    return ap


def _thread_limit():
    value = os.environ.get("FRACFLOW_THREADS")
    if not value:
        return contextlib.nullcontext()
    try:
        n = int(value)
    except ValueError:
        raise FracflowError("CONFIG_INVALID", "FRACFLOW_THREADS must be a positive integer") from None
    if n < 1:
        raise FracflowError("CONFIG_INVALID", "FRACFLOW_THREADS must be a positive integer")
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with _thread_limit():
            return args.func(args)
    except FracflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
