"""Command-line front end.

    repelling minimize        --config run.cfg [--out DIR] [--seed S] [--no-deterministic]
    repelling verify-pretrace --config run.cfg
    repelling diagnose        --config run.cfg --points points.csv
    repelling sweep           --config run.cfg
    repelling group-audit     --config run.cfg

Every command writes one JSON document (sorted keys, no timestamps) into the
output directory; ``minimize`` also writes ``points.csv``, ``diagnose`` writes
``weyl.csv`` and ``sweep`` writes ``sweep.csv``.

Exit codes: 0 success (including honest stagnation), 1 configuration, input
or unsupported-model error, 2 resource limit exceeded.
"""
import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .config import load
from .diagnostics import (mean_energy_check, nearest_neighbor_report, weyl_bounds,
                          weyl_report)
from .energy import CONVENTIONS, basis_for, pretrace_check
from .errors import ConfigError, DomainError, ResourceLimitError, UnsupportedModelError
from .manifolds import is_torus
from .optimize import multistart, uniform_random_configuration

EXIT_OK, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2


# -- output helpers --------------------------------------------------------------

def _document(command, cfg, M, body):
    return {
        "tool": "repelling",
        "version": __version__,
        "command": command,
        "manifold": M.describe(),
        "parameters": cfg.echo(),
        "conventions": list(CONVENTIONS),
        **body,
    }


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2, allow_nan=True)
        fh.write("\n")


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def points_csv(points):
    """Chart coordinates, 17 significant digits."""
    pts = np.asarray(points)
    if np.iscomplexobj(pts):
        rows = np.column_stack([pts.real, pts.imag])
    else:
        rows = pts.reshape(len(pts), -1)
    buf = io.StringIO()
    buf.write("index," + ",".join(f"coord_{k + 1}" for k in range(rows.shape[1])) + "\n")
    for i, row in enumerate(rows):
        buf.write(str(i) + "," + ",".join("%.17g" % v for v in row) + "\n")
    return buf.getvalue()


def read_points_csv(path, M):
    """Parse a points CSV for ``M``; malformed rows raise naming the row."""
    dim = 2 if not is_torus(M) else M.dim
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DomainError(f"{path}: empty points file")
    header = [c.strip() for c in rows[0]]
    expected = ["index"] + [f"coord_{k + 1}" for k in range(dim)]
    if header != expected:
        raise DomainError(f"{path}: row 0 (header): expected {','.join(expected)}")
    coords = []
    for r, row in enumerate(rows[1:], start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != dim + 1:
            raise DomainError(f"{path}: row {r}: expected {dim + 1} fields, got {len(row)}")
        try:
            vals = [float(c) for c in row[1:]]
        except ValueError:
            raise DomainError(f"{path}: row {r}: non-numeric coordinate") from None
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f"{path}: row {r}: non-finite coordinate")
        if not is_torus(M) and vals[0] ** 2 + vals[1] ** 2 >= 1.0:
            raise DomainError(f"{path}: row {r}: point outside the unit disk")
        coords.append(vals)
    if not coords:
        raise DomainError(f"{path}: no point rows")
    arr = np.array(coords, dtype=float)
    if is_torus(M):
        return M.reduce(arr)
    return M.reduce(arr[:, 0] + 1j * arr[:, 1])


def _min_pair_distance(M, pts):
    n = len(pts)
    if n < 2:
        return None
    return min(M.distance(pts[i], pts[j]) for i in range(n) for j in range(i + 1, n))


def _setup(cfg):
    M = cfg.build_manifold()
    kernel = cfg.build_kernel(M.dim)
    return M, kernel


def _trace_summary(trace):
    energies = [e for e, _ in trace]
    return {
        "length": len(trace),
        "first": list(trace[0]),
        "last": list(trace[-1]),
        "strictly_decreasing": all(b < a for a, b in zip(energies, energies[1:])),
    }


# -- commands --------------------------------------------------------------------

def cmd_minimize(cfg, out_dir):
    M, kernel = _setup(cfg)
    n = cfg.require_N()
    basis = basis_for(M, kernel, n, cfg.eps_spec) if is_torus(M) else None
    params = cfg.optimize_params()
    res = multistart(M, kernel, basis, n, params, parallel=not cfg.deterministic)
    body = {
        "result": res.to_dict(with_trace=True),
        "trace_summary": _trace_summary(res.trace),
        "min_pair_distance": _min_pair_distance(M, res.config),
    }
    if basis is not None:
        body["basis"] = {"modes": len(basis), "lambda_max": basis.lambda_max,
                         "weight_sum": basis.weight_sum(), "weight_tail": basis.weight_tail()}
    _write_json(os.path.join(out_dir, "minimize.json"), _document("minimize", cfg, M, body))
    _write_text(os.path.join(out_dir, "points.csv"), points_csv(res.config))
    return EXIT_OK


def cmd_verify_pretrace(cfg, out_dir):
    M, kernel = _setup(cfg)
    if not is_torus(M):
        raise UnsupportedModelError("verify-pretrace needs a flat torus; the hyperbolic "
                                    "surface has no closed-form spectrum")
    n = cfg.require_N()
    basis = basis_for(M, kernel, n, cfg.eps_spec)
    samples = []
    for s in range(cfg.pretrace_samples):
        x = uniform_random_configuration(M, n, cfg.seed + s)
        samples.append(pretrace_check(x, M, kernel, basis, cfg.eps_geo))
    body = {
        "samples": [r.to_dict() for r in samples],
        "max_abs_residual": max(abs(r.residual) for r in samples),
        "max_budget": max(r.budget for r in samples),
        "pass": all(r.ok for r in samples),
        "basis_modes": len(basis),
    }
    _write_json(os.path.join(out_dir, "verify_pretrace.json"),
                _document("verify-pretrace", cfg, M, body))
    return EXIT_OK


def cmd_diagnose(cfg, out_dir, points_path):
    M, kernel = _setup(cfg)
    if points_path is None:
        raise ConfigError("diagnose needs --points <csv>", key="--points")
    pts = read_points_csv(points_path, M)
    n = len(pts)
    body = {"n_points": n}
    if is_torus(M):
        basis = basis_for(M, kernel, n, cfg.eps_spec)
        rep = weyl_report(pts, basis)
        mean = mean_energy_check(M, kernel, basis, n, cfg.diagnostics_samples, cfg.seed)
        body["weyl"] = rep.to_dict()
        body["weyl"]["max_w_lowest"] = rep.max_w(cfg.diagnostics_modes)
        body["mean_energy"] = mean.to_dict()
        body["certified_below_mean"] = rep.certified_below_mean
        body["label"] = "certified" if rep.certified_below_mean else "uncertified"
        _write_text(os.path.join(out_dir, "weyl.csv"), rep.to_csv())
    else:
        body["nearest_neighbor"] = nearest_neighbor_report(pts, M).to_dict() if n > 1 else None
        body["certified_below_mean"] = None
        body["label"] = "heuristic"
    _write_json(os.path.join(out_dir, "diagnose.json"), _document("diagnose", cfg, M, body))
    return EXIT_OK


SWEEP_HEADER = ["N", "best_energy", "max_w", "max_w_sqrt_n", "max_C", "certified",
                "weyl_pass", "error"]


def _sweep_row(cfg, M, kernel, n):
    basis = basis_for(M, kernel, n, cfg.eps_spec)
    res = multistart(M, kernel, basis, n, cfg.optimize_params(),
                     parallel=not cfg.deterministic)
    rep = weyl_report(res.config, basis)
    low = rep.lowest(cfg.diagnostics_modes)
    max_w = rep.max_w(cfg.diagnostics_modes)
    C = weyl_bounds(basis, n)[low] * math.sqrt(n)
    return {
        "N": n, "best_energy": res.energy.value, "max_w": max_w,
        "max_w_sqrt_n": max_w * math.sqrt(n),
        "max_C": float(np.max(C)) if len(C) else None,
        "certified": bool(res.certified_below_mean), "weyl_pass": rep.all_pass,
        "status": res.status, "error": "",
    }


def cmd_sweep(cfg, out_dir):
    M, kernel = _setup(cfg)
    if not is_torus(M):
        raise UnsupportedModelError("sweep reports Weyl amplitudes and needs a flat torus")
    rows = []
    for n in cfg.sweep_N:
        try:
            rows.append(_sweep_row(cfg, M, kernel, n))
        except (DomainError, ResourceLimitError, ArithmeticError) as exc:
            rows.append({"N": n, "best_energy": None, "max_w": None, "max_w_sqrt_n": None,
                         "max_C": None, "certified": None, "weyl_pass": None,
                         "status": "error", "error": f"{type(exc).__name__}: {exc}"})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow(["" if row[k] is None else
                         (repr(row[k]) if isinstance(row[k], float) else
                          str(row[k]).lower() if isinstance(row[k], bool) else row[k])
                         for k in SWEEP_HEADER])
    _write_text(os.path.join(out_dir, "sweep.csv"), buf.getvalue())
    _write_json(os.path.join(out_dir, "sweep.json"), _document("sweep", cfg, M, {"rows": rows}))
    return EXIT_OK


def group_audit(M, radius):
    """Consistency checks on the enumerated group up to ``radius``."""
    table = M.enumerate_group(radius)
    disp = table.displacement
    keys = np.round(disp, 6)
    shells = []
    for value in np.unique(keys):
        shells.append({"displacement": float(value), "count": int(np.sum(keys == value))})
    traces = np.abs(table.matrices[:, 0, 0] + table.matrices[:, 1, 1])
    min_trace = float(np.min(traces)) if len(traces) else None
    area = M.domain_area()
    return {
        "radius": radius,
        "elements": len(table),
        "relation_residual": M.relation_residual(),
        "shells": shells,
        "shell_counts_even": all(s["count"] % 2 == 0 for s in shells),
        "domain_area": area,
        "expected_area": 4.0 * math.pi * (M.genus - 1),
        "area_error": abs(area - 4.0 * math.pi * (M.genus - 1)),
        "min_abs_trace": min_trace,
        "shortest_closed_geodesic": (2.0 * math.acosh(min_trace / 2.0)
                                     if min_trace is not None else None),
    }


def cmd_group_audit(cfg, out_dir):
    M, _ = _setup(cfg)
    if is_torus(M):
        raise UnsupportedModelError("group-audit needs the hyperbolic surface (manifold.name = \"bolza\")")
    body = group_audit(M, cfg.group_audit_radius)
    body["pass"] = bool(body["relation_residual"] <= 1e-10 and body["area_error"] <= 1e-9
                        and body["shell_counts_even"])
    _write_json(os.path.join(out_dir, "group_audit.json"), _document("group-audit", cfg, M, body))
    return EXIT_OK


COMMANDS = {
    "minimize": cmd_minimize,
    "verify-pretrace": cmd_verify_pretrace,
    "diagnose": cmd_diagnose,
    "sweep": cmd_sweep,
    "group-audit": cmd_group_audit,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="repelling",
                                     description="Repelling point configurations on tori and the Bolza surface.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--out", default=None, help="output directory (default: output.dir or .)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--no-deterministic", action="store_true",
                       help="allow threaded restarts")
        if name == "diagnose":
            p.add_argument("--points", required=True, help="points CSV from minimize")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError("--seed must be an unsigned 64-bit integer", key="--seed")
            cfg.seed = args.seed
        if args.no_deterministic:
            cfg.deterministic = False
        out_dir = args.out or cfg.output_dir or "."
        os.makedirs(out_dir, exist_ok=True)
        fn = COMMANDS[args.command]
        if args.command == "diagnose":
            return fn(cfg, out_dir, args.points)
        return fn(cfg, out_dir)
    except ResourceLimitError as exc:
        print(f"error: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConfigError, UnsupportedModelError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
