"""Command line front end: dimension searches, capacities, intersections and simulation.

Every run writes report.json (the result plus the resolved job), report.csv
and plot.svg into --out.  Exit codes: 0 success, 2 invalid input, 3 nothing
decided, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from .dimension.fourier import dim_preimage
from .dimension.image import dim_image, dim_image_bounds
from .dimension.range import dim_range
from .energy.capacity import capacity_trend
from .energy.divergence import INCONCLUSIVE, QuadratureError
from .energy.gauges import gauge_from_dict
from .exponents import DescriptorError, IsotropicStable, exponent_from_dict
from .intersections import UNDECIDED, intersect_criterion
from .sets import Interval, natural_measure, set_from_dict
from .simulate import UnsupportedProcess, box_dimension_fit, image_points, intersection_probe

EXIT_OK, EXIT_INPUT, EXIT_UNDECIDED, EXIT_NUMERIC = 0, 2, 3, 4
CONSISTENCY_TOL = 0.05

DEFAULTS = {"tol": 0.01, "level": None, "seed": 0, "budget": 3000, "n_paths": 8}
REQUIRED = {
    "dim-range": ("psi",),
    "dim-image": ("psi", "set"),
    "dim-preimage": ("psi", "set"),
    "capacity": ("set", "gauge"),
    "intersect": ("psi", "set", "set2"),
    "simulate": ("psi", "set"),
    "validate": (),
}


class InputError(ValueError):
    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class NumericFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# job handling


def _json_arg(text, name):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(name, f"invalid JSON ({exc.msg})") from exc


def load_job(args) -> dict:
    """Merge the job file (or a previous report's job) with inline flags; flags win."""
    job = {}
    if args.job:
        try:
            with open(args.job) as fh:
                job = json.load(fh)
        except OSError as exc:
            raise InputError("job", str(exc)) from exc
        except json.JSONDecodeError as exc:
            raise InputError("job", f"invalid JSON ({exc.msg})") from exc
        if not isinstance(job, dict):
            raise InputError("job", "must be a JSON object")
        job = dict(job.get("job", job))
    for key in ("psi", "set", "set2", "gauge"):
        val = getattr(args, key)
        if val is not None:
            job[key] = _json_arg(val, key)
    for key in ("tol", "level", "seed", "budget", "n_paths", "eps"):
        val = getattr(args, key)
        if val is not None:
            job[key] = val
    for key, val in DEFAULTS.items():
        job.setdefault(key, val)
    job["command"] = args.command
    for key in REQUIRED[args.command]:
        if key not in job:
            raise InputError(key, "required for " + args.command)
    if not 1e-3 <= float(job["tol"]) <= 0.5:
        raise InputError("tol", "must lie in [1e-3, 0.5]")
    if job["level"] is not None and not 0 <= int(job["level"]) <= 40:
        raise InputError("level", "must lie in [0, 40]")
    if int(job["n_paths"]) < 1:
        raise InputError("n_paths", "must be positive")
    return job


def _psi(job):
    return exponent_from_dict(job["psi"], "psi")


def _set(job, key="set"):
    return set_from_dict(job[key], key)


# ---------------------------------------------------------------------------
# commands; each returns (report dict, csv rows, plot callback, decided flag)


def _verdict_rows(report):
    rows = []
    for x, v in report["verdicts"]:
        row = {"exponent": x, "verdict": v["verdict"]}
        row.update({f"I({r:.4g})": val for r, val in v["cutoff_values"]})
        rows.append(row)
    rows.append({"exponent": "", "verdict": "estimate", "value": report["value"],
                 "ci_lo": report["interval"][0], "ci_hi": report["interval"][1]})
    return rows


def _bisection_outputs(rep, xlabel):
    from .plotting import plot_verdicts

    d = rep.to_dict()
    decided = any(v["verdict"] != INCONCLUSIVE for _, v in d["verdicts"])
    return d, _verdict_rows(d), lambda path: plot_verdicts(d["verdicts"], path, xlabel=xlabel), decided


def run_dim_range(job):
    psi = _psi(job)
    return _bisection_outputs(dim_range(psi, tol=float(job["tol"])), "cutoff on |psi|")


def run_dim_image(job):
    psi, G = _psi(job), _set(job)
    level = None if job["level"] is None else int(job["level"])
    out = _bisection_outputs(dim_image(psi, G, level, float(job["tol"])), "cutoff on |xi|")
    if psi.is_symmetric:
        out[0]["bounds"] = dim_image_bounds(psi, G, float(job["tol"]))
    return out


def run_dim_preimage(job):
    psi, R = _psi(job), _set(job)
    level = None if job["level"] is None else int(job["level"])
    return _bisection_outputs(dim_preimage(psi, R, float(job["tol"]), level), "cutoff on |xi|")


def run_capacity(job):
    from .plotting import plot_fit

    s = _set(job)
    g = gauge_from_dict(job["gauge"], "gauge")
    top = 7 if job["level"] is None else int(job["level"])
    levels = tuple(range(max(top - 3, 1), top + 1))
    caps, slope = capacity_trend(s, g, levels, int(job["budget"]))
    cells = [natural_measure(s, L).cell for L in levels]
    positive = bool(np.all(caps > 0) and slope < 0.1)
    decided = positive or bool(np.all(caps == 0) or slope > 0.2)
    report = {"capacities": caps.tolist(), "levels": list(levels), "cells": cells,
              "trend_slope": slope if math.isfinite(slope) else None,
              "verdict": "positive" if positive else ("zero" if decided else UNDECIDED),
              "value": float(caps[-1])}
    rows = [{"level": L, "cell": c, "capacity": v} for L, c, v in zip(levels, cells, caps)]

    def plot(path):
        ok = caps > 0
        x, y = np.asarray(cells)[ok], caps[ok]
        coef = np.polyfit(np.log(x), np.log(y), 1) if ok.sum() >= 2 else (0.0, 0.0)
        plot_fit(x, y, coef[0], coef[1], path, "cell size", "capacity")

    return report, rows, plot, decided


def run_intersect(job):
    from .plotting import plot_fit

    psi, F, G = _psi(job), _set(job), _set(job, "set2")
    level = 5 if job["level"] is None else int(job["level"])
    verdict, detail = intersect_criterion(psi, F, G, level, int(job["budget"]))
    report = {"verdict": verdict, **detail}
    rows = []
    for name, p in detail["paths"].items():
        caps = p.get("capacities") or [None]
        for L, c in zip(p.get("levels", [None]), caps):
            rows.append({"path": name, "verdict": p["verdict"], "level": L, "capacity": c})
    if job.get("eps"):
        probe = intersection_probe(psi, F, G, job["eps"], int(job["n_paths"]), int(job["seed"]))
        report["probe"] = {"trend": probe.trend, "n_paths": probe.n_paths, "rows": probe.to_rows(),
                           "notes": probe.notes}
        rows += [{"path": "probe", "verdict": probe.trend, **r} for r in probe.to_rows()]

    def plot(path):
        p = next((q for q in detail["paths"].values() if q.get("capacities")), None)
        if p is None:
            plot_fit([1.0], [1.0], 0.0, 0.0, path, "level", "capacity", used=[False])
            return
        x, y = np.asarray(p["levels"], dtype=float), np.maximum(np.asarray(p["capacities"]), 1e-300)
        plot_fit(2.0 ** -x, y, 0.0, float(np.log(y[-1])), path, "dyadic scale", "capacity", used=y > 1e-300)

    return report, rows, plot, verdict != UNDECIDED


def run_simulate(job):
    from .plotting import plot_fit

    psi, G = _psi(job), _set(job)
    level = 14 if job["level"] is None else int(job["level"])
    fits, rows = [], []
    for p in range(int(job["n_paths"])):
        pts = image_points(psi, G, level, int(job["seed"]), p, fine_level=level)
        fit = box_dimension_fit(pts)
        fits.append(fit)
        rows.append({"path": p, "box_dimension": fit.value, "stderr": fit.stderr,
                     "ci_lo": fit.ci[0], "ci_hi": fit.ci[1]})
    vals = np.array([f.value for f in fits])
    se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else fits[0].stderr
    report = {"value": float(vals.mean()), "stderr": se, "ci": [float(vals.mean() - 2 * se),
                                                               float(vals.mean() + 2 * se)],
              "per_path": rows, "level": level, "seed": int(job["seed"]),
              "flags": ["box counting converges slowly; values are biased low for heavy jumps"]}
    rows = rows + [{"path": "mean", "box_dimension": report["value"], "stderr": se,
                    "ci_lo": report["ci"][0], "ci_hi": report["ci"][1]}]

    def plot(path):
        f = fits[0]
        lo, hi = f.window
        used = (f.scales <= lo) & (f.scales >= hi)
        x, y = 1 / f.scales, f.counts
        coef = np.polyfit(np.log(x[used]), np.log(y[used]), 1)
        plot_fit(x, y, coef[0], coef[1], path, "1 / box side", "occupied boxes", used=used)

    return report, rows, plot, True


def run_validate(job):
    from .plotting import plot_verdicts

    psi = _psi(job) if "psi" in job else IsotropicStable(1.5, 1)
    if not isinstance(psi, IsotropicStable):
        raise InputError("psi.family", "validate needs IsotropicStable")
    tol = float(job["tol"])
    G = Interval(0.0, 1.0)
    img = dim_image(psi, G, None, tol)
    bounds = dim_image_bounds(psi, G, tol)
    rng = dim_range(psi, tol=tol)
    checks = {
        "bounds_contain_image": bounds["I"] - CONSISTENCY_TOL <= img.value <= bounds["J"] + CONSISTENCY_TOL,
        "image_vs_range": abs(img.value - rng.value) <= CONSISTENCY_TOL,
        "bounds_vs_range": abs(bounds["I"] - rng.value) <= CONSISTENCY_TOL
        and abs(bounds["J"] - rng.value) <= CONSISTENCY_TOL,
    }
    report = {"passed": all(checks.values()), "checks": checks, "dim_image": img.to_dict(),
              "bounds": bounds, "dim_range": rng.to_dict(), "tolerance": CONSISTENCY_TOL}
    rows = [{"quantity": "dim_image", "value": img.value}, {"quantity": "bound_I", "value": bounds["I"]},
            {"quantity": "bound_J", "value": bounds["J"]}, {"quantity": "dim_range", "value": rng.value}]
    rows += [{"quantity": k, "value": v} for k, v in checks.items()]
    if not report["passed"]:
        raise _ValidateFailure(report, rows, [k for k, v in checks.items() if not v])
    return report, rows, lambda path: plot_verdicts(img.to_dict()["verdicts"], path), True


class _ValidateFailure(Exception):
    def __init__(self, report, rows, failed):
        super().__init__("consistency checks failed: " + ", ".join(failed))
        self.report, self.rows = report, rows


COMMANDS = {
    "dim-range": run_dim_range,
    "dim-image": run_dim_image,
    "dim-preimage": run_dim_preimage,
    "capacity": run_capacity,
    "intersect": run_intersect,
    "simulate": run_simulate,
    "validate": run_validate,
}


# ---------------------------------------------------------------------------
# output


def _clean(obj):
    """Replace non-finite floats and numpy scalars so the JSON is strict."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else (None if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    return obj


def _atomic_write(path, text):
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _csv_text(rows):
    columns = []
    for r in rows:
        columns += [k for k in r if k not in columns]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns)
    writer.writeheader()
    writer.writerows(_clean(rows))
    return buf.getvalue()


def write_outputs(out, job, report, rows, plot, exit_code):
    os.makedirs(out, exist_ok=True)
    doc = {"command": job["command"], "job": job, "exit_code": exit_code, "report": report}
    _atomic_write(os.path.join(out, "report.json"), json.dumps(_clean(doc), indent=2) + "\n")
    _atomic_write(os.path.join(out, "report.csv"), _csv_text(rows) if rows else "")
    if plot is not None:
        plot(os.path.join(out, "plot.svg"))


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levydim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--job", help="JSON job file or a previous report.json")
        p.add_argument("--psi", help="exponent descriptor (JSON)")
        p.add_argument("--set", help="set descriptor (JSON)")
        p.add_argument("--set2", help="second set for intersect (JSON)")
        p.add_argument("--gauge", help="gauge descriptor for capacity (JSON)")
        p.add_argument("--tol", type=float)
        p.add_argument("--level", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--budget", type=int)
        p.add_argument("--n-paths", dest="n_paths", type=int)
        p.add_argument("--eps", type=float, nargs="+", help="probe distances for intersect")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--no-plot", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        job = load_job(args)
        report, rows, plot, decided = COMMANDS[args.command](job)
    except (DescriptorError, InputError) as exc:
        print(f"error: invalid field {exc.field}: {str(exc).split(': ', 1)[-1]}", file=sys.stderr)
        return EXIT_INPUT
    except _ValidateFailure as exc:
        write_outputs(args.out, job, exc.report, exc.rows, None, EXIT_NUMERIC)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UnsupportedProcess, TypeError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FloatingPointError, QuadratureError, ArithmeticError, MemoryError, np.linalg.LinAlgError,
            NumericFailure) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    code = EXIT_OK if decided else EXIT_UNDECIDED
    write_outputs(args.out, job, report, rows, None if args.no_plot else plot, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
