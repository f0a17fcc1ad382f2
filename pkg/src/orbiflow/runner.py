"""Config-driven experiment runs and parameter sweeps.

A config is an INI file with one experiment::

    [experiment]
    name = sphere_flow
    seed = 0

    [parameters]
    r0 = 1.0471975511965976
    dt = 1e-5

    [output]
    dir = runs/sphere

``seed`` is mandatory.  Parameters not given take the defaults of the
schema below; unknown names are rejected.  A sweep grid is an INI file with
a ``[grid]`` section of comma-separated value lists, expanded as a product.
"""

import configparser
import csv
import hashlib
import itertools
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ConfigError, ExperimentError, OrbiflowError
from .experiments import EXPERIMENTS

WORKERS_ENV = "ORBIFLOW_WORKERS"


def _positive(x):
    return x > 0


def _in_unit(x):
    return 0 < x < 1


# name -> (type, default, predicate, description)
SCHEMA = {
    "sphere_flow": {
        "r0": (float, math.pi / 3, _positive, "initial geodesic radius"),
        "kappa": (float, 1.0, _positive, "ambient sectional curvature"),
        "dt": (float, 1e-5, _positive, "nominal time step"),
    },
    "profile_flow": {
        "n_psi": (int, 401, lambda n: n >= 5, "profile grid size"),
        "count": (int, 20, _positive, "number of seeded starts"),
        "base": (float, 0.6, _positive, "mean radius of the starts"),
        "amplitude": (float, 0.1, lambda a: 0 <= a < 0.6, "bound on the mode amplitudes"),
        "kappa": (float, 1.0, _positive, "ambient sectional curvature"),
        "delta": (float, 0.25, lambda d: 0 < d < 2, "exponent of the pinching quantity"),
        "b": (float, 0.01, _positive, "gradient-estimate coefficient"),
        "snapshot_every": (int, 0, lambda n: n >= 0, "store every n-th profile (0 = none)"),
    },
    "volume_law": {
        "r0": (float, math.pi / 3, _positive, "sphere radius"),
        "dt": (float, 1e-5, _positive, "sphere time step"),
        "base": (float, 0.6, _positive, "profile mean radius"),
        "amplitude": (float, 0.05, lambda a: 0 <= a < 0.3, "profile perturbation"),
        "n_psi_levels": (str, "51,101,201", None, "profile refinement levels"),
        "t_end": (float, 0.02, _positive, "profile time window"),
    },
    "trace": {
        "lam": (float, 1.0, None, "branch scale"),
        "b": (float, 2.0, lambda b: b > 1, "branch constant"),
        "N": (int, 10_000, lambda n: n >= 0, "symmetric truncation"),
    },
    "holonomy": {
        "a": (float, 1.0, _positive, "interval length"),
        "m": (int, 64, _positive, "segments"),
        "scheme": (str, "lattice", lambda s: s in ("lattice", "linear"), "gauge discretisation"),
        "trials": (int, 5, _positive, "random smooth test cases"),
        "points": (int, 100, _positive, "random points for the rank check"),
    },
    "fibre_probe": {
        "a": (float, 1.0, _positive, "interval length"),
        "m": (int, 64, _positive, "segments"),
        "trunc": (int, 20, lambda n: n >= 0, "paired truncation"),
    },
    "sobolev": {
        "alpha": (float, 0.5, _in_unit, "volume split"),
        "alpha_hat": (float, 1.0, lambda x: x >= 1, "curvature split"),
        "count": (int, 1000, _positive, "(mesh, rho) pairs"),
        "meshes": (int, 10, _positive, "distinct meshes"),
        "level": (int, 5, lambda n: 0 <= n <= 6, "icosphere subdivision level"),
        "mesh_tol": (float, 0.05, lambda x: x >= 0, "relative tolerance"),
        "check_radius": (float, 0.2, lambda r: 0 < r < 0.36, "closed-form sphere radius"),
    },
    "myers": {
        "radii": (str, "0.3,0.6,1.0,1.3", None, "geodesic sphere radii"),
        "ellipsoids": (int, 4, lambda n: n >= 0, "perturbed ellipsoids"),
        "level": (int, 5, lambda n: 0 <= n <= 6, "icosphere subdivision level"),
        "mesh_tol": (float, 0.05, lambda x: x >= 0, "relative tolerance"),
    },
    "divergence": {
        "radius": (float, 0.7, lambda r: 0 < r < math.pi, "geodesic sphere radius"),
        "order": (int, 1, _positive, "order of the cyclic quotient"),
        "n_phi": (int, 64, _positive, "samples in the rotation angle"),
        "n_z_levels": (str, "250,500,1000", None, "refinement levels in z"),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    parameters: dict
    output_dir: str = "runs"

    def canonical(self):
        lines = [f"experiment={self.experiment}", f"seed={self.seed}"]
        lines += [f"{k}={self.parameters[k]!r}" for k in sorted(self.parameters)]
        return "\n".join(lines) + "\n"

    def digest(self):
        """Git-style blob hash of the canonical parameter listing."""
        body = self.canonical().encode()
        return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()

    def with_parameters(self, **updates):
        return validate(self.experiment, self.seed, {**self.parameters, **updates}, self.output_dir)


def _coerce(kind, text):
    if isinstance(text, kind):
        return text
    if kind is int:
        value = float(text)
        if value != int(value):
            raise ValueError(f"{text!r} is not an integer")
        return int(value)
    return kind(text)


def validate(experiment, seed, raw, output_dir="runs"):
    errors = {}
    if experiment not in SCHEMA:
        raise ConfigError(f"unknown experiment {experiment!r}", {"name": f"one of {sorted(SCHEMA)}"})
    try:
        seed = _coerce(int, seed)
    except (TypeError, ValueError):
        errors["seed"] = "mandatory integer"
    schema = SCHEMA[experiment]
    params = {}
    for key in raw:
        if key not in schema:
            errors[key] = "unknown parameter"
    for key, (kind, default, ok, desc) in schema.items():
        try:
            value = _coerce(kind, raw.get(key, default))
        except (TypeError, ValueError):
            errors[key] = f"expected {kind.__name__} ({desc})"
            continue
        if ok is not None and not ok(value):
            errors[key] = f"value {value!r} out of range ({desc})"
            continue
        params[key] = value
    if experiment == "sphere_flow" and "r0" in params and "kappa" in params:
        if params["r0"] >= math.pi / (2 * math.sqrt(params["kappa"])):
            errors["r0"] = "must be below pi / (2 sqrt(kappa)) for a convex sphere"
    if errors:
        raise ConfigError("invalid configuration: " + "; ".join(f"{k}: {v}" for k, v in errors.items()), errors)
    return ExperimentConfig(experiment, seed, params, str(output_dir))


def load_config(path):
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        if not parser.read(path):
            raise ConfigError(f"cannot read config {path}", {"path": "missing or unreadable"})
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}", {"path": "syntax"}) from exc
    if not parser.has_section("experiment"):
        raise ConfigError("missing [experiment] section", {"experiment": "required section"})
    exp = parser["experiment"]
    if "name" not in exp:
        raise ConfigError("missing experiment name", {"name": "required"})
    if "seed" not in exp:
        raise ConfigError("missing seed", {"seed": "required"})
    raw = dict(parser["parameters"]) if parser.has_section("parameters") else {}
    out = parser.get("output", "dir", fallback="runs")
    return validate(exp["name"], exp["seed"], raw, out)


def load_grid(path):
    parser = configparser.ConfigParser()
    parser.optionxform = str
    if not parser.read(path):
        raise ConfigError(f"cannot read grid {path}", {"path": "missing or unreadable"})
    if not parser.has_section("grid"):
        raise ConfigError("grid file needs a [grid] section", {"grid": "required section"})
    grid = {k: [v.strip() for v in val.split(",") if v.strip()] for k, val in parser["grid"].items()}
    return grid


def expand_grid(template, grid):
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ConfigError("parameter grid is empty", {"grid": "needs at least one value per key"})
    keys = list(grid)
    configs = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        updates = dict(zip(keys, combo))
        seed = updates.pop("seed", template.seed)
        configs.append(validate(template.experiment, seed, {**template.parameters, **updates}, template.output_dir))
    return configs


@dataclass
class RunReport:
    experiment: str
    config_hash: str
    seed: int
    parameters: dict
    checks: list
    values: dict = field(default_factory=dict)
    wall_time: float = 0.0
    error: str | None = None

    @property
    def passed(self):
        return self.error is None and all(c.passed for c in self.checks)

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if hasattr(x, "item"):
        return x.item()
    return x


def write_report(report, out):
    out = Path(out)
    with open(out / "checks.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["experiment", "config_hash", "check", "value", "bound", "passed"])
        for c in report.checks:
            writer.writerow([report.experiment, report.config_hash, c.name,
                             format(c.value, ".17g"), format(c.bound, ".17g"), int(c.passed)])
    d = report.to_dict()
    d["values"] = {k: _jsonable(v) for k, v in d["values"].items()}
    d["checks"] = [{k: _jsonable(v) for k, v in c.items()} for c in d["checks"]]
    with open(out / "report.json", "w") as fh:
        json.dump(d, fh, indent=2, sort_keys=True)


def run(config, out=None):
    """Execute one experiment, write its artifacts and report into ``out``."""
    out = Path(config.output_dir if out is None else out)
    out.mkdir(parents=True, exist_ok=True)
    params = {**config.parameters, "seed": config.seed}
    start = time.perf_counter()
    try:
        checks, values = EXPERIMENTS[config.experiment](params, out)
    except OrbiflowError as exc:
        raise ExperimentError(config.experiment, exc) from exc
    report = RunReport(
        config.experiment, config.digest(), config.seed, dict(config.parameters), checks,
        {k: _jsonable(v) for k, v in values.items()}, time.perf_counter() - start,
    )
    write_report(report, out)
    return report


def _run_safe(args):
    config, out = args
    try:
        return run(config, out)
    except ExperimentError as exc:
        return RunReport(config.experiment, config.digest(), config.seed, dict(config.parameters), [], error=str(exc))


def worker_count(jobs):
    text = os.environ.get(WORKERS_ENV)
    if text is None:
        return max(1, min(jobs, os.cpu_count() or 1))
    try:
        n = int(text)
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV} must be an integer", {WORKERS_ENV: text}) from exc
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be positive", {WORKERS_ENV: text})
    return n


def sweep(template, grid, out=None):
    """Run every grid point; failures are recorded and the sweep continues.

    Reports come back in grid order whatever the completion order, and a
    ``summary.csv`` lists one row per run.
    """
    configs = expand_grid(template, grid)
    root = Path(template.output_dir if out is None else out)
    root.mkdir(parents=True, exist_ok=True)
    jobs = [(c, root / f"{k:03d}-{c.digest()[:10]}") for k, c in enumerate(configs)]
    workers = worker_count(len(jobs))
    if workers == 1:
        reports = [_run_safe(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_safe, jobs))
    keys = list(grid)
    results = sorted({name for rep in reports for name in rep.values})
    with open(root / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "config_hash"] + keys + results + ["passed", "failed_checks", "error"])
        for k, (rep, cfg) in enumerate(zip(reports, configs)):
            inputs = [cfg.seed if key == "seed" else cfg.parameters[key] for key in keys]
            outputs = [rep.values.get(name, "") for name in results]
            failed = ";".join(c.name for c in rep.checks if not c.passed)
            row = [k, rep.config_hash] + inputs + outputs + [int(rep.passed), failed, rep.error or ""]
            writer.writerow([_cell(v) for v in row])
    return reports


def _cell(v):
    return format(v, ".17g") if isinstance(v, float) else v
