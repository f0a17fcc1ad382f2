"""Experiment bodies: each takes validated parameters and an output directory.

Every experiment returns ``(checks, values)``: a list of :class:`Check`
rows and a dict of additional scalar results.  CSV artifacts are written
into the output directory.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import lie_group as lg
from . import mcf
from . import orbifold_base as ob
from . import path_space as ps
from . import regularized_trace as rt
from .errors import LostConvexity, NotConvex


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    bound: float
    passed: bool


def at_most(name, value, bound):
    value = float(value)
    return Check(name, value, float(bound), bool(value <= bound))


def at_least(name, value, bound):
    value = float(value)
    return Check(name, value, float(bound), bool(value >= bound))


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def sphere_flow(p, out):
    traj = mcf.sphere_flow_solve(p["r0"], p["kappa"], p["dt"])
    traj.to_csv(Path(out) / "trajectory.csv")
    k = math.sqrt(p["kappa"])
    law = np.cos(k * traj["r"]) - math.cos(k * p["r0"]) * np.exp(2.0 * p["kappa"] * traj["t"])
    T_exact = mcf.analytic_extinction_time(p["r0"], p["kappa"])
    report = mcf.pinching_extinction_report(traj)
    checks = [
        at_most("radius_law_residual", np.max(np.abs(law)), 1e-8),
        at_most("extinction_time_error", abs(traj.extinction_time - T_exact), 1e-6),
        at_most("volume_law_deviation", mcf.volume_law_check(traj).max_relative_deviation, 1e-5),
        at_most("extinction_time_over_bound", report.T / report.bound, 1.0),
    ]
    return checks, {"T": traj.extinction_time, "T_exact": T_exact, "samples": len(traj)}


def profile_flow(p, out):
    rng_seed = p["seed"]
    suite = mcf.convex_suite(rng_seed, p["count"], p["n_psi"], p["base"], p["amplitude"])
    rows = []
    lost = 0
    for k, prof in enumerate(suite):
        try:
            traj = mcf.profile_flow_solve(
                prof, p["kappa"], delta=p["delta"], b=p["b"], snapshot_every=p["snapshot_every"] or None
            )
        except LostConvexity:
            lost += 1
            rows.append([k] + [float("nan")] * 8)
            continue
        traj.to_csv(Path(out) / f"trajectory_{k:03d}.csv")
        if p["snapshot_every"]:
            traj.snapshots_to_csv(Path(out) / f"snapshots_{k:03d}.csv")
        rep = mcf.pinching_extinction_report(traj, p["delta"])
        psi = traj["psi_delta_max"]
        excess = traj["gradient_excess_max"]
        half = len(excess) // 2
        eps0 = traj["epsilon"][0]
        rows.append([
            k,
            rep.T,
            rep.bound,
            rep.final_ratio,
            float(np.max(psi)),
            float(psi[0]),
            float(np.max(excess[:half])),
            float(np.max(excess[half:])),
            float(np.max(traj["pointwise_ratio_max"]) * eps0),
        ])
    write_rows(
        Path(out) / "suite.csv",
        ["run", "T", "bound", "final_ratio", "psi_delta_max", "psi_delta_0",
         "grad_excess_early", "grad_excess_late", "ratio_times_eps0"],
        rows,
    )
    table = np.array([r[1:] for r in rows], dtype=float)
    ok = np.all(np.isfinite(table), axis=1)
    t = table[ok]
    psi_margin = np.max(t[:, 3] - (1.5 * t[:, 4] + 0.1)) if len(t) else float("nan")
    late_growth = np.max(t[:, 6] - np.maximum(t[:, 5], 0.0)) if len(t) else float("nan")
    checks = [
        at_most("lost_convexity_runs", lost, 0),
        at_most("final_ratio_max", np.max(t[:, 2]) if len(t) else np.inf, 1.01),
        at_most("extinction_time_over_bound_max", np.max(t[:, 0] / t[:, 1]) if len(t) else np.inf, 1.0),
        at_most("pinching_margin_max", psi_margin, 0.0),
        at_most("gradient_excess_late_growth", late_growth, 0.0),
        at_most("pointwise_ratio_times_eps0_max", np.max(t[:, 7]) if len(t) else np.inf, 1.1),
    ]
    return checks, {"runs": len(rows)}


def volume_law(p, out):
    sphere = mcf.sphere_flow_solve(p["r0"], 1.0, p["dt"])
    dev = mcf.volume_law_check(sphere).max_relative_deviation
    amp = p["amplitude"]

    def start(psi):
        return p["base"] + amp * np.cos(2 * psi) - 0.2 * amp * np.cos(4 * psi)

    levels = tuple(int(x) for x in _floats(p["n_psi_levels"]))
    study = mcf.volume_law_refinement(start, levels, p["t_end"])
    write_rows(
        Path(out) / "refinement.csv",
        ["n_psi", "deviation"],
        [[n, float(d)] for n, d in zip(study.n_psi, study.deviations)],
    )
    checks = [
        at_most("sphere_volume_law_deviation", dev, 1e-5),
        at_least("profile_convergence_rate", study.rate, 1.8),
    ]
    return checks, {}


def trace(p, out):
    fam = rt.SpectrumFamily.single(p["lam"], p["b"])
    partial = rt.regularized_trace_partial(fam, p["N"])
    closed = rt.regularized_trace_closed(fam)
    write_rows(Path(out) / "trace.csv", ["lambda", "b", "N", "partial", "closed"],
               [[p["lam"], p["b"], p["N"], partial, closed]])
    checks = [at_most("partial_minus_closed", abs(partial - closed), 1e-3)]
    return checks, {"partial": partial, "closed": closed, "minimal": rt.minimality_check(fam)}


def _smooth_path(a, m, c):
    return ps.DiscretePath.sample(
        lambda s: np.array([np.sin(2 * np.pi * s / a + c[0]), c[1] * np.cos(3 * s), c[2] + s * s]), a, m
    )


def _smooth_gauge(a, m, c):
    return ps.GaugePath.from_function(
        lambda s: lg.exp_group(np.array([np.sin(s + c[0]), c[1] * s, c[2] * np.cos(2 * s)])), a, m
    )


def holonomy(p, out):
    rng = np.random.default_rng(p["seed"])
    a, m = p["a"], p["m"]
    x = rng.normal(size=3)
    const = ps.DiscretePath.constant(a, m, x)
    const.to_csv(Path(out) / "constant_path.csv")
    const_res = lg.angle(lg.multiply(ps.parallel_transport(const), lg.inverse(lg.exp_group(a * x))))

    action = iso = link_iso = equi = 0.0
    for _ in range(p["trials"]):
        u = _smooth_path(a, m, rng.normal(size=3))
        v = _smooth_path(a, m, rng.normal(size=3))
        g = _smooth_gauge(a, m, rng.normal(size=3))
        h = _smooth_gauge(a, m, rng.normal(size=3))
        gu, gv = ps.gauge_act(g, u, p["scheme"]), ps.gauge_act(g, v, p["scheme"])
        twice = ps.gauge_act(g, ps.gauge_act(h, u, p["scheme"]), p["scheme"])
        action = max(action, np.max(np.abs(twice.values - ps.gauge_act(g * h, u, p["scheme"]).values)))
        iso = max(iso, abs((gu - gv).norm() - (u - v).norm()))
        # distance of link variables, preserved by a bi-invariant metric
        lu, lv = ps.segment_exponentials(u), ps.segment_exponentials(v)
        lgu, lgv = ps.segment_exponentials(gu), ps.segment_exponentials(gv)
        link_iso = max(link_iso, np.max(np.abs(lg.geodesic_distance(lgu, lgv) - lg.geodesic_distance(lu, lv))))
        target = lg.multiply(lg.multiply(g.nodes[0], ps.parallel_transport(u)), lg.inverse(g.nodes[-1]))
        equi = max(equi, lg.angle(lg.multiply(ps.parallel_transport(gu), lg.inverse(target))))

    ranks = []
    for _ in range(p["points"]):
        u = ps.DiscretePath(a, m, rng.normal(size=(m, 3)))
        sv = np.linalg.svd(ps.transport_jacobian(u), compute_uv=False)
        ranks.append(int(np.sum(sv > 1e-8 * sv[0])))
    write_rows(Path(out) / "rank.csv", ["point", "rank"], [[k, r] for k, r in enumerate(ranks)])
    checks = [
        at_most("constant_path_residual", const_res, 1e-10),
        at_most("action_law_residual", action, 1e-8),
        at_most("isometry_residual", iso, 1e-8),
        at_most("equivariance_residual", equi, 1e-8),
        at_least("min_transport_rank", min(ranks), 3),
    ]
    return checks, {"link_isometry_residual": float(link_iso)}


def fibre_probe(p, out):
    rng = np.random.default_rng(p["seed"])
    a, m = p["a"], p["m"]
    probe = ps.fibre_mean_curvature_probe(ps.DiscretePath.zeros(a, m), trunc=p["trunc"])
    cu, c1, c2 = rng.normal(size=3), rng.normal(size=3), rng.normal(size=3)
    residuals = []
    for mm in (m, 2 * m):
        u = _smooth_path(a, mm, cu)
        jac = ps.transport_jacobian(u)
        h1 = ps.horizontal_projection(u, _smooth_path(a, mm, c1), jac)
        h2 = ps.horizontal_projection(u, _smooth_path(a, mm, c2), jac)
        residuals.append(ps.submersion_residual(u, h1, h2, jac=jac))
    write_rows(Path(out) / "submersion.csv", ["m", "residual"],
               [[m, residuals[0]], [2 * m, residuals[1]]])
    checks = [
        at_most("fibre_probe_magnitude", abs(probe), 1e-3),
        at_least("submersion_residual_reduction", residuals[0] / residuals[1], 2.0),
    ]
    return checks, {"probe": probe, "residual_m": residuals[0], "residual_2m": residuals[1]}


def sobolev(p, out):
    params = ob.SobolevParams(alpha=p["alpha"], alpha_hat=p["alpha_hat"])
    pairs = ob.sobolev_suite(p["seed"], p["count"], p["level"], p["meshes"])
    rows, fails = [], 0
    for k, (mesh, rho) in enumerate(pairs):
        rep = ob.sobolev_test(mesh, rho, params, mesh_tol=p["mesh_tol"])
        fails += not rep.passed
        rows.append([k, rep.lhs, rep.rhs, rep.ratio, rep.supp_volume, int(rep.passed)])
    write_rows(Path(out) / "sobolev.csv", ["pair", "lhs", "rhs", "ratio", "supp_volume", "passed"], rows)
    r = p["check_radius"]
    sphere = ob.geodesic_sphere(r, level=p["level"])
    rep = ob.sobolev_test(sphere, np.ones(len(sphere.vertices)), params)
    area = 4.0 * np.pi * np.sin(r) ** 2
    exact_rhs = ob.sobolev_constant(params) * 2.0 / np.tan(r) * area
    checks = [
        at_most("violations", fails, 0),
        at_most("sphere_lhs_relative_error", abs(rep.lhs / np.sqrt(area) - 1.0), 1e-3),
        at_most("sphere_rhs_relative_error", abs(rep.rhs / exact_rhs - 1.0), 1e-3),
    ]
    return checks, {"worst_ratio": max(row[3] for row in rows), "constant": ob.sobolev_constant(params)}


def myers(p, out):
    rng = np.random.default_rng(p["seed"])
    surfaces = [("sphere", r, ob.geodesic_sphere(r, lg.random_elements(rng), p["level"]))
                for r in _floats(p["radii"])]
    for k in range(p["ellipsoids"]):
        r = rng.uniform(0.3, 1.0)
        surfaces.append(("ellipsoid", r, ob.ellipsoidal_surface(
            r, 1.0 + rng.uniform(-0.1, 0.1, 3), lg.random_elements(rng), p["level"])))
    surfaces.append(("euclidean", 1.0, ob.euclidean_sphere(1.0, p["level"])))
    rows, fails, lam_err, diam_err = [], 0, 0.0, 0.0
    for kind, r, mesh in surfaces:
        try:
            rep = ob.myers_check(mesh, p["mesh_tol"])
        except NotConvex:
            fails += 1
            rows.append([kind, r, float("nan"), float("nan"), float("nan"), 0])
            continue
        fails += not rep.passed
        rows.append([kind, r, rep.K, rep.diameter, rep.bound, int(rep.passed)])
        if kind == "sphere":
            lam_err = max(lam_err, np.max(np.abs(mesh.principal_curvatures * np.tan(r) - 1.0)))
            diam_err = max(diam_err, abs(rep.diameter / (np.pi * np.sin(r)) - 1.0))
    write_rows(Path(out) / "myers.csv", ["surface", "radius", "K", "diameter", "bound", "passed"], rows)
    checks = [
        at_most("myers_failures", fails, 0),
        at_most("sphere_curvature_relative_error", lam_err, 1e-3),
        at_most("sphere_diameter_relative_error", diam_err, 1e-3),
    ]
    return checks, {"surfaces": len(surfaces)}


def _test_function_gradient(x):
    x0, x1, x2, x3 = np.moveaxis(x, -1, 0)
    return np.stack([np.exp(x3) + 2 * x0 * x1, x2 + x0 * x0, x1, np.exp(x3) * x0], -1)


def _test_function_gradient_symmetric(x):
    # gradient of f = x0 + x3^2 + (x1^2 + x2^2) x3, invariant under rotation about the third axis
    x0, x1, x2, x3 = np.moveaxis(x, -1, 0)
    return np.stack([np.ones_like(x0), 2 * x1 * x3, 2 * x2 * x3, 2 * x3 + x1 * x1 + x2 * x2], -1)


def divergence(p, out):
    rng = np.random.default_rng(p["seed"])
    r, order = p["radius"], p["order"]
    center = lg.random_elements(rng) if order == 1 else lg.identity()
    axis = rng.normal(size=3) if order == 1 else np.array([0.0, 0.0, 1.0])
    grad = _test_function_gradient if order == 1 else _test_function_gradient_symmetric
    killing = ob.killing_field(axis, center)
    gradient = ob.gradient_field(grad, r, center)
    kill = ob.divergence_theorem_check(killing, r, 100, 100, center, order)
    levels = [int(x) for x in _floats(p["n_z_levels"])]
    res = [abs(ob.divergence_theorem_check(gradient, r, n, p["n_phi"], center, order)) for n in levels]
    rate = -float(np.polyfit(np.log(levels), np.log(res), 1)[0])
    write_rows(Path(out) / "divergence.csv", ["n_z", "gradient_residual"],
               [[n, v] for n, v in zip(levels, res)])
    checks = [
        at_most("killing_residual", abs(kill), 1e-6),
        at_most("gradient_residual", res[-1], 1e-5),
        at_least("refinement_rate", rate, 1.8),
    ]
    return checks, {}


EXPERIMENTS = {
    "sphere_flow": sphere_flow,
    "profile_flow": profile_flow,
    "volume_law": volume_law,
    "trace": trace,
    "holonomy": holonomy,
    "fibre_probe": fibre_probe,
    "sobolev": sobolev,
    "myers": myers,
    "divergence": divergence,
}
