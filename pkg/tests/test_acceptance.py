"""Acceptance criteria, one test each; every test records a pass/fail line."""

import math
import time

import numpy as np

from conftest import record
from reebkit.bounds import comparison_audit, measured_distortion
from reebkit.cli import main
from reebkit.field import height_field, make_excellent
from reebkit.generators import (closed_forms, fork_bound, gen_sphere, gen_thickened_graph, graph_bound,
                                parse_spec, sphere_thickness)
from reebkit.homology import betti
from reebkit.levelsets import coarea_check, diam_sum_check, thickness
from reebkit.mesh import save_off
from reebkit.reeb import build_reeb, preimage_connected
from reebkit.suite import suite_names


def test_criterion_1_closed_forms():
    checks = [
        math.isclose(sphere_thickness(1), 2.0, rel_tol=1e-12),
        math.isclose(sphere_thickness(2), 4 / math.pi, rel_tol=1e-12),
        math.isclose(closed_forms("sphere_thickness(2)"), 4 / math.pi, rel_tol=1e-12),
        fork_bound(2, 2) == 1.0,
        math.isclose(fork_bound(2, 3), 2 / 3, rel_tol=0, abs_tol=1e-15),
        closed_forms("fork_bound(2, 3)") == fork_bound(2, 3),
    ]
    ok = all(checks)
    record(1, ok, f"sphere_thickness(1)={sphere_thickness(1)!r}, sphere_thickness(2)={sphere_thickness(2)!r}, "
                  f"fork_bound(2,2)={fork_bound(2, 2)!r}, fork_bound(2,3)={fork_bound(2, 3)!r}")
    assert ok


def test_criterion_2_sphere_thickness():
    mesh = gen_sphere(1.0, 4)
    f = make_excellent(height_field(mesh))
    t0 = time.perf_counter()
    res = thickness(f)
    dt = time.perf_counter() - t0
    ok = 1.86 <= res.T <= 2.10 and dt < 30
    record(2, ok, f"T = {res.T:.5f} in [1.86, 2.10] at t = {res.argmin_level:.3g}, {dt:.1f} s (< 30 s)")
    assert ok


def test_criterion_3_theorem_certification(suite):
    t0 = time.perf_counter()
    lines, violations = [], 0
    for name in suite_names():
        rep = suite.report(name)
        if not rep.certified:
            violations += 1
        lines.append(f"{name}: {rep.measured_distortion:.3f} <= {rep.theorem_bound:.1f}")
    dt = time.perf_counter() - t0
    ok = violations == 0 and dt < 600
    record(3, ok, f"{len(lines)} cases, {violations} violations, {dt:.0f} s (< 600 s); " + "; ".join(lines))
    assert ok


def test_criterion_4_distortion_ground_truth():
    mesh = gen_sphere(1.0, 3)
    f = make_excellent(height_field(mesh))
    t0 = time.perf_counter()
    g, q = build_reeb(f)
    res = measured_distortion(mesh, f, g, q, "exact")
    dt = time.perf_counter() - t0
    ok = 0.95 * math.pi <= res.value <= 1.05 * math.pi and dt < 60 and res.mode == "exact"
    record(4, ok, f"exact distortion {res.value:.5f} = {res.value / math.pi:.4f} pi, {dt:.1f} s (< 60 s)")
    assert ok


def _lipschitz_checks(case, graph, quotient, rng):
    """Quotient map is L-Lipschitz and f is 1-Lipschitz on the graph (1000 pairs each)."""
    mesh, f = case.mesh, case.field
    sg = mesh.steiner()
    src = rng.choice(mesh.n_vertices, 50, replace=False)
    D = sg.sweeps(src)[:, :mesh.n_vertices]
    L = f.gradient_L
    bad = 0
    for i, s in enumerate(src):
        for t in rng.choice(mesh.n_vertices, 20, replace=False):
            df = graph.distance(quotient[s], quotient[t])
            if df > L * D[i, t] * (1 + 1e-9) + 1e-12:
                bad += 1
    # d_f is a sum of value differences, so allow rounding at the ulp level
    ulps = 8 * np.spacing(np.abs(graph.node_values).max())
    vals = []
    for _ in range(1000):
        pts = []
        for _ in range(2):
            a = int(rng.integers(graph.n_arcs))
            lo, hi = graph.node_values[graph.arcs[a]]
            pts.append(graph.point(a, float(rng.uniform(lo, hi))))
        vals.append(abs(pts[0].value - pts[1].value) <= graph.distance(*pts) + ulps)
    return bad, int(np.sum(~np.array(vals)))


def test_criterion_5_invariant_suites(suite):
    rng = np.random.default_rng(2024)
    problems = []
    for name in suite_names():
        c = suite.case(name)
        g, q = suite.reeb(name)
        th = suite.thickness(name)
        rep = suite.report(name)
        b = betti(c.mesh)
        bad_pi, bad_f = _lipschitz_checks(c, g, q, rng)
        if bad_pi or bad_f:
            problems.append(f"{name}: Lipschitz failures {bad_pi}/{bad_f}")
        if g.degrees.max() > 3:
            problems.append(f"{name}: degree {g.degrees.max()}")
        if g.b1_graph > b.b1:
            problems.append(f"{name}: b1_graph {g.b1_graph} > {b.b1}")
        if not all(preimage_connected(g, q, a) for a in range(g.n_arcs)):
            problems.append(f"{name}: disconnected arc preimage")
        tmin = min(r[4] for r in th.per_level)
        if tmin < 0.95:
            problems.append(f"{name}: component thickness {tmin:.3f}")
        lo, hi = c.field.range
        for _ in range(20):
            t0, t1 = np.sort(rng.uniform(lo, hi, 2))
            if not coarea_check(c.field, float(t0), float(t1)).holds:
                problems.append(f"{name}: coarea fails on [{t0:.3g}, {t1:.3g}]")
        rows = diam_sum_check(c.field, c.p, b.b1, th.T, triples=50, eps=rep.ingredients["eps_p"], seed=7)
        if not all(r["holds"] for r in rows):
            problems.append(f"{name}: level length vs diameter check fails")
        if th.max_component_diameter > rep.fiber_bound:
            problems.append(f"{name}: fiber diameter {th.max_component_diameter:.3f} > {rep.fiber_bound:.3f}")
        audit = comparison_audit(c.mesh, c.field, c.p, g, q, trials=200, seed=11)
        if audit.violations:
            problems.append(f"{name}: {audit.violations} fiber distance violations")
    ok = not problems
    record(5, ok, f"{len(suite_names())} meshes; " + ("all invariant checks pass" if ok else "; ".join(problems)))
    assert ok


def test_criterion_6_gluing():
    spec = parse_spec("layer = cap_bottom\nlayer = fork(2)\nlayer = inverse_fork(2)\nlayer = cap_top\n")
    tg = gen_thickened_graph(spec)
    f = make_excellent(tg.field)
    z = [r[0] for r in tg.layer_ranges] + [tg.layer_ranges[-1][1]]
    cut = z[2]  # top of the fork block, bottom of the inverse fork block
    ta = thickness(f, within=(z[0], cut)).T
    tb = thickness(f, within=(cut, z[-1])).T
    tc = thickness(f).T
    m = min(ta, tb)
    ok = abs(tc - m) <= 0.05 * m
    record(6, ok, f"T(combined) = {tc:.5f}, T(A) = {ta:.5f}, T(B) = {tb:.5f}")
    assert ok


def test_criterion_7_graph_bound(suite):
    specs = {
        "fork2": None, "fork3": None, "glued": None,
        "theta": "layer = cap_bottom\nlayer = fork(2)\nlayer = inverse_fork(2)\nlayer = cap_top\n",
        "fork4": "layer = cap_bottom\nlayer = fork(4)\nlayer = cap_top, cap_top, cap_top, cap_top\n",
    }
    lines, ok = [], True
    for name, text in specs.items():
        if text is None:
            K, T = suite.case(name).K, suite.thickness(name).T
        else:
            tg = gen_thickened_graph(parse_spec(text))
            K, T = tg.K, thickness(make_excellent(tg.field)).T
        bound = graph_bound(2, K)
        ok &= T >= bound - 0.05
        lines.append(f"{name}: T={T:.4f} >= {bound:.4f} - 0.05")
    record(7, ok, "; ".join(lines))
    assert ok


def test_criterion_8_determinism(tmp_path):
    mesh = gen_sphere(1.0, 2)
    save_off(mesh, tmp_path / "s.off")
    argv = ["bound", "--mesh", str(tmp_path / "s.off"), "--field", "height:z", "--p", "south",
            "--out", str(tmp_path / "out"), "--no-timestamp"]
    assert main(argv) == 0
    first = (tmp_path / "out" / "report.json").read_bytes()
    assert main(argv) == 0
    second = (tmp_path / "out" / "report.json").read_bytes()
    ok = first == second
    record(8, ok, f"two bound runs, {len(first)} bytes, identical = {ok}")
    assert ok
