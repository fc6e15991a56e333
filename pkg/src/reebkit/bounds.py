"""Distortion of the Reeb quotient map and the bounds that control it.

``measured_distortion`` compares mesh geodesic distances with graph
distances between vertex images.  ``theorem_bound`` assembles the thickness
bound from its ingredients, ``prop45_bound`` the fiber-diameter bound, and
``comparison_audit`` tests the two fiber distance inequalities on random
configurations of graph points.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field as dc_field

import numpy as np
from scipy.sparse import csgraph

from .field import ScalarField, epsilon_p
from .homology import betti
from .io import atomic_write_text
from .levelsets import (DEFAULT_LEVELS_PER_INTERVAL, DEFAULT_SAMPLES, extract_level,
                        fiber_diameter_bound, thickness)
from .mesh import (DEFAULT_SUBDIVISION, EXACT_DIAMETER_MAX_VERTICES, TriMesh, farthest_point_landmarks,
                   mesh_stats)
from .reeb import GraphPoint, QuotientMap, ReebGraph, separates

__all__ = [
    "REPORT_SCHEMA",
    "DistortionResult",
    "BoundReport",
    "measured_distortion",
    "theorem_terms",
    "theorem_bound_value",
    "prop45_bound",
    "theorem_bound",
    "AuditRow",
    "AuditResult",
    "comparison_audit",
]

REPORT_SCHEMA = "reebkit-report-v1"
DEFAULT_SLACK = 0.05


@dataclass
class DistortionResult:
    value: float
    mode: str
    pairs: int
    worst_pair: tuple
    rows: list = dc_field(default_factory=list)  # per-source worst (i, j, d, d_f)

    @property
    def is_lower_bound(self) -> bool:
        return self.mode != "exact"

    def to_dict(self):
        return {"value": self.value, "mode": self.mode, "pairs": self.pairs,
                "worst_pair": list(self.worst_pair), "lower_bound": self.is_lower_bound}

    def csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["source", "target", "geodesic", "reeb", "gap"])
        for i, j, d, df in self.rows:
            w.writerow([i, j, repr(d), repr(df), repr(abs(d - df))])
        text = buf.getvalue()
        if path is not None:
            atomic_write_text(path, text)
        return text


def _check_graph(mesh: TriMesh, quotient: QuotientMap):
    if quotient.field.mesh is not mesh or len(quotient.points) != mesh.n_vertices:
        raise ValueError("quotient map was built for a different mesh")


def measured_distortion(mesh: TriMesh, field: ScalarField, graph: ReebGraph, quotient: QuotientMap,
                        pairs="exact", subdivision: int = DEFAULT_SUBDIVISION, seed: int = 0,
                        chunk: int = 256) -> DistortionResult:
    """``max |d(x, y) - d_f(pi x, pi y)|`` over vertex pairs.

    ``pairs="exact"`` uses every vertex pair.  An integer ``count`` picks that
    many farthest-point landmarks (first one drawn from ``seed``) and uses
    every (landmark, vertex) pair, which gives a lower bound on the exact
    value.
    """
    _check_graph(mesh, quotient)
    if quotient.field is not field:
        raise ValueError("quotient map was built for a different field")
    sg = mesh.steiner(subdivision)
    V = mesh.n_vertices
    allv = quotient.arrays
    if pairs == "exact":
        sources = np.arange(V)
        Dall = sg.vertex_all_pairs()
        mode = "exact"
    else:
        count = int(pairs)
        if count < 1:
            raise ValueError("pair count must be positive")
        start = int(np.random.default_rng(seed).integers(V))
        sources, Dall = farthest_point_landmarks(mesh, min(count, V), subdivision, start=start)
        mode = f"sampled({count})"
    best = (-1.0, (0, 0))
    rows = []
    for k in range(0, len(sources), chunk):
        src = sources[k:k + chunk]
        D = Dall[k:k + chunk] if mode != "exact" else Dall[src]
        sub = tuple(a[src] for a in allv)
        DF = graph.pairwise(sub, allv)
        gap = np.abs(D - DF)
        j = gap.argmax(1)
        for r, (i, jj) in enumerate(zip(src.tolist(), j.tolist())):
            rows.append((i, jj, float(D[r, jj]), float(DF[r, jj])))
            g = float(gap[r, jj])
            if g > best[0]:
                best = (g, (i, jj))
    return DistortionResult(value=best[0], mode=mode, pairs=len(sources) * V, worst_pair=best[1], rows=rows)


# -- bound formulas --------------------------------------------------------------------


def theorem_terms(n: int, b1: int, L: float, eps: float, T: float, diam: float, volume: float):
    """The three terms of the thickness bound: volume/thickness, eps and Lipschitz excess."""
    term_I = (2 ** (n + 1) * L / (b1 + 1) * volume / T) ** (1 / n)
    term_II = diam ** (1 / n) * eps ** ((n - 1) / n) + eps
    term_III = abs(L - 1) * diam
    return term_I, term_II, term_III


def theorem_bound_value(n: int, b1: int, L: float, eps: float, T: float, diam: float, volume: float) -> float:
    """``2 (b1+1)^2 (term_I + 16 term_II) + term_III``; ``inf`` when ``T <= 0``."""
    if not T > 0:
        return float("inf")
    t1, t2, t3 = theorem_terms(n, b1, L, eps, T, diam, volume)
    return 2 * (b1 + 1) ** 2 * (t1 + 16 * t2) + t3


def prop45_bound(b1: int, C: float, eps: float, L: float, diam: float) -> float:
    """``(2 b1 + 1)(C + 4 eps) + |L - 1| diam`` for fiber diameters at most ``C``."""
    return (2 * b1 + 1) * (C + 4 * eps) + abs(L - 1) * diam


@dataclass
class BoundReport:
    ingredients: dict
    term_I: float
    term_II: float
    term_III: float
    theorem_bound: float
    theorem_bound_unshifted: float
    fiber_C: float
    fiber_bound: float
    prop45_bound: float
    prop45_bound_fiber_bound: float
    measured_distortion: float
    pair_budget: dict
    slack: float = DEFAULT_SLACK
    schema: str = REPORT_SCHEMA

    @property
    def certified(self) -> bool:
        """Measured distortion, discounted by the geodesic slack, within the bound."""
        return self.measured_distortion * (1 - self.slack) <= self.theorem_bound

    @property
    def prop45_certified(self) -> bool:
        return self.measured_distortion * (1 - self.slack) <= self.prop45_bound

    def recompute(self) -> float:
        g = self.ingredients
        return theorem_bound_value(g["n"], g["b1"], g["L"], g["eps_p"], g["thickness"],
                                   g["diam_X"], g["volume"])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["certified"] = self.certified
        d["prop45_certified"] = self.prop45_certified
        return d


def theorem_bound(mesh: TriMesh, field: ScalarField, p: int, graph: ReebGraph | None = None,
                  quotient: QuotientMap | None = None, pairs="auto", subdivision: int = DEFAULT_SUBDIVISION,
                  levels_per_interval: int = DEFAULT_LEVELS_PER_INTERVAL, samples: int = DEFAULT_SAMPLES,
                  landmarks: int = 64, seed: int = 0, slack: float = DEFAULT_SLACK,
                  thickness_result=None) -> BoundReport:
    """Full bound report for ``field`` with base vertex ``p``.

    ``L`` is the gradient bound of the field (its exact Lipschitz constant on
    the surface); the bound uses the shift-optimised ``eps_p`` and also
    reports the unshifted variant.  ``pairs="auto"`` measures distortion
    exactly up to ``EXACT_DIAMETER_MAX_VERTICES`` vertices and otherwise on
    ``landmarks`` farthest-point sources.
    """
    from .reeb import build_reeb

    mesh.require_connected("theorem_bound")
    if not 0 <= p < mesh.n_vertices:
        raise IndexError(f"vertex {p} out of range")
    if graph is None or quotient is None:
        graph, quotient = build_reeb(field)
    n = 2
    b1 = betti(mesh).b1
    L = field.gradient_L
    ep = epsilon_p(field, p, True, subdivision)
    ep0 = epsilon_p(field, p, False, subdivision)
    stats = mesh_stats(mesh, "auto", landmarks, subdivision)
    th = thickness_result or thickness(field, levels_per_interval, samples, subdivision)
    T = th.T
    if not T > 0:
        raise ValueError("thickness is zero; the bound is unbounded")
    diam, vol = stats.diameter, stats.total_measure
    t1, t2, t3 = theorem_terms(n, b1, L, ep.eps, T, diam, vol)
    bound = theorem_bound_value(n, b1, L, ep.eps, T, diam, vol)
    bound0 = theorem_bound_value(n, b1, L, ep0.eps, T, diam, vol)
    C = th.max_component_diameter
    from .homology import BettiProfile
    Cb = fiber_diameter_bound(field, p, BettiProfile(0, b1, mesh.euler), stats, T, ep.eps, n, subdivision)
    if pairs == "auto":
        pairs = "exact" if mesh.n_vertices <= EXACT_DIAMETER_MAX_VERTICES else landmarks
    dist = measured_distortion(mesh, field, graph, quotient, pairs, subdivision, seed)
    ingredients = {
        "n": n, "b1": b1, "L": L, "L_edge": field.lipschitz_L,
        "eps_p": ep.eps, "eps_p_shift": ep.shift_c, "eps_p_unshifted": ep0.eps,
        "thickness": T, "thickness_argmin": th.argmin_level, "thickness_sampling": th.sampling,
        "diam_X": diam, "diam_mode": stats.diameter_mode, "volume": vol, "p": int(p),
        "subdivision": subdivision,
    }
    return BoundReport(
        ingredients=ingredients, term_I=t1, term_II=t2, term_III=t3,
        theorem_bound=bound, theorem_bound_unshifted=bound0,
        fiber_C=C, fiber_bound=Cb,
        prop45_bound=prop45_bound(b1, C, ep.eps, L, diam),
        prop45_bound_fiber_bound=prop45_bound(b1, Cb, ep.eps, L, diam),
        measured_distortion=dist.value, pair_budget=dist.to_dict(), slack=slack,
    )


# -- fiber inequality audits ------------------------------------------------------------


@dataclass(frozen=True)
class AuditRow:
    trial: int
    check: str  # "point_to_fiber" or "fiber_to_fiber"
    r: dict
    s: dict
    lhs: float
    rhs: float
    holds: bool


@dataclass
class AuditResult:
    rows: list
    skipped: int
    eps: float
    slack: float

    @property
    def violations(self) -> int:
        return sum(not r.holds for r in self.rows)

    def counts(self) -> dict:
        out = {}
        for r in self.rows:
            out[r.check] = out.get(r.check, 0) + 1
        return out

    def to_dict(self):
        return {"checked": self.counts(), "skipped": self.skipped, "violations": self.violations,
                "eps_p": self.eps, "slack": self.slack,
                "rows": [asdict(r) for r in self.rows]}


def _fiber(graph: ReebGraph, field: ScalarField, pt: GraphPoint):
    """Polyline vertices of the level component that maps to the arc point ``pt``."""
    sl = extract_level(field, pt.value)
    if sl.t != pt.value:
        return None
    for comp in sl.components:
        q = graph.locate(int(comp.edge_ids[0]), pt.value)
        if not q.is_node and q.arc == pt.arc:
            return comp
    return None


def _random_arc_point(graph: ReebGraph, rng, values) -> GraphPoint | None:
    w = graph.lengths / graph.lengths.sum()
    a = int(rng.choice(graph.n_arcs, p=w))
    lo, hi = graph.node_values[graph.arcs[a]]
    t = float(rng.uniform(lo, hi))
    if not lo < t < hi or np.any(values == t):
        return None
    return GraphPoint(t, arc=a)


def _point_on_path(graph: ReebGraph, path, rng) -> GraphPoint | None:
    segs = []
    for p, q in zip(path, path[1:]):
        arc = p.arc if not p.is_node else (q.arc if not q.is_node else None)
        if arc is None:
            cand = [k for k, (a, b) in enumerate(graph.arcs.tolist()) if {a, b} == {p.node, q.node}]
            arc = min(cand, key=lambda k: graph.lengths[k])
        segs.append((arc, p.value, q.value))
    lens = np.array([abs(b - a) for _, a, b in segs])
    if lens.sum() == 0:
        return None
    k = int(rng.choice(len(segs), p=lens / lens.sum()))
    arc, a, b = segs[k]
    t = float(a + (b - a) * rng.uniform())
    lo, hi = graph.node_values[graph.arcs[arc]]
    if not lo < t < hi:
        return None
    return GraphPoint(t, arc=arc)


def comparison_audit(mesh: TriMesh, field: ScalarField, p: int, graph: ReebGraph, quotient: QuotientMap,
                     trials: int = 200, seed: int = 0, slack: float = DEFAULT_SLACK,
                     subdivision: int = DEFAULT_SUBDIVISION, distance=None) -> AuditResult:
    """Check the point-to-fiber and fiber-to-fiber inequalities on random trials.

    Each trial draws arc points ``r`` and ``s`` (``s`` on a shortest path from
    ``r`` to ``theta = pi(p)`` half of the time, ``s = r`` occasionally) and
    tests, when their separation hypotheses hold:

    * ``s`` separates ``r`` from ``theta``:
      ``max_{x in C_r} dist(x, C_s) <= d_f(r, s) + 2 eps``;
    * ``{r, s}`` separates the interior of a shortest ``r``-``s`` path from
      ``theta``: ``dist(C_r, C_s) <= d_f(r, s) + 4 eps``.

    ``eps`` is the shift-optimised sup-distance to ``d(p, .)``; the left sides
    are compared with ``(1 + slack)`` times the right sides.  ``distance``
    overrides the graph metric (used to exercise the failure path).
    """
    _check_graph(mesh, quotient)
    rng = np.random.default_rng(seed)
    dist = distance or graph.distance
    theta = quotient[p]
    eps = epsilon_p(field, p, True, subdivision).eps
    sg = mesh.steiner(subdivision)
    values = field.values
    rows, skipped = [], 0
    for trial in range(trials):
        r = _random_arc_point(graph, rng, values)
        if r is None:
            skipped += 1
            continue
        mode = rng.uniform()
        if mode < 0.1:
            s = r
        elif mode < 0.55:
            s = _point_on_path(graph, graph.shortest_path(r, theta), rng)
        else:
            s = _random_arc_point(graph, rng, values)
        if s is None or (s.key() != r.key() and np.any(values == s.value)):
            skipped += 1
            continue
        h42 = separates(graph, [s], r, theta)
        h43 = False
        if s.key() != r.key():
            path = graph.shortest_path(r, s)
            probe = _point_on_path(graph, path, rng)
            h43 = probe is not None and probe.key() not in (r.key(), s.key()) \
                and separates(graph, [r, s], probe, theta)
        if not (h42 or h43):
            skipped += 1
            continue
        Cr = _fiber(graph, field, r)
        Cs = Cr if s.key() == r.key() else _fiber(graph, field, s)
        if Cr is None or Cs is None:
            skipped += 1
            continue
        m, ids = sg.augmented(Cs.edge_ids, Cs.lams)
        node_d = csgraph.dijkstra(m, directed=False, indices=ids, min_only=True)
        to_s = sg.eval_at_points(node_d[:sg.n_nodes], Cr.edge_ids, Cr.lams)
        if s.key() == r.key():
            to_s = np.zeros_like(to_s)
        dfs = dist(r, s)
        if h42:
            lhs, rhs = float(to_s.max()), dfs + 2 * eps
            rows.append(AuditRow(trial, "point_to_fiber", r.to_dict(), s.to_dict(), lhs, rhs,
                                 bool(lhs <= rhs * (1 + slack))))
        if h43:
            lhs, rhs = float(to_s.min()), dfs + 4 * eps
            rows.append(AuditRow(trial, "fiber_to_fiber", r.to_dict(), s.to_dict(), lhs, rhs,
                                 bool(lhs <= rhs * (1 + slack))))
    return AuditResult(rows=rows, skipped=skipped, eps=eps, slack=slack)
