"""Level sets of PL fields: extraction, length, diameter and thickness.

A level set at a regular value is a disjoint union of closed polylines whose
vertices lie on mesh edges.  Component diameters are measured in the
geodesic metric of the surface, on the Steiner graph with the polyline
vertices inserted.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import sparse
from scipy.integrate import trapezoid
from scipy.sparse import csgraph

from .field import FieldError, ScalarField, criticality_scan, epsilon_p
from .homology import BettiProfile
from .io import atomic_write_text
from .mesh import DEFAULT_SUBDIVISION, MeshStats, TriMesh

__all__ = [
    "LevelComponent",
    "LevelSetSlice",
    "ThicknessResult",
    "extract_level",
    "component_diameter",
    "thickness",
    "sample_levels",
    "coarea_check",
    "CoareaResult",
    "sublevel_area",
    "fiber_diameter_bound",
    "diam_sum_check",
    "per_level_csv",
]

DEFAULT_SAMPLES = 32
DEFAULT_LEVELS_PER_INTERVAL = 8
NUDGE = 1e-9


@dataclass
class LevelComponent:
    """Closed polyline of a level set; vertex ``i`` lies on ``edge_ids[i]``."""

    edge_ids: np.ndarray
    lams: np.ndarray
    points: np.ndarray
    measure: float
    diameter: float | None = None

    @property
    def thickness(self) -> float:
        if self.diameter is None:
            raise ValueError("diameter not computed yet")
        if self.diameter == 0:
            return 1.0
        return self.measure / self.diameter

    def __len__(self):
        return len(self.edge_ids)


@dataclass
class LevelSetSlice:
    t: float
    requested: float
    components: list
    is_regular: bool = True

    @property
    def nudged(self) -> bool:
        return self.t != self.requested

    @property
    def measure(self) -> float:
        return float(sum(c.measure for c in self.components))


def _regular_level(values: np.ndarray, t: float) -> float:
    """``t`` moved off the vertex values, toward the middle of the range."""
    lo, hi = float(values.min()), float(values.max())
    if not np.any(values == t):
        return t
    step = NUDGE * (hi - lo)
    direction = 1.0 if t < 0.5 * (lo + hi) else -1.0
    cand = t + direction * step
    if np.any(values == cand) or not lo < cand < hi:
        # fall back to the midpoint of the gap to the next vertex value
        others = values[values > t] if direction > 0 else values[values < t]
        nxt = others.min() if direction > 0 else others.max()
        cand = 0.5 * (t + nxt)
    return float(cand)


def extract_level(field: ScalarField, t: float) -> LevelSetSlice:
    """Level set ``f = t`` as closed polylines.

    A ``t`` equal to a vertex value is nudged by ``1e-9`` of the value range
    toward the range midpoint; the returned slice records both values.
    """
    f = field.values
    lo, hi = field.range
    if not lo <= t <= hi:
        raise FieldError(f"level {t} outside field range [{lo}, {hi}]")
    if lo == hi:
        raise FieldError("constant field has no regular level")
    requested = float(t)
    t = _regular_level(f, float(t))
    mesh = field.mesh
    e = mesh.edges
    fa, fb = f[e[:, 0]], f[e[:, 1]]
    crossing = (fa - t) * (fb - t) < 0
    cross = np.flatnonzero(crossing)
    if len(cross) == 0:
        return LevelSetSlice(t=t, requested=requested, components=[])
    lam_all = np.zeros(len(e))
    lam_all[cross] = (t - fa[cross]) / (fb[cross] - fa[cross])
    # each straddling triangle links its two crossing edges
    te = mesh.tri_edges
    tc = crossing[te]
    tris = np.flatnonzero(tc.sum(1) == 2)
    pair = np.sort(np.where(tc[tris], te[tris], -1), axis=1)[:, 1:]
    local = np.full(len(e), -1, dtype=np.int64)
    local[cross] = np.arange(len(cross))
    a, b = local[pair[:, 0]], local[pair[:, 1]]
    n = len(cross)
    # neighbour table of the 2-regular crossing graph
    nbr = np.full((n, 2), -1, dtype=np.int64)
    fill = np.zeros(n, dtype=np.int64)
    for x, y in ((a, b), (b, a)):
        for i, j in zip(x.tolist(), y.tolist()):
            nbr[i, fill[i]] = j
            fill[i] += 1
    g = sparse.coo_matrix((np.ones(len(a)), (a, b)), shape=(n, n))
    ncomp, lab = csgraph.connected_components(g, directed=False)
    comps = []
    for c in range(ncomp):
        members = np.flatnonzero(lab == c)
        # canonical start: lowest edge id; direction toward the smaller neighbour
        start = members[np.argmin(cross[members])]
        order = [start]
        prev, cur = start, min(nbr[start], key=lambda j: cross[j])
        while cur != start:
            order.append(cur)
            x, y = nbr[cur]
            prev, cur = cur, (y if x == prev else x)
        order = np.array(order)
        eid = cross[order]
        lam = lam_all[eid]
        pts = mesh.edge_point(eid, lam)
        seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        comps.append(LevelComponent(edge_ids=eid, lams=lam, points=pts, measure=float(seg.sum())))
    comps.sort(key=lambda c: int(c.edge_ids[0]))
    return LevelSetSlice(t=t, requested=requested, components=comps)


def _sample_indices(comp: LevelComponent, samples: int) -> np.ndarray:
    """Polyline vertices nearest to ``samples`` evenly spaced arclength positions.

    Targets of ``samples`` are a subset of those of ``2 * samples``, so the
    resulting diameters are monotone under doubling.
    """
    n = len(comp)
    if samples >= n:
        return np.arange(n)
    seg = np.linalg.norm(np.roll(comp.points, -1, axis=0) - comp.points, axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)[:-1]])
    target = comp.measure * np.arange(samples) / samples
    k = np.searchsorted(s, target)
    k = np.clip(k, 1, n)
    left = k - 1
    right = k % n
    dl = target - s[left]
    dr = np.where(right == 0, comp.measure, s[right]) - target
    pick = np.where(dr < dl, right, left)
    return np.unique(pick)


def component_diameter(mesh: TriMesh, component: LevelComponent, samples: int = DEFAULT_SAMPLES,
                       subdivision: int = DEFAULT_SUBDIVISION) -> float:
    """Max geodesic distance between sampled polyline vertices.

    All polyline vertices are inserted into the Steiner graph (so the polyline
    itself is a path of the graph); Dijkstra runs from the sampled ones.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    if len(component) == 0:
        raise ValueError("empty component")
    sg = mesh.steiner(subdivision)
    m, ids = sg.augmented(component.edge_ids, component.lams)
    pick = ids[_sample_indices(component, samples)]
    # the polyline is a graph path, so no sampled pair is farther apart than
    # half its length; searching beyond that radius is wasted work
    limit = 0.5 * component.measure * (1 + 1e-6) + 1e-12
    d = csgraph.dijkstra(m, directed=False, indices=pick, limit=limit)[:, pick]
    if not np.all(np.isfinite(d)):
        d = csgraph.dijkstra(m, directed=False, indices=pick)[:, pick]
    diam = float(d.max())
    component.diameter = diam
    return diam


# -- thickness ----------------------------------------------------------------------


@dataclass
class ThicknessResult:
    T: float
    argmin_level: float | None
    per_level: list = dc_field(default_factory=list)  # (t, component, measure, diameter, thickness)
    levels: list = dc_field(default_factory=list)
    sampling: dict = dc_field(default_factory=dict)

    def to_dict(self):
        return {
            "T": self.T,
            "argmin_level": self.argmin_level,
            "sampling": self.sampling,
            "n_levels": len(self.levels),
        }

    @property
    def max_component_diameter(self) -> float:
        return max((r[3] for r in self.per_level), default=0.0)


def sample_levels(field: ScalarField, m: int = DEFAULT_LEVELS_PER_INTERVAL, within=None) -> np.ndarray:
    """Midpoints between consecutive critical values plus ``m`` evenly spaced
    values inside each critical interval, optionally clipped to ``within``."""
    if m < 0:
        raise ValueError("m must be >= 0")
    cv = criticality_scan(field).critical_values
    out = []
    for a, b in zip(cv[:-1], cv[1:]):
        out.append(0.5 * (a + b))
        out.extend(a + (b - a) * np.arange(1, m + 1) / (m + 1))
    out = np.array(sorted(set(out)))
    if within is not None:
        lo, hi = within
        out = out[(out > lo) & (out < hi)]
    return out


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("REEBKIT_THREADS", "1")))
    except ValueError:
        return 1


def _level_rows(field, t, samples, subdivision):
    sl = extract_level(field, t)
    rows = []
    for k, comp in enumerate(sl.components):
        d = component_diameter(field.mesh, comp, samples, subdivision)
        rows.append((sl.t, k, comp.measure, d, comp.thickness))
    return rows


def thickness(field: ScalarField, m: int = DEFAULT_LEVELS_PER_INTERVAL, samples: int = DEFAULT_SAMPLES,
              subdivision: int = DEFAULT_SUBDIVISION, levels=None, within=None) -> ThicknessResult:
    """Sampled thickness ``T(f)``: the minimum component thickness over levels.

    ``levels`` overrides the default sampling; ``within=(lo, hi)`` restricts
    the default sampling to an open value range.
    """
    if not field.distinct:
        raise FieldError("thickness needs pairwise distinct values; call make_excellent first")
    explicit = levels is not None
    if levels is None:
        levels = sample_levels(field, m, within)
    levels = [float(t) for t in levels]
    if _threads() > 1 and len(levels) > 1:
        with ThreadPoolExecutor(_threads()) as pool:
            chunks = list(pool.map(lambda t: _level_rows(field, t, samples, subdivision), levels))
    else:
        chunks = [_level_rows(field, t, samples, subdivision) for t in levels]
    rows = [r for c in chunks for r in c]
    sampling = {"levels_per_interval": m, "samples": samples, "subdivision": subdivision,
                "explicit_levels": explicit}
    if not rows:
        return ThicknessResult(T=float("inf"), argmin_level=None, per_level=[], levels=levels, sampling=sampling)
    best = min(rows, key=lambda r: (r[4], r[0], r[1]))
    return ThicknessResult(T=float(best[4]), argmin_level=float(best[0]), per_level=rows,
                           levels=levels, sampling=sampling)


def per_level_csv(result: ThicknessResult, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "component", "measure", "diameter", "thickness"])
    for t, k, mu, d, th in result.per_level:
        w.writerow([repr(t), k, repr(mu), repr(d), repr(th)])
    text = buf.getvalue()
    if path is not None:
        atomic_write_text(path, text)
    return text


# -- coarea --------------------------------------------------------------------------


def sublevel_area(field: ScalarField, t: float) -> float:
    """Area of ``{f <= t}`` with each triangle clipped linearly."""
    mesh = field.mesh
    area = mesh.triangle_areas()
    v = np.sort(field.values[mesh.triangles], axis=1)
    a, b, c = v[:, 0], v[:, 1], v[:, 2]
    frac = np.zeros(len(area))
    frac[t >= c] = 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        low = (a < t) & (t <= b) & (t < c)
        frac_low = (t - a) ** 2 / ((b - a) * (c - a))
        high = (b < t) & (t < c)
        frac_high = 1.0 - (c - t) ** 2 / ((c - a) * (c - b))
    frac = np.where(low, frac_low, frac)
    frac = np.where(high, frac_high, frac)
    return float((area * frac).sum())


@dataclass(frozen=True)
class CoareaResult:
    lhs: float
    rhs: float
    holds: bool
    t0: float
    t1: float

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "holds": self.holds, "t0": self.t0, "t1": self.t1}


def coarea_check(field: ScalarField, t0: float, t1: float, m: int = 33, rel_tol: float = 0.02) -> CoareaResult:
    """Area of ``t0 <= f <= t1`` against the trapezoid integral of level length / L.

    ``L`` is the gradient bound ``field.gradient_L``; the max edge slope can
    be smaller than the true Lipschitz constant and would break the inequality.
    """
    lo, hi = field.range
    if not t0 < t1:
        raise FieldError(f"degenerate interval [{t0}, {t1}]")
    if t0 < lo or t1 > hi:
        raise FieldError(f"interval [{t0}, {t1}] outside field range [{lo}, {hi}]")
    if m < 2:
        raise ValueError("m must be >= 2")
    L = field.gradient_L
    if not L > 0:
        raise FieldError("field must not be constant")
    lhs = sublevel_area(field, t1) - sublevel_area(field, t0)
    ts = np.linspace(t0, t1, m)
    mu = np.array([extract_level(field, t).measure if lo < t < hi else 0.0 for t in ts])
    rhs = float(trapezoid(mu, ts) / L)
    return CoareaResult(lhs=lhs, rhs=rhs, holds=bool(lhs >= rhs * (1 - rel_tol)), t0=t0, t1=t1)


# -- fiber diameter bounds ------------------------------------------------------------


def fiber_diameter_bound(field: ScalarField, p: int, report: BettiProfile, stats: MeshStats,
                         T: float, eps: float | None = None, n: int = 2,
                         subdivision: int = DEFAULT_SUBDIVISION) -> float:
    """Upper bound on the diameter of any level-set component.

    ``max(8(b+1) eps, (2^(n+1) L (b+1)^(n-1) mu / T)^(1/n) + 8(b+1) diam^(1/n) eps^((n-1)/n))``
    with ``eps`` the shift-optimised sup-distance between ``f`` and ``d(p, .)``.
    Returns ``inf`` when ``T`` is not positive.
    """
    if not T > 0:
        return float("inf")
    if eps is None:
        eps = epsilon_p(field, p, True, subdivision).eps
    b = report.b1
    L = field.gradient_L
    first = 8 * (b + 1) * eps
    second = (2 ** (n + 1) * L * (b + 1) ** (n - 1) * stats.total_measure / T) ** (1 / n) \
        + 8 * (b + 1) * stats.diameter ** (1 / n) * eps ** ((n - 1) / n)
    return float(max(first, second))


def diam_sum_check(field: ScalarField, p: int, b1: int, T: float, triples: int = 50,
                   eps: float | None = None, rel_slack: float = 0.10, seed: int = 0,
                   samples: int = DEFAULT_SAMPLES, subdivision: int = DEFAULT_SUBDIVISION):
    """Level length below a component versus its diameter.

    For random regular ``t0 < t`` above ``f(p)`` and a component ``A`` of
    ``f = t``, checks ``length(f = t0) >= T (diam A - 2 (b1 + 1)(t - t0 + 2 eps))``
    with relative slack.  Returns a list of dict rows, one per tested triple
    (triples whose right side is not positive are reported as vacuous).
    """
    rng = np.random.default_rng(seed)
    if eps is None:
        eps = epsilon_p(field, p, True, subdivision).eps
    fp = float(field.values[p])
    lo, hi = field.range
    rows = []
    if not fp < hi:
        return rows
    for _ in range(triples):
        t0, t = np.sort(rng.uniform(fp, hi, size=2))
        s0 = extract_level(field, t0)
        s1 = extract_level(field, t)
        if not s1.components:
            continue
        comp = s1.components[int(rng.integers(len(s1.components)))]
        d = component_diameter(field.mesh, comp, samples, subdivision)
        rhs = T * (d - 2 * (b1 + 1) * (s1.t - s0.t + 2 * eps))
        lhs = s0.measure
        rows.append({
            "t0": s0.t, "t": s1.t, "diameter": d, "lhs": lhs, "rhs": rhs,
            "vacuous": bool(rhs <= 0), "holds": bool(rhs <= 0 or lhs >= rhs * (1 - rel_slack)),
        })
    return rows
