"""Piecewise-linear scalar fields on a TriMesh.

A field stores one value per vertex and is linear on every triangle.  Two
Lipschitz constants are available: ``lipschitz_L`` is the maximum edge slope
``|f(a) - f(b)| / |a - b|`` and ``gradient_L`` is the maximum per-triangle
gradient norm.  Only the second one bounds ``|f(x) - f(y)| / d(x, y)`` for
points inside triangles, so the bounds and coarea checks use it.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .io import atomic_write_text
from .mesh import DEFAULT_SUBDIVISION, TriMesh, geodesic_distances

__all__ = [
    "FieldError",
    "InfeasiblePerturbation",
    "ScalarField",
    "CriticalityScan",
    "height_field",
    "distance_field",
    "epsilon_p",
    "EpsilonP",
    "make_excellent",
    "criticality_scan",
    "load_sidecar",
    "save_sidecar",
]


class FieldError(ValueError):
    pass


class InfeasiblePerturbation(FieldError):
    def __init__(self, message, min_epsilon):
        super().__init__(message)
        self.min_epsilon = min_epsilon


class ScalarField:
    """Per-vertex values of a PL function on ``mesh``."""

    def __init__(self, mesh: TriMesh, values, name: str = "field"):
        v = np.array(values, dtype=float)
        if v.shape != (mesh.n_vertices,):
            raise FieldError(f"expected {mesh.n_vertices} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise FieldError("field values must be finite")
        v.setflags(write=False)
        self.mesh = mesh
        self.values = v
        self.name = name
        self._order = None

    @property
    def lipschitz_L(self) -> float:
        return float(self.edge_slopes().max())

    def edge_slopes(self) -> np.ndarray:
        e = self.mesh.edges
        return np.abs(self.values[e[:, 1]] - self.values[e[:, 0]]) / self.mesh.edge_lengths

    @property
    def gradient_L(self) -> float:
        """Largest per-triangle gradient norm.

        This is the Lipschitz constant of the PL function for the geodesic
        metric of the surface and is never smaller than ``lipschitz_L``.
        """
        return float(self.triangle_gradients().max())

    def triangle_gradients(self) -> np.ndarray:
        """Norm of the gradient of the field restricted to each triangle."""
        t = self.mesh.triangles
        p = self.mesh.vertices[t]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        f = self.values[t]
        d1, d2 = f[:, 1] - f[:, 0], f[:, 2] - f[:, 0]
        g11 = (e1 * e1).sum(1)
        g12 = (e1 * e2).sum(1)
        g22 = (e2 * e2).sum(1)
        det = g11 * g22 - g12 * g12
        # |grad|^2 = d^T G^{-1} d for the Gram matrix G of the two edge vectors
        sq = (g22 * d1 * d1 - 2 * g12 * d1 * d2 + g11 * d2 * d2) / det
        return np.sqrt(np.maximum(sq, 0.0))

    @property
    def distinct(self) -> bool:
        return len(np.unique(self.values)) == len(self.values)

    @property
    def order(self) -> np.ndarray:
        """Vertices sorted by (value, index)."""
        if self._order is None:
            self._order = np.lexsort((np.arange(len(self.values)), self.values))
        return self._order

    @property
    def range(self) -> tuple[float, float]:
        return float(self.values.min()), float(self.values.max())

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.mesh, -self.values, name=f"-{self.name}")

    def shifted(self, c: float) -> "ScalarField":
        return ScalarField(self.mesh, self.values + c, name=self.name)

    def __repr__(self):
        lo, hi = self.range
        return f"ScalarField({self.name!r}, range=[{lo:.6g}, {hi:.6g}], L={self.lipschitz_L:.6g})"


def height_field(mesh: TriMesh, axis=(0.0, 0.0, 1.0)) -> ScalarField:
    """Height ``<position, axis>`` along a (normalised) axis."""
    a = np.asarray(axis, dtype=float)
    n = np.linalg.norm(a)
    if not n > 0:
        raise FieldError("axis must be nonzero")
    a = a / n
    return ScalarField(mesh, mesh.vertices @ a, name=f"height:{','.join(f'{x:g}' for x in a)}")


def distance_field(mesh: TriMesh, p: int, subdivision: int = DEFAULT_SUBDIVISION) -> ScalarField:
    """Geodesic distance to vertex ``p``."""
    mesh.require_connected("distance_field")
    if not 0 <= p < mesh.n_vertices:
        raise IndexError(f"vertex {p} out of range")
    d = geodesic_distances(mesh, [p], subdivision).distances
    return ScalarField(mesh, d, name=f"distance:{p}")


@dataclass(frozen=True)
class EpsilonP:
    eps: float
    shift_c: float


def epsilon_p(field: ScalarField, p: int, optimize_shift: bool = True,
              subdivision: int = DEFAULT_SUBDIVISION) -> EpsilonP:
    """Sup-distance between ``field`` and ``d(p, .)`` over the vertices.

    With ``optimize_shift`` the best additive constant ``c`` is applied,
    giving half the oscillation of ``f - d(p, .)``.
    """
    field.mesh.require_connected("epsilon_p")
    d = geodesic_distances(field.mesh, [p], subdivision).distances
    g = field.values - d
    if optimize_shift:
        lo, hi = float(g.min()), float(g.max())
        return EpsilonP(eps=(hi - lo) / 2, shift_c=-(lo + hi) / 2)
    return EpsilonP(eps=float(np.abs(g).max()), shift_c=0.0)


def make_excellent(field: ScalarField, epsilon: float = 1e-9, delta: float = 1e-9) -> ScalarField:
    """Break ties so that all vertex values are pairwise distinct.

    Vertex ``v`` of rank ``k`` in (value, index) order is raised by
    ``eta * k / V`` with ``eta = min(epsilon, delta * shortest_edge)``, which keeps
    the sup-norm change below ``epsilon`` and every edge slope change below
    ``delta``.  An already distinct field is returned unchanged.
    """
    if not epsilon > 0 or not delta > 0:
        raise FieldError("epsilon and delta must be positive")
    if field.distinct:
        return field
    n = len(field.values)
    eta = min(epsilon, delta * float(field.mesh.edge_lengths.min()))
    rank = np.empty(n)
    rank[field.order] = np.arange(n)
    out = field.values + eta * rank / n
    if len(np.unique(out)) != n:
        scale = float(np.abs(field.values).max()) or 1.0
        need = 4.0 * n * float(np.spacing(scale))
        shortest = float(field.mesh.edge_lengths.min())
        raise InfeasiblePerturbation(
            f"perturbation {eta:.3g} is below floating point resolution; "
            f"need epsilon >= {need:.3g} and delta >= {need / shortest:.3g}",
            min_epsilon=need,
        )
    return ScalarField(field.mesh, out, name=field.name)


@dataclass(frozen=True)
class CriticalityScan:
    """PL critical point classification of a distinct-valued field.

    ``kind`` is 0 for regular, 1 for minimum, 2 for maximum and 3 for saddle;
    ``multiplicity`` is the number of lower-link components minus one for
    saddles (1 for extrema, 0 for regular vertices).
    """

    kind: np.ndarray
    lower_components: np.ndarray
    upper_components: np.ndarray
    multiplicity: np.ndarray
    critical_vertices: np.ndarray
    critical_values: np.ndarray

    REGULAR, MIN, MAX, SADDLE = 0, 1, 2, 3

    @property
    def n_min(self) -> int:
        return int((self.kind == self.MIN).sum())

    @property
    def n_max(self) -> int:
        return int((self.kind == self.MAX).sum())

    @property
    def n_saddles(self) -> int:
        return int((self.kind == self.SADDLE).sum())

    @property
    def saddle_multiplicity(self) -> int:
        return int(self.multiplicity[self.kind == self.SADDLE].sum())

    @property
    def index_sum(self) -> int:
        return self.n_min + self.n_max - self.saddle_multiplicity

    @property
    def excellent(self) -> bool:
        return len(np.unique(self.critical_values)) == len(self.critical_values)

    def to_dict(self):
        return {
            "minima": self.n_min,
            "maxima": self.n_max,
            "saddles": self.n_saddles,
            "saddle_multiplicity": self.saddle_multiplicity,
            "index_sum": self.index_sum,
            "excellent": self.excellent,
            "critical_values": self.critical_values.tolist(),
        }


def link_components(field: ScalarField):
    """Number of lower- and upper-link components of every vertex.

    The link of a vertex of a closed surface is a cycle, so the lower link has
    ``(#lower neighbours) - (#link edges with both ends lower)`` arcs unless
    the whole cycle is lower.
    """
    mesh = field.mesh
    nv = mesh.n_vertices
    rank = np.empty(nv, dtype=np.int64)
    rank[field.order] = np.arange(nv)
    e = mesh.edges
    deg = np.bincount(e.ravel(), minlength=nv)
    a_low = rank[e[:, 0]] < rank[e[:, 1]]
    low_of = np.where(a_low, e[:, 1], e[:, 0])  # endpoint that has a lower neighbour
    n_lower = np.bincount(low_of, minlength=nv)
    n_upper = deg - n_lower
    t = mesh.triangles
    r = rank[t]
    le = np.zeros(nv, dtype=np.int64)
    ue = np.zeros(nv, dtype=np.int64)
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        both_low = (r[:, j] < r[:, i]) & (r[:, k] < r[:, i])
        both_up = (r[:, j] > r[:, i]) & (r[:, k] > r[:, i])
        le += np.bincount(t[both_low, i], minlength=nv)
        ue += np.bincount(t[both_up, i], minlength=nv)
    lower = np.where(n_lower == deg, 1, n_lower - le)
    upper = np.where(n_upper == deg, 1, n_upper - ue)
    lower[n_lower == 0] = 0
    upper[n_upper == 0] = 0
    return lower, upper


def criticality_scan(field: ScalarField) -> CriticalityScan:
    if not field.distinct:
        raise FieldError("criticality_scan needs pairwise distinct values; call make_excellent first")
    lower, upper = link_components(field)
    kind = np.zeros(len(lower), dtype=np.int8)
    kind[lower == 0] = CriticalityScan.MIN
    kind[upper == 0] = CriticalityScan.MAX
    kind[(lower >= 2)] = CriticalityScan.SADDLE
    mult = np.zeros(len(lower), dtype=np.int64)
    mult[kind == CriticalityScan.SADDLE] = lower[kind == CriticalityScan.SADDLE] - 1
    mult[(kind == CriticalityScan.MIN) | (kind == CriticalityScan.MAX)] = 1
    crit = np.flatnonzero(kind != 0)
    crit = crit[np.argsort(field.values[crit], kind="stable")]
    return CriticalityScan(kind, lower, upper, mult, crit, field.values[crit])


# -- sidecar files --------------------------------------------------------------------


def load_sidecar(mesh: TriMesh, path) -> ScalarField:
    """Read one value per line (line ``i`` is vertex ``i``)."""
    vals = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            try:
                vals.append(float(s))
            except ValueError:
                raise FieldError(f"{path}:{lineno}: cannot parse value {s!r}") from None
    if len(vals) != mesh.n_vertices:
        raise FieldError(f"{path}: {len(vals)} values for {mesh.n_vertices} vertices")
    return ScalarField(mesh, vals, name=f"sidecar:{Path(path).name}")


def save_sidecar(field: ScalarField, path) -> None:
    atomic_write_text(path, "".join(f"{x!r}\n" for x in field.values.tolist()))
