"""Triangulated closed surfaces, edge-graph geodesics and global metric statistics.

Geodesic distances are shortest paths in a *Steiner graph*: every mesh edge
is split into ``subdivision`` equal segments and all boundary points of a
triangle are joined pairwise by straight chords through the triangle.  With
``subdivision=1`` this is the plain edge graph.  All distances are upper
bounds on the polyhedral geodesic distance.

Edge weights are rounded to a dyadic grid, so every path length is an exact
floating point sum.  Shortest-path values therefore do not depend on the order
in which edges are relaxed, which makes ``d(a, b) == d(b, a)`` hold exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

logger = logging.getLogger(__name__)

EXACT_DIAMETER_MAX_VERTICES = 3000
DEFAULT_LANDMARKS = 64
DEFAULT_SUBDIVISION = 4

__all__ = [
    "MeshError",
    "TriMesh",
    "SteinerGraph",
    "GeodesicIndex",
    "MeshStats",
    "load_mesh",
    "save_off",
    "geodesic_distances",
    "mesh_stats",
]


class MeshError(ValueError):
    """Raised for unreadable or invalid meshes."""


class TriMesh:
    """Closed triangulated surface embedded in R^3.

    Parameters
    ----------
    vertices : array_like, shape (V, 3)
    triangles : array_like of int, shape (F, 3)

    Notes
    -----
    Construction validates the closed-manifold invariants: every edge lies in
    exactly two triangles, every vertex link is a single cycle, and all edge
    lengths are positive.  Meshes with several connected components are
    accepted; ``components`` records the count and operations that need a
    connected surface check :meth:`require_connected`.
    """

    dimension = 2

    def __init__(self, vertices, triangles):
        v = np.asarray(vertices, dtype=float)
        t = np.asarray(triangles, dtype=np.int64)
        if v.size == 0 or t.size == 0:
            raise MeshError("empty mesh")
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError(f"vertices must have shape (V, 3), got {v.shape}")
        if t.ndim != 2 or t.shape[1] != 3:
            raise MeshError(f"triangles must have shape (F, 3), got {t.shape}")
        if not np.all(np.isfinite(v)):
            raise MeshError("non-finite vertex coordinate")
        if t.min() < 0 or t.max() >= len(v):
            bad = int(np.flatnonzero((t < 0).any(1) | (t >= len(v)).any(1))[0])
            raise MeshError(f"triangle {bad} has a vertex index out of range")
        degenerate = (t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])
        if degenerate.any():
            raise MeshError(f"triangle {int(np.flatnonzero(degenerate)[0])} repeats a vertex")

        self.vertices = v
        self.triangles = t
        self._build_edges()
        self._check_manifold()
        self.components, self.vertex_component = csgraph.connected_components(
            self.adjacency(), directed=False
        )
        used = np.zeros(len(v), dtype=bool)
        used[t.ravel()] = True
        if not used.all():
            raise MeshError(f"vertex {int(np.flatnonzero(~used)[0])} is not used by any triangle")
        for arr in (self.vertices, self.triangles, self.edges, self.edge_lengths,
                    self.tri_edges, self.edge_tris):
            arr.setflags(write=False)
        self._cache: dict = {}

    # -- construction helpers -------------------------------------------------

    def _build_edges(self):
        t = self.triangles
        half = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        half.sort(axis=1)
        edges, inverse, counts = np.unique(half, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.ravel()
        bad = np.flatnonzero(counts != 2)
        if len(bad):
            a, b = edges[bad[0]]
            raise MeshError(
                f"non-manifold edge ({a}, {b}) shared by {counts[bad[0]]} triangle(s); "
                f"{len(bad)} offending edge(s) in total"
            )
        nf = len(t)
        self.edges = edges
        self.tri_edges = inverse.reshape(3, nf).T.copy()
        order = np.argsort(inverse, kind="stable")
        self.edge_tris = (order % nf).reshape(-1, 2)
        d = self.vertices[edges[:, 1]] - self.vertices[edges[:, 0]]
        self.edge_lengths = np.sqrt((d * d).sum(1))
        if np.any(self.edge_lengths <= 0):
            a, b = edges[np.flatnonzero(self.edge_lengths <= 0)[0]]
            raise MeshError(f"edge ({a}, {b}) has zero length")

    def _check_manifold(self):
        # Each vertex link must be one cycle: join the incidences (v, a) and
        # (v, b) for every triangle (v, a, b) and count components per vertex.
        t = self.triangles
        nv = len(self.vertices)
        inc = np.concatenate([self.edges, self.edges[:, ::-1]])  # (2E, 2): (v, nbr)
        inc_id = inc[:, 0] * nv + inc[:, 1]
        order = np.argsort(inc_id)
        sorted_ids = inc_id[order]

        def lookup(v, w):
            return order[np.searchsorted(sorted_ids, v * nv + w)]

        rows, cols = [], []
        for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            rows.append(lookup(t[:, i], t[:, j]))
            cols.append(lookup(t[:, i], t[:, k]))
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        g = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(inc), len(inc)))
        ncomp, _ = csgraph.connected_components(g, directed=False)
        if ncomp != nv:
            labels = csgraph.connected_components(g, directed=False)[1]
            per_vertex = np.zeros(nv, dtype=int)
            seen = set()
            for idx, lab in zip(inc[:, 0], labels):
                if (idx, lab) not in seen:
                    seen.add((idx, lab))
                    per_vertex[idx] += 1
            bad = int(np.flatnonzero(per_vertex != 1)[0])
            raise MeshError(f"vertex {bad} is non-manifold (link has {per_vertex[bad]} cycles)")

    # -- accessors --------------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def euler(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    @property
    def is_connected(self) -> bool:
        return self.components == 1

    def require_connected(self, what: str = "this operation"):
        if not self.is_connected:
            raise MeshError(f"{what} needs a connected mesh; got {self.components} components")

    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric vertex adjacency weighted by Euclidean edge length."""
        e = self.edges
        n = self.n_vertices
        m = sparse.coo_matrix((self.edge_lengths, (e[:, 0], e[:, 1])), shape=(n, n))
        return (m + m.T).tocsr()

    def triangle_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        cr = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        return 0.5 * np.sqrt((cr * cr).sum(1))

    def edge_point(self, edge_ids, lams) -> np.ndarray:
        """Positions of points ``(1 - lam) * edges[:, 0] + lam * edges[:, 1]``."""
        e = self.edges[np.asarray(edge_ids)]
        lam = np.asarray(lams, dtype=float)[..., None]
        return (1.0 - lam) * self.vertices[e[..., 0]] + lam * self.vertices[e[..., 1]]

    def steiner(self, subdivision: int = DEFAULT_SUBDIVISION) -> "SteinerGraph":
        """Cached Steiner graph with the given edge subdivision."""
        key = ("steiner", int(subdivision))
        if key not in self._cache:
            self._cache[key] = SteinerGraph(self, subdivision)
        return self._cache[key]

    def relabeled(self, perm) -> "TriMesh":
        """Copy with vertex ``i`` moved to position ``perm[i]``."""
        perm = np.asarray(perm)
        v = np.empty_like(self.vertices)
        v[perm] = self.vertices
        return TriMesh(v, perm[self.triangles])

    def __repr__(self):
        return (f"TriMesh(V={self.n_vertices}, E={self.n_edges}, F={self.n_triangles}, "
                f"components={self.components})")


def _quantum(mesh: TriMesh) -> float:
    span = float(np.ptp(mesh.vertices, axis=0).max()) or 1.0
    return 2.0 ** (math.floor(math.log2(span)) - 36)


class SteinerGraph:
    """Edge-subdivided chord graph used for all geodesic computations.

    Node ``i < V`` is mesh vertex ``i``; node ``V + e*(s-1) + k - 1`` is the
    ``k``-th interior point of mesh edge ``e`` (``k = 1..s-1``).
    """

    def __init__(self, mesh: TriMesh, subdivision: int):
        s = int(subdivision)
        if s < 1:
            raise ValueError("subdivision must be >= 1")
        self.mesh = mesh
        self.subdivision = s
        self.quantum = _quantum(mesh)
        nv, ne = mesh.n_vertices, mesh.n_edges
        self.n_nodes = nv + ne * (s - 1)

        k = np.arange(1, s) / s
        inner = mesh.edge_point(np.repeat(np.arange(ne), s - 1), np.tile(k, ne))
        self.positions = np.vstack([mesh.vertices, inner.reshape(-1, 3)])

        # Nodes along every edge from edges[e,0] to edges[e,1], endpoints included.
        chain = np.empty((ne, s + 1), dtype=np.int64)
        chain[:, 0] = mesh.edges[:, 0]
        chain[:, s] = mesh.edges[:, 1]
        if s > 1:
            chain[:, 1:s] = nv + np.arange(ne)[:, None] * (s - 1) + np.arange(s - 1)[None, :]
        self.edge_chain = chain

        # Boundary nodes of each triangle (corners appear twice; harmless).
        self.tri_nodes = chain[mesh.tri_edges].reshape(len(mesh.triangles), -1)

        m = self.tri_nodes.shape[1]
        iu, ju = np.triu_indices(m, k=1)
        a = self.tri_nodes[:, iu].ravel()
        b = self.tri_nodes[:, ju].ravel()
        keep = a != b
        a, b = a[keep], b[keep]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        pairs = np.unique(lo * self.n_nodes + hi)
        lo, hi = pairs // self.n_nodes, pairs % self.n_nodes
        w = self._weights(self.positions[lo], self.positions[hi])
        self._coo = (lo, hi, w)
        self.matrix = sparse.csr_matrix((w, (lo, hi)), shape=(self.n_nodes, self.n_nodes))

    def _weights(self, p, q) -> np.ndarray:
        d = np.sqrt(((np.asarray(p) - np.asarray(q)) ** 2).sum(-1))
        w = np.maximum(np.round(d / self.quantum), 1.0) * self.quantum
        return w

    # -- queries ----------------------------------------------------------------

    def sweep(self, sources, matrix=None) -> np.ndarray:
        """Distance from the nearest source node to every node."""
        src = np.atleast_1d(np.asarray(sources, dtype=np.int64))
        return csgraph.dijkstra(self.matrix if matrix is None else matrix, directed=False,
                                indices=src, min_only=True)

    def sweeps(self, sources, matrix=None) -> np.ndarray:
        """One distance row per source node."""
        src = np.atleast_1d(np.asarray(sources, dtype=np.int64))
        return csgraph.dijkstra(self.matrix if matrix is None else matrix, directed=False,
                                indices=src)

    def point_links(self, edge_ids, lams):
        """Chords from surface points on mesh edges to the nodes of the two
        triangles incident to each edge.

        Returns ``(point_index, node, weight)`` arrays.
        """
        edge_ids = np.atleast_1d(np.asarray(edge_ids, dtype=np.int64))
        pts = self.mesh.edge_point(edge_ids, lams)
        nodes = self.tri_nodes[self.mesh.edge_tris[edge_ids]].reshape(len(edge_ids), -1)
        idx = np.repeat(np.arange(len(edge_ids)), nodes.shape[1])
        nodes = nodes.ravel()
        w = self._weights(pts[idx], self.positions[nodes])
        return idx, nodes, w

    def augmented(self, edge_ids, lams):
        """Graph with the given surface points inserted as extra nodes.

        Returns the matrix and the node ids of the inserted points.  Points
        that share a triangle are also joined by a direct chord.
        """
        edge_ids = np.atleast_1d(np.asarray(edge_ids, dtype=np.int64))
        lams = np.atleast_1d(np.asarray(lams, dtype=float))
        n = self.n_nodes + len(edge_ids)
        new_ids = self.n_nodes + np.arange(len(edge_ids))
        idx, nodes, w = self.point_links(edge_ids, lams)
        rows = [new_ids[idx]]
        cols = [nodes]
        wts = [w]

        # direct chords between points sharing a triangle
        tris = self.mesh.edge_tris[edge_ids].ravel()
        owner = np.repeat(np.arange(len(edge_ids)), 2)
        order = np.argsort(tris, kind="stable")
        tris, owner = tris[order], owner[order]
        pos = self.mesh.edge_point(edge_ids, lams)
        k = 1
        while k < len(tris):
            same = np.flatnonzero(tris[k:] == tris[:-k])
            if not len(same):
                break
            pa, pb = owner[same], owner[same + k]
            keep = pa != pb
            pa, pb = pa[keep], pb[keep]
            rows.append(new_ids[pa])
            cols.append(new_ids[pb])
            wts.append(self._weights(pos[pa], pos[pb]))
            k += 1
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        w = np.concatenate(wts)
        # new entries only touch new nodes, so deduplicating them suffices
        lo, hi = np.minimum(r, c), np.maximum(r, c)
        key = lo * n + hi
        order = np.lexsort((w, key))
        key, w = key[order], w[order]
        first = np.ones(len(key), dtype=bool)
        first[1:] = key[1:] != key[:-1]
        key, w = key[first], w[first]
        br, bc, bw = self._coo
        m = sparse.csr_matrix(
            (np.concatenate([bw, w]), (np.concatenate([br, key // n]), np.concatenate([bc, key % n]))),
            shape=(n, n),
        )
        return m, new_ids

    def eval_at_points(self, node_dist, edge_ids, lams) -> np.ndarray:
        """Extend node distances to surface points through their chords."""
        edge_ids = np.atleast_1d(np.asarray(edge_ids, dtype=np.int64))
        idx, nodes, w = self.point_links(edge_ids, lams)
        out = np.full(len(edge_ids), np.inf)
        np.minimum.at(out, idx, node_dist[nodes] + w)
        return out

    def vertex_all_pairs(self, chunk: int = 256) -> np.ndarray:
        """All-pairs geodesic distances between mesh vertices, shape (V, V)."""
        key = "all_pairs"
        cache = self.mesh._cache.setdefault(("ap", self.subdivision), {})
        if key not in cache:
            nv = self.mesh.n_vertices
            out = np.empty((nv, nv))
            for start in range(0, nv, chunk):
                src = np.arange(start, min(nv, start + chunk))
                out[start:start + len(src)] = self.sweeps(src)[:, :nv]
            out.setflags(write=False)
            cache[key] = out
        return cache[key]


@dataclass(frozen=True)
class GeodesicIndex:
    """Distances from a source set to every mesh vertex."""

    distances: np.ndarray
    sources: tuple
    subdivision: int
    provenance: str = "exact-all-pairs"

    def __getitem__(self, v):
        return self.distances[v]


@dataclass(frozen=True)
class MeshStats:
    diameter: float
    total_measure: float
    components: int
    diameter_mode: str
    subdivision: int

    @property
    def diameter_is_lower_bound(self) -> bool:
        return self.diameter_mode.startswith("landmarks")

    def to_dict(self) -> dict:
        return {
            "diameter": self.diameter,
            "total_measure": self.total_measure,
            "components": self.components,
            "diameter_mode": self.diameter_mode,
            "diameter_is_lower_bound": self.diameter_is_lower_bound,
            "subdivision": self.subdivision,
        }


# -- OFF input / output ---------------------------------------------------------


def _off_tokens(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line


def load_mesh(path) -> TriMesh:
    """Read an ASCII OFF file into a validated :class:`TriMesh`."""
    path = Path(path)
    if not path.exists():
        raise MeshError(f"{path}: no such file")
    lines = _off_tokens(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise MeshError(f"{path}: empty mesh file") from None
    parts = header.split()
    if parts[0] != "OFF":
        raise MeshError(f"{path}:{lineno}: expected 'OFF' header, got {parts[0]!r}")
    counts = parts[1:]
    if not counts:
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise MeshError(f"{path}: missing element counts") from None
        counts = line.split()
    try:
        nv, nf = int(counts[0]), int(counts[1])
    except (ValueError, IndexError):
        raise MeshError(f"{path}:{lineno}: bad element counts {' '.join(counts)!r}") from None
    if nv <= 0 or nf <= 0:
        raise MeshError(f"{path}: empty mesh ({nv} vertices, {nf} faces)")

    verts = np.empty((nv, 3))
    for i in range(nv):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise MeshError(f"{path}: expected {nv} vertices, file ended after {i}") from None
        try:
            verts[i] = [float(x) for x in line.split()[:3]]
        except ValueError:
            raise MeshError(f"{path}:{lineno}: cannot parse vertex {line!r}") from None
    tris = np.empty((nf, 3), dtype=np.int64)
    for i in range(nf):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise MeshError(f"{path}: expected {nf} faces, file ended after {i}") from None
        try:
            items = [int(x) for x in line.split()]
        except ValueError:
            raise MeshError(f"{path}:{lineno}: cannot parse face {line!r}") from None
        if len(items) < 4 or items[0] != 3 or len(items) < 1 + items[0]:
            raise MeshError(f"{path}:{lineno}: only triangular faces are supported, got {line!r}")
        tris[i] = items[1:4]
    try:
        return TriMesh(verts, tris)
    except MeshError as exc:
        raise MeshError(f"{path}: {exc}") from None


def save_off(mesh: TriMesh, path) -> None:
    from .io import atomic_write_text

    out = ["OFF", f"{mesh.n_vertices} {mesh.n_triangles} {mesh.n_edges}"]
    out += [f"{x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    out += [f"3 {a} {b} {c}" for a, b, c in mesh.triangles.tolist()]
    atomic_write_text(path, "\n".join(out) + "\n")


# -- geodesics and statistics -------------------------------------------------


def geodesic_distances(mesh: TriMesh, sources, subdivision: int = DEFAULT_SUBDIVISION) -> GeodesicIndex:
    """Shortest-path distance from the nearest source vertex to every vertex.

    Parameters
    ----------
    mesh : TriMesh
    sources : int or sequence of int
        Source vertex indices (nonempty).
    subdivision : int
        Segments per mesh edge in the Steiner graph (>= 1).
    """
    src = np.atleast_1d(np.asarray(sources, dtype=np.int64))
    if src.size == 0:
        raise ValueError("sources must be nonempty")
    if src.min() < 0 or src.max() >= mesh.n_vertices:
        raise IndexError(f"source vertex out of range [0, {mesh.n_vertices})")
    if subdivision < 1:
        raise ValueError("subdivision must be >= 1")
    g = mesh.steiner(subdivision)
    d = g.sweep(src)[: mesh.n_vertices]
    d.setflags(write=False)
    return GeodesicIndex(d, tuple(int(s) for s in src), int(subdivision), "exact-all-pairs")


def farthest_point_landmarks(mesh: TriMesh, count: int, subdivision: int = DEFAULT_SUBDIVISION,
                             start: int = 0):
    """Greedy farthest-point landmarks and their distance rows."""
    g = mesh.steiner(subdivision)
    nv = mesh.n_vertices
    count = min(count, nv)
    chosen = [start]
    rows = [g.sweeps([start])[0, :nv]]
    mind = rows[0].copy()
    while len(chosen) < count:
        nxt = int(np.argmax(mind))
        if mind[nxt] == 0:
            break
        chosen.append(nxt)
        rows.append(g.sweeps([nxt])[0, :nv])
        mind = np.minimum(mind, rows[-1])
    return np.array(chosen), np.array(rows)


def mesh_stats(mesh: TriMesh, diameter_mode: str = "auto", landmarks: int = DEFAULT_LANDMARKS,
               subdivision: int = DEFAULT_SUBDIVISION) -> MeshStats:
    """Diameter, total area and component count.

    ``diameter_mode`` is ``"exact"`` (max over all vertex pairs), ``"landmarks"``
    (max eccentricity of ``landmarks`` farthest-point landmarks, a lower bound)
    or ``"auto"`` (exact up to 3000 vertices).
    """
    if diameter_mode == "auto":
        diameter_mode = "exact" if mesh.n_vertices <= EXACT_DIAMETER_MAX_VERTICES else "landmarks"
    area = float(mesh.triangle_areas().sum())
    if diameter_mode == "exact":
        d = mesh.steiner(subdivision).vertex_all_pairs()
        diam = float(d[np.isfinite(d)].max())
        mode = "exact"
    elif diameter_mode == "landmarks":
        if landmarks < 1:
            raise ValueError("landmark count must be positive")
        _, rows = farthest_point_landmarks(mesh, landmarks, subdivision)
        diam = float(rows[np.isfinite(rows)].max())
        mode = f"landmarks({landmarks})"
    else:
        raise ValueError(f"unknown diameter mode {diameter_mode!r}")
    return MeshStats(diam, area, int(mesh.components), mode, int(subdivision))
