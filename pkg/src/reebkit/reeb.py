"""Reeb graph of a distinct-valued PL field on a closed surface.

Nodes are the critical vertices.  Arcs are the connected components of the
surface with the *critical contours* removed (the level-set component through
each critical vertex).  Every mesh edge is cut where it crosses a critical
contour; the resulting edge pieces are glued through regular vertices and
through triangles (two pieces on edges of one triangle touch the same
open strip iff their open value ranges overlap), and the union-find classes
of pieces are the arcs.

Points of the graph are ``GraphPoint`` values: a node, or an arc together
with a value strictly inside the arc's span.  ``d_f`` is the shortest-path
metric with arc length equal to the value span.
"""

from __future__ import annotations

import heapq
import itertools
import json
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .field import FieldError, ScalarField, criticality_scan
from .homology import graph_b1
from .io import atomic_write_text, dumps_json

__all__ = [
    "ReebError",
    "GraphPoint",
    "ReebGraph",
    "QuotientMap",
    "build_reeb",
    "reeb_distance",
    "separates",
    "split_points",
]


class ReebError(RuntimeError):
    pass


@dataclass(frozen=True)
class GraphPoint:
    """A node (``arc is None``) or an interior point of an arc."""

    value: float
    node: int | None = None
    arc: int | None = None

    def __post_init__(self):
        if (self.node is None) == (self.arc is None):
            raise ValueError("GraphPoint needs exactly one of node / arc")

    @property
    def is_node(self) -> bool:
        return self.node is not None

    def key(self):
        return ("n", self.node) if self.is_node else ("a", self.arc, self.value)

    def to_dict(self):
        return {"node": self.node, "arc": self.arc, "value": self.value}


class ReebGraph:
    """Metric graph with arc lengths equal to value spans.

    Attributes
    ----------
    node_values : ndarray (N,)
    node_vertex : ndarray (N,)  mesh vertex realising each node
    arcs : ndarray (A, 2)        (lower node, upper node)
    """

    def __init__(self, node_values, node_vertex, arcs, piece_table=None):
        self.node_values = np.asarray(node_values, dtype=float)
        self.node_vertex = np.asarray(node_vertex, dtype=np.int64)
        self.arcs = np.asarray(arcs, dtype=np.int64).reshape(-1, 2)
        if np.any(self.node_values[self.arcs[:, 1]] < self.node_values[self.arcs[:, 0]]):
            raise ReebError("arc with decreasing values")
        self.lengths = self.node_values[self.arcs[:, 1]] - self.node_values[self.arcs[:, 0]]
        self._pieces = piece_table
        n = self.n_nodes
        if len(self.arcs):
            w = np.maximum(self.lengths, 0.0)
            # parallel arcs: keep the shortest; zero lengths must stay explicit edges
            best = {}
            for (a, b), l in zip(self.arcs.tolist(), w.tolist()):
                k = (min(a, b), max(a, b))
                if a != b and (k not in best or l < best[k]):
                    best[k] = l
            rows = [k[0] for k in best]
            cols = [k[1] for k in best]
            vals = [best[k] for k in best]
            m = sparse.csr_matrix((np.array(vals) + 0.0, (rows, cols)), shape=(n, n))
            m.data[m.data == 0] = 1e-300  # explicit zero-length arcs
            self.node_dist = csgraph.shortest_path(m, directed=False)
            self.node_dist[self.node_dist < 1e-200] = 0.0
        else:
            self.node_dist = np.zeros((n, n))

    @property
    def n_nodes(self) -> int:
        return len(self.node_values)

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    @property
    def degrees(self) -> np.ndarray:
        return np.bincount(self.arcs.ravel(), minlength=self.n_nodes)

    @property
    def b1_graph(self) -> int:
        return graph_b1(self.n_nodes, self.arcs.tolist())

    @property
    def is_connected(self) -> bool:
        if self.n_nodes == 0:
            return True
        return bool(np.all(np.isfinite(self.node_dist[0])))

    # -- points ------------------------------------------------------------------

    def node_point(self, node: int) -> GraphPoint:
        return GraphPoint(float(self.node_values[node]), node=int(node))

    def point(self, arc: int, value: float) -> GraphPoint:
        """Point of ``arc`` at ``value``; snaps to an end node at the span ends."""
        lo, hi = self.arcs[arc]
        vlo, vhi = self.node_values[lo], self.node_values[hi]
        if not vlo <= value <= vhi:
            raise ReebError(f"value {value} outside arc {arc} span [{vlo}, {vhi}]")
        if value == vlo:
            return self.node_point(lo)
        if value == vhi:
            return self.node_point(hi)
        return GraphPoint(float(value), arc=int(arc))

    def validate_point(self, p: GraphPoint):
        if p.is_node:
            if not 0 <= p.node < self.n_nodes or p.value != self.node_values[p.node]:
                raise ReebError(f"{p} is not a node of the graph")
        else:
            if not 0 <= p.arc < self.n_arcs:
                raise ReebError(f"{p} names a missing arc")
            lo, hi = self.arcs[p.arc]
            if not self.node_values[lo] < p.value < self.node_values[hi]:
                raise ReebError(f"{p} lies outside its arc")

    def _ends(self, p: GraphPoint):
        if p.is_node:
            return (p.node, 0.0), (p.node, 0.0)
        lo, hi = self.arcs[p.arc]
        return (lo, p.value - self.node_values[lo]), (hi, self.node_values[hi] - p.value)

    def distance(self, a: GraphPoint, b: GraphPoint) -> float:
        """``d_f(a, b)``."""
        best = np.inf
        for (i, di), (j, dj) in itertools.product(self._ends(a), self._ends(b)):
            best = min(best, di + self.node_dist[i, j] + dj)
        if not a.is_node and not b.is_node and a.arc == b.arc:
            best = min(best, abs(a.value - b.value))
        if a.key() == b.key():
            best = 0.0
        return float(best)

    def point_arrays(self, points):
        """Vectorised endpoint representation ``(lo, hi, dlo, dhi, arc)``."""
        n = len(points)
        lo = np.empty(n, dtype=np.int64)
        hi = np.empty(n, dtype=np.int64)
        dlo = np.empty(n)
        dhi = np.empty(n)
        arc = np.full(n, -1, dtype=np.int64)
        for k, p in enumerate(points):
            (lo[k], dlo[k]), (hi[k], dhi[k]) = self._ends(p)
            if not p.is_node:
                arc[k] = p.arc
        return lo, hi, dlo, dhi, arc

    def pairwise(self, rows, cols) -> np.ndarray:
        """``d_f`` between two point sets given as :meth:`point_arrays` tuples."""
        lo1, hi1, dl1, dh1, a1 = rows
        lo2, hi2, dl2, dh2, a2 = cols
        D = self.node_dist
        out = np.full((len(lo1), len(lo2)), np.inf)
        for n1, d1 in ((lo1, dl1), (hi1, dh1)):
            for n2, d2 in ((lo2, dl2), (hi2, dh2)):
                np.minimum(out, d1[:, None] + D[np.ix_(n1, n2)] + d2[None, :], out=out)
        same = (a1[:, None] == a2[None, :]) & (a1[:, None] >= 0)
        if same.any():
            direct = np.abs(dl1[:, None] - dl2[None, :])
            out = np.where(same, np.minimum(out, direct), out)
        return out

    # -- mesh edge location --------------------------------------------------------

    def locate(self, mesh_edge: int, value: float) -> GraphPoint:
        """Image under the quotient map of the point of ``mesh_edge`` at ``value``."""
        if self._pieces is None:
            raise ReebError("graph has no piece table")
        start, cuts, cut_nodes, piece_arc = self._pieces
        s, e = start[mesh_edge], start[mesh_edge + 1]
        # pieces s..e-1 of this edge; cuts between them
        c = cuts[s - mesh_edge:e - mesh_edge - 1]
        k = int(np.searchsorted(c, value))
        if k < len(c) and c[k] == value:
            return self.node_point(int(cut_nodes[s - mesh_edge + k]))
        arc = int(piece_arc[s + k])
        lo, hi = self.arcs[arc]
        if value <= self.node_values[lo]:
            return self.node_point(lo)
        if value >= self.node_values[hi]:
            return self.node_point(hi)
        return GraphPoint(float(value), arc=arc)

    def arcs_at(self, value: float) -> np.ndarray:
        """Arcs whose open span contains ``value``."""
        v = self.node_values
        return np.flatnonzero((v[self.arcs[:, 0]] < value) & (value < v[self.arcs[:, 1]]))

    # -- refined graph with inserted points -------------------------------------

    def _refined(self, points):
        """Adjacency of the graph with ``points`` inserted as extra nodes.

        Returns ``(adj, ids)``: ``adj[u]`` is a list of ``(v, length)`` and
        ``ids[k]`` is the refined node of ``points[k]``.
        """
        n = self.n_nodes
        ids = []
        on_arc = defaultdict(dict)  # arc -> value -> refined id
        nxt = n
        for p in points:
            if p.is_node:
                ids.append(p.node)
            else:
                slot = on_arc[p.arc]
                if p.value not in slot:
                    slot[p.value] = nxt
                    nxt += 1
                ids.append(slot[p.value])
        adj = [[] for _ in range(nxt)]
        for a, (lo, hi) in enumerate(self.arcs.tolist()):
            chain = [(self.node_values[lo], lo)]
            chain += sorted(on_arc.get(a, {}).items())
            chain.append((self.node_values[hi], hi))
            for (v1, u1), (v2, u2) in zip(chain, chain[1:]):
                adj[u1].append((u2, v2 - v1))
                adj[u2].append((u1, v2 - v1))
        return adj, ids

    def shortest_path(self, a: GraphPoint, b: GraphPoint) -> list[GraphPoint]:
        """Breakpoints of a shortest path from ``a`` to ``b`` (ends and nodes)."""
        self.validate_point(a)
        self.validate_point(b)
        if a.key() == b.key():
            return [a]
        adj, (ia, ib) = self._refined([a, b])
        dist = {ia: 0.0}
        prev = {}
        heap = [(0.0, ia)]
        while heap:
            d, u = heapq.heappop(heap)
            if u == ib:
                break
            if d > dist.get(u, np.inf):
                continue
            for v, w in adj[u]:
                nd = d + w
                if nd < dist.get(v, np.inf):
                    dist[v] = nd
                    prev[v] = u
                    heapq.heappush(heap, (nd, v))
        if ib not in dist:
            raise ReebError("points lie in different components")
        seq = [ib]
        while seq[-1] != ia:
            seq.append(prev[seq[-1]])
        seq.reverse()
        out = []
        for u in seq:
            if u == ia:
                out.append(a)
            elif u == ib:
                out.append(b)
            else:
                out.append(self.node_point(u))
        return out

    # -- export -----------------------------------------------------------------------

    def to_dict(self, quotient: "QuotientMap | None" = None) -> dict:
        deg = self.degrees
        d = {
            "nodes": [
                {"id": i, "value": float(v), "vertex": int(self.node_vertex[i]), "degree": int(deg[i])}
                for i, v in enumerate(self.node_values)
            ],
            "edges": [
                {"id": k, "lower": int(a), "upper": int(b), "length": float(l)}
                for k, ((a, b), l) in enumerate(zip(self.arcs.tolist(), self.lengths))
            ],
            "b1_graph": self.b1_graph,
        }
        if quotient is not None:
            d["vertex_image"] = [p.to_dict() for p in quotient.points]
        return d

    def to_json(self, quotient=None) -> str:
        return dumps_json(self.to_dict(quotient))

    def to_dot(self) -> str:
        lines = ["graph reeb {"]
        for i, v in enumerate(self.node_values):
            lines.append(f'  n{i} [label="{i}\\nf={v:.6g}"];')
        for k, ((a, b), l) in enumerate(zip(self.arcs.tolist(), self.lengths)):
            lines.append(f'  n{a} -- n{b} [label="{l:.4g}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"ReebGraph(nodes={self.n_nodes}, arcs={self.n_arcs}, b1={self.b1_graph})"


class QuotientMap:
    """Image of every mesh vertex in the Reeb graph."""

    def __init__(self, graph: ReebGraph, field: ScalarField, points):
        self.graph = graph
        self.field = field
        self.points = list(points)
        self.arrays = graph.point_arrays(self.points)
        self.theta: GraphPoint | None = None

    def __getitem__(self, v) -> GraphPoint:
        return self.points[v]

    def with_base_point(self, p: int) -> "QuotientMap":
        self.theta = self.points[p]
        return self

    def vertices_on_arc(self, arc: int) -> np.ndarray:
        return np.flatnonzero(self.arrays[4] == arc)


# -- construction --------------------------------------------------------------------------


def _critical_contours(field: ScalarField, crit_vertices):
    """For each critical vertex, the mesh edges its level-set component crosses."""
    mesh = field.mesh
    f = field.values
    e = mesh.edges
    fe = f[e]
    elo, ehi = fe.min(1), fe.max(1)
    t = mesh.triangles
    ft = f[t]
    tlo, thi = ft.min(1), ft.max(1)
    te = mesh.tri_edges
    out = []
    for c in crit_vertices:
        fc = f[c]
        cross = np.flatnonzero((elo < fc) & (fc < ehi))
        if len(cross) == 0:
            out.append(cross)
            continue
        local = np.full(len(e), -1, dtype=np.int64)
        local[cross] = np.arange(len(cross))
        hub = len(cross)
        tris = np.flatnonzero((tlo <= fc) & (fc <= thi))
        lt = local[te[tris]]  # (T, 3) local ids or -1
        has_c = (t[tris] == c).any(1)
        rows, cols = [], []
        # triangles with two crossing edges
        two = (lt >= 0).sum(1) == 2
        if two.any():
            sub = lt[two]
            sub = np.sort(sub, axis=1)[:, 1:]
            rows.append(sub[:, 0])
            cols.append(sub[:, 1])
        # triangles through the critical vertex whose opposite edge crosses
        one = has_c & ((lt >= 0).sum(1) == 1)
        if one.any():
            rows.append(lt[one].max(1))
            cols.append(np.full(int(one.sum()), hub))
        if rows:
            r = np.concatenate(rows)
            q = np.concatenate(cols)
        else:
            r = q = np.zeros(0, dtype=np.int64)
        g = sparse.coo_matrix((np.ones(len(r)), (r, q)), shape=(hub + 1, hub + 1))
        _, lab = csgraph.connected_components(g, directed=False)
        out.append(cross[lab[:hub] == lab[hub]])
    return out


def build_reeb(field: ScalarField) -> tuple[ReebGraph, QuotientMap]:
    """Reeb graph and quotient map of a distinct-valued field."""
    mesh = field.mesh
    mesh.require_connected("build_reeb")
    if not field.distinct:
        raise FieldError("build_reeb needs pairwise distinct values; call make_excellent first")
    scan = criticality_scan(field)
    f = field.values
    crit = scan.critical_vertices
    node_of_vertex = np.full(mesh.n_vertices, -1, dtype=np.int64)
    node_of_vertex[crit] = np.arange(len(crit))

    contours = _critical_contours(field, crit)
    ce, cv, cn = [], [], []
    for node, edges in enumerate(contours):
        ce.append(edges)
        cv.append(np.full(len(edges), f[crit[node]]))
        cn.append(np.full(len(edges), node))
    ce = np.concatenate(ce) if ce else np.zeros(0, dtype=np.int64)
    cv = np.concatenate(cv) if cv else np.zeros(0)
    cn = np.concatenate(cn) if cn else np.zeros(0, dtype=np.int64)
    order = np.lexsort((cv, ce))
    ce, cv, cn = ce[order], cv[order], cn[order]

    ne = mesh.n_edges
    ncuts = np.bincount(ce, minlength=ne)
    start = np.zeros(ne + 1, dtype=np.int64)
    start[1:] = np.cumsum(ncuts + 1)
    npieces = int(start[-1])
    cut_start = start[:-1] - np.arange(ne)  # index into cut arrays for edge e

    e = mesh.edges
    fe = f[e]
    lo_v = np.where(fe[:, 0] < fe[:, 1], e[:, 0], e[:, 1])
    hi_v = np.where(fe[:, 0] < fe[:, 1], e[:, 1], e[:, 0])

    # piece value ranges and end nodes
    plo = np.empty(npieces)
    phi = np.empty(npieces)
    plo_node = np.full(npieces, -1, dtype=np.int64)
    phi_node = np.full(npieces, -1, dtype=np.int64)
    first = start[:-1]
    last = start[1:] - 1
    plo[first] = f[lo_v]
    phi[last] = f[hi_v]
    plo_node[first] = node_of_vertex[lo_v]
    phi_node[last] = node_of_vertex[hi_v]
    if len(ce):
        k = np.arange(len(ce)) - cut_start[ce]  # cut rank within edge
        below = start[ce] + k  # piece ending at this cut
        phi[below] = cv
        phi_node[below] = cn
        plo[below + 1] = cv
        plo_node[below + 1] = cn

    rows, cols = [], []
    # glue pieces through regular vertices
    ends_v = np.concatenate([lo_v, hi_v])
    ends_p = np.concatenate([first, last])
    reg = node_of_vertex[ends_v] < 0
    ends_v, ends_p = ends_v[reg], ends_p[reg]
    o = np.argsort(ends_v, kind="stable")
    ends_v, ends_p = ends_v[o], ends_p[o]
    same = ends_v[1:] == ends_v[:-1]
    rows.append(ends_p[1:][same])
    cols.append(ends_p[:-1][same])
    vertex_piece = np.full(mesh.n_vertices, -1, dtype=np.int64)
    vertex_piece[ends_v] = ends_p

    # glue pieces through triangles
    te = mesh.tri_edges
    multi = ncuts > 0
    for i, j in ((0, 1), (1, 2), (0, 2)):
        a, b = te[:, i], te[:, j]
        simple = ~multi[a] & ~multi[b]
        pa, pb = first[a[simple]], first[b[simple]]
        ok = np.maximum(plo[pa], plo[pb]) < np.minimum(phi[pa], phi[pb])
        rows.append(pa[ok])
        cols.append(pb[ok])
        for ea, eb in zip(a[~simple].tolist(), b[~simple].tolist()):
            for qa in range(start[ea], start[ea + 1]):
                for qb in range(start[eb], start[eb + 1]):
                    if max(plo[qa], plo[qb]) < min(phi[qa], phi[qb]):
                        rows.append(np.array([qa]))
                        cols.append(np.array([qb]))
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    g = sparse.coo_matrix((np.ones(len(r)), (r, c)), shape=(npieces, npieces))
    n_arcs, piece_arc = csgraph.connected_components(g, directed=False)

    arc_lo = np.full(n_arcs, -1, dtype=np.int64)
    arc_hi = np.full(n_arcs, -1, dtype=np.int64)
    for ends, target in ((plo_node, arc_lo), (phi_node, arc_hi)):
        has = ends >= 0
        a_ids, nodes = piece_arc[has], ends[has]
        target[a_ids] = nodes
        if np.any(target[a_ids] != nodes):
            raise ReebError("arc touches two different critical contours at one end")
    if np.any(arc_lo < 0) or np.any(arc_hi < 0):
        raise ReebError("arc without an end node; mesh is not a closed surface?")

    node_values = list(f[crit])
    node_vertex = list(crit)
    arcs = np.stack([arc_lo, arc_hi], 1)
    arc_list, node_values, node_vertex = _split_multi_saddles(
        arcs, node_values, node_vertex, scan.multiplicity[crit]
    )

    graph = ReebGraph(node_values, node_vertex, arc_list,
                      piece_table=(start, cv, cn, piece_arc))
    points = []
    for v in range(mesh.n_vertices):
        n = node_of_vertex[v]
        if n >= 0:
            points.append(graph.node_point(int(n)))
        else:
            points.append(GraphPoint(float(f[v]), arc=int(piece_arc[vertex_piece[v]])))
    return graph, QuotientMap(graph, field, points)


def _split_multi_saddles(arcs, node_values, node_vertex, multiplicity):
    """Replace saddles of multiplicity ``m > 1`` or degree > 3 by chains.

    Chain nodes sit at successive floating point values above the saddle value;
    lower arcs attach to the first chain nodes and upper arcs to the last ones,
    so every chain node has degree at most 3.  The original node id is kept
    for the first chain node.
    """
    arcs = [list(a) for a in arcs.tolist()]
    node_values = [float(v) for v in node_values]
    node_vertex = [int(v) for v in node_vertex]
    n0 = len(node_values)
    lower = defaultdict(list)
    upper = defaultdict(list)
    for k, (a, b) in enumerate(arcs):
        upper[a].append(k)
        lower[b].append(k)
    for node in range(n0):
        lo, up = lower[node], upper[node]
        deg = len(lo) + len(up)
        m = int(multiplicity[node]) if lo and up else 1
        k = max(m, deg - 2, 1)
        if k == 1:
            continue
        chain = [node]
        v = node_values[node]
        for _ in range(k - 1):
            v = float(np.nextafter(v, np.inf))
            chain.append(len(node_values))
            node_values.append(v)
            node_vertex.append(node_vertex[node])
        for c1, c2 in zip(chain, chain[1:]):
            arcs.append([c1, c2])
        cap = [3 - (i > 0) - (i < k - 1) for i in range(k)]
        i = 0
        for a in lo:
            while cap[i] == 0:
                i += 1
            arcs[a][1] = chain[i]
            cap[i] -= 1
        i = k - 1
        for a in up:
            while cap[i] == 0:
                i -= 1
            arcs[a][0] = chain[i]
            cap[i] -= 1
    return np.array(arcs, dtype=np.int64).reshape(-1, 2), node_values, node_vertex


# -- metric queries on the graph --------------------------------------------------


def reeb_distance(graph: ReebGraph, a: GraphPoint, b: GraphPoint) -> float:
    graph.validate_point(a)
    graph.validate_point(b)
    return graph.distance(a, b)


def separates(graph: ReebGraph, cut, a: GraphPoint, b: GraphPoint) -> bool:
    """True iff every path from ``a`` to ``b`` meets a point of ``cut``."""
    cut = list(cut)
    keys = {p.key() for p in cut}
    if a.key() in keys or b.key() in keys:
        return True
    adj, ids = graph._refined(cut + [a, b])
    blocked = set(ids[: len(cut)])
    src, dst = ids[-2], ids[-1]
    seen = {src}
    stack = [src]
    while stack:
        u = stack.pop()
        if u == dst:
            return False
        for v, _ in adj[u]:
            if v not in seen and v not in blocked:
                seen.add(v)
                stack.append(v)
    return dst not in seen


class _PathParam:
    """Arc-length parametrisation of a breakpoint path."""

    def __init__(self, graph: ReebGraph, breaks):
        self.graph = graph
        self.breaks = breaks
        self.segs = []  # (s0, s1, arc, v0, v1)
        s = 0.0
        for p, q in zip(breaks, breaks[1:]):
            arc = _common_arc(graph, p, q)
            length = abs(q.value - p.value)
            self.segs.append((s, s + length, arc, p.value, q.value))
            s += length
        self.total = s
        self.break_s = [0.0] + [seg[1] for seg in self.segs]

    def at(self, s: float) -> GraphPoint:
        for s0, s1, arc, v0, v1 in self.segs:
            if s0 <= s <= s1:
                t = (s - s0) / (s1 - s0) if s1 > s0 else 0.0
                return self.graph.point(arc, v0 + t * (v1 - v0))
        raise ReebError("parameter outside path")


def _common_arc(graph: ReebGraph, p: GraphPoint, q: GraphPoint) -> int:
    if not p.is_node:
        return p.arc
    if not q.is_node:
        return q.arc
    best = None
    for k, (a, b) in enumerate(graph.arcs.tolist()):
        if {a, b} == {p.node, q.node}:
            if best is None or graph.lengths[k] < graph.lengths[best]:
                best = k
    if best is None:
        raise ReebError("consecutive path breakpoints are not adjacent")
    return best


def split_points(graph: ReebGraph, theta: GraphPoint, path) -> list[GraphPoint]:
    """Points ``r_1..r_n`` along a simple path splitting it relative to ``theta``.

    The first point separates the path start from ``theta``, the last one
    separates the path end from ``theta``, and each consecutive pair separates
    the open sub-path between them from ``theta``.  Found by a shortest
    sequence search over the path breakpoints, ``theta`` when it lies on the
    path, and one interior point per segment.  Raises :class:`ReebError` if
    more than ``2 * b1_graph + 1`` points would be needed.
    """
    path = list(path)
    r, s = path[0], path[-1]
    if len(path) == 1:
        return [r]
    if any(d > 3 for d in graph.degrees):
        raise ReebError("split_points needs node degrees <= 3")
    # insert theta as a breakpoint when it lies on the path
    breaks = []
    for p, q in zip(path, path[1:]):
        breaks.append(p)
        arc = _common_arc(graph, p, q)
        if not theta.is_node and theta.arc == arc and min(p.value, q.value) < theta.value < max(p.value, q.value):
            breaks.append(theta)
    breaks.append(path[-1])
    param = _PathParam(graph, breaks)

    cand_s = []
    for k, s0 in enumerate(param.break_s):
        cand_s.append(s0)
        if k + 1 < len(param.break_s):
            cand_s.append(0.5 * (s0 + param.break_s[k + 1]))
    cand_s = sorted(set(cand_s))
    cands = [param.at(x) for x in cand_s]

    m = len(cands)
    start_ok = [separates(graph, [c], r, theta) for c in cands]
    end_ok = [separates(graph, [c], s, theta) for c in cands]
    # BFS over candidate sequences
    dist = [None] * m
    prev = [None] * m
    frontier = [i for i in range(m) if start_ok[i]]
    for i in frontier:
        dist[i] = 1
    head = 0
    queue = list(frontier)
    goal = None
    while head < len(queue):
        i = queue[head]
        head += 1
        if end_ok[i]:
            goal = i
            break
        for j in range(i + 1, m):
            if dist[j] is not None:
                continue
            probe = param.at(0.5 * (cand_s[i] + cand_s[j]))
            if separates(graph, [cands[i], cands[j]], probe, theta):
                dist[j] = dist[i] + 1
                prev[j] = i
                queue.append(j)
    if goal is None:
        raise ReebError("no splitting sequence found; graph hypotheses violated")
    seq = [goal]
    while prev[seq[-1]] is not None:
        seq.append(prev[seq[-1]])
    seq.reverse()
    out = [cands[i] for i in seq]
    if len(out) > 2 * graph.b1_graph + 1:
        raise ReebError(f"splitting needs {len(out)} points, more than 2*b1+1 = {2 * graph.b1_graph + 1}")
    return out


def preimage_connected(graph: ReebGraph, quotient: QuotientMap, arc: int) -> bool:
    """Union-find check that the mesh preimage of an open arc is connected.

    Elements are the edge pieces mapped to ``arc`` and the regular vertices
    mapped to it; pieces are joined to their regular end vertices and to the
    pieces of the same triangle whose open value ranges overlap.
    """
    start, cuts, cut_nodes, piece_arc = graph._pieces
    mesh = quotient.field.mesh
    f = quotient.field.values
    e = mesh.edges
    elements = {}

    def el(key):
        if key not in elements:
            elements[key] = len(elements)
        return elements[key]

    pairs = []
    ranges = {}
    for edge in range(mesh.n_edges):
        s0, s1 = start[edge], start[edge + 1]
        pa = piece_arc[s0:s1]
        if not np.any(pa == arc):
            continue
        a, b = e[edge]
        lo, hi = (a, b) if f[a] < f[b] else (b, a)
        c = cuts[s0 - edge:s1 - edge - 1]
        bounds = [f[lo], *c.tolist(), f[hi]]
        for k in range(s1 - s0):
            if pa[k] != arc:
                continue
            pid = el(("p", edge, k))
            ranges[(edge, k)] = (bounds[k], bounds[k + 1])
            if k == 0 and quotient.arrays[4][lo] == arc:
                pairs.append((pid, el(("v", int(lo)))))
            if k == s1 - s0 - 1 and quotient.arrays[4][hi] == arc:
                pairs.append((pid, el(("v", int(hi)))))
    for v in quotient.vertices_on_arc(arc):
        el(("v", int(v)))
    by_edge = defaultdict(list)
    for (edge, k), rg in ranges.items():
        by_edge[edge].append((k, rg))
    for tri_edges in mesh.tri_edges.tolist():
        present = [x for x in tri_edges if x in by_edge]
        for x, y in itertools.combinations(present, 2):
            for kx, (l1, h1) in by_edge[x]:
                for ky, (l2, h2) in by_edge[y]:
                    if max(l1, l2) < min(h1, h2):
                        pairs.append((elements[("p", x, kx)], elements[("p", y, ky)]))
    n = len(elements)
    if n == 0:
        return False
    if pairs:
        p = np.array(pairs)
        g = sparse.coo_matrix((np.ones(len(p)), (p[:, 0], p[:, 1])), shape=(n, n))
    else:
        g = sparse.coo_matrix((n, n))
    k, _ = csgraph.connected_components(g, directed=False)
    return k == 1
