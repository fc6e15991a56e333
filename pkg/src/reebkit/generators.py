"""Reproducible test surfaces and closed-form constants.

Spheres are refined icosahedra, tori are regular parameter grids, and
thickened filtered graphs are extracted by marching tetrahedra from an
implicit solid whose horizontal slices are unions of equal-radius disks with
centres on the x axis.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .mesh import MeshError, TriMesh

__all__ = [
    "gen_sphere",
    "gen_torus",
    "gen_genus2",
    "Block",
    "ThickenedGraphSpec",
    "SpecError",
    "ThickenedGraph",
    "gen_thickened_graph",
    "parse_spec",
    "closed_forms",
    "sphere_measure",
    "sphere_thickness",
    "fork_bound",
    "graph_bound",
    "load_spec",
]


# -- spheres and tori ---------------------------------------------------------------


def _icosahedron():
    phi = (1 + 5 ** 0.5) / 2
    v = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=float)
    f = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    # rotate vertex 0 onto +z and its antipode (vertex 3) onto -z
    a = v[0]
    z = np.array([0.0, 0.0, 1.0])
    axis = np.cross(a, z)
    s, c = np.linalg.norm(axis), a @ z
    axis /= s
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    rot = np.eye(3) + s * k + (1 - c) * (k @ k)
    return v @ rot.T, f


def gen_sphere(radius: float = 1.0, refinements: int = 3) -> TriMesh:
    """Icosphere with a vertex at each pole.

    ``refinements`` rounds of 1-to-4 midpoint subdivision give
    ``10 * 4**refinements + 2`` vertices.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if refinements < 0:
        raise ValueError("refinements must be >= 0")
    v, f = _icosahedron()
    verts = [tuple(p) for p in v]
    for _ in range(refinements):
        cache: dict = {}
        out = []

        def mid(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                p = np.add(verts[a], verts[b])
                p /= np.linalg.norm(p)
                cache[key] = len(verts)
                verts.append(tuple(p))
            return cache[key]

        for a, b, c in f:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            out += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        f = np.array(out)
    return TriMesh(np.array(verts) * radius, f)


def gen_torus(R: float = 2.0, r: float = 0.5, seg_major: int = 48, seg_minor: int = 16,
              orientation: str = "standing") -> TriMesh:
    """Torus of revolution on a regular (major, minor) angle grid.

    ``standing`` puts the symmetry axis along y, so the height ``z`` has a
    minimum, two saddles and a maximum.  ``lying`` puts it along z.
    """
    if not (R > r > 0):
        raise ValueError("need R > r > 0")
    if seg_major < 8 or seg_minor < 8:
        raise ValueError("need at least 8 segments in each direction")
    if orientation not in ("standing", "lying"):
        raise ValueError(f"unknown orientation {orientation!r}")
    # half-step offsets keep grid vertices away from the symmetric critical points
    th = 2 * np.pi * (np.arange(seg_major) + 0.25) / seg_major
    ph = 2 * np.pi * (np.arange(seg_minor) + 0.25) / seg_minor
    T, P = np.meshgrid(th, ph, indexing="ij")
    ring = R + r * np.cos(P)
    a, b, c = ring * np.cos(T), ring * np.sin(T), r * np.sin(P)
    if orientation == "standing":
        verts = np.stack([a, c, b], axis=-1).reshape(-1, 3)
    else:
        verts = np.stack([a, b, c], axis=-1).reshape(-1, 3)
    i, j = np.meshgrid(np.arange(seg_major), np.arange(seg_minor), indexing="ij")
    i2, j2 = (i + 1) % seg_major, (j + 1) % seg_minor
    v00 = (i * seg_minor + j).ravel()
    v10 = (i2 * seg_minor + j).ravel()
    v01 = (i * seg_minor + j2).ravel()
    v11 = (i2 * seg_minor + j2).ravel()
    tris = np.concatenate([np.stack([v00, v10, v11], 1), np.stack([v00, v11, v01], 1)])
    return TriMesh(verts, tris)


def gen_genus2(radius: float = 1.0, segments: int = 20, slices: int = 10) -> TriMesh:
    """Genus-2 surface: a cap, two stacked split/merge pairs, and a cap."""
    spec = ThickenedGraphSpec(
        layers=[[Block("cap_bottom")], [Block("fork", 2)], [Block("inverse_fork", 2)],
                [Block("fork", 2)], [Block("inverse_fork", 2)], [Block("cap_top")]],
        radius=radius, segments=segments, slices=slices,
    )
    return gen_thickened_graph(spec).mesh


# -- thickened filtered graphs -------------------------------------------------------


class SpecError(ValueError):
    pass


_ARITY = {"cap_bottom": (0, 1), "cap_top": (1, 0), "tube": (1, 1)}


@dataclass
class Block:
    """One block of a layer.

    ``kind`` is ``cap_bottom``, ``cap_top``, ``tube``, ``fork`` (one tube
    splitting into ``k``) or ``inverse_fork`` (``k`` tubes merging into one).
    ``offsets`` are the final x offsets of the fork branches relative to the
    stem; by default they are centred, with gaps that grow slightly from left
    to right so that the splits happen at distinct heights.
    """

    kind: str
    k: int = 1
    height: float | None = None
    offsets: list | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in ("cap_bottom", "cap_top", "tube", "fork", "inverse_fork"):
            raise SpecError(f"unknown block kind {self.kind!r}")
        if self.kind in ("fork", "inverse_fork"):
            if self.k < 2:
                raise SpecError(f"{self.kind} needs k >= 2")
        else:
            self.k = 1
        if self.offsets is not None and len(self.offsets) != self.k:
            raise SpecError(f"{self.kind}({self.k}) given {len(self.offsets)} offsets")

    @property
    def inputs(self) -> int:
        if self.kind == "fork":
            return 1
        if self.kind == "inverse_fork":
            return self.k
        return _ARITY[self.kind][0]

    @property
    def outputs(self) -> int:
        if self.kind == "fork":
            return self.k
        if self.kind == "inverse_fork":
            return 1
        return _ARITY[self.kind][1]


@dataclass
class ThickenedGraphSpec:
    """Layers of blocks glued bottom to top.

    Each layer consumes the open tubes left by the previous one from left to
    right; the first layer may only contain ``cap_bottom`` blocks and the
    stack must end with no open tube.  All tubes share ``radius``.
    ``segments`` is the number of grid cells around a circle and ``slices``
    the number of grid layers across a fork block.
    """

    layers: list
    radius: float = 1.0
    segments: int = 20
    slices: int = 10
    gap: float = 3.0

    def validate(self):
        if not self.radius > 0:
            raise SpecError("radius must be positive")
        if self.segments < 8 or self.slices < 4:
            raise SpecError("need segments >= 8 and slices >= 4")
        if not self.gap > 2.2:
            raise SpecError("gap (in radii) must exceed 2.2 so separate tubes do not touch")
        if not self.layers:
            raise SpecError("spec has no layers")
        open_tubes = 0
        for i, layer in enumerate(self.layers):
            if not layer:
                raise SpecError(f"layer {i} is empty")
            need = sum(b.inputs for b in layer)
            if i == 0 and need:
                raise SpecError("the first layer may only contain cap_bottom blocks")
            if i > 0 and any(b.kind == "cap_bottom" for b in layer):
                raise SpecError(f"layer {i}: cap_bottom only allowed in the first layer")
            if need != open_tubes:
                raise SpecError(f"gluing mismatch at layer {i}: {open_tubes} open circle(s), blocks consume {need}")
            for b in layer:
                if b.radius is not None and b.radius != self.radius:
                    raise SpecError(f"gluing mismatch at layer {i}: radius {b.radius} != {self.radius}")
            open_tubes = sum(b.outputs for b in layer)
        if open_tubes:
            raise SpecError(f"{open_tubes} boundary circle(s) left uncapped")

    @property
    def K(self) -> int:
        return max([b.k for layer in self.layers for b in layer if b.kind in ("fork", "inverse_fork")] or [1])


@dataclass
class ThickenedGraph:
    mesh: TriMesh
    field: object
    K: int
    b1: int
    layer_ranges: list = field(default_factory=list)

    def to_dict(self):
        return {
            "K": self.K,
            "b1": self.b1,
            "euler": self.mesh.euler,
            "vertices": self.mesh.n_vertices,
            "layer_ranges": [list(r) for r in self.layer_ranges],
            "graph_bound": graph_bound(2, self.K),
            "fork_bound": fork_bound(2, self.K) if self.K > 1 else None,
        }


def _smooth(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3 - 2 * t)


def _default_offsets(k, gap):
    gaps = gap * (1 + 0.08 * np.arange(k - 1))
    x = np.concatenate([[0.0], np.cumsum(gaps)])
    return x - x.mean()


def _layout(spec: ThickenedGraphSpec):
    """Per layer: z range and a list of (kind, start centres, end centres) groups."""
    rho = spec.radius
    gap = spec.gap * rho
    z = 0.0
    tubes: list[float] = []
    out = []
    for layer in spec.layers:
        kinds = {b.kind for b in layer}
        if "cap_bottom" in kinds or "cap_top" in kinds:
            default_h = rho
        elif kinds == {"tube"}:
            default_h = 2 * rho
        else:
            default_h = 4 * rho
        hs = {b.height for b in layer if b.height is not None}
        if len(hs) > 1:
            raise SpecError("blocks of one layer must share their height")
        h = hs.pop() if hs else default_h
        if h <= 0:
            raise SpecError("block height must be positive")
        if ("cap_bottom" in kinds or "cap_top" in kinds) and h != rho:
            raise SpecError("cap height must equal the radius")
        groups = []
        new_tubes = []
        pos = 0
        if layer[0].kind == "cap_bottom":
            xs = np.arange(len(layer)) * gap
            xs = xs - xs.mean()
            for b, x in zip(layer, xs):
                groups.append(("cap_bottom", np.array([x]), np.array([x])))
                new_tubes.append(x)
        else:
            for b in layer:
                src = np.array(tubes[pos:pos + b.inputs])
                pos += b.inputs
                if b.kind in ("cap_top", "tube"):
                    groups.append((b.kind, src, src))
                    if b.kind == "tube":
                        new_tubes.append(src[0])
                elif b.kind == "fork":
                    off = np.asarray(b.offsets if b.offsets is not None else _default_offsets(b.k, spec.gap), float)
                    off = off * (rho if b.offsets is None else 1.0)
                    groups.append(("fork", np.repeat(src, b.k), src[0] + off))
                    new_tubes.extend((src[0] + off).tolist())
                else:
                    m = src.mean()
                    groups.append(("inverse_fork", src, np.full(b.k, m)))
                    new_tubes.append(m)
        out.append((z, z + h, groups))
        z += h
        tubes = new_tubes
    return out


def _check_overlap(layout, rho, h):
    """Reject specs where disks of different blocks come closer than 2*rho + h."""
    for z0, z1, groups in layout:
        for t in np.linspace(0, 1, 17):
            s = _smooth(t)
            cents = [a + (b - a) * s for _, a, b in groups]
            for i in range(len(cents)):
                for j in range(i + 1, len(cents)):
                    d = np.abs(cents[i][:, None] - cents[j][None, :]).min()
                    if d < 2 * rho + h:
                        raise SpecError(f"blocks overlap near height {z0 + t * (z1 - z0):.3g}")
        for kind, a, b in groups:
            if kind == "fork":
                fin = np.sort(b)
                if np.any(np.diff(fin) < 2 * rho + h):
                    raise SpecError("fork branches end closer than 2*radius")


def _implicit(layout, rho, P):
    """Horizontal signed distance to the solid at points ``P`` (..., 3)."""
    x, y, z = P[..., 0], P[..., 1], P[..., 2]
    F = np.full(x.shape, np.inf)
    bottom, top = layout[0][0], layout[-1][1]
    for li, (z0, z1, groups) in enumerate(layout):
        lo = -np.inf if li == 0 else z0
        hi = np.inf if li == len(layout) - 1 else z1
        sel = (z >= lo) & (z < hi)
        if not sel.any():
            continue
        xs, ys, zs = x[sel], y[sel], z[sel]
        t = _smooth((zs - z0) / (z1 - z0))
        val = np.full(xs.shape, np.inf)
        for kind, a, b in groups:
            if kind == "cap_bottom":
                c = a[0]
                d = np.sqrt((xs - c) ** 2 + ys ** 2 + np.minimum(zs - z1, 0) ** 2) - rho
            elif kind == "cap_top":
                c = a[0]
                d = np.sqrt((xs - c) ** 2 + ys ** 2 + np.maximum(zs - z0, 0) ** 2) - rho
            else:
                d = np.full(xs.shape, np.inf)
                for ca, cb in zip(a, b):
                    c = ca + (cb - ca) * t
                    d = np.minimum(d, np.hypot(xs - c, ys) - rho)
            val = np.minimum(val, d)
        F[sel] = val
    # close the solid below the first and above the last layer
    F = np.maximum(F, np.maximum(bottom - z, z - top))
    return F


# Freudenthal split of the unit cube into 6 tetrahedra along the main diagonal
_CORNERS = np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)])
_TETS = []
for _perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
    _p = np.zeros(3, dtype=int)
    _path = [0]
    for _ax in _perm:
        _p[_ax] = 1
        _path.append(int(_p[0] * 4 + _p[1] * 2 + _p[2]))
    _TETS.append(_path)
_TETS = np.array(_TETS)
_TET_EDGES = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def _case_table():
    """For each inside-mask of a tetrahedron, triangles as triples of tet edges."""
    eid = {e: i for i, e in enumerate(_TET_EDGES)}

    def ed(a, b):
        return eid[(min(a, b), max(a, b))]

    table = []
    for mask in range(16):
        ins = [i for i in range(4) if mask >> i & 1]
        out = [i for i in range(4) if not mask >> i & 1]
        if len(ins) in (0, 4):
            table.append([])
        elif len(ins) == 1 or len(out) == 1:
            a = ins[0] if len(ins) == 1 else out[0]
            o = [i for i in range(4) if i != a]
            table.append([(ed(a, o[0]), ed(a, o[1]), ed(a, o[2]))])
        else:
            (a, b), (c, d) = ins, out
            table.append([(ed(a, c), ed(a, d), ed(b, d)), (ed(a, c), ed(b, d), ed(b, c))])
    return table


_CASES = _case_table()


def _marching_tets(P, F):
    """Zero set of the grid function ``F`` sampled at grid points ``P``."""
    nx, ny, nz = F.shape
    idx = np.arange(nx * ny * nz).reshape(nx, ny, nz)
    base = idx[:-1, :-1, :-1].ravel()
    off = np.array([c[0] * ny * nz + c[1] * nz + c[2] for c in _CORNERS])
    flat_P = P.reshape(-1, 3)
    flat_F = F.ravel()
    keys, lams, tris = [], [], []
    for tet in _TETS:
        g = base[:, None] + off[tet][None, :]  # (C, 4) grid indices
        inside = flat_F[g] < 0
        mask = (inside * (1 << np.arange(4))).sum(1)
        for m in range(1, 15):
            sel = g[mask == m]
            if not len(sel):
                continue
            for tri in _CASES[m]:
                corners = []
                for e in tri:
                    a, b = _TET_EDGES[e]
                    corners.append(np.stack([sel[:, a], sel[:, b]], 1))
                tris.append(np.stack(corners, 1))  # (T, 3, 2)
    if not tris:
        raise SpecError("implicit surface is empty")
    T = np.concatenate(tris)
    ends = np.sort(T.reshape(-1, 2), axis=1)
    key = ends[:, 0].astype(np.int64) * len(flat_F) + ends[:, 1]
    uniq, inv = np.unique(key, return_inverse=True)
    a, b = uniq // len(flat_F), uniq % len(flat_F)
    lam = flat_F[a] / (flat_F[a] - flat_F[b])
    verts = flat_P[a] + lam[:, None] * (flat_P[b] - flat_P[a])
    return verts, inv.reshape(-1, 3)


def gen_thickened_graph(spec: ThickenedGraphSpec):
    """Closed surface of a thickened filtered graph, with its height field.

    The solid is swept by unions of equal-radius disks whose centres move
    along the x axis; fork branches separate along a smoothstep profile.
    The surface is extracted by marching tetrahedra on a grid whose vertical
    coordinate is slightly sheared, so that no two mesh vertices share a
    height.
    """
    from .field import ScalarField
    from .homology import betti

    spec.validate()
    rho = spec.radius
    h = 2 * np.pi * rho / spec.segments
    layout = _layout(spec)
    _check_overlap(layout, rho, h)
    hz = 4 * rho / spec.slices
    xs = np.concatenate([np.concatenate([a, b]) for _, _, g in layout for _, a, b in g])
    x0, x1 = xs.min() - rho - 2 * h, xs.max() + rho + 2 * h
    y0 = -rho - 2 * h
    z0, z1 = layout[0][0] - 2 * hz, layout[-1][1] + 2 * hz
    gx = x0 + h * np.arange(int(np.ceil((x1 - x0) / h)) + 1)
    gy = y0 + h * np.arange(int(np.ceil(-2 * y0 / h)) + 1)
    gz = z0 + hz * np.arange(int(np.ceil((z1 - z0) / hz)) + 1)
    X, Y, Z = np.meshgrid(gx, gy, gz, indexing="ij")
    # irrational shear of the vertical coordinate breaks height ties
    Z = Z + hz * (0.3 * (2 ** 0.5 - 1) * (X - x0) / (x1 - x0) + 0.2 * (3 ** 0.5 - 1) * (Y - y0) / (-2 * y0))
    P = np.stack([X, Y, Z], -1)
    F = _implicit(layout, rho, P)
    tiny = 1e-3 * h
    F = np.where(np.abs(F) < tiny, tiny, F)
    verts, tris = _marching_tets(P, F)
    try:
        mesh = TriMesh(verts, tris)
    except MeshError as exc:
        raise SpecError(f"generated surface is not a closed manifold: {exc}") from None
    fld = ScalarField(mesh, verts[:, 2], name="height:0,0,1")
    return ThickenedGraph(mesh=mesh, field=fld, K=spec.K, b1=betti(mesh).b1,
                          layer_ranges=[(a, b) for a, b, _ in layout])


# -- spec files ----------------------------------------------------------------------

_BLOCK_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def _parse_block(text: str, where: str) -> Block:
    m = _BLOCK_RE.match(text)
    if not m:
        raise SpecError(f"{where}: cannot parse block {text.strip()!r}")
    kind, args = m.group(1), m.group(2)
    kw: dict = {}
    if args:
        for i, part in enumerate(a.strip() for a in args.split(";")):
            if not part:
                continue
            if "=" in part:
                key, val = (s.strip() for s in part.split("=", 1))
            elif i == 0:
                key, val = "k", part
            else:
                raise SpecError(f"{where}: positional argument {part!r} after the first")
            try:
                if key == "k":
                    kw["k"] = int(val)
                elif key in ("height", "radius"):
                    kw[key] = float(val)
                elif key == "offsets":
                    kw["offsets"] = [float(v) for v in val.split(",")]
                else:
                    raise SpecError(f"{where}: unknown block argument {key!r}")
            except ValueError:
                raise SpecError(f"{where}: bad value {val!r} for {key}") from None
    try:
        return Block(kind, **kw)
    except SpecError as exc:
        raise SpecError(f"{where}: {exc}") from None


def _split_layer(text: str):
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    out.append(cur)
    return out


def parse_spec(text: str, source: str = "<spec>") -> ThickenedGraphSpec:
    """Parse a key-value spec file.

    Schema::

        # comments start with '#'
        radius = 1.0            # tube radius
        segments = 20           # grid cells around a circle
        slices = 10             # grid layers across a fork block
        gap = 3.0               # default branch spacing, in radii
        layer = cap_bottom
        layer = fork(3)         # or fork(3; offsets=-3,0,3.5; height=4)
        layer = cap_top, cap_top, cap_top

    ``layer`` lines are read in order, bottom to top; a layer lists its
    blocks left to right.
    """
    params: dict = {}
    layers = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise SpecError(f"{where}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key == "layer":
            layers.append([_parse_block(b, where) for b in _split_layer(val)])
        elif key in ("radius", "gap"):
            try:
                params[key] = float(val)
            except ValueError:
                raise SpecError(f"{where}: {key} must be a number") from None
        elif key in ("segments", "slices"):
            try:
                params[key] = int(val)
            except ValueError:
                raise SpecError(f"{where}: {key} must be an integer") from None
        else:
            raise SpecError(f"{where}: unknown key {key!r}")
    spec = ThickenedGraphSpec(layers=layers, **params)
    spec.validate()
    return spec


def load_spec(path) -> ThickenedGraphSpec:
    return parse_spec(Path(path).read_text(), source=str(path))


# -- closed forms --------------------------------------------------------------------


def _check_n(n, name="n"):
    if int(n) != n or n < 1:
        raise ValueError(f"{name} must be a positive integer, got {n}")


def sphere_measure(n: int) -> float:
    """Measure of the unit n-sphere, ``2 pi^((n+1)/2) / Gamma((n+1)/2)``."""
    _check_n(n)
    return 2 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)


def _sphere_measure0(n):
    return 2.0 if n == 0 else sphere_measure(n)


def sphere_thickness(n: int) -> float:
    """n-th power of the thickness of a round n-sphere (any radius): ``s_n / pi^n``."""
    _check_n(n)
    return sphere_measure(n) / math.pi ** n


def fork_bound(n: int, k: int) -> float:
    """Lower bound ``s_{n-1} / (k pi)^(n-1)`` for a thickened k-fork of dimension n."""
    _check_n(n)
    _check_n(k, "k")
    return _sphere_measure0(n - 1) / (k * math.pi) ** (n - 1)


def graph_bound(n: int, K: int) -> float:
    """Lower bound ``T(S^(n-1))^(n-1) / K^(n-1)`` for a thickened graph with forks of arity <= K."""
    _check_n(n)
    _check_n(K, "K")
    t = 2.0 if n == 1 else sphere_thickness(n - 1)
    return t / K ** (n - 1)


_QUERY_RE = re.compile(r"^\s*(sphere_measure|sphere_thickness|fork_bound|graph_bound)\s*\(([^)]*)\)\s*$")


def closed_forms(query: str) -> float:
    """Evaluate a query such as ``"fork_bound(2, 3)"``."""
    m = _QUERY_RE.match(query)
    if not m:
        raise ValueError(f"unknown closed-form query {query!r}")
    try:
        args = [int(a) for a in m.group(2).split(",")]
    except ValueError:
        raise ValueError(f"integer arguments expected in {query!r}") from None
    fn = {"sphere_measure": sphere_measure, "sphere_thickness": sphere_thickness,
          "fork_bound": fork_bound, "graph_bound": graph_bound}[m.group(1)]
    want = 1 if fn in (sphere_measure, sphere_thickness) else 2
    if len(args) != want:
        raise ValueError(f"{m.group(1)} takes {want} argument(s)")
    return fn(*args)
