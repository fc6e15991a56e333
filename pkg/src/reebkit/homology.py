"""Betti numbers over GF(2) from boundary-matrix ranks."""

from __future__ import annotations

from dataclasses import dataclass

from .mesh import TriMesh

__all__ = ["BettiProfile", "betti", "gf2_rank", "graph_b1"]


@dataclass(frozen=True)
class BettiProfile:
    b0: int
    b1: int
    euler: int

    def to_dict(self):
        return {"b0": self.b0, "b1": self.b1, "euler": self.euler}


def gf2_rank(columns) -> int:
    """Rank over GF(2) of a matrix given as bit-packed integer columns.

    Column reduction keyed on the lowest set bit; each column is reduced
    against the stored pivots until it vanishes or finds a free pivot.
    """
    pivots: dict[int, int] = {}
    rank = 0
    for c in columns:
        while c:
            low = c & -c
            p = pivots.get(low)
            if p is None:
                pivots[low] = c
                rank += 1
                break
            c ^= p
    return rank


def betti(mesh: TriMesh) -> BettiProfile:
    """Mod-2 Betti numbers of a closed triangulated surface.

    ``b0 = V - rank d1`` and ``b1 = (E - rank d1) - rank d2``.
    """
    d1 = [(1 << int(a)) | (1 << int(b)) for a, b in mesh.edges]
    d2 = [(1 << int(a)) | (1 << int(b)) | (1 << int(c)) for a, b, c in mesh.tri_edges]
    r1 = gf2_rank(d1)
    r2 = gf2_rank(d2)
    b0 = mesh.n_vertices - r1
    b1 = mesh.n_edges - r1 - r2
    return BettiProfile(b0=b0, b1=b1, euler=mesh.euler)


def graph_b1(n_nodes: int, edges) -> int:
    """Cycle rank ``E - V + components`` of a (multi)graph."""
    parent = list(range(n_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n_nodes
    n_edges = 0
    for a, b in edges:
        n_edges += 1
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            comps -= 1
    return n_edges - n_nodes + comps
