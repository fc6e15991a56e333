"""The standard case suite: spheres, tori, genus 2 and thickened graphs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import ScalarField, height_field, make_excellent
from .generators import (ThickenedGraphSpec, gen_genus2, gen_sphere, gen_thickened_graph, gen_torus,
                         parse_spec)
from .mesh import TriMesh

__all__ = ["Case", "SUITE_SPECS", "suite_case", "suite_names", "build_suite"]

SUITE_SPECS = {
    "fork2": "layer = cap_bottom\nlayer = fork(2)\nlayer = cap_top, cap_top\n",
    "fork3": "layer = cap_bottom\nlayer = fork(3)\nlayer = cap_top, cap_top, cap_top\n",
    "glued": ("layer = cap_bottom\nlayer = fork(2)\nlayer = inverse_fork(2)\nlayer = fork(3)\n"
              "layer = cap_top, cap_top, cap_top\n"),
}


@dataclass
class Case:
    name: str
    mesh: TriMesh
    field: ScalarField
    p: int
    K: int | None = None

    @property
    def is_thickened_graph(self) -> bool:
        return self.K is not None


def _height_case(name, mesh, K=None):
    f = make_excellent(height_field(mesh))
    return Case(name, mesh, f, int(np.argmin(f.values)), K)


def suite_case(name: str) -> Case:
    """Build one named case; the base point is the lowest vertex."""
    if name.startswith("sphere"):
        return _height_case(name, gen_sphere(1.0, int(name[len("sphere"):])))
    if name == "torus_standing":
        return _height_case(name, gen_torus(orientation="standing"))
    if name == "torus_lying":
        return _height_case(name, gen_torus(orientation="lying"))
    if name == "genus2":
        return _height_case(name, gen_genus2())
    if name in SUITE_SPECS:
        tg = gen_thickened_graph(parse_spec(SUITE_SPECS[name], name))
        return _height_case(name, tg.mesh, tg.K)
    raise KeyError(f"unknown suite case {name!r}")


def suite_names() -> list[str]:
    return ["sphere2", "sphere3", "sphere4", "torus_standing", "torus_lying", "genus2",
            "fork2", "fork3", "glued"]


def build_suite(names=None) -> list[Case]:
    return [suite_case(n) for n in (names or suite_names())]
