"""Reeb graphs of PL functions on triangulated surfaces and bounds on the
metric distortion of the quotient map."""

__version__ = "0.1.0"

from .mesh import MeshError, TriMesh, geodesic_distances, load_mesh, mesh_stats, save_off
from .homology import BettiProfile, betti
from .field import (FieldError, InfeasiblePerturbation, ScalarField, criticality_scan, distance_field,
                    epsilon_p, height_field, make_excellent)
from .reeb import GraphPoint, ReebError, ReebGraph, build_reeb, reeb_distance, separates, split_points
from .levelsets import coarea_check, component_diameter, extract_level, fiber_diameter_bound, thickness
from .bounds import BoundReport, comparison_audit, measured_distortion, prop45_bound, theorem_bound
from .generators import (closed_forms, fork_bound, gen_genus2, gen_sphere, gen_thickened_graph, gen_torus,
                         graph_bound, parse_spec, sphere_measure, sphere_thickness)

__all__ = [
    "MeshError", "TriMesh", "geodesic_distances", "load_mesh", "mesh_stats", "save_off",
    "BettiProfile", "betti",
    "FieldError", "InfeasiblePerturbation", "ScalarField", "criticality_scan", "distance_field",
    "epsilon_p", "height_field", "make_excellent",
    "GraphPoint", "ReebError", "ReebGraph", "build_reeb", "reeb_distance", "separates", "split_points",
    "coarea_check", "component_diameter", "extract_level", "fiber_diameter_bound", "thickness",
    "BoundReport", "comparison_audit", "measured_distortion", "prop45_bound", "theorem_bound",
    "closed_forms", "fork_bound", "gen_genus2", "gen_sphere", "gen_thickened_graph", "gen_torus",
    "graph_bound", "parse_spec", "sphere_measure", "sphere_thickness",
]
