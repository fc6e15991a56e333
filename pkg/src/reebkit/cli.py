"""Command-line front end.

Every subcommand reads a mesh (OFF) and a field description, writes its
artifacts atomically into ``--out`` and returns 0 on success, 1 on invalid
input and 2 when a checked inequality fails.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .field import (FieldError, ScalarField, criticality_scan, distance_field, height_field,
                    load_sidecar, make_excellent, save_sidecar)
from .generators import SpecError, gen_genus2, gen_sphere, gen_thickened_graph, gen_torus, load_spec
from .homology import betti
from .io import atomic_write_json, atomic_write_text, dumps_json
from .mesh import DEFAULT_LANDMARKS, DEFAULT_SUBDIVISION, MeshError, load_mesh, mesh_stats, save_off
from .reeb import ReebError

EXIT_OK, EXIT_INVALID, EXIT_VIOLATION = 0, 1, 2

_AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


@dataclass
class RunConfig:
    """All knobs of one run; embedded verbatim in every report."""

    command: str = ""
    mesh: str | None = None
    field: str = "height:z"
    p: str = "south"
    subdivision: int = DEFAULT_SUBDIVISION
    levels_per_interval: int = 8
    samples: int = 32
    pairs: str = "auto"
    landmarks: int = DEFAULT_LANDMARKS
    seed: int = 0
    trials: int = 200
    slack: float = 0.05
    out: str = "."
    timestamp: bool = True
    csv: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in vars(args).items() if k in names})


# -- input resolution ----------------------------------------------------------------


def parse_field(mesh, spec: str, subdivision: int = DEFAULT_SUBDIVISION) -> ScalarField:
    """``height:z``, ``height:0.2,0,1``, ``distance:<vertex>`` or ``sidecar:<path>``."""
    kind, _, arg = spec.partition(":")
    if kind == "height":
        arg = arg or "z"
        if arg in _AXES:
            axis = _AXES[arg]
        else:
            try:
                axis = tuple(float(a) for a in arg.split(","))
            except ValueError:
                raise FieldError(f"bad height axis {arg!r}") from None
            if len(axis) != 3:
                raise FieldError("height axis needs three components")
        return height_field(mesh, axis)
    if kind == "distance":
        try:
            v = int(arg)
        except ValueError:
            raise FieldError(f"bad distance source {arg!r}") from None
        if not 0 <= v < mesh.n_vertices:
            raise FieldError(f"distance source {v} out of range")
        return distance_field(mesh, v, subdivision)
    if kind == "sidecar":
        return load_sidecar(mesh, arg)
    raise FieldError(f"unknown field source {spec!r}")


def resolve_p(field: ScalarField, p: str) -> int:
    if p == "south":
        return int(np.argmin(field.values))
    if p == "north":
        return int(np.argmax(field.values))
    try:
        v = int(p)
    except ValueError:
        raise FieldError(f"bad base point {p!r}; use south, north or a vertex index") from None
    if not 0 <= v < len(field.values):
        raise FieldError(f"base point {v} out of range")
    return v


def _pairs(cfg: RunConfig):
    if cfg.pairs in ("auto", "exact"):
        return cfg.pairs
    try:
        n = int(cfg.pairs)
    except ValueError:
        raise ValueError(f"bad pair budget {cfg.pairs!r}") from None
    if n < 1:
        raise ValueError("pair budget must be positive")
    return n


def _load(cfg: RunConfig, excellent: bool = True):
    if cfg.mesh is None:
        raise ValueError("--mesh is required")
    mesh = load_mesh(cfg.mesh)
    field = parse_field(mesh, cfg.field, cfg.subdivision)
    perturbed = False
    if excellent and not field.distinct:
        field = make_excellent(field)
        perturbed = True
    return mesh, field, perturbed


def _emit(cfg: RunConfig, name: str, result: dict) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = {"schema": "reebkit-report-v1", "version": __version__, "config": cfg.to_dict(), "result": result}
    if cfg.timestamp:
        doc["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    path = out / name
    atomic_write_text(path, dumps_json(doc))
    return path


# -- subcommands ------------------------------------------------------------------------


def cmd_generate(args, cfg):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = {}
    if args.spec:
        tg = gen_thickened_graph(load_spec(args.spec))
        mesh, fld = tg.mesh, tg.field
        meta.update(tg.to_dict())
        name = args.name or Path(args.spec).stem
    else:
        kind = args.kind or "sphere"
        if kind == "sphere":
            mesh = gen_sphere(args.radius, args.refinements)
        elif kind == "torus":
            mesh = gen_torus(orientation=args.orientation)
        elif kind == "genus2":
            mesh = gen_genus2()
        else:
            raise ValueError(f"unknown kind {kind!r}")
        fld = height_field(mesh)
        meta.update({"b1": betti(mesh).b1, "euler": mesh.euler, "vertices": mesh.n_vertices})
        name = args.name or kind
    save_off(mesh, out / f"{name}.off")
    save_sidecar(fld, out / f"{name}.field")
    atomic_write_json(out / f"{name}.json", meta)
    print(f"wrote {out / name}.off, .field, .json")
    return EXIT_OK


def cmd_stats(args, cfg):
    mesh = load_mesh(cfg.mesh) if cfg.mesh else None
    if mesh is None:
        raise ValueError("--mesh is required")
    st = mesh_stats(mesh, args.diameter_mode, cfg.landmarks, cfg.subdivision)
    res = st.to_dict() | {"vertices": mesh.n_vertices, "edges": mesh.n_edges,
                          "triangles": mesh.n_triangles, "euler": mesh.euler}
    _emit(cfg, "stats.json", res)
    print(dumps_json(res), end="")
    return EXIT_OK


def cmd_betti(args, cfg):
    if cfg.mesh is None:
        raise ValueError("--mesh is required")
    b = betti(load_mesh(cfg.mesh)).to_dict()
    _emit(cfg, "betti.json", b)
    print(dumps_json(b), end="")
    return EXIT_OK


def cmd_field(args, cfg):
    mesh, field, perturbed = _load(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    save_sidecar(field, out / "field.txt")
    scan = criticality_scan(field)
    res = {"lipschitz_L": field.lipschitz_L, "gradient_L": field.gradient_L, "perturbed": perturbed,
           "range": list(field.range), "criticality": scan.to_dict()}
    _emit(cfg, "field.json", res)
    print(f"minima {scan.n_min}, maxima {scan.n_max}, saddles {scan.n_saddles}, index sum {scan.index_sum}")
    return EXIT_OK


def cmd_reeb(args, cfg):
    from .reeb import build_reeb

    mesh, field, _ = _load(cfg)
    graph, quotient = build_reeb(field)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _emit(cfg, "reeb.json", graph.to_dict(quotient))
    atomic_write_text(out / "reeb.dot", graph.to_dot())
    print(f"{graph.n_nodes} nodes, {graph.n_arcs} edges, b1 {graph.b1_graph}")
    return EXIT_OK


def cmd_thickness(args, cfg):
    from .levelsets import per_level_csv, thickness

    mesh, field, _ = _load(cfg)
    th = thickness(field, cfg.levels_per_interval, cfg.samples, cfg.subdivision)
    _emit(cfg, "thickness.json", th.to_dict())
    if cfg.csv:
        per_level_csv(th, Path(cfg.out) / "thickness.csv")
    print(f"T = {th.T:.6g} at t = {th.argmin_level}")
    return EXIT_OK


def cmd_distortion(args, cfg):
    from .bounds import measured_distortion
    from .mesh import EXACT_DIAMETER_MAX_VERTICES
    from .reeb import build_reeb

    mesh, field, _ = _load(cfg)
    graph, quotient = build_reeb(field)
    pairs = _pairs(cfg)
    if pairs == "auto":
        pairs = "exact" if mesh.n_vertices <= EXACT_DIAMETER_MAX_VERTICES else cfg.landmarks
    res = measured_distortion(mesh, field, graph, quotient, pairs, cfg.subdivision, cfg.seed)
    _emit(cfg, "distortion.json", res.to_dict())
    if cfg.csv:
        res.csv(Path(cfg.out) / "pairs.csv")
    print(f"distortion {res.value:.6g} ({res.mode})")
    return EXIT_OK


def cmd_bound(args, cfg):
    from .bounds import theorem_bound

    mesh, field, _ = _load(cfg)
    p = resolve_p(field, cfg.p)
    rep = theorem_bound(mesh, field, p, pairs=_pairs(cfg), subdivision=cfg.subdivision,
                        levels_per_interval=cfg.levels_per_interval, samples=cfg.samples,
                        landmarks=cfg.landmarks, seed=cfg.seed, slack=cfg.slack)
    _emit(cfg, "report.json", rep.to_dict())
    print(f"measured {rep.measured_distortion:.6g}  bound {rep.theorem_bound:.6g}  "
          f"fiber bound {rep.prop45_bound:.6g}")
    if not rep.certified:
        print("bound violated", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_audit(args, cfg):
    from .bounds import comparison_audit
    from .reeb import build_reeb

    mesh, field, _ = _load(cfg)
    p = resolve_p(field, cfg.p)
    graph, quotient = build_reeb(field)
    res = comparison_audit(mesh, field, p, graph, quotient, cfg.trials, cfg.seed, cfg.slack, cfg.subdivision)
    _emit(cfg, "audit.json", res.to_dict())
    print(f"checked {res.counts()}, skipped {res.skipped}, violations {res.violations}")
    if res.violations:
        return EXIT_VIOLATION
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "stats": cmd_stats,
    "betti": cmd_betti,
    "field": cmd_field,
    "reeb": cmd_reeb,
    "thickness": cmd_thickness,
    "distortion": cmd_distortion,
    "bound": cmd_bound,
    "audit": cmd_audit,
}


def build_parser() -> argparse.ArgumentParser:
    d = RunConfig()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mesh", help="input OFF mesh")
    common.add_argument("--field", default=d.field,
                        help="height:<x|y|z|a,b,c>, distance:<vertex> or sidecar:<path> (default %(default)s)")
    common.add_argument("--p", default=d.p, help="base vertex: south, north or an index (default %(default)s)")
    common.add_argument("--subdivision", type=int, default=d.subdivision,
                        help="segments per mesh edge in the geodesic graph (default %(default)s)")
    common.add_argument("--levels-per-interval", dest="levels_per_interval", type=int,
                        default=d.levels_per_interval, help="regular levels per critical interval (default %(default)s)")
    common.add_argument("--samples", type=int, default=d.samples,
                        help="polyline samples per level diameter (default %(default)s)")
    common.add_argument("--pairs", default=d.pairs,
                        help="distortion pairs: auto, exact or a landmark count (default %(default)s)")
    common.add_argument("--landmarks", type=int, default=d.landmarks,
                        help="landmarks for sampled diameters (default %(default)s)")
    common.add_argument("--seed", type=int, default=d.seed)
    common.add_argument("--trials", type=int, default=d.trials, help="audit trials (default %(default)s)")
    common.add_argument("--slack", type=float, default=d.slack,
                        help="relative geodesic slack for checked inequalities (default %(default)s)")
    common.add_argument("--out", default=d.out, help="output directory (default %(default)s)")
    common.add_argument("--no-timestamp", dest="timestamp", action="store_false",
                        help="omit the creation time so reports are byte-identical across runs")
    common.add_argument("--csv", action="store_true", help="also write per-level / per-pair CSV tables")

    parser = argparse.ArgumentParser(prog="reebkit", description="Reeb graph distortion toolkit")
    parser.add_argument("--version", action="version", version=f"reebkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    g = sub.add_parser("generate", parents=[common], help="write a test surface, its height field and metadata")
    g.add_argument("--spec", help="thickened graph spec file")
    g.add_argument("--kind", choices=["sphere", "torus", "genus2"])
    g.add_argument("--refinements", type=int, default=3)
    g.add_argument("--radius", type=float, default=1.0)
    g.add_argument("--orientation", choices=["standing", "lying"], default="standing")
    g.add_argument("--name")
    s = sub.add_parser("stats", parents=[common], help="diameter, area and components")
    s.add_argument("--diameter-mode", dest="diameter_mode", default="auto",
                   choices=["auto", "exact", "landmarks"])
    for name, text in (("betti", "mod-2 Betti numbers"), ("field", "write a field sidecar and its critical points"),
                       ("reeb", "Reeb graph as JSON and DOT"), ("thickness", "sampled thickness of the field"),
                       ("distortion", "measured distortion of the quotient map"),
                       ("bound", "bound report; exit 2 if the measured distortion exceeds it"),
                       ("audit", "fiber distance inequality audit; exit 2 on violations")):
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig.from_args(args)
    try:
        return COMMANDS[args.command](args, cfg)
    except (MeshError, FieldError, SpecError, ReebError, ValueError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
