"""Command-line interface.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import hyperbolic, packing, percolation, render, tiling
from .config import FAMILIES, ConfigError, ExperimentConfig, load_config
from .harmonic import SolverError
from .packing import PackingError
from .runner import fixture_tiling, run
from .triangulation import TriangulationError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
FIXTURES = ("grid", "paths", "ladder", "lattice-arc", "hyperbolic-root", "file")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _add_graph(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="triangulation text file (overrides --family)")
    p.add_argument("--family", choices=[f for f in FAMILIES if f != "file"], default="triangular-lattice-disk")
    p.add_argument("--size", type=int, default=8, help="radius (balls) or side (rhombus)")
    p.add_argument("--degree", type=int, default=7)


def _graph_params(a) -> dict:
    if a.graph:
        return {"family": "file", "graph": a.graph, "size": a.size, "degree": a.degree}
    return {"family": a.family, "size": a.size, "degree": a.degree}


def _triangulation(a):
    from .runner import family_graph

    return family_graph(_graph_params(a), a.seed)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _experiment(a, tag: str, params: dict) -> int:
    cfg = ExperimentConfig(tag, a.seed, getattr(a, "trials", 1), a.workers, a.out or "", params)
    result = run(cfg)
    if not a.out:
        sys.stdout.write(result.to_csv())
    return EXIT_OK


def cmd_generate(a) -> int:
    t = _triangulation(a)
    _emit(t.to_text(), a.out)
    return EXIT_OK


def cmd_resistance(a) -> int:
    return _experiment(a, "resistance", {**_graph_params(a), "center": a.center, "r_max": a.r_max})


def cmd_pack(a) -> int:
    t = _triangulation(a)
    pk = packing.pack(t, tol=a.tol, max_sweeps=a.max_sweeps)
    _emit(pk.to_json() + "\n", a.out)
    return EXIT_OK


def _tiling_params(a) -> dict:
    if getattr(a, "tiling", None):
        return {"fixture": "file", "tiling": a.tiling}
    if a.graph:
        return {"fixture": "graph", "graph": a.graph, "poles": a.poles, "n": a.n, "m": a.m}
    return {"fixture": a.fixture, "n": a.n, "m": a.m, "tiling": ""}


def cmd_tile(a) -> int:
    tl = fixture_tiling(_tiling_params(a))
    _emit(tl.to_json() + "\n", a.out)
    return EXIT_OK


def cmd_cross_tiling(a) -> int:
    return _experiment(a, "cross-tiling", {**_tiling_params(a), "ps": a.p, "exact": not a.no_exact})


def cmd_one_arm(a) -> int:
    return _experiment(a, "one-arm", {**_graph_params(a), "center": a.center, "radii": a.r, "p": a.p})


def cmd_pc_sweep(a) -> int:
    return _experiment(a, "pc-sweep", {"family": a.family, "degree": a.degree, "sizes": a.sizes, "ps": a.ps, "bootstrap": a.bootstrap})


def cmd_arc_cross(a) -> int:
    return _experiment(a, "arc-cross", {**_graph_params(a), "p": a.p, "fractions": a.fractions, "offset": a.offset})


def cmd_macro(a) -> int:
    return _experiment(a, "macro", {**_graph_params(a), "center": a.center, "r": a.r, "p": a.p})


def cmd_hvoronoi(a) -> int:
    lams = a.lambda_list if a.lambda_list else (a.lam,)
    params = {"a": a.a, "b": a.b, "c": a.c, "d": a.d, "lambdas": lams, "R": a.R, "p": a.p, "weight": a.weight}
    return _experiment(a, "hvoronoi", params)


def cmd_render_packing(a) -> int:
    if a.packing:
        pk = packing.load_packing(a.packing)
    else:
        pk = packing.pack(_triangulation(a))
    _emit(render.render_packing(pk), a.out)
    return EXIT_OK


def cmd_render_tiling(a) -> int:
    tl = fixture_tiling(_tiling_params(a))
    colors = tiling.coloring(tl, a.p, a.seed, a.trial) if a.p is not None else None
    _emit(render.render_tiling(tl, colors), a.out)
    return EXIT_OK


def cmd_render_voronoi(a) -> int:
    quad = hyperbolic.IdealBoundaryQuad(a.a, a.b, a.c, a.d)
    R = a.R if a.R > 0 else hyperbolic.default_R(a.lam)
    sample = hyperbolic.sample_poisson_hyperbolic(a.lam, R, a.seed, hyperbolic.get_weight(a.weight), a.trial)
    tess = hyperbolic.build_tessellation(sample, quad)
    colors = hyperbolic.colors_for(a.seed, a.trial, sample.n, a.p)
    _emit(render.render_tessellation(tess, colors), a.out)
    return EXIT_OK


def cmd_render_clusters(a) -> int:
    t = _triangulation(a)
    pos = t.positions if t.positions is not None else packing.pack(t).centers
    cfg = percolation.sample_sites(t, a.p, a.seed, a.trial)
    lab = percolation.clusters(t, cfg)
    _emit(render.render_clusters(pos, lab.labels), a.out)
    return EXIT_OK


def cmd_run(a) -> int:
    cfg = load_config(a.config)
    updates = {}
    if a.seed_given:
        updates["seed"] = a.seed
    if a.workers_given:
        updates["workers"] = a.workers
    if a.out:
        updates["out"] = a.out
    cfg = cfg.with_updates(**updates) if updates else cfg
    result = run(cfg)
    if not cfg.out:
        sys.stdout.write(result.to_csv())
    return EXIT_OK


def _quad_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=math.pi / 2)
    p.add_argument("--c", type=float, default=math.pi)
    p.add_argument("--d", type=float, default=3 * math.pi / 2)
    p.add_argument("--lambda", dest="lam", type=float, default=50.0)
    p.add_argument("--R", type=float, default=0.0, help="truncation radius (0: default rule)")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--weight", default="none", choices=["none", *sorted(hyperbolic.WEIGHTS)])


def _tiling_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fixture", choices=[f for f in FIXTURES if f != "file"], default="grid")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--m", type=int, default=0, help="second size (0: same as --n)")
    p.add_argument("--graph", help="triangulation text file to wire and tile (overrides --fixture)")
    p.add_argument("--poles", choices=["root", "arcs"], default="root", help="root to boundary, or boundary arc 1 to arc 3")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS keeps subcommand defaults from overwriting flags given before the subcommand
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (unsigned 64-bit)")
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="output path (stdout if omitted)")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="percolab", description="Percolation, packing and tiling experiments on triangulations.", parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_, parents=[common])
        p.set_defaults(func=fn)
        return p

    p = add("generate", cmd_generate, "write a triangulation in the text format")
    _add_graph(p)

    p = add("resistance", cmd_resistance, "resistance curve and walk-type verdict")
    _add_graph(p)
    p.add_argument("--center", type=int, default=0)
    p.add_argument("--r-max", "--rmax", dest="r_max", type=int, default=8)

    p = add("pack", cmd_pack, "circle packing as JSON")
    _add_graph(p)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-sweeps", type=int, default=10**6)

    p = add("tile", cmd_tile, "square tiling as JSON")
    _tiling_args(p)

    p = add("cross-tiling", cmd_cross_tiling, "left-right crossing estimates on a square tiling")
    _tiling_args(p)
    p.add_argument("--tiling", help="tiling JSON file (overrides --fixture)")
    p.add_argument("--p", type=_floats, default=(0.5,))
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--no-exact", action="store_true")

    p = add("one-arm", cmd_one_arm, "one-arm probabilities")
    _add_graph(p)
    p.add_argument("--center", type=int, default=0)
    p.add_argument("--r", type=_ints, default=(4,), help="radius or comma-separated radii")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=1000)

    p = add("pc-sweep", cmd_pc_sweep, "crossing/one-arm tables and a p_c estimate")
    p.add_argument("--family", choices=["rhombus", "triangular-lattice-disk", "d-regular-hyperbolic", "layered", "mixed-degree"], default="rhombus")
    p.add_argument("--degree", type=int, default=7)
    p.add_argument("--sizes", type=_ints, default=(8, 16))
    p.add_argument("--ps", type=_floats, default=(0.4, 0.45, 0.5, 0.55, 0.6))
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--bootstrap", type=int, default=1000)

    p = add("arc-cross", cmd_arc_cross, "open crossing between boundary arcs 1 and 3")
    _add_graph(p)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--fractions", type=_floats, default=(0.25, 0.25, 0.25, 0.25))
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--trials", type=int, default=1000)

    p = add("macro", cmd_macro, "mean count of macroscopic clusters in B_r")
    _add_graph(p)
    p.add_argument("--center", type=int, default=0)
    p.add_argument("--r", type=int, default=4)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=1000)

    p = add("hvoronoi", cmd_hvoronoi, "Poisson-Voronoi crossing in the hyperbolic disc")
    _quad_args(p)
    p.add_argument("--lambda-list", type=_floats, default=None)
    p.add_argument("--trials", type=int, default=1000)

    p = add("render-packing", cmd_render_packing, "SVG of a circle packing")
    _add_graph(p)
    p.add_argument("--packing", help="packing JSON file (overrides the graph options)")

    p = add("render-tiling", cmd_render_tiling, "SVG of a square tiling")
    _tiling_args(p)
    p.add_argument("--tiling", help="tiling JSON file")
    p.add_argument("--p", type=float, default=None, help="colour tiles at this p")
    p.add_argument("--trial", type=int, default=0)

    p = add("render-voronoi", cmd_render_voronoi, "SVG of one Poisson-Voronoi trial")
    _quad_args(p)
    p.add_argument("--trial", type=int, default=0)

    p = add("render-clusters", cmd_render_clusters, "SVG cluster overlay")
    _add_graph(p)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--trial", type=int, default=0)

    p = add("run", cmd_run, "run an experiment from a config file")
    p.add_argument("--config", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    a.seed_given = hasattr(a, "seed")
    a.workers_given = hasattr(a, "workers")
    a.seed = getattr(a, "seed", 0)
    a.workers = getattr(a, "workers", 1)
    a.out = getattr(a, "out", None)
    logging.basicConfig(level=logging.DEBUG if getattr(a, "verbose", False) else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return a.func(a)
    except (ConfigError, TriangulationError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, PackingError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
