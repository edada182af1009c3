"""Experiment dispatch: config in, deterministic CSV rows out.

Every stochastic experiment draws from ``derive_seed(seed, tag)``; trial
``k`` then uses the counter-based stream keyed by ``(that seed, k)``.  Rows
carry the master seed and the trial range, which is enough to replay them.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import generators as gen
from . import harmonic, hyperbolic, percolation, tiling
from .config import ConfigError, ExperimentConfig
from .parallel import map_chunks
from .rng import derive_seed
from .stats import EstimateWithCI
from .triangulation import Triangulation, load


@dataclass(frozen=True)
class RunResult:
    columns: tuple[str, ...]
    rows: list[tuple]
    config: ExperimentConfig

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(x) for x in row])
        return buf.getvalue()


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return str(x)


EST_COLUMNS = ("trials", "successes", "estimate", "ci_lo", "ci_hi")
REPLAY_COLUMNS = ("seed", "trial_start", "trial_stop")


def _est(e: EstimateWithCI) -> tuple:
    return (e.trials, e.successes, e.estimate, e.ci_lo, e.ci_hi)


def family_graph(params: dict, seed: int = 0) -> Triangulation:
    fam, size, degree = params["family"], params["size"], params["degree"]
    if size < 1:
        raise ConfigError("size", "must be >= 1")
    if fam == "file":
        return load(params["graph"])
    if fam == "triangular-lattice-disk":
        return gen.triangular_lattice_disk(size)
    if fam == "d-regular-hyperbolic":
        return gen.regular_hyperbolic_triangulation(degree, size)
    if fam == "layered":
        return gen.layered_triangulation(degree, size)
    if fam == "mixed-degree":
        return gen.mixed_degree_triangulation(size, seed)
    if fam == "rhombus":
        return gen.rhombus(size)[0]
    raise ConfigError("family", f"unknown family {fam!r}")


def _one_arm(cfg: ExperimentConfig, key: int):
    p = cfg.params
    t = family_graph(p, cfg.seed)
    curve = percolation.one_arm_curve(t, p["center"], p["radii"], p["p"], cfg.trials, key, cfg.workers)
    cols = ("r", "p", *EST_COLUMNS, *REPLAY_COLUMNS)
    rows = [(r, p["p"], *_est(e), cfg.seed, 0, cfg.trials) for r, e in curve]
    return cols, rows


def _arc_cross(cfg: ExperimentConfig, key: int):
    p = cfg.params
    t = family_graph(p, cfg.seed)
    arcs = gen.boundary_arcs(t, p["fractions"], p["offset"])
    e = percolation.boundary_arc_crossing(t, arcs, p["p"], cfg.trials, key, cfg.workers)
    cols = ("p", "arc1", "arc3", *EST_COLUMNS, *REPLAY_COLUMNS)
    return cols, [(p["p"], len(arcs[0]), len(arcs[2]), *_est(e), cfg.seed, 0, cfg.trials)]


def _macro(cfg: ExperimentConfig, key: int):
    p = cfg.params
    t = family_graph(p, cfg.seed)
    m = percolation.macroscopic_cluster_count(t, p["r"], p["p"], cfg.trials, key, p["center"], cfg.workers)
    cols = ("r", "p", "trials", "mean", "ci_lo", "ci_hi", *REPLAY_COLUMNS)
    return cols, [(p["r"], p["p"], m.trials, m.mean, m.ci_lo, m.ci_hi, cfg.seed, 0, cfg.trials)]


def _pc_sweep(cfg: ExperimentConfig, key: int):
    p = cfg.params
    res = percolation.pc_sweep(p["family"], p["sizes"], p["ps"], cfg.trials, key, p["degree"], p["bootstrap"], cfg.workers)
    cols = ("family", "size", "p", "statistic", *EST_COLUMNS, *REPLAY_COLUMNS)
    rows = [(r.family, r.size, r.p, r.statistic, *_est(r.estimate), cfg.seed, 0, cfg.trials) for r in res.rows]
    rows.append((p["family"], max(p["sizes"]), "", "pc-estimate", cfg.trials, "", res.pc, res.pc_lo, res.pc_hi, cfg.seed, 0, cfg.trials))
    return cols, rows


def _resistance(cfg: ExperimentConfig, key: int):
    p = cfg.params
    t = family_graph(p, cfg.seed)
    curve, verdict = harmonic.classify_walk(t, p["r_max"], p["center"])
    R = dict(zip(curve.radii, curve.resistance))
    cols = ("r", "R_eff", "increment", "doubling_increment", "verdict")
    rows = []
    for r in curve.radii:
        inc = R[r] - R[r - 1] if r - 1 in R else ""
        dbl = R[r] - R[r // 2] if r % 2 == 0 and r // 2 in R else ""
        rows.append((r, R[r], inc, dbl, verdict if r == curve.radii[-1] else ""))
    return cols, rows


def fixture_tiling(params: dict) -> tiling.SquareTiling:
    fx = params["fixture"]
    if fx == "file":
        return tiling.load_tiling(params["tiling"])
    n = params["n"]
    m = params.get("m") or n
    if fx == "graph":
        # poles: root vertex to the whole boundary, or boundary arc 1 to arc 3
        t = load(params["graph"])
        if params.get("poles", "root") == "arcs":
            arcs = gen.boundary_arcs(t)
            return tiling.tile_from_two_terminal(gen.wire_triangulation(t, list(arcs[0]), list(arcs[2]))[0])
        return tiling.tile_from_two_terminal(gen.wire_triangulation(t, params.get("source", 0), list(t.boundary))[0])
    if fx == "grid":
        return tiling.tile_from_two_terminal(gen.grid_with_poles(n, m))
    if fx == "paths":
        return tiling.tile_from_two_terminal(gen.parallel_paths(n, m))
    if fx == "ladder":
        return tiling.tile_from_two_terminal(gen.ladder_graph(n))
    if fx == "lattice-arc":
        t = gen.triangular_lattice_disk(n)
        arcs = gen.boundary_arcs(t)
        return tiling.tile_from_two_terminal(gen.wire_triangulation(t, list(arcs[0]), list(arcs[2]))[0])
    if fx == "hyperbolic-root":
        t = gen.regular_hyperbolic_triangulation(7, n)
        return tiling.tile_from_two_terminal(gen.wire_triangulation(t, 0, list(t.boundary))[0])
    raise ConfigError("cross-tiling.fixture", f"unknown fixture {fx!r}")


def _tiling_chunk(tl, p, seed, t0, t1):
    return tiling.crossing_counts(tl, p, seed, range(t0, t1))


def _cross_tiling(cfg: ExperimentConfig, key: int):
    prm = cfg.params
    tl = fixture_tiling(prm)
    cols = ("p", "n_tiles", *EST_COLUMNS, "exact", *REPLAY_COLUMNS)
    rows = []
    for p in prm["ps"]:
        hits = sum(map_chunks(_tiling_chunk, (tl, p, key), cfg.trials, cfg.workers))
        e = EstimateWithCI.from_counts(int(hits), cfg.trials)
        exact = tiling.exact_crossing_probability(tl, p) if prm["exact"] and tl.n_tiles <= 16 else ""
        rows.append((p, tl.n_tiles, *_est(e), exact, cfg.seed, 0, cfg.trials))
    return cols, rows


def _hvoronoi(cfg: ExperimentConfig, key: int):
    p = cfg.params
    quad = hyperbolic.IdealBoundaryQuad(p["a"], p["b"], p["c"], p["d"])
    rule = hyperbolic.default_R if p["R"] <= 0 else (lambda lam, R=p["R"]: R)
    weight = hyperbolic.get_weight(p["weight"])
    rows_ = hyperbolic.lambda_ladder(quad, p["lambdas"], cfg.trials, key, rule, p["p"], weight, cfg.workers)
    cols = (*hyperbolic.LADDER_COLUMNS, *REPLAY_COLUMNS)
    return cols, [(*r.values(), cfg.seed, 0, cfg.trials) for r in rows_]


EXPERIMENTS = {
    "one-arm": _one_arm,
    "arc-cross": _arc_cross,
    "macro": _macro,
    "pc-sweep": _pc_sweep,
    "resistance": _resistance,
    "cross-tiling": _cross_tiling,
    "hvoronoi": _hvoronoi,
}


def run(config: ExperimentConfig, out: str | Path | None = None) -> RunResult:
    """Run one experiment; write ``out`` (default ``config.out``) and a replay record beside it."""
    key = derive_seed(config.seed, config.tag)
    cols, rows = EXPERIMENTS[config.tag](config, key)
    result = RunResult(tuple(cols), rows, config)
    target = out if out is not None else config.out
    if target:
        path = Path(target)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(result.to_csv())
        path.with_name(path.name + ".replay.ini").write_text(config.to_text())
    return result
