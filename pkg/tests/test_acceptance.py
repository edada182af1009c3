"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints one
PASS/FAIL line per criterion with the measured values.
"""
from __future__ import annotations

import math
import os
import time

import mpmath
import numpy as np
import pytest

from percolab import generators as gen
from percolab import harmonic, hyperbolic as H, percolation as perc, tiling as T
from percolab.config import ExperimentConfig, load_config
from percolab.packing import pack, validate_packing
from percolab.runner import run

SEED = 20240601
# results do not depend on the worker count
WORKERS = min(8, os.cpu_count() or 1)


def joint_sigma(a, b) -> float:
    return math.sqrt(a.estimate * (1 - a.estimate) / a.trials + b.estimate * (1 - b.estimate) / b.trials)


@pytest.mark.acceptance(1, "rhombus self-duality at p = 1/2")
def test_c01_rhombus_self_duality(note):
    exact = {n: perc.rhombus_crossing_exact(n, 0.5) for n in (2, 3)}
    t0 = time.perf_counter()
    t, left, right = gen.rhombus(64)
    thr = perc.crossing_thresholds(t, left, right, 10_000, SEED)
    est = perc.EstimateWithCI.from_counts(int((thr < 0.5).sum()), 10_000)
    secs = time.perf_counter() - t0
    note(f"exact n=2,3: {exact[2]!r}, {exact[3]!r}")
    note(f"n=64: {est.estimate:.4f} (3 half-widths {3 * est.half_width:.4f}) in {secs:.1f}s")
    assert all(abs(v - 0.5) < 1e-12 for v in exact.values())
    assert est.contains(0.5, widths=3)
    assert secs < 60


@pytest.mark.acceptance(2, "one-arm exponent on the triangular lattice")
def test_c02_one_arm_slope(note):
    t0 = time.perf_counter()
    radii = (8, 16, 32, 64, 128)
    t = gen.triangular_lattice_disk(128)
    curve = perc.one_arm_curve(t, 0, radii, 0.5, 10_000, SEED)
    est = np.array([e.estimate for _, e in curve])
    slope = float(np.polyfit(np.log(radii), np.log(est), 1)[0])
    secs = time.perf_counter() - t0
    note(f"slope {slope:.4f} vs {-5 / 48:.4f} +- 0.05 in {secs:.0f}s")
    assert abs(slope + 5 / 48) <= 0.05
    assert secs < 600


@pytest.mark.acceptance(3, "one-arm plateau on the 7-regular triangulation vs lattice decay")
def test_c03_one_arm_plateau(note):
    t0 = time.perf_counter()
    radii = range(4, 11)
    hyp = [e.estimate for _, e in perc.one_arm_curve(gen.regular_hyperbolic_triangulation(7, 10), 0, radii, 0.5, 1000, SEED)]
    lat = [e.estimate for _, e in perc.one_arm_curve(gen.triangular_lattice_disk(10), 0, radii, 0.5, 1000, SEED)]
    secs = time.perf_counter() - t0
    # estimates share trials across r, so each curve is non-increasing by construction;
    # a plateau means the drop over the whole range is within one trial in a hundred
    drop = hyp[0] - hyp[-1]
    note(f"7-regular {hyp[0]:.3f}..{hyp[-1]:.3f} (drop {drop:.3f})")
    note(f"lattice {lat[0]:.3f}..{lat[-1]:.3f}")
    assert min(hyp) >= 0.2
    assert drop <= 0.01
    assert all(b < a for a, b in zip(lat, lat[1:]))
    assert secs < 600


@pytest.mark.acceptance(4, "resistance increments: geometric decay vs stable per-doubling growth")
def test_c04_transience_proxy(note):
    t0 = time.perf_counter()
    hyp = harmonic.resistance_curve(gen.regular_hyperbolic_triangulation(7, 10), 0, range(1, 11))
    steps = [d for _, d in hyp.increments()]
    ratios = [b / a for a, b in zip(steps, steps[1:])]
    lat = harmonic.resistance_curve(gen.triangular_lattice_disk(32), 0, [1, 2, 4, 8, 16, 32])
    dbl = dict(lat.increments(doubling=True))
    c = math.log(2) / (2 * math.pi * math.sqrt(3))
    secs = time.perf_counter() - t0
    note(f"7-regular step ratios {min(ratios):.3f}..{max(ratios):.3f}")
    note("lattice doubling increments " + ", ".join(f"{dbl[r]:.5f}" for r in (8, 16, 32)) + f" (log2/(2pi sqrt3) = {c:.5f})")
    assert all(0 < x < 0.6 for x in ratios)
    assert all(dbl[r] > 0 for r in (8, 16, 32))
    assert max(dbl[r] for r in (8, 16, 32)) / min(dbl[r] for r in (8, 16, 32)) < 1.05
    assert all(abs(dbl[r] / c - 1) < 0.05 for r in (8, 16, 32))
    assert secs < 300


@pytest.mark.acceptance(5, "circle packing accuracy")
def test_c05_packing(note):
    t0 = time.perf_counter()
    from helpers import wheel

    hub = pack(wheel(7)).radii[0]
    t = gen.regular_hyperbolic_triangulation(7, 5)
    rep = validate_packing(pack(t), t)
    secs = time.perf_counter() - t0
    note(f"wheel-7 hub error {abs(hub - (1 / math.sin(math.pi / 7) - 1)):.1e}")
    note(f"7-regular r=5: angle {rep.angle_error:.1e}, tangency {rep.tangency_error:.1e}, {secs:.1f}s")
    assert abs(hub - (1 / math.sin(math.pi / 7) - 1)) <= 1e-8
    assert rep.angle_error <= 1e-8 and rep.tangency_error <= 1e-8
    assert secs < 60


@pytest.mark.acceptance(6, "square tiling exactness")
def test_c06_tiling_exactness(note):
    t0 = time.perf_counter()
    worst_area, overlaps = 0.0, 0
    for n in range(1, 21):
        rep = T.validate_conjecture2_conditions(T.tile_from_two_terminal(gen.grid_with_poles(n, n)))
        worst_area = max(worst_area, rep.area_residual)
        overlaps += rep.overlap_pairs + rep.outside
    worst_side = 0.0
    for k in range(1, 13):
        tl = T.tile_from_two_terminal(gen.ladder_graph(k))
        assert tl.n_tiles == k
        worst_side = max(worst_side, float(np.abs(tl.tiles[:, 2] - 1 / k).max()))
    secs = time.perf_counter() - t0
    note(f"max area residual {worst_area:.1e}, overlapping pairs {overlaps}, k-path side error {worst_side:.1e}")
    assert worst_area <= 1e-9 and overlaps == 0
    assert worst_side <= 4 * np.finfo(float).eps
    assert secs < 60


def small_tilings():
    out = [(f"path-{k}", gen.ladder_graph(k)) for k in range(1, 13)]
    out += [(f"parallel-{n}x{m}", gen.parallel_paths(n, m)) for n in range(2, 7) for m in range(2, 7)]
    out += [(f"grid-{n}x{m}", gen.grid_with_poles(n, m)) for n in range(1, 6) for m in range(1, 6)]
    tilings = [(name, T.tile_from_two_terminal(g)) for name, g in out]
    return [(name, tl) for name, tl in tilings if tl.n_tiles <= 12]


@pytest.mark.acceptance(7, "tiling crossing harness vs exact enumeration")
def test_c07_tiling_harness(note):
    t0 = time.perf_counter()
    worst, checked = 0.0, 0
    failures = []
    for name, tl in small_tilings():
        for p in (0.5, 2 / 3):
            e = T.crossing_probability_tiling(tl, p, 2000, SEED)
            exact = T.exact_crossing_probability(tl, p)
            worst = max(worst, abs(e.estimate - exact) / e.half_width if e.half_width > 0 else 0.0)
            checked += 1
            if not e.contains(exact, widths=3):
                failures.append(f"{name} p={p:.3f}")
    grid = {n: T.crossing_probability_tiling(T.tile_from_two_terminal(gen.grid_with_poles(n, n)), 0.5, 2000, SEED).estimate for n in range(3, 13)}
    secs = time.perf_counter() - t0
    note(f"{checked} small-tiling checks, worst {worst:.2f} half-widths")
    note(f"grid n=3..12 estimates {min(grid.values()):.3f}..{max(grid.values()):.3f}, {secs:.0f}s")
    assert not failures, failures
    assert all(0.05 < v < 0.95 for v in grid.values())
    assert secs < 300


def cardy_oracle(eta: float) -> float:
    mpmath.mp.dps = 30
    c = mpmath.gamma(mpmath.mpf(2) / 3) / mpmath.gamma(mpmath.mpf(1) / 3) ** 2
    # t = s^3 turns the integrand smooth
    return float(c * mpmath.quad(lambda s: 3 * (1 - s**3) ** (-mpmath.mpf(2) / 3), [0, mpmath.cbrt(eta)]))


@pytest.mark.acceptance(8, "Cardy evaluator")
def test_c08_cardy(note):
    half = abs(H.cardy(0.5) - 0.5)
    grid = np.linspace(0.01, 0.99, 99)
    sym = max(abs(H.cardy(x) + H.cardy(1 - x) - 1) for x in grid)
    quad = max(abs(H.cardy(x) - cardy_oracle(x)) for x in np.arange(1, 10) / 10)
    note(f"|P(1/2)-1/2| {half:.1e}, symmetry {sym:.1e}, quadrature {quad:.1e}")
    assert half <= 1e-10 and sym <= 1e-10 and quad <= 1e-8


@pytest.mark.acceptance(9, "hyperbolic Voronoi crossing vs Cardy as lambda grows")
def test_c09_lambda_ladder(note):
    t0 = time.perf_counter()
    sym = H.lambda_ladder(H.IdealBoundaryQuad.symmetric(), [50, 100, 200], 2000, SEED, workers=WORKERS)
    for row in sym:
        note(f"lambda={row.lam:g}: {row.estimate.estimate:.4f} (3hw {3 * row.estimate.half_width:.3f}, excluded {row.excluded})")
    asym_quad = H.IdealBoundaryQuad.with_cross_ratio(0.25)
    asym = H.lambda_ladder(asym_quad, [200], 2000, SEED, workers=WORKERS)[0]
    secs = time.perf_counter() - t0
    note(f"eta=0.25 lambda=200: {asym.estimate.estimate:.4f} vs cardy {asym.cardy:.4f}, {secs / 60:.1f} min")
    assert all(r.estimate.contains(0.5, widths=3) for r in sym)
    for a, b in zip(sym, sym[1:]):
        assert b.gap <= a.gap + 3 * joint_sigma(a.estimate, b.estimate)
    assert asym.gap <= 0.07
    assert secs < 1800


@pytest.mark.acceptance(10, "isometry and reweighting stability")
def test_c10_isometry_reweighting(note):
    t0 = time.perf_counter()
    lam, trials = 50.0, 2000
    quad = H.IdealBoundaryQuad.with_cross_ratio(0.3)
    a, alpha = H.random_mobius(np.random.default_rng(SEED))
    image = quad.mapped(a, alpha)
    base = H.crossing_probability_hyperbolic(quad, lam, trials=trials, seed=SEED, workers=WORKERS).estimate
    moved = H.crossing_probability_hyperbolic(image, lam, trials=trials, seed=SEED, workers=WORKERS).estimate
    weighted = H.crossing_probability_hyperbolic(quad, lam, trials=trials, seed=SEED + 1, weight="angular", workers=WORKERS).estimate
    secs = time.perf_counter() - t0
    d1, s1 = abs(base.estimate - moved.estimate), joint_sigma(base, moved)
    d2, s2 = abs(base.estimate - weighted.estimate), joint_sigma(base, weighted)
    note(f"Mobius |a|={abs(a):.2f}: {base.estimate:.4f} vs {moved.estimate:.4f} ({d1 / s1:.2f} sigma)")
    note(f"angular weight M=2: {weighted.estimate:.4f} ({d2 / s2:.2f} sigma), {secs:.0f}s")
    assert d1 <= 3 * s1 and d2 <= 3 * s2
    assert secs < 900


REPRO = {
    "one-arm": {"family": "triangular-lattice-disk", "size": 16, "radii": (4, 8, 16)},
    "arc-cross": {"family": "d-regular-hyperbolic", "size": 4},
    "macro": {"family": "triangular-lattice-disk", "size": 8, "r": 8},
    "pc-sweep": {"family": "rhombus", "sizes": (8, 16), "ps": (0.45, 0.5, 0.55), "bootstrap": 200},
    "resistance": {"family": "triangular-lattice-disk", "size": 8, "r_max": 8},
    "cross-tiling": {"fixture": "grid", "n": 3, "ps": (0.5, 2 / 3)},
    "hvoronoi": {"lambdas": (10.0, 20.0)},
}


@pytest.mark.acceptance(11, "byte-identical CSV replay with 1 and 8 workers")
def test_c11_reproducibility(note, tmp_path):
    checked = []
    for tag, params in REPRO.items():
        out = tmp_path / f"{tag}.csv"
        run(ExperimentConfig(tag, SEED, 200, 1, str(out), params))
        first = out.read_bytes()
        replay = load_config(tmp_path / f"{tag}.csv.replay.ini")
        for workers in (1, 8):
            again = tmp_path / f"{tag}-{workers}.csv"
            run(replay.with_updates(workers=workers), again)
            assert again.read_bytes() == first, f"{tag} with {workers} workers"
        checked.append(tag)
    note(f"{len(checked)} experiments replayed: {', '.join(checked)}")
