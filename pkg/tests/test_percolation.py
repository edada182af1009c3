import itertools

import numpy as np
import pytest

from helpers import bfs_components, bfs_distances, crosses, triangle, wheel
from percolab import generators as gen
from percolab import percolation as perc


def six_cycle_adj():
    return [[(v - 1) % 6, (v + 1) % 6] for v in range(6)]


def test_sample_sites_extremes():
    t = gen.triangular_lattice_disk(5)
    assert not perc.sample_sites(t, 0.0, 1).open.any()
    assert perc.sample_sites(t, 1.0, 1).open.all()
    with pytest.raises(ValueError):
        perc.sample_sites(t, 1.5, 1)


def test_sample_sites_golden_triangle():
    conf = perc.sample_sites(triangle(), 0.5, 42)
    assert conf.open.tolist() == [True, False, True]


def test_open_fraction():
    t = gen.triangular_lattice_disk(60)
    conf = perc.sample_sites(t, 0.3, 8)
    n = t.n_vertices
    assert abs(conf.open.mean() - 0.3) < 4 * np.sqrt(0.21 / n)


def test_clusters_small_cases():
    t = triangle()
    lab = perc.clusters(t, perc.SiteConfiguration(np.ones(3, bool), 1.0, 0))
    assert lab.n_clusters == 1 and lab.sizes.tolist() == [3]
    from scipy import sparse

    A = sparse.lil_matrix((6, 6))
    for v, nb in enumerate(six_cycle_adj()):
        for u in nb:
            A[v, u] = 1

    class G:
        n_vertices = 6

        def adjacency_matrix(self):
            return A.tocsr()

    alt = np.array([True, False] * 3)
    lab = perc.clusters(G(), perc.SiteConfiguration(alt, 0.5, 0))
    assert lab.n_clusters == 3 and sorted(lab.sizes.tolist()) == [1, 1, 1]


@pytest.mark.parametrize("seed", range(10))
def test_union_find_matches_bfs(seed):
    t = gen.mixed_degree_triangulation(8, seed=seed)
    assert t.n_vertices <= 1000
    conf = perc.sample_sites(t, 0.55, seed)
    lab = perc.clusters(t, conf)
    comps = bfs_components(t.rotation, conf.open)
    assert lab.n_clusters == len(comps)
    assert lab.sizes.sum() == conf.open.sum()
    for comp in comps:
        ids = {int(lab.labels[v]) for v in comp}
        assert len(ids) == 1
    assert (lab.labels[~conf.open] == -1).all()


def test_one_arm_r1_exact():
    t = gen.triangular_lattice_disk(4)
    assert perc.one_arm_exact_r1(0.5, 6) == 0.4921875
    e = perc.one_arm_probability(t, 0, 1, 0.5, 20000, seed=3)
    assert e.contains(0.4921875, widths=3)


def test_one_arm_p1():
    t = gen.triangular_lattice_disk(6)
    for r, e in perc.one_arm_curve(t, 0, [1, 3, 6], 1.0, 50, seed=1):
        assert e.estimate == 1.0


def test_arm_depths_match_bfs_oracle():
    t = gen.regular_hyperbolic_triangulation(7, 5)
    seed, p, rmax = 77, 0.5, 5
    depth = perc.arm_depths(t, 0, rmax, p, 200, seed)
    dist = bfs_distances(t.rotation, 0)
    for k in range(200):
        conf = perc.sample_sites(t, p, seed, k)
        if not conf.open[0]:
            assert depth[k] == -1
            continue
        comp = next(c for c in bfs_components(t.rotation, conf.open) if 0 in c)
        assert depth[k] == min(rmax, max(int(dist[v]) for v in comp))


def test_crossing_thresholds_match_oracle():
    t, left, right = gen.rhombus(6)
    seed = 5
    thr = perc.crossing_thresholds(t, left, right, 100, seed)
    for p in (0.3, 0.5, 0.7):
        for k in range(100):
            conf = perc.sample_sites(t, p, seed, k)
            assert (thr[k] < p) == crosses(t.rotation, conf.open, left, right)


def test_monotone_coupling():
    t = gen.triangular_lattice_disk(10)
    seed = 9
    for k in range(20):
        a = perc.sample_sites(t, 0.4, seed, k).open
        b = perc.sample_sites(t, 0.6, seed, k).open
        assert not (a & ~b).any()
    depth_lo = perc.arm_depths(t, 0, 10, 0.45, 300, seed)
    depth_hi = perc.arm_depths(t, 0, 10, 0.55, 300, seed)
    assert (depth_lo <= depth_hi).all()
    lo = perc.macroscopic_counts(t, 10, 0.3, 300, seed)
    arcs = perc.ball_arcs(t)
    c_lo = perc.boundary_arc_crossing(t, arcs, 0.45, 300, seed)
    c_hi = perc.boundary_arc_crossing(t, arcs, 0.55, 300, seed)
    assert c_lo.successes <= c_hi.successes
    assert lo.min() >= 0


def wheel_enumeration(fn):
    t = wheel(6)
    total = 0.0
    for bits in itertools.product([False, True], repeat=7):
        total += fn(t, np.array(bits))
    return total / 128


def test_wheel_macro_enumeration():
    def count(t, is_open):
        return sum(1 for c in bfs_components(t.rotation, is_open) if len(c) >= 2)

    exact = wheel_enumeration(count)
    t = wheel(6)
    counts = perc.macroscopic_counts(t, 1, 0.5, 4000, seed=21)
    for k in range(200):
        assert counts[k] == count(t, perc.sample_sites(t, 0.5, 21, k).open)
    m = perc.macroscopic_cluster_count(t, 1, 0.5, 4000, seed=21)
    assert abs(m.mean - exact) <= 3 * m.std / np.sqrt(m.trials)


def test_macro_extremes():
    t = gen.triangular_lattice_disk(6)
    assert perc.macroscopic_cluster_count(t, 6, 1.0, 20, 1).mean == 1.0
    assert perc.macroscopic_cluster_count(t, 6, 0.0, 20, 1).mean == 0.0


def exact_diameters(adj, comp):
    best = 0
    for s in comp:
        d = {s: 0}
        frontier = [s]
        while frontier:
            nxt = []
            for v in frontier:
                for u in adj[v]:
                    if u in comp and u not in d:
                        d[u] = d[v] + 1
                        nxt.append(u)
            frontier = nxt
        best = max(best, max(d.values()))
    return best


def test_macro_double_bfs_bounds():
    t = gen.triangular_lattice_disk(6)
    r, seed = 6, 4
    counts = perc.macroscopic_counts(t, r, 0.5, 60, seed)
    for k in range(60):
        conf = perc.sample_sites(t, 0.5, seed, k)
        diams = [exact_diameters(t.rotation, c) for c in bfs_components(t.rotation, conf.open)]
        # double BFS returns an eccentricity between diam/2 and diam
        assert sum(d >= 2 * 3 for d in diams) <= counts[k] <= sum(d >= 3 for d in diams)


def test_wheel_arc_crossing_enumeration():
    t = wheel(6)
    b = list(t.boundary)
    arcs = [b[0:1], b[1:3], b[3:4], b[4:6]]

    def hit(tt, is_open):
        return float(crosses(tt.rotation, is_open, arcs[0], arcs[2]))

    exact = wheel_enumeration(hit)
    e = perc.boundary_arc_crossing(t, arcs, 0.5, 10000, seed=2)
    assert e.contains(exact, widths=3)
    assert perc.boundary_arc_crossing(t, arcs, 1.0, 10, 2).estimate == 1.0
    assert perc.boundary_arc_crossing(t, arcs, 0.0, 10, 2).estimate == 0.0


def test_arc_validation():
    t = wheel(6)
    b = list(t.boundary)
    with pytest.raises(ValueError, match="arcs not disjoint/cyclic"):
        perc.boundary_arc_crossing(t, [b[0:2], b[1:3], b[3:4], b[4:6]], 0.5, 10, 1)
    with pytest.raises(ValueError, match="arcs not disjoint/cyclic"):
        perc.boundary_arc_crossing(t, [b[0:1], b[3:4], b[1:3], b[4:6]], 0.5, 10, 1)


@pytest.mark.parametrize("n", [2, 3])
def test_rhombus_exact_half(n):
    assert perc.rhombus_crossing_exact(n, 0.5) == pytest.approx(0.5, abs=1e-15)


def test_pc_sweep_extremes_and_rows():
    res = perc.pc_sweep("rhombus", [4, 8], [0.0, 0.5, 1.0], 500, seed=1, bootstrap=200)
    for row in res.rows:
        if row.p == 0.0:
            assert row.estimate.estimate == 0.0
        if row.p == 1.0:
            assert row.estimate.estimate == 1.0
        if row.p == 0.5 and row.statistic == "crossing":
            assert row.estimate.contains(0.5, widths=3)
    assert res.pc_lo <= res.pc <= res.pc_hi
    assert abs(res.pc - 0.5) < 0.05


def test_workers_do_not_change_results():
    t = gen.triangular_lattice_disk(12)
    a = perc.arm_depths(t, 0, 12, 0.5, 400, 3, workers=1)
    b = perc.arm_depths(t, 0, 12, 0.5, 400, 3, workers=4)
    assert np.array_equal(a, b)
    arcs = perc.ball_arcs(t)
    x = perc.crossing_thresholds(t, arcs[0], arcs[2], 300, 3, workers=1)
    y = perc.crossing_thresholds(t, arcs[0], arcs[2], 300, 3, workers=3)
    assert np.array_equal(x, y)


def test_radius_too_large():
    with pytest.raises(ValueError):
        perc.one_arm_probability(gen.triangular_lattice_disk(3), 0, 5, 0.5, 10, 1)
