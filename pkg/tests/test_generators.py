import numpy as np
import pytest

from helpers import bfs_distances
from percolab import generators as gen
from percolab.harmonic import effective_resistance
from percolab.triangulation import TriangulationError


def test_lattice_r1_is_wheel6():
    t = gen.triangular_lattice_disk(1)
    assert t.n_vertices == 7 and t.degree(0) == 6 and len(t.boundary) == 6


def test_lattice_r2_size():
    t = gen.triangular_lattice_disk(2)
    assert t.n_vertices == 19
    d = bfs_distances(t.rotation, 0)
    assert d.max() == 2


def test_lattice_r3_histogram():
    assert gen.triangular_lattice_disk(3).degree_histogram() == {6: 19}


@pytest.mark.parametrize("d", [7, 8])
def test_regular_r1_is_wheel(d):
    t = gen.regular_hyperbolic_triangulation(d, 1)
    assert t.n_vertices == d + 1 and t.degree(0) == d and len(t.boundary) == d


def test_regular_layers_and_degrees():
    for r in range(2, 7):
        t = gen.regular_hyperbolic_triangulation(7, r)
        layers = np.bincount(t.distances_from(0))
        assert (np.diff(layers) > 0).all()
        assert set(t.degree_histogram()) == {7}
        assert t.degree_histogram()[7] == len(t.interior_vertices)
    ratios = layers[2:] / layers[1:-1]
    # ratio settles near the growth constant of the {3,7} tiling (about 2.618)
    assert abs(ratios[-1] - ratios[-2]) < 0.05
    assert 2.4 < ratios[-1] < 2.8


def test_layered_six_is_lattice_ball():
    t = gen.layered_triangulation(6, 4)
    assert t.n_vertices == 1 + 3 * 4 * 5
    assert t.degree_histogram() == {6: 1 + 3 * 3 * 4}


def test_mixed_degree_defects_sparse_and_deterministic():
    a = gen.mixed_degree_triangulation(12, seed=3)
    b = gen.mixed_degree_triangulation(12, seed=3)
    assert a.to_text() == b.to_text()
    hist = a.degree_histogram()
    assert set(hist) <= {6, 7} and hist.get(7, 0) > 0
    assert hist[7] < 0.2 * sum(hist.values())


def test_determinism():
    assert gen.regular_hyperbolic_triangulation(7, 4).to_text() == gen.regular_hyperbolic_triangulation(7, 4).to_text()
    assert gen.triangular_lattice_disk(5).to_text() == gen.triangular_lattice_disk(5).to_text()


def test_bad_arguments():
    with pytest.raises(ValueError):
        gen.regular_hyperbolic_triangulation(6, 3)
    with pytest.raises(ValueError):
        gen.triangular_lattice_disk(0)
    with pytest.raises(ValueError):
        gen.rhombus(1)


def test_rhombus_layout():
    t, left, right = gen.rhombus(4)
    assert t.n_vertices == 16
    assert left.tolist() == [0, 1, 2, 3] and right.tolist() == [12, 13, 14, 15]
    assert t.degrees.max() == 6


def test_boundary_arcs_partition():
    t = gen.triangular_lattice_disk(4)
    arcs = gen.boundary_arcs(t)
    joined = np.concatenate(arcs)
    assert sorted(joined.tolist()) == sorted(t.boundary)
    assert [len(a) for a in arcs] == [6, 6, 6, 6]


def test_ladder_and_paths_resistance():
    g = gen.ladder_graph(1)
    assert g.edges.tolist() == [[0, 1]]
    g = gen.ladder_graph(3)
    assert effective_resistance(g.adjacency_matrix(), [g.source], [g.sink]) == pytest.approx(3.0, abs=1e-9)
    g = gen.parallel_paths(2, 2)
    assert effective_resistance(g.adjacency_matrix(), [g.source], [g.sink]) == pytest.approx(1.0, abs=1e-9)


def test_grid_with_poles_resistance():
    g = gen.grid_with_poles(1, 4)
    # two pole edges plus three grid edges in series
    assert effective_resistance(g.adjacency_matrix(), [g.source], [g.sink]) == pytest.approx(5.0, abs=1e-9)
    g = gen.grid_with_poles(2, 2)
    # two parallel rows of 3 edges; rungs carry no current by symmetry
    assert effective_resistance(g.adjacency_matrix(), [g.source], [g.sink]) == pytest.approx(1.5, abs=1e-9)
    for n in (3, 6, 9):
        g = gen.grid_with_poles(n, n)
        assert effective_resistance(g.adjacency_matrix(), [g.source], [g.sink]) == pytest.approx((n + 1) / n, abs=1e-8)


def test_wire_triangulation_arcs():
    t = gen.triangular_lattice_disk(3)
    arcs = gen.boundary_arcs(t)
    g, ids = gen.wire_triangulation(t, list(arcs[0]), list(arcs[2]))
    assert g.n_vertices == t.n_vertices + 2
    assert ids[-1] == -1 and ids[-2] == -1
    assert sorted(g.rotation[g.source]) == sorted(arcs[0].tolist())
    with pytest.raises(ValueError):
        gen.wire_triangulation(t, [0], list(arcs[2]))
