import numpy as np
import pytest
from scipy import sparse

from helpers import triangle
from percolab import generators as gen
from percolab.harmonic import (
    SolverError,
    classify_walk,
    effective_resistance,
    pcg,
    resistance_curve,
    solve_dirichlet,
)


def path(k):
    return gen.ladder_graph(k).adjacency_matrix()


def grid(n, m):
    idx = lambda i, j: i * m + j  # noqa: E731
    rows, cols = [], []
    for i in range(n):
        for j in range(m):
            if j + 1 < m:
                rows.append(idx(i, j)); cols.append(idx(i, j + 1))
            if i + 1 < n:
                rows.append(idx(i, j)); cols.append(idx(i + 1, j))
    a = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n * m, n * m))
    return (a + a.T).tocsr(), idx


def test_path_midpoint():
    sol = solve_dirichlet(path(2), {0: 0.0, 2: 1.0})
    assert sol.potential[1] == pytest.approx(0.5, abs=1e-12)


def test_constant_boundary():
    A, _ = grid(4, 4)
    bnd = {0: 2.5, 15: 2.5, 3: 2.5}
    sol = solve_dirichlet(A, bnd)
    assert np.allclose(sol.potential, 2.5)
    assert np.abs(sol.edge_current).max() == 0.0


def test_grid_middle_column():
    A, idx = grid(3, 3)
    bnd = {idx(i, 0): 0.0 for i in range(3)} | {idx(i, 2): 1.0 for i in range(3)}
    sol = solve_dirichlet(A, bnd)
    assert [sol.potential[idx(i, 1)] for i in range(3)] == pytest.approx([0.5] * 3, abs=1e-10)


def test_kirchhoff_antisymmetry_maximum_principle():
    t = gen.triangular_lattice_disk(6)
    bnd = {int(v): float(np.sin(k)) for k, v in enumerate(t.boundary)}
    sol = solve_dirichlet(t, bnd, tol=1e-12)
    net = sol.net_current()
    inner = t.interior_vertices
    assert np.abs(net[inner]).max() < 1e-9
    u, v = sol.edges[5]
    assert sol.current(int(u), int(v)) == -sol.current(int(v), int(u))
    vals = np.array(list(bnd.values()))
    assert vals.min() - 1e-12 <= sol.potential[inner].min()
    assert sol.potential[inner].max() <= vals.max() + 1e-12


def test_resistance_series_parallel():
    assert effective_resistance(path(4), [0], [4]) == pytest.approx(4.0, abs=1e-9)
    g = gen.parallel_paths(2, 2)
    assert effective_resistance(g, [g.source], [g.sink]) == pytest.approx(1.0, abs=1e-9)


def laplacian_pinv_resistance(A, s, t):
    A = A.toarray()
    L = np.diag(A.sum(1)) - A
    P = np.linalg.pinv(L)
    e = np.zeros(len(A))
    e[s], e[t] = 1, -1
    return float(e @ P @ e)


SMALL = [
    gen.triangular_lattice_disk(3),
    gen.regular_hyperbolic_triangulation(7, 2),
    gen.regular_hyperbolic_triangulation(8, 2),
    gen.mixed_degree_triangulation(2, seed=1),
]


@pytest.mark.parametrize("seed", range(len(SMALL)))
def test_pinv_oracle(seed):
    t = SMALL[seed]
    assert t.n_vertices <= 50
    A = t.adjacency_matrix()
    rng = np.random.default_rng(seed)
    s, u = rng.choice(t.n_vertices, 2, replace=False)
    assert effective_resistance(A, [s], [u]) == pytest.approx(laplacian_pinv_resistance(A, s, u), rel=1e-8)


def test_energy_minimal():
    t = gen.triangular_lattice_disk(4)
    bnd = {int(v): float(k % 3) for k, v in enumerate(t.boundary)}
    sol = solve_dirichlet(t, bnd, tol=1e-12)
    rng = np.random.default_rng(0)
    e = sol.edges
    for _ in range(10):
        phi = sol.potential.copy()
        phi[t.interior_vertices] += 1e-3 * rng.standard_normal(len(t.interior_vertices))
        energy = float(((phi[e[:, 0]] - phi[e[:, 1]]) ** 2).sum())
        assert energy > sol.energy


def test_rayleigh_monotone_curve():
    t = gen.triangular_lattice_disk(10)
    curve = resistance_curve(t, 0, range(1, 11))
    assert all(b >= a for a, b in zip(curve.resistance, curve.resistance[1:]))
    # removing an edge never decreases resistance
    A = t.adjacency_matrix().tolil()
    base = effective_resistance(A.tocsr(), [0], [int(t.boundary[0])])
    A[0, 1] = A[1, 0] = 0
    assert effective_resistance(A.tocsr(), [0], [int(t.boundary[0])]) >= base


def test_classify_walk_examples():
    _, verdict = classify_walk(gen.triangular_lattice_disk(32), 32)
    assert verdict == "recurrent-like"
    _, verdict = classify_walk(gen.regular_hyperbolic_triangulation(7, 10), 10)
    assert verdict == "transient-like"


def test_classify_walk_too_small():
    with pytest.raises(ValueError, match="r_max too small"):
        classify_walk(triangle(), 4)
    with pytest.raises(ValueError, match="r_max too small"):
        classify_walk(gen.triangular_lattice_disk(3), 2)


def test_solver_errors():
    with pytest.raises(SolverError):
        solve_dirichlet(path(2), {})
    two = sparse.block_diag([path(1), path(1)]).tocsr()
    with pytest.raises(SolverError):
        solve_dirichlet(two, {0: 1.0})
    A, _ = grid(10, 10)
    L = (sparse.diags(np.asarray(A.sum(1)).ravel() + 1e-3) - A).tocsr()
    with pytest.raises(SolverError):
        pcg(L, np.ones(100), maxiter=2)
    with pytest.raises(ValueError):
        effective_resistance(path(2), [0], [0])
