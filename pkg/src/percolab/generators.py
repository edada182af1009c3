"""Triangulation families and small two-terminal networks."""
from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from . import rng
from .triangulation import Triangulation, TriangulationError, build_from_rotation

FAMILIES = ("triangular-lattice-disk", "d-regular-hyperbolic", "mixed-degree", "rhombus", "ladder", "grid-with-poles")

# axial directions of the triangular lattice in CCW order
_HEX_DIRS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))
_SQRT3_2 = math.sqrt(3) / 2


def _axial_xy(i: int, j: int) -> tuple[float, float]:
    return i + 0.5 * j, _SQRT3_2 * j


def triangulation_from_faces(
    triangles: Sequence[Sequence[int]],
    n_vertices: int,
    positions: np.ndarray | None = None,
    degree_bound: int | None = None,
    name: str = "",
) -> Triangulation:
    """Assemble a rotation system from CCW triangles of a disk and validate it."""
    succ: list[dict[int, int]] = [{} for _ in range(n_vertices)]
    for a, b, c in triangles:
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            if y in succ[x]:
                raise TriangulationError("multi-edge", f"corner ({x};{y}) used twice")
            succ[x][y] = z
    rotation = []
    boundary_next: dict[int, int] = {}
    for v in range(n_vertices):
        s = succ[v]
        if not s:
            raise TriangulationError("disconnected", f"vertex {v} lies in no triangle")
        targets = set(s.values())
        starts = [u for u in s if u not in targets]
        if len(starts) > 1:
            raise TriangulationError("boundary not a simple outer cycle", f"pinch at {v}")
        first = starts[0] if starts else next(iter(s))
        order = [first]
        while order[-1] in s and len(order) <= len(s):
            nxt = s[order[-1]]
            if nxt == first:
                break
            order.append(nxt)
        rotation.append(order)
        if starts:
            # v -> last is a boundary edge traversed with the interior on the left
            boundary_next[v] = order[0]
    if not boundary_next:
        raise TriangulationError("boundary not a simple outer cycle", "closed surface")
    # CCW boundary: each boundary vertex is followed by the start of its open fan
    start = min(boundary_next)
    cyc = [start]
    while True:
        nxt = boundary_next[cyc[-1]]
        if nxt == start:
            break
        cyc.append(nxt)
        if len(cyc) > n_vertices:
            raise TriangulationError("boundary not a simple outer cycle", "boundary walk does not close")
    return build_from_rotation(rotation, cyc, degree_bound=degree_bound, positions=positions, name=name)


def triangular_lattice_disk(r: int) -> Triangulation:
    """Hexagonal ball of radius ``r`` in the triangular lattice; vertex 0 is the centre."""
    if r < 1:
        raise ValueError("r must be >= 1")
    coords = [(0, 0)]
    for k in range(1, r + 1):
        i, j = k, 0
        for di, dj in _HEX_DIRS[2:] + _HEX_DIRS[:2]:
            for _ in range(k):
                coords.append((i, j))
                i, j = i + di, j + dj
    index = {c: n for n, c in enumerate(coords)}
    tris = []
    for (i, j), a in index.items():
        for (d1i, d1j), (d2i, d2j) in ((_HEX_DIRS[0], _HEX_DIRS[1]), (_HEX_DIRS[1], _HEX_DIRS[2])):
            b = index.get((i + d1i, j + d1j))
            c = index.get((i + d2i, j + d2j))
            if b is not None and c is not None:
                tris.append((a, b, c))
    pos = np.array([_axial_xy(i, j) for i, j in coords])
    return triangulation_from_faces(tris, len(coords), pos, degree_bound=6, name=f"tri-lattice-r{r}")


def _layered(targets: Callable[[int, int], int], r: int, name: str, degree_bound: int) -> Triangulation:
    """Grow a disk layer by layer so every non-final vertex ends with degree ``targets(v, layer)``."""
    hub_deg = targets(0, 0)
    tris: list[tuple[int, int, int]] = []
    cycle = list(range(1, hub_deg + 1))
    for k in range(hub_deg):
        tris.append((0, cycle[k], cycle[(k + 1) % hub_deg]))
    n = hub_deg + 1
    deg = [hub_deg] + [3] * hub_deg
    layer_of = [0] + [1] * hub_deg
    for layer in range(1, r):
        m = len(cycle)
        need = []
        for v in cycle:
            extra = targets(v, layer) - deg[v]
            if extra < 1:
                raise TriangulationError("degree bound exceeded", f"vertex {v} already has degree {deg[v]}")
            need.append(extra)
        total = sum(e - 1 for e in need)
        if total < 3:
            raise TriangulationError("degenerate input", f"layer {layer + 1} would have {total} vertices")
        new = list(range(n, n + total))
        n += total
        deg.extend([2] * total)  # two neighbours along the new cycle
        layer_of.extend([layer + 1] * total)
        s = 0
        for i, v in enumerate(cycle):
            for j in range(need[i] - 1):
                w0, w1 = new[(s + j) % total], new[(s + j + 1) % total]
                tris.append((w0, w1, v))
            fan = [new[(s + j) % total] for j in range(need[i])]
            for w in fan:
                deg[w] += 1
            deg[v] += need[i]  # fan neighbours
            s += need[i] - 1
            nxt_v = cycle[(i + 1) % m]
            tris.append((nxt_v, v, new[s % total]))
        cycle = new
    t = triangulation_from_faces(tris, n, None, degree_bound=degree_bound, name=name)
    return t


def regular_hyperbolic_triangulation(d: int, r: int) -> Triangulation:
    """Ball of radius ``r`` in the ``d``-regular triangulation (every interior degree ``d``)."""
    if d < 7:
        raise ValueError("d must be >= 7 for the hyperbolic family")
    if r < 1:
        raise ValueError("r must be >= 1")
    return _layered(lambda v, layer: d, r, f"{d}-regular-r{r}", d)


def layered_triangulation(d: int, r: int) -> Triangulation:
    """Same layer recursion for any ``d >= 6``; ``d = 6`` gives the hexagonal lattice ball."""
    if d < 6:
        raise ValueError("d must be >= 6")
    return _layered(lambda v, layer: d, r, f"{d}-layered-r{r}", d)


def mixed_degree_triangulation(
    r: int, seed: int, density: float = 1.0, exponent: float = 1.5
) -> Triangulation:
    """Degree-6 layer recursion with sparse degree-7 defects.

    A vertex in layer ``k >= 1`` becomes a defect with probability
    ``min(1, density * k**-exponent)``, drawn from the counter-based stream
    keyed by ``seed``.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    key = rng.derive_seed(seed, "mixed-degree")
    cache: dict[int, int] = {}

    def target(v: int, layer: int) -> int:
        if v not in cache:
            if layer == 0:
                cache[v] = 6
            else:
                prob = min(1.0, density * layer ** (-exponent))
                cache[v] = 7 if rng.uniform(key, 0, v) < prob else 6
        return cache[v]

    return _layered(target, r, f"mixed-r{r}-s{seed}", 7)


def rhombus(n: int) -> tuple[Triangulation, np.ndarray, np.ndarray]:
    """``n x n`` rhombus of the triangular lattice (Hex board).

    Returns the triangulation plus the left-column and right-column vertex ids.
    Vertex ``(i, j)`` has id ``i * n + j`` where ``i`` is the column.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    idx = lambda i, j: i * n + j  # noqa: E731
    tris = []
    for i in range(n - 1):
        for j in range(n - 1):
            tris.append((idx(i, j), idx(i + 1, j), idx(i, j + 1)))
            tris.append((idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)))
    pos = np.array([_axial_xy(i, j) for i in range(n) for j in range(n)])
    t = triangulation_from_faces(tris, n * n, pos, degree_bound=6, name=f"rhombus-{n}")
    left = np.array([idx(0, j) for j in range(n)])
    right = np.array([idx(n - 1, j) for j in range(n)])
    return t, left, right


def boundary_arcs(t: Triangulation, fractions: Sequence[float] = (0.25, 0.25, 0.25, 0.25), offset: int = 0) -> list[np.ndarray]:
    """Split the CCW boundary cycle into consecutive arcs of the given relative lengths."""
    b = np.roll(np.asarray(t.boundary), -offset)
    L = len(b)
    if len(fractions) < 2 or L < len(fractions):
        raise ValueError("need at least as many boundary vertices as arcs")
    cuts = np.round(np.cumsum([0.0, *fractions]) / sum(fractions) * L).astype(int)
    arcs = [b[cuts[i] : cuts[i + 1]] for i in range(len(fractions))]
    if any(len(a) == 0 for a in arcs):
        raise ValueError("an arc is empty")
    return arcs


@dataclass(frozen=True, eq=False)
class TwoTerminalGraph:
    """Planar graph with a CCW rotation system and marked source and sink."""

    rotation: tuple[tuple[int, ...], ...]
    source: int
    sink: int
    positions: np.ndarray | None = field(default=None, repr=False)
    name: str = ""

    @property
    def n_vertices(self) -> int:
        return len(self.rotation)

    @property
    def edges(self) -> np.ndarray:
        out = [(v, u) for v, nbrs in enumerate(self.rotation) for u in nbrs if v < u]
        return np.array(out, dtype=np.int64).reshape(-1, 2)

    def adjacency_matrix(self) -> sparse.csr_matrix:
        e = self.edges
        n = self.n_vertices
        a = sparse.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
        return (a + a.T).tocsr()


def _rotation_from_positions(adj: Sequence[Sequence[int]], pos: np.ndarray) -> tuple[tuple[int, ...], ...]:
    out = []
    for v, nbrs in enumerate(adj):
        ang = [math.atan2(pos[u][1] - pos[v][1], pos[u][0] - pos[v][0]) for u in nbrs]
        out.append(tuple(u for _, u in sorted(zip(ang, nbrs))))
    return tuple(out)


def _graph_from_edges(n: int, edges, pos, source, sink, name) -> TwoTerminalGraph:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    pos = np.asarray(pos, dtype=float)
    return TwoTerminalGraph(_rotation_from_positions(adj, pos), source, sink, pos, name)


def ladder_graph(k: int) -> TwoTerminalGraph:
    """Path of ``k`` unit edges from source 0 to sink ``k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    edges = [(i, i + 1) for i in range(k)]
    pos = [(i, 0.0) for i in range(k + 1)]
    return _graph_from_edges(k + 1, edges, pos, 0, k, f"path-{k}")


def parallel_paths(n_paths: int, length: int) -> TwoTerminalGraph:
    """``n_paths`` internally disjoint paths of ``length`` edges between source 0 and sink 1."""
    if n_paths < 1 or length < 1:
        raise ValueError("need n_paths >= 1 and length >= 1")
    if length == 1 and n_paths > 1:
        raise ValueError("parallel single edges would be a multigraph")
    edges = []
    pos = [(0.0, 0.0), (float(length), 0.0)]
    n = 2
    for p in range(n_paths):
        y = p - (n_paths - 1) / 2
        prev = 0
        for s in range(1, length):
            pos.append((float(s), y))
            edges.append((prev, n))
            prev = n
            n += 1
        edges.append((prev, 1))
    return _graph_from_edges(n, edges, pos, 0, 1, f"parallel-{n_paths}x{length}")


def grid_with_poles(n: int, m: int) -> TwoTerminalGraph:
    """``n`` rows by ``m`` columns grid; a source vertex is wired by unit edges to
    every left-column vertex and a sink vertex to every right-column vertex."""
    if n < 1 or m < 1:
        raise ValueError("n, m must be >= 1")
    idx = lambda i, j: 2 + i * m + j  # noqa: E731
    pos = [(0.0, -(n - 1) / 2), (m + 1.0, -(n - 1) / 2)]
    pos += [(j + 1.0, -float(i)) for i in range(n) for j in range(m)]
    edges = []
    for i in range(n):
        edges.append((0, idx(i, 0)))
        edges.append((idx(i, m - 1), 1))
        for j in range(m - 1):
            edges.append((idx(i, j), idx(i, j + 1)))
    for i in range(n - 1):
        for j in range(m):
            edges.append((idx(i, j), idx(i + 1, j)))
    return _graph_from_edges(2 + n * m, edges, pos, 0, 1, f"grid-{n}x{m}")


def wire_triangulation(
    t: Triangulation, source: int | Sequence[int], sink: int | Sequence[int]
) -> tuple[TwoTerminalGraph, np.ndarray]:
    """Two-terminal graph from a triangulation.

    ``source`` / ``sink`` are either a single vertex or a contiguous arc of the
    boundary (CCW order); an arc is wired by unit edges to a new terminal
    vertex placed in the outer face.  Returns the graph and the map from new
    ids to triangulation ids (``-1`` for added terminals).
    """
    rot = [list(r) for r in t.rotation]
    ids = list(range(t.n_vertices))
    b = list(t.boundary)
    bpos = {v: i for i, v in enumerate(b)}

    def attach(arc) -> int:
        arc = [int(x) for x in arc]
        if any(v not in bpos for v in arc):
            raise ValueError("wired terminals must lie on the boundary")
        new = len(rot)
        for v in arc:
            i = bpos[v]
            prev_v = b[i - 1]
            nxt = b[(i + 1) % len(b)]
            r = rot[v]
            # outer gap at v is between prev_v and nxt in CCW order
            k = r.index(prev_v)
            if r[(k + 1) % len(r)] != nxt:
                raise TriangulationError("boundary not a simple outer cycle", f"unexpected rotation at {v}")
            r.insert(k + 1, new)
        rot.append(arc[::-1])
        ids.append(-1)
        return new

    s = int(source) if np.ndim(source) == 0 else attach(source)
    k = int(sink) if np.ndim(sink) == 0 else attach(sink)
    return TwoTerminalGraph(tuple(tuple(r) for r in rot), s, k, None, f"{t.name}:wired"), np.array(ids)
