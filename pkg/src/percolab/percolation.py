"""Bernoulli site percolation on triangulations.

Site ``v`` in trial ``k`` carries the counter-based uniform
``U = rng.uniform(seed, k, v)`` and is open at parameter ``p`` iff ``U < p``,
so configurations at different ``p`` are coupled monotonically.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import rng
from .generators import boundary_arcs, layered_triangulation, mixed_degree_triangulation, regular_hyperbolic_triangulation, rhombus, triangular_lattice_disk
from .parallel import map_chunks
from .rng import trial_key_nb, uniform_nb
from .stats import EstimateWithCI, MeanWithCI
from .triangulation import Triangulation


@dataclass(frozen=True)
class SiteConfiguration:
    open: np.ndarray
    p: float
    seed: int
    trial: int = 0


@dataclass(frozen=True)
class ClusterLabeling:
    labels: np.ndarray  # cluster id per vertex, -1 for closed vertices
    sizes: np.ndarray  # size of cluster id k

    @property
    def n_clusters(self) -> int:
        return len(self.sizes)


def sample_sites(graph, p: float, seed: int, trial: int = 0) -> SiteConfiguration:
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    n = graph.n_vertices if hasattr(graph, "n_vertices") else int(graph)
    return SiteConfiguration(rng.uniforms(seed, trial, n) < p, float(p), int(seed), int(trial))


# --- kernels -----------------------------------------------------------------


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def _union(parent, size, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return ra
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]
    return ra


@njit(cache=True)
def _uf_labels(indptr, indices, is_open):
    n = len(is_open)
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    for v in range(n):
        if not is_open[v]:
            continue
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            if u > v and is_open[u]:
                _union(parent, size, v, u)
    labels = np.full(n, -1, dtype=np.int64)
    root_label = np.full(n, -1, dtype=np.int64)
    count = 0
    for v in range(n):
        if is_open[v]:
            r = _find(parent, v)
            if root_label[r] < 0:
                root_label[r] = count
                count += 1
            labels[v] = root_label[r]
    sizes = np.zeros(count, dtype=np.int64)
    for v in range(n):
        if labels[v] >= 0:
            sizes[labels[v]] += 1
    return labels, sizes


@njit(cache=True)
def _arm_depths(indptr, indices, dist, center, rmax, p, seed, t0, t1):
    """Per trial: farthest distance (capped at rmax) reached by the centre's open cluster; -1 if closed."""
    n = len(dist)
    stamp = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    out = np.empty(t1 - t0, dtype=np.int64)
    for t in range(t0, t1):
        key = trial_key_nb(seed, t)
        if uniform_nb(key, center) >= p:
            out[t - t0] = -1
            continue
        head = 0
        tail = 1
        queue[0] = center
        stamp[center] = t
        best = 0
        while head < tail and best < rmax:
            v = queue[head]
            head += 1
            for k in range(indptr[v], indptr[v + 1]):
                u = indices[k]
                if stamp[u] == t or dist[u] < 0 or dist[u] > rmax:
                    continue
                stamp[u] = t
                if uniform_nb(key, u) < p:
                    queue[tail] = u
                    tail += 1
                    if dist[u] > best:
                        best = dist[u]
        out[t - t0] = best
    return out


@njit(cache=True)
def _nz_thresholds(indptr, indices, allowed, src, dst, seed, t0, t1):
    """Newman-Ziff sweep per trial: the smallest p at which an open path joins src to dst.

    Sites (restricted to ``allowed``) are added in increasing order of their
    uniforms; the answer is the uniform of the site whose addition first
    merges the virtual source and sink nodes, or 2.0 if that never happens.
    """
    n = len(allowed)
    cand = np.flatnonzero(allowed)
    out = np.empty(t1 - t0)
    parent = np.arange(n + 2)
    size = np.ones(n + 2, dtype=np.int64)
    present = np.zeros(n, dtype=np.bool_)
    u = np.empty(len(cand))
    S = n
    T = n + 1
    for t in range(t0, t1):
        key = trial_key_nb(seed, t)
        for i in range(len(cand)):
            u[i] = uniform_nb(key, cand[i])
        order = np.argsort(u, kind="mergesort")
        for i in range(n + 2):
            parent[i] = i
            size[i] = 1
        present[:] = False
        thr = 2.0
        for oi in range(len(order)):
            v = cand[order[oi]]
            present[v] = True
            if src[v]:
                _union(parent, size, v, S)
            if dst[v]:
                _union(parent, size, v, T)
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if present[w]:
                    _union(parent, size, v, w)
            if _find(parent, S) == _find(parent, T):
                thr = u[order[oi]]
                break
        out[t - t0] = thr
    return out


@njit(cache=True)
def _macro_counts(indptr, indices, allowed, p, seed, min_diam, t0, t1):
    """Per trial: number of open clusters inside ``allowed`` whose double-BFS diameter is >= min_diam."""
    n = len(allowed)
    comp = np.full(n, -1, dtype=np.int64)
    d = np.full(n, -1, dtype=np.int64)
    is_open = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    members = np.empty(n, dtype=np.int64)
    out = np.empty(t1 - t0, dtype=np.int64)
    for t in range(t0, t1):
        key = trial_key_nb(seed, t)
        for v in range(n):
            is_open[v] = allowed[v] and uniform_nb(key, v) < p
            comp[v] = -1
        count = 0
        for s in range(n):
            if not is_open[s] or comp[s] >= 0:
                continue
            # gather the cluster and the farthest vertex from s
            m = 0
            head = 0
            tail = 1
            queue[0] = s
            comp[s] = s
            d[s] = 0
            far = s
            while head < tail:
                v = queue[head]
                head += 1
                members[m] = v
                m += 1
                if d[v] > d[far]:
                    far = v
                for k in range(indptr[v], indptr[v + 1]):
                    w = indices[k]
                    if is_open[w] and comp[w] < 0:
                        comp[w] = s
                        d[w] = d[v] + 1
                        queue[tail] = w
                        tail += 1
            # second sweep from the far end
            for i in range(m):
                d[members[i]] = -1
            head = 0
            tail = 1
            queue[0] = far
            d[far] = 0
            ecc = 0
            while head < tail:
                v = queue[head]
                head += 1
                if d[v] > ecc:
                    ecc = d[v]
                for k in range(indptr[v], indptr[v + 1]):
                    w = indices[k]
                    if is_open[w] and d[w] < 0:
                        d[w] = d[v] + 1
                        queue[tail] = w
                        tail += 1
            for i in range(m):
                d[members[i]] = -1
            if ecc >= min_diam:
                count += 1
        out[t - t0] = count
    return out


# --- public operations -------------------------------------------------------


def _csr(t) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(t, "csr"):
        return t.csr
    A = t.adjacency_matrix().tocsr()
    return A.indptr.astype(np.int64), A.indices.astype(np.int64)


def clusters(graph, config: SiteConfiguration) -> ClusterLabeling:
    """Open clusters by union-find."""
    indptr, indices = _csr(graph)
    if len(config.open) != len(indptr) - 1:
        raise ValueError("configuration does not match graph")
    labels, sizes = _uf_labels(indptr, indices, np.asarray(config.open, dtype=np.bool_))
    return ClusterLabeling(labels, sizes)


def _arm_chunk(indptr, indices, dist, center, rmax, p, seed, t0, t1):
    return _arm_depths(indptr, indices, dist, center, rmax, p, np.uint64(seed), t0, t1)


def arm_depths(t: Triangulation, center: int, rmax: int, p: float, trials: int, seed: int, workers: int = 1) -> np.ndarray:
    dist = t.distances_from(center)
    if dist.max() < rmax:
        raise ValueError(f"r={rmax} exceeds available radius {int(dist.max())}")
    indptr, indices = t.csr
    parts = map_chunks(_arm_chunk, (indptr, indices, dist, int(center), int(rmax), float(p), int(seed)), trials, workers)
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


def one_arm_curve(
    t: Triangulation, center: int, radii: Sequence[int], p: float, trials: int, seed: int, workers: int = 1
) -> list[tuple[int, EstimateWithCI]]:
    """One-arm estimates at several radii from the same trials (coupled across r)."""
    radii = sorted(int(r) for r in radii)
    depth = arm_depths(t, center, radii[-1], p, trials, seed, workers)
    return [(r, EstimateWithCI.from_counts(int((depth >= r).sum()), trials)) for r in radii]


def one_arm_probability(t: Triangulation, center: int, r: int, p: float, trials: int, seed: int, workers: int = 1) -> EstimateWithCI:
    """Fraction of trials where ``center`` is open and its cluster meets the sphere at distance ``r``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return one_arm_curve(t, center, [r], p, trials, seed, workers)[0][1]


def one_arm_exact_r1(p: float, degree: int) -> float:
    return p * (1.0 - (1.0 - p) ** degree)


def _nz_chunk(indptr, indices, allowed, src, dst, seed, t0, t1):
    return _nz_thresholds(indptr, indices, allowed, src, dst, np.uint64(seed), t0, t1)


def crossing_thresholds(graph, src, dst, trials: int, seed: int, allowed=None, workers: int = 1) -> np.ndarray:
    """Per-trial critical parameter for an open ``src``-``dst`` connection (``2.0`` if none)."""
    indptr, indices = _csr(graph)
    n = len(indptr) - 1

    def mask(ids):
        m = np.zeros(n, dtype=np.bool_)
        m[np.asarray(ids, dtype=np.int64)] = True
        return m

    allowed = np.ones(n, dtype=np.bool_) if allowed is None else np.asarray(allowed, dtype=np.bool_)
    parts = map_chunks(_nz_chunk, (indptr, indices, allowed, mask(src), mask(dst), int(seed)), trials, workers)
    return np.concatenate(parts) if parts else np.zeros(0)


def _check_arcs(t: Triangulation, arcs) -> list[np.ndarray]:
    arcs = [np.asarray(a, dtype=np.int64) for a in arcs]
    flat = np.concatenate(arcs) if arcs else np.zeros(0, dtype=np.int64)
    b = list(t.boundary)
    if len(arcs) != 4 or any(len(a) == 0 for a in arcs) or len(flat) != len(b) or len(set(flat.tolist())) != len(b):
        raise ValueError("arcs not disjoint/cyclic: need four nonempty arcs partitioning the boundary")
    k = b.index(int(flat[0])) if int(flat[0]) in b else -1
    if k < 0 or list(flat) != b[k:] + b[:k]:
        raise ValueError("arcs not disjoint/cyclic: arcs must follow the boundary cycle in order")
    return arcs


def boundary_arc_crossing(
    t: Triangulation, arcs, p: float, trials: int, seed: int, workers: int = 1
) -> EstimateWithCI:
    """Fraction of trials with an open path from arc 1 to arc 3 (arcs in CCW boundary order)."""
    arcs = _check_arcs(t, arcs)
    thr = crossing_thresholds(t, arcs[0], arcs[2], trials, seed, workers=workers)
    return EstimateWithCI.from_counts(int((thr < p).sum()), trials)


def ball_arcs(t: Triangulation) -> list[np.ndarray]:
    return boundary_arcs(t, (0.25, 0.25, 0.25, 0.25))


def _macro_chunk(indptr, indices, allowed, p, seed, min_diam, t0, t1):
    return _macro_counts(indptr, indices, allowed, p, np.uint64(seed), min_diam, t0, t1)


def macroscopic_cluster_count(
    t: Triangulation, r: int, p: float, trials: int, seed: int, center: int = 0, workers: int = 1
) -> MeanWithCI:
    """Mean number of open clusters in ``B_r`` with (double-BFS) diameter at least ``r / 2``."""
    dist = t.distances_from(center)
    if dist.max() < r:
        raise ValueError(f"r={r} exceeds available radius {int(dist.max())}")
    allowed = (dist >= 0) & (dist <= r)
    indptr, indices = t.csr
    min_diam = int(math.ceil(r / 2))
    parts = map_chunks(_macro_chunk, (indptr, indices, allowed, float(p), int(seed), min_diam), trials, workers)
    return MeanWithCI.from_samples(np.concatenate(parts))


def macroscopic_counts(t: Triangulation, r: int, p: float, trials: int, seed: int, center: int = 0) -> np.ndarray:
    dist = t.distances_from(center)
    allowed = (dist >= 0) & (dist <= r)
    indptr, indices = t.csr
    return _macro_counts(indptr, indices, allowed, float(p), np.uint64(seed), int(math.ceil(r / 2)), 0, trials)


# --- p_c sweeps ----------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    family: str
    size: int
    p: float
    statistic: str  # "crossing" or "one-arm"
    estimate: EstimateWithCI


@dataclass(frozen=True)
class SweepResult:
    rows: list[SweepRow]
    pc: float
    pc_lo: float
    pc_hi: float
    thresholds: dict[int, np.ndarray]


def family_instance(family: str, size: int, degree: int = 7, seed: int = 0):
    """Triangulation, crossing source set, crossing target set and centre for a sweep family."""
    if family == "rhombus":
        t, left, right = rhombus(size)
        c = (size // 2) * size + size // 2
        return t, left, right, c
    if family == "triangular-lattice-disk":
        t = triangular_lattice_disk(size)
    elif family == "d-regular-hyperbolic":
        t = regular_hyperbolic_triangulation(degree, size)
    elif family == "layered":
        t = layered_triangulation(degree, size)
    elif family == "mixed-degree":
        t = mixed_degree_triangulation(size, seed)
    else:
        raise ValueError(f"unknown family {family!r}")
    arcs = ball_arcs(t)
    return t, arcs[0], arcs[2], 0


def pc_sweep(
    family: str,
    sizes: Sequence[int],
    ps: Sequence[float],
    trials: int,
    seed: int,
    degree: int = 7,
    bootstrap: int = 1000,
    workers: int = 1,
) -> SweepResult:
    """Crossing and one-arm tables over a ``p`` grid, plus a ``p_c`` estimate.

    Each trial's crossing threshold is computed once (Newman-Ziff), so the
    whole ``p`` grid is exactly coupled.  The estimate is the point where the
    crossing probability at the largest size passes 1/2, i.e. the median
    threshold; its CI is a percentile bootstrap over trials.
    """
    if not sizes or not ps:
        raise ValueError("size ladder and p grid must be nonempty")
    rows: list[SweepRow] = []
    thresholds: dict[int, np.ndarray] = {}
    for size in sorted(sizes):
        t, src, dst, center = family_instance(family, size, degree, seed)
        key = rng.derive_seed(seed, "pc-sweep", family, size)
        thr = crossing_thresholds(t, src, dst, trials, key, workers=workers)
        arm = crossing_thresholds(t, [center], t.boundary, trials, rng.derive_seed(key, "arm"), workers=workers)
        thresholds[size] = thr
        for p in ps:
            rows.append(SweepRow(family, size, float(p), "crossing", EstimateWithCI.from_counts(int((thr < p).sum()), trials)))
            rows.append(SweepRow(family, size, float(p), "one-arm", EstimateWithCI.from_counts(int((arm < p).sum()), trials)))
    big = thresholds[max(sizes)]
    pc = float(np.median(big))
    gen = rng.numpy_generator(seed, "pc-bootstrap")
    boots = np.median(gen.choice(big, size=(bootstrap, len(big)), replace=True), axis=1)
    lo, hi = np.quantile(boots, [0.025, 0.975])
    return SweepResult(rows, pc, float(lo), float(hi), thresholds)


def rhombus_crossing_exact(n: int, p: float) -> float:
    """Exact left-right open crossing probability of the ``n x n`` rhombus by enumeration."""
    t, left, right = rhombus(n)
    V = t.n_vertices
    nbrs = t.rotation
    total = 0.0
    for mask in range(1 << V):
        is_open = [(mask >> v) & 1 for v in range(V)]
        stack = [v for v in left if is_open[v]]
        seen = set(stack)
        hit = False
        rset = set(int(x) for x in right)
        while stack:
            v = stack.pop()
            if v in rset:
                hit = True
                break
            for u in nbrs[v]:
                if is_open[u] and u not in seen:
                    seen.add(u)
                    stack.append(u)
        if hit:
            k = sum(is_open)
            total += p**k * (1 - p) ** (V - k)
    return total
