"""Finite triangulations of a disk stored as rotation systems.

Conventions
-----------
* vertex ids are ``0..V-1``;
* ``rotation[v]`` lists the neighbours of ``v`` in counter-clockwise order
  (cyclic, for boundary vertices too);
* the face to the left of the dart ``u -> v`` continues with the dart
  ``v -> rotation[v][pos(u) - 1]``.  Interior faces then come out as CCW
  triangles and the outer face as the boundary walked clockwise;
* ``boundary`` is stored counter-clockwise (interior on the left).
"""
from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

log = logging.getLogger(__name__)


class TriangulationError(ValueError):
    """Raised when a rotation system is not a triangulated disk.

    ``reason`` is one of the short tags listed in ``REASONS``.
    """

    REASONS = (
        "degenerate input",
        "vertex id out of range",
        "self-loop",
        "multi-edge",
        "asymmetric adjacency",
        "degree bound exceeded",
        "disconnected",
        "boundary not a simple outer cycle",
        "non-triangular interior face",
        "Euler relation violation",
        "ball not simply connected",
    )

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


def face_walks(rotation: Sequence[Sequence[int]]) -> tuple[list[list[int]], dict[tuple[int, int], int]]:
    """All faces of a rotation system as vertex walks, plus dart -> face id."""
    pos = [{u: i for i, u in enumerate(nbrs)} for nbrs in rotation]
    face_of: dict[tuple[int, int], int] = {}
    faces: list[list[int]] = []
    for v, nbrs in enumerate(rotation):
        for w in nbrs:
            if (v, w) in face_of:
                continue
            fid = len(faces)
            walk = []
            a, b = v, w
            while (a, b) not in face_of:
                face_of[(a, b)] = fid
                walk.append(a)
                rb = rotation[b]
                a, b = b, rb[pos[b][a] - 1]
            faces.append(walk)
    return faces, face_of


def _same_cycle(walk: Sequence[int], cycle: Sequence[int]) -> bool:
    if len(walk) != len(cycle) or not walk:
        return False
    try:
        k = list(walk).index(cycle[0])
    except ValueError:
        return False
    rotated = list(walk[k:]) + list(walk[:k])
    return rotated == list(cycle)


@dataclass(frozen=True, eq=False)
class Triangulation:
    rotation: tuple[tuple[int, ...], ...]
    boundary: tuple[int, ...]
    degree_bound: int
    positions: np.ndarray | None = field(default=None, repr=False)
    name: str = ""

    @property
    def n_vertices(self) -> int:
        return len(self.rotation)

    @property
    def n_edges(self) -> int:
        return sum(len(r) for r in self.rotation) // 2

    @property
    def n_faces(self) -> int:
        """Faces including the single outer face."""
        return len(self.triangles) + 1

    def degree(self, v: int) -> int:
        return len(self.rotation[v])

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.rotation[v]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(r) for r in self.rotation], dtype=np.int64)

    @cached_property
    def edges(self) -> np.ndarray:
        """``(E, 2)`` array of undirected edges with ``u < v``."""
        out = [(v, u) for v, nbrs in enumerate(self.rotation) for u in nbrs if v < u]
        return np.array(out, dtype=np.int64).reshape(-1, 2)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency as ``(indptr, indices)`` in rotation order."""
        indptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=indptr[1:])
        indices = np.fromiter((u for nbrs in self.rotation for u in nbrs), dtype=np.int64, count=int(indptr[-1]))
        return indptr, indices

    def adjacency_matrix(self) -> sparse.csr_matrix:
        indptr, indices = self.csr
        data = np.ones(len(indices))
        return sparse.csr_matrix((data, indices, indptr), shape=(self.n_vertices,) * 2)

    @cached_property
    def on_boundary(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[list(self.boundary)] = True
        return mask

    @cached_property
    def interior_vertices(self) -> np.ndarray:
        return np.flatnonzero(~self.on_boundary)

    @cached_property
    def _faces(self) -> tuple[list[list[int]], dict[tuple[int, int], int], int]:
        faces, face_of = face_walks(self.rotation)
        b = self.boundary
        # the outer face contains the dart b[1] -> b[0] (clockwise walk)
        outer = face_of[(b[1], b[0])]
        return faces, face_of, outer

    @cached_property
    def triangles(self) -> np.ndarray:
        """Interior faces as CCW vertex triples, shape ``(F-1, 3)``."""
        faces, _, outer = self._faces
        tri = [f for i, f in enumerate(faces) if i != outer]
        return np.array(tri, dtype=np.int64).reshape(-1, 3)

    def corner_faces(self, v: int) -> list[int | None]:
        """Face id of the corner between ``rotation[v][j]`` and ``rotation[v][j+1]``; None for the outer face."""
        _, face_of, outer = self._faces
        out = []
        for w in self.rotation[v]:
            f = face_of[(v, w)]
            out.append(None if f == outer else f)
        return out

    def distances_from(self, center: int) -> np.ndarray:
        """Graph distances from ``center`` (``-1`` when unreachable)."""
        d = csgraph.shortest_path(self.adjacency_matrix(), unweighted=True, indices=int(center))
        out = np.where(np.isinf(d), -1, d).astype(np.int64)
        return out

    def degree_histogram(self, interior_only: bool = True) -> dict[int, int]:
        verts = self.interior_vertices if interior_only else np.arange(self.n_vertices)
        vals, counts = np.unique(self.degrees[verts], return_counts=True)
        return {int(k): int(c) for k, c in zip(vals, counts)}

    def link_is_cycle(self, v: int) -> bool:
        """Interior vertex link condition: consecutive neighbours are adjacent, cyclically."""
        nbrs = self.rotation[v]
        k = len(nbrs)
        return k >= 3 and all(nbrs[(i + 1) % k] in self.rotation[nbrs[i]] for i in range(k))

    def to_text(self) -> str:
        lines = [f"{self.n_vertices} {self.n_edges}"]
        lines += [" ".join(map(str, nbrs)) for nbrs in self.rotation]
        lines.append(" ".join(map(str, self.boundary)))
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())


def build_from_rotation(
    neighbor_lists: Sequence[Sequence[int]],
    boundary: Sequence[int],
    degree_bound: int | None = None,
    positions: np.ndarray | None = None,
    name: str = "",
) -> Triangulation:
    """Validate a rotation system and return a :class:`Triangulation`.

    The boundary may be given in either orientation; it is stored CCW.
    Raises :class:`TriangulationError` naming the first violated invariant.
    """
    rot = tuple(tuple(int(u) for u in nbrs) for nbrs in neighbor_lists)
    V = len(rot)
    if V <= 2:
        raise TriangulationError("degenerate input", f"V={V}")
    for v, nbrs in enumerate(rot):
        for u in nbrs:
            if not 0 <= u < V:
                raise TriangulationError("vertex id out of range", f"{u} in list of {v}")
            if u == v:
                raise TriangulationError("self-loop", f"at {v}")
        if len(set(nbrs)) != len(nbrs):
            raise TriangulationError("multi-edge", f"repeated neighbour at {v}")
    nbr_sets = [set(n) for n in rot]
    for v, nbrs in enumerate(rot):
        for u in nbrs:
            if v not in nbr_sets[u]:
                raise TriangulationError("asymmetric adjacency", f"{v}->{u}")
    max_deg = max(len(n) for n in rot)
    if degree_bound is None:
        degree_bound = max_deg
    if max_deg > degree_bound:
        raise TriangulationError("degree bound exceeded", f"{max_deg} > {degree_bound}")

    seen = np.zeros(V, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        for u in rot[v]:
            if not seen[u]:
                seen[u] = True
                stack.append(u)
    if not seen.all():
        raise TriangulationError("disconnected", f"{int((~seen).sum())} unreachable vertices")

    b = [int(x) for x in boundary]
    if len(b) < 3 or len(set(b)) != len(b) or any(not 0 <= x < V for x in b):
        raise TriangulationError("boundary not a simple outer cycle", "boundary must list >= 3 distinct vertices")
    for i in range(len(b)):
        if b[(i + 1) % len(b)] not in nbr_sets[b[i]]:
            raise TriangulationError("boundary not a simple outer cycle", f"{b[i]}-{b[(i + 1) % len(b)]} is not an edge")

    faces, face_of = face_walks(rot)
    cw = [b[0]] + b[:0:-1]
    outer = None
    for cand, ccw in ((cw, b), (b, cw)):
        f = face_of.get((cand[0], cand[1]))
        if f is not None and _same_cycle(faces[f], cand):
            outer, b = f, ccw
            break
    if outer is None:
        raise TriangulationError("boundary not a simple outer cycle", "boundary is not a face of the rotation system")
    for i, f in enumerate(faces):
        if i != outer and len(f) != 3:
            raise TriangulationError("non-triangular interior face", f"face {f[:8]} has length {len(f)}")
    E = sum(len(n) for n in rot) // 2
    F = len(faces)
    if V - E + F != 2:
        raise TriangulationError("Euler relation violation", f"V-E+F = {V - E + F}")
    return Triangulation(rot, tuple(b), int(degree_bound), positions, name)


def parse_text(text: str, name: str = "") -> Triangulation:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise TriangulationError("degenerate input", "empty file")
    V, E = (int(x) for x in lines[0].split())
    if len(lines) != V + 2:
        raise TriangulationError("degenerate input", f"expected {V + 2} non-empty lines, got {len(lines)}")
    nbrs = [[int(x) for x in ln.split()] for ln in lines[1 : V + 1]]
    boundary = [int(x) for x in lines[V + 1].split()]
    t = build_from_rotation(nbrs, boundary, name=name)
    if t.n_edges != E:
        raise TriangulationError("degenerate input", f"header says E={E}, lists give {t.n_edges}")
    return t


def load(path: str | Path) -> Triangulation:
    p = Path(path)
    return parse_text(p.read_text(), name=p.stem)


@dataclass(frozen=True)
class BallDecomposition:
    center: int
    distance: np.ndarray  # per original vertex; -1 outside the ball
    layer_sizes: tuple[int, ...]

    @property
    def radius(self) -> int:
        return len(self.layer_sizes) - 1


@dataclass(frozen=True)
class Ball:
    triangulation: Triangulation | None  # None when the ball spans no face (r = 0)
    decomposition: BallDecomposition
    vertex_ids: np.ndarray  # sub-triangulation id -> original id
    split_events: tuple[int, ...] = ()  # original ids duplicated at pinch points

    def __iter__(self):
        yield self.triangulation
        yield self.decomposition


def ball(t: Triangulation, center: int, r: int) -> Ball:
    """Subcomplex of faces whose three corners lie within distance ``r``."""
    if not 0 <= center < t.n_vertices:
        raise ValueError(f"center {center} not a vertex")
    if r < 0:
        raise ValueError("r must be >= 0")
    dist = t.distances_from(center)
    inside = (dist >= 0) & (dist <= r)
    layers = np.bincount(dist[inside], minlength=r + 1)[: r + 1]
    layers = tuple(int(x) for x in np.trim_zeros(layers, "b"))
    decomp = BallDecomposition(int(center), np.where(inside, dist, -1), layers)

    tri = t.triangles
    keep_face = np.zeros(len(tri), dtype=bool) if r == 0 else inside[tri].all(axis=1)
    faces, face_of, outer = t._faces
    # map face ids of t to triangle row ids
    face_row = {}
    row = 0
    for fid in range(len(faces)):
        if fid != outer:
            face_row[fid] = row
            row += 1

    pieces: list[tuple[int, list[int], bool]] = []  # (original vertex, ccw neighbour run, closed link)
    split: list[int] = []
    for v in np.flatnonzero(inside):
        v = int(v)
        nbrs = t.rotation[v]
        k = len(nbrs)
        # kept[j]: corner between nbrs[j] and nbrs[j+1] is a kept face
        kept = []
        for w in nbrs:
            f = face_of[(v, w)]
            kept.append(f != outer and bool(keep_face[face_row[f]]))
        if all(kept):
            pieces.append((v, list(nbrs), True))
            continue
        if not any(kept):
            continue
        start = (kept.index(False) + 1) % k
        runs = []
        j = 0
        while j < k:
            if not kept[(start + j) % k]:
                j += 1
                continue
            run = [nbrs[(start + j) % k]]
            while j < k and kept[(start + j) % k]:
                run.append(nbrs[(start + j + 1) % k])
                j += 1
            runs.append(run)
        if len(runs) > 1:
            split.append(v)
        pieces.extend((v, run, False) for run in runs)

    if not pieces:
        return Ball(None, decomp, np.array([center], dtype=np.int64), ())

    if split:
        log.info("ball(center=%d, r=%d): split %d pinch vertices", center, r, len(split))
    # resolve neighbour ids: a neighbour w of piece (v, run) maps to the piece of w containing v
    by_orig: dict[int, list[int]] = {}
    for pid, (v, _, _) in enumerate(pieces):
        by_orig.setdefault(v, []).append(pid)
    rotation = []
    for v, run, _ in pieces:
        out = []
        for w in run:
            cands = by_orig[w]
            if len(cands) == 1:
                out.append(cands[0])
            else:
                out.append(next(c for c in cands if v in pieces[c][1]))
        rotation.append(out)
    # outer walk: leave an open-link vertex towards the last neighbour of its run
    start = next((i for i, (_, _, closed) in enumerate(pieces) if not closed), None)
    if start is None:
        raise TriangulationError("ball not simply connected", "no boundary vertex")
    pos = [{u: i for i, u in enumerate(r_)} for r_ in rotation]
    walk = []
    a, b = start, rotation[start][-1]
    for _ in range(len(pieces) + 1):
        walk.append(a)
        rb = rotation[b]
        a, b = b, rb[pos[b][a] - 1]
        if a == start:
            break
    positions = None if t.positions is None else t.positions[[p[0] for p in pieces]]
    try:
        sub = build_from_rotation(rotation, walk, degree_bound=t.degree_bound, positions=positions, name=f"{t.name}:B{r}")
    except TriangulationError as exc:
        raise TriangulationError("ball not simply connected", str(exc)) from exc
    ids = np.array([p[0] for p in pieces], dtype=np.int64)
    return Ball(sub, decomp, ids, tuple(split))


def growth_profile(t: Triangulation, center: int) -> list[tuple[int, int, int]]:
    """``(r, |B_r|, |dB_r|)`` for ``r = 0 .. eccentricity(center)``."""
    dist = t.distances_from(center)
    layers = np.bincount(dist[dist >= 0])
    cum = np.cumsum(layers)
    return [(r, int(cum[r]), int(layers[r])) for r in range(len(layers))]


def growth_exponent(profile: Sequence[tuple[int, int, int]], r_min: int, r_max: int) -> float:
    """Least-squares slope of ``log |B_r|`` against ``log r``."""
    rs = np.array([p[0] for p in profile if r_min <= p[0] <= r_max], dtype=float)
    vol = np.array([p[1] for p in profile if r_min <= p[0] <= r_max], dtype=float)
    return float(np.polyfit(np.log(rs), np.log(vol), 1)[0])


def growth_rate(profile: Sequence[tuple[int, int, int]], r_min: int, r_max: int) -> float:
    """Least-squares slope of ``log |B_r|`` against ``r`` (exponential growth rate)."""
    rs = np.array([p[0] for p in profile if r_min <= p[0] <= r_max], dtype=float)
    vol = np.array([p[1] for p in profile if r_min <= p[0] <= r_max], dtype=float)
    return float(np.polyfit(rs, np.log(vol), 1)[0])


def isoperimetric_samples(
    t: Triangulation, n_samples: int, max_size: int, rng: np.random.Generator
) -> list[tuple[int, int]]:
    """``(|S|, |dS|)`` for randomly grown connected sets ``S`` (Eden growth).

    ``dS`` is the outer vertex boundary.  This samples the isoperimetric
    profile; it does not bound it.
    """
    out = []
    for _ in range(n_samples):
        size = int(rng.integers(1, max_size + 1))
        seed_v = int(rng.integers(t.n_vertices))
        S = {seed_v}
        frontier = list(t.rotation[seed_v])
        while len(S) < size and frontier:
            i = int(rng.integers(len(frontier)))
            frontier[i], frontier[-1] = frontier[-1], frontier[i]
            v = frontier.pop()
            if v in S:
                continue
            S.add(v)
            frontier.extend(u for u in t.rotation[v] if u not in S)
        bd = {u for v in S for u in t.rotation[v] if u not in S}
        out.append((len(S), len(bd)))
    return out
