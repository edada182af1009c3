"""Brooks-Smith-Stone-Tutte square tilings and crossing experiments on them.

One square per edge carrying current: with the source at 1 V and the sink
at 0 V, edge ``u-v`` becomes the square ``[phi_lo, phi_hi] x [psi_lo, psi_hi]``
where ``phi`` is the potential and ``psi`` the stream function on faces of
the planar embedding (``psi`` jumps by the edge current across the edge).
Horizontal extent is therefore voltage and the tiled rectangle is
``1 x I`` with ``I = 1 / R_eff``.

If source and sink share no face the result tiles a cylinder of
circumference ``I`` (``periodic=True``).
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng
from .generators import TwoTerminalGraph
from .harmonic import SolverError, solve_dirichlet
from .stats import EstimateWithCI
from .triangulation import face_walks

ZERO_CURRENT = 1e-12
CONTACT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SquareTiling:
    width: float
    height: float
    tiles: np.ndarray  # (N, 3): x, y, side
    edge_ids: np.ndarray  # (N, 2) source edge endpoints
    periodic: bool = False
    dropped_edges: int = 0
    contacts: np.ndarray = field(default=None, repr=False)  # (K, 2) tile pairs i < j

    def __post_init__(self):
        if self.contacts is None:
            object.__setattr__(self, "contacts", contact_pairs(self))

    @property
    def n_tiles(self) -> int:
        return len(self.tiles)

    @property
    def aspect_ratio(self) -> float:
        return self.height / self.width

    def neighbors(self) -> list[list[int]]:
        nb: list[list[int]] = [[] for _ in range(self.n_tiles)]
        for i, j in self.contacts:
            nb[i].append(int(j))
            nb[j].append(int(i))
        return nb

    def touches_left(self, tol: float = CONTACT_TOL) -> np.ndarray:
        return self.tiles[:, 0] <= tol * self.width

    def touches_right(self, tol: float = CONTACT_TOL) -> np.ndarray:
        return self.tiles[:, 0] + self.tiles[:, 2] >= self.width * (1 - tol)

    def to_json(self) -> str:
        recs = [
            {"x": float(x), "y": float(y), "side": float(s), "edge": [int(a), int(b)]}
            for (x, y, s), (a, b) in zip(self.tiles, self.edge_ids)
        ]
        doc = {
            "width": self.width,
            "height": self.height,
            "periodic": self.periodic,
            "dropped_edges": self.dropped_edges,
            "tiles": recs,
        }
        return json.dumps(doc, indent=1)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())


def tiling_from_records(records, width: float | None = None, height: float | None = None, periodic: bool = False) -> SquareTiling:
    tiles = np.array([[r["x"], r["y"], r["side"]] for r in records], dtype=float).reshape(-1, 3)
    edges = np.array([r.get("edge", [-1, -1]) for r in records], dtype=np.int64).reshape(-1, 2)
    if width is None:
        width = float((tiles[:, 0] + tiles[:, 2]).max()) if len(tiles) else 1.0
    if height is None:
        height = float((tiles[:, 1] + tiles[:, 2]).max()) if len(tiles) else 0.0
    return SquareTiling(float(width), float(height), tiles, edges, periodic)


def load_tiling(path: str | Path) -> SquareTiling:
    doc = json.loads(Path(path).read_text())
    return tiling_from_records(doc["tiles"], doc["width"], doc["height"], doc.get("periodic", False))


def _sweep_contacts(hi, lo, lo_owner, a0, a1, shifts, tol_abs, pairs) -> None:
    """Pairs (i, owner) with ``hi[i] == lo`` (within tol) and positive overlap of ``[a0, a1]``."""
    order = np.argsort(lo, kind="stable")
    lo_sorted = lo[order]
    for i in range(len(hi)):
        k0 = np.searchsorted(lo_sorted, hi[i] - tol_abs, "left")
        k1 = np.searchsorted(lo_sorted, hi[i] + tol_abs, "right")
        for k in order[k0:k1]:
            j = int(lo_owner[k])
            if j == i:
                continue
            best = max(min(a1[i], a1[j] + sh) - max(a0[i], a0[j] + sh) for sh in shifts)
            if best > tol_abs:
                pairs.add((min(i, j), max(i, j)))


def contact_pairs(tiling: SquareTiling, tol: float = CONTACT_TOL) -> np.ndarray:
    """Tile pairs sharing a boundary segment of length > ``tol`` (relative to the width)."""
    T = tiling.tiles
    n = len(T)
    if n < 2:
        return np.zeros((0, 2), dtype=np.int64)
    tol_abs = tol * tiling.width
    H = tiling.height
    x0, y0, s = T[:, 0], T[:, 1], T[:, 2]
    x1, y1 = x0 + s, y0 + s
    own = np.arange(n)
    pairs: set[tuple[int, int]] = set()
    yshifts = (0.0, H, -H) if tiling.periodic else (0.0,)
    # right side of i against left side of j
    _sweep_contacts(x1, x0, own, y0, y1, yshifts, tol_abs, pairs)
    # top of i against bottom of j (bottoms repeated one period up when periodic)
    if tiling.periodic:
        lo = np.concatenate([y0, y0 + H])
        _sweep_contacts(y1, lo, np.concatenate([own, own]), x0, x1, (0.0,), tol_abs, pairs)
    else:
        _sweep_contacts(y1, y0, own, x0, x1, (0.0,), tol_abs, pairs)
    return np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)


def _stream_function(graph: TwoTerminalGraph, current_of) -> tuple[dict[int, float], dict[tuple[int, int], int], set[tuple[int, int]]]:
    faces, face_of = face_walks(graph.rotation)
    s, t = graph.source, graph.sink
    # split a face shared by source and sink along a virtual chord
    shared = None
    for fid, walk in enumerate(faces):
        if s in walk and t in walk:
            shared = fid
            break
    node_of: dict[tuple[int, int], int] = dict(face_of)
    blocked: set[tuple[int, int]] = set()
    if shared is not None:
        walk = faces[shared]
        n = len(walk)
        i_s = walk.index(s)
        extra = len(faces)
        inside = False
        for k in range(n):
            a = walk[(i_s + k) % n]
            b = walk[(i_s + k + 1) % n]
            if a == t:
                inside = True
            if inside:
                node_of[(a, b)] = extra
    else:
        # seam along a shortest source-sink path; its edges are not crossed
        prev = {s: s}
        dq = deque([s])
        while dq:
            v = dq.popleft()
            for u in graph.rotation[v]:
                if u not in prev:
                    prev[u] = v
                    dq.append(u)
        if t not in prev:
            raise SolverError("source and sink are disconnected")
        v = t
        while v != s:
            blocked.add((min(v, prev[v]), max(v, prev[v])))
            v = prev[v]
    psi: dict[int, float] = {}
    start = node_of[(s, graph.rotation[s][0])]
    psi[start] = 0.0
    adj: dict[int, list[tuple[int, int, int]]] = {}
    for (a, b), f in node_of.items():
        if (min(a, b), max(a, b)) in blocked:
            continue
        g = node_of[(b, a)]
        adj.setdefault(f, []).append((g, a, b))
    dq = deque([start])
    while dq:
        f = dq.popleft()
        for g, a, b in adj.get(f, ()):
            if g not in psi:
                # psi(right of a->b) = psi(left of a->b) + i(a->b)
                psi[g] = psi[f] + current_of(a, b)
                dq.append(g)
    return psi, node_of, blocked


def tile_from_two_terminal(graph: TwoTerminalGraph, tol: float = 1e-12) -> SquareTiling:
    """Square tiling of the unit-potential-gap current flow on ``graph``."""
    if graph.source == graph.sink:
        raise SolverError("zero total current: source equals sink")
    sol = solve_dirichlet(graph, {graph.source: 1.0, graph.sink: 0.0}, tol=tol)
    total = float(sol.net_current()[graph.source])
    if total <= ZERO_CURRENT:
        raise SolverError("zero total current")
    phi = sol.potential
    cur = lambda a, b: float(phi[a] - phi[b])  # noqa: E731
    psi, node_of, blocked = _stream_function(graph, cur)
    lo = min(psi.values())
    tiles, eids = [], []
    dropped = 0
    for u, v in sol.edges:
        u, v = int(u), int(v)
        i = cur(u, v)
        if abs(i) < ZERO_CURRENT:
            dropped += 1
            continue
        f = node_of[(u, v)]
        y_a = psi[f] - lo
        y_b = y_a + i
        side = abs(i)
        x = min(phi[u], phi[v])
        y = min(y_a, y_b)
        tiles.append((x, y, side))
        eids.append((u, v))
    periodic = bool(blocked)
    T = np.array(tiles, dtype=float).reshape(-1, 3)
    if periodic:
        T[:, 1] = np.mod(T[:, 1], total)
        T[:, 1] = np.where(T[:, 1] > total - 1e-12 * total, 0.0, T[:, 1])
    return SquareTiling(1.0, total, T, np.array(eids, dtype=np.int64).reshape(-1, 2), periodic, dropped)


def corner_incidence(tiling: SquareTiling, tol: float = CONTACT_TOL) -> int:
    """Largest number of tiles containing a common tile corner."""
    T = tiling.tiles
    if len(T) == 0:
        return 0
    tol_abs = tol * tiling.width
    H = tiling.height
    corners = np.concatenate(
        [
            np.column_stack([T[:, 0] + dx * T[:, 2], T[:, 1] + dy * T[:, 2]])
            for dx in (0, 1)
            for dy in (0, 1)
        ]
    )
    x0, y0 = T[:, 0], T[:, 1]
    x1, y1 = x0 + T[:, 2], y0 + T[:, 2]
    best = 0
    shifts = (0.0, H, -H) if tiling.periodic else (0.0,)
    for k in range(0, len(corners), 512):
        P = corners[k : k + 512]
        inx = (P[:, :1] >= x0 - tol_abs) & (P[:, :1] <= x1 + tol_abs)
        hit = np.zeros_like(inx)
        for sh in shifts:
            py = P[:, 1:] + sh
            hit |= inx & (py >= y0 - tol_abs) & (py <= y1 + tol_abs)
        best = max(best, int(hit.sum(axis=1).max()))
    return best


@dataclass(frozen=True)
class TilingReport:
    corner_incidence: int
    passes: bool
    area_residual: float  # relative
    overlap_area: float
    overlap_pairs: int  # pairs overlapping by more than the contact tolerance in both axes
    outside: int
    dropped_edges: int
    n_tiles: int
    aspect_ratio: float


def overlap_area(tiling: SquareTiling) -> float:
    """Total pairwise interior overlap area (sweep over x-sorted tiles)."""
    return _overlaps(tiling, 0.0)[0]


def _overlaps(tiling: SquareTiling, tol: float) -> tuple[float, int]:
    """Overlap area, and the number of pairs overlapping by more than ``tol`` in both axes."""
    T = tiling.tiles
    n = len(T)
    pairs = 0
    if n < 2:
        return 0.0, 0
    order = np.argsort(T[:, 0], kind="stable")
    H = tiling.height
    shifts = (0.0, H, -H) if tiling.periodic else (0.0,)
    total = 0.0
    xs = T[order, 0]
    for a in range(n):
        i = order[a]
        xi1 = T[i, 0] + T[i, 2]
        b_end = np.searchsorted(xs, xi1, "left")
        for b in range(a + 1, b_end):
            j = order[b]
            ox = min(xi1, T[j, 0] + T[j, 2]) - max(T[i, 0], T[j, 0])
            if ox <= 0:
                continue
            for sh in shifts:
                oy = min(T[i, 1] + T[i, 2], T[j, 1] + T[j, 2] + sh) - max(T[i, 1], T[j, 1] + sh)
                if oy > 0:
                    total += ox * oy
                    pairs += ox > tol and oy > tol
    return total, pairs


def validate_conjecture2_conditions(tiling: SquareTiling) -> TilingReport:
    """Corner-incidence condition (at most three tiles at any corner) plus exactness residuals."""
    area = math.fsum((tiling.tiles[:, 2] ** 2).tolist())
    rect = tiling.width * tiling.height
    area_res = abs(area - rect) / rect if rect > 0 else (0.0 if area == 0 else math.inf)
    T = tiling.tiles
    tol = CONTACT_TOL * tiling.width
    out_x = (T[:, 0] < -tol) | (T[:, 0] + T[:, 2] > tiling.width + tol)
    out_y = np.zeros(len(T), dtype=bool) if tiling.periodic else (T[:, 1] < -tol) | (T[:, 1] + T[:, 2] > tiling.height + tol)
    ci = corner_incidence(tiling)
    area_ov, pairs = _overlaps(tiling, tol)
    return TilingReport(
        corner_incidence=ci,
        passes=ci <= 3,
        area_residual=area_res,
        overlap_area=area_ov,
        overlap_pairs=pairs,
        outside=int((out_x | out_y).sum()),
        dropped_edges=tiling.dropped_edges,
        n_tiles=tiling.n_tiles,
        aspect_ratio=tiling.aspect_ratio,
    )


def left_right_crossing(tiling: SquareTiling, black: np.ndarray) -> bool:
    """Black path of contact-adjacent tiles from ``x = 0`` to ``x = width``."""
    black = np.asarray(black, dtype=bool)
    left = tiling.touches_left()
    right = tiling.touches_right()
    nb = tiling.neighbors()
    seen = black & left
    stack = list(np.flatnonzero(seen))
    while stack:
        i = stack.pop()
        if right[i]:
            return True
        for j in nb[i]:
            if black[j] and not seen[j]:
                seen[j] = True
                stack.append(j)
    return False


def coloring(tiling: SquareTiling, p: float, seed: int, trial: int = 0) -> np.ndarray:
    """Black/white colouring; tile ``k`` is black iff its counter-based uniform is below ``p``."""
    return rng.uniforms(seed, trial, tiling.n_tiles) < p


def crossing_counts(tiling: SquareTiling, p: float, seed: int, trials: range) -> int:
    return sum(left_right_crossing(tiling, coloring(tiling, p, seed, t)) for t in trials)


def crossing_probability_tiling(tiling: SquareTiling, p: float, trials: int, seed: int) -> EstimateWithCI:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return EstimateWithCI.from_counts(crossing_counts(tiling, p, seed, range(trials)), trials)


def exact_crossing_probability(tiling: SquareTiling, p: float, max_tiles: int = 16) -> float:
    """Exact left-right crossing probability by enumerating all ``2^n`` colourings."""
    n = tiling.n_tiles
    if n > max_tiles:
        raise ValueError(f"{n} tiles is too many to enumerate")
    total = 0.0
    for mask in range(1 << n):
        black = np.array([(mask >> k) & 1 for k in range(n)], dtype=bool)
        if left_right_crossing(tiling, black):
            k = int(black.sum())
            total += p**k * (1 - p) ** (n - k)
    return total
