"""Euclidean circle packings of triangulated disks.

Radii come from the uniform-neighbour angle-sum relaxation with boundary
radii held fixed; centres are then laid out face by face.
"""
from __future__ import annotations

import json
import logging
import math
from collections import deque
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .triangulation import Triangulation

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
RELAX_FLOOR = 1e-13


class PackingError(RuntimeError):
    def __init__(self, message: str, worst_vertex: int | None = None, error: float | None = None):
        self.worst_vertex = worst_vertex
        self.error = error
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class CirclePacking:
    radii: np.ndarray
    centers: np.ndarray
    angle_error: float
    tangency_error: float
    sweeps: int = 0
    geometry: str = "euclidean"
    history: tuple[float, ...] = field(default=(), repr=False)

    def to_json(self) -> str:
        recs = [
            {"vertex": v, "radius": float(r), "cx": float(c[0]), "cy": float(c[1])}
            for v, (r, c) in enumerate(zip(self.radii, self.centers))
        ]
        return json.dumps(
            {
                "geometry": self.geometry,
                "angle_error": self.angle_error,
                "tangency_error": self.tangency_error,
                "circles": recs,
            },
            indent=1,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())


def load_packing(path: str | Path) -> CirclePacking:
    doc = json.loads(Path(path).read_text())
    circles = sorted(doc["circles"], key=lambda c: c["vertex"])
    radii = np.array([c["radius"] for c in circles])
    centers = np.array([[c["cx"], c["cy"]] for c in circles]).reshape(-1, 2)
    return CirclePacking(radii, centers, doc.get("angle_error", math.nan), doc.get("tangency_error", math.nan), geometry=doc.get("geometry", "euclidean"))


def _corner_angles(tri: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Angles at the three corners of each face of the tangency triangle."""
    r = radii[tri]
    out = np.empty_like(r)
    for k in range(3):
        a, b, c = r[:, k], r[:, (k + 1) % 3], r[:, (k + 2) % 3]
        s2 = (b * c) / ((a + b) * (a + c))
        out[:, k] = 2.0 * np.arcsin(np.sqrt(np.clip(s2, 0.0, 1.0)))
    return out


def angle_sums(t: Triangulation, radii: np.ndarray) -> np.ndarray:
    tri = t.triangles
    ang = _corner_angles(tri, radii)
    return np.bincount(tri.ravel(), weights=ang.ravel(), minlength=t.n_vertices)


def _boundary_radii(t: Triangulation, boundary_radii) -> np.ndarray:
    if boundary_radii is None:
        return np.ones(len(t.boundary))
    if isinstance(boundary_radii, Mapping):
        vals = np.array([float(boundary_radii[v]) for v in t.boundary])
    elif np.ndim(boundary_radii) == 0:
        vals = np.full(len(t.boundary), float(boundary_radii))
    else:
        vals = np.asarray(boundary_radii, dtype=float)
        if len(vals) != len(t.boundary):
            raise ValueError("one radius per boundary vertex (in boundary order)")
    if (vals <= 0).any():
        raise ValueError("boundary radii must be positive")
    return vals


def relax_radii(
    t: Triangulation,
    boundary_radii=None,
    tol: float = 1e-10,
    max_sweeps: int = 10**6,
    accelerate: bool = True,
) -> tuple[np.ndarray, int, list[float]]:
    """Interior radii so that every interior angle sum is ``2 pi`` within ``tol``.

    Each sweep replaces every interior radius by the radius that would make
    its flower close up if all its petals had the uniform neighbour radius
    reproducing the current angle sum.  With ``accelerate`` the sweep is
    followed by a superstep extrapolation whenever the error ratio settles.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    V = t.n_vertices
    radii = np.ones(V)
    radii[list(t.boundary)] = _boundary_radii(t, boundary_radii)
    inner = t.interior_vertices
    history: list[float] = []
    if len(inner) == 0:
        return radii, 0, history
    # start interior radii at the mean boundary radius
    radii[inner] = float(np.mean(radii[list(t.boundary)]))
    k = t.degrees[inner].astype(float)
    delta = np.sin(np.pi / k)
    factor = (1.0 - delta) / delta

    def error(rad):
        return angle_sums(t, rad)[inner] - TWO_PI

    err = error(radii)
    prev_ratio = None
    prev_norm = float(np.sqrt(np.dot(err, err)))
    for sweep in range(1, max_sweeps + 1):
        theta = err + TWO_PI
        beta = np.sin(theta / (2.0 * k))
        uniform = radii[inner] * beta / (1.0 - beta)
        new = radii.copy()
        new[inner] = uniform * factor
        step = new[inner] - radii[inner]
        radii = new
        err = error(radii)
        worst = float(np.abs(err).max())
        if history and worst > history[-1]:
            log.debug("sweep %d: max angle error rose %.3e -> %.3e", sweep, history[-1], worst)
        history.append(worst)
        if worst <= tol:
            return radii, sweep, history
        norm = float(np.sqrt(np.dot(err, err)))
        ratio = norm / prev_norm if prev_norm > 0 else 1.0
        prev_norm = norm
        if accelerate and prev_ratio is not None and 0.0 < ratio < 1.0 and abs(ratio - prev_ratio) < 0.02 * ratio:
            # superstep: jump towards the geometric-series limit of the steps
            mult = ratio / (1.0 - ratio)
            neg = step < 0
            if neg.any():
                mult = min(mult, 0.5 * float(np.min(radii[inner][neg] / -step[neg])))
            trial = radii.copy()
            trial[inner] += mult * step
            trial_err = error(trial)
            trial_norm = float(np.sqrt(np.dot(trial_err, trial_err)))
            if trial_norm < norm:
                radii, err, prev_norm = trial, trial_err, trial_norm
                prev_ratio = None
                continue
        prev_ratio = ratio
    worst_idx = int(inner[int(np.argmax(np.abs(err)))])
    raise PackingError(
        f"iteration budget exhausted after {max_sweeps} sweeps; worst vertex {worst_idx}",
        worst_idx,
        float(np.abs(err).max()),
    )


def layout(t: Triangulation, radii: np.ndarray, root: int | None = None) -> np.ndarray:
    """Centres from radii: root at the origin, its first neighbour on the positive x-axis."""
    V = t.n_vertices
    tri = t.triangles
    if root is None:
        root = int(t.interior_vertices[0]) if len(t.interior_vertices) else 0
    z = np.full(V, np.nan + 0j, dtype=complex)
    placed = np.zeros(V, dtype=bool)
    first = t.rotation[root][0]
    z[root] = 0.0
    z[first] = radii[root] + radii[first]
    placed[[root, first]] = True
    faces_of: list[list[int]] = [[] for _ in range(V)]
    for f, (a, b, c) in enumerate(tri):
        faces_of[a].append(f)
        faces_of[b].append(f)
        faces_of[c].append(f)
    done = np.zeros(len(tri), dtype=bool)
    dq = deque(faces_of[root])
    while dq:
        f = dq.popleft()
        if done[f]:
            continue
        a, b, c = (int(x) for x in tri[f])
        # rotate so that a, b are placed
        for _ in range(3):
            if placed[a] and placed[b]:
                break
            a, b, c = b, c, a
        else:
            continue
        done[f] = True
        if not placed[c]:
            ra, rb, rc = radii[a], radii[b], radii[c]
            s2 = rb * rc / ((ra + rb) * (ra + rc))
            alpha = 2.0 * math.asin(math.sqrt(min(max(s2, 0.0), 1.0)))
            direction = (z[b] - z[a]) / abs(z[b] - z[a])
            z[c] = z[a] + (ra + rc) * direction * complex(math.cos(alpha), math.sin(alpha))
            placed[c] = True
        for v in (a, b, c):
            for g in faces_of[v]:
                if not done[g]:
                    dq.append(g)
    if not placed.all():
        raise PackingError("layout did not reach every vertex")
    return np.column_stack([z.real, z.imag])


def tangency_error(t: Triangulation, radii: np.ndarray, centers: np.ndarray) -> float:
    e = t.edges
    d = np.linalg.norm(centers[e[:, 0]] - centers[e[:, 1]], axis=1)
    s = radii[e[:, 0]] + radii[e[:, 1]]
    return float(np.max(np.abs(d - s) / s)) if len(e) else 0.0


def angle_error(t: Triangulation, radii: np.ndarray) -> float:
    inner = t.interior_vertices
    if len(inner) == 0:
        return 0.0
    return float(np.max(np.abs(angle_sums(t, radii)[inner] - TWO_PI)))


def overlap_error(t: Triangulation, radii: np.ndarray, centers: np.ndarray) -> float:
    """Largest relative overlap between non-adjacent circles (0 when none overlap)."""
    if t.n_vertices < 2:
        return 0.0
    tree = cKDTree(centers)
    adj = {(int(a), int(b)) for a, b in t.edges}
    worst = 0.0
    rmax = float(radii.max())
    for i in range(t.n_vertices):
        for j in tree.query_ball_point(centers[i], radii[i] + rmax):
            if j <= i or (i, j) in adj:
                continue
            s = radii[i] + radii[j]
            d = float(np.linalg.norm(centers[i] - centers[j]))
            worst = max(worst, (s - d) / s)
    return worst


def pack(
    t: Triangulation,
    boundary_radii: Mapping[int, float] | Sequence[float] | float | None = None,
    tol: float = 1e-10,
    max_sweeps: int = 10**6,
    accelerate: bool = True,
) -> CirclePacking:
    """Euclidean packing with prescribed boundary radii (default all 1)."""
    # layout compounds angle errors along BFS paths, so radii are relaxed past tol
    inner_tol = min(tol, RELAX_FLOOR)
    radii, sweeps, hist = relax_radii(t, boundary_radii, tol=inner_tol, max_sweeps=max_sweeps, accelerate=accelerate)
    centers = layout(t, radii)
    a_err = angle_error(t, radii)
    t_err = tangency_error(t, radii, centers)
    if t_err > 10 * max(tol, 1e-12):
        raise PackingError(f"layout inconsistency: tangency error {t_err:.3e}", error=t_err)
    return CirclePacking(radii, centers, a_err, t_err, sweeps, history=tuple(hist))


@dataclass(frozen=True)
class PackingReport:
    angle_error: float
    tangency_error: float
    overlap_error: float
    stored_match: bool


def validate_packing(packing: CirclePacking, t: Triangulation) -> PackingReport:
    """Recompute both error maxima from radii and centres; compare to the stored values."""
    a = angle_error(t, packing.radii)
    tg = tangency_error(t, packing.radii, packing.centers)
    ov = overlap_error(t, packing.radii, packing.centers)
    match = abs(a - packing.angle_error) <= 1e-12 and abs(tg - packing.tangency_error) <= 1e-12
    return PackingReport(a, tg, ov, match)


def render_figure1(d: int = 7, r: int = 4) -> tuple[str, str]:
    """Circle packing and square tiling SVGs of the ``d``-regular ball of radius ``r``.

    The tiling uses the root as source and the whole boundary as sink, so it
    tiles a cylinder; it is drawn unrolled.
    """
    from .generators import regular_hyperbolic_triangulation, wire_triangulation
    from .render import render_packing, render_tiling
    from .tiling import tile_from_two_terminal

    if d < 7:
        raise ValueError("d must be >= 7")
    t = regular_hyperbolic_triangulation(d, r)
    packing = pack(t)
    graph, _ = wire_triangulation(t, 0, list(t.boundary))
    tiling = tile_from_two_terminal(graph)
    return render_packing(packing), render_tiling(tiling)
