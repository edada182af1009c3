"""Poisson-Voronoi percolation in the Poincare disc and Cardy's formula.

Points are kept in the Poincare model.  Hyperbolic circles are Euclidean
circles there, so Voronoi adjacency is read off the Euclidean Delaunay
triangulation of the model coordinates.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import triangle
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import Delaunay, QhullError
from scipy.special import gamma, hyp2f1

from . import rng
from .parallel import map_chunks
from .stats import EstimateWithCI

TWO_PI = 2.0 * math.pi
ARC_NAMES = ("A", "B", "C", "D")


# --- boundary quads --------------------------------------------------------------


@dataclass(frozen=True)
class IdealBoundaryQuad:
    """Four ideal points in CCW order; arcs A=(a,b), B=(b,c), C=(c,d), D=(d,a)."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        angles = self.angles
        if not all(math.isfinite(x) for x in angles):
            raise ValueError("degenerate quad: non-finite angle")
        gaps = self.arc_lengths
        if min(gaps) <= 1e-12 or abs(sum(gaps) - TWO_PI) > 1e-9:
            raise ValueError("degenerate quad: points must be distinct and strictly CCW ordered")

    @property
    def angles(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    @property
    def arc_lengths(self) -> tuple[float, ...]:
        x = self.angles
        return tuple((x[(k + 1) % 4] - x[k]) % TWO_PI for k in range(4))

    def points(self) -> np.ndarray:
        return np.exp(1j * np.array(self.angles))

    def arc_index(self, theta: np.ndarray) -> np.ndarray:
        """0..3 for A..D: the arc whose half-open sector ``[start, end)`` contains each angle."""
        rel = (np.asarray(theta, dtype=float) - self.a) % TWO_PI
        ends = np.cumsum(self.arc_lengths)
        return np.minimum(np.searchsorted(ends, rel, side="right"), 3)

    def rotated(self, phi: float) -> IdealBoundaryQuad:
        return IdealBoundaryQuad(*(x + phi for x in self.angles))

    def mapped(self, a: complex, alpha: float = 0.0) -> IdealBoundaryQuad:
        """Image under the disc automorphism ``mobius(., a, alpha)``, unwrapped to stay CCW."""
        img = np.angle(mobius(self.points(), a, alpha))
        out = [float(img[0])]
        for k in range(1, 4):
            out.append(out[-1] + float((img[k] - img[k - 1]) % TWO_PI))
        return IdealBoundaryQuad(*out)

    @classmethod
    def symmetric(cls) -> IdealBoundaryQuad:
        return cls(0.0, math.pi / 2, math.pi, 3 * math.pi / 2)

    @classmethod
    def with_cross_ratio(cls, eta: float) -> IdealBoundaryQuad:
        """Quad with arcs A, C of equal width centred on angles 0 and pi, with the given cross-ratio."""
        if not 0.0 < eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        # for this family eta = cos(alpha)^2 with alpha the half-width of arc A
        alpha = math.acos(math.sqrt(eta))
        return cls(-alpha, alpha, math.pi - alpha, math.pi + alpha)


def cross_ratio(quad: IdealBoundaryQuad) -> float:
    """``eta = (zc-zb)(zd-za) / ((zc-za)(zd-zb))``; real in (0, 1) for cyclic quads."""
    za, zb, zc, zd = quad.points()
    den = (zc - za) * (zd - zb)
    if abs(den) < 1e-300:
        raise ValueError("degenerate quad: coincident points")
    return float(((zc - zb) * (zd - za) / den).real)


def mobius(z, a: complex, alpha: float = 0.0):
    """Disc automorphism ``e^{i alpha} (z - a) / (1 - conj(a) z)`` for ``|a| < 1``."""
    if abs(a) >= 1:
        raise ValueError("|a| must be < 1")
    z = np.asarray(z, dtype=complex)
    return np.exp(1j * alpha) * (z - a) / (1 - np.conj(a) * z)


def random_mobius(gen: np.random.Generator, max_abs: float = 0.5) -> tuple[complex, float]:
    r = max_abs * math.sqrt(gen.random())
    return complex(r * np.exp(1j * TWO_PI * gen.random())), float(TWO_PI * gen.random())


def hyperbolic_distance(u, v) -> np.ndarray:
    """Distance in the Poincare disc: ``cosh d = 1 + 2|u-v|^2 / ((1-|u|^2)(1-|v|^2))``."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    x = 2.0 * np.abs(u - v) ** 2 / ((1 - np.abs(u) ** 2) * (1 - np.abs(v) ** 2))
    return np.log1p(x + np.sqrt(x * (x + 2.0)))


# --- Cardy's formula -------------------------------------------------------------

_CARDY_C = gamma(2.0 / 3.0) / (gamma(1.0 / 3.0) * gamma(4.0 / 3.0))


def cardy(eta: float) -> float:
    """``Gamma(2/3) / (Gamma(1/3) Gamma(4/3)) eta^(1/3) 2F1(1/3, 2/3; 4/3; eta)``.

    Evaluated on the nearer half and reflected through ``P(1-eta) = 1 - P(eta)``
    so the symmetry holds to rounding.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if eta > 0.5:
        return 1.0 - cardy(1.0 - eta)
    if eta == 0.0:
        return 0.0
    return float(_CARDY_C * eta ** (1.0 / 3.0) * hyp2f1(1.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0, eta))


def crossing_prediction(quad: IdealBoundaryQuad) -> float:
    """Cardy prediction for an A-C crossing.

    ``cross_ratio`` tends to 0 when arcs B and D shrink, where an A-C
    crossing becomes certain, so the A-C prediction is ``cardy(1 - eta)``.
    """
    return cardy(1.0 - cross_ratio(quad))


# --- Poisson sampling ------------------------------------------------------------


@dataclass(frozen=True)
class Weight:
    """Density ``w`` relative to hyperbolic area with ``1/M <= w <= M``."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    M: float

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(z), dtype=float)


def constant_weight(k: float) -> Weight:
    return Weight(f"const-{k:g}", lambda z: np.full(np.shape(z), float(k)), max(float(k), 1.0 / float(k)))


WEIGHTS: dict[str, Weight] = {
    "uniform": Weight("uniform", lambda z: np.ones(np.shape(z)), 1.0),
    # mean 1 against the angular law, bounded in [1/2, 2]
    "angular": Weight("angular", lambda z: 1.0 + 0.5 * np.cos(np.angle(z)), 2.0),
    "radial": Weight("radial", lambda z: 1.0 + 0.5 * np.cos(TWO_PI * np.abs(z)), 2.0),
}


def get_weight(name: str | None) -> Weight | None:
    if name is None or name == "none":
        return None
    try:
        return WEIGHTS[name]
    except KeyError:
        raise ValueError(f"unknown weight {name!r}; known: {', '.join(sorted(WEIGHTS))}") from None


@dataclass(frozen=True, eq=False)
class PoissonSample:
    lam: float
    R: float
    rho: np.ndarray
    theta: np.ndarray
    seed: int
    trial: int = 0
    weight: str = "none"

    @property
    def n(self) -> int:
        return len(self.rho)

    @property
    def z(self) -> np.ndarray:
        return np.tanh(self.rho / 2.0) * np.exp(1j * self.theta)

    @property
    def xy(self) -> np.ndarray:
        z = self.z
        return np.column_stack([z.real, z.imag])


def disc_area(R: float) -> float:
    return TWO_PI * (math.cosh(R) - 1.0)


def sample_poisson_hyperbolic(
    lam: float, R: float, seed: int, weight: Weight | None = None, trial: int = 0
) -> PoissonSample:
    """Poisson process of intensity ``lam * w`` (per hyperbolic area) on the ball of radius ``R``.

    Without a weight: count ~ Poisson(lam * area), radius by inverse CDF of
    ``(cosh rho - 1) / (cosh R - 1)``, angle uniform.  With a weight the same
    recipe runs at intensity ``lam * M`` and each point is kept with
    probability ``w / M``.
    """
    if lam <= 0 or R < 0:
        raise ValueError("need lam > 0 and R >= 0")
    gen = rng.numpy_generator(seed, "hyperbolic-poisson", trial)
    bound = 1.0 if weight is None else float(weight.M)
    mean = lam * bound * disc_area(R)
    n = int(gen.poisson(mean)) if mean > 0 else 0
    u = gen.random(n)
    rho = np.arccosh(1.0 + u * (math.cosh(R) - 1.0))
    theta = TWO_PI * gen.random(n)
    name = "none"
    if weight is not None:
        name = weight.name
        z = np.tanh(rho / 2.0) * np.exp(1j * theta)
        w = weight(z)
        if (w > bound * (1 + 1e-12)).any() or (w < (1 - 1e-12) / bound).any():
            raise ValueError(f"weight {weight.name} violates its bound M={bound}")
        keep = gen.random(n) * bound < w
        rho, theta = rho[keep], theta[keep]
    return PoissonSample(float(lam), float(R), rho, theta, int(seed), int(trial), name)


# --- tessellation ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class VoronoiTessellation:
    sites: np.ndarray  # (N, 2) model coordinates
    edges: np.ndarray  # (E, 2) Delaunay adjacency, u < v (may repeat without diagnostics)
    ideal_exposed: np.ndarray  # (E,) edge lies on a triangle whose circumdisk leaves the disc, or on the hull
    incidence: np.ndarray  # (N,) arc index 0..3 or -1
    rho: np.ndarray
    degenerate: int = 0  # Delaunay edges with a cocircular opposite pair
    perturbed: bool = False  # triangulation needed a joggled retry
    colors: np.ndarray | None = field(default=None, repr=False)  # True = black
    corner: np.ndarray | None = field(default=None, repr=False)  # (N,) second arc of a corner site, or -1

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def incident(self, arc: int | str) -> np.ndarray:
        """Sites on arc ``arc``, including the corner site shared with the previous arc."""
        k = ARC_NAMES.index(arc) if isinstance(arc, str) else int(arc)
        hit = self.incidence == k
        if self.corner is not None:
            hit |= self.corner == k
        return np.flatnonzero(hit)

    def adjacency_matrix(self) -> sparse.csr_matrix:
        n = self.n_sites
        e = self.edges
        A = sparse.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
        return (A + A.T).tocsr()

    @property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        A = self.adjacency_matrix()
        return A.indptr.astype(np.int64), A.indices.astype(np.int64)


def _delaunay(P: np.ndarray) -> tuple[np.ndarray | None, np.ndarray | None, bool]:
    """Delaunay simplices, hull vertices, and whether a joggled retry was needed.

    Triangle is tried first; qhull is the fallback.
    """
    try:
        out = triangle.triangulate({"vertices": P}, "Q")
        s = out.get("triangles")
        if s is not None and len(s) and len(out["vertices"]) == len(P):
            hull = np.flatnonzero(np.asarray(out["vertex_markers"]).ravel() == 1)
            return np.asarray(s, dtype=np.int64), hull, False
    except Exception:  # triangle signals failures with assorted exception types
        pass
    for options, joggled in ((None, False), ("QJ Qbb Qc", True)):
        try:
            tri = Delaunay(P, qhull_options=options)
        except QhullError:
            continue
        return tri.simplices.astype(np.int64), np.unique(tri.convex_hull), joggled
    return None, None, True


@dataclass(frozen=True)
class _EdgeTable:
    edges: np.ndarray  # unique (u < v)
    hull: np.ndarray  # hull edges (one incident triangle)
    interior_pairs: np.ndarray  # (k, 4): u, v and the two opposite vertices


def _edge_table(s: np.ndarray, n: int) -> _EdgeTable:
    u = np.concatenate([s[:, 0], s[:, 1], s[:, 2]])
    v = np.concatenate([s[:, 1], s[:, 2], s[:, 0]])
    w = np.concatenate([s[:, 2], s[:, 0], s[:, 1]])
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    key = lo * n + hi
    order = np.argsort(key, kind="stable")
    key, lo, hi, w = key[order], lo[order], hi[order], w[order]
    first = np.ones(len(key), dtype=bool)
    first[1:] = key[1:] != key[:-1]
    edges = np.column_stack([lo[first], hi[first]])
    start = np.flatnonzero(first)
    counts = np.diff(np.append(start, len(key)))
    single = start[counts == 1]
    double = start[counts == 2]
    pairs = np.column_stack([lo[double], hi[double], w[double], w[double + 1]])
    return _EdgeTable(edges, np.column_stack([lo[single], hi[single]]), pairs)


def _path_edges(P: np.ndarray) -> np.ndarray:
    direction = P[-1] - P[0]
    order = np.argsort(P @ direction, kind="mergesort")
    return np.sort(np.column_stack([order[:-1], order[1:]]), axis=1)


def _incircle(a, b, c, d) -> np.ndarray:
    """Incircle determinant: positive if ``d`` is inside the circle through CCW ``a, b, c``."""
    ad, bd, cd = a - d, b - d, c - d
    la = (ad**2).sum(axis=1)
    lb = (bd**2).sum(axis=1)
    lc = (cd**2).sum(axis=1)
    return (
        ad[:, 0] * (bd[:, 1] * lc - lb * cd[:, 1])
        - ad[:, 1] * (bd[:, 0] * lc - lb * cd[:, 0])
        + la * (bd[:, 0] * cd[:, 1] - bd[:, 1] * cd[:, 0])
    )


def _count_cocircular(P: np.ndarray, pairs: np.ndarray, rel: float = 1e-10) -> int:
    """Interior edges whose two opposite vertices are cocircular with the edge, to relative ``rel``."""
    if len(pairs) == 0:
        return 0
    a, b, c, d = (P[pairs[:, k]] for k in range(4))
    det = _incircle(a, b, c, d)
    L = np.max(np.stack([np.abs(a - d).max(axis=1), np.abs(b - d).max(axis=1), np.abs(c - d).max(axis=1)]), axis=0)
    return int((np.abs(det) <= rel * L**4).sum())


def _circumdisk_exits(P: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    a, b, c = P[simplices[:, 0]], P[simplices[:, 1]], P[simplices[:, 2]]
    bx, by = b[:, 0] - a[:, 0], b[:, 1] - a[:, 1]
    cx, cy = c[:, 0] - a[:, 0], c[:, 1] - a[:, 1]
    d = 2.0 * (bx * cy - by * cx)
    with np.errstate(divide="ignore", invalid="ignore"):
        ux = (cy * (bx**2 + by**2) - by * (cx**2 + cy**2)) / d
        uy = (bx * (cx**2 + cy**2) - cx * (bx**2 + by**2)) / d
    r = np.hypot(ux, uy)
    centre = np.hypot(a[:, 0] + ux, a[:, 1] + uy)
    return ~np.isfinite(centre + r) | (centre + r >= 1.0)


def _member_rows(rows: np.ndarray, table: np.ndarray, n: int) -> np.ndarray:
    if len(rows) == 0 or len(table) == 0:
        return np.zeros(len(rows), dtype=bool)
    return np.isin(rows[:, 0] * n + rows[:, 1], table[:, 0] * n + table[:, 1])


def build_tessellation(
    sample: PoissonSample, quad: IdealBoundaryQuad, depth: float = 1.0, diagnostics: bool = True
) -> VoronoiTessellation:
    """Delaunay adjacency of the sites plus arc incidence.

    A site is incident to arc X when it is a convex-hull vertex, lies at
    hyperbolic radius at least ``R - depth``, and its angle falls in X's sector.
    The last such site of each arc (in CCW order) is shared with the next arc.
    With ``diagnostics`` the ideal-exposed edges and cocircular ties are
    flagged; the crossing experiments skip that work.
    """
    P = sample.xy
    n = len(P)
    theta, rho = sample.theta, sample.rho
    perturbed = False
    degenerate = 0
    s = hull = None
    if n >= 3:
        s, hull, perturbed = _delaunay(P)
    if s is None:
        # at most two sites, or all collinear: the adjacency is a path
        edges = _path_edges(P) if n >= 2 else np.zeros((0, 2), dtype=np.int64)
        exposed = np.ones(len(edges), dtype=bool)
        hull = np.arange(n)
    elif not diagnostics:
        # repeated edges are harmless for connectivity
        edges = np.concatenate([s[:, [0, 1]], s[:, [1, 2]], s[:, [2, 0]]])
        exposed = np.zeros(len(edges), dtype=bool)
    else:
        table = _edge_table(s, n)
        edges = table.edges
        ex = s[_circumdisk_exits(P, s)]
        flagged = np.concatenate([table.hull, np.sort(np.concatenate([ex[:, [0, 1]], ex[:, [1, 2]], ex[:, [2, 0]]]), axis=1)])
        exposed = _member_rows(edges, flagged, n)
        degenerate = _count_cocircular(P, table.interior_pairs)
    incidence = np.full(n, -1, dtype=np.int64)
    corner = np.full(n, -1, dtype=np.int64)
    if len(hull):
        deep = hull[rho[hull] >= sample.R - depth]
        incidence[deep] = quad.arc_index(theta[deep])
        # the last site of each arc also belongs to the next one, so adjacent
        # arcs share a corner as on a Hex board; this makes the A-C black and
        # B-D white crossings exactly complementary
        cyc = hull[np.argsort((theta[hull] - quad.a) % TWO_PI, kind="stable")]
        if len(cyc) > 1:
            a, b = incidence[cyc], np.roll(incidence[cyc], -1)
            shared = (a >= 0) & (b >= 0) & (b == (a + 1) % 4)
            corner[cyc[shared]] = b[shared]
    return VoronoiTessellation(P, edges, exposed, incidence, rho, degenerate, perturbed, corner=corner)


def locate(tess: VoronoiTessellation, q: complex, start: int = 0) -> int:
    """Site whose hyperbolic Voronoi cell contains ``q``, by greedy descent on the Delaunay graph."""
    indptr, indices = tess.csr
    z = tess.sites[:, 0] + 1j * tess.sites[:, 1]
    cur = int(start)
    dcur = float(hyperbolic_distance(z[cur], q))
    while True:
        nbrs = indices[indptr[cur] : indptr[cur + 1]]
        if len(nbrs) == 0:
            return cur
        d = hyperbolic_distance(z[nbrs], q)
        k = int(np.argmin(d))
        if d[k] >= dcur:
            return cur
        cur, dcur = int(nbrs[k]), float(d[k])


def black_crossing(tess: VoronoiTessellation, black: np.ndarray, src: int = 0, dst: int = 2) -> bool:
    """True if a black Delaunay path joins a black ``src``-incident site to a black ``dst``-incident site."""
    black = np.asarray(black, dtype=bool)
    A = tess.incident(src)
    C = tess.incident(dst)
    A, C = A[black[A]], C[black[C]]
    if len(A) == 0 or len(C) == 0:
        return False
    e = tess.edges
    e = e[black[e[:, 0]] & black[e[:, 1]]]
    n = tess.n_sites
    G = sparse.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    _, labels = csgraph.connected_components(G, directed=False)
    return bool(np.intersect1d(labels[A], labels[C]).size)


# --- crossing experiments ----------------------------------------------------------


def default_R(lam: float) -> float:
    """Truncation radius ``max(4, log(lam)/2 + 2)``."""
    return max(4.0, 0.5 * math.log(lam) + 2.0)


def colors_for(seed: int, trial: int, n: int, p: float) -> np.ndarray:
    return rng.uniforms(rng.derive_seed(seed, "hyperbolic-color"), trial, n) < p


def crossing_trial(
    quad: IdealBoundaryQuad, lam: float, R: float, seed: int, trial: int, p: float = 0.5, weight: Weight | None = None
) -> int:
    """1 for an A-C black crossing, 0 for none, -1 if arc A or C has no incident site."""
    sample = sample_poisson_hyperbolic(lam, R, seed, weight, trial)
    tess = build_tessellation(sample, quad, diagnostics=False)
    if len(tess.incident(0)) == 0 or len(tess.incident(2)) == 0:
        return -1
    return int(black_crossing(tess, colors_for(seed, trial, sample.n, p)))


def _trial_chunk(quad, lam, R, seed, p, weight_name, t0, t1):
    weight = get_weight(weight_name) if isinstance(weight_name, str) or weight_name is None else weight_name
    return np.array([crossing_trial(quad, lam, R, seed, t, p, weight) for t in range(t0, t1)], dtype=np.int64)


@dataclass(frozen=True)
class HyperbolicEstimate:
    estimate: EstimateWithCI
    excluded: int
    outcomes: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0, dtype=np.int64))


def crossing_outcomes(
    quad, lam, R, trials, seed, p=0.5, weight: Weight | str | None = None, workers: int = 1
) -> np.ndarray:
    return np.concatenate(
        map_chunks(_trial_chunk, (quad, float(lam), float(R), int(seed), float(p), weight), trials, workers)
    )


def crossing_probability_hyperbolic(
    quad: IdealBoundaryQuad,
    lam: float,
    R: float | None = None,
    trials: int = 1000,
    seed: int = 0,
    p: float = 0.5,
    weight: Weight | str | None = None,
    workers: int = 1,
) -> HyperbolicEstimate:
    """Fraction of (non-excluded) trials with a black A-C crossing."""
    R = default_R(lam) if R is None else float(R)
    out = crossing_outcomes(quad, lam, R, trials, seed, p, weight, workers)
    excluded = int((out < 0).sum())
    valid = trials - excluded
    if valid == 0:
        raise ValueError("empty arc incidence in every trial: R too small or lambda too low")
    return HyperbolicEstimate(EstimateWithCI.from_counts(int((out == 1).sum()), valid), excluded, out)


LADDER_COLUMNS = ("lambda", "R", "eta", "trials", "successes", "estimate", "ci_lo", "ci_hi", "cardy", "gap", "excluded_trials")


@dataclass(frozen=True)
class LadderRow:
    lam: float
    R: float
    eta: float
    estimate: EstimateWithCI
    cardy: float
    excluded: int

    @property
    def gap(self) -> float:
        return abs(self.estimate.estimate - self.cardy)

    def values(self) -> tuple:
        e = self.estimate
        return (self.lam, self.R, self.eta, e.trials, e.successes, e.estimate, e.ci_lo, e.ci_hi, self.cardy, self.gap, self.excluded)


def lambda_ladder(
    quad: IdealBoundaryQuad,
    lams: Sequence[float],
    trials: int,
    seed: int,
    R_rule: Callable[[float], float] = default_R,
    p: float = 0.5,
    weight: Weight | str | None = None,
    workers: int = 1,
) -> list[LadderRow]:
    """One crossing estimate per intensity; every rung uses the same seed."""
    lams = [float(x) for x in lams]
    if any(b <= a for a, b in zip(lams, lams[1:])):
        raise ValueError("lambda list must be increasing")
    eta = cross_ratio(quad)
    pred = crossing_prediction(quad)
    rows = []
    for lam in lams:
        R = R_rule(lam)
        est = crossing_probability_hyperbolic(quad, lam, R, trials, seed, p, weight, workers)
        rows.append(LadderRow(lam, R, eta, est.estimate, pred, est.excluded))
    return rows
