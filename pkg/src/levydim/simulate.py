"""Monte Carlo paths of stable-type processes, image clouds, box counting and probes."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .exponents import IsotropicStable, LevyExponent, PowerOf, SkewedStable1D, StableComponents, Composite
from .sets import DiscreteMeasure, SetSpec, disjoint, natural_measure


class UnsupportedProcess(ValueError):
    pass


def rng_for(seed: int, path: int = 0) -> np.random.Generator:
    """Counter-based stream keyed by (seed, path index); draws within a path are sequential."""
    return np.random.Generator(np.random.Philox(key=[int(seed) & (2 ** 64 - 1), int(path)]))


# ---------------------------------------------------------------------------
# variates


def stable_increment(alpha: float, skew: float = 0.0, scale: float = 1.0, rng=None, size=None):
    """Strictly stable variates with E exp(i u X) = exp(-psi(u)), psi as in SkewedStable1D.

    Uses the uniform-plus-exponential trigonometric construction; alpha = 2
    is a centred Gaussian with variance 2 scale^2.
    """
    if not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")
    if not -1 <= skew <= 1:
        raise ValueError("skew must lie in [-1, 1]")
    rng = np.random.default_rng() if rng is None else rng
    if alpha == 2:
        return scale * math.sqrt(2.0) * rng.standard_normal(size)
    V = rng.uniform(-math.pi / 2, math.pi / 2, size)
    W = rng.standard_exponential(size)
    if alpha == 1:
        h = math.pi / 2 + skew * V
        X = (2 / math.pi) * (h * np.tan(V) - skew * np.log((math.pi / 2) * W * np.cos(V) / h))
        return scale * X
    t = skew * math.tan(math.pi * alpha / 2)
    B = math.atan(t) / alpha
    S = (1 + t * t) ** (1 / (2 * alpha))
    X = S * np.sin(alpha * (V + B)) / np.cos(V) ** (1 / alpha) * \
        (np.cos(V - alpha * (V + B)) / W) ** ((1 - alpha) / alpha)
    return scale * X


def positive_stable(a: float, rng, size=None):
    """Variates with E exp(-lam S) = exp(-lam^a), 0 < a <= 1 (a = 1 gives S = 1)."""
    if not 0 < a <= 1:
        raise ValueError("a must lie in (0, 1]")
    if a == 1:
        return np.ones(size)
    U = rng.uniform(0.0, 1.0, size)
    E = rng.standard_exponential(size)
    A = (np.sin(a * math.pi * U) ** (a / (1 - a)) * np.sin((1 - a) * math.pi * U)
         / np.sin(math.pi * U) ** (1 / (1 - a)))
    return (A / E) ** ((1 - a) / a)


def increments(psi: LevyExponent, gaps, rng) -> np.ndarray:
    """Independent increments over the time gaps, shape (len(gaps), d)."""
    gaps = np.asarray(gaps, dtype=float)
    n = gaps.size
    if isinstance(psi, IsotropicStable):
        d, a = psi.dim, psi.alpha
        S = gaps ** (2 / a) * positive_stable(a / 2, rng, n)
        Z = rng.standard_normal((n, d))
        return psi.scale * np.sqrt(2 * S)[:, None] * Z
    if isinstance(psi, SkewedStable1D):
        a = psi.alpha
        if a == 1:
            # t psi is not the exponent of a rescaled variate: time scaling adds a drift
            logg = np.log(np.where(gaps > 0, gaps, 1.0))
            out = psi.scale * gaps * (stable_increment(1.0, psi.skew, 1.0, rng, n) + (2 / math.pi) * psi.skew * logg)
        else:
            out = stable_increment(a, psi.skew, 1.0, rng, n) * psi.scale * gaps ** (1 / a)
        return out[:, None]
    if isinstance(psi, StableComponents):
        blocks = [increments(IsotropicStable(a, k), gaps, rng) for a, k in psi.components]
        return np.concatenate(blocks, axis=1)
    if isinstance(psi, Composite):
        return sum(increments(p, gaps, rng) for p in psi.parts)
    if isinstance(psi, PowerOf):
        a = psi.exponent
        clock = gaps if a == 1 else gaps ** (1 / a) * positive_stable(a, rng, n)
        return increments(psi.base, clock, rng)
    raise UnsupportedProcess(f"no sampler for {getattr(psi, 'family', type(psi).__name__)}")


@dataclass
class PathSample:
    times: np.ndarray
    values: np.ndarray
    descriptor: dict
    seed: int
    path: int = 0
    extra: dict = field(default_factory=dict)


def sample_path(psi: LevyExponent, times, seed: int, path: int = 0) -> PathSample:
    """X at the given increasing times (X(0) = 0), reproducible from (psi, times, seed, path)."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a nonempty 1-d array")
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be nonnegative and strictly increasing")
    gaps = np.diff(np.concatenate([[0.0], times]))
    inc = increments(psi, gaps, rng_for(seed, path))
    return PathSample(times, np.cumsum(inc, axis=0), psi.to_dict(), seed, path)


# ---------------------------------------------------------------------------
# image clouds


def _times(G: SetSpec, level: int) -> tuple[np.ndarray, np.ndarray]:
    lefts, sides, _ = G.cells(level)
    sides = np.broadcast_to(sides, lefts.shape)
    order = np.argsort(lefts[:, 0])
    return lefts[order, 0], sides[order, 0]


def image_points(psi: LevyExponent, G: SetSpec, level: int, seed: int, path: int = 0,
                 fine_level: int | None = None, interior: bool = False) -> np.ndarray:
    """X evaluated at the left ends of the level-``level`` cells of G.

    The path is always simulated on the ``fine_level`` grid, so clouds for
    different levels with one seed are nested.  ``interior`` returns the
    whole fine cloud, which refines every level-``level`` cell.
    """
    if G.ambient != 1:
        raise ValueError("G must lie in R_+")
    fine = max(level, 14 if fine_level is None else fine_level)
    t_fine, _ = _times(G, fine)
    t_fine = np.unique(t_fine)
    ps = sample_path(psi, t_fine, seed, path) if t_fine[0] > 0 else _with_origin(psi, t_fine, seed, path)
    if interior:
        return ps.values
    t_lvl, _ = _times(G, level)
    idx = np.searchsorted(t_fine, t_lvl)
    return ps.values[idx]


def _with_origin(psi, t, seed, path):
    ps = sample_path(psi, t[1:], seed, path) if t.size > 1 else None
    zero = np.zeros((1, psi.dim))
    vals = zero if ps is None else np.vstack([zero, ps.values])
    return PathSample(t, vals, psi.to_dict(), seed, path)


# ---------------------------------------------------------------------------
# box counting


@dataclass
class BoxCount:
    value: float
    stderr: float
    ci: tuple
    scales: np.ndarray
    counts: np.ndarray
    window: tuple

    def __float__(self):
        return self.value


def box_counts(points, scales) -> np.ndarray:
    """Occupied boxes of side s anchored at the lower corner; the far faces close the last box."""
    pts = np.asarray(points, dtype=float)
    lo = pts.min(axis=0)
    ext = pts.max(axis=0) - lo
    out = []
    for s in scales:
        top = np.maximum(np.ceil(ext / s - 1e-9).astype(np.int64) - 1, 0)
        idx = np.minimum(np.floor((pts - lo) / s).astype(np.int64), top)
        out.append(len(np.unique(idx, axis=0)))
    return np.array(out)


def box_dimension_fit(points, scales=None, min_count: int = 10, max_fraction: float = 0.1) -> BoxCount:
    """Slope of log N(s) against log(1/s) over half-octave scales in the stable window.

    Scales where the count is below ``min_count`` or above ``max_fraction``
    of the number of points are dropped (coarse and saturated ends).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = len(pts)
    if n < 1000:
        raise ValueError("need at least 1000 points")
    diam = float(np.max(pts.max(axis=0) - pts.min(axis=0)))
    if diam == 0:
        raise ValueError("all points coincide")
    if scales is None:
        scales = diam / np.unique(np.round(2.0 ** (np.arange(2, 80) / 2)))
    scales = np.asarray(scales, dtype=float)
    counts = box_counts(pts, scales)
    ok = (counts >= min_count) & (counts <= max_fraction * n)
    if ok.sum() < 4:
        raise ValueError("fewer than 4 usable scales")
    x, y = np.log(1 / scales[ok]), np.log(counts[ok])
    coef, cov = np.polyfit(x, y, 1, cov=True) if ok.sum() > 4 else (np.polyfit(x, y, 1), np.zeros((2, 2)))
    slope, se = float(coef[0]), float(math.sqrt(max(cov[0, 0], 0.0)))
    return BoxCount(slope, se, (slope - 2 * se, slope + 2 * se), scales, counts,
                    (float(scales[ok][0]), float(scales[ok][-1])))


def box_dimension(points, scales=None) -> float:
    return box_dimension_fit(points, scales).value


# ---------------------------------------------------------------------------
# chi-energy by simulation


def mc_chi_energy(psi: LevyExponent, mu: DiscreteMeasure, xi, n_paths: int = 10_000, seed: int = 0):
    """Mean over paths of |sum_i w_i exp(i xi . X(t_i))|^2, with its standard error."""
    if mu.ambient != 1:
        raise ValueError("mu must live on R_+")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.size != psi.dim:
        raise ValueError(f"xi must have {psi.dim} coordinates")
    t = mu.atoms[:, 0]
    order = np.argsort(t)
    t, w = t[order], mu.weights[order]
    if np.all(xi == 0) or mu.size == 1:
        return float(np.sum(w) ** 2), 0.0
    uniq, inv = np.unique(t, return_inverse=True)
    pos = uniq[0] > 0
    times = uniq if pos else uniq[1:]
    vals = np.empty(n_paths)
    for p in range(n_paths):
        X = sample_path(psi, times, seed, p).values if times.size else np.zeros((0, psi.dim))
        if not pos:
            X = np.vstack([np.zeros((1, psi.dim)), X])
        phase = np.exp(1j * (X @ xi))[inv]
        vals[p] = abs(np.dot(w, phase)) ** 2
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_paths))


# ---------------------------------------------------------------------------
# intersection probe


def segment_distance(P0, P1, Q0, Q1) -> np.ndarray:
    """Distances between segments [P0, P1] and [Q0, Q1], row by row."""
    u, v, w0 = P1 - P0, Q1 - Q0, P0 - Q0
    a = np.einsum("ij,ij->i", u, u)
    b = np.einsum("ij,ij->i", u, v)
    c = np.einsum("ij,ij->i", v, v)
    d = np.einsum("ij,ij->i", u, w0)
    e = np.einsum("ij,ij->i", v, w0)
    den = a * c - b * b
    tiny = 1e-300
    s = np.where(den > 1e-12 * np.maximum(a * c, tiny), (b * e - c * d) / np.maximum(den, tiny), 0.0)
    s = np.clip(s, 0.0, 1.0)
    t = np.where(c > tiny, (b * s + e) / np.maximum(c, tiny), 0.0)
    # clamp t and recompute s where needed
    t_c = np.clip(t, 0.0, 1.0)
    s = np.where(t != t_c, np.clip(np.where(a > tiny, (b * t_c - d) / np.maximum(a, tiny), 0.0), 0.0, 1.0), s)
    diff = w0 + s[:, None] * u - t_c[:, None] * v
    return np.linalg.norm(diff, axis=1)


def min_polyline_distance(A0, A1, B0, B1, radius: float) -> float:
    """Smallest distance between two segment sets, or inf when it exceeds ``radius``."""
    ma, mb = 0.5 * (A0 + A1), 0.5 * (B0 + B1)
    la = np.linalg.norm(A1 - A0, axis=1)
    lb = np.linalg.norm(B1 - B0, axis=1)
    reach = radius + 0.5 * (la.max() + lb.max())
    pairs = cKDTree(ma).query_ball_tree(cKDTree(mb), reach)
    i = np.repeat(np.arange(len(pairs)), [len(p) for p in pairs])
    if i.size == 0:
        return math.inf
    j = np.concatenate([np.asarray(p, dtype=int) for p in pairs])
    dist = segment_distance(A0[i], A1[i], B0[j], B1[j])
    m = float(dist.min())
    return m if m <= radius else math.inf


@dataclass
class ProbeTable:
    eps: list
    frequency: list
    hits: list
    n_paths: int
    trend: str
    notes: list

    def to_rows(self):
        return [{"epsilon": e, "frequency": f, "hits": h} for e, f, h in zip(self.eps, self.frequency, self.hits)]


def probe_trend(eps, hits, n_paths: int, plateau: float = 0.5, decay: float = 4.0, min_hits: int = 5) -> str:
    """Plateau, decay or unclear from the smallest halving step whose larger epsilon has enough hits."""
    order = np.argsort(eps)[::-1]
    h = np.asarray(hits, dtype=float)[order]
    pairs = [k for k in range(len(h) - 1) if h[k] >= min_hits]
    if not pairs:
        return "unclear"
    h_prev, h_last = h[pairs[-1]], h[pairs[-1] + 1]
    if h_last == 0 or h_prev / h_last >= decay:
        return "decay"
    if abs(h_prev - h_last) / h_prev < plateau:
        return "plateau"
    return "unclear"


def intersection_probe(psi: LevyExponent, F: SetSpec, G: SetSpec, eps, n_paths: int = 2000, seed: int = 0,
                       level: int = 8) -> ProbeTable:
    """Fraction of paths whose piecewise linear images of F and G come within each epsilon.

    On each level-``level`` cell the image is replaced by the segment between
    the path values at the cell ends, so crossings in the plane register at
    every epsilon.
    """
    if F.ambient != 1 or G.ambient != 1:
        raise ValueError("F and G must lie in R_+")
    if not disjoint(F, G):
        raise ValueError("F and G must be disjoint")
    eps = sorted((float(e) for e in eps), reverse=True)
    tF, sF = _times(F, level)
    tG, sG = _times(G, level)
    # each cell contributes the segment from X(left) to X(right)
    ends_F = np.stack([tF, tF + sF], axis=1)
    ends_G = np.stack([tG, tG + sG], axis=1)
    t_all = np.unique(np.concatenate([ends_F.ravel(), ends_G.ravel()]))
    iF = np.searchsorted(t_all, ends_F)
    iG = np.searchsorted(t_all, ends_G)
    hits = np.zeros(len(eps), dtype=int)
    for p in range(n_paths):
        ps = sample_path(psi, t_all, seed, p) if t_all[0] > 0 else _with_origin(psi, t_all, seed, p)
        X = ps.values
        m = min_polyline_distance(X[iF[:, 0]], X[iF[:, 1]], X[iG[:, 0]], X[iG[:, 1]], eps[0])
        hits += np.array([m < e for e in eps], dtype=int)
    freq = (hits / n_paths).tolist()
    trend = probe_trend(eps, hits, n_paths)
    notes = ["plateau and decay thresholds are engineering choices"]
    return ProbeTable(eps, freq, hits.tolist(), n_paths, trend, notes)


# ---------------------------------------------------------------------------
# export


def write_csv(path, rows, columns=None):
    rows = list(rows)
    if not rows:
        raise ValueError("nothing to write")
    columns = list(rows[0].keys()) if columns is None else list(columns)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def cloud_rows(points):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return [{f"x{j + 1}": float(v) for j, v in enumerate(row)} for row in pts]
