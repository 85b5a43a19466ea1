"""Deciding whether a cutoff-indexed integral I(R) stays bounded as R grows.

The tail is summarised by two slopes over the last window of cutoffs:

* ``tail_slope``: slope of log I against log R;
* ``increment_slope`` p: slope of log dI against log R, where dI are the
  increments between consecutive geometric cutoffs.  Shell increments behave
  like R^p, so p > 0 is power divergence, p = 0 is logarithmic divergence and
  p < 0 is convergence.

Divergent when p > -s_div/4, Finite when p < -3 s_div/4 or the increments
shrink geometrically with ratio below 0.5, Inconclusive in between.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gauges import unit_ball_surface

FINITE, DIVERGENT, INCONCLUSIVE = "Finite", "Divergent", "Inconclusive"

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


class QuadratureError(FloatingPointError):
    """A nonnegative integrand produced a decreasing cumulative integral."""


@dataclass
class DivergenceVerdict:
    verdict: str
    cutoff_values: list  # [(R, I(R)), ...]
    tail_slope: float
    increment_slope: float
    confidence: float
    window: tuple = ()
    notes: list = field(default_factory=list)

    @property
    def finite(self) -> bool:
        return self.verdict == FINITE

    @property
    def divergent(self) -> bool:
        return self.verdict == DIVERGENT

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "tail_slope": self.tail_slope,
            "increment_slope": self.increment_slope,
            "confidence": self.confidence,
            "window": list(self.window),
            "cutoff_values": [[float(r), float(v)] for r, v in self.cutoff_values],
            "notes": list(self.notes),
        }


def classify_cutoffs(R, I, s_div: float = 0.02, window_decades: float = 2.0, ratio: float = 0.5,
                     min_span: float | None = None) -> DivergenceVerdict:
    """Classify from precomputed cutoff values I(R_k), R_k geometric and increasing."""
    R = np.asarray(R, dtype=float)
    I = np.asarray(I, dtype=float)
    if R.size < 4:
        raise ValueError("need at least 4 cutoffs")
    if np.any(np.diff(R) <= 0):
        raise ValueError("cutoffs must be strictly increasing")
    if min_span is not None and math.log10(R[-1] / R[0]) < min_span - 1e-9:
        raise ValueError(f"cutoffs must span at least {min_span} decades")
    dI = np.diff(I)
    scale = max(abs(I[-1]), 1e-300)
    if np.any(dI < -1e-9 * scale):
        k = int(np.argmin(dI))
        raise QuadratureError(f"cumulative integral decreases between R = {R[k]:.3g} and {R[k + 1]:.3g}")
    pairs = list(zip(R.tolist(), I.tolist()))
    lr = np.log(R)
    sel = lr >= lr[-1] - window_decades * math.log(10) - 1e-9
    if sel.sum() < 4:
        sel[-4:] = True
    idx = np.flatnonzero(sel)
    window = (float(R[idx[0]]), float(R[idx[-1]]))
    li = np.log(np.maximum(I[idx], 1e-300))
    tail_slope = float(np.polyfit(lr[idx], li, 1)[0])
    inc = dI[idx[:-1]]
    mids = 0.5 * (lr[idx[:-1]] + lr[idx[1:]])
    notes = []
    if np.all(inc <= 1e-15 * scale):
        return DivergenceVerdict(FINITE, pairs, tail_slope, -math.inf, 1.0, window, ["increments vanish"])
    pos = inc > 1e-15 * scale
    if pos.sum() < 3:
        return DivergenceVerdict(FINITE, pairs, tail_slope, -math.inf, 0.9, window, ["increments vanish"])
    x, y = mids[pos], np.log(inc[pos])
    coef, cov = np.polyfit(x, y, 1, cov=True) if pos.sum() > 3 else (np.polyfit(x, y, 1), np.zeros((2, 2)))
    p = float(coef[0])
    # normalise: the fit is per unit of log R, geometric cutoffs keep shells comparable
    stderr = float(math.sqrt(max(cov[0, 0], 0.0)))
    ratios = inc[1:][pos[1:] & pos[:-1]] / inc[:-1][pos[1:] & pos[:-1]]
    geometric = ratios.size >= 2 and np.all(ratios[-3:] < ratio)
    div_cut, fin_cut = -s_div / 4, -0.75 * s_div
    if p > div_cut and not geometric:
        verdict = DIVERGENT
        margin = p - div_cut
    elif p < fin_cut or geometric:
        verdict = FINITE
        margin = fin_cut - p if not geometric else 1.0
    else:
        verdict = INCONCLUSIVE
        margin = min(p - fin_cut, div_cut - p)
        notes.append("increment slope inside the undecided band")
    confidence = float(min(1.0, max(0.0, margin / (margin + 3 * stderr + 1e-3)))) if verdict != INCONCLUSIVE else 0.0
    return DivergenceVerdict(verdict, pairs, tail_slope, p, confidence, window, notes)


def radial_cumulative(integrand, cutoffs, dim: int = 1, inner: float = 0.0, start: float | None = None,
                      nodes: int = 8):
    """I(R_k) = inner + v_d int_{start}^{R_k} integrand(r) r^{d-1} dr, Gauss panels in log r.

    ``start`` defaults to the first cutoff (so I(R_0) = inner).
    """
    cutoffs = np.asarray(cutoffs, dtype=float)
    edges = np.log(cutoffs if start is None else np.concatenate([[start], cutoffs]))
    x, w = np.polynomial.legendre.leggauss(nodes)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    u = mid[:, None] + half[:, None] * x[None, :]
    r = np.exp(u)
    vals = np.asarray(integrand(r.ravel()), dtype=float).reshape(r.shape)
    shell = unit_ball_surface(dim) * np.sum(half[:, None] * w[None, :] * vals * r ** dim, axis=1)
    I = inner + np.concatenate([[0.0], np.cumsum(shell)]) if start is None else inner + np.cumsum(shell)
    return I


def classify_divergence(integrand, cutoffs, dim: int = 1, inner_radius: float = 1.0, s_div: float = 0.02,
                        window_decades: float = 2.0, min_span: float = 4.0) -> DivergenceVerdict:
    """Classify int_{|xi| >= inner_radius} integrand(|xi|) dxi for a radial integrand.

    ``integrand`` maps radii to nonnegative values; ``cutoffs`` is a geometric
    list of outer radii spanning at least ``min_span`` decades.
    """
    cutoffs = np.asarray(cutoffs, dtype=float)
    if cutoffs[0] < inner_radius:
        raise ValueError("cutoffs must lie outside the inner radius")
    I = radial_cumulative(integrand, cutoffs, dim, 0.0, start=inner_radius)
    return classify_cutoffs(cutoffs, I, s_div, window_decades, min_span=min_span)


def geometric_cutoffs(r0: float, r1: float, per_decade: int = 8) -> np.ndarray:
    n = max(4, int(math.ceil(math.log10(r1 / r0) * per_decade)) + 1)
    return np.geomspace(r0, r1, n)
