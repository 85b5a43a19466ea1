"""Image dimension dim X(G) for G in R_+: the chi-energy criterion and gauge bounds."""

from __future__ import annotations

import math
import time

import numpy as np

from ..energy.capacity import minimize_quadratic
from ..energy.chi import offset_factor
from ..energy.criteria import ChiCriterion
from ..energy.divergence import DIVERGENT, FINITE, INCONCLUSIVE, DivergenceVerdict
from ..energy.fgamma import f_gamma
from ..energy.gauges import unit_ball_surface
from ..exponents import LevyExponent
from ..sets import FiniteUnion, Point, SetSpec, analytic_dimension, natural_measure, refine_weights
from .report import DimensionReport, bisect_dimension

TARGET_CELL = 2e-6
MAX_FINE_ATOMS = 1 << 20
_RANK = {DIVERGENT: 0, INCONCLUSIVE: 1, FINITE: 2}


def default_level(G: SetSpec, target_cell: float = TARGET_CELL, max_atoms: int = MAX_FINE_ATOMS) -> int:
    """Smallest level whose cells are below ``target_cell``, within the atom budget."""
    if isinstance(G, Point):
        return 0
    level = 0
    while level < 40:
        mu_cell = _cell_at(G, level)
        if mu_cell <= target_cell or G.count(level + 1) > max_atoms:
            return level
        level += 1
    return level


def _cell_at(G: SetSpec, level: int) -> float:
    lo, hi = G.bounds()
    if hasattr(G, "r"):
        return float((hi - lo)[0] * G.r ** level)
    if hasattr(G, "parts"):
        return max(_cell_at(p, level) for p in G.parts)
    return float((hi - lo)[0] / 2 ** level)


class ImageCriterion:
    """Verdicts of the image criterion at exponent beta, minimised over measures.

    The natural measure is tried first.  When it is not Finite, weights are
    optimised on a coarse level (same frequency window, cell-averaged kernel),
    spread uniformly over the fine descendants, and the criterion is
    re-evaluated; the better verdict wins, since the criterion asks for some
    measure with a finite integral.
    """

    def __init__(self, psi: LevyExponent, G: SetSpec, level: int | None = None, reweight: bool = True,
                 opt_level: int = 8, budget: int = 2000):
        if G.ambient != 1:
            raise ValueError("image sets must lie in R_+")
        lo, _ = G.bounds()
        if lo[0] < 0:
            raise ValueError("image sets must lie in R_+")
        self.psi, self.G = psi, G
        self.level = default_level(G) if level is None else level
        self.mu = natural_measure(G, self.level)
        self.natural = ChiCriterion(self.mu, [(psi, 1)])
        self.reweight = reweight and self.mu.size > 1 and not isinstance(G, FiniteUnion)
        self.opt_level = min(opt_level, self.level)
        self.budget = budget
        self._coarse = None
        self.evaluations = 0

    def _coarse_setup(self):
        mu_c = natural_measure(self.G, self.opt_level)
        crit = ChiCriterion(mu_c, [(self.psi, 1)], resolution=self.natural.a_top * float(mu_c.sides[0]),
                            a_cap=self.natural.a_top)
        _, idx = mu_c.lattice()
        length = int(idx.max()) + 1
        h = float(mu_c.sides[0])
        D = np.arange(length) * h
        vals = crit.engine.values(crit.grid.xi)[0]
        # table of cell-averaged Re chi at every lattice offset and node
        table = np.empty((length, vals.size))
        for j, v in enumerate(vals):
            table[:, j] = offset_factor(D, h, v, cells=True).real
        self._coarse = (mu_c, crit, idx[:, 0], table)

    def reweighted_verdict(self, beta: float) -> DivergenceVerdict:
        if self._coarse is None:
            self._coarse = self._coarse_setup() or self._coarse
        mu_c, crit, idx, table = self._coarse
        g = crit.grid
        q = beta - self.psi.dim
        col = table @ (g.weight * g.radius ** q)
        K = col[np.abs(idx[:, None] - idx[None, :])]
        res = minimize_quadratic(K, budget=self.budget, rtol=1e-6)
        fine = refine_weights(self.G, self.opt_level, self.level, res.weights)
        v = ChiCriterion(fine, [(self.psi, 1)]).verdict(q)
        v.notes.append(f"reweighted on level {self.opt_level} ({res.iterations} iterations)")
        return v

    def verdict(self, beta: float) -> DivergenceVerdict:
        self.evaluations += 1
        v = self.natural.verdict(beta - self.psi.dim)
        if v.verdict == FINITE or not self.reweight:
            return v
        w = self.reweighted_verdict(beta)
        return w if _RANK[w.verdict] > _RANK[v.verdict] else v

    def grid_info(self) -> dict:
        c = self.natural
        return {"level": self.level, "cell": float(self.mu.cell), "atoms": int(self.mu.size),
                "psi_window": [1e-3, float(c.a_top)], "radius_window": [float(c.r_in), float(c.r_top)],
                "n_cutoffs": int(len(c.grid.cutoffs)), "fit_decades": float(c.window),
                "opt_level": self.opt_level if self.reweight else None}


def dim_image(psi: LevyExponent, G: SetSpec, level: int | None = None, tol: float = 0.01,
              reweight: bool = True) -> DimensionReport:
    """sup of beta in (0, d) with a measure on G whose criterion integral is finite.

    The search is over reweighted natural measures only, so the estimate is
    biased low relative to the infimum over all probability measures.
    """
    t0 = time.perf_counter()
    crit = ImageCriterion(psi, G, level, reweight)
    rep = bisect_dimension(crit.verdict, 0.0, float(psi.dim), tol)
    rep.grid = crit.grid_info()
    rep.flags.append("lower-bound-biased: measures restricted to reweighted natural measures")
    rep.extra["seconds"] = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# bounds from the growth of f_{d-beta} at the origin


def gauge_growth(psi: LevyExponent, beta: float, r_min: float = 1e-12, decades: float = 1.0,
                 window: int = 5) -> tuple[float, float]:
    """(liminf, limsup) estimates of log f_{d-beta}(r) / log(1/r) as r -> 0.

    Slopes of log f against log(1/r) are fitted over sliding windows of dyadic
    radii spanning the last ``decades`` decades above ``r_min``.
    """
    d = psi.dim
    n = int(round(decades * math.log2(10))) + window
    r = r_min * 2.0 ** np.arange(n)[::-1]
    f = f_gamma(psi, d - beta, r)
    x, y = np.log(1 / r), np.log(f)
    slopes = [np.polyfit(x[i:i + window], y[i:i + window], 1)[0] for i in range(len(r) - window + 1)]
    return float(min(slopes)), float(max(slopes))


def dim_image_bounds(psi: LevyExponent, G: SetSpec, tol: float = 0.01, spread_tol: float = 0.05) -> dict:
    """I(G) = sup{beta : limsup < dim G} and J(G) = inf{beta : liminf > dim G}.

    Empty sets follow sup 0 = 0 and inf 0 = d.  A large spread between the
    windowed slopes widens the pair and is flagged.
    """
    if not psi.is_symmetric:
        raise ValueError("the gauge bounds need a symmetric exponent")
    d = psi.dim
    dim_g = analytic_dimension(G)
    cache = {}

    def growth(beta):
        key = round(beta, 12)
        if key not in cache:
            cache[key] = gauge_growth(psi, key)
        return cache[key]

    def search(pred, want_sup):
        lo, hi = tol / 2, d - tol / 2
        if want_sup:
            if not pred(lo):
                return 0.0
            if pred(hi):
                return float(d)
        else:
            if pred(lo):
                return lo
            if not pred(hi):
                return float(d)
        while hi - lo > tol:
            m = 0.5 * (lo + hi)
            if pred(m) == want_sup:
                lo = m
            else:
                hi = m
        return 0.5 * (lo + hi)

    I = search(lambda b: growth(b)[1] < dim_g, True)
    J = search(lambda b: growth(b)[0] > dim_g, False)
    spread = max((hi - lo for lo, hi in cache.values()), default=0.0)
    flags = []
    if spread > spread_tol:
        flags.append(f"windowed slopes spread by {spread:.3g}")
    if I > J:
        I, J = J, I
    return {"I": I, "J": J, "dim_G": dim_g, "slope_spread": spread, "flags": flags,
            "growth": {str(k): list(v) for k, v in sorted(cache.items())}}
