"""Fourier-side criteria: int |mu^(xi)|^2 w(xi) dxi for preimages and hitting.

|mu^|^2 oscillates on the scale 1/diam(R), so in one dimension the nodes sit
on linear Gauss panels of width PANEL/diam, split at geometric cutoffs used by
the classifier.  Natural measures are uniform on their cells, so the
transform only reflects the limiting set for |xi| below RESOLUTION / h.
"""

from __future__ import annotations

import math
import time

import numpy as np

from ..energy.criteria import RESOLUTION, build_grid
from ..energy.divergence import DIVERGENT, DivergenceVerdict, classify_cutoffs
from ..exponents import LevyExponent, complex_power, resolvent_real
from ..sets import SelfSimilar, SetSpec, analytic_dimension, set_fourier
from .report import DimensionReport, bisect_dimension

XI_TOP = 1e5
PANEL = 2.0
MAX_NODES = 4_000_000


def default_level(R: SetSpec, xi_top: float = XI_TOP, max_atoms: int = 1 << 20) -> int:
    """Smallest level whose cells resolve frequencies up to ``xi_top``."""
    level = 0
    while level < 40:
        side = _side(R, level)
        if side == 0 or RESOLUTION / side >= xi_top or R.count(level + 1) > max_atoms:
            return level
        level += 1
    return level


def _log_period(R: SetSpec) -> float | None:
    """Scale ratio under which the transform of a self-similar set repeats."""
    if isinstance(R, SelfSimilar):
        return 1.0 / R.r
    return None


def _side(R: SetSpec, level: int) -> float:
    _, sides, _ = R.cells(level)
    return float(np.max(sides)) if sides.size else 0.0


class FourierCriterion:
    """|mu^|^2 on a fixed grid; weights supplied per call."""

    def __init__(self, R: SetSpec, level: int | None = None, xi_top: float = XI_TOP, per_decade: int = 8,
                 nodes: int = 6, window_decades: float = 2.0):
        self.R = R
        self.d = d = R.ambient
        self.level = default_level(R, xi_top) if level is None else level
        h = _side(R, self.level)
        self.xi_top = min(xi_top, RESOLUTION / h) if h > 0 else xi_top
        if self.xi_top < 1e3:
            raise ValueError(f"level {self.level} resolves |xi| only up to {self.xi_top:.3g}; raise the level")
        lo, hi = R.bounds()
        diam = float(np.max(hi - lo))
        self.window = window_decades
        ratio = _log_period(R)
        if ratio is not None:
            # |mu^|^2 is log-periodic; shells of one period each keep the slope fit unbiased
            n = int(math.floor(math.log(self.xi_top) / math.log(ratio)))
            self.cutoffs = ratio ** np.arange(n + 1)
        else:
            self.cutoffs = np.geomspace(1.0, self.xi_top, int(math.ceil(math.log10(self.xi_top) * per_decade)) + 1)
        gx, gw = np.polynomial.legendre.leggauss(nodes)
        if d == 1:
            width = PANEL / max(diam, 1.0)
            n_lin = int(math.ceil(self.xi_top / width))
            if n_lin * nodes > MAX_NODES:
                raise MemoryError("frequency grid too fine; shrink the set or xi_top")
            edges = np.unique(np.concatenate([np.linspace(0.0, self.xi_top, n_lin + 1), self.cutoffs]))
            mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * (edges[1:] - edges[:-1])
            r = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
            self.weight = 2 * (half[:, None] * gw[None, :]).ravel()  # +xi and -xi
            self.xi = r[:, None]
            self.radius = r
        else:
            g = build_grid([], d, 1.0, self.xi_top, per_decade=40, nodes=nodes, n_angles=48)
            inner = build_grid([], d, 1e-3, 1.0, per_decade=8, nodes=nodes, n_angles=48)
            self.xi = np.concatenate([inner.xi, g.xi])
            self.weight = np.concatenate([inner.weight, g.weight])
            self.radius = np.concatenate([inner.radius, g.radius])
        # shell 0 holds |xi| < 1; shell k holds cutoffs[k-1] <= |xi| < cutoffs[k]
        self.shell = np.searchsorted(self.cutoffs, self.radius, side="right")
        self.mod2 = np.abs(set_fourier(R, self.level, self.xi)) ** 2

    def cumulative(self, factor: np.ndarray) -> np.ndarray:
        """I at each cutoff for the integrand mod2 * factor."""
        w = self.weight * self.mod2 * factor
        shells = np.bincount(self.shell, weights=w, minlength=len(self.cutoffs) + 1)
        return np.cumsum(shells)[:len(self.cutoffs)]

    def verdict(self, factor: np.ndarray, s_div: float = 0.02) -> DivergenceVerdict:
        v = classify_cutoffs(self.cutoffs, self.cumulative(factor), s_div, self.window)
        v.notes.append(f"|xi| <= {self.xi_top:.3g} at level {self.level}")
        return v

    def grid_info(self) -> dict:
        return {"level": self.level, "xi_max": float(self.xi_top), "nodes": int(self.radius.size),
                "n_cutoffs": int(len(self.cutoffs)), "fit_decades": self.window}


def _check_dim(psi: LevyExponent, R: SetSpec):
    if psi.dim != R.ambient:
        raise ValueError(f"exponent acts on R^{psi.dim} but the set lies in R^{R.ambient}")


class PreimageCriterion:
    """int |mu^|^2 Re(1/(1 + psi^{1-gamma})) dxi for each gamma in (0, 1)."""

    def __init__(self, psi: LevyExponent, R: SetSpec, level: int | None = None, **kw):
        _check_dim(psi, R)
        self.psi = psi
        self.fc = FourierCriterion(R, level, **kw)
        self.values = psi(self.fc.xi)

    def verdict(self, gamma: float) -> DivergenceVerdict:
        if not 0 < gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        return self.fc.verdict(resolvent_real(complex_power(self.values, 1 - gamma)))


def preimage_criterion(psi: LevyExponent, R: SetSpec, gamma: float, level: int | None = None) -> DivergenceVerdict:
    """Verdict for the preimage criterion at gamma; Divergent means dim X^{-1}(R) < gamma a.s."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    return PreimageCriterion(psi, R, level).verdict(gamma)


def dim_preimage(psi: LevyExponent, R: SetSpec, tol: float = 0.01, level: int | None = None) -> DimensionReport:
    """Essential sup of dim X^{-1}(R): sup of gamma with a Finite criterion."""
    t0 = time.perf_counter()
    crit = PreimageCriterion(psi, R, level)
    rep = bisect_dimension(crit.verdict, 0.0, 1.0, tol)
    rep.grid = crit.fc.grid_info()
    rep.flags.append("assumed: transition densities strictly positive")
    if all(v["verdict"] == DIVERGENT for _, v in rep.verdicts):
        rep.value, rep.interval = 0.0, (0.0, rep.interval[1])
        rep.flags.append("empty")
    rep.extra["seconds"] = time.perf_counter() - t0
    rep.extra["formula_if_stable"] = _stable_preimage(psi, R)
    return rep


def _stable_preimage(psi, R):
    alpha = psi.index
    if alpha is None or not psi.is_isotropic:
        return None
    return max(0.0, (alpha + analytic_dimension(R) - psi.dim) / alpha)


def hitting_criterion(psis, F: SetSpec, level: int | None = None) -> DivergenceVerdict:
    """Classify int |mu^|^2 prod_j Re(1/(1 + psi_j)) dxi.

    Finite corresponds to the range sum X_1(R_+) + ... + X_p(R_+) + F having
    positive expected Lebesgue measure.
    """
    psis = list(psis)
    if not psis:
        raise ValueError("need at least one exponent")
    for p in psis:
        _check_dim(p, F)
    fc = FourierCriterion(F, level)
    factor = np.ones(fc.radius.size)
    for p in psis:
        factor *= resolvent_real(p(fc.xi))
    v = fc.verdict(factor)
    v.notes.append("assumed: the sector-type condition on the family")
    return v
