"""Criterion integrals over frequency space built from chi-energies.

The integral int E(xi) w(xi) dxi is accumulated over geometric radial shells
and handed to the divergence classifier.  For measures whose atoms stand for
cells of width h, the chi-energy only reflects the limiting set while
|psi| h is small, so the cutoffs stop at |psi| = resolution / h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..exponents import LevyExponent, sphere_directions
from ..sets import DiscreteMeasure
from .chi import ChiEngine
from .divergence import DivergenceVerdict, classify_cutoffs
from .fgamma import radial_inverse
from .gauges import unit_ball_surface

RESOLUTION = 0.3
A_INNER = 1e-3
A_CAP = 1e8


@dataclass
class FrequencyGrid:
    """Quadrature nodes for int f(xi) dxi, grouped into shells between cutoffs.

    ``weight`` already includes the angular measure; the integrand is assumed
    even in xi, so only half of the directions are sampled for anisotropic
    cases.
    """

    xi: np.ndarray
    weight: np.ndarray
    radius: np.ndarray
    shell: np.ndarray
    cutoffs: np.ndarray

    def cumulative(self, values, inner: float = 0.0) -> np.ndarray:
        shells = np.bincount(self.shell, weights=self.weight * values, minlength=len(self.cutoffs) - 1)
        return inner + np.concatenate([[0.0], np.cumsum(shells)])


def max_modulus(psis, d: int, r, n_dirs: int = 64) -> np.ndarray:
    """max over sampled directions and exponents of |psi(r u)|."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    dirs = sphere_directions(d, n_dirs)
    out = np.zeros(r.shape)
    for psi in psis:
        if psi.is_isotropic:
            out = np.maximum(out, np.abs(psi.radial(r)))
        else:
            out = np.maximum(out, np.abs(psi.along(dirs[None, :, :], r[:, None])).max(axis=1))
    return out


def radius_for_level(psis, d: int, a: float) -> float:
    return radial_inverse(lambda r: max_modulus(psis, d, r)[0], a)


def build_grid(psis, d: int, r_in: float, r_top: float, per_decade: float, nodes: int = 6,
               n_angles: int = 24) -> FrequencyGrid:
    n = max(4, int(math.ceil(math.log10(r_top / r_in) * per_decade)) + 1)
    cutoffs = np.geomspace(r_in, r_top, n)
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.log(cutoffs)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    u = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    r = np.exp(u)
    dr = (half[:, None] * w[None, :]).ravel() * r
    shell = np.repeat(np.arange(n - 1), nodes)
    isotropic = all(p.is_isotropic for p in psis)
    if isotropic or d == 1:
        xi = np.zeros((r.size, d))
        xi[:, 0] = r
        weight = unit_ball_surface(d) * r ** (d - 1) * dr
        return FrequencyGrid(xi, weight, r, shell, cutoffs)
    if d == 2:
        th = (np.arange(n_angles) + 0.5) * np.pi / n_angles
        dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
        wdir = np.full(n_angles, 2 * np.pi / n_angles)
    else:
        dirs = sphere_directions(d, 4 * n_angles)
        dirs = dirs[dirs[:, 0] >= 0]
        wdir = np.full(len(dirs), unit_ball_surface(d) / len(dirs))
    xi = (r[:, None, None] * dirs[None, :, :]).reshape(-1, d)
    weight = ((r ** (d - 1) * dr)[:, None] * wdir[None, :]).ravel()
    return FrequencyGrid(xi, weight, np.repeat(r, len(dirs)), np.repeat(shell, len(dirs)), cutoffs)


def local_index(psis, d: int, r: float) -> float:
    """d log max|psi| / d log r at radius r."""
    m = max_modulus(psis, d, [r / 1.5, r * 1.5])
    return float(np.log(m[1] / m[0]) / np.log(2.25))


class ChiCriterion:
    """int E_chi(mu)(xi) |xi|^{q} dxi over a resolution-limited window.

    E is evaluated once on the grid; ``verdict(q)`` then only reweights.
    """

    def __init__(self, mu: DiscreteMeasure, kernels, resolution: float = RESOLUTION, per_decade_psi: float = 8,
                 a_inner: float = A_INNER, a_cap: float = A_CAP, window_psi_decades: float = 2.0):
        self.mu = mu
        self.kernels = list(kernels)
        psis = [p for p, _ in self.kernels]
        d = psis[0].dim
        self.d = d
        h = float(np.max(mu.sides))
        self.a_top = min(resolution / h, a_cap) if h > 0 else a_cap
        self.r_in = radius_for_level(psis, d, a_inner)
        self.r_top = radius_for_level(psis, d, self.a_top)
        slope = max(local_index(psis, d, self.r_top), 0.05)
        self.grid = build_grid(psis, d, self.r_in, self.r_top, per_decade_psi * slope)
        self.window = window_psi_decades / slope
        self.engine = ChiEngine(mu, self.kernels, cells=True)
        self.E = self.engine(self.grid.xi)

    def cumulative(self, q: float) -> np.ndarray:
        """I(R_k) with weight |xi|^q; the inner ball uses E = 1."""
        g = self.grid
        if q + self.d <= 0:
            raise ValueError("weight not integrable at the origin")
        inner = unit_ball_surface(self.d) * self.r_in ** (q + self.d) / (q + self.d)
        return g.cumulative(self.E * g.radius ** q, inner)

    def verdict(self, q: float, s_div: float = 0.02) -> DivergenceVerdict:
        I = self.cumulative(q)
        v = classify_cutoffs(self.grid.cutoffs, I, s_div, self.window)
        v.notes.append(f"resolution window |psi| <= {self.a_top:.3g}")
        return v

    def total(self, q: float) -> float:
        return float(self.cumulative(q)[-1])


def image_criterion(mu: DiscreteMeasure, psi: LevyExponent, beta: float, **kw) -> DivergenceVerdict:
    """Classify int E_{chi_xi}(mu) |xi|^{beta - d} dxi for a measure on the half-line."""
    d = psi.dim
    if not 0 < beta < d:
        raise ValueError(f"beta must lie in (0, {d})")
    if mu.ambient != 1:
        raise ValueError("image_criterion needs a measure on R_+")
    mu.check_normalised(1e-9)
    return ChiCriterion(mu, [(psi, 1)], **kw).verdict(beta - d)


def image_integral_total(mu: DiscreteMeasure, psi: LevyExponent, beta: float, a_max: float = 1e12,
                         per_decade_psi: float = 10) -> float:
    """The full criterion integral for the cell measure (no resolution cutoff).

    Finite whenever the cell measure has finite f_{d-beta}-energy; used to
    check the Fubini identity against kernel energies.
    """
    d = psi.dim
    crit = ChiCriterion(mu, [(psi, 1)], resolution=a_max * float(mu.sides.max()), a_cap=a_max,
                        per_decade_psi=per_decade_psi, a_inner=1e-6)
    return crit.total(beta - d)
