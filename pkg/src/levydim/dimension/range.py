"""Range dimension from the resolvent integral int_{|xi|>=1} Re(1/(1+psi)) |xi|^{gamma-d} dxi."""

from __future__ import annotations

import math

import numpy as np

from ..energy.criteria import max_modulus
from ..energy.divergence import classify_cutoffs
from ..energy.fgamma import radial_inverse
from ..energy.gauges import unit_ball_surface
from ..exponents import LevyExponent, resolvent_real, sphere_directions
from .report import DimensionReport, bisect_dimension

PSI_TOP = 1e12


class ResolventIntegral:
    """Resolvent values on a fixed frequency grid, reweighted per exponent gamma.

    Isotropic exponents (and all exponents on the line) use a radial grid; in
    the plane a product grid over (xi_1, xi_2) with box-shaped cutoffs is used,
    so narrow anisotropic ridges are resolved along each axis.  The box and
    the ball exterior differ by a bounded region, which does not change
    finiteness.
    """

    def __init__(self, psi: LevyExponent, psi_top: float = PSI_TOP, per_decade: int = 8, nodes: int = 8,
                 n_dirs: int = 256):
        self.psi = psi
        d = self.d = psi.dim
        gl_x, gl_w = np.polynomial.legendre.leggauss(nodes)
        if psi.is_isotropic or d == 1:
            r_top = max(radial_inverse(lambda r: max_modulus([psi], d, r)[0], psi_top), 1e4)
            self.mode = "radial"
            n = int(math.ceil(math.log10(r_top) * per_decade)) + 1
            self.cutoffs = np.geomspace(1.0, r_top, n)
            edges = np.log(self.cutoffs)
            mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * (edges[1:] - edges[:-1])
            r = np.exp(mid[:, None] + half[:, None] * gl_x[None, :])
            dr = half[:, None] * gl_w[None, :] * r
            if psi.is_isotropic:
                res = resolvent_real(psi.along(np.eye(d)[0], r))
            else:
                res = resolvent_real(psi(r.ravel())).reshape(r.shape)  # even in xi on the line
            self.radius = r
            self.base = unit_ball_surface(d) * res * r ** (d - 1) * dr
            return
        if d == 2:
            self.mode = "box"
            axis_top = [radial_inverse(lambda r, e=e: float(np.abs(psi(np.outer([r], e)))[0]), psi_top)
                        for e in np.eye(2)]
            r_top = max(min(max(axis_top), 1e16), 1e4)
            panels = int(math.ceil(math.log10(r_top) * 4))
            edges = np.concatenate([[0.0], np.geomspace(1.0, r_top, panels + 1)])
            mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * (edges[1:] - edges[:-1])
            x = (mid[:, None] + half[:, None] * gl_x[None, :]).ravel()
            w = (half[:, None] * gl_w[None, :]).ravel()
            pid = np.repeat(np.arange(len(mid)), nodes)
            X1, X2 = np.meshgrid(x, x, indexing="ij")
            W = np.outer(w, w)
            shell = np.maximum.outer(pid, pid)
            res = np.zeros(X1.shape)
            for s1 in (1.0, -1.0):  # xi and -xi give the same value
                pts = np.stack([X1, s1 * X2], axis=-1)
                res += resolvent_real(psi(pts.reshape(-1, 2))).reshape(X1.shape)
            res *= 2.0
            self.cutoffs = edges[1:]
            keep = shell >= 1  # drop the unit box
            self.radius = np.hypot(X1, X2)[keep]
            self.base = (res * W)[keep]
            self.shell = shell[keep] - 1
            return
        self.mode = "directions"
        dirs = sphere_directions(d, n_dirs)
        r_top = max(radial_inverse(lambda r: max_modulus([psi], d, r)[0], psi_top), 1e4)
        n = int(math.ceil(math.log10(r_top) * per_decade)) + 1
        self.cutoffs = np.geomspace(1.0, r_top, n)
        edges = np.log(self.cutoffs)
        mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * (edges[1:] - edges[:-1])
        r = np.exp(mid[:, None] + half[:, None] * gl_x[None, :])
        dr = half[:, None] * gl_w[None, :] * r
        vals = np.zeros(r.shape)
        for u in dirs:
            vals += resolvent_real(psi.along(u, r))
        self.radius = r
        self.base = unit_ball_surface(d) / len(dirs) * vals * r ** (d - 1) * dr

    def cumulative(self, gamma: float) -> np.ndarray:
        w = self.base * self.radius ** (gamma - self.d)
        if self.mode == "box":
            shells = np.bincount(self.shell.ravel(), weights=w.ravel(), minlength=len(self.cutoffs) - 1)
        else:
            shells = w.sum(axis=1)
        return np.concatenate([[0.0], np.cumsum(shells)])

    def verdict(self, gamma: float, s_div: float = 0.02):
        return classify_cutoffs(self.cutoffs, self.cumulative(gamma), s_div, window_decades=2.0, min_span=4.0)

    def grid_info(self) -> dict:
        return {"mode": self.mode, "cutoff_min": float(self.cutoffs[0]), "cutoff_max": float(self.cutoffs[-1]),
                "n_cutoffs": int(len(self.cutoffs)), "nodes": int(np.size(self.base))}


def dim_range(psi: LevyExponent, d: int | None = None, tol: float = 0.01) -> DimensionReport:
    """sup of gamma in (0, d) for which the resolvent integral is finite."""
    if tol < 1e-3:
        raise ValueError("tol must be at least 1e-3")
    d = psi.dim if d is None else d
    if d != psi.dim:
        raise ValueError(f"exponent acts on R^{psi.dim}, not R^{d}")
    integral = ResolventIntegral(psi)
    rep = bisect_dimension(integral.verdict, 0.0, float(d), tol)
    rep.grid = integral.grid_info()
    return rep
