"""The gauge f_gamma(x) = int exp(-|x| psi(xi)) |xi|^{-gamma} dxi."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from ..exponents import LevyExponent, sphere_directions
from .gauges import unit_ball_surface


class DivergenceError(ArithmeticError):
    """An integral that was asked for as a number is infinite."""


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def radial_inverse(fn, target: float, lo: float = 1e-30, hi: float = 1e30) -> float:
    """Solve fn(r) = target for an increasing radial profile, on a log scale."""
    g = lambda u: math.log(max(float(fn(math.exp(u))), 1e-300)) - math.log(target)
    a, b = math.log(lo), math.log(hi)
    if g(a) > 0:
        return lo
    if g(b) < 0:
        return hi
    return math.exp(brentq(g, a, b, xtol=1e-10))


def _radial_integral(profile, scale: float, power: float, panels_per_decade: int = 2) -> float:
    """int_0^inf exp(-scale * profile(r)) r^{power - 1} dr for increasing profile >= 0."""
    r_star = radial_inverse(profile, 1.0 / scale)
    r_lo = r_star * 1e-8
    r_hi = radial_inverse(profile, 60.0 / scale)
    r_hi = max(r_hi, r_star * 10)
    # below r_lo the exponential is 1 to within scale*profile(r_lo)
    inner = r_lo ** power / power * math.exp(-scale * float(profile(r_lo)))
    n_pan = max(4, int(math.ceil(math.log10(r_hi / r_lo) * panels_per_decade)))
    edges = np.linspace(math.log(r_lo), math.log(r_hi), n_pan + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    u = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    r = np.exp(u)
    vals = np.exp(-scale * profile(r) + power * u)
    return inner + float(np.dot(w, vals))


def f_gamma(psi: LevyExponent, gamma: float, x, n_dirs: int = 64) -> np.ndarray:
    """Evaluate f_gamma at |x| for symmetric psi.

    Isotropic exponents use the radial reduction; otherwise the integral is an
    average of radial integrals over directions (trapezoid in angle for d = 2,
    scrambled Sobol directions for d >= 3).
    """
    d = psi.dim
    if not psi.is_symmetric:
        raise ValueError("f_gamma is defined here for symmetric exponents only")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if gamma >= d:
        raise DivergenceError(f"f_gamma diverges at the origin for gamma = {gamma} >= d = {d}")
    x = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    if np.any(x == 0):
        raise DivergenceError("f_gamma is infinite at x = 0")
    power = d - gamma
    if psi.is_isotropic:
        prof = lambda r: psi.radial(r)
        return np.array([unit_ball_surface(d) * _radial_integral(prof, s, power) for s in x])
    if d == 1:
        dirs, wts = np.array([[1.0], [-1.0]]), np.ones(2)
    elif d == 2:
        dirs = sphere_directions(2, n_dirs)
        wts = np.full(len(dirs), 2 * math.pi / len(dirs))
    else:
        dirs = sphere_directions(d, n_dirs)
        wts = np.full(len(dirs), unit_ball_surface(d) / len(dirs))
    out = np.zeros(x.size)
    for u, w in zip(dirs, wts):
        prof = lambda r, u=u: np.real(psi.along(u, r))
        out += w * np.array([_radial_integral(prof, s, power) for s in x])
    return out


def f_gamma_stable(alpha: float, beta: float, x, d: int = 1) -> np.ndarray:
    """Closed form for psi = |xi|^alpha: (v_d / alpha) Gamma(beta/alpha) |x|^{-beta/alpha}."""
    x = np.abs(np.asarray(x, dtype=float))
    return unit_ball_surface(d) / alpha * math.gamma(beta / alpha) * x ** (-beta / alpha)
