"""Slowly varying corrections: epsilon_n, the de Bruijn conjugate and the g_kappa gauge."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from ..energy.gauges import GKappa
from ..exponents import SlowlyVaryingFn


class BracketError(ValueError):
    pass


class ConvergenceWarning(RuntimeWarning):
    pass


def _scalar(kappa, x: float) -> float:
    return float(np.asarray(kappa(np.asarray([x], dtype=float)))[0])


def epsilon_n(alpha: float, kappa: SlowlyVaryingFn, n: float, max_doublings: int = 200) -> float:
    """Root of eps**alpha * kappa(n eps) = 1, bracketed by doubling outwards from 1."""
    if not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")
    if n < 1:
        raise ValueError("n must be at least 1")

    def f(e):
        k = _scalar(kappa, n * e)
        if not 0 < k < math.inf:
            raise BracketError(f"kappa({n * e:.3g}) = {k:.3g} is not a positive finite value")
        return alpha * math.log(e) + math.log(k)

    lo = hi = 1.0
    flo = fhi = f(1.0)
    if flo == 0:
        return 1.0
    for _ in range(max_doublings):
        if flo < 0 < fhi:
            break
        if flo >= 0:
            lo /= 2
            flo = f(lo)
        if fhi <= 0:
            hi *= 2
            fhi = f(hi)
    else:
        raise BracketError("no sign change for eps**alpha kappa(n eps) - 1; kappa is not admissible")
    return float(optimize.brentq(f, lo, hi, xtol=1e-14, rtol=1e-13))


def epsilon_sequence(alpha: float, kappa: SlowlyVaryingFn, ns) -> np.ndarray:
    """epsilon_n on several n; warns unless n * epsilon_n increases along them."""
    ns = np.asarray(sorted(ns), dtype=float)
    eps = np.array([epsilon_n(alpha, kappa, n) for n in ns])
    if np.any(np.diff(ns * eps) <= 0):
        warnings.warn("n * epsilon_n is not increasing on the sampled n", ConvergenceWarning, stacklevel=2)
    return eps


@dataclass
class ConjugateResult:
    value: float
    converged: bool
    iterations: int
    residual: float


def de_bruijn_conjugate(kappa: SlowlyVaryingFn, x: float, rtol: float = 1e-10,
                        max_iter: int = 100) -> ConjugateResult:
    """Fixed point y = 1 / kappa(x y), iterated from y = 1 / kappa(x).

    Meant for large x; a non-convergent run returns the last iterate with a warning.
    """
    if x <= 0:
        raise ValueError("x must be positive")
    y = 1.0 / _scalar(kappa, x)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        y_new = 1.0 / _scalar(kappa, x * y)
        change = abs(y_new - y) / abs(y)
        y = y_new
        if change < rtol:
            converged = True
            break
    residual = abs(y * _scalar(kappa, x * y) - 1.0)
    if not converged:
        warnings.warn(f"de Bruijn iteration did not converge at x = {x:.3g}", ConvergenceWarning, stacklevel=2)
    return ConjugateResult(float(y), converged, it, float(residual))


def g_kappa_gauge(alpha: float, beta: float, kappa: SlowlyVaryingFn, fast: bool = False) -> GKappa:
    """|x|^{-beta/alpha} [kappa^#(|x|^{-1/alpha})]^beta, or |x|^{-beta/alpha} kappa(1/|x|)^{-beta} if fast."""
    if not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")
    if beta <= 0:
        raise ValueError("beta must be positive")
    return GKappa(alpha, beta, kappa, fast)


def scaled_integral(alpha: float, beta: float, kappa: SlowlyVaryingFn, n: float) -> float:
    """int_0^inf exp(-r^alpha kappa(n r)) r^{beta-1} dr, comparable to epsilon_n^beta."""
    eps = epsilon_n(alpha, kappa, n)

    def integrand(u):  # r = eps * e^u
        r = eps * math.exp(u)
        return math.exp(-(r ** alpha) * _scalar(kappa, n * r)) * r ** beta

    # the integrand decays like exp(beta u) to the left and super-exponentially to the right
    left = math.log(1e-300) / beta / 2
    parts = [(left, -5.0), (-5.0, 0.0), (0.0, 3.0), (3.0, 10.0)]
    return float(sum(integrate.quad(integrand, a, b, limit=200)[0] for a, b in parts))
