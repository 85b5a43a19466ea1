"""Kernel energies, capacities by minimisation over the simplex, Fourier energies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz
from scipy.special import gamma as gamma_fn
from scipy.special import zeta

from ..sets import DiscreteMeasure, SetSpec, natural_measure
from .gauges import Gauge, Riesz, cell_self_average, riesz_cell_pair, subsample_average


# ---------------------------------------------------------------------------
# kernel matrices and energies


def _translation_row(mu: DiscreteMeasure, g: Gauge):
    """First row of the Toeplitz kernel for a 1-d lattice measure, or None."""
    if mu.ambient != 1 or mu.sides[0] == 0:
        return None
    lat = mu.lattice()
    if lat is None:
        return None
    _, idx = lat
    length = int(idx.max()) + 1
    h = float(mu.sides[0])
    D = np.arange(length) * h
    if isinstance(g, Riesz):
        row = riesz_cell_pair(D, h, g.beta)
    else:
        row = g.eval_points(D[:, None]).astype(float)
        near = np.arange(length) <= 2
        near[0] = False
        if near.any():
            row[near] = subsample_average(g, D[near][:, None], mu.sides)
        row[0] = cell_self_average(g, mu.sides)
    return idx[:, 0], row


def kernel_matrix(mu: DiscreteMeasure, g: Gauge) -> np.ndarray:
    """K_ij = mean of g(x - y) over the cells of atoms i and j."""
    tr = _translation_row(mu, g)
    if tr is not None:
        idx, row = tr
        return row[np.abs(idx[:, None] - idx[None, :])]
    n = mu.size
    if n > 8192:
        raise MemoryError("kernel matrix above 8192 atoms; use a lattice measure")
    diff = mu.atoms[:, None, :] - mu.atoms[None, :, :]
    flat = diff.reshape(-1, mu.ambient)
    with np.errstate(divide="ignore"):
        K = g.eval_points(flat).reshape(n, n).astype(float)
    sides = mu.sides
    if np.any(sides > 0):
        scaled = np.abs(diff) / np.where(sides > 0, sides, 1.0)
        near = np.all(scaled <= 2.0 + 1e-9, axis=-1) & ~np.eye(n, dtype=bool)
        if isinstance(g, Riesz) and mu.ambient == 1:
            K = riesz_cell_pair(diff[..., 0], float(sides[0]), g.beta)
        elif near.any():
            i, j = np.nonzero(near)
            keys, inv = np.unique(np.round(diff[i, j], 12), axis=0, return_inverse=True)
            K[i, j] = subsample_average(g, keys, sides)[inv.ravel()]
    np.fill_diagonal(K, cell_self_average(g, sides))
    return K


def offdiagonal_energy(mu: DiscreteMeasure, g: Gauge) -> float:
    """sum_{i != j} w_i w_j g(x_i - x_j) with point evaluation."""
    diff = (mu.atoms[:, None, :] - mu.atoms[None, :, :]).reshape(-1, mu.ambient)
    with np.errstate(divide="ignore"):
        K = g.eval_points(diff).reshape(mu.size, mu.size)
    np.fill_diagonal(K, 0.0)
    return float(mu.weights @ K @ mu.weights)


def kernel_energy(mu: DiscreteMeasure, g: Gauge) -> float:
    """E_g(mu) with atoms read as uniform cells; ``inf`` when a self-average diverges."""
    mu.check_normalised(1e-9)
    w = mu.weights
    tr = _translation_row(mu, g)
    if tr is not None:
        idx, row = tr
        if not np.isfinite(row[0]) and np.any(w > 0):
            return math.inf
        dense = np.zeros(row.size)
        np.add.at(dense, idx, w)
        n = 1 << int(np.ceil(np.log2(2 * row.size)))
        f = np.fft.rfft(dense, n)
        ac = np.fft.irfft(f * np.conj(f), n)[: row.size]
        return float(ac[0] * row[0] + 2 * np.dot(ac[1:], row[1:]))
    if np.all(mu.sides == 0) and np.any(w > 0):
        return math.inf
    K = kernel_matrix(mu, g)
    if np.any(~np.isfinite(np.diag(K))[w > 0]):
        return math.inf
    K = np.where(np.isfinite(K), K, 0.0)
    return float(w @ K @ w)


# ---------------------------------------------------------------------------
# minimisation over the probability simplex


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum w = 1} (sort-based)."""
    n = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, n + 1)
    cond = u - css / k > 0
    rho = k[cond][-1]
    theta = css[cond][-1] / rho
    return np.maximum(v - theta, 0.0)


@dataclass
class QPResult:
    weights: np.ndarray
    energy: float
    converged: bool
    iterations: int
    gap: float
    history: list = field(default_factory=list)


def minimize_quadratic(K, w0=None, budget: int = 10_000, rtol: float = 1e-7) -> QPResult:
    """Minimise w^T K w over the simplex by accelerated projected gradient.

    ``K`` is a matrix or a callable returning K @ w.  Stops when the
    Frank-Wolfe gap 2 (w^T K w - min_i (K w)_i) falls below ``rtol`` times
    the energy.  Step sizes come from backtracking on the Lipschitz constant.
    """
    matvec = K if callable(K) else (lambda w: K @ w)
    n = K.shape[0] if not callable(K) else len(w0)
    w = np.full(n, 1.0 / n) if w0 is None else project_simplex(np.asarray(w0, dtype=float))
    y, t = w.copy(), 1.0
    Kw = matvec(w)
    energy = float(w @ Kw)
    L = max(float(np.max(np.abs(Kw))) * 2.0, 1e-12)
    history = [energy]
    gap = math.inf
    for it in range(1, budget + 1):
        Ky = matvec(y)
        fy = float(y @ Ky)
        grad = 2 * Ky
        while True:
            cand = project_simplex(y - grad / L)
            Kc = matvec(cand)
            fc = float(cand @ Kc)
            step = cand - y
            if fc <= fy + grad @ step + 0.5 * L * (step @ step) + 1e-15 * abs(fy):
                break
            L *= 2.0
        if fc > energy:  # restart momentum on non-monotone steps
            t = 1.0
            y = w.copy()
            continue
        t_new = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        y = cand + ((t - 1) / t_new) * (cand - w)
        w, Kw, energy, t = cand, Kc, fc, t_new
        L *= 0.9
        gap = 2 * (energy - float(np.min(Kw)))
        if it % 50 == 0:
            history.append(energy)
        if gap <= rtol * energy:
            return QPResult(w, energy, True, it, gap, history)
    return QPResult(w, energy, False, budget, gap, history)


# ---------------------------------------------------------------------------
# capacities


@dataclass
class CapacityResult:
    value: float
    measure: DiscreteMeasure | None
    energy: float
    converged: bool
    iterations: int
    gap: float
    flags: list = field(default_factory=list)

    @property
    def inconclusive(self) -> bool:
        return not self.converged

    def to_dict(self) -> dict:
        return {"capacity": self.value, "energy": self.energy, "converged": self.converged,
                "iterations": self.iterations, "gap": self.gap, "flags": list(self.flags)}


def capacity_of_measure_class(mu: DiscreteMeasure, g: Gauge, budget: int = 10_000,
                              rtol: float = 1e-7) -> CapacityResult:
    """1 / min energy over reweightings of the atoms of ``mu``."""
    if mu.size == 1 or np.all(mu.sides == 0):
        return CapacityResult(0.0, mu, math.inf, True, 0, 0.0, ["point masses only: infinite energy"])
    K = kernel_matrix(mu, g)
    diag = np.diag(K)
    ok = np.isfinite(diag)
    if not ok.any():
        return CapacityResult(0.0, mu, math.inf, True, 0, 0.0, ["every cell has infinite self-energy"])
    sub = K[np.ix_(ok, ok)]
    res = minimize_quadratic(sub, budget=budget, rtol=rtol)
    w = np.zeros(mu.size)
    w[ok] = res.weights
    flags = [] if res.converged else ["optimizer budget exhausted; best iterate reported"]
    return CapacityResult(1.0 / res.energy, mu.with_weights(w), res.energy, res.converged, res.iterations,
                          res.gap, flags)


def capacity(s: SetSpec, g: Gauge, level: int = 8, budget: int = 10_000, rtol: float = 1e-7) -> CapacityResult:
    """Capacity lower bound of ``s`` for gauge ``g`` from level-``level`` cell measures."""
    return capacity_of_measure_class(natural_measure(s, level), g, budget, rtol)


def capacity_trend(s: SetSpec, g: Gauge, levels=(4, 5, 6, 7), budget: int = 10_000):
    """Capacities across levels and the slope of log C against log(cell size)."""
    caps, cells = [], []
    for L in levels:
        res = capacity(s, g, L, budget)
        caps.append(res.value)
        cells.append(natural_measure(s, L).cell)
    caps = np.array(caps)
    slope = float(np.polyfit(np.log(cells), np.log(caps), 1)[0]) if np.all(caps > 0) else math.inf
    return caps, slope


# ---------------------------------------------------------------------------
# Fourier-side energies


def riesz_fourier_constant(d: int, beta: float) -> float:
    """Closed form c with |x|^-beta = c int e^{i x.xi} |xi|^{beta-d} dxi."""
    return gamma_fn((d - beta) / 2) / (math.pi ** (d / 2) * 2 ** beta * gamma_fn(beta / 2))


def _fourier_integral_1d(mu: DiscreteMeasure, beta: float, nodes_per_period: int = 24) -> float:
    """int_R |mu^(xi)|^2 |xi|^{beta-1} dxi for a lattice cell measure in one dimension.

    |mu^|^2 = G(xi) (2 / (h xi))^2 ... with G periodic of period P = 2 pi / h;
    the sum over periods is a Hurwitz zeta function.
    """
    h = float(mu.sides[0])
    if h == 0:
        return math.inf
    lat = mu.lattice()
    if lat is None:
        raise ValueError("Fourier energy needs atoms on a lattice of spacing equal to the cell")
    _, idx = lat
    P = 2 * math.pi / h
    length = int(idx.max()) + 1
    # G(u) = |sum_i w_i e^{i u k_i h}|^2 * 4 sin^2(u h / 2) / h^2 is P-periodic;
    # the integrand is G(xi) xi^{beta - 3}; summing over periods gives
    # int_0^P G(u) P^{beta-3} zeta(3 - beta, u / P) du
    n_pan = max(8, 4 * length)
    x, w = np.polynomial.legendre.leggauss(nodes_per_period)
    # the first panel has an integrable u^{beta-1} singularity: substitute u = a t^{1/beta}
    edges = np.linspace(0.0, P, n_pan + 1)
    total = 0.0
    def G(u):
        S = np.exp(1j * np.outer(u, idx[:, 0] * h)) @ mu.weights
        return np.abs(S) ** 2 * 4 * np.sin(u * h / 2) ** 2 / h ** 2
    a = edges[1]
    t = 0.5 * (x + 1)
    u = a * t ** (1 / beta)
    jac = a / beta * t ** (1 / beta - 1) * 0.5
    vals = G(u) * P ** (beta - 3) * zeta(3 - beta, u / P)
    total += float(np.sum(w * jac * vals))
    mid = 0.5 * (edges[2:] + edges[1:-1])
    half = 0.5 * (edges[2:] - edges[1:-1])
    uu = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ww = (half[:, None] * w[None, :]).ravel()
    vals = G(uu) * P ** (beta - 3) * zeta(3 - beta, uu / P)
    total += float(np.dot(ww, vals))
    return 2 * total


@lru_cache(maxsize=64)
def calibrate_fourier_constant(d: int, beta: float, level: int = 8) -> float:
    """c_{d,beta} matching kernel and Fourier energies on the uniform unit measure.

    A second reference (the uniform measure on [0, 1/2] at a different level)
    must agree within 5 %, otherwise the calibration is rejected.
    """
    from ..sets import Interval

    if d != 1:
        raise NotImplementedError("Fourier energies are implemented on the line")
    ref = natural_measure(Interval(0.0, 1.0), level)
    c = kernel_energy(ref, Riesz(beta)) / _fourier_integral_1d(ref, beta)
    ref2 = natural_measure(Interval(0.0, 0.5), level - 2)
    resid = abs(c * _fourier_integral_1d(ref2, beta) / kernel_energy(ref2, Riesz(beta)) - 1)
    if resid > 0.05:
        raise ArithmeticError(f"Fourier calibration residual {resid:.3g} exceeds 5%")
    return c


def fourier_energy(mu: DiscreteMeasure, beta: float) -> float:
    """c_{d,beta} int |mu^(xi)|^2 |xi|^{beta-d} dxi, calibrated against kernel energies."""
    d = mu.ambient
    if not 0 < beta < d:
        raise ValueError(f"beta must lie in (0, {d})")
    integral = _fourier_integral_1d(mu, beta)
    if not math.isfinite(integral):
        return math.inf
    return calibrate_fourier_constant(d, float(beta)) * integral
