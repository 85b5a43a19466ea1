"""Gauge functions: kernels whose energies and capacities we compute."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

from ..exponents import LevyExponent


def unit_ball_surface(d: int) -> float:
    """Surface area of the unit sphere in R^d (2 for d = 1)."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


class Gauge:
    """Base class.  ``profile(s)`` is the kernel as a function of ``norm(x)``."""

    kind = "Gauge"
    norm = "l2"  # "l2" or "l1": which norm of x the kernel depends on
    arity: int | None = None  # required dimension of x, None for any

    def profile(self, s):
        raise NotImplementedError

    def __call__(self, x):
        """Evaluate at points.  Scalar-argument gauges take any shape; others
        take arrays with a trailing coordinate axis."""
        x = np.asarray(x, dtype=float)
        if self.arity == 1:
            s = np.abs(x)
        elif self.norm == "l1":
            s = np.abs(x).sum(axis=-1)
        else:
            s = np.linalg.norm(x, axis=-1)
        with np.errstate(divide="ignore"):
            return self.profile(s)

    def eval_points(self, X: np.ndarray) -> np.ndarray:
        """Values at the rows of ``X`` (shape (p, k))."""
        X = np.asarray(X, dtype=float)
        return self(X[:, 0]) if self.arity == 1 else self(X)

    def singularity_order(self) -> float:
        """Exponent s with g(x) ~ |x|^{-s} at 0, estimated from the profile when not exact."""
        s = np.array([1e-9, 1e-8])
        g = self.profile(s)
        return float(np.log(g[0] / g[1]) / np.log(10.0))

    @property
    def homogeneous(self) -> bool:
        return False

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class Riesz(Gauge):
    """|x|^{-beta}."""

    beta: float
    kind = "Riesz"

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(s > 0, s ** -self.beta, np.inf)

    def singularity_order(self):
        return self.beta

    @property
    def homogeneous(self):
        return True

    def to_dict(self):
        return {"kind": self.kind, "beta": self.beta}


class _TabulatedProfile(Gauge):
    """Profile tabulated on a geometric grid, log-log interpolated, power-law tails."""

    s_min = 1e-14
    s_max = 1e4
    per_decade = 24

    def exact_profile(self, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @cached_property
    def _table(self):
        s = np.geomspace(self.s_min, self.s_max, int(np.log10(self.s_max / self.s_min) * self.per_decade) + 1)
        g = self.exact_profile(s)
        if np.any(~np.isfinite(g)) or np.any(g <= 0):
            bad = s[~(np.isfinite(g) & (g > 0))]
            raise FloatingPointError(f"{self.kind}: profile not positive finite at s = {bad[:3]}")
        return np.log(s), np.log(g)

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        ls, lg = self._table
        with np.errstate(divide="ignore"):
            x = np.log(np.where(s > 0, s, 1e-300))
        out = np.interp(x, ls, lg)
        lo = x < ls[0]
        if np.any(lo):
            slope = (lg[1] - lg[0]) / (ls[1] - ls[0])
            out[lo] = lg[0] + slope * (x[lo] - ls[0])
        hi = x > ls[-1]
        if np.any(hi):
            slope = (lg[-1] - lg[-2]) / (ls[-1] - ls[-2])
            out[hi] = lg[-1] + slope * (x[hi] - ls[-1])
        with np.errstate(over="ignore"):
            res = np.exp(out)
        return np.where(s > 0, res, np.inf)


@dataclass(frozen=True, eq=False)
class FGamma(_TabulatedProfile):
    """f_gamma(x) = int exp(-|x| psi(xi)) |xi|^{-gamma} dxi for symmetric psi."""

    psi: LevyExponent
    gamma: float
    kind = "FGamma"
    arity = 1

    def exact_profile(self, s):
        from .fgamma import f_gamma

        return f_gamma(self.psi, self.gamma, s)

    def to_dict(self):
        return {"kind": self.kind, "psi": self.psi.to_dict(), "gamma": self.gamma}


@dataclass(frozen=True, eq=False)
class KahanePair(_TabulatedProfile):
    """f(x1, x2) = int exp(-(|x1| + |x2|) psi(xi)) dxi."""

    psi: LevyExponent
    kind = "KahanePair"
    norm = "l1"
    arity = 2

    def exact_profile(self, s):
        from ..intersections import heat_mass

        return heat_mass(self.psi, s)

    def singularity_order(self):
        if self.psi.is_isotropic and self.psi.index is not None and self.psi.family == "IsotropicStable":
            return self.psi.dim / self.psi.index
        return super().singularity_order()

    def to_dict(self):
        return {"kind": self.kind, "psi": self.psi.to_dict()}


@dataclass(frozen=True, eq=False)
class KFold(Gauge):
    """The k-fold intersection gauge, evaluated pointwise (no tabulation)."""

    psi: LevyExponent
    k: int = 2
    kind = "KFold"

    @property
    def arity(self):
        return self.k

    def __call__(self, x):
        from ..intersections import kfold_gauge

        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.array([kfold_gauge(self.psi, self.k, row) for row in x])

    def profile(self, s):
        # along the diagonal direction, used only for singularity estimates
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return self(np.repeat(s[:, None] / self.k, self.k, axis=1))

    def singularity_order(self):
        idx = self.psi.index
        if idx is not None and self.psi.is_isotropic:
            return self.psi.dim * (self.k - 1) / idx
        return super().singularity_order()

    def to_dict(self):
        return {"kind": self.kind, "psi": self.psi.to_dict(), "k": self.k}


@dataclass(frozen=True, eq=False)
class Tabulated(_TabulatedProfile):
    """User-supplied radial profile on a grid (log-log interpolation)."""

    s: tuple = ()
    values: tuple = ()
    kind = "Tabulated"

    def __post_init__(self):
        if len(self.s) < 2 or len(self.s) != len(self.values):
            raise ValueError("need matching grids of length >= 2")

    @cached_property
    def _table(self):
        return np.log(np.asarray(self.s, dtype=float)), np.log(np.asarray(self.values, dtype=float))

    def to_dict(self):
        return {"kind": self.kind, "s": list(self.s), "values": list(self.values)}


@dataclass(frozen=True, eq=False)
class GKappa(_TabulatedProfile):
    """|x|^{-beta/alpha} [kappa^#(|x|^{-1/alpha})]^beta, or the fast form with kappa(1/|x|)^{-beta}."""

    alpha: float
    beta: float
    kappa: object
    fast: bool = False
    kind = "GKappa"
    arity = 1
    s_min = 1e-12
    s_max = 1e2
    per_decade = 12

    def exact_profile(self, s):
        from ..dimension.regvar import de_bruijn_conjugate

        s = np.asarray(s, dtype=float)
        base = s ** (-self.beta / self.alpha)
        if self.fast:
            return base * self.kappa(1.0 / s) ** (-self.beta)
        conj = np.array([de_bruijn_conjugate(self.kappa, u).value for u in s ** (-1.0 / self.alpha)])
        return base * conj ** self.beta

    def to_dict(self):
        return {"kind": self.kind, "alpha": self.alpha, "beta": self.beta, "kappa": self.kappa.to_dict(),
                "fast": self.fast}


# ---------------------------------------------------------------------------
# cell averages


def _riesz_second_antiderivative(x, beta):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if beta == 1.0:
            return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)
        if beta == 2.0:
            return -np.log(x)
        return np.where(x > 0, x ** (2 - beta), 0.0 if beta < 2 else np.inf) / ((1 - beta) * (2 - beta))


def riesz_cell_pair(D, h: float, beta: float):
    """Mean of |x|^{-beta} over x = D + U - V, U, V uniform on [0, h], for D = 0 or D >= h."""
    D = np.abs(np.asarray(D, dtype=float))
    F = _riesz_second_antiderivative
    with np.errstate(divide="ignore", invalid="ignore"):
        far = D ** -beta
        near = (F(D + h, beta) - 2 * F(D, beta) + F(np.abs(D - h), beta)) / h ** 2
    if beta >= 1:
        near = np.where(D == 0, np.inf, near)
    if beta >= 2:
        near = np.where(D <= h * (1 + 1e-12), np.inf, near)
    return np.where(D < 50 * h, near, far)


def cell_self_average(g: Gauge, sides) -> float:
    """E g(U - V) for U, V independent and uniform on a box with the given sides.

    Zero sides are point factors.  Returns inf when the singularity of g at
    the origin is not integrable over the nonzero sides.
    """
    sides = np.asarray(sides, dtype=float)
    nz = sides[sides > 0]
    m = nz.size
    if m == 0:
        return math.inf
    order = g.singularity_order()
    if order >= m - 1e-12:
        return math.inf
    if isinstance(g, Riesz) and m == 1:
        return float(2 * nz[0] ** -g.beta / ((1 - g.beta) * (2 - g.beta)))
    idx = np.flatnonzero(sides > 0)

    def point(y):
        x = np.zeros((1, sides.size))
        x[0, idx] = y
        return float(g.eval_points(x)[0])

    if m == 1:
        h = nz[0]
        val, _ = integrate.quad(lambda u: 2 * (1 - u) * point(np.array([u * h])), 0, 1, limit=200)
        return float(val)
    if m == 2:
        h1, h2 = nz
        corner = math.atan2(h2, h1)

        def radial(theta):
            c, s_ = math.cos(theta), math.sin(theta)
            rmax = min(h1 / c if c > 1e-15 else math.inf, h2 / s_ if s_ > 1e-15 else math.inf)
            f = lambda r: r * (1 - r * c / h1) * (1 - r * s_ / h2) * point(np.array([r * c, r * s_]))
            return integrate.quad(f, 0, rmax, limit=200)[0]

        val = integrate.quad(radial, 0, corner, limit=100)[0] + integrate.quad(radial, corner, math.pi / 2, limit=100)[0]
        return float(4 * val / (h1 * h2))
    raise NotImplementedError("cell self-averages are implemented for up to two nonzero sides")


def subsample_average(g: Gauge, D, sides, n_sub: int = 16) -> np.ndarray:
    """Average of g over subcell centres of two cells at offsets ``D`` (shape (p, k))."""
    D = np.atleast_2d(np.asarray(D, dtype=float))
    sides = np.asarray(sides, dtype=float)
    k = sides.size
    per_axis = n_sub if k == 1 else max(2, int(round(n_sub ** (1 / k))))
    grids = [((np.arange(per_axis) + 0.5) / per_axis - 0.5) * h for h in sides]
    sub = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, k)
    diff = (sub[:, None, :] - sub[None, :, :]).reshape(-1, k)
    pts = D[:, None, :] + diff[None, :, :]
    vals = g.eval_points(pts.reshape(-1, k)).reshape(pts.shape[:2])
    return vals.mean(axis=1)


def gauge_from_dict(d, where: str = "gauge") -> Gauge:
    """Build a gauge from ``{"kind": ..., ...}`` as written by ``to_dict``."""
    from ..exponents import DescriptorError, SlowlyVaryingFn, exponent_from_dict

    if not isinstance(d, dict):
        raise DescriptorError(where, "descriptor must be a JSON object")
    kind = d.get("kind")
    try:
        if kind == "Riesz":
            return Riesz(float(d["beta"]))
        if kind == "FGamma":
            return FGamma(exponent_from_dict(d["psi"], f"{where}.psi"), float(d["gamma"]))
        if kind == "KahanePair":
            return KahanePair(exponent_from_dict(d["psi"], f"{where}.psi"))
        if kind == "KFold":
            return KFold(exponent_from_dict(d["psi"], f"{where}.psi"), int(d.get("k", 2)))
        if kind == "Tabulated":
            return Tabulated(tuple(d["s"]), tuple(d["values"]))
        if kind == "GKappa":
            kappa = SlowlyVaryingFn.from_dict(d.get("kappa", {"kind": "Constant"}), f"{where}.kappa")
            return GKappa(float(d["alpha"]), float(d["beta"]), kappa, bool(d.get("fast", False)))
    except KeyError as exc:
        raise DescriptorError(f"{where}.{exc.args[0]}", "missing") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DescriptorError):
            raise
        raise DescriptorError(where, str(exc)) from exc
    raise DescriptorError(f"{where}.kind", f"unknown kind {kind!r}")
