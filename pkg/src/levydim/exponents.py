"""Lévy exponents: catalog, evaluation and asymptotic diagnostics.

Every exponent is an immutable object ``psi`` with ``psi(xi)`` returning the
complex value of the characteristic exponent, normalised so that
``E exp(i xi.X(t)) = exp(-t psi(xi))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy.stats import qmc


class DescriptorError(ValueError):
    """Invalid JSON descriptor; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


# ---------------------------------------------------------------------------
# slowly varying functions


@dataclass(frozen=True)
class SlowlyVaryingFn:
    """A positive continuous function slowly varying at infinity.

    Kinds: ``Constant(c)``, ``LogPower(gamma)`` = log(e + x)**gamma,
    ``LogLogPower(gamma)`` = log(e + log(1 + x))**gamma, ``Tabulated`` (log-log
    interpolation, constant beyond the table) and ``Callable`` for ad hoc
    functions that are not serialisable.
    """

    kind: str = "Constant"
    params: Mapping[str, Any] = field(default_factory=dict)
    fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    @classmethod
    def constant(cls, c: float = 1.0) -> "SlowlyVaryingFn":
        if c <= 0:
            raise ValueError("constant must be positive")
        return cls("Constant", {"c": float(c)})

    @classmethod
    def log_power(cls, gamma: float = 1.0) -> "SlowlyVaryingFn":
        return cls("LogPower", {"gamma": float(gamma)})

    @classmethod
    def loglog_power(cls, gamma: float = 1.0) -> "SlowlyVaryingFn":
        return cls("LogLogPower", {"gamma": float(gamma)})

    @classmethod
    def tabulated(cls, x: Sequence[float], y: Sequence[float]) -> "SlowlyVaryingFn":
        x = [float(v) for v in x]
        y = [float(v) for v in y]
        if len(x) != len(y) or len(x) < 2:
            raise ValueError("tabulated kappa needs matching x, y of length >= 2")
        if any(b <= a for a, b in zip(x, x[1:])) or min(x) <= 0 or min(y) <= 0:
            raise ValueError("tabulated kappa needs increasing positive x and positive y")
        return cls("Tabulated", {"x": tuple(x), "y": tuple(y)})

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray], name: str = "callable"):
        return cls("Callable", {"name": name}, fn)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        kind = self.kind
        if kind == "Constant":
            return np.full_like(x, self.params["c"])
        if kind == "LogPower":
            return np.log(np.e + x) ** self.params["gamma"]
        if kind == "LogLogPower":
            return np.log(np.e + np.log1p(x)) ** self.params["gamma"]
        if kind == "Tabulated":
            lx = np.log(np.asarray(self.params["x"]))
            ly = np.log(np.asarray(self.params["y"]))
            return np.exp(np.interp(np.log(np.maximum(x, 1e-300)), lx, ly))
        if kind == "Callable":
            return np.asarray(self.fn(x), dtype=float)
        raise DescriptorError("kappa.kind", f"unknown kind {kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "Callable":
            raise ValueError("callable kappa has no JSON form")
        out = {"kind": self.kind}
        out.update({k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()})
        return out

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], where: str = "kappa") -> "SlowlyVaryingFn":
        kind = d.get("kind")
        try:
            if kind == "Constant":
                return cls.constant(d.get("c", 1.0))
            if kind == "LogPower":
                return cls.log_power(d.get("gamma", 1.0))
            if kind == "LogLogPower":
                return cls.loglog_power(d.get("gamma", 1.0))
            if kind == "Tabulated":
                return cls.tabulated(d["x"], d["y"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DescriptorError(where, str(exc)) from exc
        raise DescriptorError(f"{where}.kind", f"unknown kind {kind!r}")


def check_slow_variation(kappa: SlowlyVaryingFn, lambdas=(2.0, 10.0), x_max=1e12, tol=0.05):
    """Return the worst |kappa(l x)/kappa(x) - 1| over the top decade below ``x_max``.

    A value below ``tol`` is taken as numerical evidence of slow variation.
    """
    x = np.geomspace(x_max / 10, x_max, 50)
    base = kappa(x)
    worst = max(float(np.max(np.abs(kappa(lam * x) / base - 1.0))) for lam in lambdas)
    return worst, worst < tol


# ---------------------------------------------------------------------------
# exponents


def _points(xi, dim: int) -> np.ndarray:
    """Coerce ``xi`` to an array of shape (..., dim)."""
    arr = np.asarray(xi, dtype=float)
    if dim == 1:
        if arr.ndim >= 1 and arr.shape[-1] == 1 and arr.ndim >= 2:
            return arr
        return arr[..., None]
    if arr.shape[-1:] != (dim,):
        raise ValueError(f"expected points with trailing dimension {dim}, got shape {arr.shape}")
    return arr


def complex_power(z, a: float):
    """Principal branch z**a; z with Re z >= 0 never crosses the cut."""
    z = np.asarray(z, dtype=complex)
    mod = np.abs(z)
    out = np.zeros_like(z)
    nz = mod > 0
    out[nz] = mod[nz] ** a * np.exp(1j * a * np.angle(z[nz]))
    return out


def resolvent_real(value):
    """Re{1/(1 + value)} for exponent values."""
    return np.real(1.0 / (1.0 + np.asarray(value, dtype=complex)))


class LevyExponent:
    """Base class; subclasses are frozen dataclasses."""

    dim: int
    family: str = ""

    def __call__(self, xi) -> np.ndarray:
        return self.evaluate(_points(xi, self.dim))

    def evaluate(self, pts: np.ndarray) -> np.ndarray:  # pts shape (..., dim)
        raise NotImplementedError

    @property
    def is_symmetric(self) -> bool:
        return False

    @property
    def is_isotropic(self) -> bool:
        return False

    @property
    def index(self) -> float | None:
        """Stability / regular-variation index when the family has one."""
        return None

    def radial(self, r) -> np.ndarray:
        """Value along any ray; only meaningful for isotropic exponents."""
        if not self.is_isotropic:
            raise ValueError(f"{self.family} is not isotropic")
        r = np.asarray(r, dtype=float)
        pts = np.zeros(r.shape + (self.dim,))
        pts[..., 0] = r
        return np.real(self.evaluate(pts))

    def along(self, direction, r) -> np.ndarray:
        """Values at r * direction for a unit vector (or array of unit vectors)."""
        direction = np.asarray(direction, dtype=float)
        r = np.asarray(r, dtype=float)
        pts = r[..., None] * direction
        return self.evaluate(pts)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class IsotropicStable(LevyExponent):
    """psi(xi) = (scale*|xi|)**alpha."""

    alpha: float
    dim: int = 1
    scale: float = 1.0
    family = "IsotropicStable"

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            raise DescriptorError("params.alpha", "alpha must lie in (0, 2]")
        if self.scale <= 0:
            raise DescriptorError("params.scale", "scale must be positive")
        if self.dim < 1:
            raise DescriptorError("dim", "dim must be >= 1")

    def evaluate(self, pts):
        r = np.linalg.norm(pts, axis=-1)
        return ((self.scale * r) ** self.alpha).astype(complex)

    @property
    def is_symmetric(self):
        return True

    @property
    def is_isotropic(self):
        return True

    @property
    def index(self):
        return self.alpha

    def to_dict(self):
        return {"family": self.family, "params": {"alpha": self.alpha, "scale": self.scale}, "dim": self.dim}


@dataclass(frozen=True)
class SymmetricRegVarying(LevyExponent):
    """psi(xi) = |xi|**alpha * kappa(|xi|), kappa slowly varying."""

    alpha: float
    kappa: SlowlyVaryingFn = field(default_factory=SlowlyVaryingFn.constant)
    dim: int = 1
    family = "SymmetricRegVarying"

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            raise DescriptorError("params.alpha", "alpha must lie in (0, 2]")

    def evaluate(self, pts):
        r = np.linalg.norm(pts, axis=-1)
        out = np.zeros(r.shape)
        nz = r > 0
        out[nz] = r[nz] ** self.alpha * self.kappa(r[nz])
        return out.astype(complex)

    @property
    def is_symmetric(self):
        return True

    @property
    def is_isotropic(self):
        return True

    @property
    def index(self):
        return self.alpha

    def to_dict(self):
        return {
            "family": self.family,
            "params": {"alpha": self.alpha, "kappa": self.kappa.to_dict()},
            "dim": self.dim,
        }


@dataclass(frozen=True)
class StableComponents(LevyExponent):
    """psi(xi) = sum_j |xi_j|**alpha_j over coordinate blocks xi_j of size d_j."""

    components: tuple  # ((alpha_1, d_1), ...)
    family = "StableComponents"

    def __post_init__(self):
        comps = tuple((float(a), int(k)) for a, k in self.components)
        if not comps:
            raise DescriptorError("params.components", "need at least one component")
        for a, k in comps:
            if not 0 < a <= 2 or k < 1:
                raise DescriptorError("params.components", f"bad component ({a}, {k})")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self):
        return sum(k for _, k in self.components)

    def evaluate(self, pts):
        out = np.zeros(pts.shape[:-1])
        start = 0
        for a, k in self.components:
            block = np.linalg.norm(pts[..., start:start + k], axis=-1)
            out = out + block ** a
            start += k
        return out.astype(complex)

    @property
    def is_symmetric(self):
        return True

    @property
    def is_isotropic(self):
        # sum_j |xi_j|^a is radial only for one block or a = 2
        return len(self.components) == 1 or all(a == 2.0 for a, _ in self.components)

    @property
    def index(self):
        alphas = {a for a, _ in self.components}
        return alphas.pop() if len(alphas) == 1 else None

    def to_dict(self):
        return {
            "family": self.family,
            "params": {"components": [list(c) for c in self.components]},
            "dim": self.dim,
        }


@dataclass(frozen=True)
class SkewedStable1D(LevyExponent):
    """Strictly stable exponent on the line with skewness ``skew``.

    alpha != 1: (s|xi|)**alpha * (1 - i*skew*sgn(xi)*tan(pi*alpha/2)).
    alpha == 1: s|xi| * (1 + i*skew*(2/pi)*sgn(xi)*log(s|xi|)), the drifting
    Cauchy form whose imaginary part outgrows the real part logarithmically.
    """

    alpha: float
    skew: float = 0.0
    scale: float = 1.0
    family = "SkewedStable1D"
    dim = 1

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            raise DescriptorError("params.alpha", "alpha must lie in (0, 2]")
        if not -1 <= self.skew <= 1:
            raise DescriptorError("params.skew", "skew must lie in [-1, 1]")

    def evaluate(self, pts):
        x = pts[..., 0]
        u = self.scale * np.abs(x)
        sgn = np.sign(x)
        if self.alpha == 1.0:
            logu = np.log(np.where(u > 0, u, 1.0))
            return u * (1 + 1j * self.skew * (2 / np.pi) * sgn * logu)
        return u ** self.alpha * (1 - 1j * self.skew * sgn * math.tan(np.pi * self.alpha / 2))

    @property
    def is_symmetric(self):
        return self.skew == 0.0

    @property
    def index(self):
        return self.alpha

    def to_dict(self):
        return {
            "family": self.family,
            "params": {"alpha": self.alpha, "skew": self.skew, "scale": self.scale},
            "dim": 1,
        }


@dataclass(frozen=True)
class PowerOf(LevyExponent):
    """psi(xi) = base(xi)**exponent on the principal branch (subordination)."""

    base: LevyExponent
    exponent: float
    family = "PowerOf"

    def __post_init__(self):
        if not 0 < self.exponent <= 1:
            raise DescriptorError("params.exponent", "exponent must lie in (0, 1]")

    @property
    def dim(self):
        return self.base.dim

    def evaluate(self, pts):
        vals = self.base.evaluate(pts)
        if self.exponent == 1.0:
            return vals
        return complex_power(vals, self.exponent)

    @property
    def is_symmetric(self):
        return self.base.is_symmetric

    @property
    def is_isotropic(self):
        return self.base.is_isotropic

    @property
    def index(self):
        idx = self.base.index
        return None if idx is None else idx * self.exponent

    def to_dict(self):
        return {
            "family": self.family,
            "params": {"base": self.base.to_dict(), "exponent": self.exponent},
            "dim": self.dim,
        }


@dataclass(frozen=True)
class Composite(LevyExponent):
    """Sum of exponents of independent processes on the same space."""

    parts: tuple
    family = "Composite"

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise DescriptorError("params.parts", "need at least one part")
        if len({p.dim for p in parts}) != 1:
            raise DescriptorError("params.parts", "parts must share the same dim")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self):
        return self.parts[0].dim

    def evaluate(self, pts):
        return sum(p.evaluate(pts) for p in self.parts)

    @property
    def is_symmetric(self):
        return all(p.is_symmetric for p in self.parts)

    @property
    def is_isotropic(self):
        return all(p.is_isotropic for p in self.parts)

    @property
    def index(self):
        idx = [p.index for p in self.parts]
        return None if None in idx else max(idx)

    def to_dict(self):
        return {"family": self.family, "params": {"parts": [p.to_dict() for p in self.parts]}, "dim": self.dim}


FAMILIES = ("IsotropicStable", "SymmetricRegVarying", "StableComponents", "PowerOf", "SkewedStable1D", "Composite")


def exponent_from_dict(d: Mapping[str, Any], where: str = "psi") -> LevyExponent:
    """Build an exponent from ``{"family": ..., "params": {...}, "dim": d}``."""
    if not isinstance(d, Mapping):
        raise DescriptorError(where, "descriptor must be a JSON object")
    family = d.get("family")
    params = d.get("params", {})
    if not isinstance(params, Mapping):
        raise DescriptorError(f"{where}.params", "must be an object")
    dim = d.get("dim")
    if dim is not None and (not isinstance(dim, int) or dim < 1):
        raise DescriptorError(f"{where}.dim", "must be a positive integer")

    def need(key):
        if key not in params:
            raise DescriptorError(f"{where}.params.{key}", "missing")
        return params[key]

    try:
        if family == "IsotropicStable":
            return IsotropicStable(float(need("alpha")), dim or 1, float(params.get("scale", 1.0)))
        if family == "SymmetricRegVarying":
            kappa = SlowlyVaryingFn.from_dict(params.get("kappa", {"kind": "Constant", "c": 1.0}),
                                              f"{where}.params.kappa")
            return SymmetricRegVarying(float(need("alpha")), kappa, dim or 1)
        if family == "StableComponents":
            psi = StableComponents(tuple(tuple(c) for c in need("components")))
            if dim is not None and dim != psi.dim:
                raise DescriptorError(f"{where}.dim", f"components span dim {psi.dim}, not {dim}")
            return psi
        if family == "PowerOf":
            return PowerOf(exponent_from_dict(need("base"), f"{where}.params.base"), float(need("exponent")))
        if family == "SkewedStable1D":
            if dim not in (None, 1):
                raise DescriptorError(f"{where}.dim", "SkewedStable1D lives in dim 1")
            return SkewedStable1D(float(need("alpha")), float(params.get("skew", 0.0)),
                                  float(params.get("scale", 1.0)))
        if family == "Composite":
            parts = need("parts")
            return Composite(tuple(exponent_from_dict(p, f"{where}.params.parts[{i}]") for i, p in enumerate(parts)))
    except DescriptorError as exc:
        if exc.field.startswith(where):
            raise
        raise DescriptorError(f"{where}.{exc.field}", str(exc).split(": ", 1)[-1]) from exc
    except (TypeError, ValueError) as exc:
        raise DescriptorError(f"{where}.params", str(exc)) from exc
    raise DescriptorError(f"{where}.family", f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# operations


def eval_psi(psi: LevyExponent, xi) -> np.ndarray:
    return psi(xi)


def chi(psi: LevyExponent, xi, x):
    """exp(-|x| psi(sgn(x) xi)); broadcasts over x for a single xi."""
    x = np.asarray(x, dtype=float)
    pts = _points(xi, psi.dim)
    sgn = np.where(x >= 0, 1.0, -1.0)
    vals = psi.evaluate(sgn[..., None] * pts) if pts.ndim == 1 else psi.evaluate(sgn[..., None, None] * pts)
    if pts.ndim > 1:
        vals = vals.reshape(x.shape + pts.shape[:-1])
    return np.exp(-np.abs(x).reshape(x.shape + (1,) * (vals.ndim - x.ndim)) * vals)


def power_exponent(psi: LevyExponent, a: float) -> LevyExponent:
    if not 0 < a <= 1:
        raise ValueError("power must lie in (0, 1]")
    if a == 1:
        return psi
    if isinstance(psi, PowerOf):
        return PowerOf(psi.base, psi.exponent * a)
    return PowerOf(psi, a)


def re_resolvent(psi: LevyExponent, xi) -> np.ndarray:
    return resolvent_real(psi(xi))


def sphere_directions(dim: int, n: int = 256, seed: int = 0) -> np.ndarray:
    """Unit vectors covering S^{dim-1}: exact angles for dim <= 2, Sobol otherwise.

    Coordinate axes are always included so axis-aligned extremes are hit.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    m = 1 << max(int(math.ceil(math.log2(n))), 3)
    u = qmc.Sobol(dim, scramble=True, seed=seed).random(m)
    g = np.clip(u, 1e-12, 1 - 1e-12)
    from scipy.special import ndtri

    z = ndtri(g)
    z /= np.linalg.norm(z, axis=-1, keepdims=True)
    axes = np.concatenate([np.eye(dim), -np.eye(dim)])
    return np.concatenate([axes, z])


@dataclass
class SectorMargin:
    margin: float
    argmax: np.ndarray
    radii: np.ndarray
    shell_margins: np.ndarray
    trend: float  # slope of shell margin against log10(radius)
    unbounded: bool


def sector_margin(psi: LevyExponent, shell=(1e2, 1e6), n_radii: int = 25, n_dirs: int = 128) -> SectorMargin:
    """sup |Im psi| / Re psi over a shell of radii, with a growth diagnostic."""
    r0, r1 = shell
    if r0 <= 0 or r1 <= r0:
        raise ValueError("shell must satisfy 0 < r0 < r1")
    radii = np.geomspace(r0, r1, n_radii)
    dirs = sphere_directions(psi.dim, n_dirs)
    vals = psi.along(dirs[None, :, :], radii[:, None])
    re = np.real(vals)
    if np.any(re <= 0):
        i, j = np.argwhere(re <= 0)[0]
        raise ValueError(f"Re psi vanishes at xi = {radii[i] * dirs[j]}")
    ratio = np.abs(np.imag(vals)) / re
    per_shell = ratio.max(axis=1)
    i, j = np.unravel_index(np.argmax(ratio), ratio.shape)
    trend = float(np.polyfit(np.log10(radii), per_shell, 1)[0]) if n_radii > 1 else 0.0
    scale = max(float(per_shell.max()), 1e-300)
    unbounded = trend > 0.05 * scale and per_shell[-1] > 1.05 * per_shell[0]
    return SectorMargin(float(per_shell.max()), radii[i] * dirs[j], radii, per_shell, trend, bool(unbounded))


@dataclass
class DeltaEta:
    delta: float
    eta: float
    r2_min: float
    r2_max: float


def delta_eta_estimate(psi: LevyExponent, radii=(1e2, 1e6), n_radii: int = 30, n_dirs: int = 128,
                       r2_threshold: float = 0.995) -> DeltaEta:
    """Log-log slopes of min and max |psi| over spheres."""
    r0, r1 = radii
    if r1 / r0 < 1e3 - 1e-9:
        raise ValueError("radius range must span at least 3 decades")
    rs = np.geomspace(r0, r1, n_radii)
    dirs = sphere_directions(psi.dim, n_dirs)
    mags = np.abs(psi.along(dirs[None, :, :], rs[:, None]))
    lr = np.log(rs)
    fits = []
    for y in (np.log(mags.min(axis=1)), np.log(mags.max(axis=1))):
        slope, icpt = np.polyfit(lr, y, 1)
        resid = y - (slope * lr + icpt)
        ss = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 0.0
        if r2 < r2_threshold:
            raise ValueError(f"log-log fit is not linear (R^2 = {r2:.4f})")
        fits.append((float(slope), r2))
    (delta, r2a), (eta, r2b) = fits
    return DeltaEta(delta, eta, r2a, r2b)


def sample_grid(psi: LevyExponent, decades=(-2, 2), per_decade: int = 250, seed: int = 0) -> np.ndarray:
    """Quasi-random points with radii spread log-uniformly across ``decades``."""
    lo, hi = decades
    n = per_decade * (hi - lo)
    sob = qmc.Sobol(psi.dim + 1, scramble=True, seed=seed).random(1 << int(math.ceil(math.log2(n))))[:n]
    radii = 10.0 ** (lo + (hi - lo) * sob[:, 0])
    if psi.dim == 1:
        dirs = np.where(sob[:, 1] < 0.5, -1.0, 1.0)[:, None]
    else:
        from scipy.special import ndtri

        z = ndtri(np.clip(sob[:, 1:], 1e-12, 1 - 1e-12))
        dirs = z / np.linalg.norm(z, axis=-1, keepdims=True)
    return radii[:, None] * dirs
