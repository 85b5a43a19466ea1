"""Compact sets described by a few parameters, and discrete measures on them.

A level-L discretisation splits the construction into cells; each atom of a
:class:`DiscreteMeasure` is the centre of one cell and stands for the uniform
distribution on that cell.  Energies computed downstream treat the atoms that
way, which keeps self-interactions finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .exponents import DescriptorError

MAX_ATOMS = 4_000_000


class AtomCapError(MemoryError):
    pass


def _guard(count: int, cap: int | None):
    cap = MAX_ATOMS if cap is None else cap
    if count > cap:
        raise AtomCapError(f"{count} atoms exceeds the cap of {cap}")


# ---------------------------------------------------------------------------
# set descriptions


class SetSpec:
    """Base class for set descriptions."""

    ambient: int = 1

    def cells(self, level: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(lefts, sides, weights) of the level cells; lefts has shape (n, ambient)."""
        raise NotImplementedError

    def count(self, level: int) -> int:
        raise NotImplementedError

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def scaled(self, c: float) -> "SetSpec":
        raise NotImplementedError


@dataclass(frozen=True)
class Point(SetSpec):
    t: float = 0.0
    kind = "Point"
    ambient = 1

    def cells(self, level):
        return np.array([[self.t]]), np.zeros(1), np.ones(1)

    def count(self, level):
        return 1

    def bounds(self):
        return np.array([self.t]), np.array([self.t])

    def to_dict(self):
        return {"kind": "Point", "params": {"t": self.t}}

    def scaled(self, c):
        return Point(c * self.t)


@dataclass(frozen=True)
class Interval(SetSpec):
    a: float = 0.0
    b: float = 1.0
    kind = "Interval"
    ambient = 1

    def __post_init__(self):
        if not self.a < self.b:
            raise DescriptorError("set.params", "interval needs a < b")

    def cells(self, level):
        n = 1 << level
        h = (self.b - self.a) / n
        lefts = self.a + h * np.arange(n)
        return lefts[:, None], np.full(1, h), np.full(n, 1.0 / n)

    def count(self, level):
        return 1 << level

    def bounds(self):
        return np.array([self.a]), np.array([self.b])

    def to_dict(self):
        return {"kind": "Interval", "params": {"a": self.a, "b": self.b}}

    def scaled(self, c):
        return Interval(c * self.a, c * self.b)


@dataclass(frozen=True)
class SelfSimilar(SetSpec):
    """N pieces of ratio r spread evenly from a to b, iterated."""

    n: int = 2
    r: float = 1.0 / 3.0
    a: float = 0.0
    b: float = 1.0
    kind = "SelfSimilar"
    ambient = 1

    def __post_init__(self):
        if self.n < 2:
            raise DescriptorError("set.params.N", "need at least 2 pieces")
        if not 0 < self.r < 1 or self.n * self.r > 1 + 1e-12:
            raise DescriptorError("set.params.r", "need 0 < r < 1 and N*r <= 1")
        if not self.a < self.b:
            raise DescriptorError("set.params", "base interval needs a < b")

    @property
    def offsets(self) -> np.ndarray:
        """Left ends of the first-level pieces, relative to a and in units of b - a."""
        return np.arange(self.n) * (1.0 - self.r) / (self.n - 1)

    def cells(self, level):
        lefts = np.zeros(1)
        width = 1.0
        for _ in range(level):
            lefts = (lefts[:, None] + width * self.offsets[None, :]).ravel()
            width *= self.r
        size = self.b - self.a
        n = lefts.size
        return (self.a + size * lefts)[:, None], np.full(1, size * width), np.full(n, 1.0 / n)

    def count(self, level):
        return self.n ** level

    def bounds(self):
        return np.array([self.a]), np.array([self.b])

    def to_dict(self):
        return {"kind": "SelfSimilar", "params": {"N": self.n, "r": self.r, "a": self.a, "b": self.b}}

    def scaled(self, c):
        return SelfSimilar(self.n, self.r, c * self.a, c * self.b)


@dataclass(frozen=True)
class FiniteUnion(SetSpec):
    """Disjoint union; mass is shared equally among the parts of top dimension."""

    parts: tuple = ()
    kind = "FiniteUnion"

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise DescriptorError("set.params.parts", "need at least one part")
        if len({p.ambient for p in parts}) != 1:
            raise DescriptorError("set.params.parts", "parts must share the ambient dimension")
        boxes = [p.bounds() for p in parts]
        for i in range(len(parts)):
            for j in range(i + 1, len(parts)):
                lo = np.maximum(boxes[i][0], boxes[j][0])
                hi = np.minimum(boxes[i][1], boxes[j][1])
                if np.all(lo <= hi):
                    raise DescriptorError("set.params.parts", f"parts {i} and {j} overlap")
        object.__setattr__(self, "parts", parts)

    @property
    def ambient(self):
        return self.parts[0].ambient

    def cells(self, level):
        dims = [analytic_dimension(p) for p in self.parts]
        top = max(dims)
        carriers = [k for k, dm in enumerate(dims) if dm == top]
        lefts, sides, weights = [], [], []
        for k, p in enumerate(self.parts):
            lf, sd, w = p.cells(level)
            lefts.append(lf)
            sides.append(np.broadcast_to(sd, lf.shape))
            weights.append(w / len(carriers) if k in carriers else np.zeros_like(w))
        return np.concatenate(lefts), np.concatenate(sides), np.concatenate(weights)

    def count(self, level):
        return sum(p.count(level) for p in self.parts)

    def bounds(self):
        boxes = [p.bounds() for p in self.parts]
        return np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0)

    def to_dict(self):
        return {"kind": "FiniteUnion", "params": {"parts": [p.to_dict() for p in self.parts]}}

    def scaled(self, c):
        return FiniteUnion(tuple(p.scaled(c) for p in self.parts))


@dataclass(frozen=True)
class Product(SetSpec):
    factors: tuple = ()
    kind = "Product"

    def __post_init__(self):
        if not self.factors:
            raise DescriptorError("set.params.factors", "need at least one factor")
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def ambient(self):
        return sum(f.ambient for f in self.factors)

    def cells(self, level):
        mu = natural_measure(self, level)
        return mu.atoms - mu.sides / 2, mu.sides, mu.weights

    def count(self, level):
        return math.prod(f.count(level) for f in self.factors)

    def bounds(self):
        boxes = [f.bounds() for f in self.factors]
        return np.concatenate([b[0] for b in boxes]), np.concatenate([b[1] for b in boxes])

    def to_dict(self):
        return {"kind": "Product", "params": {"factors": [f.to_dict() for f in self.factors]}}

    def scaled(self, c):
        return Product(tuple(f.scaled(c) for f in self.factors))


def set_from_dict(d: Mapping[str, Any], where: str = "set") -> SetSpec:
    """Build a set from ``{"kind": ..., "params": {...}}``."""
    if not isinstance(d, Mapping):
        raise DescriptorError(where, "descriptor must be a JSON object")
    kind = d.get("kind")
    p = d.get("params", {})
    if not isinstance(p, Mapping):
        raise DescriptorError(f"{where}.params", "must be an object")
    try:
        if kind == "Point":
            return Point(float(p.get("t", 0.0)))
        if kind == "Interval":
            return Interval(float(p.get("a", 0.0)), float(p.get("b", 1.0)))
        if kind == "SelfSimilar":
            return SelfSimilar(int(p.get("N", 2)), float(p.get("r", 1 / 3)), float(p.get("a", 0.0)),
                               float(p.get("b", 1.0)))
        if kind == "FiniteUnion":
            return FiniteUnion(tuple(set_from_dict(q, f"{where}.params.parts[{i}]")
                                     for i, q in enumerate(p["parts"])))
        if kind == "Product":
            return Product(tuple(set_from_dict(q, f"{where}.params.factors[{i}]")
                                 for i, q in enumerate(p["factors"])))
    except DescriptorError as exc:
        if exc.field.startswith(where):
            raise
        raise DescriptorError(where + exc.field[3:], str(exc).split(": ", 1)[-1]) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise DescriptorError(f"{where}.params", str(exc)) from exc
    raise DescriptorError(f"{where}.kind", f"unknown kind {kind!r}")


def analytic_dimension(s: SetSpec) -> float:
    if isinstance(s, Point):
        return 0.0
    if isinstance(s, Interval):
        return 1.0
    if isinstance(s, SelfSimilar):
        return math.log(s.n) / math.log(1.0 / s.r)
    if isinstance(s, FiniteUnion):
        return max(analytic_dimension(p) for p in s.parts)
    if isinstance(s, Product):
        return sum(analytic_dimension(f) for f in s.factors)
    raise TypeError(f"no analytic dimension for {type(s).__name__}")


# ---------------------------------------------------------------------------
# measures


@dataclass
class DiscreteMeasure:
    """Weighted cell centres; ``sides`` are the per-coordinate cell widths.

    ``source`` records ``(set, level)`` when the measure is the unmodified
    natural measure, which enables exact product-formula Fourier transforms.
    """

    atoms: np.ndarray
    weights: np.ndarray
    sides: np.ndarray
    source: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        self.atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        if self.atoms.shape[0] == 1 and self.atoms.shape[1] != np.size(self.sides) and np.size(self.sides) == 1:
            self.atoms = self.atoms.T
        self.weights = np.asarray(self.weights, dtype=float)
        self.sides = np.broadcast_to(np.asarray(self.sides, dtype=float), (self.atoms.shape[1],)).copy()
        if self.weights.shape != (self.atoms.shape[0],):
            raise ValueError("weights must match atoms")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")

    @property
    def ambient(self) -> int:
        return self.atoms.shape[1]

    @property
    def cell(self) -> float:
        """Largest cell side."""
        return float(self.sides.max())

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def check_normalised(self, tol: float = 1e-12):
        if abs(self.total - 1.0) > tol:
            raise ValueError(f"measure has mass {self.total:.15g}, expected 1")

    def with_weights(self, weights) -> "DiscreteMeasure":
        w = np.asarray(weights, dtype=float)
        return DiscreteMeasure(self.atoms, w / w.sum(), self.sides)

    def shifted(self, offset) -> "DiscreteMeasure":
        return DiscreteMeasure(self.atoms + np.asarray(offset, dtype=float), self.weights, self.sides)

    def barycenter(self) -> np.ndarray:
        return self.weights @ self.atoms / self.total

    def marginal(self, axes) -> "DiscreteMeasure":
        axes = list(np.atleast_1d(axes))
        pts = self.atoms[:, axes]
        uniq, inv = np.unique(np.round(pts, 12), axis=0, return_inverse=True)
        w = np.bincount(inv.ravel(), weights=self.weights, minlength=len(uniq))
        return DiscreteMeasure(uniq, w, self.sides[axes])

    def lattice(self, rtol: float = 1e-6):
        """Integer coordinates when the atoms sit on the lattice ``origin + sides*k``.

        Returns ``(origin, index array)`` or ``None``.  Zero sides count as a
        single lattice site.
        """
        origin = self.atoms.min(axis=0)
        idx = np.zeros(self.atoms.shape, dtype=np.int64)
        for j, h in enumerate(self.sides):
            rel = self.atoms[:, j] - origin[j]
            if h == 0:
                if np.ptp(rel) > 0:
                    return None
                continue
            k = np.rint(rel / h)
            if np.max(np.abs(rel / h - k)) > rtol * max(1.0, float(k.max())):
                return None
            idx[:, j] = k.astype(np.int64)
        return origin, idx

    def fourier(self, xi) -> np.ndarray:
        """Fourier transform of the cell-uniform measure at points ``xi`` (shape (m, k) or (m,))."""
        xi = np.asarray(xi, dtype=float)
        if xi.ndim == 1 and self.ambient == 1:
            xi = xi[:, None]
        if self.source is not None:
            return set_fourier(self.source[0], self.source[1], xi)
        out = np.zeros(xi.shape[0], dtype=complex)
        chunk = max(1, 4_000_000 // max(self.size, 1))
        for s in range(0, xi.shape[0], chunk):
            ph = xi[s:s + chunk] @ self.atoms.T
            out[s:s + chunk] = np.exp(1j * ph) @ self.weights
        return out * _cell_factor(xi, self.sides)


def _cell_factor(xi: np.ndarray, sides: np.ndarray) -> np.ndarray:
    """Transform of the centred uniform cell: prod sinc(xi_j h_j / 2)."""
    return np.prod(np.sinc(xi * sides / (2 * np.pi)), axis=-1)


def set_fourier(s: SetSpec, level: int, xi) -> np.ndarray:
    """Exact transform of the level-``level`` natural measure, via product formulas."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 1:
        xi = xi[:, None]
    if isinstance(s, Point):
        return np.exp(1j * xi[:, 0] * s.t)
    if isinstance(s, Interval):
        return np.exp(1j * xi[:, 0] * (s.a + s.b) / 2) * np.sinc(xi[:, 0] * (s.b - s.a) / (2 * np.pi))
    if isinstance(s, SelfSimilar):
        x = xi[:, 0]
        size = s.b - s.a
        out = np.exp(1j * x * s.a).astype(complex)
        scale = size
        for _ in range(level):
            out *= np.exp(1j * np.outer(x * scale, s.offsets)).mean(axis=1)
            scale *= s.r
        return out * np.exp(1j * x * scale / 2) * np.sinc(x * scale / (2 * np.pi))
    if isinstance(s, FiniteUnion):
        out = np.zeros(xi.shape[0], dtype=complex)
        dims = [analytic_dimension(p) for p in s.parts]
        top = max(dims)
        carriers = [p for p, dm in zip(s.parts, dims) if dm == top]
        for p in carriers:
            out += set_fourier(p, level, xi) / len(carriers)
        return out
    if isinstance(s, Product):
        out = np.ones(xi.shape[0], dtype=complex)
        start = 0
        for f in s.factors:
            out *= set_fourier(f, level, xi[:, start:start + f.ambient])
            start += f.ambient
        return out
    raise TypeError(f"no Fourier formula for {type(s).__name__}")


def natural_measure(s: SetSpec, level: int, cap: int | None = None) -> DiscreteMeasure:
    """Uniform weights over the level cells, atoms at the cell centres."""
    if level < 0:
        raise ValueError("level must be >= 0")
    _guard(s.count(level), cap)
    if isinstance(s, Product):
        mu = natural_measure(s.factors[0], level, cap)
        for f in s.factors[1:]:
            mu = product_measure(mu, natural_measure(f, level, cap), cap)
        mu.source = (s, level)
        return mu
    lefts, sides, weights = s.cells(level)
    sides = np.asarray(sides, dtype=float)
    if sides.ndim == 2:
        # union of parts with different cell sizes
        if np.ptp(sides) > 0:
            keep = weights > 0
            lefts, sides, weights = lefts[keep], sides[keep], weights[keep]
        sides = sides.max(axis=0) if sides.size else np.zeros(1)
    return DiscreteMeasure(lefts + sides / 2, weights, sides, source=(s, level))


def product_measure(mu: DiscreteMeasure, nu: DiscreteMeasure, cap: int | None = None) -> DiscreteMeasure:
    """Cartesian product of atoms with product weights."""
    _guard(mu.size * nu.size, cap)
    i, j = np.meshgrid(np.arange(mu.size), np.arange(nu.size), indexing="ij")
    atoms = np.concatenate([mu.atoms[i.ravel()], nu.atoms[j.ravel()]], axis=1)
    weights = (mu.weights[:, None] * nu.weights[None, :]).ravel()
    return DiscreteMeasure(atoms, weights, np.concatenate([mu.sides, nu.sides]))


def point_mass(t) -> DiscreteMeasure:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return DiscreteMeasure(t[None, :], np.ones(1), np.zeros(t.size))


def refine_weights(s: SetSpec, coarse_level: int, fine_level: int, coarse_weights) -> DiscreteMeasure:
    """Spread coarse-cell weights uniformly over their fine-level descendants.

    Relies on the cell ordering of ``cells``: the descendants of a coarse cell
    form a contiguous block for one-dimensional constructions.
    """
    fine = natural_measure(s, fine_level)
    ratio = s.count(fine_level) // s.count(coarse_level)
    if s.ambient != 1 or isinstance(s, FiniteUnion) or ratio * s.count(coarse_level) != s.count(fine_level):
        raise ValueError("refinement is supported for one-dimensional self-similar sets and intervals")
    w = np.repeat(np.asarray(coarse_weights, dtype=float), ratio)
    return DiscreteMeasure(fine.atoms, w / w.sum(), fine.sides)


def scale_measure(mu: DiscreteMeasure, c: float) -> DiscreteMeasure:
    return DiscreteMeasure(mu.atoms * c, mu.weights, mu.sides * c)


def disjoint(F: SetSpec, G: SetSpec, level: int = 8) -> bool:
    """Conservative disjointness test on level covers (1-d sets)."""
    lf, sf, _ = F.cells(min(level, 12))
    lg, sg, _ = G.cells(min(level, 12))
    sf = np.broadcast_to(sf, lf.shape)[:, 0]
    sg = np.broadcast_to(sg, lg.shape)[:, 0]
    a0, a1 = lf[:, 0], lf[:, 0] + sf
    b0, b1 = lg[:, 0], lg[:, 0] + sg
    order = np.argsort(b0)
    b0, b1 = b0[order], b1[order]
    run_max = np.maximum.accumulate(b1)
    k = np.searchsorted(b0, a1, side="right")
    hit = (k > 0) & (run_max[np.maximum(k - 1, 0)] >= a0)
    return not bool(np.any(hit))
