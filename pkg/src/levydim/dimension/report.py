"""Dimension reports and the three-state bisection behind them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..energy.divergence import DIVERGENT, FINITE, INCONCLUSIVE, DivergenceVerdict


@dataclass
class DimensionReport:
    """A dimension estimate with the bracket and verdicts that support it.

    ``value`` is the midpoint of ``interval``.  ``is_interval`` is set when
    Inconclusive verdicts leave a bracket wider than the requested tolerance;
    such reports should be read as the interval, not the point.
    """

    value: float
    interval: tuple
    method: str
    tol: float
    verdicts: list = field(default_factory=list)  # [(exponent, verdict dict)]
    grid: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    is_interval: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "interval": list(self.interval),
            "is_interval": self.is_interval,
            "method": self.method,
            "tol": self.tol,
            "grid": self.grid,
            "flags": list(self.flags),
            "verdicts": [[float(x), v] for x, v in self.verdicts],
            "extra": self.extra,
        }

    def bracketing_consistent(self) -> bool:
        """Finite below the bracket, Divergent above it."""
        lo, hi = self.interval
        for x, v in self.verdicts:
            verdict = v["verdict"] if isinstance(v, dict) else v
            if x < lo - 1e-12 and verdict != FINITE:
                return False
            if x > hi + 1e-12 and verdict != DIVERGENT:
                return False
        return True


def bisect_dimension(verdict_fn: Callable[[float], DivergenceVerdict], lo: float, hi: float, tol: float,
                     method: str = "Bisection", edge: float | None = None) -> DimensionReport:
    """Locate the switch from Finite (small exponents) to Divergent (large ones).

    Two bisections run over a shared cache: one treats Inconclusive as not
    Finite (giving the last Finite exponent), the other as not Divergent
    (giving the first Divergent exponent).  Without Inconclusive verdicts they
    coincide.  If the smallest probed exponent is already Divergent the value
    is ``lo``; if the largest is still Finite it is ``hi``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    edge = tol / 2 if edge is None else edge
    cache: dict[float, DivergenceVerdict] = {}

    def v(x):
        key = round(x, 12)
        if key not in cache:
            cache[key] = verdict_fn(key)
        return cache[key]

    a, b = lo + edge, hi - edge
    va, vb = v(a), v(b)

    def report(value, interval, is_interval=False, flags=()):
        verdicts = [(x, cache[x].to_dict()) for x in sorted(cache)]
        return DimensionReport(value, interval, method, tol, verdicts, flags=list(flags), is_interval=is_interval)

    if va.verdict == DIVERGENT:
        return report(lo, (lo, a), flags=["Divergent at the smallest exponent"])
    if vb.verdict == FINITE:
        return report(hi, (b, hi), flags=["Finite at the largest exponent"])

    # last Finite exponent
    x_lo = a if va.verdict == FINITE else lo
    x_hi = b
    while x_hi - x_lo > tol:
        m = 0.5 * (x_lo + x_hi)
        if v(m).verdict == FINITE:
            x_lo = m
        else:
            x_hi = m
    # first Divergent exponent
    y_lo = a
    y_hi = b if vb.verdict == DIVERGENT else hi
    while y_hi - y_lo > tol:
        m = 0.5 * (y_lo + y_hi)
        if v(m).verdict == DIVERGENT:
            y_hi = m
        else:
            y_lo = m
    inconclusive = any(c.verdict == INCONCLUSIVE for c in cache.values())
    flags = []
    if inconclusive:
        lo_edge, hi_edge = x_lo, y_hi
        if hi_edge - lo_edge > tol * 1.0001:
            flags.append("Inconclusive verdicts widen the bracket")
    else:
        lo_edge, hi_edge = x_lo, x_hi
    if hi_edge < lo_edge:
        flags.append("non-monotone verdicts")
        lo_edge, hi_edge = hi_edge, lo_edge
    return report(0.5 * (lo_edge + hi_edge), (lo_edge, hi_edge),
                  is_interval=any(f.startswith("Inconclusive") for f in flags), flags=flags)
