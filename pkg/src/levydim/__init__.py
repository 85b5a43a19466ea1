"""Dimensions of images, ranges and preimages of Levy processes via capacity criteria."""

from .exponents import (
    Composite,
    DescriptorError,
    IsotropicStable,
    LevyExponent,
    PowerOf,
    SkewedStable1D,
    SlowlyVaryingFn,
    StableComponents,
    SymmetricRegVarying,
    chi,
    delta_eta_estimate,
    eval_psi,
    exponent_from_dict,
    power_exponent,
    re_resolvent,
    sector_margin,
)
from .sets import (
    DiscreteMeasure,
    FiniteUnion,
    Interval,
    Point,
    Product,
    SelfSimilar,
    analytic_dimension,
    natural_measure,
    set_from_dict,
)

__version__ = "0.1.0"

__all__ = [
    "Composite", "DescriptorError", "IsotropicStable", "LevyExponent", "PowerOf", "SkewedStable1D",
    "SlowlyVaryingFn", "StableComponents", "SymmetricRegVarying", "chi", "delta_eta_estimate", "eval_psi",
    "exponent_from_dict", "power_exponent", "re_resolvent", "sector_margin",
    "DiscreteMeasure", "FiniteUnion", "Interval", "Point", "Product", "SelfSimilar", "analytic_dimension",
    "natural_measure", "set_from_dict",
]
