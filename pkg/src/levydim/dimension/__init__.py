"""Dimension calculators built on the energy criteria."""

from .components import stable_components_dim
from .fourier import dim_preimage, hitting_criterion, preimage_criterion
from .image import dim_image, dim_image_bounds
from .range import dim_range
from .regvar import de_bruijn_conjugate, epsilon_n, g_kappa_gauge
from .report import DimensionReport, bisect_dimension

__all__ = [
    "stable_components_dim", "dim_preimage", "hitting_criterion", "preimage_criterion", "dim_image",
    "dim_image_bounds", "dim_range", "de_bruijn_conjugate", "epsilon_n", "g_kappa_gauge", "DimensionReport",
    "bisect_dimension",
]
