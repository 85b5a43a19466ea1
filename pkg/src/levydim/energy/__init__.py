"""Gauges, energies, capacities and the divergence classifier."""

from .capacity import capacity, fourier_energy, kernel_energy, minimize_quadratic
from .chi import chi_energy, tensor_chi_energy
from .divergence import DIVERGENT, FINITE, INCONCLUSIVE, DivergenceVerdict, classify_divergence
from .fgamma import f_gamma
from .gauges import FGamma, GKappa, KahanePair, KFold, Riesz, Tabulated

__all__ = [
    "capacity", "fourier_energy", "kernel_energy", "minimize_quadratic", "chi_energy", "tensor_chi_energy",
    "DIVERGENT", "FINITE", "INCONCLUSIVE", "DivergenceVerdict", "classify_divergence", "f_gamma",
    "FGamma", "GKappa", "KahanePair", "KFold", "Riesz", "Tabulated",
]
