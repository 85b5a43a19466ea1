"""chi-energies: E_chi(mu) = sum_ij w_i w_j prod_j chi_{s_j xi}(x_i - x_j).

Atoms can be read as points (``cells=False``) or as uniform distributions on
their cells (``cells=True``).  With cells, a pair of cells at lattice offset
D >= h contributes exp(-(D - h) psi) * phi(h psi)^2, phi(z) = (1 - e^-z)/z,
and a cell with itself contributes 2 Re[(z - 1 + e^-z)/z^2], z = h psi.
"""

from __future__ import annotations

import numpy as np

from ..exponents import LevyExponent
from ..sets import DiscreteMeasure, Product

IMAG_TOL = 1e-10
_TRUNC = 40.0  # exp(-40) is below double-precision relevance


class ImaginaryResidueError(FloatingPointError):
    pass


def phi(z):
    """(1 - exp(-z)) / z with the small-|z| series."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    return np.where(small, 1 - z / 2 + z * z / 6, -np.expm1(-zs) / zs)


def diag_average(z):
    """2 Re[(z - 1 + e^-z)/z^2], the self-average of a cell with z = h psi."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    exact = (zs + np.expm1(-zs)) / (zs * zs)
    series = 0.5 - z / 6 + z * z / 24 - z ** 3 / 120
    return 2 * np.real(np.where(small, series, exact))


def offset_factor(D, h: float, v, cells: bool):
    """Mean of chi over a pair of cells at signed offset D, for psi value v = psi(xi).

    Negative offsets use conj(v) = psi(-xi).  Broadcasts D against v.
    """
    D = np.asarray(D, dtype=float)
    v = np.asarray(v, dtype=complex)
    vv = np.where(D >= 0, v, np.conj(v))
    A = np.abs(D)
    if not cells or h == 0:
        return np.exp(-A * vv)
    out = np.exp(-np.maximum(A - h, 0.0) * vv) * phi(h * vv) ** 2
    return np.where(A == 0, diag_average(h * v), out)


def _autocorrelation_1d(idx: np.ndarray, w: np.ndarray, length: int) -> np.ndarray:
    """W(k) = sum_i w_i w_{i+k} for k = 0..length-1 on an integer lattice."""
    dense = np.zeros(length)
    np.add.at(dense, idx, w)
    n = 1 << int(np.ceil(np.log2(2 * length)))
    f = np.fft.rfft(dense, n)
    ac = np.fft.irfft(f * np.conj(f), n)[:length]
    ac[np.abs(ac) < 1e-15 * ac[0]] = 0.0
    return ac


def _autocorrelation_2d(idx: np.ndarray, w: np.ndarray, shape) -> np.ndarray:
    """Signed-offset autocorrelation on a 2-d lattice, shape (2L1-1, 2L2-1)."""
    L1, L2 = shape
    dense = np.zeros(shape)
    np.add.at(dense, (idx[:, 0], idx[:, 1]), w)
    n1, n2 = 2 * L1, 2 * L2
    f = np.fft.rfft2(dense, (n1, n2))
    ac = np.fft.irfft2(f * np.conj(f), (n1, n2))
    ac = np.roll(np.roll(ac, L1 - 1, axis=0), L2 - 1, axis=1)[: 2 * L1 - 1, : 2 * L2 - 1]
    ac[np.abs(ac) < 1e-15 * ac.max()] = 0.0
    return ac


class ChiEngine:
    """Evaluates chi-energies of one measure at many frequencies.

    ``kernels`` gives, per coordinate of the measure, the exponent and the
    sign applied to xi: [(psi, +1)] for image energies, [(psi1, +1), (psi2, -1)]
    for the tensor energies of intersection problems.
    """

    def __init__(self, mu: DiscreteMeasure, kernels, cells: bool = False, max_lattice: int = 1 << 24):
        self.mu = mu
        self.kernels = list(kernels)
        self.cells = cells
        if len(self.kernels) != mu.ambient:
            raise ValueError("need one (psi, sign) per coordinate of the measure")
        if len({p.dim for p, _ in self.kernels}) != 1:
            raise ValueError("all exponents must act on the same R^d")
        self.dim = self.kernels[0][0].dim
        self.factors = None
        src = mu.source
        if mu.ambient > 1 and src is not None and isinstance(src[0], Product) and \
                all(f.ambient == 1 for f in src[0].factors):
            from ..sets import natural_measure

            self.factors = [ChiEngine(natural_measure(f, src[1]), [k], cells, max_lattice)
                            for f, k in zip(src[0].factors, self.kernels)]
            return
        self.mode = "pairs"
        lat = mu.lattice()
        if lat is not None:
            origin, idx = lat
            extent = idx.max(axis=0) + 1
            if mu.ambient == 1 and extent[0] <= max_lattice:
                W = _autocorrelation_1d(idx[:, 0], mu.weights, int(extent[0]))
                ks = np.flatnonzero(W)
                self.mode = "lattice1"
                self.ks = ks[ks > 0]
                self.Wk = W[self.ks]
                self.W0 = W[0]
                self.h = float(mu.sides[0])
                return
            if mu.ambient == 2 and np.prod(2 * extent) <= max_lattice:
                self.mode = "lattice2"
                self.W2 = _autocorrelation_2d(idx, mu.weights, tuple(int(e) for e in extent))
                self.offsets = [np.arange(-e + 1, e) * h for e, h in zip(extent, mu.sides)]
                return
        if mu.size > 6000:
            raise MemoryError("pairwise chi-energy needs a lattice measure above 6000 atoms")
        diff = mu.atoms[:, None, :] - mu.atoms[None, :, :]
        ww = (mu.weights[:, None] * mu.weights[None, :]).ravel()
        keys, inv = np.unique(np.round(diff.reshape(-1, mu.ambient), 12), axis=0, return_inverse=True)
        self.pair_offsets = keys
        self.pair_weights = np.bincount(inv.ravel(), weights=ww, minlength=len(keys))

    def values(self, xi) -> np.ndarray:
        """psi_j(s_j xi) for each coordinate j: array of shape (m, p)."""
        xi = np.asarray(xi, dtype=float)
        if self.dim == 1 and (xi.ndim == 1):
            xi = xi[:, None]
        xi = np.atleast_2d(xi)
        return np.stack([psi(sgn * xi) for psi, sgn in self.kernels])

    def energy_from_values(self, v: np.ndarray) -> tuple[np.ndarray, float]:
        """Energies for psi values ``v`` (shape (m, p)); returns (real part, max |imag|)."""
        if self.factors is not None:
            out = np.ones(v.shape[1])
            for j, eng in enumerate(self.factors):
                e, _ = eng.energy_from_values(v[j:j + 1])
                out = out * e
            return out, 0.0
        p = v.shape[1]
        sides = self.mu.sides
        if self.mode == "lattice1":
            h = self.h
            out = np.empty(p)
            v0 = v[0]
            diag = diag_average(h * v0) if (self.cells and h > 0) else np.ones(p)
            for i in range(p):
                vi = v0[i]
                re = max(vi.real, 0.0)
                if re * h > 0:
                    kmax = _TRUNC / (re * h) + 1
                    n = np.searchsorted(self.ks, kmax, side="right")
                else:
                    n = self.ks.size
                ks = self.ks[:n]
                if self.cells:
                    base = phi(h * vi) ** 2
                    t = np.exp(-(ks - 1) * h * vi) * base
                else:
                    t = np.exp(-ks * h * vi)
                out[i] = self.W0 * diag[i] + 2 * np.dot(self.Wk[:n], t.real)
            return out, 0.0
        if self.mode == "lattice2":
            out = np.empty(p, dtype=complex)
            for i in range(p):
                t1 = offset_factor(self.offsets[0], sides[0], v[0, i], self.cells)
                t2 = offset_factor(self.offsets[1], sides[1], v[1, i], self.cells)
                out[i] = t1 @ self.W2 @ t2
            return out.real, float(np.max(np.abs(out.imag))) if p else 0.0
        out = np.ones(p, dtype=complex)
        acc = np.zeros(p, dtype=complex)
        for start in range(0, len(self.pair_weights), 20000):
            D = self.pair_offsets[start:start + 20000]
            w = self.pair_weights[start:start + 20000]
            prod = np.ones((len(w), p), dtype=complex)
            for j in range(self.mu.ambient):
                prod *= offset_factor(D[:, j:j + 1], sides[j], v[j][None, :], self.cells)
            acc += w @ prod
        out = acc
        return out.real, float(np.max(np.abs(out.imag))) if p else 0.0

    def __call__(self, xi, check: bool = True) -> np.ndarray:
        e, im = self.energy_from_values(self.values(xi))
        if check and im >= IMAG_TOL * max(1.0, float(np.max(np.abs(e))) if e.size else 1.0):
            raise ImaginaryResidueError(f"imaginary residue {im:.3g} in a chi-energy")
        return e


def chi_energy(mu: DiscreteMeasure, psi: LevyExponent, xi, cells: bool = False) -> float:
    """E_{chi_xi}(mu) for a measure on the half-line; real and in [0, 1]."""
    if mu.ambient != 1:
        raise ValueError("chi_energy needs a measure on R_+; use tensor_chi_energy for products")
    mu.check_normalised(1e-9)
    return float(ChiEngine(mu, [(psi, 1)], cells)(np.atleast_1d(xi)[None, ...] if psi.dim > 1 else np.atleast_1d(xi))[0])


def tensor_chi_energy(mu: DiscreteMeasure, psi1: LevyExponent, psi2: LevyExponent, xi,
                      cells: bool = False) -> float:
    """Energy of mu on R_+^2 for the kernel chi_xi(x_1) chi_{-xi}(x_2)."""
    if mu.ambient != 2:
        raise ValueError("tensor_chi_energy needs a measure on R_+^2")
    mu.check_normalised(1e-9)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    eng = ChiEngine(mu, [(psi1, 1), (psi2, -1)], cells)
    return float(eng(xi[None, :] if psi1.dim > 1 else xi)[0])


def chi_matrix(mu: DiscreteMeasure, psi: LevyExponent, xi, cells: bool = False) -> np.ndarray:
    """Hermitian matrix K_ij = mean chi_xi(x_i - x_j) over the cells of atoms i, j."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    v = psi(xi[None, :] if psi.dim > 1 else xi)[0]
    D = mu.atoms[:, 0][:, None] - mu.atoms[:, 0][None, :]
    return offset_factor(D, float(mu.sides[0]), v, cells)
