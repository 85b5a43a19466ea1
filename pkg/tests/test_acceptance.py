"""Acceptance suite: each test checks one criterion at its stated tolerance and time budget."""

import math
import time

import numpy as np
import pytest

from levydim import (DiscreteMeasure, Interval, IsotropicStable, Point, SelfSimilar, SkewedStable1D,
                     SlowlyVaryingFn, StableComponents, SymmetricRegVarying, natural_measure)
from levydim.cli import main
from levydim.dimension import dim_image, dim_preimage, dim_range, epsilon_n, g_kappa_gauge, stable_components_dim
from levydim.dimension.regvar import scaled_integral
from levydim.energy import Riesz, capacity, chi_energy, f_gamma, fourier_energy, kernel_energy
from levydim.intersections import intersect_criterion
from levydim.simulate import box_dimension, intersection_probe, mc_chi_energy, sample_path

CANTOR = SelfSimilar(2, 1 / 3)
DIM_CANTOR = math.log(2) / math.log(3)


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def test_criterion_01_stable_image_law(criterion):
    rows, ok = [], True
    for alpha, d in [(0.5, 1), (1.5, 1), (1.5, 2)]:
        for name, G, dim_g in [("[0,1]", Interval(0, 1), 1.0), ("Cantor", CANTOR, DIM_CANTOR)]:
            rep, secs = _timed(dim_image, IsotropicStable(alpha, d), G, tol=0.01)
            want = min(d, alpha * dim_g)
            good = abs(rep.value - want) <= 0.05 and secs < 60
            ok &= good
            rows.append(f"a={alpha},d={d},{name}: {rep.value:.3f} vs {want:.3f} ({secs:.1f}s)")
    assert criterion(1, ok, "; ".join(rows))


def test_criterion_02_range_dimension(criterion):
    rows, ok = [], True
    for alpha, d in [(0.5, 1), (1.5, 1), (2.0, 1), (0.7, 2), (1.5, 2), (1.9, 3)]:
        rep, secs = _timed(dim_range, IsotropicStable(alpha, d), tol=0.01)
        good = abs(rep.value - min(alpha, d)) <= 0.02 and secs < 10
        ok &= good
        rows.append(f"({alpha},{d}): {rep.value:.3f} ({secs:.1f}s)")
    assert criterion(2, ok, "; ".join(rows))


def test_criterion_03_stable_components(criterion):
    rows, ok = [], True
    for a1, a2 in [(1.8, 0.9), (0.5, 0.3), (2.0, 2.0)]:
        rep, secs = _timed(dim_range, StableComponents(((a1, 1), (a2, 1))), tol=0.01)
        want = stable_components_dim([(a1, 1), (a2, 1)])
        good = abs(rep.value - want) <= 0.05 and secs < 120
        ok &= good
        rows.append(f"({a1},{a2}): {rep.value:.3f} vs {want:.3f} ({secs:.1f}s)")
    assert criterion(3, ok, "; ".join(rows))


def test_criterion_04_preimage_formula(criterion):
    rows, ok = [], True
    psi = IsotropicStable(1.5, 1)
    for name, R, dim_r in [("{0}", Point(0.0), 0.0), ("Cantor", CANTOR, DIM_CANTOR), ("[0,1]", Interval(0, 1), 1.0)]:
        rep, secs = _timed(dim_preimage, psi, R)
        want = (1.5 + dim_r - 1) / 1.5
        good = abs(rep.value - want) <= 0.05 and secs < 60
        ok &= good
        rows.append(f"{name}: {rep.value:.3f} vs {want:.3f} ({secs:.1f}s)")
    assert criterion(4, ok, "; ".join(rows))


def _random_config(rng, k):
    a = rng.uniform(0.3, 2.0)
    if k % 3 == 0:
        psi = IsotropicStable(a, 1)
    elif k % 3 == 1:
        psi = IsotropicStable(a, 2)
    else:
        psi = SkewedStable1D(a, rng.uniform(-1, 1))
    n = int(rng.integers(2, 7))
    mu = DiscreteMeasure(rng.uniform(0, 2, (n, 1)), rng.dirichlet(np.ones(n)), 0.0)
    return psi, mu, rng.uniform(-3, 3, psi.dim)


def test_criterion_05_energy_identity(criterion):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    inside = 0
    for k in range(40):
        psi, mu, xi = _random_config(rng, k)
        exact = chi_energy(mu, psi, xi if psi.dim > 1 else xi[0])
        est, se = mc_chi_energy(psi, mu, xi, n_paths=10_000, seed=k)
        inside += abs(est - exact) <= 3 * se
    secs = time.perf_counter() - t0
    ok = inside >= 38 and secs < 600
    assert criterion(5, ok, f"{inside}/40 configurations within 3 SE ({secs:.0f}s)")


def test_criterion_06_closed_form_energies(criterion):
    uniform = kernel_energy(natural_measure(Interval(0, 1), 10), Riesz(0.5))
    ok = abs(uniform / (8 / 3) - 1) <= 0.01
    rng = np.random.default_rng(6)
    base = natural_measure(Interval(0, 1), 7)
    measures = [natural_measure(CANTOR, 8), natural_measure(SelfSimilar(3, 0.2), 5),
                natural_measure(Interval(0, 0.5), 9), natural_measure(SelfSimilar(2, 0.25), 6),
                base.with_weights(rng.uniform(0.5, 1.5, base.size))]
    errs = [abs(fourier_energy(mu, 0.5) / kernel_energy(mu, Riesz(0.5)) - 1) for mu in measures]
    ok &= max(errs) <= 0.02
    assert criterion(6, ok, f"uniform energy {uniform:.4f} vs 8/3; max Fourier/kernel error {max(errs):.1e}")


def test_criterion_07_capacity_scaling(criterion):
    rows, ok = [], True
    for beta in (0.3, 0.7):
        c1 = capacity(Interval(0, 1), Riesz(beta), 8).value
        for c in (0.5, 2.0):
            ratio = capacity(Interval(0, c), Riesz(beta), 8).value / c1
            good = abs(ratio / c ** beta - 1) <= 0.02
            ok &= good
            rows.append(f"beta={beta},c={c}: {ratio:.4f} vs {c ** beta:.4f}")
    assert criterion(7, ok, "; ".join(rows))


def test_criterion_08_kahane_criterion(criterion):
    t0 = time.perf_counter()
    F, G = Interval(0, 1), Interval(2, 3)
    verdicts = {d: intersect_criterion(IsotropicStable(2.0, d), F, G)[0] for d in (2, 3, 5)}
    ok = verdicts[2] == "positive" and verdicts[3] == "positive" and verdicts[5] == "zero"
    # epsilons straddle the typical segment length sqrt(2 d h) at h = 1/256
    eps = [0.4, 0.2, 0.1, 0.05]
    trends = {d: intersection_probe(IsotropicStable(2.0, d), F, G, eps, n_paths=2000, seed=8).trend for d in (2, 5)}
    ok &= trends[2] == "plateau" and trends[5] == "decay"
    secs = time.perf_counter() - t0
    ok &= secs < 300
    assert criterion(8, ok, f"capacity verdicts {verdicts}; probe trends {trends} ({secs:.0f}s)")


def test_criterion_09_gauge_comparability(criterion):
    kappa = SlowlyVaryingFn.log_power(1.0)
    x = np.geomspace(1e-8, 1e-2, 25)
    f = f_gamma(SymmetricRegVarying(1.5, kappa, 1), 0.5, x)
    g = g_kappa_gauge(1.5, 0.5, kappa).profile(x)
    r = f / g
    ok = r.min() >= 0.1 and r.max() <= 10
    band = [r.min(), r.max()]
    for k in (SlowlyVaryingFn.constant(1.0), kappa, SlowlyVaryingFn.log_power(2.0)):
        for n in (1e2, 1e4, 1e6):
            q = epsilon_n(1.5, k, n) ** 0.5 / scaled_integral(1.5, 0.5, k, n)
            ok &= 0.1 <= q <= 10
            band += [q]
    assert criterion(9, ok, f"ratios in [{min(band):.3f}, {max(band):.3f}]")


def test_criterion_10_box_counting(criterion):
    rows, ok = [], True
    t = np.arange(1, 10_001) / 10_000
    for alpha in (1.2, 1.7):
        t0 = time.perf_counter()
        vals = [box_dimension(sample_path(IsotropicStable(alpha, 2), t, seed=10, path=p).values) for p in range(8)]
        secs = time.perf_counter() - t0
        est = float(np.mean(vals))
        good = abs(est - min(alpha, 2)) <= 0.15 and secs < 120
        ok &= good
        rows.append(f"alpha={alpha}: {est:.3f} (paths {min(vals):.2f}-{max(vals):.2f}, {secs:.1f}s)")
    assert criterion(10, ok, "; ".join(rows))


def test_cli_dim_range_example(tmp_path):
    code = main(["dim-range", "--psi", '{"family":"IsotropicStable","params":{"alpha":1.5},"dim":1}',
                 "--tol", "0.01", "--out", str(tmp_path), "--no-plot"])
    import json

    value = json.loads((tmp_path / "report.json").read_text())["report"]["value"]
    assert code == 0 and 0.99 <= value <= 1.0
