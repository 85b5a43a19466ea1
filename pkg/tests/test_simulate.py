import numpy as np
import pytest

from levydim import (DiscreteMeasure, Interval, IsotropicStable, Point, PowerOf, SelfSimilar, SkewedStable1D,
                     StableComponents, natural_measure)
from levydim.energy import chi_energy
from levydim.sets import point_mass
from levydim.simulate import (box_dimension, box_dimension_fit, image_points, increments, intersection_probe,
                              mc_chi_energy,
                              positive_stable, rng_for, sample_path, segment_distance, stable_increment)


def _ecf_close(samples, u, expected, k=4.0):
    z = np.exp(1j * samples * u)
    se = np.sqrt(np.var(z.real) / z.size + np.var(z.imag) / z.size)
    assert abs(z.mean() - expected) < k * se


@pytest.mark.parametrize("alpha,skew,scale", [(1.3, 0.5, 1.0), (0.6, -0.8, 2.0), (1.0, 0.7, 2.0), (1.0, 0.7, 1.0),
                                               (1.0, 0.0, 0.5)])
def test_stable_characteristic_function(alpha, skew, scale):
    psi = SkewedStable1D(alpha, skew, scale)
    x = stable_increment(alpha, skew, scale, rng_for(1), 200_000)
    for u in (-0.7, 0.4, 1.3):
        _ecf_close(x, u, np.exp(-psi(np.array([u]))[0]))


def test_gaussian_variance():
    x = stable_increment(2.0, 0.0, 1.5, rng_for(2), 200_000)
    assert np.var(x) == pytest.approx(2 * 1.5 ** 2, rel=0.02)


@pytest.mark.parametrize("a", [0.3, 0.75])
def test_positive_stable_laplace(a):
    s = positive_stable(a, rng_for(3), 200_000)
    assert np.all(s > 0)
    for lam in (0.5, 2.0):
        v = np.exp(-lam * s)
        assert abs(v.mean() - np.exp(-lam ** a)) < 4 * v.std() / np.sqrt(v.size)


@pytest.mark.parametrize("psi", [IsotropicStable(1.4, 2), StableComponents(((1.8, 1), (0.9, 1))),
                                 PowerOf(IsotropicStable(2.0, 2), 0.6)])
def test_increments_characteristic_function(psi):
    gaps = np.full(100_000, 0.5)
    X = increments(psi, gaps, rng_for(4))
    xi = np.array([0.8, -0.5])
    _ecf_close(X @ xi, 1.0, np.exp(-0.5 * psi(xi[None, :])[0]))


@pytest.mark.parametrize("gap", [0.3, 4.0])
def test_skewed_cauchy_increments(gap):
    psi = SkewedStable1D(1.0, 0.8, 1.5)
    X = increments(psi, np.full(100_000, gap), rng_for(6))[:, 0]
    for u in (-0.9, 0.6):
        _ecf_close(X, u, np.exp(-gap * psi(np.array([u]))[0]))


def test_paths_reproducible():
    psi = IsotropicStable(1.5, 1)
    t = np.linspace(0.1, 1, 10)
    a = sample_path(psi, t, seed=7, path=3).values
    np.testing.assert_array_equal(a, sample_path(psi, t, seed=7, path=3).values)
    assert not np.array_equal(a, sample_path(psi, t, seed=7, path=4).values)


def test_box_dimension_of_grid_and_line():
    g = np.linspace(0, 1, 100)
    grid = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
    assert box_dimension(grid) == pytest.approx(2.0, abs=0.05)
    t = np.linspace(0, 1, 5000)
    assert box_dimension(np.stack([t, 2 * t], axis=1)) == pytest.approx(1.0, abs=0.05)


def test_box_dimension_needs_points():
    with pytest.raises(ValueError):
        box_dimension_fit(np.random.default_rng(0).random((100, 2)))


def test_segment_distance_against_sampling():
    rng = np.random.default_rng(5)
    P0, P1, Q0, Q1 = (rng.normal(size=(20, 3)) for _ in range(4))
    s = np.linspace(0, 1, 401)
    for k in range(20):
        a = P0[k] + s[:, None] * (P1[k] - P0[k])
        b = Q0[k] + s[:, None] * (Q1[k] - Q0[k])
        brute = np.min(np.linalg.norm(a[:, None] - b[None], axis=-1))
        d = segment_distance(P0[k:k + 1], P1[k:k + 1], Q0[k:k + 1], Q1[k:k + 1])[0]
        assert d <= brute + 1e-12
        assert d == pytest.approx(brute, abs=5e-3)


def test_mc_chi_energy_single_config():
    psi = IsotropicStable(1.5, 1)
    mu = DiscreteMeasure(np.array([[0.2], [0.5], [1.1]]), np.array([0.5, 0.3, 0.2]), 0.0)
    m, se = mc_chi_energy(psi, mu, np.array([1.2]), n_paths=4000, seed=1)
    assert abs(m - chi_energy(mu, psi, 1.2)) < 4 * se


def test_probe_table_shape():
    tab = intersection_probe(IsotropicStable(2.0, 2), Interval(0, 1), Interval(2, 3), [0.2, 0.1], n_paths=20,
                             level=5)
    assert tab.eps == [0.2, 0.1]
    assert tab.hits[0] >= tab.hits[1]
    assert len(tab.to_rows()) == 2


def test_gaussian_mean():
    x = stable_increment(2.0, 0.0, 1.0, rng_for(9), 100_000)
    assert abs(x.mean()) < 4 * x.std() / np.sqrt(x.size)


def test_cauchy_quantiles():
    x = stable_increment(1.0, 0.0, 1.0, rng_for(10), 100_000)
    q1, med, q3 = np.quantile(x, [0.25, 0.5, 0.75])
    assert abs(med) < 0.02
    assert q3 - q1 == pytest.approx(2.0, rel=0.02)


@pytest.mark.parametrize("u", [0.5, 1.0, 2.0])
def test_symmetric_stable_cf(u):
    x = stable_increment(1.5, 0.0, 1.0, rng_for(11), 100_000)
    _ecf_close(x, u, np.exp(-u ** 1.5), k=3.0)


def test_increments_uncorrelated():
    psi = IsotropicStable(2.0, 1)
    n = 10_000
    X = np.array([sample_path(psi, [0.5, 1.0, 1.5], seed=3, path=p).values[:, 0] for p in range(n)])
    a, b = X[:, 1] - X[:, 0], X[:, 2] - X[:, 1]
    assert abs(np.corrcoef(a, b)[0, 1]) < 3 / np.sqrt(n)


def test_path_marginal_cf():
    psi = IsotropicStable(1.5, 2)
    t = 0.7
    X = increments(psi, np.full(100_000, t), rng_for(12))
    for xi in np.random.default_rng(1).normal(size=(5, 2)):
        _ecf_close(X @ xi, 1.0, np.exp(-t * psi(xi[None, :])[0].real), k=3.0)


def test_subordinated_brownian_cf():
    psi = PowerOf(IsotropicStable(2.0, 2), 0.5)
    X = increments(psi, np.full(100_000, 0.8), rng_for(13))
    xi = np.array([0.6, -0.9])
    _ecf_close(X @ xi, 1.0, np.exp(-0.8 * np.linalg.norm(xi)), k=3.0)


def test_image_of_single_time():
    psi = IsotropicStable(1.5, 2)
    pts = image_points(psi, Point(0.4), 0, seed=5)
    assert pts.shape == (1, 2)
    np.testing.assert_array_equal(pts[0], sample_path(psi, [0.4], seed=5).values[0])


def test_clouds_nested():
    psi = IsotropicStable(1.5, 2)
    G = SelfSimilar(2, 1 / 3)
    coarse = image_points(psi, G, 4, seed=2, fine_level=10)
    fine = image_points(psi, G, 6, seed=2, fine_level=10)
    assert {tuple(p) for p in coarse} <= {tuple(p) for p in fine}


def test_cloud_diameter_bounded():
    psi = IsotropicStable(1.5, 2)
    diam = [np.ptp(image_points(psi, Interval(0, 1), L, seed=4, fine_level=14), axis=0).max() for L in (6, 10, 14)]
    assert np.all(np.diff(diam) >= 0)
    assert diam[-1] < 2 * diam[0] + 1


def test_box_dimension_reference_sets():
    rng = np.random.default_rng(0)
    t = rng.uniform(0, 1, 10_000)
    assert box_dimension(np.column_stack([t, 0.5 * t])) == pytest.approx(1.0, abs=0.1)
    C = SelfSimilar(2, 1 / 3)
    assert box_dimension(natural_measure(C, 10).atoms) == pytest.approx(np.log(2) / np.log(3), abs=0.07)
    with pytest.raises(ValueError):
        box_dimension(natural_measure(C, 8).atoms)


def test_mc_chi_energy_trivial_cases():
    psi = IsotropicStable(1.5, 1)
    mu = natural_measure(Interval(0, 1), 4)
    assert mc_chi_energy(psi, mu, np.array([0.0]), n_paths=10) == (1.0, 0.0)
    m, se = mc_chi_energy(psi, point_mass(0.3), np.array([2.0]), n_paths=50)
    assert m == pytest.approx(1.0) and se == pytest.approx(0.0, abs=1e-12)


def test_mc_chi_energy_uniform_measure():
    psi = IsotropicStable(1.5, 1)
    mu = natural_measure(Interval(0, 1), 6)
    m, se = mc_chi_energy(psi, mu, np.array([1.0]), n_paths=10_000, seed=0)
    assert abs(m - 2 * np.exp(-1)) < 3 * se


def test_simulation_deterministic():
    psi = StableComponents(((1.8, 1), (0.9, 1)))
    a = image_points(psi, Interval(0, 1), 8, seed=21)
    b = image_points(psi, Interval(0, 1), 8, seed=21)
    assert a.tobytes() == b.tobytes()
