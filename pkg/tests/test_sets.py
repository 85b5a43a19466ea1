import math

import numpy as np
import pytest
from scipy import integrate

from levydim import (DescriptorError, FiniteUnion, Interval, Point, Product, SelfSimilar, analytic_dimension,
                     natural_measure, set_from_dict)
from levydim.sets import disjoint, point_mass, product_measure, refine_weights, set_fourier


def test_cantor_cells():
    C = SelfSimilar(2, 1 / 3)
    lefts, sides, w = C.cells(3)
    assert len(lefts) == 8
    np.testing.assert_allclose(sides, [1 / 27])
    np.testing.assert_allclose(w.sum(), 1.0)
    np.testing.assert_allclose(np.sort(lefts[:, 0])[:2], [0.0, 2 / 27])


def test_analytic_dimensions():
    assert analytic_dimension(Point(0.5)) == 0
    assert analytic_dimension(Interval(0, 2)) == 1
    assert analytic_dimension(SelfSimilar(2, 1 / 3)) == pytest.approx(math.log(2) / math.log(3))
    assert analytic_dimension(Product((Interval(0, 1), SelfSimilar(2, 1 / 3)))) == pytest.approx(
        1 + math.log(2) / math.log(3))
    assert analytic_dimension(FiniteUnion((Point(3.0), SelfSimilar(3, 1 / 4)))) == pytest.approx(
        math.log(3) / math.log(4))


def test_natural_measure_normalised():
    for s in [Interval(0, 1), SelfSimilar(3, 0.2), Product((Interval(0, 1), Interval(2, 3)))]:
        mu = natural_measure(s, 4)
        assert mu.total == pytest.approx(1.0)


def test_interval_fourier_closed_form():
    xi = np.array([0.3, 2.0, 17.0])
    expect = (np.exp(2j * xi) - np.exp(1j * xi)) / (1j * xi)
    np.testing.assert_allclose(set_fourier(Interval(1, 2), 0, xi), expect, rtol=1e-12)


def test_cantor_fourier_against_quadrature():
    # level-2 natural measure has density 1/|cells| on the cells
    C = SelfSimilar(2, 1 / 3)
    lefts, sides, _ = C.cells(2)
    h = float(sides[0])
    xi = 5.3
    total = sum(integrate.quad(lambda t: math.cos(xi * t), a, a + h)[0] + 1j *
                integrate.quad(lambda t: math.sin(xi * t), a, a + h)[0] for a in lefts[:, 0])
    assert set_fourier(C, 2, np.array([xi]))[0] == pytest.approx(total / (4 * h), rel=1e-10)


def test_descriptor_round_trip():
    for s in [Interval(0.5, 2.0), SelfSimilar(3, 0.25, 1.0, 2.0), Point(0.3),
              Product((Interval(0, 1), Interval(2, 3)))]:
        assert set_from_dict(s.to_dict()).to_dict() == s.to_dict()


def test_unknown_kind_names_field():
    with pytest.raises(DescriptorError) as info:
        set_from_dict({"kind": "Blob", "params": {}})
    assert info.value.field == "set.kind"


def test_disjoint():
    assert disjoint(Interval(0, 1), Interval(2, 3))
    assert not disjoint(Interval(0, 1), Interval(0.5, 3))
    assert disjoint(SelfSimilar(2, 1 / 3), Interval(0.4, 0.6))


def test_refine_weights_preserves_coarse_mass():
    C = SelfSimilar(2, 1 / 3)
    mu = refine_weights(C, 2, 5, [0.1, 0.2, 0.3, 0.4])
    assert mu.size == 32
    np.testing.assert_allclose(mu.weights.reshape(4, 8).sum(axis=1), [0.1, 0.2, 0.3, 0.4])


def test_reference_measures():
    mu = natural_measure(SelfSimilar(2, 1 / 3), 2)
    assert mu.size == 4 and mu.cell == pytest.approx(1 / 9)
    np.testing.assert_allclose(mu.weights, 0.25)
    mu = natural_measure(Interval(0, 1), 3)
    np.testing.assert_allclose(mu.atoms[:, 0], (np.arange(8) + 0.5) / 8)
    np.testing.assert_allclose(mu.weights, 1 / 8)
    mu = natural_measure(Product((Interval(0, 1), Interval(2, 3))), 2)
    assert mu.size == 16
    np.testing.assert_allclose(mu.weights, 1 / 16)


def test_product_measures():
    d = product_measure(point_mass(0.3), point_mass(0.8))
    assert d.size == 1 and d.weights[0] == 1
    np.testing.assert_allclose(d.atoms[0], [0.3, 0.8])
    u = natural_measure(Interval(0, 1), 2)
    assert product_measure(u, u).size == 16
    c = natural_measure(SelfSimilar(2, 1 / 3), 2)
    cc = product_measure(c, c)
    assert cc.size == 16
    np.testing.assert_allclose(cc.sides, 1 / 9)
    np.testing.assert_allclose(cc.weights, 1 / 16)


def test_refinement_keeps_mass_and_barycenter():
    C = SelfSimilar(2, 1 / 3)
    coarse = natural_measure(C, 3)
    fine = refine_weights(C, 3, 7, coarse.weights)
    assert fine.total == pytest.approx(1.0)
    np.testing.assert_allclose(fine.barycenter(), coarse.barycenter(), atol=1e-12)
