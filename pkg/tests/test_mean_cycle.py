from fractions import Fraction

import pytest

from nested_cubes.algorithms.utils.mean_cycle import GeometricMean, optimal_mean_cycle


def test_two_cycle():
    best = optimal_mean_cycle([(0, 1, 2), (1, 0, 8)], 0)
    assert best.same_value(GeometricMean(Fraction(4), 1))


def test_maximum_and_minimum():
    edges = [(0, 0, 3), (0, 1, 2), (1, 0, 8)]
    assert optimal_mean_cycle(edges, 0, maximize=True).same_value(GeometricMean(Fraction(4), 1))
    assert optimal_mean_cycle(edges, 0, maximize=False).same_value(GeometricMean(Fraction(3), 1))


def test_fractional_weights():
    edges = [(0, 1, Fraction(1, 2)), (1, 0, Fraction(1, 8)), (1, 1, Fraction(1, 3))]
    best = optimal_mean_cycle(edges, 0, maximize=True)
    assert best.same_value(GeometricMean(Fraction(1, 3), 1))
    worst = optimal_mean_cycle(edges, 0, maximize=False)
    assert worst.same_value(GeometricMean(Fraction(1, 16), 2))


def test_only_reachable_cycles_count():
    edges = [(0, 1, 2), (1, 1, 5), (2, 2, 100)]
    assert optimal_mean_cycle(edges, 0).same_value(GeometricMean(Fraction(5), 1))
    with pytest.raises(ValueError, match="no cycle"):
        optimal_mean_cycle([(0, 1, 2), (2, 2, 100)], 0)


def test_rejects_non_positive_weights():
    with pytest.raises(ValueError, match="positive"):
        optimal_mean_cycle([(0, 0, 0)], 0)


def test_ordering():
    assert GeometricMean(Fraction(3), 1) < GeometricMean(Fraction(16), 2)
    assert GeometricMean(Fraction(16), 2) <= GeometricMean(Fraction(4), 1)
    assert GeometricMean(Fraction(2), 1).reciprocal().same_value(GeometricMean(Fraction(1, 4), 2))
