import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from nested_cubes.algorithms.utils.cubes import build_cube_tree, unfold_spec
from nested_cubes.algorithms.utils.dimension import (
    MEASURE_ASSOUAD,
    MEASURE_LOWER,
    SET_ASSOUAD,
    SET_LOWER,
    boundary_fraction_value,
    doubling_constant,
    exact_dimension_spec,
    measure_ball_estimate,
    measure_chain_estimate,
    set_assouad_estimate,
    set_lower_estimate,
)
from nested_cubes.algorithms.utils.errors import EtaInvalid, POutOfRange, TreeTooShallow
from nested_cubes.algorithms.utils.generators import (
    boundary_rich_spec,
    cantor_points,
    grid_points,
    triadic_grid,
    uniform_spec,
)
from nested_cubes.algorithms.utils.measures import build_counting_measure, build_mu_p
from nested_cubes.algorithms.utils.metric import ScaleWindow

LOG2_LOG3 = math.log(2) / math.log(3)


def test_exact_triadic(triadic):
    value = exact_dimension_spec(triadic, Fraction(1, 9), kind=MEASURE_ASSOUAD)
    assert value.rational == 2
    assert float(value) == 2.0
    assert exact_dimension_spec(triadic, kind=SET_ASSOUAD).rational == 1
    assert exact_dimension_spec(triadic, kind=SET_LOWER).rational == 1


def test_exact_triadic_lower(triadic):
    value = exact_dimension_spec(triadic, Fraction(1, 4), kind=MEASURE_LOWER)
    assert value.value == pytest.approx(LOG2_LOG3)
    assert value.rational is None


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_exact_matches_log_p(triadic, k):
    p = Fraction(1, 3**k)
    assert exact_dimension_spec(triadic, p, kind=MEASURE_ASSOUAD).value == pytest.approx(k)


@pytest.mark.parametrize(
    "p", [Fraction(1, 3), Fraction(1, 4), Fraction(1, 9), Fraction(1, 27), Fraction(1, 20)]
)
def test_exact_triadic_is_log_p(triadic, p):
    value = exact_dimension_spec(triadic, p, kind=MEASURE_ASSOUAD)
    assert value.value == pytest.approx(-math.log(p) / math.log(3))


def test_exact_uniform_binary():
    spec = uniform_spec(2, Fraction(1, 4))
    value = exact_dimension_spec(spec, Fraction(1, 8), kind=MEASURE_ASSOUAD)
    assert value.rational == Fraction(3, 2)


def test_exact_with_eta():
    spec = uniform_spec(4, Fraction(1, 8), J=2)
    value = exact_dimension_spec(spec, Fraction(1, 8), [Fraction(1, 4), Fraction(3, 4)], MEASURE_ASSOUAD)
    # boundary steps pass 1/8: one factor of 8 per level of 1/8
    assert value.rational == 1
    lower = exact_dimension_spec(spec, Fraction(1, 8), [Fraction(1, 4), Fraction(3, 4)], MEASURE_LOWER)
    assert lower.value == pytest.approx(math.log(Fraction(16, 9)) / math.log(8))


def test_exact_parameter_errors(triadic):
    with pytest.raises(POutOfRange):
        exact_dimension_spec(triadic, Fraction(1, 2))
    with pytest.raises(EtaInvalid):
        exact_dimension_spec(triadic, Fraction(1, 4), [Fraction(1, 2), Fraction(1, 2)])


def test_boundary_fraction(triadic, chain_spec):
    assert boundary_fraction_value(triadic) == 1
    assert boundary_fraction_value(chain_spec) == 0
    assert boundary_fraction_value(boundary_rich_spec(1, 2, 2, Fraction(1, 8))) == Fraction(1, 2)
    assert boundary_fraction_value(boundary_rich_spec(2, 3, 3, Fraction(1, 8))) == Fraction(2, 3)


def test_boundary_rich_set_dimension():
    spec = boundary_rich_spec(1, 2, 2, Fraction(1, 8))
    assert exact_dimension_spec(spec, kind=SET_ASSOUAD).rational == Fraction(1, 6)


def test_chain_estimate(triadic):
    tree = unfold_spec(triadic, 10)
    assert measure_chain_estimate(tree, build_mu_p(tree, Fraction(1, 9))).value == pytest.approx(2)
    assert measure_chain_estimate(tree, build_mu_p(tree, Fraction(1, 3))).value == pytest.approx(1)
    lower = measure_chain_estimate(tree, build_mu_p(tree, Fraction(1, 4)), kind="lower")
    assert lower.value == pytest.approx(LOG2_LOG3)


def test_chain_estimate_evidence(triadic):
    tree = unfold_spec(triadic, 4)
    report = measure_chain_estimate(tree, build_mu_p(tree, Fraction(1, 9)))
    assert report.method == "chain_sup"
    evidence = report.evidence[0]
    assert len(evidence.descriptor["chain"]) == evidence.gap + 1
    assert set(evidence.descriptor["kinds"]) == {"boundary"}


def test_chain_estimate_single_point(chain_spec):
    tree = unfold_spec(chain_spec, 5)
    assert measure_chain_estimate(tree, build_mu_p(tree, 1)).value == 0


def test_chain_estimate_too_shallow(triadic):
    tree = unfold_spec(triadic, 2)
    with pytest.raises(TreeTooShallow):
        measure_chain_estimate(tree, build_mu_p(tree, Fraction(1, 4)), m_min=3)


def test_set_assouad_cantor():
    space = cantor_points(8)
    window = ScaleWindow(Fraction(1, 3**7), 1)
    report = set_assouad_estimate(space, window, sample_budget=16, ratio=Fraction(1, 3))
    assert report.value == pytest.approx(LOG2_LOG3, abs=0.1)
    assert report.kind == SET_ASSOUAD
    assert report.evidence


@pytest.mark.slow
def test_set_assouad_line_window():
    report = set_assouad_estimate(grid_points(1, 1024), ScaleWindow(Fraction(1, 512), 1))
    assert 0.9 <= report.value <= 1.1


@pytest.mark.slow
def test_set_assouad_cantor_window():
    report = set_assouad_estimate(cantor_points(8), ScaleWindow(Fraction(1, 3**8), 1))
    assert report.value == pytest.approx(LOG2_LOG3, abs=0.1)


def test_set_lower_line():
    space = grid_points(1, 1025)
    window = ScaleWindow(Fraction(1, 512), Fraction(1, 2))
    report = set_lower_estimate(space, window, sample_budget=16)
    assert report.value == pytest.approx(1, abs=0.15)


def test_set_estimate_singleton(line_space):
    report = set_assouad_estimate(line_space(0), ScaleWindow(Fraction(1, 4), 1))
    assert report.value == pytest.approx(0)
    assert "degenerate" in report.flags


def test_set_lower_two_points(line_space):
    report = set_lower_estimate(line_space(0, 1), ScaleWindow(Fraction(1, 8), Fraction(1, 2)))
    assert report.value == pytest.approx(0)
    assert "degenerate" in report.flags


def test_window_below_resolution(line_space):
    report = set_assouad_estimate(line_space(0, 1, 2), ScaleWindow(Fraction(1, 8), 1))
    assert "below_resolution" in report.flags


def test_ball_estimate_agrees_with_chains():
    space, tree = triadic_grid(3)
    mu = build_mu_p(tree, Fraction(1, 9))
    ball = measure_ball_estimate(space, tree, mu, ScaleWindow(Fraction(1, 27), Fraction(1, 3)))
    chain = measure_chain_estimate(tree, mu)
    assert chain.value == pytest.approx(2)
    # the only pair two levels apart is (1/3, 1/27); points 7 and 19 give 641/9
    assert ball.value == pytest.approx(math.log(641 / 9) / math.log(9))
    assert ball.evidence[0].descriptor["x"] in (7, 19)
    assert ball.evidence[0].descriptor["r"] == "1/27"
    assert abs(ball.value - chain.value) <= 0.35
    assert ball.flags == ()


@pytest.mark.slow
def test_ball_estimate_agrees_with_chains_deep():
    space, tree = triadic_grid(6)
    mu = build_mu_p(tree, Fraction(1, 9))
    ball = measure_ball_estimate(space, tree, mu, ScaleWindow(Fraction(1, 729), Fraction(1, 3)))
    chain = measure_chain_estimate(tree, mu)
    assert abs(ball.value - chain.value) <= 0.35


def test_ball_estimate_short_window():
    space, tree = triadic_grid(3)
    mu = build_mu_p(tree, Fraction(1, 9))
    report = measure_ball_estimate(space, tree, mu, ScaleWindow(Fraction(1, 9), Fraction(1, 3)))
    assert "short_window" in report.flags
    # points 8 and 18: mu(B(x, 1/3)) / mu(B(x, 1/9)) = 648/79
    assert report.value == pytest.approx(math.log(648 / 79) / math.log(3))


def test_ball_estimate_counting_measure():
    space, tree = triadic_grid(4)
    mu = build_counting_measure(tree)
    report = measure_ball_estimate(
        space, tree, mu, ScaleWindow(Fraction(1, 81), Fraction(1, 3)), ratio=Fraction(1, 3)
    )
    assert report.value == pytest.approx(1, abs=0.15)
    assert report.method == "ball_ratio"


def _brute_doubling(space):
    best = 1
    ids = range(space.n)
    r = Fraction(1)
    while r >= space.min_positive_distance / 2:
        for x in ids:
            ball = [y for y in ids if space.distance(x, y) <= 2 * r]
            for k in range(1, len(ball) + 1):
                if any(
                    all(any(space.distance(c, y) <= r for c in centers) for y in ball)
                    for centers in itertools.combinations(ids, k)
                ):
                    best = max(best, k)
                    break
        r /= 2
    return best


def test_doubling_constant_exact():
    space = grid_points(1, 9)
    result = doubling_constant(space)
    assert result.form == "set"
    assert result.value == _brute_doubling(space)
    assert result.flags == ()


def test_doubling_constant_singleton(line_space):
    assert doubling_constant(line_space(0)).value == 1


def test_doubling_constant_measure():
    space = grid_points(1, 9)
    tree = build_cube_tree(space, Fraction(1, 8), 2, 4)
    result = doubling_constant(space, tree, build_counting_measure(tree))
    assert result.form == "measure"
    assert isinstance(result.value, Fraction)
    assert 1 < result.value <= 9


def _assert_chains_match_exact(spec, depth, draws, seed):
    tree = unfold_spec(spec, depth)
    M = spec.max_branching
    rng = np.random.default_rng(seed)
    for num in rng.integers(1, 100, size=draws):
        p = Fraction(int(num), 100 * M)
        mu = build_mu_p(tree, p)
        for kind, exact_kind in (("assouad", MEASURE_ASSOUAD), ("lower", MEASURE_LOWER)):
            chains = measure_chain_estimate(tree, mu, m_min=depth, kind=kind)
            exact = exact_dimension_spec(spec, p, kind=exact_kind)
            assert chains.value == pytest.approx(exact.value, abs=1e-9)


@pytest.mark.parametrize(
    ("spec", "depth"),
    [
        (uniform_spec(3, Fraction(1, 3)), 10),
        (uniform_spec(2, Fraction(1, 4)), 12),
        (uniform_spec(4, Fraction(1, 8)), 6),
        (boundary_rich_spec(1, 2, 2, Fraction(1, 8)), 12),
    ],
)
def test_exact_matches_whole_chains(spec, depth):
    _assert_chains_match_exact(spec, depth, 5, depth)


@pytest.mark.slow
@pytest.mark.parametrize(
    ("spec", "depth"),
    [
        (uniform_spec(3, Fraction(1, 3)), 12),
        (uniform_spec(2, Fraction(1, 4)), 12),
        (uniform_spec(4, Fraction(1, 8)), 8),
        (boundary_rich_spec(1, 2, 2, Fraction(1, 8)), 12),
    ],
)
def test_exact_matches_whole_chains_battery(spec, depth):
    _assert_chains_match_exact(spec, depth, 20, 2024)
