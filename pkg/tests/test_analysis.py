import math
from fractions import Fraction

import numpy as np
import pytest

from nested_cubes.algorithms.utils.analysis import (
    assouad_from_set_bound,
    binom_bound_check,
    blowup_check,
    boundary_chain_search,
    check_key_estimate,
    continuity_modulus,
    dimension_continuity_check,
    ivp_solve,
    kappa,
    lower_blowdown_check,
    proof_bound,
    sweep,
)
from nested_cubes.algorithms.utils.cubes import unfold_spec
from nested_cubes.algorithms.utils.dimension import (
    MEASURE_ASSOUAD,
    MEASURE_LOWER,
    SET_ASSOUAD,
    exact_dimension_spec,
)
from nested_cubes.algorithms.utils.errors import (
    NotApplicable,
    ParamsOutOfRange,
    TargetBelowSetDimension,
    TargetNotBracketed,
)
from nested_cubes.algorithms.utils.generators import boundary_rich_spec, uniform_spec


@pytest.fixture()
def alternating():
    """Boundary steps are possible on every other level only"""
    return boundary_rich_spec(1, 2, 2, Fraction(1, 8))


def test_continuity_modulus():
    assert continuity_modulus(Fraction(1, 4), Fraction(1, 3), 3, Fraction(1, 3)) == pytest.approx(
        math.log(1.5) / math.log(3)
    )
    assert continuity_modulus(Fraction(1, 9), Fraction(1, 3), 3, Fraction(1, 3)) == pytest.approx(1)
    assert continuity_modulus(Fraction(1, 5), Fraction(1, 5), 3, Fraction(1, 3)) == 0
    with pytest.raises(ParamsOutOfRange):
        continuity_modulus(Fraction(1, 4), Fraction(1, 2), 3, Fraction(1, 3))


def test_key_estimate(triadic):
    tree = unfold_spec(triadic, 8)
    report = check_key_estimate(tree, Fraction(1, 4), Fraction(1, 3))
    assert report.passed
    assert report.details["chains"] > 0
    assert check_key_estimate(tree, Fraction(1, 5), Fraction(1, 5)).passed


def test_key_estimate_four_children():
    tree = unfold_spec(uniform_spec(4, Fraction(1, 8)), 6)
    assert check_key_estimate(tree, Fraction(1, 16), Fraction(1, 8)).passed


@pytest.mark.slow
@pytest.mark.parametrize(
    ("spec", "depth"), [(uniform_spec(3, Fraction(1, 3)), 8), (uniform_spec(4, Fraction(1, 8)), 6)]
)
def test_key_estimate_seeded_pairs(spec, depth):
    tree = unfold_spec(spec, depth)
    M = spec.max_branching
    rng = np.random.default_rng(depth)
    for a, b in rng.integers(1, 100, size=(10, 2)):
        report = check_key_estimate(tree, Fraction(int(a), 100 * M), Fraction(int(b), 100 * M))
        assert report.passed, report.witness


def test_dimension_continuity(triadic):
    assert dimension_continuity_check(triadic, [(Fraction(1, 4), Fraction(1, 3))]).passed

    rng = np.random.default_rng(0)
    pairs = [
        (Fraction(int(a), 3000), Fraction(int(b), 3000))
        for a, b in rng.integers(1, 1001, size=(100, 2))
    ]
    report = dimension_continuity_check(triadic, pairs, threads=2)
    assert report.passed
    assert len(report.rows) == 200


def test_boundary_chain_search(triadic, chain_spec, alternating):
    profile, beta = boundary_chain_search(unfold_spec(triadic, 6), 4)
    assert beta == 1
    assert profile.N == 4
    assert profile.central_set == frozenset()

    _, beta = boundary_chain_search(unfold_spec(chain_spec, 6), 4)
    assert beta == 0

    profile, beta = boundary_chain_search(unfold_spec(alternating, 6), 6)
    assert beta == Fraction(1, 2)
    assert profile.boundary_set == frozenset({1, 3, 5})


def test_binom_bound(chain_spec, alternating):
    report = binom_bound_check(chain_spec, 0, 5)
    assert report.passed
    assert report.details["offspring"] == 1

    report = binom_bound_check(alternating, Fraction(1, 2), 6)
    assert report.passed
    assert report.details["offspring"] == 8
    assert report.details["binomial"] == 20


def test_binom_bound_not_applicable(triadic):
    with pytest.raises(NotApplicable):
        binom_bound_check(triadic, Fraction(1, 2), 4)
    report = binom_bound_check(triadic, Fraction(1, 2), 4, admissible_only=True)
    assert report.details["admissible_only"]


def test_kappa():
    assert kappa(0, Fraction(1, 3)) == 0
    assert kappa(1, Fraction(1, 3)) == 0
    assert kappa(Fraction(1, 2), Fraction(1, 3)) == pytest.approx(math.log(2) / math.log(3))
    values = [kappa(b, Fraction(1, 3)) for b in np.linspace(0, 0.5, 100)]
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_assouad_from_set_bound(alternating):
    bound = assouad_from_set_bound(alternating)
    assert bound == pytest.approx(0.5)
    assert bound >= exact_dimension_spec(alternating, kind=SET_ASSOUAD).value
    with pytest.raises(NotApplicable):
        assouad_from_set_bound(alternating, Fraction(1, 4))


def test_proof_bound(triadic):
    # with the least admissible K the bound is log_delta p itself
    assert proof_bound(triadic, Fraction(1, 9)) == pytest.approx(2)
    assert proof_bound(triadic, Fraction(1, 9), K=3) >= 2


def test_blowup(triadic, alternating, chain_spec):
    report = blowup_check(triadic, [Fraction(1, 9), Fraction(1, 81)])
    assert report.passed
    assert [r["value"] for r in report.rows] == pytest.approx([2, 4])

    report = blowup_check(alternating, [Fraction(1, 64), Fraction(1, 4096)])
    assert report.passed
    assert report.details["beta_hat"] == "1/2"

    with pytest.raises(NotApplicable):
        blowup_check(chain_spec, [Fraction(1, 2)])


def test_blowup_powers_of_three(triadic):
    report = blowup_check(triadic, [Fraction(1, 3**k) for k in range(1, 9)])
    assert report.passed
    assert [r["value"] for r in report.rows] == list(range(1, 9))


def test_lower_blowdown(triadic):
    report = lower_blowdown_check(triadic, [Fraction(1, 4), Fraction(1, 9), Fraction(1, 100)])
    assert report.passed
    centrals = [r["central"] for r in report.rows]
    assert centrals == sorted(centrals, reverse=True)


@pytest.mark.parametrize("s", [1.1, 1.5, 2.0, 3.0])
def test_solve_assouad(triadic, s):
    result = ivp_solve(triadic, s, MEASURE_ASSOUAD, 1e-6)
    assert abs(float(result.p) - 3**-s) < 1e-6
    assert abs(result.achieved - s) < 1e-6
    assert result.kind == MEASURE_ASSOUAD


def test_solve_at_the_set_dimension(triadic):
    result = ivp_solve(triadic, 1.0)
    assert result.p == Fraction(1, 3)
    assert result.iterations == 0


def test_solve_below_set_dimension(triadic):
    with pytest.raises(TargetBelowSetDimension):
        ivp_solve(triadic, 0.9)


@pytest.mark.parametrize("s", [0.3, 0.5, 0.9])
def test_solve_lower(triadic, s):
    result = ivp_solve(triadic, s, MEASURE_LOWER, 1e-6)
    assert abs(float(result.p) - (1 - 3**-s) / 2) < 1e-6
    assert abs(result.achieved - s) < 1e-6


def test_solve_not_bracketed(triadic):
    with pytest.raises(TargetNotBracketed) as info:
        ivp_solve(triadic, 1.5, MEASURE_LOWER)
    low, high = info.value.realized_range
    assert high == pytest.approx(1)
    assert low < high


def test_solve_lower_moves_eta():
    spec = uniform_spec(4, Fraction(1, 8), J=2)
    # uniform eta keeps the lower dimension within [1/3, 2/3] for every p
    result = ivp_solve(spec, 0.2, MEASURE_LOWER, 1e-6)
    assert abs(result.achieved - 0.2) < 1e-6
    assert sum(result.eta) == 1
    assert result.eta[0] > Fraction(1, 2)


def test_sweep(triadic):
    grid = [Fraction(1, 20), Fraction(1, 10), Fraction(1, 5), Fraction(1, 3)]
    rows = sweep(triadic, grid)
    assert [r.p for r in rows] == grid
    for row in rows:
        assert row.dim_assouad == pytest.approx(-math.log(row.p) / math.log(3))
        assert row.dim_lower <= row.dim_assouad
    assert rows[-1].dim_assouad == pytest.approx(1)
    assert rows[-1].dim_lower == pytest.approx(1)
