from fractions import Fraction

import numpy as np
import pytest

from nested_cubes.algorithms.utils.cubes import CubeKind, CubeTree, build_cube_tree, unfold_spec
from nested_cubes.algorithms.utils.errors import (
    EtaInvalid,
    NotEnoughInteriorChildren,
    POutOfRange,
    SourceMismatch,
)
from nested_cubes.algorithms.utils.generators import grid_points, triadic_grid, uniform_spec
from nested_cubes.algorithms.utils.measures import (
    assign_central_slots,
    ball_mass,
    build_counting_measure,
    build_mu_p,
    build_mu_p_eta,
    leaf_of_point,
    select_central_subcubes,
)
from nested_cubes.algorithms.utils.metric import scale_index


def _level_sums(tree, mu):
    return [sum((mu.mass(c) for c in range(*tree.level_slice(k).indices(tree.n_cubes))), Fraction(0))
            for k in range(tree.depth + 1)]


def test_mu_p_triadic(triadic):
    tree = unfold_spec(triadic, 2)
    mu = build_mu_p(tree, Fraction(1, 4))
    assert [mu.mass(c) for c in tree.children(0)] == [Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)]
    assert mu.mass(tree.children(2)[1]) == Fraction(1, 4)
    assert _level_sums(tree, mu) == [1, 1, 1]


def test_mu_p_conservation():
    tree = unfold_spec(uniform_spec(4, Fraction(1, 8), J=2), 3)
    mu = build_mu_p_eta(tree, Fraction(1, 5), [Fraction(1, 3), Fraction(2, 3)])
    assert _level_sums(tree, mu) == [1, 1, 1, 1]
    for q in np.flatnonzero(tree.child_count > 0):
        assert sum(mu.mass(c) for c in tree.children(int(q))) == mu.mass(int(q))


def test_mu_p_eta_slots():
    tree = unfold_spec(uniform_spec(4, Fraction(1, 8), J=2), 1)
    mu = build_mu_p_eta(tree, Fraction(1, 8), [Fraction(1, 4), Fraction(3, 4)])
    # boundary, slot 1, slot 2, boundary
    assert mu.masses[1:] == [Fraction(1, 8), Fraction(3, 16), Fraction(9, 16), Fraction(1, 8)]
    assert mu.label == "mu_p_eta"


def test_p_at_the_top_of_the_range(triadic):
    tree = unfold_spec(triadic, 3)
    mu = build_mu_p(tree, Fraction(1, 3))
    leaves = [mu.mass(int(c)) for c in np.flatnonzero(tree.is_leaf)]
    assert set(leaves) == {Fraction(1, 27)}


def test_neighbouring_masses_near_the_top(triadic):
    tree = unfold_spec(triadic, 1)
    mu = build_mu_p(tree, Fraction(1, 3) - Fraction(1, 10**6))
    masses = [mu.mass(c) for c in tree.children(0)]
    assert max(masses) / min(masses) < 1 + Fraction(1, 1000)


def test_invalid_parameters(triadic):
    tree = unfold_spec(triadic, 1)
    with pytest.raises(POutOfRange):
        build_mu_p(tree, Fraction(1, 2))
    with pytest.raises(POutOfRange):
        build_mu_p(tree, 0)
    with pytest.raises(EtaInvalid):
        build_mu_p_eta(tree, Fraction(1, 4), [Fraction(2, 3), Fraction(1, 2)])


def test_counting_measure():
    space, tree = triadic_grid(2)
    mu = build_counting_measure(tree)
    assert mu.mass(0) == 1
    assert all(mu.mass(int(c)) == Fraction(1, 9) for c in np.flatnonzero(tree.is_leaf))
    with pytest.raises(SourceMismatch):
        build_counting_measure(unfold_spec(uniform_spec(3, Fraction(1, 3)), 1))


def test_ball_mass():
    space, tree = triadic_grid(3)
    mu = build_mu_p(tree, Fraction(1, 4))
    assert ball_mass(space, tree, mu, tree.origin, Fraction(1, 9)) == Fraction(7, 16)
    assert ball_mass(space, tree, mu, tree.origin, 1) == 1


@pytest.mark.slow
def test_ball_contains_its_cube():
    space, tree = triadic_grid(6)
    mu = build_mu_p(tree, Fraction(1, 9))
    owner = leaf_of_point(tree)
    for x in range(0, space.n, 91):
        for k in range(1, 6):
            t = Fraction(1, 3**k)
            level = scale_index(t, tree.delta)
            cube = int(owner[x])
            while tree.level[cube] > level:
                cube = int(tree.parent[cube])
            assert ball_mass(space, tree, mu, x, t) >= mu.mass(cube)


def _two_children_tree():
    """A cube whose second child sits 1/100 away from the next point outside it"""
    return CubeTree.from_json(
        {
            "delta": {"num": 1, "den": 8},
            "scale": 1,
            "source": "metric",
            "J": 1,
            "origin": 0,
            "unit_cube": 0,
            "points": [0, 1, 2],
            "cubes": [
                {"id": 0, "k": 0, "center": 0, "parent": None, "kind": None,
                 "children": [1, 2], "members": [0, 1, 2]},
                {"id": 1, "k": 1, "center": 0, "parent": 0, "kind": "central", "slot": 1,
                 "children": [3, 4], "members": [0, 1]},
                {"id": 2, "k": 1, "center": 2, "parent": 0, "kind": "boundary",
                 "children": [5], "members": [2]},
                {"id": 3, "k": 2, "center": 0, "parent": 1, "kind": "central", "slot": 1,
                 "children": [], "members": [0]},
                {"id": 4, "k": 2, "center": 1, "parent": 1, "kind": "boundary",
                 "children": [], "members": [1]},
                {"id": 5, "k": 2, "center": 2, "parent": 2, "kind": "central", "slot": 1,
                 "children": [], "members": [2]},
            ],
        }
    )


def test_select_central_subcubes(line_space):
    space = line_space(0, Fraction(1, 10), Fraction(11, 100))
    tree = _two_children_tree()
    assert select_central_subcubes(tree, space, 1, 1) == [3]
    with pytest.raises(NotEnoughInteriorChildren):
        select_central_subcubes(tree, space, 1, 2)


def test_select_on_the_top_cube():
    space, tree = triadic_grid(1)
    assert select_central_subcubes(tree, space, 0, 1) == [2]
    assert select_central_subcubes(tree, space, 0, 3)[0] == 2


def test_assign_central_slots():
    space, tree = triadic_grid(2)
    relabeled = assign_central_slots(tree, space, 3)
    assert relabeled.J == 3
    for q in np.flatnonzero(relabeled.child_count > 0):
        kids = list(relabeled.children(int(q)))
        assert sorted(int(relabeled.slot[c]) for c in kids) == [1, 2, 3]
        assert all(relabeled.kind[c] == CubeKind.CENTRAL for c in kids)
    mu = build_mu_p_eta(relabeled, Fraction(1, 3), [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)])
    assert mu.mass(0) == 1


def test_counting_measure_on_a_built_tree():
    space = grid_points(1, 27)
    tree = build_cube_tree(space, Fraction(1, 9), 2, 13)
    mu = build_counting_measure(tree)
    assert sum(mu.mass(int(c)) for c in np.flatnonzero(tree.is_leaf)) == 1
