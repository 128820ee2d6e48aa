from fractions import Fraction

import numpy as np
import pytest

from nested_cubes.algorithms.utils.cubes import (
    FAIL,
    PASS,
    SKIPPED,
    CubeKind,
    CubeTree,
    build_cube_tree,
    max_branching,
    offspring_chains,
    unfold_spec,
    validate_tree,
)
from nested_cubes.algorithms.utils.errors import (
    DeltaOutOfRange,
    DepthExceeded,
    FormatError,
    SourceMismatch,
    TooLarge,
)
from nested_cubes.algorithms.utils.generators import (
    cantor_points,
    grid_points,
    random_points,
    triadic_grid,
    uniform_spec,
)


def test_unfold_sizes(triadic):
    assert unfold_spec(triadic, 0).n_cubes == 1
    tree = unfold_spec(triadic, 3)
    assert tree.n_cubes == 40
    assert tree.depth == 3
    binary = unfold_spec(uniform_spec(2, Fraction(1, 8)), 4)
    assert binary.n_cubes == 31
    assert int(binary.is_leaf.sum()) == 16


def test_unfold_kinds(triadic):
    tree = unfold_spec(triadic, 1)
    assert [CubeKind(int(k)) for k in tree.kind] == [
        CubeKind.ROOT,
        CubeKind.BOUNDARY,
        CubeKind.CENTRAL,
        CubeKind.BOUNDARY,
    ]
    # the central child inherits the parent's center token
    assert tree.center[2] == tree.center[0]
    assert len(set(tree.center.tolist())) == 3


def test_unfold_too_large():
    with pytest.raises(TooLarge):
        unfold_spec(uniform_spec(10, Fraction(1, 20)), 8)


def test_offspring_chains(triadic, chain_spec):
    tree = unfold_spec(triadic, 3)
    assert len(list(offspring_chains(tree, 0, 1))) == 3
    chains = list(offspring_chains(tree, 0, 2))
    assert len(chains) == 9
    assert all(len(c.cubes) == 3 and c.cubes[0] == 0 for c in chains)
    assert len(list(offspring_chains(unfold_spec(chain_spec, 3), 0, 3))) == 1
    with pytest.raises(DepthExceeded):
        list(offspring_chains(tree, 0, 4))


def test_max_branching(triadic, chain_spec):
    assert max_branching(unfold_spec(triadic, 2)) == 3
    assert max_branching(unfold_spec(triadic, 0)) == 1
    assert max_branching(unfold_spec(chain_spec, 2)) == 1
    assert max_branching(unfold_spec(uniform_spec(4, Fraction(1, 8)), 1)) == 4


def test_validate_spec_tree(triadic):
    report = validate_tree(unfold_spec(triadic, 3))
    assert report.passed
    assert report.check("sandwich").status == SKIPPED
    assert report.check("partition").status == PASS


def test_validate_needs_space():
    _, tree = triadic_grid(2)
    with pytest.raises(SourceMismatch):
        validate_tree(tree)


def test_triadic_grid_is_valid():
    space, tree = triadic_grid(3)
    assert validate_tree(tree, space).passed


@pytest.mark.parametrize(
    ("space", "origin"),
    [(cantor_points(4), 0), (grid_points(1, 27), 13)],
)
def test_build_cube_tree(space, origin):
    tree = build_cube_tree(space, Fraction(1, 9), 2, origin)
    assert tree.origin == space.index(origin)
    assert np.count_nonzero(tree.parent < 0) == 1
    report = validate_tree(tree, space)
    assert all(c.status == PASS for c in report.checks)


def _battery_spaces():
    yield cantor_points(6)
    yield grid_points(1, 729)
    yield grid_points(2, 27)
    rng = np.random.default_rng(7)
    for seed, n in enumerate(rng.integers(2, 301, size=50)):
        yield random_points(2, int(n), seed)


@pytest.mark.slow
@pytest.mark.parametrize("delta", [Fraction(1, 8), Fraction(1, 10)])
def test_build_cube_tree_battery(delta):
    for space in _battery_spaces():
        tree = build_cube_tree(space, delta, 3, space.point_ids[0])
        report = validate_tree(tree, space)
        assert report.passed, [c for c in report.checks if c.status == FAIL]


def test_build_cube_tree_singleton(line_space):
    space = line_space(0)
    tree = build_cube_tree(space, Fraction(1, 8), 3, 0)
    assert tree.n_cubes == 3
    assert validate_tree(tree, space).passed


def test_build_cube_tree_delta_bound():
    with pytest.raises(DeltaOutOfRange):
        build_cube_tree(grid_points(1, 5), Fraction(1, 7), 2, 0)


def test_tree_json_round_trip():
    space = grid_points(1, 27)
    tree = build_cube_tree(space, Fraction(1, 9), 2, 13)
    again = CubeTree.from_json(tree.to_json())
    assert again.digest == tree.digest
    assert validate_tree(again, space).passed


def test_corrupted_partition():
    space = grid_points(1, 27)
    obj = build_cube_tree(space, Fraction(1, 9), 2, 13).to_json()
    leaves = [c for c in obj["cubes"] if c["k"] == 1]
    stolen = leaves[1]["members"][0]
    leaves[0]["members"].append(stolen)

    report = validate_tree(CubeTree.from_json(obj), space)
    assert not report.passed
    partition = report.check("partition")
    assert partition.status == FAIL
    assert partition.witness["point"] == stolen
    assert partition.witness["level"] == 1
    assert len(partition.witness["cubes"]) == 2


def test_children_must_match_parents(triadic):
    obj = unfold_spec(triadic, 1).to_json()
    obj["cubes"][0]["children"] = [1, 2]
    with pytest.raises(FormatError):
        CubeTree.from_json(obj)
