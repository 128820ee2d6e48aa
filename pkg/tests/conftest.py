from fractions import Fraction
from typing import Iterable

import pytest

from nested_cubes import classFactory
from nested_cubes.algorithms.utils.generators import triadic_spec
from nested_cubes.algorithms.utils.metric import FiniteMetricSpace
from nested_cubes.algorithms.utils.tree_spec import TreeSpec
from nested_cubes.processing import ProcessingRegistry


@pytest.fixture()
def registry() -> Iterable[ProcessingRegistry]:
    registry = ProcessingRegistry()
    plugin = classFactory(registry)
    plugin.initGui()

    yield registry

    plugin.unload()


@pytest.fixture()
def triadic() -> TreeSpec:
    return triadic_spec()


@pytest.fixture()
def chain_spec() -> TreeSpec:
    """One central child per cube: a single point in the limit"""
    return TreeSpec.from_json(
        {
            "delta": {"num": 1, "den": 3},
            "root": 0,
            "J": 1,
            "types": [{"children": [{"type": 0, "kind": "central", "slot": 1}]}],
        }
    )


def line(*xs) -> FiniteMetricSpace:
    """Points on the real line with exact coordinates, ids 0..n-1"""
    return FiniteMetricSpace.from_coordinates(
        list(range(len(xs))), [(Fraction(x),) for x in xs]
    )


@pytest.fixture()
def line_space():
    return line
