import itertools
from fractions import Fraction
from typing import Union

import numpy as np

from .cubes import METRIC, CubeKind, CubeTree, _assemble
from .errors import InvalidParams, TooDeep, TooLarge
from .metric import FiniteMetricSpace, Metric
from .rationals import Number, as_fraction
from .tree_spec import DELTA_BOUND, ChildKind, ChildSpec, NodeType, TreeSpec

MAX_CANTOR_DEPTH = 12
MAX_GRID_POINTS = 10**5
MAX_RANDOM_POINTS = 10**4
MAX_TRIADIC_GRID_DEPTH = 8


def _children(child_type: int, M: int, J: int) -> tuple[ChildSpec, ...]:
    """M children in slot order: (M - J) // 2 boundary children, central slots 1..J, the
    remaining boundary children; M=3, J=1 gives boundary, central, boundary
    """
    boundary = M - J
    left = boundary // 2
    return (
        tuple(ChildSpec(child_type, ChildKind.BOUNDARY) for _ in range(left))
        + tuple(ChildSpec(child_type, ChildKind.CENTRAL, j) for j in range(1, J + 1))
        + tuple(ChildSpec(child_type, ChildKind.BOUNDARY) for _ in range(boundary - left))
    )


def _relaxed(delta: Fraction, relax: bool) -> bool:
    return relax and delta >= DELTA_BOUND


def uniform_spec(M: int, delta: Number, J: int = 1, relax: bool = True) -> TreeSpec:
    """One type with M children of the same type, J of them central"""
    if not 1 <= J <= M:
        raise InvalidParams(f"uniform spec needs 1 <= J <= M, got J={J}, M={M}")
    delta = as_fraction(delta)
    return TreeSpec(
        delta,
        (NodeType(_children(0, M, J)),),
        root=0,
        J=J,
        relaxed=_relaxed(delta, relax),
    )


def triadic_spec() -> TreeSpec:
    """Triadic half-open intervals: boundary, central, boundary; delta = 1/3"""
    return uniform_spec(3, Fraction(1, 3), 1)


def boundary_rich_spec(
    beta_num: int, beta_den: int, M: int, delta: Number, relax: bool = True
) -> TreeSpec:
    """A cycle of beta_den types: a chain takes at most beta_num boundary steps per period.

    Types i < beta_num have M children (one central, M - 1 boundary) and the
    remaining types a single central child; every child continues to type
    i + 1 mod beta_den. Chains that step to a boundary child whenever one
    exists take exactly beta_num boundary steps per period.
    """
    if beta_den <= 0 or not 0 < beta_num <= beta_den:
        raise InvalidParams(f"need 0 < beta_num <= beta_den, got {beta_num}/{beta_den}")
    if M < 2:
        raise InvalidParams("boundary steps need M >= 2")
    delta = as_fraction(delta)
    types = tuple(
        NodeType(_children((i + 1) % beta_den, M if i < beta_num else 1, 1))
        for i in range(beta_den)
    )
    return TreeSpec(delta, types, root=0, J=1, relaxed=_relaxed(delta, relax))


def cantor_points(depth: int) -> FiniteMetricSpace:
    """Left endpoints of the depth-level middle-thirds intervals, ids 0..2^depth-1"""
    if not 0 <= depth <= MAX_CANTOR_DEPTH:
        raise TooDeep(f"cantor depth must lie in 0..{MAX_CANTOR_DEPTH}, got {depth}")
    points = [Fraction(0)]
    for k in range(1, depth + 1):
        shift = Fraction(2, 3**k)
        points = points + [x + shift for x in points]
    points.sort()
    return FiniteMetricSpace.from_coordinates(
        list(range(len(points))), [(x,) for x in points], Metric.EUCLIDEAN
    )


def grid_points(
    d: int, n: int, metric: Union[Metric, str] = Metric.EUCLIDEAN
) -> FiniteMetricSpace:
    """The lattice {0, ..., n-1}^d scaled into [0, 1]^d"""
    if d < 1 or n < 1:
        raise InvalidParams("grid dimension and size must be positive")
    if n**d > MAX_GRID_POINTS:
        raise TooLarge(f"grid of {n}^{d} points exceeds {MAX_GRID_POINTS}")
    step = Fraction(1, n - 1) if n > 1 else Fraction(0)
    coords = [tuple(i * step for i in index) for index in itertools.product(range(n), repeat=d)]
    return FiniteMetricSpace.from_coordinates(list(range(len(coords))), coords, metric)


def random_points(
    d: int, n: int, seed: int = 0, metric: Union[Metric, str] = Metric.EUCLIDEAN
) -> FiniteMetricSpace:
    """n uniform points in [0, 1]^d from a seeded generator"""
    if d < 1 or n < 1:
        raise InvalidParams("dimension and point count must be positive")
    if n > MAX_RANDOM_POINTS:
        raise TooLarge(f"{n} random points exceed {MAX_RANDOM_POINTS}")
    rng = np.random.default_rng(seed)
    coords = rng.random((n, d))
    return FiniteMetricSpace.from_coordinates(
        list(range(n)), [tuple(float(v) for v in row) for row in coords], metric
    )


def triadic_grid(depth: int) -> tuple[FiniteMetricSpace, CubeTree]:
    """Triadic intervals of [0, 1) as a metric-sourced cube tree.

    The points are the midpoints of the 3^depth intervals of length 3^-depth;
    each interval's cube is centered at its own midpoint, which it shares with
    its middle child.
    """
    if not 0 <= depth <= MAX_TRIADIC_GRID_DEPTH:
        raise TooDeep(f"triadic grid depth must lie in 0..{MAX_TRIADIC_GRID_DEPTH}")
    n_points = 3**depth
    space = FiniteMetricSpace.from_coordinates(
        list(range(n_points)),
        [(Fraction(2 * i + 1, 2 * n_points),) for i in range(n_points)],
        Metric.EUCLIDEAN,
    )

    level, parent, kind, slot, center, members = [], [], [], [], [], []
    first = 0
    for k in range(depth + 1):
        count = 3**k
        width = 3 ** (depth - k)  # points per cube
        for i in range(count):
            level.append(k)
            members.append(np.arange(i * width, (i + 1) * width, dtype=np.int64))
            center.append(i * width + width // 2)
            if k == 0:
                parent.append(-1)
                kind.append(CubeKind.ROOT)
                slot.append(0)
            else:
                parent.append(first - 3 ** (k - 1) + i // 3)
                middle = i % 3 == 1
                kind.append(CubeKind.CENTRAL if middle else CubeKind.BOUNDARY)
                slot.append(1 if middle else 0)
        first += count

    tree = _assemble(
        delta=Fraction(1, 3),
        source=METRIC,
        level=np.array(level, dtype=np.int64),
        parent=np.array(parent, dtype=np.int64),
        kind=np.array(kind, dtype=np.int8),
        slot=np.array(slot, dtype=np.int64),
        center=np.array(center, dtype=np.int64),
        origin=n_points // 2,
        unit_cube=0,
        J=1,
        scale=Fraction(1),
        members=tuple(members),
        point_ids=space.point_ids,
    )
    return space, tree
