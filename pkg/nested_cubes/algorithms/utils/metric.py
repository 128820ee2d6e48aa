"""Finite metric spaces, nets, covering numbers and scale indices"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property, reduce
from typing import Hashable, Iterable, Optional, Sequence, Union

import numpy as np

from .errors import (
    InstanceTooLarge,
    InvalidParams,
    InvalidScales,
    SeedConflict,
    UnknownPoint,
    WindowInvalid,
)
from .rationals import Number, as_fraction, log_fraction

logger = logging.getLogger(__name__)

EXACT_COVER_CAP = 20
EXHAUSTIVE_TRIANGLE_LIMIT = 500
FLOAT_RTOL = 1e-12

_MAX_EXACT_UNITS = 2**52  # integer distances stay exact in float64 below this
_MAX_REPORTED_VIOLATIONS = 1000

PointId = Hashable


class Metric(str, Enum):
    EUCLIDEAN = "euclidean"
    CHEBYSHEV = "chebyshev"
    MANHATTAN = "manhattan"


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A finite point set with a dense distance matrix.

    Distances are stored as multiples of `unit`. When every distance is
    rational the matrix holds exact integers and `unit` is the common
    denominator's reciprocal, so comparisons against radii are exact. For
    floating-point sources `unit` is None and radii are compared with a
    relative tolerance of FLOAT_RTOL.
    """

    point_ids: tuple[PointId, ...]
    units: np.ndarray
    unit: Optional[Fraction] = None
    coordinates: Optional[tuple[tuple[Number, ...], ...]] = field(
        default=None, repr=False
    )
    metric: Optional[Metric] = None

    def __post_init__(self):
        n = len(self.point_ids)
        if self.units.shape != (n, n):
            raise InvalidParams(
                f"distance matrix has shape {self.units.shape}, expected {(n, n)}"
            )
        if len(set(self.point_ids)) != n:
            raise InvalidParams("point ids must be unique")

    @classmethod
    def from_coordinates(
        cls,
        point_ids: Sequence[PointId],
        coordinates: Sequence[Sequence[Number]],
        metric: Union[Metric, str] = Metric.EUCLIDEAN,
    ) -> "FiniteMetricSpace":
        metric = Metric(metric)
        coords = tuple(tuple(row) for row in coordinates)
        dims = {len(row) for row in coords}
        if len(dims) > 1:
            raise InvalidParams("all points must have the same dimension")
        d = dims.pop() if dims else 0

        rational = all(
            not isinstance(v, float) for row in coords for v in row
        ) and (d <= 1 or metric is not Metric.EUCLIDEAN)
        if rational and coords:
            scaled = _to_common_units([v for row in coords for v in row])
            if scaled is not None:
                ints, unit = scaled
                arr = np.array(ints, dtype=np.int64).reshape(len(coords), d)
                units = _pairwise(arr, metric).astype(np.float64)
                if units.max(initial=0) < _MAX_EXACT_UNITS:
                    return cls(tuple(point_ids), units, unit, coords, metric)

        arr = np.array(
            [[float(v) for v in row] for row in coords], dtype=np.float64
        ).reshape(len(coords), d)
        return cls(tuple(point_ids), _pairwise(arr, metric), None, coords, metric)

    @classmethod
    def from_matrix(
        cls, point_ids: Sequence[PointId], matrix: Sequence[Sequence[Number]]
    ) -> "FiniteMetricSpace":
        values = [v for row in matrix for v in row]
        n = len(point_ids)
        if all(not isinstance(v, float) for v in values):
            scaled = _to_common_units(values)
            if scaled is not None:
                ints, unit = scaled
                units = np.array(ints, dtype=np.float64).reshape(n, n)
                return cls(tuple(point_ids), units, unit)
        units = np.array([float(v) for v in values], dtype=np.float64).reshape(n, n)
        return cls(tuple(point_ids), units, None)

    @property
    def n(self) -> int:
        return len(self.point_ids)

    @property
    def exact(self) -> bool:
        return self.unit is not None

    @cached_property
    def _index(self) -> dict[PointId, int]:
        return {pid: i for i, pid in enumerate(self.point_ids)}

    def index(self, point_id: PointId) -> int:
        try:
            return self._index[point_id]
        except KeyError:
            raise UnknownPoint(f"unknown point id: {point_id!r}") from None

    def indices(self, point_ids: Iterable[PointId]) -> list[int]:
        return [self.index(pid) for pid in point_ids]

    def to_length(self, units: float) -> Union[Fraction, float]:
        if self.unit is not None:
            return int(units) * self.unit
        return float(units)

    def distance(self, a: PointId, b: PointId) -> Union[Fraction, float]:
        return self.to_length(self.units[self.index(a), self.index(b)])

    def threshold(self, radius: Number) -> float:
        """Matrix-unit threshold t such that `units <= t` means `d <= radius`"""
        if self.unit is not None:
            return float(math.floor(as_fraction(radius) / self.unit))
        return float(radius) * (1 + FLOAT_RTOL)

    def within(self, i: int, radius: Number, among: Optional[np.ndarray] = None):
        """Boolean mask of the points (or of `among`) in the closed ball B(i, radius)"""
        row = self.units[i] if among is None else self.units[i, among]
        return row <= self.threshold(radius)

    def ball(self, i: int, radius: Number) -> np.ndarray:
        return np.flatnonzero(self.within(i, radius))

    @cached_property
    def diameter(self) -> Union[Fraction, float]:
        if self.n == 0:
            return self.to_length(0)
        return self.to_length(self.units.max())

    @cached_property
    def min_positive_distance(self) -> Union[Fraction, float, None]:
        positive = self.units[self.units > 0]
        if positive.size == 0:
            return None
        return self.to_length(positive.min())

    def subspace(self, indices: Sequence[int]) -> "FiniteMetricSpace":
        idx = np.asarray(indices, dtype=np.int64)
        return FiniteMetricSpace(
            tuple(self.point_ids[i] for i in idx),
            self.units[np.ix_(idx, idx)],
            self.unit,
            None if self.coordinates is None else tuple(self.coordinates[i] for i in idx),
            self.metric,
        )


def _to_common_units(values: Sequence[Number]) -> Optional[tuple[list[int], Fraction]]:
    fractions = [as_fraction(v) for v in values]
    den = reduce(math.lcm, (f.denominator for f in fractions), 1)
    ints = [int(f * den) for f in fractions]
    if ints and max(abs(v) for v in ints) >= _MAX_EXACT_UNITS:
        return None
    return ints, Fraction(1, den)


def _pairwise(arr: np.ndarray, metric: Metric) -> np.ndarray:
    n, d = arr.shape
    if metric is Metric.EUCLIDEAN and d == 1:
        metric = Metric.MANHATTAN
    if metric is Metric.EUCLIDEAN:
        out = np.zeros((n, n), dtype=np.float64)
        for axis in range(d):
            col = arr[:, axis]
            out += (col[:, None] - col[None, :]) ** 2
        return np.sqrt(out)

    out = np.zeros((n, n), dtype=arr.dtype)
    for axis in range(d):
        col = arr[:, axis]
        diff = np.abs(col[:, None] - col[None, :])
        if metric is Metric.MANHATTAN:
            out += diff
        else:
            np.maximum(out, diff, out=out)
    return out.astype(np.float64)


@dataclass(frozen=True)
class ScaleWindow:
    r_min: Number
    r_max: Number

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max:
            raise WindowInvalid(
                f"scale window requires 0 < r_min < r_max, got [{self.r_min}, {self.r_max}]"
            )

    def natural_ratio(self) -> Fraction:
        """1/b for the smallest b in 2..9 with r_max / r_min a power of b, else 1/2"""
        span = as_fraction(self.r_max) / as_fraction(self.r_min)
        for base in range(2, 10):
            power = Fraction(base)
            while power < span:
                power *= base
            if power == span:
                return Fraction(1, base)
        return Fraction(1, 2)

    def grid(self, ratio: Optional[Number] = None) -> list[Fraction]:
        """Geometric scales r_max * ratio^i, largest first, not below r_min"""
        ratio = self.natural_ratio() if ratio is None else as_fraction(ratio)
        if not 0 < ratio < 1:
            raise InvalidParams("scale ratio must lie in (0, 1)")
        r_min = as_fraction(self.r_min)
        scales = []
        r = as_fraction(self.r_max)
        while r >= r_min:
            scales.append(r)
            r *= ratio
        return scales


@dataclass(frozen=True)
class Violation:
    kind: str
    ids: tuple[PointId, ...]
    values: tuple[Union[Fraction, float], ...]


@dataclass(frozen=True)
class MetricValidation:
    passed: bool
    violations: tuple[Violation, ...]
    exhaustive: bool
    truncated: bool = False


def validate_metric(
    space: FiniteMetricSpace, sample_size: int = 100_000, seed: int = 0
) -> MetricValidation:
    """Check the metric axioms; exhaustive up to EXHAUSTIVE_TRIANGLE_LIMIT points"""
    m = space.units
    n = space.n
    ids = space.point_ids
    tol = 0.0 if space.exact else FLOAT_RTOL
    length = space.to_length
    found: list[Violation] = []

    def report(violation: Violation) -> bool:
        found.append(violation)
        return len(found) >= _MAX_REPORTED_VIOLATIONS

    for i in np.flatnonzero(np.diag(m) != 0):
        if report(Violation("identity", (ids[i],), (length(m[i, i]),))):
            break

    asym = np.abs(m - m.T) > tol * np.maximum(np.abs(m), np.abs(m.T))
    for i, j in zip(*np.nonzero(np.triu(asym, 1))):
        if report(Violation("symmetry", (ids[i], ids[j]), (length(m[i, j]), length(m[j, i])))):
            break

    off_diagonal = ~np.eye(n, dtype=bool)
    for i, j in zip(*np.nonzero((m <= 0) & off_diagonal)):
        if report(Violation("positivity", (ids[i], ids[j]), (length(m[i, j]),))):
            break

    exhaustive = n <= EXHAUSTIVE_TRIANGLE_LIMIT
    if exhaustive:
        for b in range(n):
            bound = m[:, b][:, None] + m[b, :][None, :]
            bad = m > bound * (1 + tol)
            for a, c in zip(*np.nonzero(bad)):
                if report(_triangle(ids, m, length, a, b, c)):
                    break
            if len(found) >= _MAX_REPORTED_VIOLATIONS:
                break
    elif n > 0:
        rng = np.random.default_rng(seed)
        a, b, c = rng.integers(0, n, size=(3, sample_size))
        bad = m[a, c] > (m[a, b] + m[b, c]) * (1 + tol)
        for k in np.flatnonzero(bad)[:_MAX_REPORTED_VIOLATIONS]:
            found.append(_triangle(ids, m, length, a[k], b[k], c[k]))

    truncated = len(found) >= _MAX_REPORTED_VIOLATIONS
    if truncated:
        logger.warning("metric validation stopped after %d violations", len(found))
    return MetricValidation(not found, tuple(found), exhaustive, truncated)


def _triangle(ids, m, length, a, b, c) -> Violation:
    return Violation(
        "triangle",
        (ids[a], ids[b], ids[c]),
        (length(m[a, b]), length(m[b, c]), length(m[a, c])),
    )


def _greedy_net_indices(
    space: FiniteMetricSpace,
    candidates: np.ndarray,
    radius: Number,
    seeds: Sequence[int] = (),
) -> list[int]:
    candidates = np.sort(np.asarray(candidates, dtype=np.int64))
    position = {int(c): k for k, c in enumerate(candidates)}
    threshold = space.threshold(radius)
    sub = space.units[np.ix_(candidates, candidates)]
    covered = np.zeros(len(candidates), dtype=bool)
    net: list[int] = []

    for s in seeds:
        k = position.get(int(s))
        if k is None:
            raise UnknownPoint(f"seed {space.point_ids[s]!r} is not a candidate")
        if covered[k]:
            raise SeedConflict(
                f"seed {space.point_ids[s]!r} lies within {radius} of an earlier seed",
                witness=space.point_ids[s],
            )
        net.append(int(s))
        covered |= sub[k] <= threshold

    while len(candidates):
        k = int(np.argmin(covered))
        if covered[k]:
            break
        net.append(int(candidates[k]))
        covered |= sub[k] <= threshold
    return net


def greedy_net(
    space: FiniteMetricSpace,
    candidate_ids: Iterable[PointId],
    radius: Number,
    seed_ids: Sequence[PointId] = (),
) -> list[PointId]:
    """Maximal radius-separated subset of the candidates, seeds first.

    Candidates are scanned in the space's id order and accepted when they lie
    farther than `radius` from every point accepted so far.
    """
    if radius <= 0:
        raise InvalidScales("net radius must be positive")
    net = _greedy_net_indices(
        space,
        np.array(space.indices(candidate_ids), dtype=np.int64),
        radius,
        space.indices(seed_ids),
    )
    return [space.point_ids[i] for i in net]


def _covering_number_indices(
    space: FiniteMetricSpace,
    x: int,
    R: Number,
    r: Number,
    mode: str = "greedy",
    cap: int = EXACT_COVER_CAP,
) -> int:
    if r <= 0 or R <= 0:
        raise InvalidScales("radii must be positive")
    if r > R:
        raise InvalidScales(f"r={r} exceeds R={R}")
    ball = space.ball(x, R)
    if mode == "greedy":
        return len(_greedy_net_indices(space, ball, r, [x]))
    if mode != "exact":
        raise InvalidParams(f"unknown covering mode: {mode}")
    if len(ball) > cap:
        raise InstanceTooLarge(
            f"B(x,R) has {len(ball)} points; exact covering is capped at {cap}"
        )
    upper = len(_greedy_net_indices(space, ball, r, [x]))
    return _exact_cover(space, ball, r, upper)


def _exact_cover(space: FiniteMetricSpace, ball: np.ndarray, r: Number, upper: int) -> int:
    # Bitmask of ball members covered by the closed r-ball around each point.
    reach = space.units[:, ball] <= space.threshold(r)
    weights = 1 << np.arange(len(ball), dtype=object)
    masks = sorted(
        {int(sum(weights[row])) for row in reach if row.any()},
        key=lambda m: (-bin(m).count("1"), m),
    )
    masks = [m for m in masks if not any(m != o and m & o == m for o in masks)]
    largest = max(bin(m).count("1") for m in masks)
    by_element = [[m for m in masks if m >> e & 1] for e in range(len(ball))]
    best = upper

    def search(uncovered: int, used: int):
        nonlocal best
        if uncovered == 0:
            best = min(best, used)
            return
        if used + -(-bin(uncovered).count("1") // largest) >= best:
            return
        element = (uncovered & -uncovered).bit_length() - 1
        for mask in by_element[element]:
            search(uncovered & ~mask, used + 1)

    search((1 << len(ball)) - 1, 0)
    return best


def covering_number(
    space: FiniteMetricSpace,
    x: PointId,
    R: Number,
    r: Number,
    mode: str = "greedy",
    cap: int = EXACT_COVER_CAP,
) -> int:
    """Number of closed r-balls (centered at points of the space) covering B(x, R).

    `exact` solves the set cover exhaustively and is limited to balls of at
    most `cap` points; `greedy` returns the size of a greedy r-net of B(x, R)
    seeded with x, an upper bound for the exact value.
    """
    return _covering_number_indices(space, space.index(x), R, r, mode, cap)


def scale_index(t: Number, delta: Number) -> int:
    """The least integer n with delta^n <= t"""
    delta = as_fraction(delta)
    if t <= 0 or not 0 < delta < 1:
        raise InvalidParams("scale_index requires t > 0 and 0 < delta < 1")
    log_t = log_fraction(t) if isinstance(t, Fraction) else math.log(t)
    n = math.ceil(log_t / log_fraction(delta))
    while delta**n > t:
        n += 1
    while delta ** (n - 1) <= t:
        n -= 1
    return n
