import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any, Optional, Sequence, Union

import numpy as np

from .cubes import CubeKind, CubeTree, reduce_children
from .errors import EtaInvalid, InvalidParams, POutOfRange, TreeTooShallow, WindowInvalid
from .mean_cycle import GeometricMean, optimal_mean_cycle
from .measures import MassAssignment, ball_masses_float, leaf_of_point
from .metric import (
    EXACT_COVER_CAP,
    FiniteMetricSpace,
    ScaleWindow,
    _covering_number_indices,
)
from .rationals import Number, as_fraction, log_fraction
from .tree_spec import ChildKind, TreeSpec

logger = logging.getLogger(__name__)

SET_ASSOUAD = "set_assouad"
SET_LOWER = "set_lower"
MEASURE_ASSOUAD = "measure_assouad"
MEASURE_LOWER = "measure_lower"
KINDS = (SET_ASSOUAD, SET_LOWER, MEASURE_ASSOUAD, MEASURE_LOWER)

_EVIDENCE_SIZE = 10
_GAP_TOLERANCE = 1e-9
_MAX_RATIONAL_DENOMINATOR = 64


@dataclass(frozen=True)
class ExactDimension:
    """The value log(ratio) / (length * log(base)), kept in exact form"""

    ratio: Fraction
    length: int
    base: Fraction

    @cached_property
    def value(self) -> float:
        return log_fraction(self.ratio) / (self.length * log_fraction(self.base))

    @cached_property
    def rational(self) -> Optional[Fraction]:
        """The value as a fraction when ratio^b == base^(a * length) for value = a/b"""
        guess = Fraction(self.value).limit_denominator(_MAX_RATIONAL_DENOMINATOR)
        if abs(guess.numerator * self.length) > 4096:
            return None
        a, b = guess.numerator, guess.denominator
        lhs = self.ratio**b
        rhs = self.base ** (a * self.length)
        return guess if lhs == rhs else None

    def __float__(self) -> float:
        return float(self.rational) if self.rational is not None else self.value


@dataclass(frozen=True)
class Evidence:
    descriptor: dict[str, Any]
    gap: float
    log_ratio: float


@dataclass(frozen=True)
class DimensionReport:
    kind: str
    method: str
    value: float
    evidence: tuple[Evidence, ...] = ()
    constant: Optional[float] = None
    window: Optional[tuple[Any, Any]] = None
    extreme: Optional[float] = None
    exact: Optional[ExactDimension] = None
    flags: tuple[str, ...] = field(default=())


def step_fractions(spec: TreeSpec, p: Fraction, eta: Sequence[Fraction]) -> list[list[Fraction]]:
    """Mass fraction passed to each child of each type under mu_{p,eta}"""
    J = spec.J
    steps = []
    for node in spec.types:
        central = 1 - (node.branching - J) * p
        steps.append(
            [
                p if child.kind is ChildKind.BOUNDARY else eta[child.slot - 1] * central
                for child in node.children
            ]
        )
    return steps


def check_spec_parameters(
    spec: TreeSpec, p: Number, eta: Optional[Sequence[Number]] = None
) -> tuple[Fraction, tuple[Fraction, ...]]:
    p = as_fraction(p)
    M = spec.max_branching
    if not 0 < p <= Fraction(1, M):
        raise POutOfRange(f"p={p} must lie in (0, 1/{M}]")
    if eta is None:
        eta = (Fraction(1, spec.J),) * spec.J
    eta = tuple(as_fraction(e) for e in eta)
    if len(eta) != spec.J or any(e <= 0 for e in eta) or sum(eta) != 1:
        raise EtaInvalid(
            f"eta must be {spec.J} positive rationals summing to 1, got {[str(e) for e in eta]}"
        )
    return p, eta


def exact_dimension_spec(
    spec: TreeSpec,
    p: Optional[Number] = None,
    eta: Optional[Sequence[Number]] = None,
    kind: str = MEASURE_ASSOUAD,
) -> ExactDimension:
    """Dimension of the infinite tree described by `spec`, as an optimal mean cycle.

    Measure kinds weigh each type-graph edge by the reciprocal of the mass
    fraction it passes on; set kinds weigh every edge leaving a type by that
    type's child count. Assouad kinds take the maximum mean cycle, lower
    kinds the minimum.
    """
    if kind not in KINDS:
        raise InvalidParams(f"unknown dimension kind: {kind}")
    if kind in (MEASURE_ASSOUAD, MEASURE_LOWER):
        if p is None:
            raise InvalidParams("measure dimensions need p")
        p, eta = check_spec_parameters(spec, p, eta)
    else:
        p, eta = None, None
    return _exact_dimension(spec, p, eta, kind)


@lru_cache(maxsize=4096)
def _exact_dimension(
    spec: TreeSpec,
    p: Optional[Fraction],
    eta: Optional[tuple[Fraction, ...]],
    kind: str,
) -> ExactDimension:
    if p is None:
        edges = [
            (t, child.type, Fraction(node.branching))
            for t, node in enumerate(spec.types)
            for child in node.children
        ]
    else:
        steps = step_fractions(spec, p, eta)
        edges = [
            (t, child.type, 1 / steps[t][i])
            for t, node in enumerate(spec.types)
            for i, child in enumerate(node.children)
        ]
    maximize = kind in (SET_ASSOUAD, MEASURE_ASSOUAD)
    best = optimal_mean_cycle(edges, spec.root, maximize=maximize)
    return ExactDimension(best.ratio, best.length, 1 / spec.delta)


def boundary_fraction(spec: TreeSpec) -> GeometricMean:
    """Largest per-cycle fraction of boundary steps, as 2^(fraction) in geometric form"""
    edges = [
        (t, child.type, Fraction(2 if child.kind is ChildKind.BOUNDARY else 1))
        for t, node in enumerate(spec.types)
        for child in node.children
    ]
    return optimal_mean_cycle(edges, spec.root, maximize=True)


def boundary_fraction_value(spec: TreeSpec) -> Fraction:
    """beta-hat: the maximal fraction of boundary steps over cycles of the type graph"""
    best = boundary_fraction(spec)
    # ratio is a power of two: 2^(boundary steps) over `length` steps
    exponent = best.ratio.numerator.bit_length() - best.ratio.denominator.bit_length()
    return Fraction(exponent, best.length)


def measure_chain_estimate(
    tree: CubeTree, mu: MassAssignment, m_min: int = 1, kind: str = "assouad"
) -> DimensionReport:
    """Extremal exponent log(mu(Q)/mu(Q')) / (m log(1/delta)) over chains Q' below Q, m >= m_min"""
    if kind not in ("assouad", "lower"):
        raise InvalidParams(f"unknown chain kind: {kind}")
    if m_min < 1 or tree.depth < m_min:
        raise TreeTooShallow(f"tree depth {tree.depth} is below m_min={m_min}")

    assouad = kind == "assouad"
    ufunc = np.minimum if assouad else np.maximum
    fill = math.inf if assouad else -math.inf
    log_delta = log_fraction(1 / tree.delta)
    logs = mu.log_masses

    best_value, best_cube, best_m = None, -1, 0
    extreme = logs
    for m in range(1, tree.depth + 1):
        extreme = reduce_children(tree, extreme, ufunc, fill=fill)
        if m < m_min:
            continue
        valid = np.isfinite(extreme)
        exponents = np.where(valid, (logs - extreme) / (m * log_delta), np.nan)
        q = int(np.nanargmax(exponents) if assouad else np.nanargmin(exponents))
        value = exponents[q]
        if best_value is None or (value > best_value if assouad else value < best_value):
            best_value, best_cube, best_m = value, q, m

    chain = _trace_chain(tree, logs, best_cube, best_m, ufunc, fill)
    exact = ExactDimension(
        mu.mass(chain[0]) / mu.mass(chain[-1]), best_m, 1 / tree.delta
    )
    evidence = Evidence(
        {"chain": chain, "kinds": [CubeKind(int(tree.kind[c])).label for c in chain[1:]]},
        best_m,
        log_fraction(exact.ratio),
    )
    return DimensionReport(
        kind=MEASURE_ASSOUAD if assouad else MEASURE_LOWER,
        method="chain_sup" if assouad else "chain_inf",
        value=float(exact),
        evidence=(evidence,),
        window=(m_min, tree.depth),
        exact=exact,
    )


def _trace_chain(tree, logs, start, m, ufunc, fill) -> list[int]:
    layers = [logs]
    for _ in range(m - 1):
        layers.append(reduce_children(tree, layers[-1], ufunc, fill=fill))
    chain = [start]
    for step in range(m):
        kids = np.arange(
            tree.child_start[chain[-1]], tree.child_start[chain[-1]] + tree.child_count[chain[-1]]
        )
        values = layers[m - 1 - step][kids]
        pick = int(np.argmin(values) if ufunc is np.minimum else np.argmax(values))
        chain.append(int(kids[pick]))
    return chain


def _sample_centers(space: FiniteMetricSpace, sample_budget: int) -> np.ndarray:
    count = max(1, min(space.n, sample_budget))
    return np.unique(np.linspace(0, space.n - 1, count).round().astype(np.int64))


def slope_fit(log_gaps: np.ndarray, log_values: np.ndarray) -> float:
    """Least-squares slope over the upper half of the log-gap range"""
    gaps = np.unique(log_gaps)
    if len(gaps) == 0:
        return 0.0
    keep = gaps[len(gaps) // 2 :] if len(gaps) >= 4 else gaps
    mask = np.isin(log_gaps, keep)
    if len(keep) < 2:
        return float(np.max(log_values[mask] / log_gaps[mask]))
    slope, _ = np.polyfit(log_gaps[mask], log_values[mask], 1)
    return max(0.0, float(slope))


def _extremal_per_gap(log_gaps, log_values, assouad: bool):
    gaps = np.unique(log_gaps)
    pick = np.max if assouad else np.min
    return gaps, np.array([pick(log_values[log_gaps == g]) for g in gaps])


def _window_flags(space: FiniteMetricSpace, window: ScaleWindow) -> tuple[str, ...]:
    resolution = space.min_positive_distance
    if resolution is not None and window.r_min < resolution / 2:
        logger.warning(
            "r_min=%s is below half the smallest interpoint distance %s", window.r_min, resolution
        )
        return ("below_resolution",)
    return ()


def _set_estimate(
    space: FiniteMetricSpace,
    window: ScaleWindow,
    sample_budget: int,
    ratio: Optional[Number],
    assouad: bool,
    mode: str,
) -> DimensionReport:
    scales = window.grid(ratio)
    flags = list(_window_flags(space, window))
    if not assouad:
        diameter = space.diameter
        scales = [s for s in scales if s < diameter]
    centers = _sample_centers(space, sample_budget)

    records = []
    saturated = 0
    for x in centers:
        for i, R in enumerate(scales):
            # a ball holding every point stops growing with R
            if len(space.ball(int(x), R)) == space.n:
                saturated += 1
                continue
            for r in scales[i + 1 :]:
                count = _covering_number_indices(space, int(x), R, r, mode, EXACT_COVER_CAP)
                records.append((int(x), R, r, count))
    if saturated:
        logger.debug("skipped %d centers and radii whose ball is the whole space", saturated)

    kind = SET_ASSOUAD if assouad else SET_LOWER
    method = "slope_fit"
    if not records:
        flags.append("degenerate")
        logger.warning("no admissible scale pairs; reporting 0")
        return DimensionReport(kind, method, 0.0, window=(window.r_min, window.r_max), flags=tuple(flags))

    log_gaps = np.array([log_fraction(R / r) for _, R, r, _ in records])
    log_counts = np.log(np.array([c for *_, c in records], dtype=np.float64))
    if not np.any(log_counts > 0):
        flags.append("degenerate")

    gaps, extremal = _extremal_per_gap(log_gaps, log_counts, assouad)
    value = slope_fit(gaps, extremal)
    exponents = log_counts / log_gaps
    extreme = float(exponents.max() if assouad else exponents.min())
    offsets = log_counts - value * log_gaps
    constant = math.exp(offsets.max() if assouad else offsets.min())

    order = np.argsort(-exponents if assouad else exponents, kind="stable")[:_EVIDENCE_SIZE]
    evidence = tuple(
        Evidence(
            {"x": space.point_ids[records[i][0]], "R": str(records[i][1]), "r": str(records[i][2]), "N": records[i][3]},
            float(log_gaps[i]),
            float(log_counts[i]),
        )
        for i in order
    )
    return DimensionReport(
        kind,
        method,
        value,
        evidence=evidence,
        constant=constant,
        window=(window.r_min, window.r_max),
        extreme=extreme,
        flags=tuple(flags),
    )


def set_assouad_estimate(
    space: FiniteMetricSpace,
    window: ScaleWindow,
    sample_budget: int = 64,
    ratio: Optional[Number] = None,
    mode: str = "greedy",
) -> DimensionReport:
    """Slope of the largest log N(x, R, r) against log(R/r) over a geometric scale grid"""
    return _set_estimate(space, window, sample_budget, ratio, True, mode)


def set_lower_estimate(
    space: FiniteMetricSpace,
    window: ScaleWindow,
    sample_budget: int = 64,
    ratio: Optional[Number] = None,
    mode: str = "greedy",
) -> DimensionReport:
    """Slope of the smallest log N(x, R, r), restricted to R below the diameter"""
    return _set_estimate(space, window, sample_budget, ratio, False, mode)


def measure_ball_estimate(
    space: FiniteMetricSpace,
    tree: CubeTree,
    mu: MassAssignment,
    window: ScaleWindow,
    sample_budget: int = 64,
    kind: str = "assouad",
    ratio: Optional[Number] = None,
) -> DimensionReport:
    """Extremal log(mu(B(x,R)) / mu(B(x,r))) / log(R/r) over sampled centers and scale pairs

    Only pairs with R/r of at least delta^-2 count, unless the window holds none
    (flagged `short_window`).
    """
    if kind not in ("assouad", "lower"):
        raise InvalidParams(f"unknown ball estimate kind: {kind}")
    assouad = kind == "assouad"
    scales = window.grid(ratio)
    flags = list(_window_flags(space, window))
    if not assouad:
        scales = [s for s in scales if s < space.diameter]
    if len(scales) < 2:
        raise WindowInvalid("the scale window holds fewer than two grid scales")
    if tree.radius(tree.depth) > scales[-1]:
        flags.append("clamped")
        logger.warning("smallest scale %s lies below the deepest tree level", scales[-1])

    owner = leaf_of_point(tree)
    records = []
    for x in _sample_centers(space, sample_budget):
        masses = ball_masses_float(space, mu, owner, int(x), scales)
        logs = np.log(masses)
        for i in range(len(scales)):
            for j in range(i + 1, len(scales)):
                gap = log_fraction(scales[i] / scales[j])
                records.append((int(x), i, j, gap, logs[i] - logs[j]))

    gaps = np.array([rec[3] for rec in records])
    # only pairs spanning at least two tree levels
    wide = gaps >= 2 * log_fraction(1 / tree.delta) - _GAP_TOLERANCE
    if wide.any():
        records = [rec for rec, keep in zip(records, wide) if keep]
        gaps = gaps[wide]
    else:
        flags.append("short_window")
        logger.warning("no scale pair spans two tree levels; using every pair")
    log_ratios = np.array([rec[4] for rec in records])
    exponents = log_ratios / gaps
    best = int(np.argmax(exponents) if assouad else np.argmin(exponents))
    value = max(0.0, float(exponents[best]))
    offsets = log_ratios - value * gaps
    constant = math.exp(offsets.max() if assouad else offsets.min())

    order = np.argsort(-exponents if assouad else exponents, kind="stable")[:_EVIDENCE_SIZE]
    evidence = tuple(
        Evidence(
            {
                "x": space.point_ids[records[i][0]],
                "R": str(scales[records[i][1]]),
                "r": str(scales[records[i][2]]),
            },
            float(gaps[i]),
            float(log_ratios[i]),
        )
        for i in order
    )
    return DimensionReport(
        MEASURE_ASSOUAD if assouad else MEASURE_LOWER,
        "ball_ratio",
        value,
        evidence=evidence,
        constant=constant,
        window=(window.r_min, window.r_max),
        extreme=float(exponents[best]),
        flags=tuple(flags),
    )


@dataclass(frozen=True)
class DoublingConstant:
    value: Union[int, Fraction]
    form: str
    witness: Optional[dict[str, Any]] = None
    flags: tuple[str, ...] = ()

    def __float__(self) -> float:
        return float(self.value)


def _doubling_radii(space: FiniteMetricSpace, window: Optional[ScaleWindow]) -> list[Fraction]:
    if window is not None:
        return window.grid(Fraction(1, 2))
    smallest = space.min_positive_distance
    if smallest is None:
        return []
    radii = []
    r = as_fraction(space.diameter)
    while r >= as_fraction(smallest) / 2:
        radii.append(r)
        r /= 2
    return radii


def doubling_constant(
    space: FiniteMetricSpace,
    tree: Optional[CubeTree] = None,
    mu: Optional[MassAssignment] = None,
    window: Optional[ScaleWindow] = None,
    cap: int = EXACT_COVER_CAP,
) -> DoublingConstant:
    """sup N(x, 2r, r) over points and a halving radius grid, or with a measure
    sup mu(B(x, 2r)) / mu(B(x, r))"""
    radii = _doubling_radii(space, window)
    if mu is None:
        best, witness, flags = 1, None, set()
        for x in range(space.n):
            for r in radii:
                mode = "exact" if len(space.ball(x, 2 * r)) <= cap else "greedy"
                if mode == "greedy":
                    flags.add("greedy")
                count = _covering_number_indices(space, x, 2 * r, r, mode, cap)
                if count > best:
                    best, witness = count, {"x": space.point_ids[x], "r": str(r), "mode": mode}
        if "greedy" in flags:
            logger.warning("some balls exceed the exact covering cap; greedy counts used")
        return DoublingConstant(best, "set", witness, tuple(sorted(flags)))

    if tree is None:
        raise InvalidParams("the measure form needs the tree of the mass assignment")
    owner = leaf_of_point(tree)
    best_ratio, witness = Fraction(1), None
    for x in range(space.n):
        row = space.units[x]
        for r in radii:
            small = np.unique(owner[row <= space.threshold(r)])
            large = np.unique(owner[row <= space.threshold(2 * r)])
            ratio = sum((mu.mass(int(c)) for c in large), Fraction(0)) / sum(
                (mu.mass(int(c)) for c in small), Fraction(0)
            )
            if ratio > best_ratio:
                best_ratio, witness = ratio, {"x": space.point_ids[x], "r": str(r)}
    return DoublingConstant(best_ratio, "measure", witness)
