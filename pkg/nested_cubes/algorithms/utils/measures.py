import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .cubes import METRIC, CubeKind, CubeTree, max_branching, reduce_children
from .errors import (
    EtaInvalid,
    InvalidParams,
    NotEnoughInteriorChildren,
    POutOfRange,
    SourceMismatch,
    StructureError,
)
from .metric import FLOAT_RTOL, FiniteMetricSpace
from .rationals import Number, as_fraction, fraction_to_json, log_fraction

logger = logging.getLogger(__name__)

INTERIOR_FRACTION = Fraction(1, 6)


@dataclass(frozen=True, eq=False)
class MassAssignment:
    """Exact cube masses, stored as a table of distinct values plus one index per cube"""

    tree: CubeTree
    p: Optional[Fraction]
    eta: tuple[Fraction, ...]
    table: tuple[Fraction, ...]
    mass_id: np.ndarray
    label: str = "mu_p"

    def mass(self, cube: int) -> Fraction:
        return self.table[int(self.mass_id[cube])]

    @property
    def masses(self) -> list[Fraction]:
        return [self.table[i] for i in self.mass_id]

    @cached_property
    def log_masses(self) -> np.ndarray:
        logs = np.array([log_fraction(m) for m in self.table])
        return logs[self.mass_id]

    @cached_property
    def float_masses(self) -> np.ndarray:
        values = np.array([float(m) for m in self.table])
        return values[self.mass_id]

    def to_json(self) -> dict:
        return {
            "tree": self.tree.digest,
            "measure": self.label,
            "p": None if self.p is None else fraction_to_json(self.p),
            "eta": [fraction_to_json(e) for e in self.eta],
            "masses": [
                {"cube": c, "num": m.numerator, "den": m.denominator}
                for c, m in enumerate(self.masses)
            ],
        }


def _single_root(tree: CubeTree):
    if int(np.count_nonzero(tree.parent < 0)) != 1:
        raise StructureError("masses are normalized on a tree with a single top cube")


def _check_p(tree: CubeTree, p: Number) -> Fraction:
    p = as_fraction(p)
    M = max_branching(tree)
    if not 0 < p <= Fraction(1, M):
        raise POutOfRange(f"p={p} must lie in (0, 1/{M}]")
    return p


def _check_eta(eta: Sequence[Number]) -> tuple[Fraction, ...]:
    eta = tuple(as_fraction(e) for e in eta)
    if not eta or any(e <= 0 for e in eta) or sum(eta) != 1:
        raise EtaInvalid(f"eta must be positive and sum to 1, got {[str(e) for e in eta]}")
    return eta


def _distribute(tree: CubeTree, step_values: list[Fraction], step_id: np.ndarray):
    """Top-down products of step fractions; only distinct (mass, step) pairs are multiplied"""
    n_steps = len(step_values)
    table = [Fraction(1)]
    mass_id = np.zeros(tree.n_cubes, dtype=np.int64)
    for k in range(1, tree.depth + 1):
        sl = tree.level_slice(k)
        pairs = mass_id[tree.parent[sl]] * n_steps + step_id[sl]
        distinct, inverse = np.unique(pairs, return_inverse=True)
        base = len(table)
        table.extend(table[int(u) // n_steps] * step_values[int(u) % n_steps] for u in distinct)
        mass_id[sl] = base + inverse.reshape(-1)
    return tuple(table), mass_id


def build_mu_p_eta(tree: CubeTree, p: Number, eta: Sequence[Number]) -> MassAssignment:
    """Boundary children take p of their parent's mass; central slot j takes
    eta_j of what remains"""
    p = _check_p(tree, p)
    eta = _check_eta(eta)
    _single_root(tree)
    J = len(eta)

    is_central = tree.kind == CubeKind.CENTRAL
    central_counts = reduce_children(tree, is_central.astype(np.int64), np.add)
    inner = tree.child_count > 0
    wrong = np.flatnonzero(inner & (central_counts != J))
    if len(wrong):
        raise StructureError(
            f"cube {int(wrong[0])} has {int(central_counts[wrong[0]])} central children, expected {J}",
            witness=int(wrong[0]),
        )
    if np.any(tree.slot[is_central] > J) or np.any(tree.slot[is_central] < 1):
        raise StructureError("central slots must be numbered 1..J")

    # one step fraction per (slot, parent branching); slot 0 marks boundary
    parent_branching = np.zeros(tree.n_cubes, dtype=np.int64)
    non_root = tree.parent >= 0
    parent_branching[non_root] = tree.child_count[tree.parent[non_root]]
    slot = np.where(is_central, tree.slot, 0)
    keys = np.stack([slot, parent_branching], axis=1)
    distinct, step_id = np.unique(keys, axis=0, return_inverse=True)
    step_values = [
        p if s == 0 else eta[s - 1] * (1 - (int(branching) - J) * p)
        for s, branching in distinct.tolist()
    ]
    table, mass_id = _distribute(tree, step_values, step_id.reshape(-1))
    label = "mu_p" if J == 1 else "mu_p_eta"
    logger.debug("%s with p=%s on %d cubes: %d distinct masses", label, p, tree.n_cubes, len(table))
    return MassAssignment(tree, p, eta, table, mass_id, label)


def build_mu_p(tree: CubeTree, p: Number) -> MassAssignment:
    """mu_p: boundary children get p times the parent's mass, the central child the rest"""
    return build_mu_p_eta(tree, p, (Fraction(1),))


def build_counting_measure(tree: CubeTree) -> MassAssignment:
    """Normalized counting measure: each cube weighs its share of the points"""
    if tree.members is None:
        raise SourceMismatch("the counting measure needs a metric-sourced tree")
    _single_root(tree)
    total = len(tree.members[tree.parent.argmin()])
    values: dict[int, int] = {}
    mass_id = np.empty(tree.n_cubes, dtype=np.int64)
    for c, members in enumerate(tree.members):
        if len(members) == 0:
            raise StructureError(f"cube {c} has no members", witness=c)
        mass_id[c] = values.setdefault(len(members), len(values))
    table = tuple(Fraction(size, total) for size in values)
    return MassAssignment(tree, None, (), table, mass_id, "counting")


def leaf_of_point(tree: CubeTree) -> np.ndarray:
    if tree.members is None:
        raise SourceMismatch("ball masses need a metric-sourced tree")
    leaves = np.flatnonzero(tree.child_count == 0)
    owner = np.full(len(tree.point_ids), -1, dtype=np.int64)
    for c in leaves:
        owner[tree.members[c]] = c
    return owner


def ball_mass(
    space: FiniteMetricSpace,
    tree: CubeTree,
    mu: MassAssignment,
    x,
    t: Number,
) -> Fraction:
    """Exact mass of the leaf cubes meeting the closed ball B(x, t)"""
    if tree.source != METRIC:
        raise SourceMismatch("ball masses need a metric-sourced tree")
    owner = leaf_of_point(tree)
    hit = np.unique(owner[space.within(space.index(x), t)])
    return sum((mu.mass(int(c)) for c in hit), Fraction(0))


def ball_masses_float(
    space: FiniteMetricSpace, mu: MassAssignment, owner: np.ndarray, x: int, radii
) -> np.ndarray:
    """Floating-point ball masses B(x, r) for several radii at once"""
    masses = mu.float_masses
    row = space.units[x]
    out = np.empty(len(radii))
    for i, r in enumerate(radii):
        hit = np.unique(owner[row <= space.threshold(r)])
        out[i] = masses[hit].sum()
    return out


def _clearance(tree: CubeTree, space: FiniteMetricSpace, q: int) -> dict[int, float]:
    inside = np.zeros(space.n, dtype=bool)
    inside[tree.members[q]] = True
    outside = np.flatnonzero(~inside)
    clearance = {}
    for c in tree.children(q):
        if len(outside) == 0:
            clearance[c] = math.inf
        else:
            clearance[c] = float(space.units[int(tree.center[c]), outside].min())
    return clearance


def select_central_subcubes(
    tree: CubeTree, space: FiniteMetricSpace, q: int, J: int
) -> list[int]:
    """J children of q lying deepest inside q.

    The child sharing q's center comes first; the others follow by decreasing
    distance from their center to the points outside q, ties by cube id. Each
    selected child must keep a distance of at least (1/6) * scale * delta^k.
    """
    if tree.members is None:
        raise SourceMismatch("interior children are chosen on metric-sourced trees")
    kids = list(tree.children(q))
    if not kids:
        raise InvalidParams(f"cube {q} is a leaf")
    if not 1 <= J <= len(kids):
        raise InvalidParams(f"J={J} must lie in 1..{len(kids)} for cube {q}")

    clearance = _clearance(tree, space, q)
    ranked = sorted(
        kids,
        key=lambda c: (tree.center[c] != tree.center[q], -clearance[c], c),
    )
    threshold = INTERIOR_FRACTION * tree.radius(int(tree.level[q]))

    def deep_enough(c: int) -> bool:
        if math.isinf(clearance[c]):
            return True
        if space.exact:
            return space.to_length(clearance[c]) >= threshold
        return clearance[c] * (1 + FLOAT_RTOL) >= threshold

    qualifying = [c for c in ranked if deep_enough(c)]
    if len(qualifying) < J:
        raise NotEnoughInteriorChildren(
            f"cube {q} has {len(qualifying)} children at distance >= {threshold} "
            f"from its complement, {J} requested",
            witness={"cube": q, "qualifying": qualifying},
        )
    return qualifying[:J]


def assign_central_slots(tree: CubeTree, space: FiniteMetricSpace, J: int) -> CubeTree:
    """Relabel every non-leaf cube so that its J interior children are the central slots"""
    if tuple(space.point_ids) != tuple(tree.point_ids or ()):
        raise SourceMismatch("the space does not match the tree's points")
    kind = tree.kind.copy()
    slot = tree.slot.copy()
    non_root = tree.parent >= 0
    kind[non_root] = CubeKind.BOUNDARY
    slot[:] = 0
    for q in np.flatnonzero(tree.child_count > 0):
        for j, c in enumerate(select_central_subcubes(tree, space, int(q), J), start=1):
            kind[c] = CubeKind.CENTRAL
            slot[c] = j
    return replace(tree, kind=kind, slot=slot, J=J)
