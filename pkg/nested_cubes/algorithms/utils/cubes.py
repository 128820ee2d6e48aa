"""Generalized nested cube systems.

A CubeTree stores its cubes column-wise in level order: cube ids grow with
the level, and the children of a cube occupy the contiguous id range
``child_start[c] : child_start[c] + child_count[c]``. Metric-sourced trees
additionally carry the member points of every cube.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, replace
from enum import IntEnum
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterator, NamedTuple, Optional, Union

import numpy as np

from .errors import (
    DeltaOutOfRange,
    DepthExceeded,
    FormatError,
    InvalidParams,
    SandwichViolation,
    SourceMismatch,
    StructureError,
    TooLarge,
)
from .metric import FiniteMetricSpace, _greedy_net_indices
from .rationals import as_fraction, fraction_from_json, fraction_to_json
from .tree_spec import DELTA_BOUND, ChildKind, TreeSpec

logger = logging.getLogger(__name__)

MAX_UNFOLD_CUBES = 10**7

METRIC = "metric"
SPEC = "spec"


class CubeKind(IntEnum):
    ROOT = 0
    CENTRAL = 1
    BOUNDARY = 2

    @property
    def label(self) -> Optional[str]:
        return None if self is CubeKind.ROOT else self.name.lower()


@dataclass(frozen=True, eq=False)
class CubeTree:
    delta: Fraction
    source: str
    level: np.ndarray
    parent: np.ndarray
    kind: np.ndarray
    slot: np.ndarray
    center: np.ndarray
    child_start: np.ndarray
    child_count: np.ndarray
    origin: int
    unit_cube: int = 0
    J: int = 1
    scale: Fraction = Fraction(1)
    node_type: Optional[np.ndarray] = None
    members: Optional[tuple[np.ndarray, ...]] = None
    point_ids: Optional[tuple] = None
    flags: tuple[str, ...] = ()

    @property
    def n_cubes(self) -> int:
        return len(self.level)

    @cached_property
    def depth(self) -> int:
        return int(self.level.max()) if self.n_cubes else 0

    @cached_property
    def _level_start(self) -> np.ndarray:
        return np.searchsorted(self.level, np.arange(self.depth + 2), side="left")

    def level_slice(self, k: int) -> slice:
        return slice(int(self._level_start[k]), int(self._level_start[k + 1]))

    def children(self, cube: int) -> range:
        start = int(self.child_start[cube])
        return range(start, start + int(self.child_count[cube]))

    @property
    def is_leaf(self) -> np.ndarray:
        return self.child_count == 0

    def radius(self, k: int) -> Fraction:
        """The scale delta^k of level k, in the units of the space"""
        return self.scale * self.delta**k

    def point_label(self, index: int):
        return index if self.point_ids is None else self.point_ids[index]

    @cached_property
    def digest(self) -> str:
        canonical = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def to_json(self) -> dict[str, Any]:
        cubes = []
        for c in range(self.n_cubes):
            entry: dict[str, Any] = {
                "id": c,
                "k": int(self.level[c]),
                "center": self.point_label(int(self.center[c])),
                "parent": None if self.parent[c] < 0 else int(self.parent[c]),
                "kind": CubeKind(int(self.kind[c])).label,
                "children": list(self.children(c)),
            }
            if self.slot[c]:
                entry["slot"] = int(self.slot[c])
            if self.node_type is not None:
                entry["type"] = int(self.node_type[c])
            if self.members is not None:
                entry["members"] = [self.point_label(int(i)) for i in self.members[c]]
            cubes.append(entry)

        obj: dict[str, Any] = {
            "delta": fraction_to_json(self.delta),
            "scale": fraction_to_json(self.scale),
            "source": self.source,
            "J": self.J,
            "origin": self.point_label(self.origin),
            "unit_cube": self.unit_cube,
            "levels": self.depth + 1,
            "cubes": cubes,
        }
        if self.point_ids is not None:
            obj["points"] = list(self.point_ids)
        if self.flags:
            obj["flags"] = list(self.flags)
        return obj

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "CubeTree":
        try:
            source = obj["source"]
            point_ids = tuple(obj["points"]) if "points" in obj else None
            lookup = {pid: i for i, pid in enumerate(point_ids or ())}

            def point(value):
                return lookup[value] if point_ids is not None else int(value)

            cubes = sorted(obj["cubes"], key=lambda c: c["id"])
            if [c["id"] for c in cubes] != list(range(len(cubes))):
                raise FormatError("cube ids must be 0..n-1")
            parent = np.array(
                [-1 if c["parent"] is None else c["parent"] for c in cubes], dtype=np.int64
            )
            kind = np.array(
                [CubeKind.ROOT if c.get("kind") is None else CubeKind[c["kind"].upper()] for c in cubes],
                dtype=np.int8,
            )
            tree = _assemble(
                delta=fraction_from_json(obj["delta"]),
                source=source,
                level=np.array([c["k"] for c in cubes], dtype=np.int64),
                parent=parent,
                kind=kind,
                slot=np.array([c.get("slot") or 0 for c in cubes], dtype=np.int64),
                center=np.array([point(c["center"]) for c in cubes], dtype=np.int64),
                origin=point(obj["origin"]),
                unit_cube=int(obj.get("unit_cube", 0)),
                J=int(obj.get("J", 1)),
                scale=fraction_from_json(obj.get("scale", 1)),
                node_type=(
                    np.array([c["type"] for c in cubes], dtype=np.int64)
                    if cubes and all("type" in c for c in cubes)
                    else None
                ),
                members=(
                    tuple(
                        np.sort(np.array([point(m) for m in c["members"]], dtype=np.int64))
                        for c in cubes
                    )
                    if source == METRIC
                    else None
                ),
                point_ids=point_ids,
                flags=tuple(obj.get("flags", ())),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"malformed cube tree: {e}") from e

        declared = [list(c["children"]) for c in cubes]
        if declared != [list(tree.children(c)) for c in range(tree.n_cubes)]:
            raise FormatError("children lists disagree with parent links")
        return tree


def _assemble(**fields) -> CubeTree:
    """Derive the child ranges from parent links and build the tree"""
    level = fields["level"]
    parent = fields["parent"]
    n = len(level)
    if n == 0:
        raise FormatError("a cube tree needs at least one cube")
    if np.any(np.diff(level) < 0):
        raise FormatError("cubes must be listed in level order")
    if np.any(np.diff(parent) < 0) or np.any(parent >= np.arange(n)):
        raise FormatError("children of a cube must be contiguous and follow their parent")
    child_count = np.bincount(parent[parent >= 0], minlength=n).astype(np.int64)
    child_start = np.searchsorted(parent, np.arange(n), side="left").astype(np.int64)
    return CubeTree(child_start=child_start, child_count=child_count, **fields)


class Chain(NamedTuple):
    cubes: tuple[int, ...]
    kinds: tuple[CubeKind, ...]


def max_branching(tree: CubeTree) -> int:
    """M: the largest number of children of any cube"""
    return max(1, int(tree.child_count.max()))


def offspring_chains(tree: CubeTree, start: int, m: int) -> Iterator[Chain]:
    """Stream every descending chain of length m below `start`, depth first"""
    if not 0 <= start < tree.n_cubes:
        raise InvalidParams(f"cube {start} does not exist")
    remaining = tree.depth - int(tree.level[start])
    if m < 1 or m > remaining:
        raise DepthExceeded(
            f"chains of length {m} requested below cube {start}, only {remaining} levels remain"
        )

    def walk(path: list[int]) -> Iterator[Chain]:
        if len(path) == m + 1:
            yield Chain(
                tuple(path), tuple(CubeKind(int(tree.kind[c])) for c in path[1:])
            )
            return
        for child in tree.children(path[-1]):
            path.append(child)
            yield from walk(path)
            path.pop()

    yield from walk([start])


def reduce_children(tree: CubeTree, values: np.ndarray, ufunc: np.ufunc, fill=0) -> np.ndarray:
    """Apply `ufunc.reduce` to each cube's children values; leaves get `fill`"""
    out = np.full(tree.n_cubes, fill, dtype=np.result_type(values, type(fill)))
    inner = np.flatnonzero(tree.child_count > 0)
    if len(inner):
        out[inner] = ufunc.reduceat(values, tree.child_start[inner])
    return out


def unfold_spec(spec: TreeSpec, depth: int) -> CubeTree:
    """Explicit tree of the first depth+1 levels of a spec"""
    if depth < 0:
        raise InvalidParams("depth must be non-negative")

    n_types = len(spec.types)
    transitions = np.zeros((n_types, n_types), dtype=object)
    for t, node in enumerate(spec.types):
        for child in node.children:
            transitions[t, child.type] += 1
    counts = np.zeros(n_types, dtype=object)
    counts[spec.root] = 1
    total = 1
    for _ in range(depth):
        counts = counts.dot(transitions)
        total += int(counts.sum())
        if total > MAX_UNFOLD_CUBES:
            raise TooLarge(
                f"unfolding to depth {depth} exceeds {MAX_UNFOLD_CUBES} cubes"
            )

    # per-type child tables, flattened
    branching = np.array([node.branching for node in spec.types], dtype=np.int64)
    type_offset = np.concatenate([[0], np.cumsum(branching)[:-1]])
    flat = [c for node in spec.types for c in node.children]
    flat_type = np.array([c.type for c in flat], dtype=np.int64)
    flat_kind = np.array(
        [CubeKind.CENTRAL if c.kind is ChildKind.CENTRAL else CubeKind.BOUNDARY for c in flat],
        dtype=np.int8,
    )
    flat_slot = np.array([c.slot or 0 for c in flat], dtype=np.int64)

    level = [np.zeros(1, dtype=np.int64)]
    parent = [np.full(1, -1, dtype=np.int64)]
    kind = [np.zeros(1, dtype=np.int8)]
    slot = [np.zeros(1, dtype=np.int64)]
    types = [np.array([spec.root], dtype=np.int64)]
    center = [np.zeros(1, dtype=np.int64)]
    first_id, next_token = 0, 1

    for k in range(1, depth + 1):
        parents_types = types[-1]
        per_parent = branching[parents_types]
        n_children = int(per_parent.sum())
        parent_ids = np.repeat(np.arange(first_id, first_id + len(parents_types)), per_parent)
        starts = np.repeat(np.cumsum(per_parent) - per_parent, per_parent)
        rank = np.arange(n_children) - starts
        flat_index = type_offset[np.repeat(parents_types, per_parent)] + rank

        child_slot = flat_slot[flat_index]
        inherits = child_slot == 1
        fresh = ~inherits
        child_center = np.repeat(center[-1], per_parent)
        child_center[fresh] = next_token + np.arange(int(fresh.sum()))
        next_token += int(fresh.sum())

        first_id += len(parents_types)
        level.append(np.full(n_children, k, dtype=np.int64))
        parent.append(parent_ids)
        kind.append(flat_kind[flat_index])
        slot.append(child_slot)
        types.append(flat_type[flat_index])
        center.append(child_center)

    tree = _assemble(
        delta=spec.delta,
        source=SPEC,
        level=np.concatenate(level),
        parent=np.concatenate(parent),
        kind=np.concatenate(kind),
        slot=np.concatenate(slot),
        center=np.concatenate(center),
        origin=0,
        unit_cube=0,
        J=spec.J,
        node_type=np.concatenate(types),
    )
    logger.debug("unfolded spec to depth %d: %d cubes", depth, tree.n_cubes)
    return tree


def build_cube_tree(
    space: FiniteMetricSpace,
    delta: Union[Fraction, int],
    num_levels: int,
    origin,
) -> CubeTree:
    """Nested cubes over a finite metric space from nested greedy nets.

    Level k uses a net of radius scale * delta^k, seeded with the previous
    level's net (origin first). Centers attach to their nearest center one
    level up and points to their nearest deepest-level center, ties broken
    by point order. The result is validated before it is returned.
    """
    delta = as_fraction(delta)
    if not 0 < delta < DELTA_BOUND:
        raise DeltaOutOfRange(f"delta={delta} must lie in (0, 1/7) for metric trees")
    if num_levels < 1:
        raise InvalidParams("num_levels must be at least 1")
    x0 = space.index(origin)
    scale = max(Fraction(1), as_fraction(space.diameter))

    everything = np.arange(space.n)
    nets: list[np.ndarray] = []
    seeds = [x0]
    flags: list[str] = []
    for k in range(num_levels):
        net = _greedy_net_indices(space, everything, scale * delta**k, seeds)
        if len(nets) and len(nets[-1]) == space.n and "vacuous_levels" not in flags:
            flags.append("vacuous_levels")
            logger.warning(
                "levels from %d on repeat the full point set; deeper levels are vacuous", k
            )
        nets.append(np.sort(np.array(net, dtype=np.int64)))
        seeds = net

    levels, parents, centers = [], [], []
    cube_of = np.arange(len(nets[0]), dtype=np.int64)
    levels.append(np.zeros(len(nets[0]), dtype=np.int64))
    parents.append(np.full(len(nets[0]), -1, dtype=np.int64))
    centers.append(nets[0])
    next_id = len(nets[0])
    for k in range(num_levels - 1):
        upper, lower = nets[k], nets[k + 1]
        attach = np.argmin(space.units[np.ix_(lower, upper)], axis=1)
        par = cube_of[attach]
        order = np.lexsort((lower, par))
        ids = np.empty(len(lower), dtype=np.int64)
        ids[order] = next_id + np.arange(len(lower))
        levels.append(np.full(len(lower), k + 1, dtype=np.int64))
        parents.append(par[order])
        centers.append(lower[order])
        cube_of = ids
        next_id += len(lower)

    level = np.concatenate(levels)
    parent = np.concatenate(parents)
    center = np.concatenate(centers)
    n = len(level)

    central = np.zeros(n, dtype=bool)
    central[1:] = center[1:] == center[parent[1:]]
    kind = np.where(central, CubeKind.CENTRAL, CubeKind.BOUNDARY).astype(np.int8)
    kind[parent < 0] = CubeKind.ROOT

    leaf_of_point = cube_of[np.argmin(space.units[:, nets[-1]], axis=1)]
    members: list[np.ndarray] = [np.empty(0, dtype=np.int64)] * n
    order = np.argsort(leaf_of_point, kind="stable")
    bounds = np.searchsorted(leaf_of_point[order], np.arange(n + 1))
    for c in range(next_id - len(nets[-1]), n):
        members[c] = np.sort(order[bounds[c] : bounds[c + 1]])

    unit_cube = int(np.flatnonzero((level == 0) & (center == x0))[0])
    tree = _assemble(
        delta=delta,
        source=METRIC,
        level=level,
        parent=parent,
        kind=kind,
        slot=central.astype(np.int64),
        center=center,
        origin=x0,
        unit_cube=unit_cube,
        J=1,
        scale=scale,
        members=None,
        point_ids=space.point_ids,
        flags=tuple(flags),
    )
    for c in range(n - len(nets[-1]) - 1, -1, -1):
        kids = tree.children(c)
        members[c] = np.sort(np.concatenate([members[i] for i in kids]))
    tree = replace(tree, members=tuple(members))

    report = validate_tree(tree, space)
    sandwich = report.check("sandwich")
    if sandwich.status == FAIL:
        raise SandwichViolation(
            f"ball sandwich fails for cube {sandwich.witness['cube']}",
            witness=sandwich.witness,
        )
    if not report.passed:
        failed = report.failed()[0]
        raise StructureError(
            f"constructed tree fails {failed.name}", witness=failed.witness
        )
    logger.info(
        "built %d cubes on %d points over %d levels (delta=%s)",
        n,
        space.n,
        num_levels,
        delta,
    )
    return tree


PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    status: str
    witness: Optional[dict[str, Any]] = None


@dataclass(frozen=True)
class TreeValidation:
    checks: tuple[PropertyCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    def check(self, name: str) -> PropertyCheck:
        return next(c for c in self.checks if c.name == name)

    def failed(self) -> list[PropertyCheck]:
        return [c for c in self.checks if c.status == FAIL]


def validate_tree(tree: CubeTree, space: Optional[FiniteMetricSpace] = None) -> TreeValidation:
    """Check partition, nesting, ball sandwich, origin, center persistence and kinds"""
    if tree.source == METRIC:
        if space is None:
            raise SourceMismatch("a metric-sourced tree needs its space for validation")
        if tuple(space.point_ids) != tuple(tree.point_ids or ()):
            raise SourceMismatch("the space does not match the tree's points")
    elif space is not None:
        raise SourceMismatch("spec-sourced trees carry no metric data")

    checks = [
        _check_partition(tree, space),
        _check_nesting(tree),
        _check_sandwich(tree, space) if space is not None else PropertyCheck("sandwich", SKIPPED),
        _check_origin(tree),
        _check_persistence(tree),
        _check_kinds(tree),
    ]
    for c in checks:
        if c.status == FAIL:
            logger.debug("property %s failed: %s", c.name, c.witness)
    return TreeValidation(tuple(checks))


def _check_partition(tree: CubeTree, space: Optional[FiniteMetricSpace]) -> PropertyCheck:
    roots = np.flatnonzero(tree.parent < 0)
    if np.any(tree.level[roots] != 0):
        return PropertyCheck("partition", FAIL, {"cube": int(roots[tree.level[roots] != 0][0])})
    inner = np.flatnonzero(tree.parent >= 0)
    bad = inner[tree.level[tree.parent[inner]] != tree.level[inner] - 1]
    if len(bad):
        return PropertyCheck("partition", FAIL, {"cube": int(bad[0])})
    if space is None or tree.members is None:
        return PropertyCheck("partition", PASS)

    for k in range(tree.depth + 1):
        cubes = range(*tree.level_slice(k).indices(tree.n_cubes))
        covered = np.concatenate([tree.members[c] for c in cubes])
        counts = np.bincount(covered, minlength=space.n)
        wrong = np.flatnonzero(counts != 1)
        if len(wrong):
            p = int(wrong[0])
            owners = [c for c in cubes if p in tree.members[c]]
            return PropertyCheck(
                "partition",
                FAIL,
                {"level": k, "point": space.point_ids[p], "cubes": owners},
            )
    return PropertyCheck("partition", PASS)


def _check_nesting(tree: CubeTree) -> PropertyCheck:
    expected = np.repeat(np.arange(tree.n_cubes), tree.child_count)
    if not np.array_equal(expected, tree.parent[tree.parent >= 0]):
        return PropertyCheck("nesting", FAIL, {"reason": "parent links"})
    if tree.members is None:
        return PropertyCheck("nesting", PASS)
    for c in np.flatnonzero(tree.child_count > 0):
        union = np.sort(np.concatenate([tree.members[i] for i in tree.children(c)]))
        if not np.array_equal(union, tree.members[c]):
            return PropertyCheck("nesting", FAIL, {"cube": int(c)})
    return PropertyCheck("nesting", PASS)


def _check_sandwich(tree: CubeTree, space: FiniteMetricSpace) -> PropertyCheck:
    for c in range(tree.n_cubes):
        r = tree.radius(int(tree.level[c]))
        x = int(tree.center[c])
        inside = np.zeros(space.n, dtype=bool)
        inside[tree.members[c]] = True
        missing = np.flatnonzero(space.within(x, r / 3) & ~inside)
        if len(missing):
            return PropertyCheck(
                "sandwich",
                FAIL,
                {"cube": c, "point": space.point_ids[missing[0]], "bound": "inner"},
            )
        far = np.flatnonzero(inside & ~space.within(x, 2 * r))
        if len(far):
            return PropertyCheck(
                "sandwich",
                FAIL,
                {"cube": c, "point": space.point_ids[far[0]], "bound": "outer"},
            )
    return PropertyCheck("sandwich", PASS)


def _check_origin(tree: CubeTree) -> PropertyCheck:
    if tree.level[tree.unit_cube] != 0 or tree.center[tree.unit_cube] != tree.origin:
        return PropertyCheck("origin", FAIL, {"cube": tree.unit_cube})
    if tree.members is not None and tree.origin not in tree.members[tree.unit_cube]:
        return PropertyCheck("origin", FAIL, {"cube": tree.unit_cube})
    for k in range(tree.depth + 1):
        if tree.origin not in tree.center[tree.level_slice(k)]:
            return PropertyCheck("origin", FAIL, {"level": k})
    return PropertyCheck("origin", PASS)


def _check_persistence(tree: CubeTree) -> PropertyCheck:
    for k in range(tree.depth):
        upper = tree.center[tree.level_slice(k)]
        lower = tree.center[tree.level_slice(k + 1)]
        lost = np.setdiff1d(upper, lower)
        if len(lost):
            return PropertyCheck(
                "persistence", FAIL, {"level": k, "center": tree.point_label(int(lost[0]))}
            )
    return PropertyCheck("persistence", PASS)


def _check_kinds(tree: CubeTree) -> PropertyCheck:
    for c in np.flatnonzero(tree.child_count > 0):
        kids = np.arange(tree.child_start[c], tree.child_start[c] + tree.child_count[c])
        central = kids[tree.kind[kids] == CubeKind.CENTRAL]
        slots = sorted(int(s) for s in tree.slot[central])
        if slots != list(range(1, tree.J + 1)):
            return PropertyCheck("kinds", FAIL, {"cube": int(c), "slots": slots})
        same = kids[tree.center[kids] == tree.center[c]]
        if len(same) != 1 or tree.slot[same[0]] != 1:
            return PropertyCheck("kinds", FAIL, {"cube": int(c), "reason": "center"})
        if tree.J == 1 and np.any(tree.kind[kids[kids != same[0]]] != CubeKind.BOUNDARY):
            return PropertyCheck("kinds", FAIL, {"cube": int(c), "reason": "center"})
    return PropertyCheck("kinds", PASS)
