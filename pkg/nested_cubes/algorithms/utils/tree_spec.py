"""Symbolic, eventually self-similar cube-tree descriptions"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Optional

from .errors import DeltaOutOfRange, FormatError, InvalidParams
from .rationals import fraction_from_json, fraction_to_json

DELTA_BOUND = Fraction(1, 7)


class ChildKind(str, Enum):
    CENTRAL = "central"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class ChildSpec:
    type: int
    kind: ChildKind
    slot: Optional[int] = None


@dataclass(frozen=True)
class NodeType:
    children: tuple[ChildSpec, ...]

    @property
    def branching(self) -> int:
        return len(self.children)

    @property
    def boundary_count(self) -> int:
        return sum(1 for c in self.children if c.kind is ChildKind.BOUNDARY)


@dataclass(frozen=True)
class TreeSpec:
    """Types with ordered child lists; every type carries J central slots.

    `delta` must lie in (0, 1/7). Specs marked `relaxed` accept any delta in
    (0, 1); the mark does not take part in equality.
    """

    delta: Fraction
    types: tuple[NodeType, ...]
    root: int = 0
    J: int = 1
    relaxed: bool = field(default=False, compare=False)

    def __post_init__(self):
        upper = 1 if self.relaxed else DELTA_BOUND
        if not 0 < self.delta < upper:
            raise DeltaOutOfRange(
                f"delta={self.delta} outside (0, {upper})"
                + ("" if self.relaxed else "; pass relaxed=True to admit delta >= 1/7")
            )
        if not self.types:
            raise InvalidParams("a tree spec needs at least one type")
        if not 0 <= self.root < len(self.types):
            raise InvalidParams(f"root type {self.root} does not exist")
        if self.J < 1:
            raise InvalidParams("J must be a positive integer")

        for index, node in enumerate(self.types):
            if not node.children:
                raise InvalidParams(f"type {index} has no children")
            slots = sorted(c.slot for c in node.children if c.kind is ChildKind.CENTRAL)
            if slots != list(range(1, self.J + 1)):
                raise InvalidParams(
                    f"type {index} must have central slots 1..{self.J}, found {slots}"
                )
            for child in node.children:
                if not 0 <= child.type < len(self.types):
                    raise InvalidParams(f"type {index} refers to missing type {child.type}")
                if child.kind is ChildKind.BOUNDARY and child.slot is not None:
                    raise InvalidParams(f"type {index} has a boundary child with a slot")

        unreachable = set(range(len(self.types))) - self.reachable_types()
        if unreachable:
            raise InvalidParams(f"types {sorted(unreachable)} are unreachable from the root")

    def reachable_types(self) -> set[int]:
        seen = {self.root}
        stack = [self.root]
        while stack:
            for child in self.types[stack.pop()].children:
                if child.type not in seen:
                    seen.add(child.type)
                    stack.append(child.type)
        return seen

    @property
    def max_branching(self) -> int:
        return max(node.branching for node in self.types)

    def to_json(self) -> dict[str, Any]:
        types = []
        for node in self.types:
            children = []
            for child in node.children:
                entry: dict[str, Any] = {"type": child.type, "kind": child.kind.value}
                if child.slot is not None:
                    entry["slot"] = child.slot
                children.append(entry)
            types.append({"children": children})
        return {
            "delta": fraction_to_json(self.delta),
            "root": self.root,
            "J": self.J,
            "relaxed": self.relaxed,
            "types": types,
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "TreeSpec":
        try:
            types = tuple(
                NodeType(
                    tuple(
                        ChildSpec(
                            int(child["type"]),
                            ChildKind(child["kind"]),
                            None if child.get("slot") is None else int(child["slot"]),
                        )
                        for child in node["children"]
                    )
                )
                for node in obj["types"]
            )
            delta = fraction_from_json(obj["delta"])
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"malformed tree spec: {e}") from e
        return cls(
            delta,
            types,
            int(obj.get("root", 0)),
            int(obj.get("J", 1)),
            relaxed=bool(obj.get("relaxed", delta >= DELTA_BOUND)),
        )
