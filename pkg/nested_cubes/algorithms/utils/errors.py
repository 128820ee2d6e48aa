"""Exceptions raised by the nested cube library"""

from typing import Any, Optional


class NestedCubesError(Exception):
    """Base class of every error raised by nested_cubes"""

    def __init__(self, message: str, witness: Optional[Any] = None):
        super().__init__(message)
        self.witness = witness


class InvalidParams(NestedCubesError):
    pass


class UnknownPoint(InvalidParams):
    pass


class FormatError(NestedCubesError):
    pass


# metric
class SeedConflict(NestedCubesError):
    pass


class InstanceTooLarge(NestedCubesError):
    pass


class InvalidScales(NestedCubesError):
    pass


# generators
class TooDeep(InvalidParams):
    pass


class TooLarge(NestedCubesError):
    pass


# cubes
class DeltaOutOfRange(InvalidParams):
    pass


class SandwichViolation(NestedCubesError):
    pass


class SourceMismatch(NestedCubesError):
    pass


class DepthExceeded(NestedCubesError):
    pass


# measures
class POutOfRange(InvalidParams):
    pass


class EtaInvalid(InvalidParams):
    pass


class StructureError(NestedCubesError):
    pass


class NotEnoughInteriorChildren(NestedCubesError):
    pass


# dimension
class WindowInvalid(InvalidParams):
    pass


class TreeTooShallow(NestedCubesError):
    pass


# analysis
class ParamsOutOfRange(InvalidParams):
    pass


class NotApplicable(NestedCubesError):
    pass


class TargetBelowSetDimension(NestedCubesError):
    pass


class TargetNotBracketed(NestedCubesError):
    def __init__(self, message: str, realized_range: tuple[float, float]):
        super().__init__(message, witness=realized_range)
        self.realized_range = realized_range


class CheckFailed(NestedCubesError):
    """A verification ran to completion and found a violation"""
