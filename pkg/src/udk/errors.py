"""Exception hierarchy shared by every module.

Validation problems derive from ``ValidationError`` (CLI exit code 2) and
resource caps from ``BudgetExceeded`` (exit code 3).
"""

from __future__ import annotations

from fractions import Fraction


class UdkError(Exception):
    """Root of all library errors."""


class ValidationError(UdkError, ValueError):
    """Input rejected before any computation started."""


class NonCoprimeBases(ValidationError):
    def __init__(self, a: int, b: int):
        super().__init__(f"bases {a} and {b} share a common factor")
        self.pair = (a, b)


class ZeroFrequency(ValidationError):
    def __init__(self):
        super().__init__("frequency vector must not be all zero")


class EmptyPointSet(ValidationError):
    def __init__(self):
        super().__init__("point set is empty")


class EmptyPartition(ValidationError):
    def __init__(self):
        super().__init__("partition has no breakpoints")


class Unsorted(ValidationError):
    def __init__(self, index: int):
        super().__init__(f"breakpoints not strictly increasing at index {index}")
        self.index = index


class UnsupportedDim(ValidationError):
    def __init__(self, dim: int):
        super().__init__(f"dimension {dim} is not supported here")
        self.dim = dim


class DimMismatch(ValidationError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"expected dimension {expected}, got {got}")


class OutOfRange(ValidationError):
    pass


class DegenerateRule(ValidationError):
    pass


class UnequalRatios(ValidationError):
    def __init__(self):
        super().__init__(
            "maps have unequal ratios; use khodak_fractal_partition instead"
        )


class DepthTooShallow(ValidationError):
    def __init__(self, depth: int, count: int):
        super().__init__(
            f"max_depth={depth} leaves the finest sets at least as heavy as 1/{count}"
        )


class ParseError(ValidationError):
    def __init__(self, text: str, position: int, reason: str):
        super().__init__(f"{reason} at position {position} in {text!r}")
        self.position = position


class SumNotOne(ValidationError):
    def __init__(self, deficit: Fraction):
        super().__init__(f"probabilities do not sum to 1 (deficit {deficit})")
        self.deficit = deficit


class UnknownExperiment(ValidationError):
    def __init__(self, name: str, known):
        super().__init__(f"unknown experiment {name!r}; known: {', '.join(known)}")


class IrrationallyRelated(ValidationError):
    def __init__(self):
        super().__init__("probabilities are not rationally related at this precision")


class TooLarge(UdkError):
    def __init__(self, n: int, cap: int):
        super().__init__(f"{n} points exceed the exact-enumeration cap {cap}")
        self.n, self.cap = n, cap


class BudgetExceeded(UdkError):
    def __init__(self, needed: int, cap: int):
        super().__init__(f"operation needs {needed} items, cap is {cap}")
        self.needed, self.cap = needed, cap


class NoConvergence(UdkError):
    def __init__(self, boxes):
        boxes = list(boxes)
        super().__init__(f"Newton iteration failed in boxes {boxes}")
        self.boxes = boxes


class NotApplicable(UserWarning):
    """Formula evaluated outside the regime it describes."""
