"""Exception types shared across the package."""


class SymphonicError(Exception):
    """Base class for all package errors."""


class EvaluationDomainError(SymphonicError):
    """A scalar function was evaluated outside its mathematical domain.

    Carries the offending operation name and the value that violated it.
    """

    def __init__(self, op, value, detail=""):
        self.op = op
        self.value = value
        msg = f"domain error in {op}({value!r})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NonFiniteError(SymphonicError):
    """An evaluation produced a NaN or infinity."""

    def __init__(self, where, point=None):
        self.where = where
        self.point = point
        msg = f"non-finite value in {where}"
        if point is not None:
            msg += f" at point {tuple(point)}"
        super().__init__(msg)


class GeometryError(SymphonicError):
    """Metric degeneracy or other geometric failure, naming the point."""

    def __init__(self, message, point=None):
        self.point = point
        if point is not None:
            message += f" at point {tuple(point)}"
        super().__init__(message)


class DomainViolation(SymphonicError):
    """A point left the declared coordinate domain of a chart."""

    def __init__(self, name, point, axis=None):
        self.name = name
        self.point = point
        self.axis = axis
        msg = f"point {tuple(point)} outside domain of {name}"
        if axis is not None:
            msg += f" (coordinate {axis + 1})"
        super().__init__(msg)


class SingularWeightError(SymphonicError):
    """Weight scalar vanished where a negative exponent would be applied."""

    def __init__(self, point, p):
        self.point = point
        self.p = p
        super().__init__(
            f"singular weight: zero tensor norm at {tuple(point)} with exponent p={p} < 2"
        )


class ExprError(SymphonicError):
    """Base class for expression language errors."""


class ExprSyntaxError(ExprError):
    """Parse failure with character offset and the token set expected there."""

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} at offset {offset}"
        if expected:
            detail += " (expected: " + ", ".join(sorted(self.expected)) + ")"
        super().__init__(detail)


class ExprNameError(ExprError):
    """Unknown identifier or variable index out of range."""

    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class ExprEvaluationError(ExprError):
    """Runtime evaluation failure, annotated with the AST node location."""

    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} (at expression offset {offset})")


class ConfigError(SymphonicError):
    """Invalid run configuration; message names the offending entry."""
