"""Exception hierarchy shared by every module.

Each exception carries a short ``code`` used by the command-line front-end
as the reason token in ``FAIL <code>`` report lines.
"""


class QobsError(Exception):
    code = "error"


class AxiomViolation(QobsError):
    def __init__(self, axiom, witness=()):
        self.axiom = axiom
        self.witness = tuple(witness)
        self.code = f"axiom-{axiom}"
        super().__init__(f"axiom ({axiom}) violated at {self.witness}")


class MissingComplement(QobsError):
    code = "missing-complement"

    def __init__(self, element):
        self.element = element
        super().__init__(f"element {element!r} has no complement")


class DuplicateEntry(QobsError):
    code = "duplicate-entry"


class TooLarge(QobsError):
    code = "too-large"


class SizeOverflow(QobsError):
    code = "size-overflow"


class ClosureOverflow(QobsError):
    code = "closure-overflow"


class PreconditionFailed(QobsError):
    code = "precondition"


class NoRefinement(QobsError):
    code = "no-refinement"


class NotSurjective(QobsError):
    code = "not-surjective"


class NotSummable(QobsError):
    code = "not-summable"

    def __init__(self, prefix, message=None):
        self.prefix = tuple(prefix)
        super().__init__(message or f"partial sum undefined after prefix {self.prefix}")


class MeetUndefined(QobsError):
    code = "meet-undefined"

    def __init__(self, pair):
        self.pair = tuple(pair)
        super().__init__(f"meet of {self.pair} does not exist")


class TotalNotOne(QobsError):
    code = "total-not-one"


class DuplicatePoint(QobsError):
    code = "duplicate-point"


class FamilyInvalid(QobsError):
    code = "family-invalid"

    def __init__(self, reason, at=None):
        self.reason = reason
        self.at = at
        super().__init__(reason if at is None else f"{reason} (at t={at})")


class JauchPironFailed(QobsError):
    code = "jauch-piron"


class PartialFunction(QobsError):
    code = "partial-function"

    def __init__(self, point):
        self.point = point
        super().__init__(f"function table has no value at {point}")


class NotAdditive(QobsError):
    code = "not-additive"

    def __init__(self, pair):
        self.pair = tuple(pair)
        super().__init__(f"state is not additive at {self.pair}")


class UnitNotOne(QobsError):
    code = "unit-not-one"


class OutOfRange(QobsError):
    code = "out-of-range"


class EmptyStateSpace(QobsError):
    code = "empty-state-space"


class StructureMismatch(QobsError):
    code = "structure-mismatch"


class DimensionMismatch(QobsError):
    code = "dimension-mismatch"


class NotUnitVector(QobsError):
    code = "not-unit-vector"


class NotEffect(QobsError):
    code = "not-effect"


class IntervalSyntaxError(QobsError):
    code = "syntax"

    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} at position {position}")


class EmptyIntervalWarning(UserWarning):
    """A piece with lo > hi was dropped while parsing."""
