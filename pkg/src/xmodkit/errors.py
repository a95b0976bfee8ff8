"""Exception hierarchy.  Every error carries an optional witness."""


class XModKitError(Exception):
    def __init__(self, message: str = "", witness=None):
        super().__init__(message)
        self.witness = witness


class AxiomViolation(XModKitError):
    pass


class UnknownElement(XModKitError):
    pass


class SizeBoundExceeded(XModKitError):
    pass


class DimensionMismatch(XModKitError):
    pass


class JacobiFailure(XModKitError):
    pass


class NotAnIdeal(XModKitError):
    pass


class NotCentral(XModKitError):
    pass


class NotNormal(XModKitError):
    pass


class NotExact(XModKitError):
    pass


class NotACocycle(XModKitError):
    pass


class NotIsometablic(XModKitError):
    pass


class NotTransitive(XModKitError):
    pass


class LiftMismatch(XModKitError):
    pass


class ObstructionNonzero(XModKitError):
    pass


class RelationNotEquivalence(XModKitError):
    pass


class IllDefinedComposition(XModKitError):
    pass


class SectionsNotIsometablic(XModKitError):
    pass


class NoEquivariantLift(XModKitError):
    pass


class SchemaError(XModKitError):
    pass


class UnknownReference(XModKitError):
    pass
