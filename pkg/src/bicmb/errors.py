"""Exception hierarchy shared by the analysis and simulation modules."""


class BicmbError(Exception):
    """Base class for all package errors."""


class ModelError(BicmbError):
    """A code / de-multiplexer combination the analysis cannot handle."""


class InvalidGenerator(ModelError):
    pass


class CatastrophicCode(ModelError):
    pass


class PeriodMismatch(ModelError):
    pass


class NonTerminating(ModelError):
    pass


class BudgetExhausted(ModelError):
    pass


class DesignUnverifiable(ModelError):
    pass


class MappingConstraintUnsatisfiable(ModelError):
    pass


class PunctureValidationFailed(ModelError):
    pass


class TableMismatch(BicmbError):
    pass


class AllZeroVector(BicmbError, ValueError):
    pass


class EmptySpectrum(BicmbError, ValueError):
    pass


class QOutOfRange(BicmbError, ValueError):
    pass


class InsufficientPoints(BicmbError, ValueError):
    pass


class ZeroProbability(BicmbError, ValueError):
    pass


class DimensionGuard(BicmbError, ValueError):
    pass


class NonPolynomialRemainder(BicmbError, ArithmeticError):
    pass


class NoConvergence(BicmbError, ArithmeticError):
    pass


class ConfigInvalid(BicmbError, ValueError):
    pass
