"""Exception hierarchy for metapool."""


class MetapoolError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MetapoolError, ValueError):
    """Input record failed validation."""


class NonMonotone(ValidationError):
    pass


class NonFinite(ValidationError):
    pass


class NegativeForCountMeasure(ValidationError):
    pass


class DuplicateKey(ValidationError):
    pass


class EmptyGroup(MetapoolError, LookupError):
    pass


class ZeroIQR(MetapoolError, ValueError):
    """Bowley skewness is undefined because Q(75) == Q(25)."""


class GammaFitFailure(MetapoolError, RuntimeError):
    pass


class InvalidBounds(MetapoolError, ValueError):
    pass


class DomainError(MetapoolError, ValueError):
    pass


class TooFewModels(MetapoolError, ValueError):
    pass


class TooShort(MetapoolError, ValueError):
    pass


class TooFewSubareas(MetapoolError, ValueError):
    pass


class EmptyRows(MetapoolError, ValueError):
    pass


class InputError(MetapoolError):
    """One or more rows of an input file could not be parsed.

    ``diagnostics`` holds one human-readable message per offending line.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(self.diagnostics))
