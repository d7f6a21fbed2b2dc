"""Exception hierarchy shared by all modules."""


class NoetherSurfError(Exception):
    """Base class for every error raised by the package."""


class UnboundSymbol(NoetherSurfError, KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unbound symbol {self.name!r}"


class DomainError(NoetherSurfError, ArithmeticError):
    """Evaluation left the real domain (pole, log of non-positive, ...)."""


class ParseError(NoetherSurfError, ValueError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


class ValidationError(NoetherSurfError, ValueError):
    """A loaded object violates one of its invariants."""

    def __init__(self, invariant, detail=""):
        text = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(text)
        self.invariant = invariant
        self.detail = detail


class DegenerateMetric(ValidationError):
    def __init__(self, detail=""):
        super().__init__("DegenerateMetric", detail)


class UnknownMetric(ValidationError):
    def __init__(self, name):
        super().__init__("UnknownMetric", name)
        self.name = name


class NoVolumePotential(NoetherSurfError):
    pass


class IntegrationPatternMiss(NoetherSurfError):
    pass


class ReductionError(NoetherSurfError):
    pass


class NotTranslation(ReductionError):
    pass


class NonCommuting(ReductionError):
    pass


class ResidualDependence(ReductionError):
    pass


class LeadingCoefficientVanishes(ReductionError):
    pass
