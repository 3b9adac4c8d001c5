"""Exception types raised across the package."""


class RadialControlError(Exception):
    """Base class for all package errors."""


class CostSpecError(RadialControlError, ValueError):
    """A cost specification is malformed or internally inconsistent."""


class EvalAtSingularOrigin(RadialControlError, ValueError):
    pass


class DivergentIntegral(RadialControlError, ArithmeticError):
    """An improper integral at the origin is infinite for the declared growth."""

    def __init__(self, message, sign=0):
        super().__init__(message)
        self.sign = sign


class NotMonotoneAtOrigin(RadialControlError, ValueError):
    pass


class InconsistentDeclaration(RadialControlError, ValueError):
    pass


class OriginValueInfinite(RadialControlError, ArithmeticError):
    def __init__(self, message, sign=0):
        super().__init__(message)
        self.sign = sign


class PolicyUndefinedAtOrigin(RadialControlError, ValueError):
    """Tangential motion was requested from exactly the origin."""


class PolicyError(RadialControlError, ValueError):
    pass
