"""Exception hierarchy shared by every module."""


class CevError(Exception):
    """Base class for all errors raised by cevspec."""


class ParameterInvalid(CevError, ValueError):
    """Raw model inputs violate their domain constraints."""


class SingularGamma(CevError, ValueError):
    """A quantity undefined at gamma = 2 was requested."""


class ParameterPole(CevError, ValueError):
    """A gamma-function or series pole was hit.

    ``argument`` names which argument landed on the pole.
    """

    def __init__(self, message, argument=None):
        super().__init__(message)
        self.argument = argument


class PoleAtNonPositiveInteger(ParameterPole):
    pass


class ArgumentZero(CevError, ValueError):
    """Tricomi Psi evaluated at y = 0 where it is singular."""


class ExtensionNotApplicable(CevError, ValueError):
    """A finite theta was requested where no boundary condition is admissible."""


class CaseUncovered(CevError, ValueError):
    """The boundary-operator tables do not define this parameter value."""


class NoConvergence(CevError, ArithmeticError):
    """An extrapolation, series or root search failed to converge."""


class NonConvergent(NoConvergence):
    pass


class NonConvergentTail(NoConvergence):
    """Integral diverges; ``exponent`` carries the fitted growth exponent."""

    def __init__(self, message, exponent=None):
        super().__init__(message)
        self.exponent = exponent


class NonIntegrableCoefficient(CevError, ArithmeticError):
    pass


class NonPolynomialInput(CevError, TypeError):
    pass


class IntegerA(CevError, ValueError):
    pass


class WrongEndpoint(CevError, ValueError):
    pass


class WrongRegime(CevError, ValueError):
    pass


class ConfigInvalid(CevError, ValueError):
    pass


class MissingIncrements(CevError, ValueError):
    pass
