"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class NumericalError(ArithmeticError):
    """A numerical routine failed to reach its requested accuracy.

    Parameters
    ----------
    message : str
        Human readable description.
    est_abs_error : float, optional
        Best available estimate of the absolute error at failure.
    """

    def __init__(self, message, est_abs_error=float("nan")):
        super().__init__(message)
        self.est_abs_error = est_abs_error


class DivergentVarianceWarning(RuntimeWarning):
    """Mean gradient quantities exist but their sampling variance is infinite."""


class DegenerateCaseWarning(RuntimeWarning):
    """A closed form fell back to its degenerate (zero variance) branch."""


class ConfigError(ValueError):
    """An experiment configuration document is malformed."""
