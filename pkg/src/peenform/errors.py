"""Exception types shared across the package.

InputError derives from ValueError and NumericalError from RuntimeError so
callers that do not care about the finer classes can catch the builtins.
"""


class InputError(ValueError):
    """Invalid user input: bad document, bad argument, out-of-range size."""


class NumericalError(RuntimeError):
    """A solve failed for numerical reasons."""


class UnsupportedDegreeError(InputError):
    """Polynomial degree above the supported maximum."""


class OverConstrainedError(InputError):
    """More displacement constraints than moment degrees of freedom."""


class DegenerateConstraintsError(InputError):
    """Constraint set is rank deficient (for example duplicated points)."""


class SolverFailureError(NumericalError):
    """Direct factorization of a saddle-point system failed."""


class DegenerateAnovaError(InputError):
    """Error mean square is zero; the F statistics are undefined."""
