"""Exception types.

The command line maps these onto exit codes: DataError means bad input
data or configuration (exit 1), NumericalError means a numerical
precondition failed (exit 2). Plain ValueError is reserved for
programming errors such as mismatched shapes.
"""


class CcadjustError(Exception):
    """Base class for package errors."""


class DataError(CcadjustError):
    """Invalid data or configuration: missing files or columns, bad cells,
    constant columns, ranks incompatible with the data."""


class NumericalError(CcadjustError):
    """A numerical precondition failed."""


class SymmetryError(NumericalError):
    """A matrix required to be symmetric is not, within tolerance."""


class NotPsdError(NumericalError):
    """A matrix required to be positive semidefinite has a significantly
    negative eigenvalue."""


class DegenerateWeightsError(NumericalError):
    """A weight matrix annihilates the all-ones vector, so an adjustment
    update is undefined."""


class DegenerateAxisError(CcadjustError):
    """A biplot vector is too short to carry a calibrated scale."""
