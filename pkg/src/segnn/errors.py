"""Exception types shared across the package.

Each carries a stable ``code`` that the command-line front end turns into an
exit status and echoes into JSON error reports.
"""


class SegnnError(Exception):
    code = "segnn-error"


class InvalidInputError(SegnnError, ValueError):
    code = "invalid-input"


class DegenerateTableError(InvalidInputError):
    """A contingency table with an empty class, zero expectation or zero variance."""

    code = "degenerate-table"


class AnalyticMomentsUnavailable(SegnnError):
    """Closed-form moments do not exist for this input (n < 4 or q > 2 off-diagonal terms)."""

    code = "analytic-moments-unavailable"


class UnsupportedError(SegnnError):
    code = "unsupported"
