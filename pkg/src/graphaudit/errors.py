"""Exception hierarchy shared across the toolkit.

The CLI maps these onto stable exit codes: usage errors exit 1, ParseError
and DataError exit 2, anything else exits 3.
"""


class AuditError(Exception):
    """Base class for all toolkit errors."""


class ParseError(AuditError):
    """A malformed input file. Carries the offending path and line number."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class DataError(AuditError):
    """Semantically invalid data (shapes, ranges, degenerate inputs)."""


class GuaranteeError(DataError):
    """A conformal guarantee is unattainable for the given alpha, p and N.

    Raised instead of clamping the order-statistic index, which would
    silently void the coverage statement.
    """

    def __init__(self, mode, alpha, p, n, b_index):
        self.mode = mode
        self.alpha = alpha
        self.p = p
        self.n = n
        self.b_index = b_index
        super().__init__(
            f"guarantee unattainable at this N: mode={mode} alpha={alpha} "
            f"p={p} N={n} requires order statistic {b_index} > N"
        )
