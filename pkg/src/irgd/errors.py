"""Exception and warning types shared across the package."""


class ContractViolation(ValueError):
    """An operation was called with arguments outside its contract
    (mismatched base points, wrong ambient shape, ...)."""


class RetractionSingularityError(ArithmeticError):
    """A retraction produced a point off the manifold (rank collapse)."""


class TruncationTieWarning(RuntimeWarning):
    """Truncated SVD with (near-)tied singular values at the cut."""


class RegimeWarning(UserWarning):
    """Solver parameters outside the regime covered by the convergence theory."""


class ConfigError(ValueError):
    pass


class IdxParseError(ValueError):
    """Malformed IDX file. ``offset`` is the byte offset where parsing failed."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class TraceFormatError(ValueError):
    """A trace CSV (or its audit sidecar) does not have the expected layout."""
