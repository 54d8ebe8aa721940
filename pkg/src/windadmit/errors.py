"""Exception hierarchy shared across the package."""


class WindadmitError(Exception):
    """Base class for all package errors."""


class MalformedProblemError(WindadmitError):
    """An optimization problem violates its structural invariants."""


class NumericBreakdownError(WindadmitError):
    """The solver could not continue (singular basis, iteration runaway)."""


class CaseSchemaError(WindadmitError):
    """A case document field is missing, mistyped, or out of range."""


class DanglingReferenceError(CaseSchemaError):
    """A case document references a bus that does not exist."""


class DimensionMismatchError(WindadmitError):
    """Array or series dimensions disagree with the network."""


class CapExceededError(WindadmitError):
    """Vertex enumeration would exceed the configured cap."""

    def __init__(self, count: int, cap: int):
        super().__init__(f"vertex enumeration would yield {count} vertices, above cap {cap}")
        self.count = count
        self.cap = cap


class NonMonotoneLadderError(WindadmitError):
    """The risk-approximation confidence ladder is not strictly increasing."""


class QuadratureError(WindadmitError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, achieved_tol: float):
        super().__init__(message)
        self.achieved_tol = achieved_tol


class BigMTooSmallError(WindadmitError):
    """A dual value reached the big-M envelope; results would be untrustworthy."""


class StaleResultError(WindadmitError):
    """A subproblem result was paired with a boundary it was not solved at."""


class ScucInfeasibleError(WindadmitError):
    """Committed capacity cannot cover load plus the requested reserve."""


class ConfigError(WindadmitError):
    """A run-configuration file is missing keys or holds invalid values."""
