"""Exception hierarchy shared by every module.

Each class carries the CLI exit code it maps to.
"""


class CMetricError(Exception):
    exit_code = 1


class DomainError(CMetricError, ValueError):
    """An operation was applied outside its domain (division by zero, empty space, ...)."""


class ContractError(CMetricError):
    """A caller-supplied precondition does not hold."""


class WitnessError(ContractError):
    """An apartness (or other) witness does not certify what it claims."""


class ParseError(CMetricError, ValueError):
    exit_code = 2


class SearchBoundError(CMetricError):
    """A bounded search exhausted its stage bound without finding a witness."""

    exit_code = 4


class InvariantError(CMetricError):
    """An internal invariant failed; indicates a bug in this library."""

    exit_code = 3


class MetricViolation(DomainError):
    """A finite distance matrix is not a metric.

    ``kind`` is one of ``"shape"``, ``"diagonal"``, ``"negative"``, ``"symmetry"``,
    ``"triangle"``; ``indices`` names the offending entries.
    """

    def __init__(self, kind, indices, message):
        super().__init__(message)
        self.kind = kind
        self.indices = tuple(indices)
