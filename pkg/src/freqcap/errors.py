"""Exception hierarchy.

Every domain error derives from :class:`FreqcapError` (and ``ValueError``), so
the CLI can map them all to exit status 1 while library callers can catch the
specific condition.
"""

from __future__ import annotations


class FreqcapError(ValueError):
    """Base class for all domain errors raised by freqcap."""


# kernel
class NonStochasticRow(FreqcapError):
    """A kernel row does not sum to one."""


class NegativeEntry(FreqcapError):
    """A kernel entry is negative."""


class AllZeroColumn(FreqcapError):
    """A kernel column has no positive entry, so no condition number exists."""


class DimensionOverflow(FreqcapError):
    """A Kronecker power would exceed the materialization cap."""


class SingularGram(FreqcapError):
    """``W W^T`` is numerically singular; the log-det penalty is -inf."""


class ParameterOutOfRange(FreqcapError):
    """A kernel-family parameter violates the family's constraints."""


class NoClosedForm(FreqcapError):
    """No closed-form penalty is known for this kernel."""


# entropy
class OutOfRange(FreqcapError):
    """Argument outside the function's domain."""


# channel
class DimensionMismatch(FreqcapError):
    """Input, kernel and config dimensions disagree."""


class ConstraintViolated(FreqcapError):
    """A count vector does not meet the total-count constraint."""


class InvalidProbabilityVector(FreqcapError):
    """A probability vector is negative or does not sum to one."""


# infodensity
class InfeasibleMean(FreqcapError):
    """The requested prior mean cannot be reached on the support."""


class StateSpaceTooLarge(FreqcapError):
    """An exact enumeration would exceed its state budget."""


class TruncationExceeded(FreqcapError):
    """An output count lies beyond the enumerated truncation cap."""


class ColumnBoundViolated(FreqcapError):
    """A column sum is below ``n**-eta``."""


# bounds
class NotWellConditioned(FreqcapError):
    """The kernel fails the well-conditioning check for the supplied parameters."""


class RegimeViolation(FreqcapError):
    """The DNA regime parameter beta is outside the admissible interval."""


class InvalidParams(FreqcapError):
    """Feinstein-bound parameters are invalid."""


# experiments
class RejectionStall(FreqcapError):
    """Rejection sampling onto the constraint set accepts too rarely."""


class InfeasibleTarget(FreqcapError):
    """The total-count target ``n*g`` is not an integer."""
