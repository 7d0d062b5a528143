"""Custom exceptions for the application."""

from fractions import Fraction
from typing import List, Optional


class DensityCertError(Exception):
    """Base exception for all application errors."""

    pass


class IntervalError(DensityCertError):
    """Malformed interval or non-canonical interval set."""

    pass


class RationalParseError(DensityCertError, ValueError):
    """A string is not a valid 'p/q' or integer literal."""

    pass


class AddressError(DensityCertError):
    """Invalid address or address chain."""

    pass


class ConstructionError(DensityCertError):
    """Invalid construction parameters."""

    pass


class WindowError(ConstructionError):
    """Query reaches outside the window a local truncation was built for."""

    pass


class DensityError(DensityCertError):
    """Invalid density query."""

    pass


class WitnessError(DensityCertError):
    """Base exception for witness searches."""

    pass


class SequenceError(WitnessError):
    """Sequence specification is malformed or not monotone."""

    pass


class RangeExhaustedError(WitnessError):
    """A finite sequence or search range cannot decide the requested value."""

    pass


class CapExceededError(WitnessError):
    """A search hit its index cap."""

    def __init__(self, message: str, cap: int = None) -> None:  # type: ignore[assignment]
        super().__init__(message)
        self.cap = cap


class NeedsFinerEpsilonError(WitnessError):
    """A witness level could not be certified at the given enumeration threshold."""

    def __init__(
        self,
        message: str,
        level: int = None,  # type: ignore[assignment]
        epsilon: Optional[Fraction] = None,
        required_epsilon: Optional[Fraction] = None,
    ) -> None:
        super().__init__(message)
        self.level = level
        self.epsilon = epsilon
        self.required_epsilon = required_epsilon


class UnsupportedSetError(WitnessError):
    """Input set is outside what the finite-union device handles."""

    pass


class VerificationError(DensityCertError):
    """A certificate failed re-verification."""

    def __init__(self, message: str, failures: List[str] = None) -> None:  # type: ignore[assignment]
        super().__init__(message)
        self.failures = failures or []


class ResourceLimitError(DensityCertError):
    """Requested work exceeds configured limits."""

    pass
