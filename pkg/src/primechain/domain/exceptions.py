"""
Domain exceptions for primechain.

Custom exceptions for domain-specific error handling. Every exception carries a
human-readable message and a structured ``details`` dict that the CLI prints
verbatim and the chain store can persist.
"""

from typing import Any, Optional

from gmpy2 import mpz


class DomainException(Exception):
    """Base exception for all domain errors."""

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ParseError(DomainException):
    """Raised when a decimal literal or rule specification is malformed."""

    def __init__(self, message: str, text: Optional[str] = None):
        snippet = text if text is None or len(text) <= 40 else text[:37] + "..."
        super().__init__(message, details={"text": snippet} if snippet else {})
        self.text = text


class ArithmeticDomainError(DomainException):
    """Raised when an operation is applied outside its mathematical domain."""

    def __init__(self, message: str, operation: Optional[str] = None):
        super().__init__(message, details={"operation": operation} if operation else {})
        self.operation = operation


class PrecisionError(DomainException):
    """Raised when the working precision cannot decide a result (caller escalates)."""

    def __init__(self, message: str = "Insufficient working precision", bits: int = 0):
        super().__init__(message, details={"bits": bits})
        self.bits = bits


class PrecisionExhaustedError(PrecisionError):
    """
    Raised when escalation has hit its ceiling or the seed's known digits run out.

    ``horizon`` is the number of terms that were verified before the failing step.
    """

    def __init__(self, step: int, horizon: int, bits: int = 0, reason: str = ""):
        message = f"Precision exhausted at step {step} (verified horizon: {horizon} terms)"
        if reason:
            message = f"{message}: {reason}"
        super().__init__(message, bits=bits)
        self.details.update({"step": step, "horizon": horizon})
        self.step = step
        self.horizon = horizon


class ExactTieError(DomainException):
    """Raised when a value sits exactly on a half-integer and the rounding is undefined."""

    def __init__(self, value: str):
        super().__init__(f"Exact half-integer tie at {value}", details={"value": value})
        self.value = value


class ResourceGuardError(DomainException):
    """Raised when a computation would exceed a configured size guard."""

    def __init__(self, message: str, limit: int = 0):
        super().__init__(message, details={"limit": limit})
        self.limit = limit


class InfeasibleError(DomainException):
    """Raised when a chain's next window holds no probable prime."""

    def __init__(self, step: int, window_lo: int, window_hi: int):
        super().__init__(
            f"No probable prime in window [{mpz(window_lo)}, {mpz(window_hi)}) at step {step}",
            details={
                "step": step,
                "window_lo": mpz(window_lo).digits(10),
                "window_hi": mpz(window_hi).digits(10),
            },
        )
        self.step = step
        self.window_lo = window_lo
        self.window_hi = window_hi


class EmptyIntersectionError(DomainException):
    """Raised when no real seed reproduces a given list of primes."""

    def __init__(self, level: int, message: Optional[str] = None):
        super().__init__(
            message or f"Empty intersection at level {level}: chain is not realizable",
            details={"level": level},
        )
        self.level = level


class ConfigurationError(DomainException):
    """Raised when there's an error in configuration."""

    def __init__(self, message: str, config_key: Optional[str] = None):
        super().__init__(
            message,
            details={"config_key": config_key} if config_key else {},
        )
        self.config_key = config_key


class ProfileNotFoundError(DomainException):
    """Raised when a search profile cannot be found."""

    def __init__(self, name: str):
        super().__init__(
            f"Search profile not found: {name}",
            details={"profile": name},
        )
        self.name = name


class StoreError(DomainException):
    """Raised when the chain store cannot be read or written."""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message, details={"path": path} if path else {})
        self.path = path
