"""Exception hierarchy for qchain.

Every error exposes a stable ``code`` so the CLI can report failures as JSON.
"""

from __future__ import annotations

import re


class QChainError(ValueError):
    """Base class for all qchain input and domain errors."""

    @property
    def code(self) -> str:
        return re.sub(r"(?<!^)(?=[A-Z])", "_", type(self).__name__).lower()


class NonHermitianInput(QChainError):
    pass


class DimensionMismatch(QChainError):
    pass


class NonCommutingInputs(QChainError):
    pass


class DimensionTooLarge(QChainError):
    pass


class InvalidDimensions(QChainError):
    pass


class AlphabetMismatch(QChainError):
    pass


class InvalidOrder(QChainError):
    pass


class NearOneOrder(InvalidOrder):
    """Finite order too close to 1; callers should use the One tag instead."""


class SupportViolation(QChainError):
    """rho is not supported within sigma where the construction requires it."""


class OrderOutOfRange(QChainError):
    pass


class NonUnitalCandidate(QChainError):
    pass


class InvalidState(QChainError):
    pass


class UnsupportedMap(QChainError):
    pass


class ConfigError(QChainError):
    pass
