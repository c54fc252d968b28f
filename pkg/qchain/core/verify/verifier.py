from __future__ import annotations

from .base import VerifierBase
from .chain import ChainRuleChecksMixin
from .entropy import EntropyChecksMixin
from .pinching import PinchingChecksMixin
from .suites import DivergenceSuitesMixin


class Verifier(
    ChainRuleChecksMixin,
    EntropyChecksMixin,
    PinchingChecksMixin,
    DivergenceSuitesMixin,
    VerifierBase,
):
    """Facade combining all inequality checks."""

    __slots__ = ()
