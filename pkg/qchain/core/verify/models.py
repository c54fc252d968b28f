"""Result models shared by checks and campaigns."""

from __future__ import annotations

import math
from typing import Any

from pydantic import BaseModel, ConfigDict, Field


def compute_slack(lhs: float, rhs: float) -> float:
    """rhs - lhs over the extended reals.

    An infinite right-hand side always holds; an infinite left-hand side against a
    finite right-hand side is a violation.
    """
    if math.isinf(rhs) and rhs > 0:
        return math.inf
    if math.isinf(lhs):
        return -math.inf if lhs > 0 else math.inf
    return rhs - lhs


class CheckResult(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str
    alpha: str | None = None
    lhs_bits: float
    rhs_bits: float
    slack: float
    passed: bool = Field(alias="pass")
    tol: float
    gated: bool = True
    exploration: bool = False
    instance_digest: str = ""
    details: dict[str, Any] = Field(default_factory=dict)

    @property
    def failed(self) -> bool:
        """A gated check that did not pass."""
        return self.gated and not self.passed

    def to_dict(self) -> dict[str, Any]:
        return self.model_dump(by_alias=True)
