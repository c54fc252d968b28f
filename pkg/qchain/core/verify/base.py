from __future__ import annotations

from typing import Any

from loguru import logger

from ..channel_div import SearchOptions
from ..constants import CHECK_TOL
from ..divergence import DivergenceKind, MeasuredOptions, RenyiOrder
from ..errors import OrderOutOfRange
from .models import CheckResult, compute_slack

# Statement-form estimates only evaluate the caller's seeds plus the fixed candidates.
SEEDED_ONLY = SearchOptions(restarts=0, refine_iters=0)


def kind_admits(kind: DivergenceKind, order: RenyiOrder) -> bool:
    """Orders where the divergence family satisfies data processing."""
    if kind is DivergenceKind.SANDWICHED:
        return order.is_infinite or order.alpha >= 0.5
    return not order.is_infinite and order.alpha <= 2.0


class VerifierBase:
    """Tolerance and search settings shared by every check mixin."""

    def __init__(
        self,
        tol: float = CHECK_TOL,
        search: SearchOptions | None = None,
        measured_opts: MeasuredOptions | None = None,
    ):
        self.tol = tol
        self.search = search or SearchOptions(restarts=4, refine_iters=50)
        self.measured_opts = measured_opts or MeasuredOptions(restarts=2, refine_iters=50)

    def _require(self, condition: bool, order: RenyiOrder, what: str, explore: bool) -> bool:
        """Return whether the check is gated; raise when out of range and not exploring."""
        if condition:
            return True
        if not explore:
            raise OrderOutOfRange(f"{what} is not asserted at alpha={order}")
        return False

    def _result(
        self,
        name: str,
        lhs: float,
        rhs: float,
        order: RenyiOrder | None = None,
        *,
        gated: bool = True,
        tol: float | None = None,
        digest: str = "",
        details: dict[str, Any] | None = None,
        holds: bool = True,
    ) -> CheckResult:
        tol = self.tol if tol is None else tol
        slack = compute_slack(float(lhs), float(rhs))
        result = CheckResult(
            name=name,
            alpha=order.label if order is not None else None,
            lhs_bits=float(lhs),
            rhs_bits=float(rhs),
            slack=slack,
            passed=slack >= -tol and holds,
            tol=tol,
            gated=gated,
            exploration=not gated,
            instance_digest=digest,
            details=details or {},
        )
        if result.failed:
            logger.error(f"{name} failed at alpha={result.alpha}: slack {slack:.3e} ({digest})")
        elif not gated:
            logger.warning(f"{name} ran in exploration mode at alpha={result.alpha}: slack {slack:.3e}")
        return result
