"""Reverse-test achievement, data processing, ordering, classical reduction and regularized sequences."""

from __future__ import annotations

import math
from typing import Literal

import numpy as np

from ..channel_div import regularized_sequence
from ..divergence import (
    DivergenceKind,
    RenyiOrder,
    classical_renyi,
    geometric,
    measured,
    quantum_divergence,
    sandwiched,
)
from ..constants import REVERSE_TEST_GAMMA_TOL
from ..errors import OrderOutOfRange, UnsupportedMap
from ..quantum import DensityOperator, PositiveMapRep, joint_eigenbasis, measure
from ..reverse_test import (
    build_reverse_test,
    order_is_gated,
    refine_reverse_test,
    verify_reverse_test,
)
from .base import kind_admits

ORDERING_TOL = 1e-9
REDUCTION_TOL = 1e-9
OrderingPair = Literal["measured_sandwiched", "sandwiched_geometric"]


def _deviation(a: float, b: float) -> float:
    if math.isinf(a) and math.isinf(b) and (a > 0) == (b > 0):
        return 0.0
    return abs(a - b)


class DivergenceSuitesMixin:
    def check_matsumoto(self, rho: DensityOperator, sigma: DensityOperator, order: RenyiOrder, digest: str = ""):
        """D_alpha(P||Q) = D^_alpha(rho||sigma), Gamma(P) = rho and Gamma(Q) = sigma for the optimal reverse test.

        The left-hand side is the divergence gap. The two Frobenius errors of Gamma are
        held to the reverse-test tolerance on their own. Orders above 2 are exploratory.
        """
        rt = build_reverse_test(rho, sigma)
        report = verify_reverse_test(rt, rho, sigma, [order])
        gated = order_is_gated(order)
        gap = (report.gaps if gated else report.exploratory_gaps)[order.label]
        refined = refine_reverse_test(rt, sigma, np.random.default_rng(0))
        refined_value = classical_renyi(refined.p, refined.q, order).value
        gamma_ok = max(report.gamma_p_error, report.gamma_q_error) <= REVERSE_TEST_GAMMA_TOL
        return self._result(
            "matsumoto",
            gap,
            0.0,
            order,
            gated=gated,
            digest=digest,
            holds=gamma_ok,
            details={
                **report.to_dict(),
                "gamma_within_tol": gamma_ok,
                "letters": rt.size,
                "refined_letters": refined.size,
                "refined_classical_bits": refined_value,
            },
        )

    def check_data_processing(
        self,
        e: PositiveMapRep,
        rho: DensityOperator,
        sigma: DensityOperator,
        order: RenyiOrder,
        kind: DivergenceKind | str = DivergenceKind.SANDWICHED,
        digest: str = "",
    ):
        """D(E rho||E sigma) <= D(rho||sigma) for a channel E."""
        kind = DivergenceKind(kind)
        if not (e.completely_positive and e.trace_preserving):
            raise UnsupportedMap("data processing is checked for quantum channels only")
        if not kind_admits(kind, order):
            raise OrderOutOfRange(f"{kind.value} data processing is not asserted at alpha={order}")
        lhs = quantum_divergence(kind, e.apply(rho), e.apply(sigma), order).value
        rhs = quantum_divergence(kind, rho, sigma, order).value
        return self._result(f"data_processing_{kind.value}", lhs, rhs, order, digest=digest, details={"kind": kind.value})

    def check_ordering(
        self,
        rho: DensityOperator,
        sigma: DensityOperator,
        order: RenyiOrder,
        pair: OrderingPair = "measured_sandwiched",
        digest: str = "",
    ):
        """measured lower bound <= sandwiched (alpha >= 1/2), or sandwiched <= geometric (alpha in (0, 2])."""
        if pair == "measured_sandwiched":
            if not kind_admits(DivergenceKind.SANDWICHED, order):
                raise OrderOutOfRange(f"measured <= sandwiched is not asserted at alpha={order}")
            lhs = measured(rho, sigma, order, self.measured_opts).value.value
            rhs = sandwiched(rho, sigma, order).value
        elif pair == "sandwiched_geometric":
            if not kind_admits(DivergenceKind.GEOMETRIC, order):
                raise OrderOutOfRange(f"sandwiched <= geometric is not asserted at alpha={order}")
            lhs = sandwiched(rho, sigma, order).value
            rhs = geometric(rho, sigma, order).value
        else:
            raise ValueError(f"unknown ordering pair '{pair}'")
        return self._result(f"ordering_{pair}", lhs, rhs, order, tol=ORDERING_TOL, digest=digest)

    def check_classical_reduction(self, rho: DensityOperator, sigma: DensityOperator, order: RenyiOrder, digest: str = ""):
        """For commuting rho, sigma every quantum divergence equals the classical one on the joint eigenbasis.

        Raises:
            NonCommutingInputs: if rho and sigma do not commute.
        """
        basis = joint_eigenbasis(sigma, rho)
        classical = classical_renyi(measure(basis, rho), measure(basis, sigma), order).value
        values = {
            "sandwiched": sandwiched(rho, sigma, order).value,
            "geometric": geometric(rho, sigma, order).value,
            "measured": measured(rho, sigma, order, self.measured_opts).value.value,
        }
        deviations = {k: _deviation(v, classical) for k, v in values.items()}
        return self._result(
            "classical_reduction",
            max(deviations.values()),
            0.0,
            order,
            tol=REDUCTION_TOL,
            digest=digest,
            details={"classical_bits": classical, **{f"{k}_bits": v for k, v in values.items()}},
        )

    def check_regularized_sequence(
        self,
        e: PositiveMapRep,
        f: PositiveMapRep,
        order: RenyiOrder,
        kind: DivergenceKind | str = DivergenceKind.SANDWICHED,
        digest: str = "",
    ):
        """f_2 >= f_1 for the product-seeded estimates, which also gives f_2 >= f_1 / 2."""
        seq = regularized_sequence(e, f, order, kind, n_max=2, opts=self.search)
        f1, f2 = seq.values
        return self._result(
            "regularized_sequence",
            f1,
            f2,
            order,
            digest=digest,
            details={"f": seq.values, "monotone_gaps": seq.monotone_gaps()},
        )
