"""Pinching inequality, pinched quasi-divergence bound and spectrum growth."""

from __future__ import annotations

import math

from ..divergence import RenyiOrder, sandwiched, sandwiched_quasi
from ..errors import OrderOutOfRange
from ..numkernel import loewner_geq
from ..quantum import DensityOperator, PositiveMapRep, pinch, spectrum, tensor_power

PINCHING_TOL = 1e-9
SPECTRUM_STRICT_GAP = 1e-12


def _log2_quasi(q: float) -> float:
    if q <= 0.0:
        return -math.inf
    return math.log2(q)


def spectrum_term(sigma: DensityOperator, order: RenyiOrder) -> float:
    """alpha/(alpha-1) log2 |spec(sigma)|, or log2 |spec(sigma)| at infinity."""
    count = spectrum(sigma).count
    if order.is_infinite:
        return math.log2(count)
    return order.alpha / (order.alpha - 1.0) * math.log2(count)


class PinchingChecksMixin:
    def check_pinching_inequality(self, rho: DensityOperator, sigma: DensityOperator, digest: str = ""):
        """|spec(sigma)| P_sigma(rho) >= rho in the Loewner order; slack is the smallest eigenvalue."""
        count = spectrum(sigma).count
        pinched = pinch(sigma, rho)
        report = loewner_geq(count * pinched.matrix, rho.matrix, PINCHING_TOL)
        return self._result(
            "pinching_inequality",
            0.0,
            report.min_eigenvalue,
            tol=PINCHING_TOL,
            digest=digest,
            details={"spec_count": count, "min_eigenvalue": report.min_eigenvalue},
        )

    def check_pinching_lemma(
        self,
        e: PositiveMapRep,
        f: PositiveMapRep,
        rho: DensityOperator,
        sigma: DensityOperator,
        order: RenyiOrder,
        digest: str = "",
    ):
        """Q~(E rho||F sigma) <= |spec(sigma)|^alpha Q~(E(P rho)||F sigma), compared as log2 quasi-values.

        At infinity the additive form D~_inf(E rho||F sigma) <= log2|spec| + D~_inf(E(P rho)||F sigma) is used.
        """
        if order.is_one:
            raise OrderOutOfRange("the pinched quasi-divergence bound is stated for finite alpha and infinity")
        count = spectrum(sigma).count
        e_rho = e.apply(rho)
        e_pinched = e.apply(pinch(sigma, rho))
        f_sigma = f.apply(sigma)
        if order.is_infinite:
            lhs = sandwiched(e_rho, f_sigma, order).value
            pinched_term = sandwiched(e_pinched, f_sigma, order).value
            rhs = math.log2(count) + pinched_term
        else:
            lhs = _log2_quasi(sandwiched_quasi(e_rho, f_sigma, order.alpha))
            pinched_term = _log2_quasi(sandwiched_quasi(e_pinched, f_sigma, order.alpha))
            rhs = order.alpha * math.log2(count) + pinched_term
        return self._result(
            "pinching_lemma",
            lhs,
            rhs,
            order,
            digest=digest,
            details={"spec_count": count, "pinched_term": pinched_term, "trace_preserving": e.trace_preserving},
        )

    def check_spectrum_trend(self, sigma: DensityOperator, order: RenyiOrder, n: int = 2, digest: str = ""):
        """Per-copy spectrum term at n copies never exceeds the single-copy term.

        For n >= 2 and sigma with more than one distinct eigenvalue the decrease must be strict.
        """
        if not (order.is_infinite or order.alpha > 1.0):
            raise OrderOutOfRange("the spectrum term is defined for alpha in (1, inf]")
        count_1 = spectrum(sigma).count
        count_n = spectrum(tensor_power(sigma, n)).count
        per_copy_1 = spectrum_term(sigma, order)
        per_copy_n = spectrum_term(tensor_power(sigma, n), order) / n
        strictly_decreasing = bool(per_copy_n < per_copy_1 - SPECTRUM_STRICT_GAP)
        return self._result(
            "spectrum_trend",
            per_copy_n,
            per_copy_1,
            order,
            tol=1e-12,
            digest=digest,
            holds=strictly_decreasing or n == 1 or count_1 == 1,
            details={
                "n": n,
                "spec_count_1": count_1,
                "spec_count_n": count_n,
                "strictly_decreasing": strictly_decreasing,
            },
        )
