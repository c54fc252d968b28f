"""Chain rules for positive maps, verified through their finite proof decompositions."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..channel_div import channel_divergence
from ..divergence import DivergenceKind, RenyiOrder, classical_renyi, geometric, quantum_divergence, sandwiched
from ..errors import OrderOutOfRange
from ..reverse_test import build_reverse_test
from ..quantum import (
    DensityOperator,
    PositiveMapRep,
    joint_eigenbasis,
    measure,
    measurement_map,
    pinch,
    tensor_power,
)
from .base import SEEDED_ONLY, kind_admits
from .models import compute_slack
from .pinching import spectrum_term


def add_bits(*terms: float) -> float:
    """Sum over the extended reals; any +inf term makes the sum +inf."""
    if any(math.isinf(t) and t > 0 for t in terms):
        return math.inf
    return float(sum(terms))


def max_over_basis(
    divergence: Callable[[np.ndarray, np.ndarray], float],
    e: PositiveMapRep,
    f: PositiveMapRep,
    basis: np.ndarray,
) -> tuple[float, list[float]]:
    """max_x D(E(|x><x|)||F(|x><x|)) over the columns of ``basis``."""
    values = []
    for x in range(basis.shape[1]):
        ket = basis[:, x]
        projector = np.outer(ket, ket.conj())
        values.append(divergence(e.apply(projector), f.apply(projector)))
    return max(values), values


class ChainRuleChecksMixin:
    def check_meta_chain(
        self,
        e: PositiveMapRep,
        f: PositiveMapRep,
        rho: DensityOperator,
        sigma: DensityOperator,
        order: RenyiOrder,
        kind: DivergenceKind | str = DivergenceKind.SANDWICHED,
        explore: bool = False,
        digest: str = "",
    ):
        """D(E rho||F sigma) <= D_alpha(P||Q) + max_x D(E(rho^x)||F(rho^x)) with (P, Q, rho^x) from the reverse test.

        The slack is that of the form above. The statement form D^_alpha(rho||sigma) +
        estimate(E||F), with the estimate seeded by the reverse-test states, is evaluated on
        the same instance, reported in the details and gates as well.

        Raises:
            SupportViolation: if rho is not supported on sigma.
        """
        kind = DivergenceKind(kind)
        gated = self._require(kind_admits(kind, order), order, f"{kind.value} meta chain rule", explore)
        rt = build_reverse_test(rho, sigma)

        lhs = quantum_divergence(kind, e.apply(rho), f.apply(sigma), order).value
        input_term = classical_renyi(rt.p, rt.q, order).value
        per_letter = [
            quantum_divergence(kind, e.apply(state), f.apply(state), order).value for state in rt.gamma_states
        ]
        channel_term = max(per_letter)
        proof_rhs = add_bits(input_term, channel_term)

        geometric_term = geometric(rho, sigma, order).value
        estimate = channel_divergence(e, f, order, kind, SEEDED_ONLY.with_seeds(rt.gamma_states))
        statement_rhs = add_bits(geometric_term, estimate.value_bits)
        statement_slack = compute_slack(lhs, statement_rhs)

        return self._result(
            f"meta_chain_{kind.value}",
            lhs,
            proof_rhs,
            order,
            gated=gated,
            digest=digest,
            holds=statement_slack >= -self.tol,
            details={
                "kind": kind.value,
                "letters": rt.size,
                "input_term": input_term,
                "channel_term": channel_term,
                "per_letter": per_letter,
                "proof_slack": compute_slack(lhs, proof_rhs),
                "geometric_term": geometric_term,
                "channel_estimate": estimate.value_bits,
                "statement_rhs": statement_rhs,
                "statement_slack": statement_slack,
            },
        )

    def check_geometric_chain(
        self,
        e: PositiveMapRep,
        f: PositiveMapRep,
        rho: DensityOperator,
        sigma: DensityOperator,
        order: RenyiOrder,
        explore: bool = False,
        digest: str = "",
    ):
        """Geometric chain rule for alpha in (0, 2]; no stabilization of the channel term."""
        result = self.check_meta_chain(e, f, rho, sigma, order, DivergenceKind.GEOMETRIC, explore, digest)
        details = {**result.details, "stabilization_used": False}
        return result.model_copy(update={"name": "geometric_chain", "details": details})

    def _sandwiched_chain_terms(
        self,
        e: PositiveMapRep,
        f: PositiveMapRep,
        rho: DensityOperator,
        sigma: DensityOperator,
        order: RenyiOrder,
    ) -> dict[str, float]:
        basis = joint_eigenbasis(sigma, pinch(sigma, rho))
        p, q = measure(basis, rho), measure(basis, sigma)
        channel_term, _ = max_over_basis(lambda a, b: sandwiched(a, b, order).value, e, f, basis)
        terms = {
            "lhs": sandwiched(e.apply(rho), f.apply(sigma), order).value,
            "input_term": classical_renyi(p, q, order).value,
            "channel_term": channel_term,
            "spectrum_term": spectrum_term(sigma, order),
        }
        terms["rhs"] = add_bits(terms["input_term"], terms["channel_term"], terms["spectrum_term"])
        return terms

    def check_sandwiched_chain(
        self,
        e: PositiveMapRep,
        f: PositiveMapRep,
        rho: DensityOperator,
        sigma: DensityOperator,
        order: RenyiOrder,
        explore: bool = False,
        digest: str = "",
    ):
        """D~(E rho||F sigma) <= D_alpha(p||q) + max_x D~(E|x><x|| F|x><x|) + alpha/(alpha-1) log2|spec(sigma)|.

        {|x>} is the joint eigenbasis of sigma and P_sigma(rho). Finite alpha in (0, 1)
        runs only with ``explore=True`` and never gates.

        Raises:
            OrderOutOfRange: for alpha = 1, and for alpha < 1 unless exploring.
        """
        if order.is_one:
            raise OrderOutOfRange("the sandwiched chain rule has no spectrum term at alpha = 1")
        gated = self._require(order.is_infinite or order.alpha > 1.0, order, "sandwiched chain rule", explore)
        terms = self._sandwiched_chain_terms(e, f, rho, sigma, order)
        return self._result(
            "sandwiched_chain",
            terms["lhs"],
            terms["rhs"],
            order,
            gated=gated,
            digest=digest,
            details={k: v for k, v in terms.items() if k not in ("lhs", "rhs")},
        )

    def check_preprocessing_chain(
        self,
        e: PositiveMapRep,
        f: PositiveMapRep,
        rho: DensityOperator,
        sigma: DensityOperator,
        order: RenyiOrder,
        basis: np.ndarray | None = None,
        kind: DivergenceKind | str = DivergenceKind.SANDWICHED,
        explore: bool = False,
        digest: str = "",
    ):
        """D(E(Λ rho)||F(Λ sigma)) <= D_alpha(p||q) + max_x D(E|x><x||F|x><x|) for the measurement Λ in ``basis``.

        D_alpha(p||q) is the classical divergence of the measured outcomes, itself a lower
        bound on the measured divergence.
        """
        kind = DivergenceKind(kind)
        gated = self._require(kind_admits(kind, order), order, f"{kind.value} pre-processed chain rule", explore)
        if basis is None:
            basis = joint_eigenbasis(sigma, pinch(sigma, rho))
        measurement = measurement_map(basis)
        rho_m, sigma_m = measurement.apply(rho), measurement.apply(sigma)
        lhs = quantum_divergence(kind, e.apply(rho_m), f.apply(sigma_m), order).value
        input_term = classical_renyi(measure(basis, rho), measure(basis, sigma), order).value
        channel_term, _ = max_over_basis(
            lambda a, b: quantum_divergence(kind, a, b, order).value, e, f, basis
        )
        return self._result(
            "preprocessing_chain",
            lhs,
            add_bits(input_term, channel_term),
            order,
            gated=gated,
            digest=digest,
            details={"kind": kind.value, "input_term": input_term, "channel_term": channel_term},
        )

    def check_regularized_chain(
        self,
        e: PositiveMapRep,
        f: PositiveMapRep,
        rho: DensityOperator,
        sigma: DensityOperator,
        order: RenyiOrder,
        n: int = 2,
        digest: str = "",
    ):
        """Sandwiched chain rule on n copies with every term divided by n.

        Also gates on the per-copy spectrum term shrinking with n, and reports the
        per-copy slack at every copy count from 1 to n.

        Raises:
            DimensionTooLarge: if a tensor power exceeds the dimension guard.
        """
        if not (order.is_infinite or order.alpha > 1.0):
            raise OrderOutOfRange("the regularized chain rule is stated for alpha in (1, inf]")
        slack_by_n = {}
        for copies in range(1, n + 1):
            terms = self._sandwiched_chain_terms(
                tensor_power(e, copies),
                tensor_power(f, copies),
                tensor_power(rho, copies),
                tensor_power(sigma, copies),
                order,
            )
            per_copy = {k: v / copies for k, v in terms.items()}
            slack_by_n[copies] = compute_slack(per_copy["lhs"], per_copy["rhs"])
        single_spectrum = spectrum_term(sigma, order)
        trend_ok = n == 1 or single_spectrum == 0.0 or per_copy["spectrum_term"] < single_spectrum
        return self._result(
            "regularized_chain",
            per_copy["lhs"],
            per_copy["rhs"],
            order,
            digest=digest,
            holds=trend_ok,
            details={
                "n": n,
                "input_term": per_copy["input_term"],
                "channel_term": per_copy["channel_term"],
                "spectrum_term": per_copy["spectrum_term"],
                "spectrum_term_single_copy": single_spectrum,
                "spectrum_trend_ok": trend_ok,
                "slack_by_n": slack_by_n,
            },
        )
