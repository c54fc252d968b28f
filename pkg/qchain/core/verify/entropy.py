from __future__ import annotations

from ..divergence import RenyiOrder, renyi_entropy, sandwiched
from ..errors import DimensionMismatch, NonUnitalCandidate, OrderOutOfRange
from ..quantum import DensityOperator, PositiveMapRep
from .chain import max_over_basis, add_bits


class EntropyChecksMixin:
    def check_unital_entropy(
        self,
        e: PositiveMapRep,
        f_unital: PositiveMapRep,
        rho: DensityOperator,
        order: RenyiOrder,
        digest: str = "",
    ):
        """-H(E rho) <= -H(rho) + max_x D~(E|x><x|| F|x><x|) over the eigenbasis of rho.

        This is the sandwiched chain rule at sigma = I with a unital F, and implies
        H(E rho) - H(rho) >= -D~(E||F) for this F.
        """
        if not (order.is_one or order.is_infinite or order.alpha > 1.0):
            raise OrderOutOfRange("the unital entropy bound is stated for alpha in [1, inf]")
        if not f_unital.unital:
            raise NonUnitalCandidate("the reference map must be unital")
        if (e.d_in, e.d_out) != (f_unital.d_in, f_unital.d_out):
            raise DimensionMismatch("E and F must act between the same spaces")

        out_entropy = renyi_entropy(e.apply(rho), order)
        in_entropy = renyi_entropy(rho, order)
        channel_term, _ = max_over_basis(
            lambda a, b: sandwiched(a, b, order).value, e, f_unital, rho.eigen.eigenvectors
        )
        return self._result(
            "unital_entropy",
            -out_entropy,
            add_bits(-in_entropy, channel_term),
            order,
            digest=digest,
            details={
                "entropy_in": in_entropy,
                "entropy_out": out_entropy,
                "entropy_gain": out_entropy - in_entropy,
                "channel_term": channel_term,
            },
        )
