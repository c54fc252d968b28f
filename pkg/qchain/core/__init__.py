"""Numerical core: matrix kernel, states and maps, divergences, reverse tests, channel estimates."""

from .channel_div import (
    ChannelDivEstimate,
    SearchOptions,
    amortized_divergence,
    channel_divergence,
    regularized_sequence,
    stabilized_channel_divergence,
    unital_upper_ref,
)
from .divergence import (
    DivValue,
    DivergenceKind,
    MeasuredOptions,
    RenyiOrder,
    classical_renyi,
    geometric,
    max_divergence,
    measured,
    quantum_divergence,
    renyi_entropy,
    sandwiched,
)
from .errors import QChainError
from .quantum import DensityOperator, Distribution, PositiveMapRep
from .reverse_test import ReverseTest, apply_gamma, build_reverse_test, verify_reverse_test

__all__ = [
    "ChannelDivEstimate",
    "DensityOperator",
    "DivValue",
    "DivergenceKind",
    "Distribution",
    "MeasuredOptions",
    "PositiveMapRep",
    "QChainError",
    "RenyiOrder",
    "ReverseTest",
    "SearchOptions",
    "amortized_divergence",
    "apply_gamma",
    "build_reverse_test",
    "channel_divergence",
    "classical_renyi",
    "geometric",
    "max_divergence",
    "measured",
    "quantum_divergence",
    "regularized_sequence",
    "renyi_entropy",
    "sandwiched",
    "stabilized_channel_divergence",
    "unital_upper_ref",
    "verify_reverse_test",
]
