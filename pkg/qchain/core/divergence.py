"""Classical and quantum Rényi divergences and entropies, in bits.

Quantum divergences accept density operators or general positive operators
(unnormalized), in which case ``D = log2(Q) / (alpha - 1)`` is used as is.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Literal

import numpy as np
from loguru import logger
from scipy.linalg import expm
from scipy.optimize import minimize

from .constants import DEFAULT_REFINE_ITERS, NEAR_ONE_TOL, SUPPORT_CUTOFF
from .errors import AlphabetMismatch, DimensionMismatch, InvalidOrder, NearOneOrder
from .numkernel import (
    HermitianEigen,
    adjoint,
    as_matrix,
    hermitian_eig,
    psd_eigenvalues,
    psd_log,
    psd_power,
    spectral_apply,
    support_mask,
    support_projector,
    symmetrize,
)
from .quantum import (
    DensityOperator,
    Distribution,
    joint_eigenbasis,
    measure,
    pinch,
    random_unitary,
)

__all__ = [
    "DivValue",
    "DivergenceKind",
    "Distribution",
    "MeasuredOptions",
    "MeasuredResult",
    "RenyiOrder",
    "classical_renyi",
    "geometric",
    "geometric_quasi",
    "max_divergence",
    "measured",
    "quantum_divergence",
    "renyi_entropy",
    "sandwiched",
    "sandwiched_quasi",
    "supported_on",
]

Operand = DensityOperator | np.ndarray


class DivergenceKind(str, Enum):
    SANDWICHED = "sandwiched"
    GEOMETRIC = "geometric"


@dataclass(frozen=True)
class RenyiOrder:
    """Rényi order alpha in (0, inf]: a finite value other than 1, exactly one, or infinity."""

    tag: Literal["finite", "one", "inf"]
    value: float | None = None

    def __post_init__(self) -> None:
        if self.tag == "finite":
            if self.value is None or not np.isfinite(self.value) or self.value <= 0.0:
                raise InvalidOrder(f"finite order must be a positive real, got {self.value}")
            if abs(self.value - 1.0) < NEAR_ONE_TOL:
                raise NearOneOrder(
                    f"order {self.value} is within {NEAR_ONE_TOL} of 1; use the exact order '1'"
                )
        elif self.tag in ("one", "inf"):
            if self.value is not None:
                raise InvalidOrder(f"order tag '{self.tag}' takes no value")
        else:
            raise InvalidOrder(f"unknown order tag '{self.tag}'")

    @classmethod
    def finite(cls, alpha: float) -> "RenyiOrder":
        return cls("finite", float(alpha))

    @classmethod
    def one(cls) -> "RenyiOrder":
        return cls("one")

    @classmethod
    def infinity(cls) -> "RenyiOrder":
        return cls("inf")

    @classmethod
    def parse(cls, spec: "str | float | RenyiOrder") -> "RenyiOrder":
        """Parse ``"1"``, ``"inf"`` or a decimal such as ``"1.5"``."""
        if isinstance(spec, RenyiOrder):
            return spec
        text = str(spec).strip().lower()
        if text in ("inf", "infinity", "∞", "+inf"):
            return cls.infinity()
        try:
            alpha = float(text)
        except ValueError as exc:
            raise InvalidOrder(f"cannot parse order '{spec}'") from exc
        if alpha == float("inf"):
            return cls.infinity()
        if alpha == 1.0:
            return cls.one()
        return cls.finite(alpha)

    @property
    def is_finite(self) -> bool:
        return self.tag == "finite"

    @property
    def is_one(self) -> bool:
        return self.tag == "one"

    @property
    def is_infinite(self) -> bool:
        return self.tag == "inf"

    @property
    def alpha(self) -> float:
        """Numeric value: 1.0 for the exact order one and inf for infinity."""
        if self.tag == "one":
            return 1.0
        if self.tag == "inf":
            return float("inf")
        return float(self.value)

    @property
    def label(self) -> str:
        if self.tag == "one":
            return "1"
        if self.tag == "inf":
            return "inf"
        return f"{self.value:g}"

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class DivValue:
    """Extended-real divergence in bits with diagnostics."""

    value: float
    support_violation: bool = False
    quasi_value: float | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def is_infinite(self) -> bool:
        return bool(np.isposinf(self.value))

    def __float__(self) -> float:
        return float(self.value)


INF_VALUE = DivValue(float("inf"), support_violation=True)


def _from_quasi(quasi: float, alpha: float, **diagnostics: Any) -> DivValue:
    if quasi <= 0.0:
        # Zero overlap: log2(0) = -inf, flipped to +inf when alpha < 1.
        value = float("-inf") if alpha > 1.0 else float("inf")
        return DivValue(value, quasi_value=0.0, diagnostics={"zero_overlap": True, **diagnostics})
    return DivValue(float(np.log2(quasi) / (alpha - 1.0)), quasi_value=float(quasi), diagnostics=diagnostics)


# --- Classical ---


def classical_renyi(p: Distribution, q: Distribution, a: RenyiOrder) -> DivValue:
    """Rényi divergence D_alpha(P||Q) of two distributions on the same alphabet."""
    if len(p) != len(q):
        raise AlphabetMismatch(f"alphabet sizes differ: {len(p)} vs {len(q)}")
    pv, qv = p.probs, q.probs
    on_p = pv > 0.0
    absolutely_continuous = bool(np.all(qv[on_p] > 0.0))

    if a.is_one or a.is_infinite or a.alpha > 1.0:
        if not absolutely_continuous:
            return INF_VALUE
        ratio = pv[on_p] / qv[on_p]
        if a.is_one:
            return DivValue(float(np.sum(pv[on_p] * np.log2(ratio))))
        if a.is_infinite:
            return DivValue(float(np.max(np.log2(ratio))))
        quasi = float(np.sum(pv[on_p] ** a.alpha * qv[on_p] ** (1.0 - a.alpha)))
        return _from_quasi(quasi, a.alpha)

    common = on_p & (qv > 0.0)
    quasi = float(np.sum(pv[common] ** a.alpha * qv[common] ** (1.0 - a.alpha)))
    return _from_quasi(quasi, a.alpha)


# --- Quantum helpers ---


def _matrix(x: Operand) -> np.ndarray:
    return x.matrix if isinstance(x, DensityOperator) else symmetrize(as_matrix(x))


def _eigen(x: Operand) -> HermitianEigen:
    return x.eigen if isinstance(x, DensityOperator) else hermitian_eig(_matrix(x))


def _check_pair(rho: Operand, sigma: Operand) -> tuple[np.ndarray, np.ndarray]:
    r, s = _matrix(rho), _matrix(sigma)
    if r.shape != s.shape:
        raise DimensionMismatch(f"operands have shapes {r.shape} and {s.shape}")
    return r, s


def supported_on(rho: Operand, sigma: Operand, cutoff: float = SUPPORT_CUTOFF) -> bool:
    """rho << sigma, decided by Tr[(I - Pi_supp(sigma)) rho] <= cutoff * max(1, Tr rho)."""
    r, _ = _check_pair(rho, sigma)
    proj = support_projector(_eigen(sigma), cutoff)
    outside = float(np.real(np.trace(r - proj @ r)))
    scale = max(1.0, float(np.real(np.trace(r))))
    return outside <= cutoff * scale


def _trace_real(m: np.ndarray) -> float:
    return float(np.real(np.trace(m)))


def _relative_operator(rho: Operand, sigma: Operand) -> tuple[np.ndarray, HermitianEigen]:
    """X = sigma^{-1/2} rho sigma^{-1/2} on supp(sigma), with sigma's eigendecomposition."""
    r, _ = _check_pair(rho, sigma)
    s_eig = _eigen(sigma)
    inv_root = psd_power(s_eig, -0.5)
    return symmetrize(inv_root @ r @ inv_root), s_eig


# --- Sandwiched ---


def sandwiched_quasi(rho: Operand, sigma: Operand, alpha: float) -> float:
    """Q~_alpha = Tr[(sigma^{(1-a)/2a} rho sigma^{(1-a)/2a})^a]; +inf when alpha > 1 and rho is not << sigma."""
    r, _ = _check_pair(rho, sigma)
    if alpha > 1.0 and not supported_on(rho, sigma):
        return float("inf")
    power = psd_power(_eigen(sigma), (1.0 - alpha) / (2.0 * alpha))
    inner = symmetrize(power @ r @ power)
    lam = psd_eigenvalues(hermitian_eig(inner))
    lam = lam[support_mask(lam)]
    return float(np.sum(lam ** alpha))


def _max_relative(rho: Operand, sigma: Operand) -> DivValue:
    if not supported_on(rho, sigma):
        return INF_VALUE
    x, _ = _relative_operator(rho, sigma)
    lam_max = float(psd_eigenvalues(hermitian_eig(x))[-1])
    if lam_max <= 0.0:
        return DivValue(float("-inf"), diagnostics={"zero_operand": True})
    return DivValue(float(np.log2(lam_max)))


def sandwiched(rho: Operand, sigma: Operand, a: RenyiOrder) -> DivValue:
    """Sandwiched Rényi divergence D~_alpha(rho||sigma)."""
    r, _ = _check_pair(rho, sigma)
    if a.is_infinite:
        return _max_relative(rho, sigma)
    if a.is_one:
        if not supported_on(rho, sigma):
            return INF_VALUE
        value = _trace_real(r @ (psd_log(_eigen(rho)) - psd_log(_eigen(sigma))))
        return DivValue(value)
    quasi = sandwiched_quasi(rho, sigma, a.alpha)
    if np.isposinf(quasi):
        return INF_VALUE
    return _from_quasi(quasi, a.alpha)


def max_divergence(rho: Operand, sigma: Operand) -> DivValue:
    """D~_inf(rho||sigma) = inf{lambda : rho <= 2^lambda sigma}."""
    return sandwiched(rho, sigma, RenyiOrder.infinity())


# --- Geometric ---


def geometric_quasi(rho: Operand, sigma: Operand, alpha: float) -> float:
    """Q^_alpha = Tr[sigma^{1/2} (sigma^{-1/2} rho sigma^{-1/2})^alpha sigma^{1/2}]; +inf unless rho << sigma."""
    if not supported_on(rho, sigma):
        return float("inf")
    x, s_eig = _relative_operator(rho, sigma)
    return _trace_real(s_eig.reconstruct() @ psd_power(x, alpha))


def geometric(rho: Operand, sigma: Operand, a: RenyiOrder) -> DivValue:
    """Geometric Rényi divergence D^_alpha(rho||sigma).

    Orders above 2 are evaluated formally and flagged in the diagnostics.
    """
    _check_pair(rho, sigma)
    if a.is_infinite:
        return _max_relative(rho, sigma)
    if not supported_on(rho, sigma):
        return INF_VALUE
    if a.is_one:
        x, s_eig = _relative_operator(rho, sigma)
        x_log_x = spectral_apply(x, lambda lam: lam * np.log2(lam))
        return DivValue(_trace_real(s_eig.reconstruct() @ x_log_x))
    quasi = geometric_quasi(rho, sigma, a.alpha)
    if a.alpha > 2.0:
        return _from_quasi(quasi, a.alpha, formal_only=True)
    return _from_quasi(quasi, a.alpha)


def quantum_divergence(kind: DivergenceKind | str, rho: Operand, sigma: Operand, a: RenyiOrder) -> DivValue:
    kind = DivergenceKind(kind)
    if kind is DivergenceKind.SANDWICHED:
        return sandwiched(rho, sigma, a)
    return geometric(rho, sigma, a)


# --- Measured ---


@dataclass(frozen=True)
class MeasuredOptions:
    restarts: int = 4
    refine_iters: int = DEFAULT_REFINE_ITERS
    seed: int = 0

    def __post_init__(self) -> None:
        if self.restarts < 1:
            raise InvalidOrder(f"measured divergence needs restarts >= 1, got {self.restarts}")


@dataclass(frozen=True, eq=False)
class MeasuredResult:
    """Lower bound on D^M with the measurement basis (columns) that achieves it."""

    value: DivValue
    basis: np.ndarray


def _hermitian_generator(params: np.ndarray, dim: int) -> np.ndarray:
    upper = np.triu_indices(dim, k=1)
    n_off = len(upper[0])
    h = np.zeros((dim, dim), dtype=complex)
    h[upper] = params[dim:dim + n_off] + 1j * params[dim + n_off:]
    h = h + adjoint(h)
    h[np.diag_indices(dim)] = params[:dim]
    return h


def _classical_in_basis(basis: np.ndarray, rho: DensityOperator, sigma: DensityOperator, a: RenyiOrder) -> DivValue:
    return classical_renyi(measure(basis, rho), measure(basis, sigma), a)


def _refine_basis(
    start: np.ndarray,
    rho: DensityOperator,
    sigma: DensityOperator,
    a: RenyiOrder,
    max_evals: int,
) -> tuple[np.ndarray, DivValue]:
    dim = start.shape[0]

    def basis_at(params: np.ndarray) -> np.ndarray:
        return start @ expm(1j * _hermitian_generator(params, dim))

    def objective(params: np.ndarray) -> float:
        value = _classical_in_basis(basis_at(params), rho, sigma, a).value
        return -value if np.isfinite(value) else -1e300

    result = minimize(
        objective,
        np.zeros(dim * dim),
        method="Powell",
        options={"maxfev": max_evals, "xtol": 1e-8, "ftol": 1e-12},
    )
    basis = basis_at(result.x)
    return basis, _classical_in_basis(basis, rho, sigma, a)


def measured(
    rho: DensityOperator,
    sigma: DensityOperator,
    a: RenyiOrder,
    opts: MeasuredOptions | None = None,
) -> MeasuredResult:
    """Certified lower bound on the measured Rényi divergence.

    Candidates: the joint eigenbasis of (sigma, pinch(sigma, rho)), the eigenbases of
    rho and sigma, and ``opts.restarts`` Haar-random bases refined by Powell's method
    over U0 exp(iH).
    """
    opts = opts or MeasuredOptions()
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"measured: dimensions {rho.dim} and {sigma.dim} differ")

    candidates = [
        joint_eigenbasis(sigma, pinch(sigma, rho)),
        rho.eigen.eigenvectors,
        sigma.eigen.eigenvectors,
    ]
    best_basis = candidates[0]
    best = _classical_in_basis(best_basis, rho, sigma, a)
    for basis in candidates[1:]:
        value = _classical_in_basis(basis, rho, sigma, a)
        if value.value > best.value:
            best, best_basis = value, basis
    if best.is_infinite:
        return MeasuredResult(best, best_basis)

    for idx in range(opts.restarts):
        rng = np.random.default_rng([opts.seed, idx])
        start = random_unitary(rho.dim, rng)
        if opts.refine_iters > 0:
            basis, value = _refine_basis(start, rho, sigma, a, opts.refine_iters)
        else:
            basis, value = start, _classical_in_basis(start, rho, sigma, a)
        logger.debug(f"measured restart {idx}: {value.value:.9g} bits")
        if value.value > best.value:
            best, best_basis = value, basis
        if best.is_infinite:
            break
    return MeasuredResult(best, best_basis)


# --- Entropies ---


def renyi_entropy(rho: Operand, a: RenyiOrder) -> float:
    """Quantum Rényi entropy H_alpha(rho) in bits."""
    lam = psd_eigenvalues(_eigen(rho))
    lam = lam[support_mask(lam)]
    if a.is_one:
        return float(-np.sum(lam * np.log2(lam)))
    if a.is_infinite:
        return float(-np.log2(lam.max()))
    return float(np.log2(np.sum(lam ** a.alpha)) / (1.0 - a.alpha))
