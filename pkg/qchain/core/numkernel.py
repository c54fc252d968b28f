"""Dense complex matrix algebra and Hermitian spectral calculus.

Every divergence formula in qchain is built from the helpers in this module.
Functions are pure: inputs are never modified and outputs are fresh arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Callable, NamedTuple, Sequence

import numpy as np
from loguru import logger

from .constants import HERMITIAN_TOL, SUPPORT_CUTOFF
from .errors import DimensionMismatch, InvalidDimensions, NonHermitianInput


@dataclass(frozen=True, eq=False)
class HermitianEigen:
    """Eigendecomposition M = V diag(eigenvalues) V^dagger with ascending eigenvalues."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.shape[0])

    @property
    def max_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1]) if self.dim else 0.0

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0]) if self.dim else 0.0

    def support_mask(self, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
        """Boolean mask of eigenvalues above cutoff * lambda_max."""
        return support_mask(self.eigenvalues, cutoff)

    def reconstruct(self) -> np.ndarray:
        return _from_spectrum(self.eigenvectors, self.eigenvalues.astype(complex))


class LoewnerReport(NamedTuple):
    holds: bool
    min_eigenvalue: float


def as_matrix(m: np.ndarray | Sequence) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise InvalidDimensions(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidDimensions("matrix contains NaN or Inf entries")
    return arr


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def trace(m: np.ndarray) -> complex:
    return complex(np.trace(m))


def frobenius_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, ord="fro"))


def symmetrize(m: np.ndarray) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    return 0.5 * (arr + adjoint(arr))


def hermitian_defect(m: np.ndarray) -> float:
    """Largest entrywise deviation from Hermiticity."""
    arr = np.asarray(m, dtype=complex)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr - adjoint(arr))))


def _require_square(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")


def hermitian_eig(m: np.ndarray, tol: float = HERMITIAN_TOL) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrized before solving so round-off from Kraus sums does not
    leak into the spectrum. LAPACK's ``eigh`` is deterministic for identical input.

    Raises:
        NonHermitianInput: if the input deviates from Hermiticity by more than
            ``tol * max(1, max|M_ij|)``.
    """
    arr = as_matrix(m)
    _require_square(arr)
    scale = max(1.0, float(np.max(np.abs(arr)))) if arr.size else 1.0
    defect = hermitian_defect(arr)
    if defect > tol * scale:
        raise NonHermitianInput(f"matrix is not Hermitian (defect {defect:.3e})")
    eigenvalues, eigenvectors = np.linalg.eigh(symmetrize(arr))
    return HermitianEigen(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def support_mask(eigenvalues: np.ndarray, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    lam_max = float(np.max(eigenvalues)) if eigenvalues.size else 0.0
    if lam_max <= 0.0:
        return np.zeros(eigenvalues.shape, dtype=bool)
    return eigenvalues > cutoff * lam_max


def _from_spectrum(vectors: np.ndarray, values: np.ndarray) -> np.ndarray:
    return (vectors * values) @ adjoint(vectors)


def _eigen_of(m: np.ndarray | HermitianEigen) -> HermitianEigen:
    if isinstance(m, HermitianEigen):
        return m
    return hermitian_eig(m)


def spectral_apply(
    m: np.ndarray | HermitianEigen,
    fn: Callable[[np.ndarray], np.ndarray],
    cutoff: float = SUPPORT_CUTOFF,
) -> np.ndarray:
    """Apply ``fn`` to the eigenvalues on the support; off-support eigenvalues map to 0."""
    eig = _eigen_of(m)
    mask = eig.support_mask(cutoff)
    values = np.zeros(eig.dim, dtype=complex)
    if np.any(mask):
        values[mask] = fn(eig.eigenvalues[mask])
    return _from_spectrum(eig.eigenvectors, values)


def psd_power(m: np.ndarray | HermitianEigen, t: float, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    """Power of a PSD matrix on its support (generalized inverse power for t < 0)."""
    return spectral_apply(m, lambda lam: np.power(lam, t), cutoff)


def psd_log(m: np.ndarray | HermitianEigen, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    """Base-2 logarithm on the support."""
    return spectral_apply(m, np.log2, cutoff)


def support_projector(m: np.ndarray | HermitianEigen, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    return spectral_apply(m, np.ones_like, cutoff)


def psd_eigenvalues(m: np.ndarray | HermitianEigen) -> np.ndarray:
    """Eigenvalues of a PSD matrix with round-off negatives clipped to zero."""
    eig = _eigen_of(m)
    lam = eig.eigenvalues
    if lam.size and lam[0] < 0.0:
        if lam[0] < -HERMITIAN_TOL * max(1.0, abs(lam[-1])):
            logger.warning(f"Clipping negative eigenvalue {lam[0]:.3e} of a PSD operand")
        lam = np.clip(lam, 0.0, None)
    return lam


def loewner_geq(a: np.ndarray, b: np.ndarray, tol: float) -> LoewnerReport:
    """Decide A >= B in the Loewner order up to ``tol`` on the smallest eigenvalue of A - B."""
    a_arr = as_matrix(a)
    b_arr = as_matrix(b)
    if a_arr.shape != b_arr.shape:
        raise DimensionMismatch(f"shapes differ: {a_arr.shape} vs {b_arr.shape}")
    min_eig = hermitian_eig(a_arr - b_arr).min_eigenvalue
    return LoewnerReport(holds=min_eig >= -tol, min_eigenvalue=min_eig)


def kron(*matrices: np.ndarray) -> np.ndarray:
    if not matrices:
        raise InvalidDimensions("kron needs at least one factor")
    return reduce(np.kron, (np.asarray(m, dtype=complex) for m in matrices))


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> None:
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise DimensionMismatch(f"dims {tuple(dims)} do not match matrix shape {m.shape}")


def partial_trace(m: np.ndarray, dims: Sequence[int], subsystem: int | Sequence[int]) -> np.ndarray:
    """Trace out the given subsystem(s) of an operator on a tensor product space."""
    arr = as_matrix(m)
    dims = [int(d) for d in dims]
    _check_dims(arr, dims)
    traced = sorted({subsystem} if isinstance(subsystem, int) else set(subsystem), reverse=True)
    n = len(dims)
    if any(s < 0 or s >= n for s in traced):
        raise DimensionMismatch(f"subsystem index out of range for {n} factors")
    tensor = arr.reshape(dims + dims)
    remaining = list(dims)
    for s in traced:
        k = len(remaining)
        tensor = np.trace(tensor, axis1=s, axis2=s + k)
        remaining.pop(s)
    out_dim = int(np.prod(remaining)) if remaining else 1
    return tensor.reshape(out_dim, out_dim)


def permute_systems(m: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: factor ``perm[k]`` of the input becomes factor ``k``."""
    arr = as_matrix(m)
    dims = [int(d) for d in dims]
    _check_dims(arr, dims)
    n = len(dims)
    if sorted(perm) != list(range(n)):
        raise InvalidDimensions(f"{tuple(perm)} is not a permutation of {n} factors")
    tensor = arr.reshape(dims + dims)
    axes = list(perm) + [n + p for p in perm]
    total = int(np.prod(dims))
    return tensor.transpose(axes).reshape(total, total)
