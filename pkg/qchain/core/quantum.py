"""Quantum states, positive maps, spectral pinching and random instance generation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, TypeVar, overload

import numpy as np
from loguru import logger
from scipy import stats

from .constants import (
    CLUSTER_TOL,
    COMMUTATOR_TOL,
    MAP_TOL,
    MAX_DIM,
    PROB_NEGATIVE_CLIP,
    PROB_SUM_TOL,
    PROJECTOR_TOL,
    STATE_TOL,
)
from .errors import (
    DimensionMismatch,
    DimensionTooLarge,
    InvalidDimensions,
    InvalidState,
    NonCommutingInputs,
    UnsupportedMap,
)
from .numkernel import (
    HermitianEigen,
    adjoint,
    as_matrix,
    frobenius_norm,
    hermitian_defect,
    hermitian_eig,
    kron,
    psd_power,
    symmetrize,
)

Seed = int | np.random.Generator | None


def make_rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# --- Distributions ---


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over a finite alphabet.

    Entries down to ``-1e-12`` are clipped to zero; the sum must be 1 within 1e-9.
    """

    probs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.probs, dtype=float).reshape(-1)
        if arr.size == 0:
            raise InvalidState("distribution over an empty alphabet")
        if not np.all(np.isfinite(arr)):
            raise InvalidState("distribution has non-finite entries")
        if np.any(arr < -PROB_NEGATIVE_CLIP):
            raise InvalidState(f"negative probability {arr.min():.3e}")
        arr = np.clip(arr, 0.0, None)
        if abs(arr.sum() - 1.0) > PROB_SUM_TOL:
            raise InvalidState(f"probabilities sum to {arr.sum():.12g}, not 1")
        object.__setattr__(self, "probs", arr)

    def __len__(self) -> int:
        return int(self.probs.shape[0])

    @classmethod
    def point_mass(cls, size: int, index: int) -> "Distribution":
        probs = np.zeros(size)
        probs[index] = 1.0
        return cls(probs)


# --- States ---


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Positive semidefinite, unit-trace matrix with its eigendecomposition cached at construction."""

    matrix: np.ndarray
    eigen: HermitianEigen = field(init=False, repr=False)

    def __post_init__(self) -> None:
        arr = as_matrix(self.matrix)
        if arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise InvalidState(f"density operator must be square and non-empty, got {arr.shape}")
        if hermitian_defect(arr) > STATE_TOL:
            raise InvalidState("density operator is not Hermitian")
        arr = symmetrize(arr)
        tr = float(np.real(np.trace(arr)))
        if abs(tr - 1.0) > STATE_TOL:
            raise InvalidState(f"density operator has trace {tr:.12g}")
        eig = hermitian_eig(arr)
        if eig.min_eigenvalue < -STATE_TOL:
            raise InvalidState(f"density operator has negative eigenvalue {eig.min_eigenvalue:.3e}")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)
        object.__setattr__(self, "eigen", eig)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.clip(self.eigen.eigenvalues, 0.0, None)

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    @classmethod
    def from_matrix(cls, m: np.ndarray, *, normalize: bool = False) -> "DensityOperator":
        arr = symmetrize(as_matrix(m))
        if normalize:
            tr = float(np.real(np.trace(arr)))
            if tr <= 0.0:
                raise InvalidState("cannot normalize an operator with non-positive trace")
            arr = arr / tr
        return cls(arr)


def pure_state(vector: Sequence[complex] | np.ndarray) -> DensityOperator:
    psi = np.asarray(vector, dtype=complex).reshape(-1)
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        raise InvalidState("zero vector is not a state")
    psi = psi / norm
    return DensityOperator(np.outer(psi, psi.conj()))


def basis_state(dim: int, index: int) -> DensityOperator:
    vec = np.zeros(dim, dtype=complex)
    vec[index] = 1.0
    return pure_state(vec)


def maximally_mixed(dim: int) -> DensityOperator:
    return DensityOperator(np.eye(dim, dtype=complex) / dim)


def maximally_entangled(dim: int) -> DensityOperator:
    """Normalized maximally entangled state on C^dim ⊗ C^dim."""
    vec = np.eye(dim, dtype=complex).reshape(-1)
    return pure_state(vec)


def diagonal_state(probs: Sequence[float] | np.ndarray) -> DensityOperator:
    dist = Distribution(np.asarray(probs, dtype=float))
    return DensityOperator(np.diag(dist.probs).astype(complex))


# --- Positive maps ---


@dataclass(frozen=True, eq=False)
class PositiveMapRep:
    """Kraus-sum map X -> sum_k K (T?(X)) K^dagger with optional input transposition.

    Trace-preservation, unitality and complete positivity are computed once at
    construction, so instances are safe to share between threads.
    """

    kraus: tuple[np.ndarray, ...]
    pre_transpose: bool = False
    trace_preserving: bool = field(init=False)
    unital: bool = field(init=False)
    completely_positive: bool = field(init=False)

    def __post_init__(self) -> None:
        ops = tuple(as_matrix(k) for k in self.kraus)
        if not ops:
            raise InvalidDimensions("a map needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise DimensionMismatch("Kraus operators must share one shape")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ops)
        d_out, d_in = shape
        tp_defect = frobenius_norm(sum(adjoint(k) @ k for k in ops) - np.eye(d_in))
        unital_defect = (
            frobenius_norm(sum(k @ adjoint(k) for k in ops) - np.eye(d_out))
            if d_in == d_out
            else np.inf
        )
        object.__setattr__(self, "trace_preserving", bool(tp_defect <= MAP_TOL))
        object.__setattr__(self, "unital", bool(unital_defect <= MAP_TOL))
        choi_min = hermitian_eig(self.choi()).min_eigenvalue
        object.__setattr__(self, "completely_positive", bool(choi_min >= -MAP_TOL))

    @property
    def d_in(self) -> int:
        return int(self.kraus[0].shape[1])

    @property
    def d_out(self) -> int:
        return int(self.kraus[0].shape[0])

    def apply(self, x: np.ndarray | DensityOperator) -> np.ndarray:
        return apply_map(self, x)

    def choi(self) -> np.ndarray:
        """Unnormalized Choi matrix sum_ij |i><j| ⊗ map(|i><j|)."""
        d = self.d_in
        blocks = np.zeros((d * self.d_out, d * self.d_out), dtype=complex)
        for i in range(d):
            for j in range(d):
                unit = np.zeros((d, d), dtype=complex)
                unit[i, j] = 1.0
                blocks[i * self.d_out:(i + 1) * self.d_out, j * self.d_out:(j + 1) * self.d_out] = (
                    apply_map(self, unit)
                )
        return blocks

    def transposed(self) -> "PositiveMapRep":
        """Same Kraus set composed with input transposition."""
        return PositiveMapRep(self.kraus, pre_transpose=not self.pre_transpose)

    def tensor(self, other: "PositiveMapRep") -> "PositiveMapRep":
        # Transposing both inputs is a full transpose of the product input;
        # transposing only one factor is a partial transpose we cannot represent.
        if self.pre_transpose != other.pre_transpose:
            raise UnsupportedMap("cannot tensor a transpose-composed map with a plain one")
        kraus = tuple(np.kron(a, b) for a in self.kraus for b in other.kraus)
        return PositiveMapRep(kraus, pre_transpose=self.pre_transpose)

    def extend(self, d_ref: int) -> "PositiveMapRep":
        """The map ⊗ id_R on a reference system of dimension ``d_ref``."""
        if self.pre_transpose:
            raise UnsupportedMap("map ⊗ id is not positive for transpose-composed maps")
        eye = np.eye(d_ref, dtype=complex)
        return PositiveMapRep(tuple(np.kron(k, eye) for k in self.kraus))


def is_cp(m: PositiveMapRep) -> bool:
    return m.completely_positive


def is_tp(m: PositiveMapRep) -> bool:
    return m.trace_preserving


def is_unital(m: PositiveMapRep) -> bool:
    return m.unital


def choi(m: PositiveMapRep) -> np.ndarray:
    return m.choi()


def _operand(x: np.ndarray | DensityOperator) -> np.ndarray:
    return x.matrix if isinstance(x, DensityOperator) else as_matrix(x)


def apply_map(m: PositiveMapRep, x: np.ndarray | DensityOperator) -> np.ndarray:
    arr = _operand(x)
    if arr.shape != (m.d_in, m.d_in):
        raise DimensionMismatch(f"map expects {m.d_in}x{m.d_in} input, got {arr.shape}")
    if m.pre_transpose:
        arr = arr.T
    out = sum(k @ arr @ adjoint(k) for k in m.kraus)
    if hermitian_defect(arr) <= STATE_TOL:
        out = symmetrize(out)
    return out


def identity_map(dim: int) -> PositiveMapRep:
    return PositiveMapRep((np.eye(dim, dtype=complex),))


def unitary_map(unitary: np.ndarray) -> PositiveMapRep:
    return PositiveMapRep((as_matrix(unitary),))


def depolarizing_map(dim: int, p: float = 1.0) -> PositiveMapRep:
    """X -> (1-p) X + p Tr[X] I/d; p = 1 is the fully depolarizing map."""
    if not 0.0 <= p <= 1.0:
        raise InvalidDimensions(f"depolarizing parameter must lie in [0, 1], got {p}")
    kraus = []
    if p < 1.0:
        kraus.append(np.sqrt(1.0 - p) * np.eye(dim, dtype=complex))
    if p > 0.0:
        for i in range(dim):
            for j in range(dim):
                k = np.zeros((dim, dim), dtype=complex)
                k[i, j] = np.sqrt(p / dim)
                kraus.append(k)
    return PositiveMapRep(tuple(kraus))


def mixed_unitary_map(unitaries: Sequence[np.ndarray], weights: Sequence[float]) -> PositiveMapRep:
    dist = Distribution(np.asarray(weights, dtype=float))
    kraus = tuple(np.sqrt(w) * as_matrix(u) for w, u in zip(dist.probs, unitaries) if w > 0.0)
    return PositiveMapRep(kraus)


def measurement_map(basis: np.ndarray) -> PositiveMapRep:
    """Rank-one projective measurement X -> sum_x <x|X|x> |x><x| in the given basis (columns)."""
    vecs = as_matrix(basis)
    return PositiveMapRep(tuple(np.outer(vecs[:, x], vecs[:, x].conj()) for x in range(vecs.shape[1])))


def transpose_map(dim: int) -> PositiveMapRep:
    return identity_map(dim).transposed()


# --- Pinching, spectrum, joint eigenbases ---


@dataclass(frozen=True, eq=False)
class SpectrumInfo:
    distinct_values: np.ndarray
    projectors: tuple[np.ndarray, ...]
    bases: tuple[np.ndarray, ...]

    @property
    def count(self) -> int:
        return int(self.distinct_values.shape[0])


def _cluster_indices(eigenvalues: np.ndarray, cluster_tol: float) -> list[list[int]]:
    scale = max(float(np.max(np.abs(eigenvalues))), np.finfo(float).tiny)
    clusters: list[list[int]] = [[0]]
    for i in range(1, eigenvalues.shape[0]):
        if eigenvalues[i] - eigenvalues[i - 1] <= cluster_tol * scale:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def cluster_eigen(eig: HermitianEigen, cluster_tol: float = CLUSTER_TOL) -> SpectrumInfo:
    """Group an eigendecomposition into distinct-eigenvalue clusters and their projectors."""
    if cluster_tol <= 0.0:
        raise InvalidDimensions("cluster_tol must be positive")
    clusters = _cluster_indices(eig.eigenvalues, cluster_tol)
    values = np.array([float(np.mean(eig.eigenvalues[c])) for c in clusters])
    bases = tuple(eig.eigenvectors[:, c] for c in clusters)
    projectors = tuple(b @ adjoint(b) for b in bases)
    return SpectrumInfo(distinct_values=values, projectors=projectors, bases=bases)


def spectrum(sigma: DensityOperator, cluster_tol: float = CLUSTER_TOL) -> SpectrumInfo:
    """Distinct eigenvalues of sigma, their eigenprojectors and |spec(sigma)|."""
    info = cluster_eigen(sigma.eigen, cluster_tol)
    total = sum(info.projectors)
    if frobenius_norm(total - np.eye(sigma.dim)) > PROJECTOR_TOL:
        raise InvalidState("spectral projectors do not resolve the identity")
    return info


def pinch(sigma: DensityOperator, rho: DensityOperator, cluster_tol: float = CLUSTER_TOL) -> DensityOperator:
    """Spectral pinching rho -> sum_lambda P_lambda rho P_lambda with respect to sigma."""
    if sigma.dim != rho.dim:
        raise DimensionMismatch(f"pinch: dimensions {sigma.dim} and {rho.dim} differ")
    info = spectrum(sigma, cluster_tol)
    pinched = sum(p @ rho.matrix @ p for p in info.projectors)
    return DensityOperator.from_matrix(pinched)


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a @ b - b @ a)))


def joint_eigenbasis(
    sigma: DensityOperator,
    tau: DensityOperator,
    cluster_tol: float = CLUSTER_TOL,
) -> np.ndarray:
    """Orthonormal basis (columns) of common eigenvectors of two commuting states.

    sigma is diagonalized first; tau is then diagonalized inside each eigenspace of sigma.
    """
    if sigma.dim != tau.dim:
        raise DimensionMismatch(f"joint_eigenbasis: dimensions {sigma.dim} and {tau.dim} differ")
    defect = commutator_norm(sigma.matrix, tau.matrix)
    if defect > COMMUTATOR_TOL:
        raise NonCommutingInputs(f"inputs do not commute (defect {defect:.3e})")
    info = cluster_eigen(sigma.eigen, cluster_tol)
    columns = []
    for block in info.bases:
        restricted = adjoint(block) @ tau.matrix @ block
        inner = hermitian_eig(symmetrize(restricted))
        columns.append(block @ inner.eigenvectors)
    return np.hstack(columns)


def measure(basis: np.ndarray, rho: DensityOperator | np.ndarray) -> Distribution:
    """Outcome distribution <x|rho|x> of a rank-one projective measurement."""
    vecs = as_matrix(basis)
    gram_defect = float(np.max(np.abs(adjoint(vecs) @ vecs - np.eye(vecs.shape[1]))))
    if gram_defect > PROJECTOR_TOL:
        raise InvalidDimensions(f"measurement basis is not orthonormal (defect {gram_defect:.3e})")
    arr = _operand(rho)
    if arr.shape[0] != vecs.shape[0]:
        raise DimensionMismatch("basis and operator dimensions differ")
    probs = np.real(np.einsum("ix,ij,jx->x", vecs.conj(), arr, vecs))
    return Distribution(probs)


# --- Tensor powers ---

T = TypeVar("T", DensityOperator, PositiveMapRep)


@overload
def tensor_power(obj: DensityOperator, n: int) -> DensityOperator: ...
@overload
def tensor_power(obj: PositiveMapRep, n: int) -> PositiveMapRep: ...


def tensor_power(obj, n):
    """n-fold Kronecker power of a state or of a map (product Kraus set)."""
    if n < 1:
        raise InvalidDimensions(f"tensor power needs n >= 1, got {n}")
    if isinstance(obj, DensityOperator):
        if obj.dim ** n > MAX_DIM:
            raise DimensionTooLarge(f"dimension {obj.dim}^{n} exceeds {MAX_DIM}")
        return DensityOperator.from_matrix(kron(*([obj.matrix] * n)))
    if isinstance(obj, PositiveMapRep):
        if max(obj.d_in, obj.d_out) ** n > MAX_DIM:
            raise DimensionTooLarge(f"map dimension {max(obj.d_in, obj.d_out)}^{n} exceeds {MAX_DIM}")
        result = obj
        for _ in range(n - 1):
            result = result.tensor(obj)
        return result
    raise TypeError(f"tensor_power does not support {type(obj).__name__}")


# --- Random instances ---


def random_unitary(dim: int, seed: Seed = None) -> np.ndarray:
    """Haar-random unitary."""
    if dim < 1:
        raise InvalidDimensions(f"dimension must be positive, got {dim}")
    if dim == 1:
        rng = make_rng(seed)
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return np.asarray(stats.unitary_group.rvs(dim, random_state=make_rng(seed)), dtype=complex)


def random_state(dim: int, rank: int | None = None, seed: Seed = None) -> DensityOperator:
    """Hilbert-Schmidt-type random state: partial trace of a Ginibre purification."""
    rank = dim if rank is None else rank
    if dim < 1 or not 1 <= rank <= dim:
        raise InvalidDimensions(f"need 1 <= rank <= dim, got rank={rank}, dim={dim}")
    if dim > MAX_DIM:
        raise DimensionTooLarge(f"dimension {dim} exceeds {MAX_DIM}")
    rng = make_rng(seed)
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    return DensityOperator.from_matrix(g @ adjoint(g), normalize=True)


def random_full_rank_state(dim: int, seed: Seed = None, max_condition: float = 1e4) -> DensityOperator:
    """Full-rank random state whose condition number is at most ``max_condition``."""
    rho = random_state(dim, dim, seed)
    lam = rho.eigenvalues
    lam_min, lam_max = float(lam[0]), float(lam[-1])
    if lam_max <= max_condition * lam_min:
        return rho
    gap = lam_max - max_condition * lam_min
    eps = gap / (gap + (max_condition - 1.0) / dim)
    logger.debug(f"Mixing random state with I/d (eps={eps:.3e}) to bound its condition number")
    return DensityOperator.from_matrix((1.0 - eps) * rho.matrix + eps * np.eye(dim) / dim)


def random_state_with_spectrum(eigenvalues: Sequence[float], seed: Seed = None) -> DensityOperator:
    """Random eigenbasis with a prescribed spectrum (exact |spec| counts)."""
    dist = Distribution(np.asarray(eigenvalues, dtype=float))
    u = random_unitary(len(dist), seed)
    return DensityOperator.from_matrix((u * dist.probs) @ adjoint(u))


def random_channel(d_in: int, d_out: int | None = None, d_env: int | None = None, seed: Seed = None) -> PositiveMapRep:
    """CPTP map from a Haar-random Stinespring isometry V: C^d_in -> C^d_out ⊗ C^d_env."""
    d_out = d_in if d_out is None else d_out
    d_env = d_out if d_env is None else d_env
    if min(d_in, d_out, d_env) < 1:
        raise InvalidDimensions("channel dimensions must be positive")
    if d_out * d_env < d_in:
        raise InvalidDimensions(f"isometry needs d_out*d_env >= d_in ({d_out}*{d_env} < {d_in})")
    isometry = random_unitary(d_out * d_env, seed)[:, :d_in]
    # Rows are indexed (out, env); Kraus operator K_e picks one environment index.
    kraus = isometry.reshape(d_out, d_env, d_in).transpose(1, 0, 2)
    return PositiveMapRep(tuple(kraus[e] for e in range(d_env)))


def random_positive_map(d_in: int, d_out: int | None = None, d_env: int | None = None, seed: Seed = None) -> PositiveMapRep:
    """Positive, trace-preserving, generally not completely positive: random channel after transposition."""
    return random_channel(d_in, d_out, d_env, seed).transposed()


def random_unital_channel(dim: int, n_unitaries: int = 3, seed: Seed = None) -> PositiveMapRep:
    """Random mixture of Haar unitaries (unital CPTP)."""
    rng = make_rng(seed)
    weights = rng.dirichlet(np.ones(n_unitaries))
    unitaries = [random_unitary(dim, rng) for _ in range(n_unitaries)]
    return mixed_unitary_map(unitaries, weights)


def purification_state(params: np.ndarray, dim: int) -> DensityOperator:
    """State A A^dagger / Tr[A A^dagger] for A built from 2*dim^2 real parameters."""
    a = (params[: dim * dim] + 1j * params[dim * dim:]).reshape(dim, dim)
    gram = a @ adjoint(a)
    return DensityOperator.from_matrix(gram, normalize=True)


def purification_params(state: DensityOperator) -> np.ndarray:
    """Parameters whose purification_state reproduces ``state``."""
    root = psd_power(state.eigen, 0.5)
    flat = root.reshape(-1)
    return np.concatenate([flat.real, flat.imag])
