import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))

import logging
from functools import reduce
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from backend.src.quantum.errors import (
    DimensionCapError,
    DimensionMismatchError,
    NullStateError,
    SchemeError,
)

logger = logging.getLogger(__name__)

DIMENSION_CAP = 4096
CONSTRUCTION_TOL = 1e-12
COMPUTATION_TOL = 1e-10

ArrayLike = Union[np.ndarray, Sequence[complex]]


def check_dimension_cap(dimension: int, cap: int = DIMENSION_CAP) -> None:
    """Raise DimensionCapError if a dense object of this size is not allowed."""
    if dimension > cap:
        raise DimensionCapError(f"dimension cap exceeded: {dimension} > {cap}")


def _as_qubit_factor(raw: ArrayLike) -> np.ndarray:
    vec = np.asarray(raw, dtype=complex).ravel()
    if vec.shape != (2,):
        raise SchemeError(f"qubit factor must have 2 amplitudes, got shape {vec.shape}")
    return vec


def _expand(factors: Sequence[np.ndarray]) -> np.ndarray:
    # big-endian: first factor is the most significant index
    return reduce(np.kron, factors)


class PureState:
    """
    Normalized complex amplitude vector over a computational basis.

    A state may carry an explicit per-qubit factorization. Product states built
    that way never materialize their amplitudes unless asked to, so they can
    describe registers far beyond the dense dimension cap.

    Args:
        amplitudes: Dense amplitude vector; optional when qubit_factorization is given.
        qubit_factorization: Per-qubit amplitude pairs, most significant qubit first.
        atol: Normalization / consistency tolerance.
        dimension_cap: Upper bound for lazily expanding a product state.
    """

    __slots__ = ("_vec", "_factors", "_cap")

    def __init__(
        self,
        amplitudes: Optional[ArrayLike] = None,
        qubit_factorization: Optional[Iterable[ArrayLike]] = None,
        *,
        atol: float = CONSTRUCTION_TOL,
        dimension_cap: int = DIMENSION_CAP,
    ) -> None:
        if amplitudes is None and qubit_factorization is None:
            raise NullStateError("null state: no amplitudes and no factorization")

        factors: Optional[Tuple[np.ndarray, ...]] = None
        if qubit_factorization is not None:
            factors = tuple(_as_qubit_factor(f) for f in qubit_factorization)
            if not factors:
                raise NullStateError("null state: empty factorization")
            for q, f in enumerate(factors):
                f.flags.writeable = False
                norm2 = float(np.vdot(f, f).real)
                if abs(norm2 - 1.0) > atol:
                    raise SchemeError(f"qubit factor {q} not normalized (|f|^2 = {norm2!r})")

        vec: Optional[np.ndarray] = None
        if amplitudes is not None:
            vec = np.array(amplitudes, dtype=complex).ravel()
            if vec.size == 0:
                raise NullStateError()
            norm2 = float(np.vdot(vec, vec).real)
            if abs(norm2 - 1.0) > atol:
                raise SchemeError(f"amplitudes not normalized (sum |a|^2 = {norm2!r})")
            vec.flags.writeable = False

        if vec is not None and factors is not None:
            if vec.size != 2 ** len(factors):
                raise DimensionMismatchError("factorization does not match amplitude dimension")
            if not np.allclose(_expand(factors), vec, rtol=0.0, atol=atol):
                raise SchemeError("qubit factorization does not reproduce amplitudes")

        self._vec = vec
        self._factors = factors
        self._cap = dimension_cap

    @classmethod
    def product(cls, factors: Iterable[ArrayLike], **kwargs) -> "PureState":
        """Build a product state from per-qubit amplitude pairs."""
        return cls(qubit_factorization=factors, **kwargs)

    @classmethod
    def basis(cls, index: int, dimension: int) -> "PureState":
        if not 0 <= index < dimension:
            raise SchemeError(f"basis index {index} out of range for dimension {dimension}")
        vec = np.zeros(dimension, dtype=complex)
        vec[index] = 1.0
        return cls(vec)

    @property
    def qubit_factorization(self) -> Optional[Tuple[np.ndarray, ...]]:
        return self._factors

    @property
    def is_product(self) -> bool:
        return self._factors is not None

    @property
    def num_qubits(self) -> Optional[int]:
        if self._factors is not None:
            return len(self._factors)
        size = self._vec.size
        if size & (size - 1) == 0:
            return size.bit_length() - 1
        return None

    @property
    def dimension(self) -> int:
        if self._vec is not None:
            return int(self._vec.size)
        return 2 ** len(self._factors)

    @property
    def amplitudes(self) -> np.ndarray:
        """Dense amplitudes; expands the factorization on first access (cap-checked)."""
        if self._vec is None:
            check_dimension_cap(self.dimension, self._cap)
            vec = _expand(self._factors)
            vec.flags.writeable = False
            self._vec = vec
        return self._vec

    def qubit_factors(self) -> Optional[Tuple[np.ndarray, ...]]:
        """Factorization if known; a dense single qubit counts as its own factor."""
        if self._factors is not None:
            return self._factors
        if self._vec is not None and self._vec.size == 2:
            return (self._vec,)
        return None

    def density(self) -> "DensityOperator":
        return DensityOperator.from_pure(self)

    def __repr__(self) -> str:
        if self._factors is not None:
            return f"PureState(product, n={len(self._factors)})"
        return f"PureState(dim={self._vec.size})"


class DensityOperator:
    """
    Density matrix with validated invariants (Hermitian, unit trace, PSD).

    Args:
        matrix: D x D complex matrix.
        atol: Hermiticity / trace tolerance.
        eig_floor: Most negative eigenvalue tolerated.
    """

    __slots__ = ("_matrix",)

    def __init__(self, matrix: ArrayLike, *, atol: float = CONSTRUCTION_TOL, eig_floor: float = -COMPUTATION_TOL) -> None:
        mat = np.array(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionMismatchError(f"density operator must be square, got shape {mat.shape}")
        if not np.allclose(mat, mat.conj().T, rtol=0.0, atol=atol):
            raise SchemeError("density operator is not Hermitian")
        trace = complex(np.trace(mat))
        if abs(trace - 1.0) > atol:
            raise SchemeError(f"density operator trace {trace!r} != 1")
        min_eig = float(np.linalg.eigvalsh(mat).min())
        if min_eig < eig_floor:
            raise SchemeError(f"density operator has negative eigenvalue {min_eig!r}")
        mat.flags.writeable = False
        self._matrix = mat

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityOperator":
        vec = state.amplitudes
        return cls(np.outer(vec, vec.conj()))

    @classmethod
    def mixture(cls, weights: Sequence[float], states: Sequence[PureState]) -> "DensityOperator":
        """Convex combination sum_k w_k |psi_k><psi_k|."""
        if len(weights) != len(states) or not states:
            raise DimensionMismatchError("weights and states must be non-empty and of equal length")
        dims = {s.dimension for s in states}
        if len(dims) != 1:
            raise DimensionMismatchError(f"mixture components have different dimensions: {sorted(dims)}")
        mat = sum(w * np.outer(s.amplitudes, s.amplitudes.conj()) for w, s in zip(weights, states))
        return cls(mat)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dimension(self) -> int:
        return int(self._matrix.shape[0])


def normalize(raw: ArrayLike) -> PureState:
    """
    Scale a raw amplitude vector to unit norm.

    Raises:
        NullStateError: if the vector is zero.
    """
    vec = np.asarray(raw, dtype=complex).ravel()
    norm = float(np.linalg.norm(vec))
    if vec.size == 0 or not np.isfinite(norm) or norm == 0.0:
        raise NullStateError()
    return PureState(vec / norm)


def tensor(a: PureState, b: PureState, dimension_cap: int = DIMENSION_CAP) -> PureState:
    """
    Tensor product a (x) b with big-endian ordering (a holds the most significant index).

    Product-structured operands stay factorized and are not subject to the cap;
    dense operands are expanded and must fit under dimension_cap.
    """
    fa, fb = a.qubit_factors(), b.qubit_factors()
    if fa is not None and fb is not None:
        return PureState.product(fa + fb, dimension_cap=dimension_cap)
    check_dimension_cap(a.dimension * b.dimension, dimension_cap)
    return PureState(np.kron(a.amplitudes, b.amplitudes), dimension_cap=dimension_cap)


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2, factor by factor when both states are products of the same width."""
    if a.dimension != b.dimension:
        raise DimensionMismatchError(f"fidelity of states with dimensions {a.dimension} and {b.dimension}")
    fa, fb = a.qubit_factorization, b.qubit_factorization
    if fa is not None and fb is not None and len(fa) == len(fb):
        overlaps = np.array([abs(np.vdot(x, y)) ** 2 for x, y in zip(fa, fb)])
        value = float(np.prod(overlaps))
    else:
        value = float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    return min(max(value, 0.0), 1.0)


def trace_distance(
    rho: Union[DensityOperator, np.ndarray],
    sigma: Union[DensityOperator, np.ndarray],
    atol: float = CONSTRUCTION_TOL,
) -> float:
    """Half the trace norm of rho - sigma."""
    r = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    s = sigma.matrix if isinstance(sigma, DensityOperator) else np.asarray(sigma, dtype=complex)
    if r.shape != s.shape:
        raise DimensionMismatchError(f"trace distance of shapes {r.shape} and {s.shape}")
    for m in (r, s):
        if not np.allclose(m, m.conj().T, rtol=0.0, atol=atol):
            raise SchemeError("trace distance requires Hermitian inputs")
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > atol:
            raise SchemeError(f"trace distance requires unit-trace inputs, got trace {trace!r}")
    eigs = np.linalg.eigvalsh(r - s)
    return min(max(0.5 * float(np.abs(eigs).sum()), 0.0), 1.0)


if __name__ == "__main__":
    plus = normalize([1, 1])
    tilt = PureState([np.cos(0.3), np.sin(0.3)])
    print("tensor:", np.round(tensor(tilt, tilt).amplitudes.real, 6))
    print("fidelity |0>, tilt:", fidelity(PureState.basis(0, 2), tilt))
    print("trace distance |+> vs I/2:", trace_distance(plus.density(), np.eye(2) / 2))
