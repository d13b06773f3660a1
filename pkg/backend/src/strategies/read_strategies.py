import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))

import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np

from backend.src.quantum.errors import (
    DimensionCapError,
    NotOrthonormalError,
    SchemeError,
)
from backend.src.quantum.instruments import MeasurementInstrument, Outcome
from backend.src.quantum.states import (
    CONSTRUCTION_TOL,
    DIMENSION_CAP,
    PureState,
    check_dimension_cap,
)
from backend.src.seals.schemes import FourierSeal, MatrixSeal, Message, bits_to_label, parse_bits

logger = logging.getLogger(__name__)

# Gram matrices above this size are checked on random vectors instead of densely
_DENSE_GRAM_LIMIT = 1024


def default_partition_k(n: int, alpha: float) -> int:
    """ceil(n**(2 alpha)) clipped to [1, n]; the 'first n^{2 alpha} bits' partition."""
    x = float(n) ** (2.0 * alpha)
    r = round(x)
    k = int(r) if abs(x - r) <= 1e-9 * max(1.0, x) else math.ceil(x)
    return max(1, min(int(n), k))


@dataclass(frozen=True)
class PartitionSpec:
    """
    Partition of the 2**n messages by their first k bits.

    Attributes:
        n: String length.
        k: Number of leading bits read (1 <= k <= n).
        p_max: Probability of identifying the correct element with the readout.
    """

    n: int
    k: int
    p_max: float

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.n:
            raise SchemeError(f"partition needs 1 <= k <= n, got k={self.k}, n={self.n}")

    def element_of(self, bits: Message) -> str:
        return bits_to_label(parse_bits(bits, self.n)[: self.k])

    @property
    def size(self) -> int:
        return 2 ** self.k

    @property
    def log2_size(self) -> int:
        return self.k


class PartitionReadoutInstrument(MeasurementInstrument):
    """
    Standard-basis measurement of the first k of n qubits; the rest is untouched.

    Outcome labels are the k measured bits as a '0'/'1' string. Kraus operator
    for outcome s is |s><s| (x) I on the remaining n - k qubits.
    """

    def __init__(self, n: int, k: int) -> None:
        if int(n) < 1 or not 1 <= int(k) <= int(n):
            raise SchemeError(f"partition readout needs 1 <= k <= n, got k={k}, n={n}")
        self.n = int(n)
        self.k = int(k)
        self.completeness_tolerance = CONSTRUCTION_TOL

    @property
    def num_outcomes(self) -> int:
        return 2 ** self.k

    @property
    def dimension(self) -> int:
        return 2 ** self.n

    @property
    def labels(self) -> Tuple[str, ...]:
        check_dimension_cap(self.num_outcomes)
        return tuple(format(s, f"0{self.k}b") for s in range(self.num_outcomes))

    def kraus(self, label: str) -> np.ndarray:
        check_dimension_cap(self.dimension)
        s = int(label, 2)
        proj = np.zeros((self.num_outcomes, self.num_outcomes), dtype=complex)
        proj[s, s] = 1.0
        return np.kron(proj, np.eye(2 ** (self.n - self.k)))

    def act(self, vec: np.ndarray) -> Iterator[Tuple[str, np.ndarray]]:
        blocks = np.asarray(vec).reshape(self.num_outcomes, -1)
        for s, label in enumerate(self.labels):
            out = np.zeros_like(blocks)
            out[s] = blocks[s]
            yield label, out.ravel()

    def outcome_probabilities(self, vec: np.ndarray) -> np.ndarray:
        blocks = np.asarray(vec).reshape(self.num_outcomes, -1)
        return (np.abs(blocks) ** 2).sum(axis=1)

    def completeness_residual(self) -> float:
        if self.dimension > DIMENSION_CAP:
            # the 2**k blocks tile the index set exactly
            return 0.0
        acc = np.zeros(self.dimension)
        width = 2 ** (self.n - self.k)
        for s in range(self.num_outcomes):
            acc[s * width:(s + 1) * width] += 1.0
        return float(np.abs(acc - 1.0).max())

    def product_outcomes(self, state: PureState) -> Optional[List[Outcome]]:
        factors = state.qubit_factorization
        if factors is None or len(factors) != self.n:
            return None
        if self.num_outcomes > DIMENSION_CAP:
            raise DimensionCapError(
                f"dimension cap exceeded: {self.num_outcomes} outcomes to enumerate"
            )
        measured = factors[: self.k]
        untouched = list(factors[self.k:])
        probs = reduce(np.kron, [np.abs(f) ** 2 for f in measured])
        outcomes: List[Outcome] = []
        for s, label in enumerate(self.labels):
            p = float(probs[s])
            if p <= 0.0:
                continue
            post = []
            for q, bit in enumerate(label):
                amp = measured[q][int(bit)]
                ket = np.zeros(2, dtype=complex)
                ket[int(bit)] = amp / abs(amp)
                post.append(ket)
            outcomes.append(Outcome(label, p, PureState.product(post + untouched)))
        return outcomes


@dataclass(frozen=True)
class QPovmParams:
    """
    Coefficients of K_i = a I + b |i><i| on an N-dimensional space.

    b(nu) = nu and a(nu) = (-nu + sqrt(nu^2 + N (1 - nu^2))) / N, the positive
    root of N a^2 + 2 a b + b^2 = 1.
    """

    N: int
    nu: float
    a: float
    b: float

    def __post_init__(self) -> None:
        if self.a < 0 or self.b < 0:
            raise SchemeError(f"Q-POVM coefficients must be non-negative, got a={self.a}, b={self.b}")
        residual = self.N * self.a ** 2 + 2 * self.a * self.b + self.b ** 2 - 1.0
        if abs(residual) > CONSTRUCTION_TOL:
            raise SchemeError(f"Q-POVM coefficients violate completeness by {residual:.3e}")

    @classmethod
    def from_nu(cls, N: int, nu: float) -> "QPovmParams":
        if int(N) < 1:
            raise SchemeError(f"Q-POVM needs N >= 1, got {N}")
        if not 0.0 <= nu <= 1.0:
            raise SchemeError(f"nu must lie in [0, 1], got {nu}")
        N = int(N)
        b = float(nu)
        a = (-b + math.sqrt(b * b + N * (1.0 - b * b))) / N
        return cls(N=N, nu=float(nu), a=max(a, 0.0), b=b)


class QPovmInstrument(MeasurementInstrument):
    """Instrument {a(nu) I + b(nu) |i><i|}_{i<N}; labels are the basis indices."""

    def __init__(self, params: QPovmParams) -> None:
        check_dimension_cap(params.N)
        self.params = params
        self.completeness_tolerance = CONSTRUCTION_TOL

    @property
    def dimension(self) -> int:
        return self.params.N

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(str(i) for i in range(self.params.N))

    def kraus(self, label: str) -> np.ndarray:
        a, b = self.params.a, self.params.b
        k = a * np.eye(self.params.N, dtype=complex)
        i = int(label)
        k[i, i] += b
        return k

    def act(self, vec: np.ndarray) -> Iterator[Tuple[str, np.ndarray]]:
        a, b = self.params.a, self.params.b
        for i, label in enumerate(self.labels):
            out = a * vec
            out[i] = out[i] + b * vec[i]
            yield label, out

    def outcome_probabilities(self, vec: np.ndarray) -> np.ndarray:
        a, b = self.params.a, self.params.b
        norm2 = float(np.vdot(vec, vec).real)
        return a * a * norm2 + (2 * a * b + b * b) * np.abs(vec) ** 2

    def completeness_residual(self) -> float:
        # every K_i is diagonal; sum the squared diagonals row by row
        a, b = self.params.a, self.params.b
        diagonals = a + b * np.eye(self.params.N)
        return float(np.abs((np.abs(diagonals) ** 2).sum(axis=0) - 1.0).max())


class ProjectiveDecodeInstrument(MeasurementInstrument):
    """
    Projective measurement {|phi_i><phi_i|} onto orthonormal seal states.

    When the seal has fewer messages than dimensions, an extra outcome "none"
    projects onto the orthogonal complement so the instrument stays complete.
    """

    COMPLEMENT_LABEL = "none"

    def __init__(self, seal: Union[MatrixSeal, FourierSeal]) -> None:
        if not seal.is_orthonormal():
            raise NotOrthonormalError()
        if seal.message_count > seal.dimension:
            raise NotOrthonormalError()
        self.seal = seal
        self.completeness_tolerance = CONSTRUCTION_TOL
        self._has_complement = seal.message_count < seal.dimension
        self._residual: Optional[float] = None

    @property
    def has_complement(self) -> bool:
        return self._has_complement

    @property
    def dimension(self) -> int:
        return self.seal.dimension

    @property
    def labels(self) -> Tuple[str, ...]:
        labels = tuple(str(i) for i in range(self.seal.message_count))
        return labels + ((self.COMPLEMENT_LABEL,) if self._has_complement else ())

    def _rows(self) -> np.ndarray:
        return self.seal.lam

    def coefficients(self, vec: np.ndarray) -> np.ndarray:
        """<phi_i|vec> for every message i."""
        if isinstance(self.seal, FourierSeal):
            return np.fft.fft(vec) / math.sqrt(self.seal.N)
        return self._rows().conj() @ vec

    def kraus(self, label: str) -> np.ndarray:
        check_dimension_cap(self.dimension)
        rows = self._rows()
        if label == self.COMPLEMENT_LABEL:
            return np.eye(self.dimension, dtype=complex) - rows.T @ rows.conj()
        phi = rows[int(label)]
        return np.outer(phi, phi.conj())

    def act(self, vec: np.ndarray) -> Iterator[Tuple[str, np.ndarray]]:
        coeffs = self.coefficients(vec)
        rows = self._rows()
        captured = np.zeros_like(vec, dtype=complex)
        for i in range(self.seal.message_count):
            out = rows[i] * coeffs[i]
            captured = captured + out
            yield str(i), out
        if self._has_complement:
            yield self.COMPLEMENT_LABEL, vec - captured

    def outcome_probabilities(self, vec: np.ndarray) -> np.ndarray:
        probs = np.abs(self.coefficients(vec)) ** 2
        if self._has_complement:
            rest = max(float(np.vdot(vec, vec).real) - float(probs.sum()), 0.0)
            probs = np.append(probs, rest)
        return probs

    def completeness_residual(self) -> float:
        # seal states are immutable; the residual is computed once
        if self._residual is None:
            self._residual = self._compute_residual()
        return self._residual

    def _compute_residual(self) -> float:
        if self._has_complement:
            # complement is I - sum P_i by construction; residual is the
            # idempotence defect of sum P_i
            rows = self._rows()
            proj = rows.T @ rows.conj()
            return float(np.linalg.norm(proj @ proj - proj, ord=2))
        if self.dimension <= _DENSE_GRAM_LIMIT:
            rows = self._rows()
            return float(np.linalg.norm(rows.T @ rows.conj() - np.eye(self.dimension), ord=2))
        # large dimension: check sum_i |phi_i><phi_i| v = v on seeded random vectors
        rng = np.random.default_rng(0)
        worst = 0.0
        for _ in range(8):
            v = rng.normal(size=self.dimension) + 1j * rng.normal(size=self.dimension)
            v /= np.linalg.norm(v)
            coeffs = self.coefficients(v)
            if isinstance(self.seal, FourierSeal):
                rebuilt = np.fft.ifft(coeffs) * math.sqrt(self.seal.N)
            else:
                rebuilt = self._rows().T @ coeffs
            worst = max(worst, float(np.linalg.norm(rebuilt - v)))
        return worst


def partition_readout(n: int, k: int) -> PartitionReadoutInstrument:
    """Measure the first k of n qubits in the standard basis, keep the rest untouched."""
    return PartitionReadoutInstrument(n, k)


def honest_full_readout(n: int) -> PartitionReadoutInstrument:
    return partition_readout(n, n)


def q_povm(N: int, nu: float) -> QPovmInstrument:
    """Instrument {a(nu) I + b(nu)|i><i|}; nu=0 is no measurement, nu=1 is projective."""
    return QPovmInstrument(QPovmParams.from_nu(N, nu))


def projective_decode(seal: Union[MatrixSeal, FourierSeal]) -> ProjectiveDecodeInstrument:
    """
    Projective measurement onto the seal's own states.

    Raises:
        NotOrthonormalError: seal states are not orthonormal.
    """
    return ProjectiveDecodeInstrument(seal)


if __name__ == "__main__":
    params = QPovmParams.from_nu(2, 0.5)
    print(f"[q_povm] N=2 nu=0.5 -> a={params.a:.6f} b={params.b:.6f}")
    print("[partition_readout] n=3 k=2 labels:", partition_readout(3, 2).labels)
    print("[projective_decode] Fourier N=4 residual:", projective_decode(FourierSeal(4)).completeness_residual())
