import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from backend.src.data_io.file_reader import FileReader
from backend.src.quantum.errors import DimensionCapError, SchemeError
from backend.src.quantum.states import (
    COMPUTATION_TOL,
    CONSTRUCTION_TOL,
    DIMENSION_CAP,
    PureState,
    check_dimension_cap,
)

logger = logging.getLogger(__name__)

Message = Union[int, str, Sequence[int]]

QUARTER_PI = math.pi / 4


def parse_bits(message: Message, n: int) -> np.ndarray:
    """
    Turn a message into a length-n array of 0/1 values.

    Accepts a '0'/'1' string, a sequence of ints, or an integer index whose
    big-endian binary expansion gives the bits.
    """
    if isinstance(message, (int, np.integer)) and not isinstance(message, bool):
        idx = int(message)
        if not 0 <= idx < 2 ** n:
            raise SchemeError(f"message index {idx} out of range for n={n}")
        return np.array([(idx >> (n - 1 - q)) & 1 for q in range(n)], dtype=np.uint8)
    if isinstance(message, str):
        if any(c not in "01" for c in message):
            raise SchemeError(f"bit string may only contain '0' and '1': {message!r}")
        bits = np.frombuffer(message.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        bits = np.asarray(list(message), dtype=np.int64)
        if np.any((bits != 0) & (bits != 1)):
            raise SchemeError("bit sequence may only contain 0 and 1")
        bits = bits.astype(np.uint8)
    if bits.size != n:
        raise SchemeError(f"bit string has length {bits.size}, expected n={n}")
    return bits


def bits_to_label(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


class SealScheme:
    """Common surface of every seal: an encoding from messages to pure states."""

    @property
    def message_count(self) -> int:
        raise NotImplementedError

    @property
    def dimension(self) -> int:
        raise NotImplementedError

    @property
    def is_product(self) -> bool:
        return False

    def encode(self, message: Message) -> PureState:
        raise NotImplementedError

    def message_index(self, message: Message) -> int:
        idx = int(message)
        if not 0 <= idx < self.message_count:
            raise SchemeError(f"message index {idx} out of range [0, {self.message_count})")
        return idx

    def message_label(self, message: Message) -> str:
        """Outcome label a perfect decoder would report for this message."""
        return str(self.message_index(message))


class ProductSeal(SealScheme):
    """Bitwise seal: bit i is sealed as cos(t_i)|b_i> + sin(t_i)|not b_i>."""

    n: int
    angles: np.ndarray

    @property
    def message_count(self) -> int:
        return 2 ** self.n

    @property
    def dimension(self) -> int:
        return 2 ** self.n

    @property
    def is_product(self) -> bool:
        return True

    def encode(self, message: Message) -> PureState:
        bits = parse_bits(message, self.n)
        c, s = np.cos(self.angles), np.sin(self.angles)
        # bit 0 -> (cos, sin); bit 1 -> (sin, cos)
        factors = np.where(bits[:, None] == 0, np.stack([c, s], axis=1), np.stack([s, c], axis=1))
        return PureState.product(list(factors))

    def message_index(self, message: Message) -> int:
        bits = parse_bits(message, self.n)
        return int("".join(map(str, bits)), 2) if self.n else 0

    def message_label(self, message: Message) -> str:
        return bits_to_label(parse_bits(message, self.n))


@dataclass(frozen=True, eq=False)
class TiltedProductSeal(ProductSeal):
    """
    Scheme A: per-bit tilt with |theta_i| <= theta_cap / n**alpha.

    Args:
        n: String length.
        theta_cap: Theta in radians, 0 <= Theta < pi/4.
        alpha: Positive exponent; Scheme A proper has alpha in (0, 1/2).
        angles: Per-bit angles; defaults to the extreme value Theta/n**alpha everywhere.
    """

    n: int
    theta_cap: float
    alpha: float
    angles: Optional[np.ndarray] = field(default=None)

    def __post_init__(self) -> None:
        if int(self.n) < 1:
            raise SchemeError(f"string length must be positive, got n={self.n}")
        if not 0.0 <= self.theta_cap < QUARTER_PI:
            raise SchemeError(f"theta_cap must be < π/4 (and >= 0), got {self.theta_cap}")
        if not self.alpha > 0.0:
            raise SchemeError(f"alpha must be positive, got {self.alpha}")
        bound = self.angle_bound
        if self.angles is None:
            angles = np.full(self.n, bound)
        else:
            angles = np.asarray(self.angles, dtype=float).ravel()
            if angles.size != self.n:
                raise SchemeError(f"expected {self.n} angles, got {angles.size}")
        if np.any(np.abs(angles) > bound * (1 + 1e-12) + 1e-15):
            raise SchemeError(f"angle bound violated: |theta_i| must be <= {bound!r}")
        angles.flags.writeable = False
        object.__setattr__(self, "angles", angles)

    @property
    def angle_bound(self) -> float:
        return self.theta_cap / float(self.n) ** self.alpha

    @property
    def is_scheme_a(self) -> bool:
        return 0.0 < self.alpha < 0.5


@dataclass(frozen=True, eq=False)
class FixedAngleBitSeal(ProductSeal):
    """Every bit sealed by the same imperfect bit seal at angle theta (|theta| < pi/4)."""

    n: int
    theta: float

    def __post_init__(self) -> None:
        if int(self.n) < 1:
            raise SchemeError(f"string length must be positive, got n={self.n}")
        if not abs(self.theta) < QUARTER_PI:
            raise SchemeError(f"theta must satisfy |theta| < π/4, got {self.theta}")

    @property
    def angles(self) -> np.ndarray:
        return np.full(self.n, float(self.theta))


class MatrixSeal(SealScheme):
    """
    Scheme B: message i is sealed as sum_j lambda_ij |j>.

    Args:
        lam: N x D complex matrix; row i holds the amplitudes for message i.
        atol: Row normalization tolerance.
    """

    def __init__(self, lam: np.ndarray, atol: float = CONSTRUCTION_TOL) -> None:
        mat = np.array(lam, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] < 1 or mat.shape[1] < 1:
            raise SchemeError(f"lambda must be a non-empty 2-D matrix, got shape {mat.shape}")
        check_dimension_cap(mat.shape[1])
        if mat.shape[0] > DIMENSION_CAP:
            raise DimensionCapError(f"dimension cap exceeded: {mat.shape[0]} messages > {DIMENSION_CAP}")
        norms = np.einsum("ij,ij->i", mat.conj(), mat).real
        bad = np.flatnonzero(np.abs(norms - 1.0) > atol)
        if bad.size:
            raise SchemeError(f"lambda rows not normalized: {bad[:5].tolist()}")
        mat.flags.writeable = False
        self._lam = mat

    @classmethod
    def from_csv(cls, path: str, shape: Optional[Sequence[int]] = None) -> "MatrixSeal":
        """
        Load lambda from a CSV of complex entries with columns row, col, re, im.
        Missing entries are zero; the shape defaults to (max row + 1, max col + 1).
        """
        df = FileReader.read_csv(path)
        missing = {"row", "col", "re", "im"} - set(df.columns)
        if missing:
            raise SchemeError(f"lambda CSV {path} lacks columns {sorted(missing)}")
        rows = df["row"].astype(int).to_numpy()
        cols = df["col"].astype(int).to_numpy()
        if rows.size and (rows.min() < 0 or cols.min() < 0):
            raise SchemeError("lambda CSV has negative indices")
        n_rows, n_cols = shape if shape is not None else (int(rows.max()) + 1, int(cols.max()) + 1)
        if rows.size and (rows.max() >= n_rows or cols.max() >= n_cols):
            raise SchemeError(
                f"lambda CSV index ({int(rows.max())}, {int(cols.max())}) outside shape ({n_rows}, {n_cols})"
            )
        mat = np.zeros((n_rows, n_cols), dtype=complex)
        mat[rows, cols] = df["re"].to_numpy(dtype=float) + 1j * df["im"].to_numpy(dtype=float)
        logger.info("[MatrixSeal] loaded %dx%d lambda from %s", n_rows, n_cols, path)
        return cls(mat)

    @property
    def lam(self) -> np.ndarray:
        return self._lam

    @property
    def message_count(self) -> int:
        return int(self._lam.shape[0])

    @property
    def dimension(self) -> int:
        return int(self._lam.shape[1])

    def encode(self, message: Message) -> PureState:
        return PureState(self._lam[self.message_index(message)])

    def is_orthonormal(self, atol: float = COMPUTATION_TOL) -> bool:
        gram = self._lam.conj() @ self._lam.T
        return bool(np.allclose(gram, np.eye(self.message_count), rtol=0.0, atol=atol))

    def equal_magnitude(self, atol: float = CONSTRUCTION_TOL) -> bool:
        """True when every |lambda_ij| equals 1/sqrt(D)."""
        return bool(np.allclose(np.abs(self._lam), 1.0 / math.sqrt(self.dimension), rtol=0.0, atol=atol))


@dataclass(frozen=True)
class FourierSeal(SealScheme):
    """Perfect seal |phi_i> = sum_j omega_N^{ij} |j> / sqrt(N), omega_N = exp(2 pi i / N)."""

    N: int

    def __post_init__(self) -> None:
        if int(self.N) < 1:
            raise SchemeError(f"Fourier seal needs N >= 1, got {self.N}")
        check_dimension_cap(int(self.N))

    @property
    def message_count(self) -> int:
        return int(self.N)

    @property
    def dimension(self) -> int:
        return int(self.N)

    @property
    def lam(self) -> np.ndarray:
        return fourier_matrix(self.N)

    def encode(self, message: Message) -> PureState:
        return fourier_state(self.N, self.message_index(message))

    def is_orthonormal(self, atol: float = COMPUTATION_TOL) -> bool:
        return True

    def as_matrix_seal(self) -> MatrixSeal:
        return MatrixSeal(self.lam)


def _fourier_row(N: int, i: int) -> np.ndarray:
    # reduce the exponent mod N before scaling to keep the phase exact for large i*j
    phase = (i * np.arange(N, dtype=np.int64)) % N
    return np.exp(2j * np.pi * phase / N) / math.sqrt(N)


def fourier_matrix(N: int) -> np.ndarray:
    check_dimension_cap(int(N))
    idx = np.arange(N, dtype=np.int64)
    phase = np.outer(idx, idx) % N
    return np.exp(2j * np.pi * phase / N) / math.sqrt(N)


def fourier_state(N: int, i: int) -> PureState:
    """|phi_i> for the N-dimensional Fourier seal."""
    if int(N) < 1:
        raise SchemeError(f"Fourier seal needs N >= 1, got {N}")
    if not 0 <= int(i) < int(N):
        raise SchemeError(f"message index {i} out of range [0, {N})")
    check_dimension_cap(int(N))
    return PureState(_fourier_row(int(N), int(i)))


def encode_tilted(seal: TiltedProductSeal, bits: Message) -> PureState:
    """Sealed product state of Scheme A; carries its qubit factorization."""
    return seal.encode(bits)


def encode_matrix(seal: MatrixSeal, i: int) -> PureState:
    return seal.encode(i)


def equal_magnitude_check(seal: Union[MatrixSeal, FourierSeal], atol: float = CONSTRUCTION_TOL) -> bool:
    """All |lambda_ij| equal 1/sqrt(D); Fourier seals pass while being perfectly readable."""
    if isinstance(seal, FourierSeal):
        seal = seal.as_matrix_seal()
    return seal.equal_magnitude(atol)


if __name__ == "__main__":
    seal = TiltedProductSeal(n=2, theta_cap=0.6, alpha=1.0)
    print("encode_tilted(00):", np.round(encode_tilted(seal, "00").amplitudes.real, 6))
    print("fourier_state(4, 1):", np.round(fourier_state(4, 1).amplitudes, 6))
