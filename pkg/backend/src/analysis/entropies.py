import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))

import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import entr

from backend.src.quantum.errors import DimensionCapError, SchemeError
from backend.src.quantum.instruments import MeasurementInstrument
from backend.src.quantum.states import COMPUTATION_TOL, DIMENSION_CAP, check_dimension_cap
from backend.src.seals.schemes import FourierSeal, MatrixSeal, ProductSeal, SealScheme
from backend.src.strategies.read_strategies import (
    PartitionReadoutInstrument,
    ProjectiveDecodeInstrument,
)

logger = logging.getLogger(__name__)

# dense P(message, outcome) tables are limited to this many entries
MAX_TABLE_ENTRIES = 2 ** 24

_LN2 = math.log(2.0)


def binary_entropy(p: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """h(p) = -p log2 p - (1-p) log2(1-p), with h(0) = h(1) = 0."""
    p = np.asarray(p, dtype=float)
    h = (entr(p) + entr(1.0 - p)) / _LN2
    return float(h) if h.ndim == 0 else h


def shannon_entropy(probs: np.ndarray) -> float:
    """Entropy in bits of a probability array of any shape."""
    return float(entr(np.asarray(probs, dtype=float)).sum() / _LN2)


@dataclass(frozen=True, eq=False)
class BitChannel:
    """
    Per-bit description of a symmetric readout channel under a uniform prior.

    Attributes:
        correct_probs: Probability that each measured position is read correctly.
        unmeasured: Positions left untouched by the readout (carry no information).
    """

    correct_probs: np.ndarray
    unmeasured: int = 0

    def __post_init__(self) -> None:
        probs = np.asarray(self.correct_probs, dtype=float).ravel()
        if np.any(probs < -COMPUTATION_TOL) or np.any(probs > 1 + COMPUTATION_TOL):
            raise SchemeError("bit-channel probabilities must lie in [0, 1]")
        if self.unmeasured < 0:
            raise SchemeError("unmeasured positions must be non-negative")
        probs = np.clip(probs, 0.0, 1.0)
        probs.flags.writeable = False
        object.__setattr__(self, "correct_probs", probs)

    @property
    def n(self) -> int:
        return int(self.correct_probs.size) + int(self.unmeasured)

    @property
    def flip_probs(self) -> np.ndarray:
        return 1.0 - self.correct_probs

    def expand(self) -> np.ndarray:
        """Dense P(message, outcome) table; outcomes are the measured bits."""
        check_dimension_cap(2 ** self.n)
        blocks = [np.array([[c, 1.0 - c], [1.0 - c, c]]) for c in self.correct_probs]
        blocks += [np.ones((2, 1))] * self.unmeasured
        return reduce(np.kron, blocks, np.ones((1, 1))) / 2 ** self.n


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """
    P(message, outcome) for a seal read by an instrument.

    Either `table` (dense, rows = messages, columns = outcome labels) or
    `factorized` (per-bit channel, uniform prior) is present; both may be.
    """

    prior: Optional[np.ndarray] = None
    table: Optional[np.ndarray] = None
    outcome_labels: Optional[Tuple[str, ...]] = None
    factorized: Optional[BitChannel] = None

    def __post_init__(self) -> None:
        if self.table is None and self.factorized is None:
            raise SchemeError("joint distribution needs a table or a factorized channel")
        if self.table is not None:
            table = np.asarray(self.table, dtype=float)
            if np.any(table < -COMPUTATION_TOL):
                raise SchemeError("joint distribution has negative entries")
            total = float(table.sum())
            if abs(total - 1.0) > COMPUTATION_TOL:
                raise SchemeError(f"joint distribution sums to {total!r}")

    def dense(self) -> np.ndarray:
        """Dense table, expanding the factorized channel when needed (small n only)."""
        if self.table is not None:
            return np.asarray(self.table, dtype=float)
        return self.factorized.expand()


def _is_perfect_decode(scheme: SealScheme, inst: MeasurementInstrument) -> bool:
    if not isinstance(inst, ProjectiveDecodeInstrument):
        return False
    seal = inst.seal
    if seal is scheme:
        return True
    if isinstance(seal, FourierSeal) and isinstance(scheme, FourierSeal):
        return seal.N == scheme.N
    if isinstance(seal, MatrixSeal) and isinstance(scheme, MatrixSeal):
        return seal.lam.shape == scheme.lam.shape and np.array_equal(seal.lam, scheme.lam)
    return False


def joint_distribution(
    scheme: SealScheme,
    inst: MeasurementInstrument,
    prior: Optional[np.ndarray] = None,
) -> JointDistribution:
    """
    P(message, outcome) for the scheme read by inst.

    Uniform-prior product seals read by a first-k partition readout, and
    orthonormal seals read by their own projective decode with N = 2**n, return
    a factorized per-bit channel; everything else builds the dense table.

    Raises:
        DimensionCapError: the dense table would exceed 2**24 entries or the
            state dimension exceeds the cap.
    """
    if inst.dimension != scheme.dimension:
        raise SchemeError(f"instrument dimension {inst.dimension} != scheme dimension {scheme.dimension}")
    uniform = prior is None

    if uniform and isinstance(scheme, ProductSeal) and isinstance(inst, PartitionReadoutInstrument) and inst.n == scheme.n:
        channel = BitChannel(np.cos(scheme.angles[: inst.k]) ** 2, unmeasured=scheme.n - inst.k)
        return JointDistribution(factorized=channel)

    if uniform and _is_perfect_decode(scheme, inst):
        N = scheme.message_count
        if N & (N - 1) == 0 and not inst.has_complement:
            channel = BitChannel(np.ones(N.bit_length() - 1))
            return JointDistribution(factorized=channel)

    N = scheme.message_count
    check_dimension_cap(scheme.dimension, DIMENSION_CAP)
    labels = inst.labels
    if N * len(labels) > MAX_TABLE_ENTRIES:
        raise DimensionCapError(
            f"dimension cap exceeded: dense table of {N} x {len(labels)} entries without factorization"
        )
    if uniform:
        weights = np.full(N, 1.0 / N)
    else:
        weights = np.asarray(prior, dtype=float).ravel()
        if weights.size != N or np.any(weights < 0) or abs(weights.sum() - 1.0) > COMPUTATION_TOL:
            raise SchemeError("prior must be a probability vector over the messages")

    table = np.empty((N, len(labels)))
    for i in range(N):
        table[i] = weights[i] * inst.outcome_probabilities(scheme.encode(i).amplitudes)
    return JointDistribution(prior=weights, table=table, outcome_labels=labels)


def entropies(joint: JointDistribution) -> Tuple[float, float, float]:
    """
    (H, H_cond, mutual_info) in bits.

    The factorized path uses H = n and H_cond = sum_i h(q_i) plus one bit per
    unmeasured position, where q_i is the flip probability of position i.
    """
    if joint.factorized is not None and joint.table is None:
        channel = joint.factorized
        H = float(channel.n)
        H_cond = float(np.sum(binary_entropy(channel.flip_probs))) + float(channel.unmeasured)
    else:
        table = joint.dense()
        H = shannon_entropy(table.sum(axis=1))
        H_cond = shannon_entropy(table) - shannon_entropy(table.sum(axis=0))
    H_cond = min(max(H_cond, 0.0), H)
    return H, H_cond, H - H_cond


if __name__ == "__main__":
    from backend.src.seals.families import SealFamily, instantiate
    from backend.src.strategies.read_strategies import honest_full_readout

    seal = instantiate(SealFamily.scheme_a(0.3, 0.25), 16)
    print("[entropies] Scheme A n=16:", entropies(joint_distribution(seal, honest_full_readout(16))))
