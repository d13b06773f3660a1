import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))

import logging
import math

import numpy as np

from backend.src.quantum.errors import SchemeError
from backend.src.seals.schemes import ProductSeal, SealScheme
from backend.src.strategies.read_strategies import PartitionSpec, default_partition_k

logger = logging.getLogger(__name__)


def _require_product(scheme: SealScheme) -> ProductSeal:
    if not isinstance(scheme, ProductSeal):
        raise SchemeError("undefined per-bit probability: scheme is not a product seal")
    return scheme


def _log_cos2(angles: np.ndarray) -> np.ndarray:
    # log cos^2 t = log1p(-sin^2 t), accurate for small t
    return np.log1p(-np.sin(angles) ** 2)


def per_bit_correct_prob(scheme: SealScheme, position: int) -> float:
    """cos^2(theta_i): chance a standard-basis reading of bit i is right."""
    seal = _require_product(scheme)
    if not 0 <= position < seal.n:
        raise SchemeError(f"position {position} out of range [0, {seal.n})")
    return float(np.cos(seal.angles[position]) ** 2)


def per_bit_correct_probs(scheme: SealScheme) -> np.ndarray:
    seal = _require_product(scheme)
    return np.cos(seal.angles) ** 2


def string_correct_prob(scheme: SealScheme) -> float:
    """prod_i cos^2(theta_i), evaluated in log space."""
    seal = _require_product(scheme)
    return float(np.exp(np.sum(_log_cos2(seal.angles))))


def partition_correct_prob(scheme: SealScheme, k: int) -> float:
    """
    Probability of reading the first k bits correctly, i.e. of identifying the
    first-k-bits partition element. k = 0 is the trivial partition.
    """
    seal = _require_product(scheme)
    if not 0 <= k <= seal.n:
        raise SchemeError(f"partition size k={k} out of range [0, {seal.n}]")
    if k == 0:
        return 1.0
    return float(np.exp(np.sum(_log_cos2(seal.angles[:k]))))


def max_partition_size(scheme: SealScheme, threshold: float = 0.5) -> int:
    """
    Largest k whose partition is identified with probability >= threshold.
    Returns 0 when even k = 1 falls below the threshold.
    """
    if not 0.0 < threshold < 1.0:
        raise SchemeError(f"threshold must lie in (0, 1), got {threshold}")
    seal = _require_product(scheme)
    cumulative = np.cumsum(_log_cos2(seal.angles))
    # cumulative is non-increasing, so the feasible k form a prefix
    return int(np.count_nonzero(cumulative >= math.log(threshold) - 1e-15))


def best_partition(scheme: SealScheme, threshold: float = 0.5) -> PartitionSpec:
    """PartitionSpec for the largest feasible first-k-bits partition (k >= 1)."""
    seal = _require_product(scheme)
    k = max(1, max_partition_size(seal, threshold))
    return PartitionSpec(n=seal.n, k=k, p_max=partition_correct_prob(seal, k))


def expected_wrong_bits(scheme: SealScheme) -> float:
    """sum_i sin^2(theta_i): expected Hamming distance of an honest full readout."""
    seal = _require_product(scheme)
    return float(np.sum(np.sin(seal.angles) ** 2))


def asymptote_gap(theta_cap: float, alpha: float, n: int, rounding: str = "ceil") -> float:
    """
    |cos^{2k}(Theta / n^alpha) - exp(-Theta^2)| with k = ceil(n^{2 alpha}).

    rounding="none" uses the real exponent k = n^{2 alpha} instead.
    """
    if not 0.0 < alpha < 0.5:
        raise SchemeError(f"asymptote_gap needs alpha in (0, 1/2), got {alpha}")
    if rounding == "ceil":
        k = float(default_partition_k(n, alpha))
    elif rounding == "none":
        k = float(n) ** (2.0 * alpha)
    else:
        raise SchemeError(f"rounding must be 'ceil' or 'none', got {rounding!r}")
    theta = theta_cap / float(n) ** alpha
    log_value = k * float(np.log1p(-np.sin(theta) ** 2))
    target = -theta_cap ** 2
    # exp(a) - exp(b) = exp(b) * expm1(a - b)
    return abs(math.exp(target) * math.expm1(log_value - target))


if __name__ == "__main__":
    from backend.src.seals.families import SealFamily, instantiate

    seal = instantiate(SealFamily.scheme_a(0.3, 0.25), 10_000)
    print("[partition_correct_prob] k=100:", partition_correct_prob(seal, 100), "vs", math.exp(-0.09))
    print("[max_partition_size] fixed θ=0.3:", max_partition_size(instantiate(SealFamily.fixed_angle(0.3), 50)))
    print("[asymptote_gap] n=1e4:", asymptote_gap(0.3, 0.25, 10_000))
