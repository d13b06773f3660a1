import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from backend.src.quantum.errors import DimensionMismatchError, InvariantViolation
from backend.src.quantum.instruments import MeasurementInstrument
from backend.src.quantum.states import COMPUTATION_TOL, PureState
from backend.src.seals.schemes import Message, SealScheme, parse_bits
from backend.src.strategies.read_strategies import (
    PartitionReadoutInstrument,
    ProjectiveDecodeInstrument,
    QPovmInstrument,
)

logger = logging.getLogger(__name__)

SuccessPredicate = Callable[[str], bool]


@dataclass(frozen=True)
class DetectionReport:
    """
    Outcome of a read attempt followed by the owner's projective check.

    Attributes:
        escape_prob: Probability the check onto the sealed state passes.
        joint_success_escape: Probability the reader succeeds AND passes the check.
        success_prob: Probability the reader's outcome counts as a success.
    """

    escape_prob: float
    joint_success_escape: float
    success_prob: float

    def __post_init__(self) -> None:
        for name in ("escape_prob", "joint_success_escape", "success_prob"):
            value = getattr(self, name)
            if not -COMPUTATION_TOL <= value <= 1.0 + COMPUTATION_TOL:
                raise InvariantViolation(f"{name}={value!r} outside [0, 1]")
        bound = min(self.escape_prob, self.success_prob)
        if self.joint_success_escape > bound + COMPUTATION_TOL:
            raise InvariantViolation(
                f"joint {self.joint_success_escape!r} exceeds min(escape, success) = {bound!r}"
            )


def _clip01(value: float) -> float:
    return min(max(float(value), 0.0), 1.0)


def _is_product_partition(state: PureState, inst: MeasurementInstrument) -> bool:
    factors = state.qubit_factorization
    return isinstance(inst, PartitionReadoutInstrument) and factors is not None and len(factors) == inst.n


def _product_escape(state: PureState, k: int) -> float:
    # prod_{q<k} sum_b |f_q[b]|^4, accumulated in log space
    per_qubit = np.array([np.sum(np.abs(f) ** 4) for f in state.qubit_factorization[:k]])
    return float(np.exp(np.sum(np.log(per_qubit))))


def escape_probability(sealed: PureState, inst: MeasurementInstrument) -> float:
    """
    Probability that the owner's check onto the sealed state passes after the
    reader applies inst and hands back the unrepaired post-measurement state:
    sum_m |<psi|K_m|psi>|^2.

    Raises:
        DimensionMismatchError: dimensions differ.
        CompletenessError: inst is not a complete instrument.
    """
    if inst.dimension != sealed.dimension:
        raise DimensionMismatchError(
            f"instrument dimension {inst.dimension} != state dimension {sealed.dimension}"
        )
    inst.check_completeness()
    if _is_product_partition(sealed, inst):
        return _clip01(_product_escape(sealed, inst.k))
    vec = sealed.amplitudes
    total = sum(abs(np.vdot(vec, kvec)) ** 2 for _, kvec in inst.act(vec))
    return _clip01(total)


def correct_label(scheme: SealScheme, message: Message, inst: MeasurementInstrument) -> str:
    """Outcome label that identifies the sealed message (or its partition element)."""
    if isinstance(inst, PartitionReadoutInstrument):
        bits = parse_bits(message, inst.n)
        return "".join(str(int(b)) for b in bits[: inst.k])
    if isinstance(inst, (QPovmInstrument, ProjectiveDecodeInstrument)):
        return str(scheme.message_index(message))
    return scheme.message_label(message)


def partition_element_correct(scheme: SealScheme, message: Message, inst: MeasurementInstrument) -> SuccessPredicate:
    target = correct_label(scheme, message, inst)
    return lambda label: label == target


def joint_success_escape(
    scheme: SealScheme,
    message: Message,
    inst: MeasurementInstrument,
    success: Optional[SuccessPredicate] = None,
) -> DetectionReport:
    """
    Probability that the reader's outcome is a success and the check still passes.

    joint = sum over successful outcomes m of |<psi|K_m|psi>|^2. With the default
    predicate (outcome names the correct message / partition element) product
    seals read by a partition readout use the closed form prod_{q<k} |f_q[b_q]|^4.

    Args:
        scheme: Seal scheme used to encode the message.
        message: Sealed message (index or bits).
        inst: Reader's instrument.
        success: Maps an outcome label to True/False; defaults to "correct element".
    """
    state = scheme.encode(message)
    escape = escape_probability(state, inst)

    if success is None and _is_product_partition(state, inst):
        bits = parse_bits(message, inst.n)
        true_amps = np.array([abs(f[b]) for f, b in zip(state.qubit_factorization[: inst.k], bits[: inst.k])])
        log_amp = np.sum(np.log(true_amps)) if np.all(true_amps > 0) else -np.inf
        success_prob = float(np.exp(2.0 * log_amp))
        joint = float(np.exp(4.0 * log_amp))
        return DetectionReport(escape_prob=escape, joint_success_escape=_clip01(joint), success_prob=_clip01(success_prob))

    predicate = success or partition_element_correct(scheme, message, inst)
    vec = state.amplitudes
    success_prob = 0.0
    joint = 0.0
    for label, kvec in inst.act(vec):
        if not predicate(label):
            continue
        success_prob += float(np.vdot(kvec, kvec).real)
        joint += abs(np.vdot(vec, kvec)) ** 2
    return DetectionReport(escape_prob=escape, joint_success_escape=_clip01(joint), success_prob=_clip01(success_prob))


if __name__ == "__main__":
    from backend.src.seals.families import SealFamily, instantiate
    from backend.src.strategies.read_strategies import default_partition_k, partition_readout

    n, alpha = 10_000, 0.25
    seal = instantiate(SealFamily.scheme_a(0.3, alpha), n)
    k = default_partition_k(n, alpha)
    report = joint_success_escape(seal, 0, partition_readout(n, k))
    print(f"[joint_success_escape] n={n} k={k} -> {report}")
