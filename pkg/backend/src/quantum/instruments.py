import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from backend.src.quantum.errors import (
    CompletenessError,
    DimensionMismatchError,
    InvariantViolation,
)
from backend.src.quantum.states import (
    COMPUTATION_TOL,
    CONSTRUCTION_TOL,
    DIMENSION_CAP,
    PureState,
    check_dimension_cap,
)

logger = logging.getLogger(__name__)

# outcomes below this probability are dropped from ensembles
MIN_OUTCOME_PROB = 1e-14


@dataclass(frozen=True)
class Outcome:
    label: str
    probability: float
    post_state: PureState


@dataclass(frozen=True)
class OutcomeEnsemble:
    """Result of applying an instrument: one entry per non-negligible outcome."""

    outcomes: Tuple[Outcome, ...]

    def probabilities(self) -> Dict[str, float]:
        return {o.label: o.probability for o in self.outcomes}

    def probability_of(self, label: str) -> float:
        return self.probabilities().get(label, 0.0)

    def total(self) -> float:
        return float(sum(o.probability for o in self.outcomes))

    def __len__(self) -> int:
        return len(self.outcomes)

    def __iter__(self):
        return iter(self.outcomes)


class MeasurementInstrument:
    """
    Finite set of outcome-labelled Kraus operators.

    Subclasses describe structured instruments and override the cheap hooks
    (`act`, `outcome_probabilities`, `completeness_residual`, `product_outcomes`)
    so that dense matrices are only built when explicitly requested.
    """

    completeness_tolerance: float = CONSTRUCTION_TOL

    @property
    def labels(self) -> Tuple[str, ...]:
        raise NotImplementedError

    @property
    def dimension(self) -> int:
        raise NotImplementedError

    def kraus(self, label: str) -> np.ndarray:
        """Dense Kraus operator for one outcome (cap-checked)."""
        raise NotImplementedError

    def iter_kraus(self) -> Iterator[Tuple[str, np.ndarray]]:
        for label in self.labels:
            yield label, self.kraus(label)

    def act(self, vec: np.ndarray) -> Iterator[Tuple[str, np.ndarray]]:
        """Yield (label, K_m |vec>) for every outcome."""
        for label, k in self.iter_kraus():
            yield label, k @ vec

    def outcome_probabilities(self, vec: np.ndarray) -> np.ndarray:
        """Born probabilities ||K_m vec||^2 in label order."""
        return np.array([float(np.vdot(kv, kv).real) for _, kv in self.act(vec)])

    def completeness_residual(self) -> float:
        """Spectral norm of sum_m K_m^dagger K_m - I."""
        check_dimension_cap(self.dimension)
        acc = np.zeros((self.dimension, self.dimension), dtype=complex)
        for _, k in self.iter_kraus():
            acc += k.conj().T @ k
        acc -= np.eye(self.dimension)
        return float(np.linalg.norm(acc, ord=2))

    def check_completeness(self) -> None:
        residual = self.completeness_residual()
        if residual > self.completeness_tolerance:
            raise CompletenessError(
                f"instrument incomplete: ||sum K^dagger K - I|| = {residual:.3e} > {self.completeness_tolerance:.1e}"
            )

    def product_outcomes(self, state: PureState) -> Optional[List[Outcome]]:
        """Outcome list computed from a qubit factorization, or None when unsupported."""
        return None


class KrausInstrument(MeasurementInstrument):
    """
    Instrument given by an explicit list of dense Kraus operators.

    Args:
        outcomes: Sequence of (label, kraus_operator) pairs.
        completeness_tolerance: Allowed spectral-norm residual of sum K^dagger K - I.
        validate: Check completeness on construction.
    """

    def __init__(
        self,
        outcomes: Sequence[Tuple[str, np.ndarray]],
        completeness_tolerance: float = CONSTRUCTION_TOL,
        validate: bool = True,
    ) -> None:
        if not outcomes:
            raise CompletenessError("instrument has no outcomes")
        mats: List[Tuple[str, np.ndarray]] = []
        dim = None
        for label, k in outcomes:
            mat = np.array(k, dtype=complex)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise DimensionMismatchError(f"Kraus operator {label!r} is not square: {mat.shape}")
            if dim is None:
                dim = mat.shape[0]
            elif mat.shape[0] != dim:
                raise DimensionMismatchError(f"Kraus operator {label!r} has dimension {mat.shape[0]} != {dim}")
            mat.flags.writeable = False
            mats.append((str(label), mat))
        if len({label for label, _ in mats}) != len(mats):
            raise CompletenessError("duplicate outcome labels")
        self._outcomes = tuple(mats)
        self._index = {label: i for i, (label, _) in enumerate(mats)}
        self._dim = int(dim)
        self.completeness_tolerance = completeness_tolerance
        if validate:
            self.check_completeness()

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self._outcomes)

    @property
    def dimension(self) -> int:
        return self._dim

    @property
    def outcomes(self) -> Tuple[Tuple[str, np.ndarray], ...]:
        return self._outcomes

    def kraus(self, label: str) -> np.ndarray:
        return self._outcomes[self._index[label]][1]


def apply_instrument(inst: MeasurementInstrument, state: PureState) -> OutcomeEnsemble:
    """
    Apply a measurement instrument to a pure state (Born/Kraus rule).

    Returns:
        OutcomeEnsemble with (label, p_m, K_m|psi>/sqrt(p_m)); outcomes with
        p_m < 1e-14 are omitted.

    Raises:
        DimensionMismatchError: instrument and state dimensions differ.
        CompletenessError: instrument is not complete (checked before evaluation).
        InvariantViolation: probabilities do not sum to 1 within 1e-10.
    """
    if inst.dimension != state.dimension:
        raise DimensionMismatchError(
            f"instrument dimension {inst.dimension} != state dimension {state.dimension}"
        )
    inst.check_completeness()

    outcomes: Optional[List[Outcome]] = None
    if state.is_product:
        outcomes = inst.product_outcomes(state)

    if outcomes is None:
        check_dimension_cap(state.dimension, DIMENSION_CAP)
        vec = state.amplitudes
        outcomes = []
        for label, kvec in inst.act(vec):
            p = float(np.vdot(kvec, kvec).real)
            if p < MIN_OUTCOME_PROB:
                continue
            outcomes.append(Outcome(label, p, PureState(kvec / np.sqrt(p), atol=COMPUTATION_TOL)))

    ensemble = OutcomeEnsemble(tuple(o for o in outcomes if o.probability >= MIN_OUTCOME_PROB))
    total = ensemble.total()
    if abs(total - 1.0) > COMPUTATION_TOL:
        raise InvariantViolation(f"outcome probabilities sum to {total!r}, expected 1")
    return ensemble


if __name__ == "__main__":
    z = KrausInstrument([("0", np.diag([1, 0])), ("1", np.diag([0, 1]))])
    plus = PureState(np.array([1, 1]) / np.sqrt(2))
    print("[apply_instrument] standard basis on |+>:", apply_instrument(z, plus).probabilities())
