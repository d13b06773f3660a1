import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from backend.src.analysis.entropies import JointDistribution, entropies, joint_distribution
from backend.src.analysis.probabilities import (
    max_partition_size,
    partition_correct_prob,
    per_bit_correct_probs,
    string_correct_prob,
)
from backend.src.quantum.errors import InvariantViolation, SchemeError
from backend.src.quantum.instruments import MeasurementInstrument
from backend.src.quantum.states import COMPUTATION_TOL
from backend.src.seals.families import SealFamily, instantiate
from backend.src.seals.schemes import ProductSeal, SealScheme
from backend.src.strategies.read_strategies import (
    honest_full_readout,
    projective_decode,
    q_povm,
)

logger = logging.getLogger(__name__)

CRITERIA = ("A", "B", "C")

InstrumentRule = Callable[[SealScheme, int], MeasurementInstrument]

EVIDENCE_COLUMNS = ["n", "H", "H_cond", "H_cond_over_H", "info_ratio", "k_star"]


@dataclass(frozen=True)
class ClassifierConfig:
    """
    Thresholds for the finite-n non-concealment verdict.

    Attributes:
        H_crit: Bound on H_cond (bits) for Criterion A.
        ratio_eps: Bound on H_cond/H at the largest n for Criterion B.
        n_grid: String lengths to evaluate; lengths a family does not admit are skipped.
        trend_window: Number of largest admissible n the trends are judged on.
        info_ratio_min: Lower bound on I/H for Criterion A.
        threshold: Partition success threshold used for k_star.
    """

    H_crit: float = 4.0
    ratio_eps: float = 0.05
    n_grid: Tuple[int, ...] = (4, 6, 8, 1024, 4096, 16384, 65536)
    trend_window: int = 3
    info_ratio_min: float = 0.5
    threshold: float = 0.5

    def __post_init__(self) -> None:
        if not self.H_crit > 0:
            raise SchemeError(f"H_crit must be positive, got {self.H_crit}")
        if not 0.0 < self.ratio_eps < 1.0:
            raise SchemeError(f"ratio_eps must lie in (0, 1), got {self.ratio_eps}")
        if int(self.trend_window) < 1:
            raise SchemeError(f"trend_window must be >= 1, got {self.trend_window}")
        if not 0.0 <= self.info_ratio_min <= 1.0:
            raise SchemeError(f"info_ratio_min must lie in [0, 1], got {self.info_ratio_min}")
        if not 0.0 < self.threshold < 1.0:
            raise SchemeError(f"threshold must lie in (0, 1), got {self.threshold}")
        object.__setattr__(self, "n_grid", tuple(sorted({int(n) for n in self.n_grid})))


@dataclass(frozen=True, eq=False)
class AnalysisReport:
    """
    Probabilities and entropies of one seal read by one instrument.

    p_bit is None for schemes without per-bit structure; there p_string and
    p_max are the probability that the outcome names the sealed message.
    """

    H: float
    H_cond: float
    mutual_info: float
    p_bit: Optional[np.ndarray]
    p_string: float
    p_max: float
    k_star: int
    criterion: Optional[str] = None

    def __post_init__(self) -> None:
        if not -COMPUTATION_TOL <= self.H_cond <= self.H + COMPUTATION_TOL:
            raise InvariantViolation(f"H_cond={self.H_cond!r} outside [0, H={self.H!r}]")
        if abs(self.mutual_info - (self.H - self.H_cond)) > COMPUTATION_TOL:
            raise InvariantViolation(
                f"mutual_info={self.mutual_info!r} != H - H_cond = {self.H - self.H_cond!r}"
            )
        if self.p_bit is not None and len(self.p_bit) and self.p_string > float(np.min(self.p_bit)) + COMPUTATION_TOL:
            raise InvariantViolation(f"p_string={self.p_string!r} exceeds min per-bit probability")
        if self.criterion is not None and self.criterion not in CRITERIA:
            raise InvariantViolation(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")

    @property
    def H_cond_over_H(self) -> float:
        return self.H_cond / self.H if self.H > 0 else 0.0


def info_ratio(report: AnalysisReport) -> float:
    """I/H; 1.0 for a zero-entropy message."""
    return report.mutual_info / report.H if report.H > 0 else 1.0


def _message_hit_prob(scheme: SealScheme, joint: JointDistribution) -> float:
    # probability that the outcome label is the sealed message's index
    if joint.table is None:
        return float(np.prod(joint.factorized.correct_probs)) if joint.factorized.unmeasured == 0 else 0.0
    columns = {label: c for c, label in enumerate(joint.outcome_labels)}
    hit = 0.0
    for i in range(joint.table.shape[0]):
        c = columns.get(str(i))
        if c is not None:
            hit += float(joint.table[i, c])
    return min(max(hit, 0.0), 1.0)


def analyze_scheme(
    scheme: SealScheme,
    inst: MeasurementInstrument,
    threshold: float = 0.5,
    prior: Optional[np.ndarray] = None,
) -> AnalysisReport:
    """
    Entropies of the message given inst's outcome, plus readout probabilities.

    For product seals p_bit, p_string and the best first-k-bits partition come
    from the closed forms; other schemes use the joint table.
    """
    joint = joint_distribution(scheme, inst, prior)
    H, H_cond, mutual = entropies(joint)
    if isinstance(scheme, ProductSeal):
        k_star = max_partition_size(scheme, threshold)
        return AnalysisReport(
            H=H,
            H_cond=H_cond,
            mutual_info=mutual,
            p_bit=per_bit_correct_probs(scheme),
            p_string=string_correct_prob(scheme),
            p_max=partition_correct_prob(scheme, max(1, k_star)),
            k_star=k_star,
        )
    hit = _message_hit_prob(scheme, joint)
    bits = int(math.log2(scheme.message_count)) if scheme.message_count > 1 else 0
    return AnalysisReport(
        H=H,
        H_cond=H_cond,
        mutual_info=mutual,
        p_bit=None,
        p_string=hit,
        p_max=hit,
        k_star=bits if hit >= threshold else 0,
    )


def default_inst_rule(scheme: SealScheme, n: int) -> MeasurementInstrument:
    """Honest full readout for product seals, projective decode for orthonormal ones, else a projective Q-POVM."""
    if isinstance(scheme, ProductSeal):
        return honest_full_readout(n)
    if getattr(scheme, "is_orthonormal", None) and scheme.is_orthonormal():
        return projective_decode(scheme)
    return q_povm(scheme.dimension, 1.0)


@dataclass(frozen=True, eq=False)
class ClassificationResult:
    """
    Finite-n verdict with the evidence it was drawn from.

    Attributes:
        criterion: "A", "B" or "C".
        evidence: One row per admissible n (columns EVIDENCE_COLUMNS).
        window: The n values the trends were judged on.
        c_constant: For C, the largest H_cond/H on the window.
        heuristic: Always True; the verdict extrapolates finitely many n.
        note: Human-readable reason for the verdict.
    """

    criterion: str
    evidence: pd.DataFrame
    window: Tuple[int, ...]
    c_constant: Optional[float] = None
    heuristic: bool = True
    note: str = ""
    reports: Tuple[AnalysisReport, ...] = field(default=(), repr=False)


def _non_increasing(values: np.ndarray) -> bool:
    return bool(np.all(np.diff(values) <= COMPUTATION_TOL))


def criterion_c_constant(evidence: pd.DataFrame) -> float:
    """Largest H_cond/H in the evidence rows (the c of Criterion C)."""
    return float(evidence["H_cond_over_H"].max())


def classify_family(
    family: SealFamily,
    inst_rule: Optional[InstrumentRule] = None,
    cfg: Optional[ClassifierConfig] = None,
    n_grid: Optional[Sequence[int]] = None,
) -> ClassificationResult:
    """
    Assign Criterion A, B or C to a seal family from its behaviour on a grid of n.

    A: H_cond <= H_crit, non-increasing, and I/H >= info_ratio_min on the window.
    B: H_cond/H <= ratio_eps at the largest n and non-increasing on the window.
    C: otherwise; c is the largest H_cond/H on the window.

    Raises:
        SchemeError: fewer admissible grid points than cfg.trend_window.
    """
    cfg = cfg or ClassifierConfig()
    rule = inst_rule or default_inst_rule
    grid = sorted({int(n) for n in (n_grid if n_grid is not None else cfg.n_grid)})
    admissible = [n for n in grid if family.admits(n)]
    if len(admissible) < cfg.trend_window:
        raise SchemeError(
            f"grid too small: {len(admissible)} admissible n for {family.name or family.kind}, "
            f"trend_window={cfg.trend_window}"
        )

    rows = []
    reports = []
    for n in admissible:
        scheme = instantiate(family, n)
        report = analyze_scheme(scheme, rule(scheme, n), threshold=cfg.threshold)
        reports.append(report)
        rows.append({
            "n": n,
            "H": report.H,
            "H_cond": report.H_cond,
            "H_cond_over_H": report.H_cond_over_H,
            "info_ratio": info_ratio(report),
            "k_star": report.k_star,
        })
        logger.debug("[classify_family] %s n=%d H_cond=%.6g", family.name, n, report.H_cond)
    evidence = pd.DataFrame(rows, columns=EVIDENCE_COLUMNS)

    window_df = evidence.tail(cfg.trend_window)
    h_cond = window_df["H_cond"].to_numpy()
    ratio = window_df["H_cond_over_H"].to_numpy()
    window = tuple(int(n) for n in window_df["n"])

    if (
        np.all(h_cond <= cfg.H_crit)
        and _non_increasing(h_cond)
        and np.all(window_df["info_ratio"].to_numpy() >= cfg.info_ratio_min)
    ):
        criterion, c_value = "A", None
        note = f"H_cond <= {cfg.H_crit:g} bits and non-increasing on n={list(window)}"
    elif ratio[-1] <= cfg.ratio_eps and _non_increasing(ratio):
        criterion, c_value = "B", None
        note = f"H_cond/H = {ratio[-1]:.3g} <= {cfg.ratio_eps:g} at n={window[-1]} and decreasing"
    else:
        criterion, c_value = "C", criterion_c_constant(window_df)
        note = f"H_cond/H stays near c = {c_value:.3g} on n={list(window)}"

    logger.info("[classify_family] %s -> %s (%s)", family.name or family.kind, criterion, note)
    stamped = tuple(replace(r, criterion=criterion) for r in reports)
    return ClassificationResult(
        criterion=criterion,
        evidence=evidence,
        window=window,
        c_constant=c_value,
        note=note,
        reports=stamped,
    )


if __name__ == "__main__":
    for fam in (SealFamily.fourier(), SealFamily.scheme_a(0.3, 0.25), SealFamily.fixed_angle(0.3)):
        result = classify_family(fam)
        print(f"[classify_family] {fam.name}: {result.criterion} ({result.note})")
        print(result.evidence.to_string(index=False))
