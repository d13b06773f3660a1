import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.random import PCG64, Generator

from backend.src.analysis.entropies import JointDistribution, entropies, joint_distribution
from backend.src.quantum.errors import DimensionCapError, SchemeError
from backend.src.quantum.instruments import MeasurementInstrument
from backend.src.quantum.states import DIMENSION_CAP
from backend.src.seals.families import SealFamily, instantiate
from backend.src.seals.schemes import FourierSeal, MatrixSeal, ProductSeal, SealScheme
from backend.src.strategies.read_strategies import (
    PartitionReadoutInstrument,
    ProjectiveDecodeInstrument,
    QPovmInstrument,
    partition_readout,
    projective_decode,
    q_povm,
)
from backend.src.verification.verifier import escape_probability, joint_success_escape

logger = logging.getLogger(__name__)

ORACLE_TOL = 1e-10
GENERATOR_NAME = "PCG64"
MIN_TRIALS = 1000


# ---------------------------------------------------------------------------
# Dense reference constructions. Nothing below reuses the structured fast
# paths; only the scheme/instrument parameters are read.
# ---------------------------------------------------------------------------

def _check_cap(dim: int) -> None:
    if dim > DIMENSION_CAP:
        raise DimensionCapError(f"dimension cap exceeded: oracle needs dimension {dim} > {DIMENSION_CAP}")


def _oracle_state(scheme: SealScheme, index: int) -> np.ndarray:
    _check_cap(scheme.dimension)
    if isinstance(scheme, ProductSeal):
        n = scheme.n
        vec = np.ones(1, dtype=complex)
        for q in range(n):
            bit = (index >> (n - 1 - q)) & 1
            t = float(scheme.angles[q])
            qubit = np.array([math.cos(t), math.sin(t)], dtype=complex)
            if bit:
                qubit = qubit[::-1]
            vec = np.kron(vec, qubit)
        return vec
    if isinstance(scheme, FourierSeal):
        N = scheme.N
        j = np.arange(N)
        return np.exp(2j * np.pi * index * j / N) / math.sqrt(N)
    if isinstance(scheme, MatrixSeal):
        return np.array(scheme.lam[index], dtype=complex)
    raise SchemeError(f"oracle has no dense construction for {type(scheme).__name__}")


def _oracle_kraus(inst: MeasurementInstrument) -> List[Tuple[str, np.ndarray]]:
    D = inst.dimension
    _check_cap(D)
    if isinstance(inst, PartitionReadoutInstrument):
        shift = inst.n - inst.k
        index_prefix = np.arange(D) >> shift
        ops = []
        for s in range(2 ** inst.k):
            ops.append((format(s, f"0{inst.k}b"), np.diag((index_prefix == s).astype(complex))))
        return ops
    if isinstance(inst, QPovmInstrument):
        a, b = inst.params.a, inst.params.b
        ops = []
        for i in range(D):
            k = a * np.eye(D, dtype=complex)
            k[i, i] += b
            ops.append((str(i), k))
        return ops
    if isinstance(inst, ProjectiveDecodeInstrument):
        seal = inst.seal
        ops = []
        total = np.zeros((D, D), dtype=complex)
        for i in range(seal.message_count):
            phi = _oracle_state(seal, i)
            proj = np.outer(phi, phi.conj())
            total += proj
            ops.append((str(i), proj))
        if seal.message_count < D:
            ops.append((ProjectiveDecodeInstrument.COMPLEMENT_LABEL, np.eye(D) - total))
        return ops
    return list(inst.iter_kraus())


def oracle_joint_distribution(
    scheme: SealScheme,
    inst: MeasurementInstrument,
    prior: Optional[np.ndarray] = None,
) -> JointDistribution:
    """P(i, m) = prior(i) ||K_m psi_i||^2 by direct matrix-vector products."""
    if inst.dimension != scheme.dimension:
        raise SchemeError(f"instrument dimension {inst.dimension} != scheme dimension {scheme.dimension}")
    N = scheme.message_count
    _check_cap(N)
    ops = _oracle_kraus(inst)
    weights = np.full(N, 1.0 / N) if prior is None else np.asarray(prior, dtype=float)
    table = np.zeros((N, len(ops)))
    for i in range(N):
        psi = _oracle_state(scheme, i)
        for m, (_, k) in enumerate(ops):
            out = k @ psi
            table[i, m] = weights[i] * float(np.real(np.vdot(out, out)))
    return JointDistribution(prior=weights, table=table, outcome_labels=tuple(lbl for lbl, _ in ops))


def oracle_entropies(joint: JointDistribution) -> Tuple[float, float, float]:
    """(H, H_cond, I) from the dense table with plain log2 sums."""
    table = np.asarray(joint.dense(), dtype=float)

    def _h(p: np.ndarray) -> float:
        p = p[p > 0]
        return float(-(p * np.log2(p)).sum())

    H = _h(table.sum(axis=1))
    H_cond = _h(table.ravel()) - _h(table.sum(axis=0))
    return H, H_cond, H - H_cond


def _oracle_success_label(scheme: SealScheme, index: int, inst: MeasurementInstrument) -> str:
    if isinstance(inst, PartitionReadoutInstrument):
        return format(index >> (inst.n - inst.k), f"0{inst.k}b")
    return str(index)


def oracle_escape_probability(scheme: SealScheme, message: int, inst: MeasurementInstrument) -> float:
    """sum_m |<psi|K_m|psi>|^2 with dense operators."""
    psi = _oracle_state(scheme, int(message))
    return float(sum(abs(np.vdot(psi, k @ psi)) ** 2 for _, k in _oracle_kraus(inst)))


def oracle_joint_success_escape(scheme: SealScheme, message: int, inst: MeasurementInstrument) -> float:
    """|<psi|K_m|psi>|^2 summed over the outcome that names the sealed message (or its prefix)."""
    psi = _oracle_state(scheme, int(message))
    target = _oracle_success_label(scheme, int(message), inst)
    return float(sum(abs(np.vdot(psi, k @ psi)) ** 2 for lbl, k in _oracle_kraus(inst) if lbl == target))


@dataclass(frozen=True)
class OracleReport:
    """
    One fast-path vs oracle comparison.

    Attributes:
        quantity: What was compared (e.g. "joint[tilted n=3 | partition k=2]").
        fast_value: Fast-path value (the entry with the largest deviation for arrays).
        oracle_value: Oracle value at the same entry.
        abs_diff: Largest absolute deviation.
        tolerance: Allowed deviation.
        passed: abs_diff <= tolerance.
        detail: Free-form annotation (generator name and seed for Monte Carlo rows).
    """

    quantity: str
    fast_value: float
    oracle_value: float
    abs_diff: float
    tolerance: float
    passed: bool
    detail: str = ""

    @classmethod
    def compare(cls, quantity: str, fast, oracle, tolerance: float = ORACLE_TOL, detail: str = "") -> "OracleReport":
        f = np.atleast_1d(np.asarray(fast, dtype=float))
        o = np.atleast_1d(np.asarray(oracle, dtype=float))
        if f.shape != o.shape:
            return cls(quantity, math.nan, math.nan, math.inf, tolerance, False, f"shape {f.shape} != {o.shape}")
        diff = np.abs(f - o)
        worst = int(np.argmax(diff))
        abs_diff = float(diff.flat[worst])
        return cls(
            quantity=quantity,
            fast_value=float(f.flat[worst]),
            oracle_value=float(o.flat[worst]),
            abs_diff=abs_diff,
            tolerance=tolerance,
            passed=abs_diff <= tolerance,
            detail=detail,
        )


def monte_carlo_check(
    scheme: SealScheme,
    inst: MeasurementInstrument,
    trials: int,
    seed: int,
    message: int = 0,
) -> OracleReport:
    """
    Sample outcomes of inst on the sealed message and compare frequencies with
    the oracle's exact probabilities.

    Outcomes are drawn from the fast-path Born probabilities with a
    Generator(PCG64(seed)); the check passes iff every outcome satisfies
    |freq - p| <= 4 sqrt(p (1 - p) / trials) + 1e-9. The reported row is the
    outcome with the smallest margin.
    """
    if int(trials) < MIN_TRIALS:
        raise SchemeError(f"monte_carlo_check needs trials >= {MIN_TRIALS}, got {trials}")
    trials = int(trials)
    fast_probs = np.clip(inst.outcome_probabilities(scheme.encode(message).amplitudes), 0.0, None)
    psi = _oracle_state(scheme, scheme.message_index(message))
    exact = np.array([float(np.real(np.vdot(k @ psi, k @ psi))) for _, k in _oracle_kraus(inst)])

    rng = Generator(PCG64(seed))
    draws = rng.choice(fast_probs.size, size=trials, p=fast_probs / fast_probs.sum())
    freqs = np.bincount(draws, minlength=fast_probs.size) / trials

    bounds = 4.0 * np.sqrt(exact * (1.0 - exact) / trials) + 1e-9
    diffs = np.abs(freqs - exact)
    worst = int(np.argmax(diffs - bounds))
    return OracleReport(
        quantity=f"monte_carlo[{inst.labels[worst]}]",
        fast_value=float(freqs[worst]),
        oracle_value=float(exact[worst]),
        abs_diff=float(diffs[worst]),
        tolerance=float(bounds[worst]),
        passed=bool(np.all(diffs <= bounds)),
        detail=f"{GENERATOR_NAME}(seed={seed}) trials={trials}",
    )


def _suite_schemes(n: int) -> List[Tuple[str, SealScheme]]:
    D = 2 ** n
    schemes = [
        ("scheme_a", instantiate(SealFamily.scheme_a(0.3, 0.25, angle_rule="alternating"), n)),
        ("tilted_alpha1", instantiate(SealFamily.tilted(0.6, 1.0), n)),
        ("fixed_angle", instantiate(SealFamily.fixed_angle(0.3), n)),
        ("fourier", FourierSeal(D)),
        ("identity", MatrixSeal(np.eye(D))),
    ]
    if D >= 4:
        schemes.append(("partial_identity", MatrixSeal(np.eye(D)[: D // 2])))
    return schemes


def _suite_strategies(n: int, scheme: SealScheme, nu_grid: Sequence[float]) -> List[Tuple[str, MeasurementInstrument]]:
    strategies: List[Tuple[str, MeasurementInstrument]] = []
    if isinstance(scheme, ProductSeal):
        for k in sorted({1, (n + 1) // 2, n}):
            strategies.append((f"partition k={k}", partition_readout(n, k)))
    else:
        strategies.append(("projective", projective_decode(scheme)))
    for nu in nu_grid:
        strategies.append((f"q_povm nu={nu:g}", q_povm(scheme.dimension, nu)))
    return strategies


class OracleSuite:
    """
    Compare every built-in scheme/strategy pair against the dense oracle.

    Args:
        verbose: Print progress lines.
        log_every: Progress print frequency (in scheme/strategy pairs).
        tolerance: Allowed absolute deviation.
        nu_grid: Q-POVM strengths to include.
    """

    def __init__(
        self,
        verbose: bool = False,
        log_every: int = 10,
        tolerance: float = ORACLE_TOL,
        nu_grid: Sequence[float] = (0.0, 0.5, 1.0),
    ) -> None:
        self.verbose = verbose
        self.log_every = max(1, int(log_every))
        self.tolerance = tolerance
        self.nu_grid = tuple(nu_grid)
        self.counters = {"pairs": 0, "checks": 0, "failed": 0}

    def _check_pair(self, tag: str, scheme: SealScheme, inst: MeasurementInstrument) -> List[OracleReport]:
        oracle = oracle_joint_distribution(scheme, inst)
        fast = joint_distribution(scheme, inst)
        reports = [
            OracleReport.compare(f"joint[{tag}]", fast.dense(), oracle.dense(), self.tolerance),
            OracleReport.compare(f"entropies[{tag}]", entropies(fast), oracle_entropies(oracle), self.tolerance),
        ]
        for message in sorted({0, scheme.message_count - 1}):
            state = scheme.encode(message)
            reports.append(OracleReport.compare(
                f"escape[{tag} m={message}]",
                escape_probability(state, inst),
                oracle_escape_probability(scheme, message, inst),
                self.tolerance,
            ))
            reports.append(OracleReport.compare(
                f"joint_success_escape[{tag} m={message}]",
                joint_success_escape(scheme, message, inst).joint_success_escape,
                oracle_joint_success_escape(scheme, message, inst),
                self.tolerance,
            ))
        return reports

    def run(self, max_qubits: int = 6) -> List[OracleReport]:
        if int(max_qubits) < 1:
            raise SchemeError(f"max_qubits must be >= 1, got {max_qubits}")
        _check_cap(2 ** int(max_qubits))
        reports: List[OracleReport] = []
        for n in range(1, int(max_qubits) + 1):
            for name, scheme in _suite_schemes(n):
                for strategy, inst in _suite_strategies(n, scheme, self.nu_grid):
                    tag = f"{name} n={n} | {strategy}"
                    rows = self._check_pair(tag, scheme, inst)
                    reports.extend(rows)
                    self.counters["pairs"] += 1
                    self.counters["checks"] += len(rows)
                    failed = [r for r in rows if not r.passed]
                    self.counters["failed"] += len(failed)
                    for r in failed:
                        logger.warning("[OracleSuite] FAILED %s: diff=%.3e", r.quantity, r.abs_diff)
                    if self.verbose and self.counters["pairs"] % self.log_every == 0:
                        print(f"[OracleSuite] {self.counters['pairs']} pairs checked (last: {tag})")
        if self.verbose:
            print(
                f"[OracleSuite] done: pairs={self.counters['pairs']} "
                f"checks={self.counters['checks']} failed={self.counters['failed']}"
            )
        return reports


if __name__ == "__main__":
    suite = OracleSuite(verbose=True)
    results = suite.run(max_qubits=3)
    tilt = instantiate(SealFamily.fixed_angle(0.3), 1)
    print(monte_carlo_check(tilt, partition_readout(1, 1), trials=100_000, seed=7))
