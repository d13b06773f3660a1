import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import List, Optional

import numpy as np
from numpy.random import PCG64, Generator
from tqdm import tqdm

from backend.src.analysis.classifier import analyze_scheme, classify_family, default_inst_rule
from backend.src.analysis.probabilities import (
    expected_wrong_bits,
    max_partition_size,
    partition_correct_prob,
    string_correct_prob,
)
from backend.src.quantum.errors import InvariantViolation, SealError
from backend.src.quantum.states import COMPUTATION_TOL
from backend.src.runner.config_loader import ExperimentConfig, build_family, build_instrument, resolve_k
from backend.src.seals.schemes import ProductSeal
from backend.src.verification.verifier import joint_success_escape

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepRow:
    """One sweep point. Optional fields are blank for schemes without per-bit structure."""

    n: int
    k: Optional[int]
    p_bit: Optional[float]
    p_string: float
    p_max: float
    escape: float
    joint: float
    H: float
    H_cond: float
    H_cond_over_H: float
    k_star: int
    verdict: str
    expected_wrong_bits: Optional[float]

    def validate(self) -> None:
        """Re-check the invariants of the reports this row was built from."""
        for name in ("p_string", "p_max", "escape", "joint", "H_cond_over_H"):
            value = getattr(self, name)
            if not -COMPUTATION_TOL <= value <= 1.0 + COMPUTATION_TOL:
                raise InvariantViolation(f"n={self.n}: {name}={value!r} outside [0, 1]")
        if self.joint > self.escape + COMPUTATION_TOL:
            raise InvariantViolation(f"n={self.n}: joint {self.joint!r} exceeds escape {self.escape!r}")
        if not -COMPUTATION_TOL <= self.H_cond <= self.H + COMPUTATION_TOL:
            raise InvariantViolation(f"n={self.n}: H_cond={self.H_cond!r} outside [0, H]")
        if self.p_bit is not None and self.p_string > self.p_bit + COMPUTATION_TOL:
            raise InvariantViolation(f"n={self.n}: p_string exceeds the per-bit probability")


SWEEP_COLUMNS = [f.name for f in fields(SweepRow)]


class SweepRunner:
    """
    Evaluate one configured experiment at every n of its sweep.

    Rows are computed concurrently and returned in ascending n. The sealed
    message at each n is drawn from Generator(PCG64(seed)), so identical
    config and seed give identical rows.

    Args:
        cfg: Validated experiment config.
        max_workers: Thread pool size (None: executor default).
        verbose: Print progress lines.
        log_every: Progress print frequency (in rows).
        progress: Show a tqdm progress bar.
    """

    def __init__(
        self,
        cfg: ExperimentConfig,
        max_workers: Optional[int] = None,
        verbose: bool = False,
        log_every: int = 1,
        progress: bool = False,
    ) -> None:
        self.cfg = cfg
        self.max_workers = max_workers
        self.verbose = verbose
        self.log_every = max(1, int(log_every))
        self.progress = progress
        self.family = build_family(cfg)
        self.counters = {"rows": 0}

    def _message(self, scheme, n: int):
        rng = Generator(PCG64([self.cfg.output.seed, n]))
        if isinstance(scheme, ProductSeal):
            return rng.integers(0, 2, size=n).tolist()
        return int(rng.integers(0, scheme.message_count))

    def _row(self, n: int, verdict: str) -> SweepRow:
        cfg = self.cfg
        threshold = cfg.classifier.threshold
        try:
            scheme = self.family.instantiate(n)
            inst = build_instrument(cfg, scheme, n)
            detection = joint_success_escape(scheme, self._message(scheme, n), inst)
            evidence = analyze_scheme(scheme, default_inst_rule(scheme, n), threshold=threshold)
            if isinstance(scheme, ProductSeal):
                k = resolve_k(cfg, scheme, n)
                row = SweepRow(
                    n=n,
                    k=k,
                    p_bit=float(np.mean(evidence.p_bit)),
                    p_string=string_correct_prob(scheme),
                    p_max=partition_correct_prob(scheme, k),
                    escape=detection.escape_prob,
                    joint=detection.joint_success_escape,
                    H=evidence.H,
                    H_cond=evidence.H_cond,
                    H_cond_over_H=evidence.H_cond_over_H,
                    k_star=max_partition_size(scheme, threshold),
                    verdict=verdict,
                    expected_wrong_bits=expected_wrong_bits(scheme),
                )
            else:
                read = analyze_scheme(scheme, inst, threshold=threshold)
                row = SweepRow(
                    n=n,
                    k=read.k_star,
                    p_bit=None,
                    p_string=read.p_string,
                    p_max=read.p_max,
                    escape=detection.escape_prob,
                    joint=detection.joint_success_escape,
                    H=evidence.H,
                    H_cond=evidence.H_cond,
                    H_cond_over_H=evidence.H_cond_over_H,
                    k_star=read.k_star,
                    verdict=verdict,
                    expected_wrong_bits=None,
                )
        except SealError as exc:
            raise type(exc)(f"n={n}: {exc}") from exc
        row.validate()
        return row

    def run(self) -> List[SweepRow]:
        n_values = list(self.cfg.sweep.n_values)
        verdict = classify_family(self.family, cfg=self.cfg.classifier_config()).criterion
        if self.verbose:
            print(f"[SweepRunner] {self.family.name}: verdict {verdict} on n={n_values}")

        rows: List[SweepRow] = []
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            results = pool.map(lambda n: self._row(n, verdict), n_values)
            for row in tqdm(results, total=len(n_values), desc="sweep", disable=not self.progress):
                rows.append(row)
                self.counters["rows"] += 1
                if self.verbose and self.counters["rows"] % self.log_every == 0:
                    print(f"[SweepRunner] n={row.n} done (H_cond={row.H_cond:.6g}, p_max={row.p_max:.6g})")
        if self.verbose:
            print(f"[SweepRunner] {len(rows)} rows")
        return rows


def run_sweep(cfg: ExperimentConfig, **kwargs) -> List[SweepRow]:
    """Rows in ascending n for the configured family and strategy."""
    return SweepRunner(cfg, **kwargs).run()


if __name__ == "__main__":
    from backend.src.runner.config_loader import build_config

    for row in run_sweep(build_config({"scheme": "scheme_a"}), verbose=True):
        print(row)
