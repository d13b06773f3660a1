import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

import math

import numpy as np
import pytest

from backend.src.analysis.entropies import entropies, joint_distribution
from backend.src.oracle.exhaustive_oracle import (
    OracleReport,
    OracleSuite,
    monte_carlo_check,
    oracle_entropies,
    oracle_escape_probability,
    oracle_joint_distribution,
)
from backend.src.quantum.errors import DimensionCapError, SchemeError
from backend.src.seals.families import SealFamily, instantiate
from backend.src.seals.schemes import MatrixSeal
from backend.src.strategies.read_strategies import partition_readout, q_povm
from backend.src.verification.verifier import escape_probability


class TestOracle:
    def test_matches_fast_path_on_scheme_a(self, scheme_a_family):
        seal = instantiate(scheme_a_family, 4)
        inst = partition_readout(4, 2)
        fast, oracle = joint_distribution(seal, inst), oracle_joint_distribution(seal, inst)
        np.testing.assert_allclose(fast.dense(), oracle.dense(), atol=1e-12)
        np.testing.assert_allclose(entropies(fast), oracle_entropies(oracle), atol=1e-10)

    def test_escape_matches(self, tilted_qubit):
        inst = partition_readout(1, 1)
        assert oracle_escape_probability(tilted_qubit, 0, inst) == pytest.approx(
            escape_probability(tilted_qubit.encode(0), inst), abs=1e-12
        )

    def test_cap(self):
        seal = instantiate(SealFamily.fixed_angle(0.3), 13)
        with pytest.raises(DimensionCapError):
            oracle_joint_distribution(seal, partition_readout(13, 1))

    def test_suite_passes(self):
        suite = OracleSuite(nu_grid=(0.0, 0.5, 1.0))
        reports = suite.run(max_qubits=3)
        failed = [r.quantity for r in reports if not r.passed]
        assert failed == []
        assert suite.counters["failed"] == 0
        assert suite.counters["checks"] == len(reports)

    def test_suite_verbose_output(self, capsys):
        OracleSuite(verbose=True, log_every=1).run(max_qubits=1)
        assert "[OracleSuite] done" in capsys.readouterr().out


class TestOracleReport:
    def test_worst_entry_reported(self):
        report = OracleReport.compare("x", [0.1, 0.5], [0.1, 0.4], tolerance=1e-3)
        assert not report.passed
        assert report.abs_diff == pytest.approx(0.1)
        assert report.fast_value == 0.5

    def test_shape_mismatch_fails(self):
        assert not OracleReport.compare("x", [0.1], [0.1, 0.2]).passed


class TestMonteCarlo:
    def test_fair_coin(self):
        seal = MatrixSeal(np.array([[1, 1]]) / math.sqrt(2))
        report = monte_carlo_check(seal, q_povm(2, 1.0), trials=20_000, seed=7)
        assert report.passed
        assert report.oracle_value == pytest.approx(0.5)
        assert report.detail == "PCG64(seed=7) trials=20000"

    def test_tilted_qubit(self, tilted_qubit):
        report = monte_carlo_check(tilted_qubit, partition_readout(1, 1), trials=10_000, seed=11)
        assert report.passed

    def test_same_seed_same_report(self, scheme_a_family):
        seal = instantiate(scheme_a_family, 3)
        inst = partition_readout(3, 2)
        assert monte_carlo_check(seal, inst, 5000, seed=3) == monte_carlo_check(seal, inst, 5000, seed=3)

    def test_too_few_trials(self, tilted_qubit):
        with pytest.raises(SchemeError):
            monte_carlo_check(tilted_qubit, partition_readout(1, 1), trials=999, seed=0)
