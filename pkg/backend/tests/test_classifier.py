import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

import math

import numpy as np
import pytest

from backend.src.analysis.classifier import (
    EVIDENCE_COLUMNS,
    AnalysisReport,
    ClassifierConfig,
    analyze_scheme,
    classify_family,
    criterion_c_constant,
    default_inst_rule,
    info_ratio,
)
from backend.src.analysis.entropies import binary_entropy
from backend.src.quantum.errors import InvariantViolation, SchemeError
from backend.src.seals.families import SealFamily, instantiate
from backend.src.seals.schemes import FourierSeal, MatrixSeal
from backend.src.strategies.read_strategies import (
    PartitionReadoutInstrument,
    ProjectiveDecodeInstrument,
    QPovmInstrument,
    partition_readout,
    q_povm,
)


class TestClassifyFamily:
    def test_fourier_is_a(self):
        result = classify_family(SealFamily.fourier())
        assert result.criterion == "A"
        assert result.window == (4, 6, 8)
        assert list(result.evidence.columns) == EVIDENCE_COLUMNS
        assert (result.evidence["H_cond"].abs() < 1e-10).all()
        assert result.heuristic

    def test_scheme_a_is_b(self, scheme_a_family):
        result = classify_family(scheme_a_family)
        assert result.criterion == "B"
        last = result.evidence.iloc[-1]
        assert last["n"] == 65536
        assert last["H_cond_over_H"] == pytest.approx(0.0045, abs=5e-4)
        assert last["H_cond"] > 4.0

    def test_fixed_angle_is_c(self):
        result = classify_family(SealFamily.fixed_angle(0.3))
        assert result.criterion == "C"
        assert result.c_constant == pytest.approx(binary_entropy(math.sin(0.3) ** 2), abs=1e-9)
        large = result.evidence[result.evidence["n"] >= 8]
        assert (large["k_star"] == 7).all()
        assert criterion_c_constant(result.evidence) >= result.evidence["H_cond_over_H"].iloc[-1]

    def test_tilted_alpha_one_is_a(self):
        result = classify_family(SealFamily.tilted(0.3, 1.0))
        assert result.criterion == "A"
        assert (result.evidence["info_ratio"] >= 0.5).all()

    def test_grid_too_small(self):
        with pytest.raises(SchemeError, match="grid too small"):
            classify_family(SealFamily.fourier(), cfg=ClassifierConfig(trend_window=4))

    def test_grid_order_does_not_matter(self, scheme_a_family):
        a = classify_family(scheme_a_family, n_grid=[100, 1000, 10_000])
        b = classify_family(scheme_a_family, n_grid=[10_000, 100, 1000, 100])
        assert a.criterion == b.criterion
        np.testing.assert_allclose(a.evidence.to_numpy(dtype=float), b.evidence.to_numpy(dtype=float))

    def test_custom_rule_reading_one_bit(self):
        rule = lambda scheme, n: partition_readout(n, 1)  # noqa: E731
        result = classify_family(SealFamily.fixed_angle(0.3), inst_rule=rule, n_grid=[10, 100, 1000])
        assert result.criterion == "C"
        assert result.c_constant > 0.99

    @pytest.mark.parametrize("alpha, verdict", [(0.25, "B"), (1.0, "A")])
    def test_bit_order_does_not_change_verdict(self, alpha, verdict):
        def profile(n, bound):
            return bound * (0.2 + 0.4 * (np.arange(n) % 3)) * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)

        def reversed_profile(n, bound):
            return profile(n, bound)[::-1]

        a = classify_family(SealFamily.tilted(0.3, alpha, angle_rule=profile))
        b = classify_family(SealFamily.tilted(0.3, alpha, angle_rule=reversed_profile))
        assert a.criterion == b.criterion == verdict
        np.testing.assert_allclose(a.evidence["H_cond"], b.evidence["H_cond"], rtol=1e-12)

    def test_reports_carry_the_verdict(self):
        result = classify_family(SealFamily.fixed_angle(0.3), n_grid=[10, 20, 30])
        assert len(result.reports) == 3
        assert {r.criterion for r in result.reports} == {"C"}


class TestAnalyzeScheme:
    def test_product_seal(self):
        seal = instantiate(SealFamily.fixed_angle(0.3), 20)
        report = analyze_scheme(seal, default_inst_rule(seal, 20))
        assert report.k_star == 7
        assert report.p_max == pytest.approx(math.cos(0.3) ** 14)
        assert report.p_string == pytest.approx(math.cos(0.3) ** 40)
        assert len(report.p_bit) == 20

    def test_perfect_decode(self):
        report = analyze_scheme(FourierSeal(8), default_inst_rule(FourierSeal(8), 3))
        assert report.p_max == pytest.approx(1.0)
        assert report.k_star == 3
        assert report.p_bit is None
        assert info_ratio(report) == pytest.approx(1.0)

    def test_weak_measurement_misses(self):
        report = analyze_scheme(FourierSeal(4), q_povm(4, 0.5))
        assert report.p_max == pytest.approx(0.25)
        assert report.k_star == 0

    def test_default_rules(self):
        assert isinstance(default_inst_rule(instantiate(SealFamily.fixed_angle(0.3), 3), 3), PartitionReadoutInstrument)
        assert isinstance(default_inst_rule(FourierSeal(4), 2), ProjectiveDecodeInstrument)
        lam = np.array([[1, 0], [1, 1]]) / np.array([[1], [math.sqrt(2)]])
        assert isinstance(default_inst_rule(MatrixSeal(lam), 1), QPovmInstrument)


class TestInvariants:
    def test_conditional_above_total(self):
        with pytest.raises(InvariantViolation):
            AnalysisReport(H=1.0, H_cond=1.5, mutual_info=-0.5, p_bit=None, p_string=0.5, p_max=0.5, k_star=0)

    def test_mutual_information_mismatch(self):
        with pytest.raises(InvariantViolation):
            AnalysisReport(H=2.0, H_cond=1.0, mutual_info=0.5, p_bit=None, p_string=0.5, p_max=0.5, k_star=0)

    def test_string_above_bit(self):
        with pytest.raises(InvariantViolation):
            AnalysisReport(
                H=2.0, H_cond=1.0, mutual_info=1.0, p_bit=np.array([0.6, 0.9]), p_string=0.7, p_max=0.7, k_star=1
            )

    def test_unknown_criterion(self):
        with pytest.raises(InvariantViolation):
            AnalysisReport(H=1.0, H_cond=0.5, mutual_info=0.5, p_bit=None, p_string=0.5, p_max=0.5, k_star=0, criterion="D")

    def test_config_validation(self):
        with pytest.raises(SchemeError):
            ClassifierConfig(ratio_eps=1.5)
        assert ClassifierConfig(n_grid=(64, 8, 8, 16)).n_grid == (8, 16, 64)
