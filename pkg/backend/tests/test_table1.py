import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

import pytest

from backend.src.runner.table1 import (
    BEST_K_RULE,
    PREFIX_RULE,
    SCALING_LABELS,
    TABLE1_COLUMNS,
    exemplar_families,
    table1_demo,
)


@pytest.fixture(scope="module")
def table():
    return table1_demo((100, 1000, 10000))


class TestTable1:
    def test_shape(self, table):
        assert list(table.columns) == TABLE1_COLUMNS
        assert len(table) == 9
        assert list(table["criterion"].unique()) == ["A", "B", "C"]

    def test_criterion_a_reads_everything(self, table):
        rows = table[table["criterion"] == "A"]
        assert (rows["log2_partition_over_n"] == 1.0).all()
        assert (rows["H_cond"] < 0.05).all()
        assert rows["H_cond"].is_monotonic_decreasing

    def test_scheme_a_partition_shrinks(self, table):
        rows = table[table["criterion"] == "B"]
        assert rows["log2_partition"].tolist() == [10, 32, 100]
        assert rows["log2_partition_over_n"].is_monotonic_decreasing
        assert (rows["p_max"] > 0.9).all()

    def test_scheme_a_column_names_its_rule(self, table):
        rows = table[table["criterion"] == "B"]
        assert set(rows["partition_rule"]) == {PREFIX_RULE}
        assert rows["k_star"].iloc[-1] == 770
        assert (rows["k_star"] > rows["log2_partition"]).all()
        others = table[table["criterion"] != "B"]
        assert set(others["partition_rule"]) == {BEST_K_RULE}
        assert (others["k_star"] == others["log2_partition"]).all()

    def test_fixed_angle_partition_constant(self, table):
        rows = table[table["criterion"] == "C"]
        assert set(rows["log2_partition"]) == {7}
        assert rows["H_cond_over_H"].to_numpy() == pytest.approx(0.4275, abs=1e-3)

    def test_labels(self, table):
        for criterion, label in SCALING_LABELS.items():
            assert set(table.loc[table["criterion"] == criterion, "scaling_label"]) == {label}

    def test_exemplars(self):
        assert [c for c, _, _, _ in exemplar_families()] == ["A", "B", "C"]
