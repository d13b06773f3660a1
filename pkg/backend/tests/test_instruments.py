import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

import numpy as np
import pytest

from backend.src.quantum.errors import CompletenessError, DimensionMismatchError
from backend.src.quantum.instruments import KrausInstrument, apply_instrument
from backend.src.quantum.states import PureState, normalize
from backend.src.strategies.read_strategies import q_povm


@pytest.fixture
def z_basis():
    return KrausInstrument([("0", np.diag([1, 0])), ("1", np.diag([0, 1]))])


class TestApplyInstrument:
    def test_basis_state(self, z_basis):
        ens = apply_instrument(z_basis, PureState.basis(0, 2))
        assert len(ens) == 1
        (out,) = ens
        assert out.label == "0"
        assert out.probability == pytest.approx(1.0)
        np.testing.assert_allclose(out.post_state.amplitudes, [1, 0])

    def test_plus_state(self, z_basis):
        probs = apply_instrument(z_basis, normalize([1, 1])).probabilities()
        assert probs == pytest.approx({"0": 0.5, "1": 0.5})

    def test_qpovm_probabilities_sum_to_one(self):
        ens = apply_instrument(q_povm(2, 0.5), PureState.basis(0, 2))
        assert ens.total() == pytest.approx(1.0, abs=1e-10)
        assert ens.probability_of("0") > ens.probability_of("1")

    def test_incomplete_instrument_rejected_before_evaluation(self):
        broken = KrausInstrument([("0", np.diag([1, 0]))], validate=False)
        with pytest.raises(CompletenessError):
            apply_instrument(broken, PureState.basis(0, 2))

    def test_incomplete_instrument_rejected_on_construction(self):
        with pytest.raises(CompletenessError):
            KrausInstrument([("0", np.diag([1, 0]))])

    def test_dimension_mismatch(self, z_basis):
        with pytest.raises(DimensionMismatchError):
            apply_instrument(z_basis, PureState.basis(0, 4))

    def test_negligible_outcomes_dropped(self, z_basis):
        # p(1) ~ 1e-16 < 1e-14
        state = normalize([1.0, 1e-8])
        labels = [o.label for o in apply_instrument(z_basis, state)]
        assert labels == ["0"]
