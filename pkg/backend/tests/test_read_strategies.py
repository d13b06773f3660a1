import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

import math

import numpy as np
import pytest

from backend.src.quantum.errors import DimensionCapError, NotOrthonormalError, SchemeError
from backend.src.quantum.instruments import apply_instrument
from backend.src.quantum.states import PureState, normalize
from backend.src.seals.families import SealFamily, instantiate
from backend.src.seals.schemes import FourierSeal, MatrixSeal, TiltedProductSeal
from backend.src.strategies.read_strategies import (
    PartitionSpec,
    QPovmParams,
    default_partition_k,
    honest_full_readout,
    partition_readout,
    projective_decode,
    q_povm,
)


class TestPartitionReadout:
    def test_full_readout_is_standard_basis(self):
        inst = honest_full_readout(2)
        for i in range(4):
            ens = apply_instrument(inst, PureState.basis(i, 4))
            assert ens.probability_of(format(i, "02b")) == pytest.approx(1.0)

    def test_first_qubit_marginal(self):
        seal = TiltedProductSeal(n=2, theta_cap=0.6, alpha=1.0)
        ens = apply_instrument(partition_readout(2, 1), seal.encode("00"))
        assert ens.probability_of("0") == pytest.approx(0.912668, abs=1e-6)

    def test_dense_path_agrees_with_product_path(self):
        seal = instantiate(SealFamily.tilted(0.6, 1.0, angle_rule="alternating"), 3)
        state = seal.encode("011")
        inst = partition_readout(3, 2)
        product = apply_instrument(inst, state).probabilities()
        dense = apply_instrument(inst, PureState(state.amplitudes)).probabilities()
        assert product.keys() == dense.keys()
        for label in product:
            assert product[label] == pytest.approx(dense[label], abs=1e-12)

    def test_untouched_factors_preserved(self):
        seal = instantiate(SealFamily.scheme_a(0.3, 0.25), 50)
        state = seal.encode(0)
        for outcome in apply_instrument(partition_readout(50, 3), state):
            post = outcome.post_state.qubit_factorization
            for q in range(3, 50):
                np.testing.assert_allclose(post[q], state.qubit_factorization[q], atol=1e-15)

    def test_completeness(self):
        assert partition_readout(5, 3).completeness_residual() <= 1e-12

    @pytest.mark.parametrize("k", [0, 4])
    def test_k_out_of_range(self, k):
        with pytest.raises(SchemeError):
            partition_readout(3, k)

    def test_too_many_outcomes_for_product_path(self):
        seal = instantiate(SealFamily.fixed_angle(0.1), 20)
        with pytest.raises(DimensionCapError):
            apply_instrument(partition_readout(20, 13), seal.encode(0))

    @pytest.mark.parametrize("n, alpha, k", [(10_000, 0.25, 100), (1000, 0.25, 32), (100, 0.25, 10), (50, 1.0, 50)])
    def test_default_partition_k(self, n, alpha, k):
        assert default_partition_k(n, alpha) == k

    def test_partition_spec(self):
        part = PartitionSpec(n=4, k=2, p_max=0.9)
        assert part.element_of("1011") == "10"
        assert part.size == 4
        assert part.log2_size == 2


class TestQPovm:
    @pytest.mark.parametrize("N", [1, 3, 8])
    def test_endpoints(self, N):
        p1 = QPovmParams.from_nu(N, 1.0)
        assert p1.a == pytest.approx(0.0, abs=1e-15)
        assert p1.b == 1.0
        p0 = QPovmParams.from_nu(N, 0.0)
        assert p0.a == pytest.approx(1 / math.sqrt(N))
        assert p0.b == 0.0

    def test_half_strength_two_dim(self):
        p = QPovmParams.from_nu(2, 0.5)
        assert p.a == pytest.approx(0.411438, abs=1e-6)
        assert 2 * p.a ** 2 + 2 * p.a * p.b + p.b ** 2 == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("nu", [-0.1, 1.1])
    def test_nu_range(self, nu):
        with pytest.raises(SchemeError):
            q_povm(2, nu)

    def test_zero_strength_leaves_state(self, random_state):
        psi = PureState(random_state(4))
        ens = apply_instrument(q_povm(4, 0.0), psi)
        for outcome in ens:
            assert outcome.probability == pytest.approx(0.25)
            assert abs(np.vdot(outcome.post_state.amplitudes, psi.amplitudes)) == pytest.approx(1.0)

    def test_probabilities_increase_with_overlap(self, random_state):
        vec = random_state(6)
        probs = q_povm(6, 0.7).outcome_probabilities(vec)
        order = np.argsort(np.abs(vec) ** 2)
        assert np.all(np.diff(probs[order]) >= 0)

    def test_dense_residual_matches_structural(self):
        inst = q_povm(4, 0.3)
        dense = np.linalg.norm(sum(k.conj().T @ k for _, k in inst.iter_kraus()) - np.eye(4), ord=2)
        assert inst.completeness_residual() == pytest.approx(dense, abs=1e-14)


class TestProjectiveDecode:
    def test_fourier_two(self):
        ens = apply_instrument(projective_decode(FourierSeal(2)), FourierSeal(2).encode(1))
        assert ens.probability_of("1") == pytest.approx(1.0)
        np.testing.assert_allclose(
            abs(np.vdot(ens.outcomes[0].post_state.amplitudes, FourierSeal(2).encode(1).amplitudes)), 1.0
        )

    def test_fourier_four(self):
        ens = apply_instrument(projective_decode(FourierSeal(4)), FourierSeal(4).encode(2))
        assert ens.probability_of("2") == pytest.approx(1.0)

    def test_identity_seal_on_plus(self):
        ens = apply_instrument(projective_decode(MatrixSeal(np.eye(2))), normalize([1, 1]))
        assert ens.probabilities() == pytest.approx({"0": 0.5, "1": 0.5})

    def test_non_orthonormal_rejected(self):
        lam = np.array([[1, 0], [1 / math.sqrt(2), 1 / math.sqrt(2)]])
        with pytest.raises(NotOrthonormalError, match="seal states not orthonormal"):
            projective_decode(MatrixSeal(lam))

    def test_complement_outcome(self):
        inst = projective_decode(MatrixSeal(np.eye(4)[:2]))
        assert inst.has_complement
        assert inst.labels[-1] == "none"
        probs = inst.outcome_probabilities(normalize([1, 1, 1, 1]).amplitudes)
        np.testing.assert_allclose(probs, [0.25, 0.25, 0.5])
        assert inst.completeness_residual() <= 1e-12

    def test_large_fourier_sampled_residual(self):
        assert projective_decode(FourierSeal(2048)).completeness_residual() <= 1e-10
