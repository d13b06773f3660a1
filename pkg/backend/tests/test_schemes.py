import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

import math

import numpy as np
import pandas as pd
import pytest

from backend.src.quantum.errors import SchemeError
from backend.src.seals.families import SealFamily, instantiate, resolve_angles
from backend.src.seals.schemes import (
    FixedAngleBitSeal,
    FourierSeal,
    MatrixSeal,
    TiltedProductSeal,
    encode_matrix,
    encode_tilted,
    equal_magnitude_check,
    fourier_matrix,
    fourier_state,
    parse_bits,
)


class TestParseBits:
    @pytest.mark.parametrize("message", [5, "101", [1, 0, 1]])
    def test_equivalent_forms(self, message):
        np.testing.assert_array_equal(parse_bits(message, 3), [1, 0, 1])

    def test_length_mismatch(self):
        with pytest.raises(SchemeError):
            parse_bits("10", 3)

    def test_index_out_of_range(self):
        with pytest.raises(SchemeError):
            parse_bits(8, 3)


class TestTiltedProductSeal:
    def test_two_qubit_encoding(self):
        seal = TiltedProductSeal(n=2, theta_cap=0.6, alpha=1.0)
        assert seal.angle_bound == pytest.approx(0.3)
        np.testing.assert_allclose(
            encode_tilted(seal, "00").amplitudes.real, [0.912668, 0.282321, 0.282321, 0.087332], atol=1e-6
        )

    def test_bit_one_swaps_amplitudes(self):
        seal = TiltedProductSeal(n=1, theta_cap=0.3, alpha=1.0)
        np.testing.assert_allclose(seal.encode("1").amplitudes.real, [np.sin(0.3), np.cos(0.3)])

    @pytest.mark.parametrize("i", [0, 3, 5])
    def test_one_bit_flip_overlap(self, i):
        seal = instantiate(SealFamily.tilted(0.6, 0.5, angle_rule="alternating"), 6)
        bits = "010110"
        flipped = bits[:i] + ("1" if bits[i] == "0" else "0") + bits[i + 1:]
        overlap = abs(np.vdot(seal.encode(bits).amplitudes, seal.encode(flipped).amplitudes))
        assert overlap == pytest.approx(abs(np.sin(2 * seal.angles[i])), abs=1e-12)

    def test_theta_cap_range(self):
        with pytest.raises(SchemeError, match="theta_cap must be < π/4"):
            TiltedProductSeal(n=4, theta_cap=1.0, alpha=0.25)

    def test_angle_bound_enforced(self):
        with pytest.raises(SchemeError, match="angle bound"):
            TiltedProductSeal(n=4, theta_cap=0.3, alpha=0.25, angles=np.full(4, 0.2))

    def test_large_n_stays_factorized(self):
        seal = instantiate(SealFamily.scheme_a(0.3, 0.25), 10_000)
        state = seal.encode(0)
        assert state.is_product
        assert state.num_qubits == 10_000
        assert seal.angles[0] == pytest.approx(0.03)


class TestFixedAngleBitSeal:
    def test_angles(self):
        np.testing.assert_allclose(FixedAngleBitSeal(n=5, theta=0.3).angles, np.full(5, 0.3))

    def test_theta_range(self):
        with pytest.raises(SchemeError):
            FixedAngleBitSeal(n=2, theta=0.8)


class TestFourierSeal:
    @pytest.mark.parametrize("N", [2, 4, 16, 256])
    def test_equal_magnitudes(self, N):
        assert equal_magnitude_check(FourierSeal(N))
        np.testing.assert_allclose(np.abs(FourierSeal(N).lam), 1 / math.sqrt(N), atol=1e-12)

    def test_orthonormal_rows(self):
        lam = FourierSeal(8).lam
        np.testing.assert_allclose(lam.conj() @ lam.T, np.eye(8), atol=1e-12)

    def test_state_phase(self):
        phi = fourier_state(4, 1).amplitudes
        np.testing.assert_allclose(phi, np.array([1, 1j, -1, -1j]) / 2, atol=1e-12)

    def test_orthonormal_at_cap_sampled(self):
        idx = [0, 1, 2047, 4095]
        states = [fourier_state(4096, i).amplitudes for i in idx]
        gram = np.array([[np.vdot(a, b) for b in states] for a in states])
        np.testing.assert_allclose(gram, np.eye(len(idx)), atol=1e-10)

    @pytest.mark.slow
    def test_orthonormal_at_cap(self):
        lam = fourier_matrix(4096)
        # row i transforms to sqrt(N) e_i
        np.testing.assert_allclose(np.fft.fft(lam, axis=1) / np.sqrt(4096), np.eye(4096), atol=1e-9)

    def test_identity_is_not_equal_magnitude(self):
        assert not equal_magnitude_check(MatrixSeal(np.eye(4)))


class TestMatrixSeal:
    def test_rows_must_be_normalized(self):
        with pytest.raises(SchemeError, match="not normalized"):
            MatrixSeal([[1, 1], [0, 1]])

    def test_orthonormal_flag(self):
        assert MatrixSeal(np.eye(2)).is_orthonormal()
        assert not MatrixSeal(np.array([[1, 0], [1, 1]]) / np.array([[1], [np.sqrt(2)]])).is_orthonormal()

    def test_from_csv(self, tmp_path):
        path = tmp_path / "lambda.csv"
        pd.DataFrame(
            {"row": [0, 1, 1], "col": [0, 0, 1], "re": [1.0, 0.6, 0.0], "im": [0.0, 0.0, 0.8]}
        ).to_csv(path, index=False)
        seal = MatrixSeal.from_csv(str(path))
        assert seal.lam.shape == (2, 2)
        np.testing.assert_allclose(seal.encode(1).amplitudes, [0.6, 0.8j])

    def test_csv_index_outside_shape(self, tmp_path):
        path = tmp_path / "lambda.csv"
        pd.DataFrame({"row": [0, 2], "col": [0, 1], "re": [1.0, 1.0], "im": [0.0, 0.0]}).to_csv(path, index=False)
        with pytest.raises(SchemeError, match="outside shape"):
            MatrixSeal.from_csv(str(path), shape=(2, 2))

    def test_encode_matrix_reads_row(self):
        lam = np.array([[1, 0, 0, 0], [0, 0.6, 0.8j, 0]])
        np.testing.assert_allclose(encode_matrix(MatrixSeal(lam), 1).amplitudes, lam[1])
        assert encode_matrix(MatrixSeal(lam), 0).dimension == 4


class TestFamilies:
    def test_scheme_a_requires_small_alpha(self):
        with pytest.raises(SchemeError):
            SealFamily.scheme_a(0.3, 0.6)

    def test_fourier_admissibility(self):
        fam = SealFamily.fourier()
        assert fam.admits(12)
        assert not fam.admits(13)
        with pytest.raises(SchemeError):
            instantiate(fam, 13)

    @pytest.mark.parametrize("rule", ["extreme", "alternating"])
    def test_angle_rules_respect_bound(self, rule):
        angles = resolve_angles(rule, 6, 0.1)
        np.testing.assert_allclose(np.abs(angles), 0.1)

    def test_alternating_signs(self):
        np.testing.assert_allclose(resolve_angles("alternating", 4, 0.1), [0.1, -0.1, 0.1, -0.1])

    def test_callable_rule(self):
        fam = SealFamily.tilted(0.3, 1.0, angle_rule=lambda n, bound: np.linspace(0, bound, n))
        seal = instantiate(fam, 3)
        np.testing.assert_allclose(seal.angles, [0.0, 0.05, 0.1])

    def test_unknown_rule(self):
        with pytest.raises(SchemeError):
            resolve_angles("zigzag", 3, 0.1)
