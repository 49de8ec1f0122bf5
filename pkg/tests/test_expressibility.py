import math
import unittest
import numpy as np
from numpy.testing import assert_allclose

from kraus_vqa.qcore import (HADAMARD, DensityMatrix, KrausChannel, purity,
                             random_density_matrix, random_pure_state)
from kraus_vqa.ansatz import ParamInit, build_hea
from kraus_vqa.expressibility import *


class HaarMomentCoeffsTestCase(unittest.TestCase):
    def test_pure(self):
        coeffs = haar_moment_coeffs(DensityMatrix.basis("0"))
        self.assertAlmostEqual(coeffs.alpha, 1 / 6)
        self.assertAlmostEqual(coeffs.beta, 1 / 6)
        self.assertEqual(coeffs.d, 2)

    def test_maximally_mixed(self):
        coeffs = haar_moment_coeffs(DensityMatrix.maximally_mixed(2))
        self.assertAlmostEqual(coeffs.alpha, 1 / 16)
        self.assertAlmostEqual(coeffs.beta, 0)

    def test_operator_trace(self):
        rho = random_density_matrix(4, np.random.default_rng(0))
        operator = haar_moment_coeffs(rho).operator()
        self.assertEqual(operator.shape, (16, 16))
        # The twirl preserves the trace of rho ⊗ rho.
        self.assertAlmostEqual(np.trace(operator).real, 1, delta=1e-12)

    def test_twirl_estimate(self):
        rng = np.random.default_rng(1)
        rho = DensityMatrix.from_statevector(random_pure_state(2, rng))
        estimate = haar_twirl_estimate(rho, 20_000, rng, batch=7_000)
        assert_allclose(estimate, haar_moment_coeffs(rho).operator(), atol=0.02)

    def test_wrong_state(self):
        with self.assertRaisesRegex(TypeError,
                r"State must be an instance of DensityMatrix, not 'foo'"):
            haar_moment_coeffs("foo")
        with self.assertRaisesRegex(TypeError,
                r"Sample count must be a positive integer, not 0"):
            haar_twirl_estimate(DensityMatrix.basis("0"), 0, np.random.default_rng(0))

    def test_wrong_coefficients(self):
        with self.assertRaisesRegex(ValueError,
                r"Identity coefficient must be non-negative, not -0\.1"):
            HaarMomentCoeffs(-0.1, 0.7, 2)
        with self.assertRaisesRegex(ValueError,
                r"Coefficients must satisfy alpha\*d\*\*2 \+ beta\*d = 1, not 1\.166"):
            HaarMomentCoeffs(1 / 6, 1 / 4, 2)
        with self.assertRaisesRegex(TypeError,
                r"Dimension must be an integer of at least 2, not 1"):
            HaarMomentCoeffs(1, 0, 1)
        coeffs = HaarMomentCoeffs(1 / 6, 1 / 6, 2)
        self.assertEqual(coeffs.d, 2)


class KrausNormFixedTestCase(unittest.TestCase):
    def test_unitary_on_pure_state(self):
        self.assertAlmostEqual(kraus_norm_fixed(1, DensityMatrix.basis("0")), 2 / 3)

    def test_maximally_mixed(self):
        rho = DensityMatrix.maximally_mixed(1)
        self.assertAlmostEqual(kraus_norm_fixed(0.5, rho), 0, delta=1e-15)

    def test_wrong_purity(self):
        with self.assertRaisesRegex(ValueError,
                r"Purity must be in \(0, 1\], not 0"):
            kraus_norm_fixed(0, DensityMatrix.basis("0"))
        with self.assertRaisesRegex(TypeError,
                r"Purity must be a real number, not True"):
            kraus_norm_fixed(True, DensityMatrix.basis("0"))

    def test_rounded_purity(self):
        rho = DensityMatrix.basis("0")
        self.assertEqual(kraus_norm_fixed(1 + 1e-13, rho), kraus_norm_fixed(1, rho))

    def test_increasing_in_purity(self):
        rho = DensityMatrix.basis("00")
        values = [kraus_norm_fixed(nu, rho) for nu in np.linspace(0.25, 1, 16)]
        self.assertTrue(all(a < b for a, b in zip(values, values[1:])))


class KrausNormSnapshotsTestCase(unittest.TestCase):
    def test_fixed_unitary(self):
        ensemble = FixedChannelEnsemble(KrausChannel.unitary(HADAMARD))
        estimate = kraus_norm_snapshots(ensemble, DensityMatrix.basis("0"), 5,
                                        np.random.default_rng(0))
        self.assertAlmostEqual(estimate.delta_sq, 2 / 3, delta=1e-12)
        self.assertAlmostEqual(estimate.nu_bar, 1, delta=1e-12)
        self.assertAlmostEqual(estimate.n_noise, 1, delta=1e-12)
        self.assertAlmostEqual(estimate.std_err, 0, delta=1e-12)
        self.assertEqual(estimate.trials, 5)

    def test_noise_lowers_fixed_norm(self):
        rho = DensityMatrix.basis("00")
        estimate = kraus_norm_snapshots(AnsatzEnsemble(build_hea(2, 2, kappa=0.5)), rho, 20,
                                        np.random.default_rng(1))
        self.assertLess(estimate.nu_bar, 1)
        self.assertLess(estimate.delta_sq, kraus_norm_fixed(1, rho))
        # Convex in the purity.
        self.assertGreaterEqual(estimate.delta_sq,
                                kraus_norm_fixed(estimate.nu_bar, rho) - 1e-12)
        self.assertGreaterEqual(estimate.n_noise, estimate.nu_bar ** 2 - 1e-12)

    def test_ideal_ansatz(self):
        rho = DensityMatrix.basis("000")
        estimate = kraus_norm_snapshots(AnsatzEnsemble(build_hea(3, 3)), rho, 10,
                                        np.random.default_rng(2))
        self.assertAlmostEqual(estimate.delta_sq, kraus_norm_fixed(1, rho), delta=1e-10)

    def test_threads(self):
        ensemble = AnsatzEnsemble(build_hea(2, 2, kappa=0.8))
        rho = DensityMatrix.basis("00")
        serial   = kraus_norm_snapshots(ensemble, rho, 12, np.random.default_rng(3))
        threaded = kraus_norm_snapshots(ensemble, rho, 12, np.random.default_rng(3), threads=4)
        self.assertEqual(serial.delta_sq, threaded.delta_sq)
        self.assertEqual(serial.nu_bar, threaded.nu_bar)

    def test_wrong_trials(self):
        ensemble = HaarEnsemble(2)
        with self.assertRaisesRegex(ValueError,
                r"Trial count must be at least 2, not 1"):
            kraus_norm_snapshots(ensemble, DensityMatrix.basis("0"), 1, np.random.default_rng(0))
        with self.assertRaisesRegex(TypeError,
                r"Trial count must be an integer, not 2\.0"):
            kraus_norm_snapshots(ensemble, DensityMatrix.basis("0"), 2.0,
                                 np.random.default_rng(0))


class EnsembleTestCase(unittest.TestCase):
    def test_fixed(self):
        channel = KrausChannel.unitary(HADAMARD)
        ensemble = FixedChannelEnsemble(channel)
        self.assertEqual(ensemble.dim, 2)
        self.assertIs(ensemble.channel, channel)
        output = ensemble.sample_output(DensityMatrix.basis("0"), np.random.default_rng(0))
        assert_allclose(output.matrix, np.full((2, 2), 0.5), atol=1e-15)

    def test_fixed_wrong_channel(self):
        with self.assertRaisesRegex(TypeError,
                r"Channel must be an instance of KrausChannel, not 'foo'"):
            FixedChannelEnsemble("foo")
        with self.assertRaisesRegex(ValueError,
                r"Channel must be square, not 2x4"):
            FixedChannelEnsemble(KrausChannel([np.eye(4)[:2], np.eye(4)[2:]]))

    def test_wrong_input(self):
        ensemble = HaarEnsemble(4)
        with self.assertRaisesRegex(ValueError,
                r"State dimension 2 does not match ensemble dimension 4"):
            ensemble.sample_output(DensityMatrix.basis("0"), np.random.default_rng(0))

    def test_ansatz(self):
        ansatz = build_hea(2, 1)
        ensemble = AnsatzEnsemble(ansatz)
        self.assertIs(ensemble.ansatz, ansatz)
        self.assertEqual(ensemble.init.mode, ParamInit.Mode.FULL)
        output = ensemble.sample_output(DensityMatrix.basis("00"), np.random.default_rng(0))
        self.assertAlmostEqual(purity(output), 1, delta=1e-10)

    def test_ansatz_wrong_init(self):
        with self.assertRaisesRegex(TypeError,
                r"Initialization must be an instance of ParamInit, not 'full'"):
            AnsatzEnsemble(build_hea(2, 1), "full")

    def test_right_ensemble_before_first_gate(self):
        rho = random_density_matrix(4, np.random.default_rng(2))
        ensemble = RightEnsemble(build_hea(2, 2, kappa=0.5), ParamInit(), 0)
        output = ensemble.sample_output(rho, np.random.default_rng(3))
        assert_allclose(output.matrix, rho.matrix, atol=1e-15)

    def test_right_ensemble_wrong_k(self):
        with self.assertRaisesRegex(ValueError,
                r"Parameter index must be in range\(0, 4\), not 4"):
            RightEnsemble(build_hea(2, 1), ParamInit(), 4)


class KrausNormEnsembleTestCase(unittest.TestCase):
    def test_fixed_unitary(self):
        ensemble = FixedChannelEnsemble(KrausChannel.unitary(HADAMARD))
        estimate = kraus_norm_ensemble(ensemble, DensityMatrix.basis("0"), 10,
                                       np.random.default_rng(0))
        self.assertAlmostEqual(estimate.delta_sq, 2 / 3, delta=1e-12)
        self.assertAlmostEqual(estimate.nu_bar, 1, delta=1e-12)
        self.assertAlmostEqual(estimate.n_noise, 1, delta=1e-12)
        self.assertAlmostEqual(estimate.std_err, 0, delta=1e-12)
        self.assertAlmostEqual(estimate.norm, math.sqrt(2 / 3), delta=1e-12)
        self.assertEqual(estimate.trials, 10)
        self.assertEqual(estimate.d, 2)
        self.assertAlmostEqual(estimate.alpha, 1 / 6)
        self.assertAlmostEqual(estimate.beta, 1 / 6)

    def test_right_ensemble_before_first_gate(self):
        rho = random_density_matrix(4, np.random.default_rng(4))
        ensemble = RightEnsemble(build_hea(2, 1), ParamInit(), 0)
        estimate = kraus_norm_ensemble(ensemble, rho, 4, np.random.default_rng(5))
        self.assertAlmostEqual(estimate.delta_sq, kraus_norm_fixed(purity(rho), rho),
                               delta=1e-12)

    def test_haar_is_zero(self):
        ensemble = HaarEnsemble(2)
        estimate = kraus_norm_ensemble(ensemble, DensityMatrix.basis("0"), 2000,
                                       np.random.default_rng(6))
        self.assertLess(abs(estimate.delta_sq), 5 * estimate.std_err)
        self.assertLess(estimate.std_err, 0.02)

    def test_single_pair(self):
        estimate = kraus_norm_ensemble(HaarEnsemble(2), DensityMatrix.basis("0"), 3,
                                       np.random.default_rng(7))
        self.assertTrue(math.isnan(estimate.std_err))

    def test_negative_estimate(self):
        estimate = ExpressibilityEstimate(-0.01, 1, 0.3, 10, 0.02,
                                          haar_moment_coeffs(DensityMatrix.basis("0")))
        self.assertEqual(estimate.norm, 0.0)

    def test_threads(self):
        ensemble = AnsatzEnsemble(build_hea(2, 2, kappa=0.8))
        rho = DensityMatrix.basis("00")
        serial   = kraus_norm_ensemble(ensemble, rho, 20, np.random.default_rng(8))
        threaded = kraus_norm_ensemble(ensemble, rho, 20, np.random.default_rng(8), threads=3)
        self.assertEqual(serial.delta_sq, threaded.delta_sq)
        self.assertEqual(serial.std_err, threaded.std_err)

    def test_noise_reduces_purity(self):
        rho = DensityMatrix.basis("00")
        noisy = kraus_norm_ensemble(AnsatzEnsemble(build_hea(2, 2, kappa=0.5)), rho, 20,
                                    np.random.default_rng(9))
        ideal = kraus_norm_ensemble(AnsatzEnsemble(build_hea(2, 2, kappa=1.0)), rho, 20,
                                    np.random.default_rng(9))
        self.assertAlmostEqual(ideal.nu_bar, 1, delta=1e-10)
        self.assertLess(noisy.nu_bar, 1)

    def test_wrong_trials(self):
        ensemble = HaarEnsemble(2)
        with self.assertRaisesRegex(ValueError,
                r"Trial count must be at least 2, not 1"):
            kraus_norm_ensemble(ensemble, DensityMatrix.basis("0"), 1, np.random.default_rng(0))
        with self.assertRaisesRegex(TypeError,
                r"Trial count must be an integer, not 2\.0"):
            kraus_norm_ensemble(ensemble, DensityMatrix.basis("0"), 2.0, np.random.default_rng(0))

    def test_wrong_ensemble(self):
        with self.assertRaisesRegex(TypeError,
                r"Ensemble must be an instance of ChannelEnsemble, not 'foo'"):
            kraus_norm_ensemble("foo", DensityMatrix.basis("0"), 2, np.random.default_rng(0))


class KrausNormDirectTestCase(unittest.TestCase):
    def test_fixed_unitary(self):
        ensemble = FixedChannelEnsemble(KrausChannel.unitary(HADAMARD))
        norm = kraus_norm_direct(ensemble, DensityMatrix.basis("0"), 3, np.random.default_rng(0))
        self.assertAlmostEqual(norm, math.sqrt(2 / 3), delta=1e-12)

    def test_matches_ensemble_estimate(self):
        ensemble = FixedChannelEnsemble(KrausChannel.unitary(HADAMARD).tensor(
            KrausChannel.identity(2)))
        rho = random_density_matrix(4, np.random.default_rng(10))
        direct   = kraus_norm_direct(ensemble, rho, 2, np.random.default_rng(11))
        estimate = kraus_norm_ensemble(ensemble, rho, 2, np.random.default_rng(11))
        self.assertAlmostEqual(direct ** 2, estimate.delta_sq, delta=1e-10)

    def test_too_many_qubits(self):
        with self.assertRaisesRegex(ValueError,
                r"Direct expressibility norm is limited to 2 qubits, not 3"):
            kraus_norm_direct(HaarEnsemble(8), DensityMatrix.basis("000"), 2,
                              np.random.default_rng(0), max_qubits=2)

    def test_wrong_trials(self):
        with self.assertRaisesRegex(TypeError,
                r"Trial count must be a positive integer, not 0"):
            kraus_norm_direct(HaarEnsemble(2), DensityMatrix.basis("0"), 0,
                              np.random.default_rng(0))
