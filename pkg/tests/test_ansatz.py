from concurrent.futures import ThreadPoolExecutor
import unittest
import numpy as np
import scipy.stats
from numpy.testing import assert_allclose

from kraus_vqa.qcore import (PAULI_I, PAULI_Y, PAULI_Z, CNOT, DensityMatrix, Observable,
                             embed_one_qubit, embed_two_qubit, random_density_matrix)
from kraus_vqa.adversary import PerturbationParams, WeakNoiseSpec
from kraus_vqa.ansatz import *


def _hea_unitary(n, L, theta):
    u = np.eye(2 ** n, dtype=complex)
    for layer in range(L):
        base = 2 * n * layer
        for q in range(n):
            u = embed_one_qubit(rotation("rot_y", theta[base + q]), n, q) @ u
        for q in range(n):
            u = embed_one_qubit(rotation("rot_z", theta[base + n + q]), n, q) @ u
        for q in range(n - 1):
            u = embed_two_qubit(CNOT, n, q, q + 1) @ u
    return u


class RotationTestCase(unittest.TestCase):
    def test_values(self):
        assert_allclose(rotation("rot_y", 0), PAULI_I)
        assert_allclose(rotation("rot_z", np.pi / 2), -1j * PAULI_Z, atol=1e-15)
        theta = 0.3
        assert_allclose(rotation(GateSpec.Kind.ROT_Y, theta),
                        np.cos(theta) * PAULI_I - 1j * np.sin(theta) * PAULI_Y)

    def test_unitary(self):
        u = rotation("rot_y", 1.234)
        assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-15)

    def test_wrong_kind(self):
        with self.assertRaisesRegex(ValueError,
                r"Gate kind must be a rotation, not 'noisy_cnot'"):
            rotation("noisy_cnot", 0.5)


class GateSpecTestCase(unittest.TestCase):
    def test_rotation(self):
        gate = GateSpec("rot_y", (2,), param_index=5)
        self.assertEqual(gate.kind, GateSpec.Kind.ROT_Y)
        self.assertEqual(gate.qubits, (2,))
        self.assertEqual(gate.param_index, 5)
        self.assertIsNone(gate.noise)
        assert_allclose(gate.generator, PAULI_Y)
        self.assertEqual(repr(gate), "GateSpec('rot_y', (2,), param_index=5)")

    def test_entangler(self):
        gate = GateSpec("noisy_cnot", (0, 1), noise=PerturbationParams.bell())
        self.assertIsNone(gate.generator)
        for op in gate.channel().kraus_ops:
            assert_allclose(op, CNOT / 2, atol=1e-15)

    def test_weak_entangler(self):
        gate = GateSpec("weak_noisy_cnot", (0, 1), noise=WeakNoiseSpec("bit-flip", 0.1))
        self.assertEqual(gate.channel().dim_in, 4)

    def test_rotation_channel(self):
        with self.assertRaisesRegex(TypeError,
                r"Rotation gate GateSpec\('rot_z', \(0,\), param_index=0\) is not described by "
                r"a fixed channel"):
            GateSpec("rot_z", (0,), param_index=0).channel()

    def test_wrong_qubits(self):
        with self.assertRaisesRegex(TypeError,
                r"Qubit index must be a non-negative integer, not -1"):
            GateSpec("rot_y", (-1,), param_index=0)
        with self.assertRaisesRegex(ValueError,
                r"Qubit indices must be distinct, not \(1, 1\)"):
            GateSpec("noisy_cnot", (1, 1), noise=PerturbationParams.bell())
        with self.assertRaisesRegex(ValueError,
                r"Rotation gate must act on exactly one qubit, not \(0, 1\)"):
            GateSpec("rot_y", (0, 1), param_index=0)
        with self.assertRaisesRegex(ValueError,
                r"Entangling gate must act on exactly two qubits, not \(0,\)"):
            GateSpec("noisy_cnot", (0,), noise=PerturbationParams.bell())

    def test_wrong_param_index(self):
        with self.assertRaisesRegex(TypeError,
                r"Rotation gate must carry a non-negative integer parameter index, not None"):
            GateSpec("rot_y", (0,))
        with self.assertRaisesRegex(ValueError,
                r"Entangling gate cannot carry a parameter index, not 0"):
            GateSpec("noisy_cnot", (0, 1), param_index=0, noise=PerturbationParams.bell())

    def test_wrong_noise(self):
        with self.assertRaisesRegex(ValueError,
                r"Rotation gate cannot carry noise"):
            GateSpec("rot_y", (0,), param_index=0, noise=PerturbationParams.bell())
        with self.assertRaisesRegex(TypeError,
                r"Noise of a noisy CNOT must be an instance of PerturbationParams, not None"):
            GateSpec("noisy_cnot", (0, 1))
        with self.assertRaisesRegex(TypeError,
                r"Noise of a weak noisy CNOT must be an instance of WeakNoiseSpec, not None"):
            GateSpec("weak_noisy_cnot", (0, 1))

    def test_wrong_kind(self):
        with self.assertRaises(ValueError):
            GateSpec("rot_x", (0,), param_index=0)


class PQChAnsatzTestCase(unittest.TestCase):
    def test_simple(self):
        ansatz = PQChAnsatz(2, [[GateSpec("rot_y", (0,), param_index=1),
                                 GateSpec("rot_z", (1,), param_index=0)]])
        self.assertEqual(ansatz.n, 2)
        self.assertEqual(ansatz.dim, 4)
        self.assertEqual(ansatz.param_count, 2)
        self.assertEqual(len(ansatz.layers), 1)
        self.assertEqual(ansatz.param_gate(0).qubits, (1,))
        self.assertEqual(ansatz.param_gate(1).qubits, (0,))
        self.assertEqual(repr(ansatz), "PQChAnsatz(n=2, layers=1, param_count=2)")

    def test_wrong_n(self):
        with self.assertRaisesRegex(TypeError,
                r"Qubit count must be a positive integer, not 0"):
            PQChAnsatz(0, [])

    def test_wrong_gate(self):
        with self.assertRaisesRegex(TypeError,
                r"Gate must be an instance of GateSpec, not 'foo'"):
            PQChAnsatz(2, [["foo"]])

    def test_outside_register(self):
        with self.assertRaisesRegex(ValueError,
                r"acts outside of a 2-qubit register"):
            PQChAnsatz(2, [[GateSpec("rot_y", (2,), param_index=0)]])

    def test_wrong_indices(self):
        with self.assertRaisesRegex(ValueError,
                r"Parameter indices must cover range\(0, 2\) exactly once, not \[0, 2\]"):
            PQChAnsatz(2, [[GateSpec("rot_y", (0,), param_index=0),
                            GateSpec("rot_y", (1,), param_index=2)]])
        with self.assertRaisesRegex(ValueError,
                r"Parameter indices must cover range\(0, 2\) exactly once, not \[0, 0\]"):
            PQChAnsatz(2, [[GateSpec("rot_y", (0,), param_index=0),
                            GateSpec("rot_y", (1,), param_index=0)]])

    def test_concurrent_forward(self):
        rng    = np.random.default_rng(14)
        thetas = [sample_params(build_hea(3, 2, kappa=0.7), ParamInit(), rng) for _ in range(8)]
        rho0   = DensityMatrix.basis("000")
        serial = [forward(build_hea(3, 2, kappa=0.7), theta, rho0).matrix for theta in thetas]
        shared = build_hea(3, 2, kappa=0.7)
        with ThreadPoolExecutor(4) as pool:
            threaded = list(pool.map(lambda theta: forward(shared, theta, rho0).matrix, thetas))
        for expected, actual in zip(serial, threaded):
            assert_allclose(actual, expected, atol=1e-14)


class BuildHeaTestCase(unittest.TestCase):
    def test_layout(self):
        ansatz = build_hea(3, 2, kappa=0.5)
        self.assertEqual(ansatz.param_count, 12)
        self.assertEqual(len(ansatz.layers), 2)
        layer = ansatz.layers[1]
        self.assertEqual(len(layer), 3 + 3 + 2)
        self.assertEqual([gate.param_index for gate in layer[:6]], list(range(6, 12)))
        self.assertEqual([gate.kind for gate in layer[:6]],
                         [GateSpec.Kind.ROT_Y] * 3 + [GateSpec.Kind.ROT_Z] * 3)
        self.assertEqual([gate.qubits for gate in layer[6:]], [(0, 1), (1, 2)])
        for gate in layer[6:]:
            self.assertEqual(gate.kind, GateSpec.Kind.NOISY_CNOT)
            assert_allclose(gate.noise.amplitudes,
                            [np.sqrt(0.375), np.sqrt(0.125), np.sqrt(0.125), np.sqrt(0.375)])

    def test_weak_noise(self):
        spec = WeakNoiseSpec("depolarizing", 0.05)
        ansatz = build_hea(2, 1, weak_noise=spec)
        entangler = ansatz.layers[0][-1]
        self.assertEqual(entangler.kind, GateSpec.Kind.WEAK_NOISY_CNOT)
        self.assertEqual(entangler.noise, spec)

    def test_weak_noise_with_kappa(self):
        with self.assertRaisesRegex(ValueError,
                r"Weak-adversary noise cannot be combined with a perturbed shared pair, "
                r"not kappa = 0\.5"):
            build_hea(2, 1, 0.5, weak_noise=WeakNoiseSpec("depolarizing", 0.05))

    def test_wrong_arguments(self):
        with self.assertRaisesRegex(ValueError,
                r"Qubit count must be at least 2, not 1"):
            build_hea(1, 1)
        with self.assertRaisesRegex(ValueError,
                r"Layer count must be at least 1, not 0"):
            build_hea(2, 0)
        with self.assertRaisesRegex(TypeError,
                r"Qubit count must be an integer, not 2\.0"):
            build_hea(2.0, 1)
        with self.assertRaisesRegex(TypeError,
                r"Layer count must be an integer, not '1'"):
            build_hea(2, "1")
        with self.assertRaises(ValueError):
            build_hea(2, 1, topology="ring")
        with self.assertRaisesRegex(ValueError,
                r"Concurrence must be in \[0, 1\], not 1\.5"):
            build_hea(2, 1, 1.5)


class ForwardTestCase(unittest.TestCase):
    def test_ideal_matches_statevector(self):
        rng = np.random.default_rng(5)
        n, L = 3, 2
        ansatz = build_hea(n, L)
        theta  = sample_params(ansatz, ParamInit(), rng)
        rho0   = random_density_matrix(2 ** n, rng)
        u = _hea_unitary(n, L, theta)
        assert_allclose(forward(ansatz, theta, rho0).matrix, u @ rho0.matrix @ u.conj().T,
                        atol=1e-12)

    def test_periodicity(self):
        rng = np.random.default_rng(6)
        ansatz = build_hea(2, 2, kappa=0.7)
        theta  = sample_params(ansatz, ParamInit(), rng)
        rho0   = DensityMatrix.basis("00")
        output = forward(ansatz, theta, rho0).matrix
        for k in (0, 3, 7):
            shifted = theta.copy()
            shifted[k] += np.pi
            assert_allclose(forward(ansatz, shifted, rho0).matrix, output, atol=1e-12)

    def test_trace_preserving(self):
        rng = np.random.default_rng(7)
        ansatz = build_hea(3, 3, kappa=0.2)
        theta  = sample_params(ansatz, ParamInit(), rng)
        output = forward(ansatz, theta, DensityMatrix.basis("000"))
        self.assertAlmostEqual(np.trace(output.matrix).real, 1, delta=1e-10)

    def test_wrong_theta(self):
        with self.assertRaisesRegex(ValueError,
                r"Parameter vector must have length 4, not shape \(3,\)"):
            forward(build_hea(2, 1), np.zeros(3), DensityMatrix.basis("00"))

    def test_wrong_state(self):
        with self.assertRaisesRegex(ValueError,
                r"State dimension 8 does not match the 2-qubit ansatz"):
            forward(build_hea(2, 1), np.zeros(4), DensityMatrix.basis("000"))
        with self.assertRaisesRegex(TypeError,
                r"State must be an instance of DensityMatrix, not 'foo'"):
            forward(build_hea(2, 1), np.zeros(4), "foo")

    def test_wrong_ansatz(self):
        with self.assertRaisesRegex(TypeError,
                r"Ansatz must be an instance of PQChAnsatz, not 'foo'"):
            forward("foo", np.zeros(4), DensityMatrix.basis("00"))


class ParamInitTestCase(unittest.TestCase):
    def test_full(self):
        init = ParamInit()
        self.assertEqual(init.mode, ParamInit.Mode.FULL)
        self.assertEqual(init.r, 1.0)
        self.assertEqual(init.seed, 0)
        self.assertEqual(repr(init), "ParamInit('full', r=1.0, seed=0)")

    def test_from_width(self):
        self.assertEqual(ParamInit.from_width(1).mode, ParamInit.Mode.FULL)
        init = ParamInit.from_width(0.1, seed=3)
        self.assertEqual(init.mode, ParamInit.Mode.RESTRICTED)
        self.assertEqual(init.r, 0.1)
        self.assertEqual(init.seed, 3)

    def test_base_points(self):
        init = ParamInit("restricted", 0.5, seed=4)
        assert_allclose(init.base_points(6), init.base_points(6))
        self.assertFalse(np.allclose(init.base_points(6),
                                     ParamInit("restricted", 0.5, seed=5).base_points(6)))

    def test_wrong_r(self):
        with self.assertRaisesRegex(TypeError,
                r"Window fraction must be a real number, not 'x'"):
            ParamInit("restricted", "x")
        with self.assertRaisesRegex(ValueError,
                r"Window fraction must be in \(0, 1\], not 0"):
            ParamInit("restricted", 0)
        with self.assertRaisesRegex(ValueError,
                r"Full initialization requires r = 1 and restricted initialization r < 1, "
                r"not 'full' with r = 0\.5"):
            ParamInit("full", 0.5)
        with self.assertRaisesRegex(ValueError,
                r"not 'restricted' with r = 1"):
            ParamInit("restricted", 1)

    def test_wrong_seed(self):
        with self.assertRaisesRegex(TypeError,
                r"Seed must be a non-negative integer, not -1"):
            ParamInit(seed=-1)


class SampleParamsTestCase(unittest.TestCase):
    def test_full(self):
        ansatz = build_hea(2, 3)
        theta = sample_params(ansatz, ParamInit(), np.random.default_rng(8))
        self.assertEqual(theta.shape, (12,))
        self.assertTrue(np.all((theta >= 0) & (theta < 2 * np.pi)))

    def test_full_is_uniform(self):
        ansatz = build_hea(2, 1)
        rng    = np.random.default_rng(13)
        draws  = np.concatenate([sample_params(ansatz, ParamInit(), rng) for _ in range(25_000)])
        self.assertEqual(draws.size, 100_000)
        self.assertGreater(scipy.stats.kstest(draws, "uniform", args=(0, 2 * np.pi)).pvalue, 0.01)

    def test_restricted(self):
        ansatz = build_hea(2, 3)
        init   = ParamInit("restricted", 0.1, seed=9)
        base   = init.base_points(ansatz.param_count)
        rng    = np.random.default_rng(10)
        for _ in range(20):
            theta  = sample_params(ansatz, init, rng)
            offset = np.mod(theta - base, 2 * np.pi)
            self.assertTrue(np.all(offset < 2 * np.pi * 0.1 + 1e-12))

    def test_deterministic(self):
        ansatz = build_hea(2, 1)
        assert_allclose(sample_params(ansatz, ParamInit(), np.random.default_rng(11)),
                        sample_params(ansatz, ParamInit(), np.random.default_rng(11)))

    def test_wrong_init(self):
        with self.assertRaisesRegex(TypeError,
                r"Initialization must be an instance of ParamInit, not 'full'"):
            sample_params(build_hea(2, 1), "full", np.random.default_rng(0))


class SplitTestCase(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(12)
        self.ansatz = build_hea(3, 2, kappa=0.6)
        self.theta  = sample_params(self.ansatz, ParamInit(), rng)
        self.rho0   = random_density_matrix(8, rng)

    def test_structure(self):
        split = split_at(self.ansatz, self.theta, 4)
        self.assertIs(split.ansatz, self.ansatz)
        self.assertEqual(split.k, 4)
        self.assertEqual(split.theta_k, self.theta[4])
        self.assertEqual(split.gate.kind, GateSpec.Kind.ROT_Z)
        self.assertEqual(split.gate.qubits, (1,))
        self.assertEqual(len(split.right_gates), 4)
        self.assertEqual(len(split.right_gates) + 1 + len(split.left_gates),
                         len(list(self.ansatz.gates())))
        assert_allclose(split.generator, embed_one_qubit(PAULI_Z, 3, 1))

    def test_composition(self):
        for k in (0, 5, 11):
            split = split_at(self.ansatz, self.theta, k)
            rho = split.apply_left(split.apply_gate(split.rho_right(self.rho0)))
            assert_allclose(rho.matrix, forward(self.ansatz, self.theta, self.rho0).matrix,
                            atol=1e-12)

    def test_apply_gate_angle(self):
        split = split_at(self.ansatz, self.theta, 0)
        rho = DensityMatrix.basis("000")
        assert_allclose(split.apply_gate(rho, 0.0).matrix, rho.matrix, atol=1e-15)

    def test_adjoint_through_left(self):
        obs = Observable.pauli("ZZI")
        split = split_at(self.ansatz, self.theta, 2)
        obs_left, norm = adjoint_through_left(split, obs)
        middle = split.apply_gate(split.rho_right(self.rho0))
        self.assertAlmostEqual(obs_left.expectation(middle),
                               obs.expectation(split.apply_left(middle)), delta=1e-12)
        self.assertAlmostEqual(norm, obs_left.norm(), delta=1e-12)

    def test_wrong_k(self):
        with self.assertRaisesRegex(TypeError,
                r"Parameter index must be an integer, not 1\.0"):
            split_at(self.ansatz, self.theta, 1.0)
        with self.assertRaisesRegex(ValueError,
                r"Parameter index must be in range\(0, 12\), not 12"):
            split_at(self.ansatz, self.theta, 12)

    def test_wrong_observable(self):
        split = split_at(self.ansatz, self.theta, 0)
        with self.assertRaisesRegex(ValueError,
                r"Observable dimension 4 does not match the 3-qubit ansatz"):
            adjoint_through_left(split, Observable.pauli("ZZ"))
        with self.assertRaisesRegex(TypeError,
                r"Split must be an instance of AnsatzSplit, not 'foo'"):
            adjoint_through_left("foo", Observable.pauli("ZZZ"))
