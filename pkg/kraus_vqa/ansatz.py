"""Layered ansatz of parameterized rotations and noisy entangling channels.

A rotation gate with generator ``V`` (a Pauli, so ``V² = I``) and angle ``θ`` applies
``U(θ) = exp(-iθV) = cos θ I - i sin θ V``. With this convention every single-parameter slice of
the cost is ``A sin 2θ + B cos 2θ + const`` and the parameter-shift rule uses shifts of ``±π/4``.
"""

import enum
import numbers

import numpy as np

from .qcore import PAULI_I, PAULI_Y, PAULI_Z, DensityMatrix, Observable, apply_local
from .qcore import embed_one_qubit, _check_rng
from .adversary import (PerturbationParams, WeakNoiseSpec, noisy_cnot_channel,
                        weak_adversary_channel, family_from_concurrence)


__all__ = [
    "Topology", "GateSpec", "PQChAnsatz", "ParamInit", "AnsatzSplit",
    "rotation", "build_hea", "sample_params", "forward", "split_at", "adjoint_through_left",
]


class Topology(enum.Enum):
    """Placement of the entangling gates within a layer.

    ``LADDER`` is the open chain ``0 -> 1 -> ... -> n-1``.
    """
    LADDER = "ladder"


class GateSpec:
    """Description of one gate of an ansatz.

    Parameters
    ----------
    kind : :class:`GateSpec.Kind`
        Gate kind.
    qubits : iterable of int
        One qubit for rotations; control and target for entangling gates.
    param_index : int or None
        Index into the parameter vector. Required for rotations, forbidden otherwise.
    noise : :class:`PerturbationParams` or :class:`WeakNoiseSpec` or None
        Shared-pair perturbation of a ``noisy_cnot`` gate, or local noise of a
        ``weak_noisy_cnot`` gate.
    """
    class Kind(enum.Enum):
        ROT_Y           = "rot_y"
        ROT_Z           = "rot_z"
        NOISY_CNOT      = "noisy_cnot"
        WEAK_NOISY_CNOT = "weak_noisy_cnot"

        @property
        def is_rotation(self):
            return self in (GateSpec.Kind.ROT_Y, GateSpec.Kind.ROT_Z)

    def __init__(self, kind, qubits, *, param_index=None, noise=None):
        kind = GateSpec.Kind(kind)
        qubits = tuple(qubits)
        for qubit in qubits:
            if not isinstance(qubit, int) or qubit < 0:
                raise TypeError(f"Qubit index must be a non-negative integer, not {qubit!r}")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"Qubit indices must be distinct, not {qubits!r}")

        if kind.is_rotation:
            if len(qubits) != 1:
                raise ValueError(f"Rotation gate must act on exactly one qubit, not {qubits!r}")
            if not isinstance(param_index, int) or param_index < 0:
                raise TypeError(f"Rotation gate must carry a non-negative integer parameter "
                                f"index, not {param_index!r}")
            if noise is not None:
                raise ValueError(f"Rotation gate cannot carry noise, not {noise!r}")
        else:
            if len(qubits) != 2:
                raise ValueError(f"Entangling gate must act on exactly two qubits, "
                                 f"not {qubits!r}")
            if param_index is not None:
                raise ValueError(f"Entangling gate cannot carry a parameter index, "
                                 f"not {param_index!r}")
            if kind == GateSpec.Kind.NOISY_CNOT and not isinstance(noise, PerturbationParams):
                raise TypeError(f"Noise of a noisy CNOT must be an instance of "
                                f"PerturbationParams, not {noise!r}")
            if kind == GateSpec.Kind.WEAK_NOISY_CNOT and not isinstance(noise, WeakNoiseSpec):
                raise TypeError(f"Noise of a weak noisy CNOT must be an instance of "
                                f"WeakNoiseSpec, not {noise!r}")

        self._kind        = kind
        self._qubits      = qubits
        self._param_index = param_index
        self._noise       = noise

    @property
    def kind(self):
        return self._kind

    @property
    def qubits(self):
        return self._qubits

    @property
    def param_index(self):
        return self._param_index

    @property
    def noise(self):
        return self._noise

    @property
    def generator(self):
        """Single-qubit generator of a rotation, ``None`` for entangling gates."""
        return _GENERATORS.get(self._kind)

    def channel(self):
        """Two-qubit Kraus channel of an entangling gate."""
        if self._kind == GateSpec.Kind.NOISY_CNOT:
            return noisy_cnot_channel(self._noise)
        if self._kind == GateSpec.Kind.WEAK_NOISY_CNOT:
            return weak_adversary_channel(self._noise)
        raise TypeError(f"Rotation gate {self!r} is not described by a fixed channel")

    def __repr__(self):
        if self._kind.is_rotation:
            return (f"GateSpec({self._kind.value!r}, {self._qubits!r}, "
                    f"param_index={self._param_index})")
        return f"GateSpec({self._kind.value!r}, {self._qubits!r}, noise={self._noise!r})"


_GENERATORS = {
    GateSpec.Kind.ROT_Y: PAULI_Y,
    GateSpec.Kind.ROT_Z: PAULI_Z,
}


def rotation(kind, theta):
    """Single-qubit rotation matrix ``cos θ I - i sin θ V``."""
    kind = GateSpec.Kind(kind)
    if not kind.is_rotation:
        raise ValueError(f"Gate kind must be a rotation, not {kind.value!r}")
    return np.cos(theta) * PAULI_I - 1j * np.sin(theta) * _GENERATORS[kind]


class PQChAnsatz:
    """Parameterized quantum channel ansatz.

    An ansatz is a sequence of layers, each a sequence of gates, applied in order. Rotations are
    unitary; entangling gates are arbitrary two-qubit Kraus channels.

    Parameters
    ----------
    n : int
        Number of qubits.
    layers : iterable of iterable of :class:`GateSpec`
        Gates, layer by layer.

    Raises
    ------
    :exc:`ValueError`
        If a gate acts outside the register, or the parameter indices are not exactly
        ``range(param_count)``.
    """
    def __init__(self, n, layers):
        if not isinstance(n, int) or n < 1:
            raise TypeError(f"Qubit count must be a positive integer, not {n!r}")
        layers = tuple(tuple(layer) for layer in layers)

        indices = []
        for layer in layers:
            for gate in layer:
                if not isinstance(gate, GateSpec):
                    raise TypeError(f"Gate must be an instance of GateSpec, not {gate!r}")
                if max(gate.qubits) >= n:
                    raise ValueError(f"Gate {gate!r} acts outside of a {n}-qubit register")
                if gate.param_index is not None:
                    indices.append(gate.param_index)
        if sorted(indices) != list(range(len(indices))):
            raise ValueError(f"Parameter indices must cover range(0, {len(indices)}) exactly "
                             f"once, not {sorted(indices)!r}")

        self._n           = n
        self._layers      = layers
        self._gates       = tuple(gate for layer in layers for gate in layer)
        self._positions   = {gate.param_index: position
                             for position, gate in enumerate(self._gates)
                             if gate.param_index is not None}
        self._entanglers  = {}
        for gate in self._gates:
            if gate.param_index is None and (gate.kind, gate.noise) not in self._entanglers:
                self._entanglers[gate.kind, gate.noise] = gate.channel().kraus_ops

    @property
    def n(self):
        return self._n

    @property
    def dim(self):
        return 2 ** self._n

    @property
    def layers(self):
        return self._layers

    @property
    def param_count(self):
        return len(self._positions)

    def gates(self):
        yield from self._gates

    def param_gate(self, k):
        """Rotation gate driven by parameter ``k``."""
        return self._gates[self._positions[k]]

    def _kraus_ops(self, gate, theta):
        if gate.param_index is not None:
            return (rotation(gate.kind, theta[gate.param_index]),)
        return self._entanglers[gate.kind, gate.noise]

    def _evolve(self, gates, matrix, theta):
        for gate in gates:
            matrix = apply_local(self._kraus_ops(gate, theta), matrix, self._n, gate.qubits)
        return matrix

    def _pull_back(self, gates, matrix, theta):
        for gate in reversed(gates):
            matrix = apply_local(self._kraus_ops(gate, theta), matrix, self._n, gate.qubits,
                                 adjoint=True)
        return matrix

    def __repr__(self):
        return (f"PQChAnsatz(n={self._n}, layers={len(self._layers)}, "
                f"param_count={self.param_count})")


class ParamInit:
    """Distribution of the initial parameters.

    In ``full`` mode every parameter is uniform on ``[0, 2π)``. In ``restricted`` mode parameter
    ``i`` is uniform on ``[b_i, b_i + 2πr)`` modulo ``2π``, where the base points ``b_i`` are drawn
    uniformly once from ``seed`` and shared by every sample.

    Parameters
    ----------
    mode : :class:`ParamInit.Mode`
        Initialization mode.
    r : float
        Width of the sampling window as a fraction of ``2π``; 1 exactly in ``full`` mode.
    seed : int
        Seed of the base points.
    """
    class Mode(enum.Enum):
        FULL       = "full"
        RESTRICTED = "restricted"

    def __init__(self, mode="full", r=1.0, seed=0):
        mode = ParamInit.Mode(mode)
        if not isinstance(r, numbers.Real) or isinstance(r, bool):
            raise TypeError(f"Window fraction must be a real number, not {r!r}")
        if not 0 < r <= 1:
            raise ValueError(f"Window fraction must be in (0, 1], not {r!r}")
        if (mode == ParamInit.Mode.FULL) != (r == 1):
            raise ValueError(f"Full initialization requires r = 1 and restricted initialization "
                             f"r < 1, not {mode.value!r} with r = {r!r}")
        if not isinstance(seed, int) or seed < 0:
            raise TypeError(f"Seed must be a non-negative integer, not {seed!r}")
        self._mode = mode
        self._r    = float(r)
        self._seed = seed

    @classmethod
    def from_width(cls, r, seed=0):
        """Full initialization for ``r = 1``, restricted otherwise."""
        mode = ParamInit.Mode.FULL if r == 1 else ParamInit.Mode.RESTRICTED
        return cls(mode, r, seed)

    @property
    def mode(self):
        return self._mode

    @property
    def r(self):
        return self._r

    @property
    def seed(self):
        return self._seed

    def base_points(self, count):
        return np.random.default_rng([self._seed, 0]).uniform(0, 2 * np.pi, count)

    def __repr__(self):
        return f"ParamInit({self._mode.value!r}, r={self._r!r}, seed={self._seed})"


def _check_ansatz(ansatz):
    if not isinstance(ansatz, PQChAnsatz):
        raise TypeError(f"Ansatz must be an instance of PQChAnsatz, not {ansatz!r}")


def _check_theta(ansatz, theta):
    theta = np.array(theta, dtype=float)
    if theta.shape != (ansatz.param_count,):
        raise ValueError(f"Parameter vector must have length {ansatz.param_count}, "
                         f"not shape {theta.shape!r}")
    theta.setflags(write=False)
    return theta


def _check_state(ansatz, rho):
    if not isinstance(rho, DensityMatrix):
        raise TypeError(f"State must be an instance of DensityMatrix, not {rho!r}")
    if rho.dim != ansatz.dim:
        raise ValueError(f"State dimension {rho.dim} does not match the {ansatz.n}-qubit "
                         f"ansatz")


def build_hea(n, L, kappa=1.0, topology="ladder", *, weak_noise=None):
    """Hardware-efficient ansatz with a noisy CNOT ladder.

    Each of the ``L`` layers applies ``R_y`` on every qubit, then ``R_z`` on every qubit, then
    entangling gates ``i -> i+1`` for ``i = 0 ... n-2``. In layer ``l`` the ``R_y`` on qubit ``q``
    uses parameter ``2nl + q`` and the ``R_z`` parameter ``2nl + n + q``.

    Arguments
    ---------
    n : int
        Number of qubits, at least 2.
    L : int
        Number of layers, at least 1.
    kappa : float
        Concurrence of the shared pair consumed by every entangling gate.
    topology : :class:`Topology`
        Entangler placement.
    weak_noise : :class:`WeakNoiseSpec` or None
        If given, the entanglers are ideal CNOTs with this local noise instead, and ``kappa``
        must be left at 1.
    """
    if not isinstance(n, int) or isinstance(n, bool):
        raise TypeError(f"Qubit count must be an integer, not {n!r}")
    if n < 2:
        raise ValueError(f"Qubit count must be at least 2, not {n!r}")
    if not isinstance(L, int) or isinstance(L, bool):
        raise TypeError(f"Layer count must be an integer, not {L!r}")
    if L < 1:
        raise ValueError(f"Layer count must be at least 1, not {L!r}")
    Topology(topology)
    if weak_noise is None:
        kind, noise = GateSpec.Kind.NOISY_CNOT, family_from_concurrence(kappa)
    else:
        if kappa != 1:
            raise ValueError(f"Weak-adversary noise cannot be combined with a perturbed shared "
                             f"pair, not kappa = {kappa!r}")
        kind, noise = GateSpec.Kind.WEAK_NOISY_CNOT, weak_noise

    layers = []
    for layer_index in range(L):
        base = 2 * n * layer_index
        layer  = [GateSpec("rot_y", (q,), param_index=base + q) for q in range(n)]
        layer += [GateSpec("rot_z", (q,), param_index=base + n + q) for q in range(n)]
        layer += [GateSpec(kind, (q, q + 1), noise=noise) for q in range(n - 1)]
        layers.append(layer)
    return PQChAnsatz(n, layers)


def sample_params(ansatz, init, rng):
    """Draw a parameter vector according to ``init``."""
    _check_ansatz(ansatz)
    if not isinstance(init, ParamInit):
        raise TypeError(f"Initialization must be an instance of ParamInit, not {init!r}")
    _check_rng(rng)
    count = ansatz.param_count
    if init.mode == ParamInit.Mode.FULL:
        return rng.uniform(0, 2 * np.pi, count)
    offsets = rng.uniform(0, 2 * np.pi * init.r, count)
    return np.mod(init.base_points(count) + offsets, 2 * np.pi)


def forward(ansatz, theta, rho0):
    """Apply the whole ansatz to ``rho0``."""
    _check_ansatz(ansatz)
    theta = _check_theta(ansatz, theta)
    _check_state(ansatz, rho0)
    return DensityMatrix(ansatz._evolve(ansatz._gates, rho0.matrix, theta))


class AnsatzSplit:
    """An ansatz cut around the rotation driven by parameter ``k``.

    The ansatz acts as ``left ∘ gate_k ∘ right``: ``right`` holds every gate before the rotation,
    ``left`` every gate after it, both with their parameters bound to ``theta``.

    Parameters
    ----------
    ansatz : :class:`PQChAnsatz`
        Ansatz being split.
    theta : array-like
        Parameter vector.
    k : int
        Index of the parameter of the split gate.
    """
    def __init__(self, ansatz, theta, k):
        _check_ansatz(ansatz)
        self._theta  = _check_theta(ansatz, theta)
        if not isinstance(k, int):
            raise TypeError(f"Parameter index must be an integer, not {k!r}")
        if not 0 <= k < ansatz.param_count:
            raise ValueError(f"Parameter index must be in range(0, {ansatz.param_count}), "
                             f"not {k!r}")

        position = ansatz._positions[k]
        self._ansatz = ansatz
        self._k      = k
        self._gate   = ansatz._gates[position]
        self._right  = ansatz._gates[:position]
        self._left   = ansatz._gates[position + 1:]

        generator = embed_one_qubit(self._gate.generator, ansatz.n, self._gate.qubits[0])
        if not np.allclose(generator @ generator, np.eye(ansatz.dim), rtol=0, atol=1e-12):
            raise ValueError(f"Generator of parameter {k} must square to the identity")
        generator.setflags(write=False)
        self._generator = generator

    @property
    def ansatz(self):
        return self._ansatz

    @property
    def theta(self):
        return self._theta

    @property
    def k(self):
        return self._k

    @property
    def theta_k(self):
        return float(self._theta[self._k])

    @property
    def gate(self):
        return self._gate

    @property
    def generator(self):
        """Generator ``V_k`` embedded in the full register."""
        return self._generator

    @property
    def right_gates(self):
        return self._right

    @property
    def left_gates(self):
        return self._left

    def _right_matrix(self, matrix):
        return self._ansatz._evolve(self._right, matrix, self._theta)

    def _gate_matrix(self, matrix, theta_k):
        u = rotation(self._gate.kind, theta_k)
        return apply_local((u,), matrix, self._ansatz.n, self._gate.qubits)

    def _left_matrix(self, matrix):
        return self._ansatz._evolve(self._left, matrix, self._theta)

    def _left_adjoint_matrix(self, matrix):
        return self._ansatz._pull_back(self._left, matrix, self._theta)

    def rho_right(self, rho0):
        _check_state(self._ansatz, rho0)
        return DensityMatrix(self._right_matrix(rho0.matrix))

    def apply_gate(self, rho, theta=None):
        """Apply the split rotation at angle ``theta``, by default the bound ``theta_k``."""
        _check_state(self._ansatz, rho)
        if theta is None:
            theta = self.theta_k
        return DensityMatrix(self._gate_matrix(rho.matrix, theta))

    def apply_left(self, rho):
        _check_state(self._ansatz, rho)
        return DensityMatrix(self._left_matrix(rho.matrix))


def split_at(ansatz, theta, k):
    return AnsatzSplit(ansatz, theta, k)


def adjoint_through_left(split, obs):
    """Pull ``obs`` back through the left part of ``split``.

    Return value
    ------------
    A tuple ``(obs_left, norm)`` of the Heisenberg-picture observable and its Frobenius norm.
    """
    if not isinstance(split, AnsatzSplit):
        raise TypeError(f"Split must be an instance of AnsatzSplit, not {split!r}")
    if not isinstance(obs, Observable):
        raise TypeError(f"Observable must be an instance of Observable, not {obs!r}")
    if obs.dim != split.ansatz.dim:
        raise ValueError(f"Observable dimension {obs.dim} does not match the "
                         f"{split.ansatz.n}-qubit ansatz")
    matrix = split._left_adjoint_matrix(obs.matrix)
    return Observable(matrix), float(np.linalg.norm(matrix))
