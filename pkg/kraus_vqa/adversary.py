"""Adversarial perturbation of the shared Bell pair and the channels it induces.

A non-local CNOT consumes one Bell pair shared between the control and target devices. An
adversary who replaces that pair by ``c00|00> + c01|01> + c10|10> + c11|11>`` turns the gate into
the four-operator Kraus channel built by :func:`noisy_cnot_channel`. A weaker adversary, who cannot
touch the pair, injects local Pauli noise around an ideal CNOT instead
(:func:`weak_adversary_channel`).
"""

import enum
import numbers

import numpy as np

from .qcore import (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, PROJ_0, PROJ_1, CNOT, DensityMatrix,
                    KrausChannel, tensor, choi_matrix, trace_norm, random_pure_state)


__all__ = [
    "U_FLIP", "PerturbationParams", "DetectabilityBounds", "WeakNoiseSpec",
    "noisy_cnot_channel", "ideal_cnot_channel", "flipped_cnot_channel",
    "concurrence_pure", "concurrence_mixed", "family_from_concurrence",
    "weak_adversary_channel", "detectability_bounds", "discrimination_estimate",
]


NORMALIZATION_ATOL = 1e-12

# Eigenvalues of a density matrix below this fraction of the largest one are treated as zero by
# the concurrence, which keeps the pure-state value exact.
_RANK_CUTOFF = 1e-13

_SIGMA_YY = np.kron(PAULI_Y, PAULI_Y)

U_FLIP = tensor(PROJ_0, PAULI_X) + tensor(PROJ_1, PAULI_I)
U_FLIP.setflags(write=False)


class PerturbationParams:
    """Amplitudes of the two-qubit state shared between the devices.

    The ideal resource is the Bell pair ``(1/√2, 0, 0, 1/√2)``.

    Parameters
    ----------
    c00, c01, c10, c11 : complex
        Amplitudes of ``|00>``, ``|01>``, ``|10>`` and ``|11>``.

    Raises
    ------
    :exc:`TypeError`
        If an amplitude is not a number.
    :exc:`ValueError`
        If ``sum(|c_ij|²)`` deviates from 1 by more than ``1e-12``. Amplitudes are never
        renormalized.
    """
    def __init__(self, c00, c01, c10, c11):
        amplitudes = []
        for name, value in (("c00", c00), ("c01", c01), ("c10", c10), ("c11", c11)):
            if not isinstance(value, numbers.Number) or isinstance(value, bool):
                raise TypeError(f"Amplitude {name} must be a complex number, not {value!r}")
            amplitudes.append(complex(value))

        norm_sq = sum(abs(amplitude) ** 2 for amplitude in amplitudes)
        if abs(norm_sq - 1) > NORMALIZATION_ATOL:
            raise ValueError(f"Amplitudes must satisfy sum(|c_ij|^2) = 1 within "
                             f"{NORMALIZATION_ATOL}, not {norm_sq!r}")

        self._amplitudes = np.array(amplitudes, dtype=complex)
        self._amplitudes.setflags(write=False)

    @classmethod
    def bell(cls):
        return cls(1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2))

    @classmethod
    def from_statevector(cls, statevector):
        statevector = np.asarray(statevector)
        if statevector.shape != (4,):
            raise ValueError(f"Two-qubit state vector must have shape (4,), not "
                             f"{statevector.shape!r}")
        return cls(*statevector)

    @property
    def c00(self):
        return self._amplitudes[0]

    @property
    def c01(self):
        return self._amplitudes[1]

    @property
    def c10(self):
        return self._amplitudes[2]

    @property
    def c11(self):
        return self._amplitudes[3]

    @property
    def amplitudes(self):
        return self._amplitudes

    def density_matrix(self):
        return DensityMatrix.from_statevector(self._amplitudes)

    def __eq__(self, other):
        return (isinstance(other, PerturbationParams) and
                np.array_equal(self._amplitudes, other.amplitudes))

    def __hash__(self):
        return hash(tuple(self._amplitudes))

    def __repr__(self):
        return "PerturbationParams({})".format(", ".join(f"{c:.6g}" for c in self._amplitudes))


class DetectabilityBounds:
    """Interval for the single-shot probability of telling a noisy gate from the ideal one.

    Parameters
    ----------
    lower : float
        Lower bound on the guessing probability.
    upper : float
        Upper bound on the guessing probability.
    choi_distance : float
        Trace distance between the unnormalized Choi matrices the bounds were derived from.

    Raises
    ------
    :exc:`ValueError`
        Unless ``0.5 <= lower <= upper <= 1``.
    """
    def __init__(self, lower, upper, *, choi_distance):
        if not 0.5 <= lower <= upper <= 1:
            raise ValueError(f"Guessing probability bounds must satisfy "
                             f"0.5 <= lower <= upper <= 1, not ({lower!r}, {upper!r})")
        self._lower         = float(lower)
        self._upper         = float(upper)
        self._choi_distance = float(choi_distance)

    @property
    def p_guess_lower(self):
        return self._lower

    @property
    def p_guess_upper(self):
        return self._upper

    @property
    def choi_distance(self):
        return self._choi_distance

    def stealthy(self, epsilon):
        """Whether the adversary meets the stealth constraint ``p_guess <= epsilon``.

        Returns ``None`` when the interval straddles ``epsilon``.
        """
        if not isinstance(epsilon, numbers.Real) or not 0.5 <= epsilon <= 1:
            raise ValueError(f"Stealth threshold must be a real number in [0.5, 1], "
                             f"not {epsilon!r}")
        if self._upper <= epsilon:
            return True
        if self._lower > epsilon:
            return False
        return None

    def __repr__(self):
        return (f"DetectabilityBounds(p_guess_lower={self._lower:.6g}, "
                f"p_guess_upper={self._upper:.6g})")


class WeakNoiseSpec:
    """Local Pauli noise injected by an adversary around an ideal CNOT.

    The depolarizing channel of strength ``p`` maps ``rho`` to ``(1 - p) rho + p I/2``; the flip
    channels apply their Pauli with probability ``p``.

    Parameters
    ----------
    model : :class:`WeakNoiseSpec.Model`
        Noise model applied to the control and target qubits.
    strength : float
        Noise strength in [0, 1].
    placement : :class:`WeakNoiseSpec.Placement`
        Whether the noise acts before the gate, after it, or on both sides.
    """
    class Model(enum.Enum):
        DEPOLARIZING = "depolarizing"
        BIT_FLIP     = "bit-flip"
        PHASE_FLIP   = "phase-flip"

    class Placement(enum.Enum):
        BEFORE = "before"
        AFTER  = "after"
        BOTH   = "both"

    def __init__(self, model, strength, placement="both"):
        if not isinstance(strength, numbers.Real) or isinstance(strength, bool):
            raise TypeError(f"Noise strength must be a real number, not {strength!r}")
        if not 0 <= strength <= 1:
            raise ValueError(f"Noise strength must be in [0, 1], not {strength!r}")
        self._model     = WeakNoiseSpec.Model(model)
        self._strength  = float(strength)
        self._placement = WeakNoiseSpec.Placement(placement)

    @property
    def model(self):
        return self._model

    @property
    def strength(self):
        return self._strength

    @property
    def placement(self):
        return self._placement

    def local_channel(self):
        """Single-qubit Kraus channel of this noise model."""
        p = self._strength
        if self._model == WeakNoiseSpec.Model.DEPOLARIZING:
            ops = [np.sqrt(1 - 3 * p / 4) * PAULI_I]
            ops += [np.sqrt(p / 4) * sigma for sigma in (PAULI_X, PAULI_Y, PAULI_Z)]
        elif self._model == WeakNoiseSpec.Model.BIT_FLIP:
            ops = [np.sqrt(1 - p) * PAULI_I, np.sqrt(p) * PAULI_X]
        else:
            ops = [np.sqrt(1 - p) * PAULI_I, np.sqrt(p) * PAULI_Z]
        return KrausChannel(ops)

    def __eq__(self, other):
        return (isinstance(other, WeakNoiseSpec) and
                (self._model, self._strength, self._placement) ==
                (other.model, other.strength, other.placement))

    def __hash__(self):
        return hash((self._model, self._strength, self._placement))

    def __repr__(self):
        return (f"WeakNoiseSpec({self._model.value!r}, {self._strength!r}, "
                f"{self._placement.value!r})")


def noisy_cnot_channel(p):
    """Channel realized by the non-local CNOT protocol on the shared state ``p``.

    Qubit 0 is the control and qubit 1 the target. The Kraus operator ``E_ab`` is the branch of
    the protocol in which the two intermediate measurements return ``a`` and ``b``.

    Raises
    ------
    :exc:`TypeError`
        If ``p`` is not a :class:`PerturbationParams`.
    """
    if not isinstance(p, PerturbationParams):
        raise TypeError(f"Perturbation must be an instance of PerturbationParams, not {p!r}")
    c00, c01, c10, c11 = p.amplitudes
    s = 1 / np.sqrt(2)
    e00 = s * (tensor(PROJ_0, c00 * PAULI_I + c01 * PAULI_X) +
               tensor(PROJ_1, c10 * PAULI_I + c11 * PAULI_X))
    e01 = s * (tensor(PROJ_0, c00 * PAULI_I - c01 * PAULI_X) -
               tensor(PROJ_1, c10 * PAULI_I - c11 * PAULI_X))
    e10 = s * (tensor(PROJ_0, c11 * PAULI_I + c10 * PAULI_X) +
               tensor(PROJ_1, c01 * PAULI_I + c00 * PAULI_X))
    e11 = s * (tensor(PROJ_0, c11 * PAULI_I - c10 * PAULI_X) -
               tensor(PROJ_1, c01 * PAULI_I - c00 * PAULI_X))
    return KrausChannel([e00, e01, e10, e11])


def ideal_cnot_channel():
    return KrausChannel.unitary(CNOT)


def flipped_cnot_channel():
    """CNOT that fires when the control is ``|0>``."""
    return KrausChannel.unitary(U_FLIP)


def concurrence_pure(c):
    """Concurrence ``2|c00 c11 - c01 c10|`` of a pure two-qubit state."""
    if not isinstance(c, PerturbationParams):
        raise TypeError(f"Perturbation must be an instance of PerturbationParams, not {c!r}")
    return float(2 * abs(c.c00 * c.c11 - c.c01 * c.c10))


def concurrence_mixed(rho):
    """Concurrence of a two-qubit density matrix.

    The square roots of the eigenvalues of ``rho (Y⊗Y) rho* (Y⊗Y)`` are the singular values of
    ``X^T (Y⊗Y) X`` for any factorization ``rho = X X†``; the latter are computed instead, which
    avoids square roots of tiny negative eigenvalues.

    Raises
    ------
    :exc:`ValueError`
        If ``rho`` is not a two-qubit state.
    """
    if not isinstance(rho, DensityMatrix):
        raise TypeError(f"State must be an instance of DensityMatrix, not {rho!r}")
    if rho.dim != 4:
        raise ValueError(f"Concurrence is defined for two-qubit states, not dimension {rho.dim}")

    eigenvalues, eigenvectors = np.linalg.eigh(rho.matrix)
    eigenvalues = np.where(eigenvalues > _RANK_CUTOFF * eigenvalues[-1], eigenvalues, 0.0)
    factor = eigenvectors * np.sqrt(eigenvalues)
    lambdas = np.linalg.svd(factor.T @ _SIGMA_YY @ factor, compute_uv=False)
    return float(max(0.0, lambdas[0] - np.sum(lambdas[1:])))


def family_from_concurrence(kappa):
    """Real symmetric perturbation ``(a, b, b, a)`` whose concurrence is ``kappa``.

    ``kappa = 1`` gives the Bell pair and ``kappa = 0`` the product state ``|++>``.
    """
    if not isinstance(kappa, numbers.Real) or isinstance(kappa, bool):
        raise TypeError(f"Concurrence must be a real number, not {kappa!r}")
    if not 0 <= kappa <= 1:
        raise ValueError(f"Concurrence must be in [0, 1], not {kappa!r}")
    a = np.sqrt((1 + kappa) / 4)
    b = np.sqrt((1 - kappa) / 4)
    return PerturbationParams(a, b, b, a)


def weak_adversary_channel(spec):
    """Ideal CNOT surrounded by local noise on both qubits, as placed by ``spec``."""
    if not isinstance(spec, WeakNoiseSpec):
        raise TypeError(f"Noise specification must be an instance of WeakNoiseSpec, "
                        f"not {spec!r}")
    local = spec.local_channel()
    pair  = local.tensor(local)
    channel = ideal_cnot_channel()
    if spec.placement in (WeakNoiseSpec.Placement.BEFORE, WeakNoiseSpec.Placement.BOTH):
        channel = channel.compose(pair)
    if spec.placement in (WeakNoiseSpec.Placement.AFTER, WeakNoiseSpec.Placement.BOTH):
        channel = pair.compose(channel)
    return channel.canonical()


def _check_channel_pair(noisy, ideal):
    for channel in (noisy, ideal):
        if not isinstance(channel, KrausChannel):
            raise TypeError(f"Channel must be an instance of KrausChannel, not {channel!r}")
    if (noisy.dim_in, noisy.dim_out) != (ideal.dim_in, ideal.dim_out):
        raise ValueError(f"Cannot compare a {noisy.dim_out}x{noisy.dim_in} channel with a "
                         f"{ideal.dim_out}x{ideal.dim_in} channel")


def detectability_bounds(noisy, ideal):
    """Bounds on the single-shot guessing probability ``½(1 + ½‖noisy - ideal‖⋄)``.

    With ``Δ`` the trace norm of the difference of the Choi matrices and ``d`` the input
    dimension, the diamond distance lies in ``[Δ/d, Δ]``.

    Raises
    ------
    :exc:`ValueError`
        If the channels differ in input or output dimension.
    """
    _check_channel_pair(noisy, ideal)
    delta = trace_norm(choi_matrix(noisy) - choi_matrix(ideal))
    d = noisy.dim_in
    lower = min(1.0, 0.5 * (1 + delta / (2 * d)))
    upper = min(1.0, 0.5 * (1 + delta / 2))
    return DetectabilityBounds(lower, upper, choi_distance=delta)


def discrimination_estimate(noisy, ideal, samples, rng):
    """Monte-Carlo lower estimate of the guessing probability.

    Evaluates ``½(1 + ½‖(noisy ⊗ id)(ψ) - (ideal ⊗ id)(ψ)‖₁)`` for the maximally entangled input
    and for ``samples`` Haar-random pure states of system and ancilla, and returns the largest
    value.
    """
    _check_channel_pair(noisy, ideal)
    if not isinstance(samples, int) or samples < 0:
        raise TypeError(f"Sample count must be a non-negative integer, not {samples!r}")
    d = noisy.dim_in
    noisy_ops = [np.kron(op, np.eye(d)) for op in noisy.kraus_ops]
    ideal_ops = [np.kron(op, np.eye(d)) for op in ideal.kraus_ops]

    def guessing_probability(psi):
        state = np.outer(psi, psi.conj())
        difference = (sum(op @ state @ op.conj().T for op in noisy_ops) -
                      sum(op @ state @ op.conj().T for op in ideal_ops))
        return 0.5 * (1 + 0.5 * trace_norm(difference))

    best = guessing_probability(np.eye(d).reshape(-1) / np.sqrt(d))
    for _ in range(samples):
        best = max(best, guessing_probability(random_pure_state(d * d, rng)))
    return best
