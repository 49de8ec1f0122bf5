"""Cost gradients and their statistics.

For a rotation ``U(θ) = cos θ I - i sin θ V`` split out of the ansatz, with ``ρ_R`` the state
entering the gate and ``H_L`` the observable pulled back through the gates after it, the
derivative of the cost ``C = Tr(H E(ρ₀))`` is

    ∂C/∂θ = i cos 2θ Tr(ρ_R [V, H_L]) - sin 2θ Tr(ρ_R (H_L - V H_L V)).

Averaged over a uniform ``θ`` it vanishes, and its variance over random parameters measures how
trainable the ansatz is.
"""

import logging
import math

import numpy as np

from .qcore import (PAULI_Y, DensityMatrix, Observable, embed_one_qubit, haar_unitary,
                    _check_rng)
from .ansatz import (ParamInit, AnsatzSplit, sample_params, split_at, rotation,
                     _check_ansatz, _check_theta, _check_state)
from .expressibility import RightEnsemble, kraus_norm_direct
from ._trials import trial_generators, map_trials


__all__ = [
    "GradientStats", "BoundReport",
    "cost", "grad_analytic", "grad_analytic_all", "grad_parameter_shift", "grad_variance",
    "reference_variance", "two_copy_variance", "attenuation", "variance_deviation_bound",
]


logger = logging.getLogger(__name__)


REFERENCE_MAX_QUBITS = 6
BOUND_MAX_QUBITS     = 3
TWO_COPY_MAX_QUBITS  = 3


class GradientStats:
    """Sample statistics of one gradient component.

    Parameters
    ----------
    param_index : int
        Index of the differentiated parameter.
    mean : float
        Sample mean.
    variance : float
        Unbiased sample variance.
    trials : int
        Number of samples.
    std_err_variance : float
        Jackknife standard error of ``variance``; NaN for fewer than three samples.
    std_err_mean : float
        Standard error of ``mean``.
    """
    def __init__(self, param_index, mean, variance, trials, std_err_variance, std_err_mean):
        if variance < 0:
            raise ValueError(f"Variance must be non-negative, not {variance!r}")
        self._param_index      = param_index
        self._mean             = float(mean)
        self._variance         = float(variance)
        self._trials           = trials
        self._std_err_variance = float(std_err_variance)
        self._std_err_mean     = float(std_err_mean)

    @classmethod
    def from_samples(cls, param_index, samples):
        samples = np.asarray(samples, dtype=float)
        n = len(samples)
        variance = samples.var(ddof=1)
        if n >= 3:
            # Leave-one-out variances from the running sums.
            s1, s2 = samples.sum(), np.square(samples).sum()
            loo_mean = (s1 - samples) / (n - 1)
            loo_var  = (s2 - np.square(samples) - (n - 1) * np.square(loo_mean)) / (n - 2)
            spread = np.sum(np.square(loo_var - loo_var.mean()))
            std_err_variance = math.sqrt((n - 1) / n * spread)
        else:
            std_err_variance = float("nan")
        return cls(param_index, samples.mean(), variance, n, std_err_variance,
                   samples.std(ddof=1) / math.sqrt(n))

    @property
    def param_index(self):
        return self._param_index

    @property
    def mean(self):
        return self._mean

    @property
    def variance(self):
        return self._variance

    @property
    def trials(self):
        return self._trials

    @property
    def std_err_variance(self):
        return self._std_err_variance

    @property
    def std_err_mean(self):
        return self._std_err_mean

    def __repr__(self):
        return (f"GradientStats(param_index={self._param_index}, mean={self._mean:.3g}, "
                f"variance={self._variance:.6g}, trials={self._trials})")


class BoundReport:
    """Check of ``|var - var_ref| <= 4 Δ_R E‖E_L†(H)‖₂²``.

    ``var`` is the gradient variance of the ansatz, ``var_ref`` the variance with the gates before
    the differentiated rotation replaced by a Haar-random unitary, ``Δ_R`` the expressibility of
    those gates and the last factor the mean squared norm of the observable pulled back through
    the gates after it. The bound counts as satisfied when it holds within three combined
    standard errors of the two variances.
    """
    def __init__(self, lhs, rhs, *, expressibility_norm, attenuation, std_err, variance,
                 reference_variance):
        self._lhs                 = float(lhs)
        self._rhs                 = float(rhs)
        self._expressibility_norm = float(expressibility_norm)
        self._attenuation         = float(attenuation)
        self._std_err             = float(std_err)
        self._variance            = variance
        self._reference_variance  = reference_variance

    @property
    def lhs(self):
        return self._lhs

    @property
    def rhs(self):
        return self._rhs

    @property
    def expressibility_norm(self):
        return self._expressibility_norm

    @property
    def attenuation(self):
        return self._attenuation

    @property
    def std_err(self):
        return self._std_err

    @property
    def variance(self):
        return self._variance

    @property
    def reference_variance(self):
        return self._reference_variance

    @property
    def satisfied(self):
        return self._lhs <= self._rhs + 3 * self._std_err

    def __repr__(self):
        return (f"BoundReport(lhs={self._lhs:.6g}, rhs={self._rhs:.6g}, "
                f"satisfied={self.satisfied})")


def _check_observable(ansatz, obs):
    if not isinstance(obs, Observable):
        raise TypeError(f"Observable must be an instance of Observable, not {obs!r}")
    if obs.dim != ansatz.dim:
        raise ValueError(f"Observable dimension {obs.dim} does not match the {ansatz.n}-qubit "
                         f"ansatz")


def _check_trials(trials):
    if not isinstance(trials, int):
        raise TypeError(f"Trial count must be an integer, not {trials!r}")
    if trials < 2:
        raise ValueError(f"Trial count must be at least 2, not {trials}")


def _trace_product(a, b):
    return np.sum(a * b.T)


def _derivative(rho_right, obs_left, generator, theta_k):
    commutator = generator @ obs_left - obs_left @ generator
    sandwich   = obs_left - generator @ obs_left @ generator
    value = (1j * np.cos(2 * theta_k) * _trace_product(rho_right, commutator)
             - np.sin(2 * theta_k) * _trace_product(rho_right, sandwich))
    assert abs(value.imag) < 1e-9
    return float(value.real)


def cost(ansatz, theta, rho0, obs):
    """``Tr(H E_θ(ρ₀))``."""
    _check_ansatz(ansatz)
    theta = _check_theta(ansatz, theta)
    _check_state(ansatz, rho0)
    _check_observable(ansatz, obs)
    return obs.expectation(DensityMatrix(ansatz._evolve(ansatz._gates, rho0.matrix, theta)))


def grad_analytic(split, rho0, obs, theta_k=None):
    """Derivative of the cost with respect to the split parameter.

    Arguments
    ---------
    split : :class:`AnsatzSplit`
        Ansatz split around the differentiated rotation.
    rho0 : :class:`DensityMatrix`
        Input state.
    obs : :class:`Observable`
        Cost observable.
    theta_k : float or None
        Angle of the split rotation; by default the one bound in ``split``.
    """
    if not isinstance(split, AnsatzSplit):
        raise TypeError(f"Split must be an instance of AnsatzSplit, not {split!r}")
    _check_state(split.ansatz, rho0)
    _check_observable(split.ansatz, obs)
    if theta_k is None:
        theta_k = split.theta_k
    return _derivative(split._right_matrix(rho0.matrix),
                       split._left_adjoint_matrix(obs.matrix),
                       split.generator, theta_k)


def _energy_and_gradient(ansatz, theta, rho0, obs):
    # Forward sweep caches the state entering every rotation, backward sweep pulls the
    # observable back gate by gate.
    entering = {}
    matrix = rho0.matrix
    for gate in ansatz._gates:
        if gate.param_index is not None:
            entering[gate.param_index] = matrix
        matrix = ansatz._evolve((gate,), matrix, theta)
    energy = _trace_product(obs.matrix, matrix)
    assert abs(energy.imag) < 1e-9

    gradient = np.empty(ansatz.param_count)
    pulled = obs.matrix
    generators = {}
    for gate in reversed(ansatz._gates):
        if gate.param_index is not None:
            key = (gate.kind, gate.qubits)
            if key not in generators:
                generators[key] = embed_one_qubit(gate.generator, ansatz.n, gate.qubits[0])
            # The derivative needs the observable pulled back through the gates after this one.
            gradient[gate.param_index] = _derivative(entering[gate.param_index], pulled,
                                                     generators[key], theta[gate.param_index])
        pulled = ansatz._pull_back((gate,), pulled, theta)
    return float(energy.real), gradient


def grad_analytic_all(ansatz, theta, rho0, obs):
    """Full gradient vector from one forward and one backward sweep."""
    _check_ansatz(ansatz)
    theta = _check_theta(ansatz, theta)
    _check_state(ansatz, rho0)
    _check_observable(ansatz, obs)
    return _energy_and_gradient(ansatz, theta, rho0, obs)[1]


def grad_parameter_shift(ansatz, theta, rho0, obs, k):
    """``C(θ_k + π/4) - C(θ_k - π/4)``."""
    theta = _check_theta(ansatz, theta)
    split_at(ansatz, theta, k)
    plus, minus = theta.copy(), theta.copy()
    plus[k]  += np.pi / 4
    minus[k] -= np.pi / 4
    return cost(ansatz, plus, rho0, obs) - cost(ansatz, minus, rho0, obs)


def grad_variance(ansatz, init, rho0, obs, k, trials, rng, *, threads=1):
    """Statistics of the derivative by parameter ``k`` over parameters drawn from ``init``.

    Exceptions
    ----------
    Raises :exn:`ValueError` if ``trials < 2``.
    """
    _check_ansatz(ansatz)
    _check_state(ansatz, rho0)
    _check_observable(ansatz, obs)
    _check_trials(trials)
    split_at(ansatz, np.zeros(ansatz.param_count), k)

    def trial(generator):
        return grad_analytic(split_at(ansatz, sample_params(ansatz, init, generator), k),
                             rho0, obs)

    samples = map_trials(trial, trial_generators(rng, trials), threads)
    stats = GradientStats.from_samples(k, samples)
    logger.debug("Gradient variance of parameter %d over %d trials: %.6g ± %.2g",
                 k, trials, stats.variance, stats.std_err_variance)
    return stats


def reference_variance(n, obs, k, trials, rng, *, rho0=None, ansatz=None, init=None,
                       max_qubits=REFERENCE_MAX_QUBITS, threads=1):
    """Gradient variance with a Haar-random unitary in place of the gates before the rotation.

    Without ``ansatz`` nothing follows the rotation, which is an ``R_y`` on qubit 0. With
    ``ansatz`` the differentiated rotation and the gates after it are those of parameter ``k``,
    with parameters drawn from ``init``.

    Exceptions
    ----------
    Raises :exn:`ValueError` if ``n`` exceeds ``max_qubits``.
    """
    if not isinstance(n, int) or n < 1:
        raise TypeError(f"Qubit count must be a positive integer, not {n!r}")
    if n > max_qubits:
        raise ValueError(f"Haar reference variance is limited to {max_qubits} qubits, not {n}")
    if not isinstance(k, int) or k < 0:
        raise TypeError(f"Parameter index must be a non-negative integer, not {k!r}")
    _check_trials(trials)
    d = 2 ** n
    if not isinstance(obs, Observable):
        raise TypeError(f"Observable must be an instance of Observable, not {obs!r}")
    if obs.dim != d:
        raise ValueError(f"Observable dimension {obs.dim} does not match {n} qubits")
    if rho0 is None:
        rho0 = DensityMatrix.basis("0" * n)
    if not isinstance(rho0, DensityMatrix) or rho0.dim != d:
        raise ValueError(f"Input state must be a {n}-qubit DensityMatrix, not {rho0!r}")
    if ansatz is not None:
        _check_ansatz(ansatz)
        if ansatz.n != n:
            raise ValueError(f"Ansatz acts on {ansatz.n} qubits, not {n}")
        if init is None:
            init = ParamInit()
        split_at(ansatz, np.zeros(ansatz.param_count), k)
    generator = embed_one_qubit(PAULI_Y, n, 0)

    def trial(stream):
        u = haar_unitary(d, stream)
        rho_right = u @ rho0.matrix @ u.conj().T
        if ansatz is None:
            return _derivative(rho_right, obs.matrix, generator, stream.uniform(0, 2 * np.pi))
        split = split_at(ansatz, sample_params(ansatz, init, stream), k)
        return _derivative(rho_right, split._left_adjoint_matrix(obs.matrix),
                           split.generator, split.theta_k)

    samples = map_trials(trial, trial_generators(rng, trials), threads)
    stats = GradientStats.from_samples(k, samples)
    logger.debug("Haar reference variance at n=%d over %d trials: %.6g ± %.2g",
                 n, trials, stats.variance, stats.std_err_variance)
    return stats


def two_copy_variance(split, rho0, obs, samples=8):
    """``-E_θ Tr(ρ_R⊗² [V, H̃_L(θ)]⊗²)`` with ``H̃_L(θ) = U(θ)† H_L U(θ)``.

    The average over the split angle runs over ``samples`` equally spaced angles, which is exact
    for ``samples >= 5``. The two-copy operators are built explicitly.
    """
    if not isinstance(split, AnsatzSplit):
        raise TypeError(f"Split must be an instance of AnsatzSplit, not {split!r}")
    if split.ansatz.n > TWO_COPY_MAX_QUBITS:
        raise ValueError(f"Two-copy variance is limited to {TWO_COPY_MAX_QUBITS} qubits, "
                         f"not {split.ansatz.n}")
    if not isinstance(samples, int) or samples < 5:
        raise TypeError(f"Sample count must be an integer of at least 5, not {samples!r}")
    _check_state(split.ansatz, rho0)
    _check_observable(split.ansatz, obs)

    rho_right = split._right_matrix(rho0.matrix)
    obs_left  = split._left_adjoint_matrix(obs.matrix)
    rho_two   = np.kron(rho_right, rho_right)
    generator = split.generator
    total = 0.0
    for theta in np.arange(samples) * 2 * np.pi / samples:
        u = embed_one_qubit(rotation(split.gate.kind, theta), split.ansatz.n, split.gate.qubits[0])
        rotated = u.conj().T @ obs_left @ u
        commutator = generator @ rotated - rotated @ generator
        value = -_trace_product(rho_two, np.kron(commutator, commutator))
        assert abs(value.imag) < 1e-9
        total += value.real
    return total / samples


def attenuation(ansatz, init, obs, k, trials, rng, *, threads=1):
    """Mean and standard error of ``‖E_L†(H)‖₂²`` over parameters drawn from ``init``."""
    _check_ansatz(ansatz)
    _check_observable(ansatz, obs)
    _check_trials(trials)
    split_at(ansatz, np.zeros(ansatz.param_count), k)

    def trial(generator):
        split = split_at(ansatz, sample_params(ansatz, init, generator), k)
        return float(np.linalg.norm(split._left_adjoint_matrix(obs.matrix)) ** 2)

    samples = np.array(map_trials(trial, trial_generators(rng, trials), threads))
    return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(trials))


def variance_deviation_bound(ansatz, init, rho0, obs, k, trials, rng, *, norm_trials=None,
                             max_qubits=BOUND_MAX_QUBITS, threads=1):
    """Compare the gradient variance with its Haar reference against the expressibility bound.

    Four independent random streams are drawn from ``rng``, one per estimated quantity.

    Exceptions
    ----------
    Raises :exn:`ValueError` if the ansatz has more than ``max_qubits`` qubits.
    """
    _check_ansatz(ansatz)
    if ansatz.n > max_qubits:
        raise ValueError(f"Variance deviation bound is limited to {max_qubits} qubits, "
                         f"not {ansatz.n}")
    _check_rng(rng)
    if norm_trials is None:
        norm_trials = trials
    streams = [np.random.default_rng(int(seed)) for seed in rng.integers(0, 2 ** 63, size=4)]

    stats = grad_variance(ansatz, init, rho0, obs, k, trials, streams[0], threads=threads)
    reference = reference_variance(ansatz.n, obs, k, trials, streams[1], rho0=rho0,
                                   ansatz=ansatz, init=init, max_qubits=max_qubits,
                                   threads=threads)
    norm = kraus_norm_direct(RightEnsemble(ansatz, init, k), rho0, norm_trials, streams[2],
                             max_qubits=max_qubits, threads=threads)
    attenuation_mean, _ = attenuation(ansatz, init, obs, k, trials, streams[3], threads=threads)

    lhs = abs(stats.variance - reference.variance)
    rhs = 4 * norm * attenuation_mean
    std_err = math.hypot(stats.std_err_variance, reference.std_err_variance)
    report = BoundReport(lhs, rhs, expressibility_norm=norm, attenuation=attenuation_mean,
                         std_err=std_err, variance=stats, reference_variance=reference)
    logger.debug("Variance deviation bound for parameter %d: %r", k, report)
    return report
