"""Second-moment expressibility of channel ensembles.

The expressibility of an ensemble of channels on an input ``rho`` is the Frobenius distance

    Δ = ‖ E[Φ(ρ) ⊗ Φ(ρ)] - G ‖₂,    G = α I + β SWAP,

between its second moment and the Haar twirl ``G`` of ``ρ ⊗ ρ``. Expanding the square, every term
only involves output states of sampled channels:

    Δ² = (α² + β²) d² + 2αβd - 2(α + β ν̄) + N,

with ``ν̄ = E[Tr Φ(ρ)²]`` the average output purity and ``N = E[(Tr Φ(ρ) Ψ(ρ))²]`` over independent
realizations ``Φ``, ``Ψ``. :func:`kraus_norm_ensemble` estimates ``Δ²`` this way;
:func:`kraus_norm_direct` builds the two-copy operator explicitly and is used to cross-check it.

Noise acts on the two regimes in opposite directions. Over the whole ensemble, outputs of noisy
realizations crowd toward the maximally mixed state, so ``N`` grows and ``Δ²`` rises. For a single
channel with fixed parameters, ``N`` collapses to ``ν²`` and ``Δ²`` only falls as noise lowers the
output purity; :func:`kraus_norm_snapshots` averages that fixed-channel value over realizations.
"""

import logging
import numbers

import numpy as np

from .qcore import (DensityMatrix, KrausChannel, apply_channel, haar_unitary,
                    haar_unitary_batch, purity, swap_operator, _check_dim, _check_rng)
from .ansatz import ParamInit, sample_params, split_at, _check_ansatz
from ._trials import trial_generators, map_trials


__all__ = [
    "HaarMomentCoeffs", "ExpressibilityEstimate",
    "ChannelEnsemble", "FixedChannelEnsemble", "AnsatzEnsemble", "RightEnsemble",
    "HaarEnsemble",
    "haar_moment_coeffs", "haar_twirl_estimate", "kraus_norm_ensemble", "kraus_norm_fixed",
    "kraus_norm_snapshots", "kraus_norm_direct",
]


logger = logging.getLogger(__name__)


DIRECT_MAX_QUBITS = 4


class HaarMomentCoeffs:
    """Coefficients of the Haar twirl ``α I + β SWAP`` of ``ρ ⊗ ρ``.

    Raises
    ------
    :exc:`ValueError`
        If ``α`` is negative, or if ``α d² + β d`` differs from 1 by more than ``1e-10``.
    """
    def __init__(self, alpha, beta, d):
        if not isinstance(d, int) or isinstance(d, bool) or d < 2:
            raise TypeError(f"Dimension must be an integer of at least 2, not {d!r}")
        alpha, beta = float(alpha), float(beta)
        if alpha < -1e-12:
            raise ValueError(f"Identity coefficient must be non-negative, not {alpha!r}")
        if abs(alpha * d ** 2 + beta * d - 1) > 1e-10:
            raise ValueError(f"Coefficients must satisfy alpha*d**2 + beta*d = 1, not "
                             f"{alpha * d ** 2 + beta * d!r}")
        self._alpha = alpha
        self._beta  = beta
        self._d     = d

    @property
    def alpha(self):
        return self._alpha

    @property
    def beta(self):
        return self._beta

    @property
    def d(self):
        return self._d

    def operator(self):
        """``α I + β SWAP`` on ``C^d ⊗ C^d``."""
        return self._alpha * np.eye(self._d ** 2) + self._beta * swap_operator(self._d)

    def __repr__(self):
        return f"HaarMomentCoeffs(alpha={self._alpha!r}, beta={self._beta!r}, d={self._d})"


class ExpressibilityEstimate:
    """Monte-Carlo estimate of the squared expressibility ``Δ²``.

    Parameters
    ----------
    delta_sq : float
        Estimated ``Δ²``. It may be slightly negative through sampling noise.
    nu_bar : float
        Average output purity.
    n_noise : float
        Average squared overlap of independent output pairs.
    trials : int
        Number of sampled realizations.
    std_err : float
        Standard error of ``delta_sq``; NaN when fewer than two independent pairs were drawn.
    coeffs : :class:`HaarMomentCoeffs`
        Twirl coefficients of the input state.
    """
    def __init__(self, delta_sq, nu_bar, n_noise, trials, std_err, coeffs):
        self._delta_sq = float(delta_sq)
        self._nu_bar   = float(nu_bar)
        self._n_noise  = float(n_noise)
        self._trials   = trials
        self._std_err  = float(std_err)
        self._coeffs   = coeffs

    @property
    def delta_sq(self):
        return self._delta_sq

    @property
    def nu_bar(self):
        return self._nu_bar

    @property
    def n_noise(self):
        return self._n_noise

    @property
    def trials(self):
        return self._trials

    @property
    def std_err(self):
        return self._std_err

    @property
    def alpha(self):
        return self._coeffs.alpha

    @property
    def beta(self):
        return self._coeffs.beta

    @property
    def d(self):
        return self._coeffs.d

    @property
    def norm(self):
        """``Δ`` itself, with negative estimates clipped to zero."""
        return float(np.sqrt(max(self._delta_sq, 0.0)))

    def __repr__(self):
        return (f"ExpressibilityEstimate(delta_sq={self._delta_sq:.6g}, "
                f"std_err={self._std_err:.2g}, trials={self._trials})")


class ChannelEnsemble:
    """Distribution over channels on a ``dim``-dimensional space.

    Subclasses implement :meth:`sample_output`, which draws one channel from the ensemble using
    ``rng`` and returns its output on ``rho``.
    """
    def __init__(self, dim):
        self._dim = dim

    @property
    def dim(self):
        return self._dim

    def _check_input(self, rho):
        if not isinstance(rho, DensityMatrix):
            raise TypeError(f"State must be an instance of DensityMatrix, not {rho!r}")
        if rho.dim != self._dim:
            raise ValueError(f"State dimension {rho.dim} does not match ensemble dimension "
                             f"{self._dim}")

    def sample_output(self, rho, rng): # :nocov:
        raise NotImplementedError


class FixedChannelEnsemble(ChannelEnsemble):
    """Ensemble consisting of a single channel."""
    def __init__(self, channel):
        if not isinstance(channel, KrausChannel):
            raise TypeError(f"Channel must be an instance of KrausChannel, not {channel!r}")
        if channel.dim_in != channel.dim_out:
            raise ValueError(f"Channel must be square, not {channel.dim_out}x{channel.dim_in}")
        super().__init__(channel.dim_in)
        self._channel = channel

    @property
    def channel(self):
        return self._channel

    def sample_output(self, rho, rng):
        self._check_input(rho)
        return apply_channel(self._channel, rho)


class AnsatzEnsemble(ChannelEnsemble):
    """Channels of an ansatz with parameters drawn from ``init`` and noise held fixed."""
    def __init__(self, ansatz, init=None):
        _check_ansatz(ansatz)
        if init is None:
            init = ParamInit()
        if not isinstance(init, ParamInit):
            raise TypeError(f"Initialization must be an instance of ParamInit, not {init!r}")
        super().__init__(ansatz.dim)
        self._ansatz = ansatz
        self._init   = init

    @property
    def ansatz(self):
        return self._ansatz

    @property
    def init(self):
        return self._init

    def sample_output(self, rho, rng):
        self._check_input(rho)
        theta = sample_params(self._ansatz, self._init, rng)
        return DensityMatrix(self._ansatz._evolve(self._ansatz._gates, rho.matrix, theta))


class RightEnsemble(ChannelEnsemble):
    """Channels formed by the gates preceding the rotation driven by parameter ``k``."""
    def __init__(self, ansatz, init, k):
        _check_ansatz(ansatz)
        if not isinstance(init, ParamInit):
            raise TypeError(f"Initialization must be an instance of ParamInit, not {init!r}")
        split_at(ansatz, np.zeros(ansatz.param_count), k)
        super().__init__(ansatz.dim)
        self._ansatz = ansatz
        self._init   = init
        self._k      = k

    def sample_output(self, rho, rng):
        self._check_input(rho)
        split = split_at(self._ansatz, sample_params(self._ansatz, self._init, rng), self._k)
        return split.rho_right(rho)


class HaarEnsemble(ChannelEnsemble):
    """Haar-random unitary channels."""
    def __init__(self, dim):
        super().__init__(_check_dim(dim))

    def sample_output(self, rho, rng):
        self._check_input(rho)
        u = haar_unitary(self._dim, rng)
        return DensityMatrix(u @ rho.matrix @ u.conj().T)


def _check_ensemble(ensemble):
    if not isinstance(ensemble, ChannelEnsemble):
        raise TypeError(f"Ensemble must be an instance of ChannelEnsemble, not {ensemble!r}")


def haar_moment_coeffs(rho):
    """Twirl coefficients of ``ρ ⊗ ρ``.

    Return value
    ------------
    :class:`HaarMomentCoeffs` with ``α = (d - Tr ρ²) / (d(d² - 1))`` and
    ``β = (d Tr ρ² - 1) / (d(d² - 1))``.

    Exceptions
    ----------
    Raises :exn:`ValueError` if ``ρ`` is one-dimensional.
    """
    if not isinstance(rho, DensityMatrix):
        raise TypeError(f"State must be an instance of DensityMatrix, not {rho!r}")
    d = rho.dim
    if d < 2:
        raise ValueError(f"Haar moments require dimension at least 2, not {d}")
    p = purity(rho)
    denominator = d * (d * d - 1)
    return HaarMomentCoeffs((d - p) / denominator, (d * p - 1) / denominator, d)


def haar_twirl_estimate(rho, samples, rng, *, batch=10_000):
    """Monte-Carlo average of ``(U ⊗ U)(ρ ⊗ ρ)(U ⊗ U)†`` over Haar-random ``U``."""
    if not isinstance(rho, DensityMatrix):
        raise TypeError(f"State must be an instance of DensityMatrix, not {rho!r}")
    if not isinstance(samples, int) or samples < 1:
        raise TypeError(f"Sample count must be a positive integer, not {samples!r}")
    _check_rng(rng)
    d = rho.dim
    two_copy = np.kron(rho.matrix, rho.matrix)
    total = np.zeros((d * d, d * d), dtype=complex)
    remaining = samples
    while remaining:
        count = min(batch, remaining)
        u = haar_unitary_batch(d, count, rng)
        uu = np.einsum("bij,bkl->bikjl", u, u).reshape(count, d * d, d * d)
        total += np.einsum("bij,jk,blk->il", uu, two_copy, uu.conj())
        remaining -= count
    return total / samples


def kraus_norm_ensemble(ensemble, rho, trials, rng, *, threads=1):
    """Estimate ``Δ²`` of ``ensemble`` on ``rho`` from output states only.

    The average purity uses every trial; the overlap term uses the disjoint pairs
    ``(2i, 2i + 1)``. The standard error is that of the mean of the per-pair contributions.

    Exceptions
    ----------
    Raises :exn:`ValueError` if ``trials < 2``.
    """
    _check_ensemble(ensemble)
    if not isinstance(trials, int):
        raise TypeError(f"Trial count must be an integer, not {trials!r}")
    if trials < 2:
        raise ValueError(f"Trial count must be at least 2, not {trials}")
    coeffs = haar_moment_coeffs(rho)
    alpha, beta, d = coeffs.alpha, coeffs.beta, coeffs.d

    outputs = map_trials(lambda generator: ensemble.sample_output(rho, generator).matrix,
                         trial_generators(rng, trials), threads)
    purities = np.array([np.vdot(output, output).real for output in outputs])
    pairs = trials // 2
    overlaps = np.array([np.vdot(outputs[2 * i], outputs[2 * i + 1]).real ** 2
                         for i in range(pairs)])

    constant = (alpha ** 2 + beta ** 2) * d ** 2 + 2 * alpha * beta * d - 2 * alpha
    nu_bar   = purities.mean()
    n_noise  = overlaps.mean()
    delta_sq = constant - 2 * beta * nu_bar + n_noise

    per_pair = -beta * (purities[0:2 * pairs:2] + purities[1:2 * pairs:2]) + overlaps
    if pairs >= 2:
        std_err = per_pair.std(ddof=1) / np.sqrt(pairs)
    else:
        std_err = float("nan")

    logger.debug("Expressibility estimate over %d trials: delta_sq=%.6g, std_err=%.2g, "
                 "nu_bar=%.6g, n_noise=%.6g", trials, delta_sq, std_err, nu_bar, n_noise)
    return ExpressibilityEstimate(delta_sq, nu_bar, n_noise, trials, std_err, coeffs)


def kraus_norm_fixed(nu, rho):
    """``Δ²`` of a single channel whose output on ``rho`` has purity ``nu``.

    Exceptions
    ----------
    Raises :exn:`ValueError` unless ``0 < nu <= 1``.
    """
    if not isinstance(nu, numbers.Real) or isinstance(nu, bool):
        raise TypeError(f"Purity must be a real number, not {nu!r}")
    if not 0 < nu <= 1 + 1e-12:
        raise ValueError(f"Purity must be in (0, 1], not {nu!r}")
    nu = min(float(nu), 1.0)
    coeffs = haar_moment_coeffs(rho)
    alpha, beta, d = coeffs.alpha, coeffs.beta, coeffs.d
    return float((alpha ** 2 + beta ** 2) * d ** 2 + 2 * alpha * beta * d
                 - 2 * (alpha + beta * nu) + nu ** 2)


def kraus_norm_snapshots(ensemble, rho, trials, rng, *, threads=1):
    """Average ``Δ²`` of single realizations of ``ensemble``, each taken as a fixed channel.

    This is the regime of a trained circuit whose parameters no longer move: every sampled
    realization contributes the closed form of :func:`kraus_norm_fixed` at its own output purity.
    The overlap term of a single channel is its purity squared, so ``n_noise`` reports ``E[ν²]``.

    Exceptions
    ----------
    Raises :exn:`ValueError` if ``trials < 2``.
    """
    _check_ensemble(ensemble)
    if not isinstance(trials, int):
        raise TypeError(f"Trial count must be an integer, not {trials!r}")
    if trials < 2:
        raise ValueError(f"Trial count must be at least 2, not {trials}")
    coeffs = haar_moment_coeffs(rho)

    def snapshot_purity(generator):
        return purity(ensemble.sample_output(rho, generator))

    purities = np.array(map_trials(snapshot_purity, trial_generators(rng, trials), threads))
    values   = np.array([kraus_norm_fixed(nu, rho) for nu in purities])
    delta_sq = values.mean()
    std_err  = values.std(ddof=1) / np.sqrt(trials)

    logger.debug("Fixed-channel expressibility over %d snapshots: delta_sq=%.6g, std_err=%.2g",
                 trials, delta_sq, std_err)
    return ExpressibilityEstimate(delta_sq, purities.mean(), (purities ** 2).mean(), trials,
                                  std_err, coeffs)


def kraus_norm_direct(ensemble, rho, trials, rng, *, max_qubits=DIRECT_MAX_QUBITS, threads=1):
    """``Δ`` from the explicitly averaged two-copy output operator.

    The operator has ``d⁴`` entries, so the input is limited to ``max_qubits`` qubits.

    Exceptions
    ----------
    Raises :exn:`ValueError` if ``rho`` has more than ``max_qubits`` qubits.
    """
    _check_ensemble(ensemble)
    if not isinstance(rho, DensityMatrix):
        raise TypeError(f"State must be an instance of DensityMatrix, not {rho!r}")
    if rho.n_qubits > max_qubits:
        raise ValueError(f"Direct expressibility norm is limited to {max_qubits} qubits, "
                         f"not {rho.n_qubits}")
    if not isinstance(trials, int) or trials < 1:
        raise TypeError(f"Trial count must be a positive integer, not {trials!r}")
    coeffs = haar_moment_coeffs(rho)

    outputs = map_trials(lambda generator: ensemble.sample_output(rho, generator).matrix,
                         trial_generators(rng, trials), threads)
    moment = sum(np.kron(output, output) for output in outputs) / trials
    norm = float(np.linalg.norm(moment - coeffs.operator()))
    logger.debug("Direct expressibility norm over %d trials: %.6g", trials, norm)
    return norm
