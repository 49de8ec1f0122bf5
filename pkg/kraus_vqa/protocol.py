"""Branch-by-branch simulation of the non-local CNOT protocol.

The register is ``(q_c, q_A, q_B, q_t)`` in tensor order: the control qubit, the two halves of the
shared pair (``q_A`` on the control device, ``q_B`` on the target device) and the target qubit.
The protocol is:

1. CNOT ``q_c -> q_A``, measure ``q_A`` (outcome ``a``), apply X to ``q_B`` if ``a = 1``;
2. CNOT ``q_B -> q_t``;
3. Hadamard on ``q_B``, measure ``q_B`` (outcome ``b``), apply Z to ``q_c`` if ``b = 1``;

after which ``q_A`` and ``q_B`` are discarded. All four measurement branches are enumerated; no
outcome is sampled.
"""

import numpy as np

from .qcore import (PAULI_X, PAULI_Z, HADAMARD, CNOT, PROJ_0, PROJ_1, DensityMatrix,
                    embed_operator, embed_one_qubit, embed_two_qubit, partial_trace,
                    apply_channel)
from .adversary import PerturbationParams, noisy_cnot_channel


__all__ = [
    "REGISTER", "ProtocolBranch", "ProtocolTranscript", "run_cat_protocol",
    "branch_probabilities", "max_channel_deviation",
]


REGISTER = ("q_c", "q_A", "q_B", "q_t")

_C, _A, _B, _T = range(4)

# Branches less likely than this carry no post-measurement state.
_ZERO_PROBABILITY = 1e-14

_CNOT_CA  = embed_two_qubit(CNOT, 4, _C, _A)
_CNOT_BT  = embed_two_qubit(CNOT, 4, _B, _T)
_X_B      = embed_one_qubit(PAULI_X, 4, _B)
_H_B      = embed_one_qubit(HADAMARD, 4, _B)
_Z_C      = embed_one_qubit(PAULI_Z, 4, _C)
_MEASURE  = {
    (qubit, outcome): embed_one_qubit(projector, 4, qubit)
    for qubit in (_A, _B)
    for outcome, projector in ((0, PROJ_0), (1, PROJ_1))
}


def _conjugate(op, matrix):
    return op @ matrix @ op.conj().T


def _measure(matrix, qubit, outcome):
    """Project ``qubit`` onto ``outcome``; returns the probability and the renormalized state."""
    projected = _conjugate(_MEASURE[qubit, outcome], matrix)
    probability = float(np.trace(projected).real)
    if probability < _ZERO_PROBABILITY:
        return 0.0, None
    return probability, projected / probability


class ProtocolBranch:
    """One measurement branch of the protocol.

    Parameters
    ----------
    outcome_a : int
        Measurement outcome of ``q_A``.
    outcome_b : int
        Measurement outcome of ``q_B``.
    probability : float
        Probability of the branch.
    post_state : :class:`DensityMatrix` or ``None``
        State of ``(q_c, q_t)`` after the branch, or ``None`` if the branch cannot occur.
    """
    def __init__(self, outcome_a, outcome_b, probability, post_state):
        if outcome_a not in (0, 1) or outcome_b not in (0, 1):
            raise ValueError(f"Measurement outcomes must be 0 or 1, not "
                             f"({outcome_a!r}, {outcome_b!r})")
        if not 0 <= probability <= 1 + 1e-10:
            raise ValueError(f"Branch probability must be in [0, 1], not {probability!r}")
        if post_state is not None and not isinstance(post_state, DensityMatrix):
            raise TypeError(f"Post-measurement state must be an instance of DensityMatrix or "
                            f"None, not {post_state!r}")
        self._outcome_a   = outcome_a
        self._outcome_b   = outcome_b
        self._probability = probability
        self._post_state  = post_state

    @property
    def outcome_a(self):
        return self._outcome_a

    @property
    def outcome_b(self):
        return self._outcome_b

    @property
    def probability(self):
        return self._probability

    @property
    def post_state(self):
        return self._post_state

    def __repr__(self):
        return (f"ProtocolBranch(outcome_a={self._outcome_a}, outcome_b={self._outcome_b}, "
                f"probability={self._probability:.6g})")


class ProtocolTranscript:
    """Complete record of one protocol run.

    The averaged output ``sum(probability * post_state)`` is the state the target device ends up
    with when the measurement outcomes are discarded.
    """
    def __init__(self, input_state, bell, branches):
        branches = tuple(branches)
        if len(branches) != 4:
            raise ValueError(f"Protocol transcript must have 4 branches, not {len(branches)}")
        total = sum(branch.probability for branch in branches)
        if abs(total - 1) > 1e-10:
            raise ValueError(f"Branch probabilities must sum to 1 within 1e-10, not {total!r}")

        self._input_state = input_state
        self._bell        = bell
        self._branches    = branches
        self._averaged    = DensityMatrix(sum(branch.probability * branch.post_state.matrix
                                              for branch in branches
                                              if branch.post_state is not None))

    @property
    def input_state(self):
        return self._input_state

    @property
    def bell(self):
        return self._bell

    @property
    def branches(self):
        return self._branches

    @property
    def averaged_output(self):
        return self._averaged


def run_cat_protocol(rho_ct, bell):
    """Run the protocol on a control/target state with the shared pair ``bell``.

    Arguments
    ---------
    rho_ct : :class:`DensityMatrix`
        Two-qubit state of ``(q_c, q_t)``.
    bell : :class:`PerturbationParams`
        State of ``(q_A, q_B)``.

    Return value
    ------------
    A :class:`ProtocolTranscript` with branches ordered ``(0, 0), (0, 1), (1, 0), (1, 1)``.

    Exceptions
    ----------
    Raises :exn:`ValueError` if ``rho_ct`` is not a two-qubit state.
    """
    if not isinstance(rho_ct, DensityMatrix):
        raise TypeError(f"Input state must be an instance of DensityMatrix, not {rho_ct!r}")
    if rho_ct.dim != 4:
        raise ValueError(f"Input state must be a two-qubit state, not of dimension {rho_ct.dim}")
    if not isinstance(bell, PerturbationParams):
        raise TypeError(f"Shared pair must be an instance of PerturbationParams, not {bell!r}")

    pair  = bell.density_matrix().matrix
    state = embed_operator(np.kron(rho_ct.matrix, pair), 4, (_C, _T, _A, _B))
    state = _conjugate(_CNOT_CA, state)

    branches = []
    for outcome_a in (0, 1):
        p_a, after_a = _measure(state, _A, outcome_a)
        if after_a is not None:
            if outcome_a:
                after_a = _conjugate(_X_B, after_a)
            after_a = _conjugate(_CNOT_BT, after_a)
            after_a = _conjugate(_H_B, after_a)

        for outcome_b in (0, 1):
            if after_a is None:
                branches.append(ProtocolBranch(outcome_a, outcome_b, 0.0, None))
                continue
            p_b, after_b = _measure(after_a, _B, outcome_b)
            if after_b is None:
                branches.append(ProtocolBranch(outcome_a, outcome_b, 0.0, None))
                continue
            if outcome_b:
                after_b = _conjugate(_Z_C, after_b)
            post_state = DensityMatrix(partial_trace(after_b, 4, keep=(_C, _T)))
            branches.append(ProtocolBranch(outcome_a, outcome_b, p_a * p_b, post_state))

    return ProtocolTranscript(rho_ct, bell, branches)


def branch_probabilities(rho_ct, bell):
    """Probabilities of the outcomes ``(a, b)`` in the order ``00, 01, 10, 11``."""
    return tuple(branch.probability for branch in run_cat_protocol(rho_ct, bell).branches)


def max_channel_deviation(bells, inputs):
    """Largest Frobenius distance between the protocol average and the Kraus-channel output.

    Every shared pair of ``bells`` is paired with every state of ``inputs``.
    """
    deviation = 0.0
    inputs = list(inputs)
    for bell in bells:
        channel = noisy_cnot_channel(bell)
        for rho in inputs:
            protocol_output = run_cat_protocol(rho, bell).averaged_output
            channel_output  = apply_channel(channel, rho)
            deviation = max(deviation, float(np.linalg.norm(protocol_output.matrix -
                                                            channel_output.matrix)))
    return deviation
