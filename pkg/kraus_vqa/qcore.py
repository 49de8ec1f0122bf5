"""Dense density-matrix primitives.

All operators are stored as dense row-major ``complex128`` arrays. Qubit 0 is the leftmost tensor
factor, i.e. the most significant bit of a computational basis index: for three qubits the basis
state ``|q0 q1 q2> = |101>`` has index ``0b101 = 5``. Every module of this package follows this
convention.
"""

import numbers

import numpy as np


__all__ = [
    "PAULI_I", "PAULI_X", "PAULI_Y", "PAULI_Z", "HADAMARD", "CNOT", "SWAP", "PROJ_0", "PROJ_1",
    "DensityMatrix", "KrausChannel", "Observable",
    "tensor", "embed_operator", "embed_one_qubit", "embed_two_qubit", "partial_trace",
    "swap_operator", "apply_channel", "adjoint_apply", "apply_local", "purity",
    "haar_unitary", "haar_unitary_batch", "random_pure_state", "random_density_matrix",
    "choi_matrix", "trace_norm",
]


HERMITIAN_ATOL    = 1e-10
TRACE_ATOL        = 1e-10
EIGENVALUE_FLOOR  = -1e-9
COMPLETENESS_ATOL = 1e-10


def _constant(rows):
    matrix = np.array(rows, dtype=complex)
    matrix.setflags(write=False)
    return matrix


PAULI_I  = _constant([[1, 0], [0, 1]])
PAULI_X  = _constant([[0, 1], [1, 0]])
PAULI_Y  = _constant([[0, -1j], [1j, 0]])
PAULI_Z  = _constant([[1, 0], [0, -1]])
HADAMARD = _constant(np.array([[1, 1], [1, -1]]) / np.sqrt(2))
PROJ_0   = _constant([[1, 0], [0, 0]])
PROJ_1   = _constant([[0, 0], [0, 1]])
CNOT     = _constant([[1, 0, 0, 0],
                      [0, 1, 0, 0],
                      [0, 0, 0, 1],
                      [0, 0, 1, 0]])
SWAP     = _constant([[1, 0, 0, 0],
                      [0, 0, 1, 0],
                      [0, 1, 0, 0],
                      [0, 0, 0, 1]])

_PAULIS = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def _as_matrix(value, what):
    try:
        matrix = np.array(value, dtype=complex)
    except (TypeError, ValueError):
        raise TypeError(f"{what} must be a complex matrix, not {value!r}") from None
    if matrix.ndim != 2:
        raise ValueError(f"{what} must be a 2-dimensional matrix, not an array of shape "
                         f"{matrix.shape!r}")
    return matrix


def _frozen(matrix):
    matrix = np.array(matrix, dtype=complex)
    matrix.setflags(write=False)
    return matrix


def _qubit_count(dim):
    if dim < 1 or dim & (dim - 1):
        return None
    return dim.bit_length() - 1


def _check_rng(rng):
    if not isinstance(rng, np.random.Generator):
        raise TypeError(f"Random stream must be an instance of numpy.random.Generator, "
                        f"not {rng!r}")


def _check_dim(dim):
    if not isinstance(dim, numbers.Integral) or isinstance(dim, bool) or dim < 1:
        raise TypeError(f"Dimension must be a positive integer, not {dim!r}")
    return int(dim)


def _check_qubits(n, qubits):
    if not isinstance(n, numbers.Integral) or isinstance(n, bool) or n < 1:
        raise TypeError(f"Qubit count must be a positive integer, not {n!r}")
    for qubit in qubits:
        if not isinstance(qubit, numbers.Integral) or isinstance(qubit, bool):
            raise TypeError(f"Qubit index must be an integer, not {qubit!r}")
        if not 0 <= qubit < n:
            raise ValueError(f"Qubit index must be in range(0, {n}), not {qubit!r}")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"Qubit indices must be distinct, not {tuple(qubits)!r}")


class DensityMatrix:
    """Density matrix of an ``n``-qubit register.

    A density matrix is a Hermitian, positive semi-definite operator of unit trace. Violations are
    reported rather than repaired: a matrix that drifted outside the tolerances below is rejected
    and never renormalized.

    Parameters
    ----------
    matrix : array-like
        Square complex matrix of dimension ``2 ** n``.

    Raises
    ------
    :exc:`ValueError`
        If the matrix is not square, its dimension is not a power of 2, it deviates from its
        adjoint by more than ``1e-10`` entrywise, its trace deviates from 1 by more than ``1e-10``,
        or it has an eigenvalue below ``-1e-9``.
    """
    def __init__(self, matrix):
        matrix = _as_matrix(matrix, "Density matrix")
        rows, cols = matrix.shape
        if rows != cols:
            raise ValueError(f"Density matrix must be square, not of shape {matrix.shape!r}")
        n_qubits = _qubit_count(rows)
        if n_qubits is None:
            raise ValueError(f"Density matrix dimension must be a power of 2, not {rows}")

        hermitian_error = np.max(np.abs(matrix - matrix.conj().T))
        if hermitian_error > HERMITIAN_ATOL:
            raise ValueError(f"Density matrix must be Hermitian within {HERMITIAN_ATOL}, "
                             f"deviation is {hermitian_error:.3e}")
        trace = np.trace(matrix)
        if abs(trace - 1) > TRACE_ATOL:
            raise ValueError(f"Density matrix must have unit trace within {TRACE_ATOL}, "
                             f"not {trace!r}")
        min_eigenvalue = np.linalg.eigvalsh((matrix + matrix.conj().T) / 2)[0]
        if min_eigenvalue < EIGENVALUE_FLOOR:
            raise ValueError(f"Density matrix must be positive semi-definite, smallest "
                             f"eigenvalue is {min_eigenvalue:.3e}")

        self._matrix   = _frozen(matrix)
        self._n_qubits = n_qubits

    @classmethod
    def from_statevector(cls, statevector):
        """Projector onto a normalized state vector."""
        statevector = np.array(statevector, dtype=complex)
        if statevector.ndim != 1:
            raise ValueError(f"State vector must be 1-dimensional, not an array of shape "
                             f"{statevector.shape!r}")
        norm = np.linalg.norm(statevector)
        if abs(norm - 1) > TRACE_ATOL:
            raise ValueError(f"State vector must be normalized within {TRACE_ATOL}, "
                             f"norm is {norm!r}")
        return cls(np.outer(statevector, statevector.conj()))

    @classmethod
    def basis(cls, bits):
        """Computational basis state, e.g. ``DensityMatrix.basis("10")`` for ``|10><10|``."""
        if not isinstance(bits, str) or not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"Basis label must be a non-empty string of 0 and 1, not {bits!r}")
        matrix = np.zeros((2 ** len(bits), 2 ** len(bits)), dtype=complex)
        index = int(bits, 2)
        matrix[index, index] = 1
        return cls(matrix)

    @classmethod
    def maximally_mixed(cls, n_qubits):
        if not isinstance(n_qubits, int) or n_qubits < 1:
            raise TypeError(f"Qubit count must be a positive integer, not {n_qubits!r}")
        dim = 2 ** n_qubits
        return cls(np.eye(dim) / dim)

    @classmethod
    def product(cls, *states):
        """Tensor product of density matrices, leftmost factor first."""
        if not states:
            raise ValueError("Product state requires at least one factor")
        matrix = np.ones((1, 1), dtype=complex)
        for state in states:
            if not isinstance(state, DensityMatrix):
                raise TypeError(f"Product factor must be an instance of DensityMatrix, "
                                f"not {state!r}")
            matrix = np.kron(matrix, state.matrix)
        return cls(matrix)

    @property
    def matrix(self):
        return self._matrix

    @property
    def dim(self):
        return self._matrix.shape[0]

    @property
    def n_qubits(self):
        return self._n_qubits

    def __repr__(self):
        return f"DensityMatrix(n_qubits={self._n_qubits}, purity={purity(self):.6f})"


class KrausChannel:
    """Completely positive trace-preserving map in Kraus form.

    The channel acts as ``rho -> sum(E @ rho @ E.conj().T for E in kraus_ops)``.

    Parameters
    ----------
    kraus_ops : iterable of array-like
        Kraus operators, all of shape ``(dim_out, dim_in)``.

    Raises
    ------
    :exc:`ValueError`
        If no operator is given, the operators differ in shape, or the completeness relation
        ``sum(E.conj().T @ E) == I`` is violated by more than ``1e-10`` in Frobenius norm.
    """
    def __init__(self, kraus_ops):
        ops = [_as_matrix(op, "Kraus operator") for op in kraus_ops]
        if not ops:
            raise ValueError("Kraus channel must have at least one Kraus operator")
        shape = ops[0].shape
        for op in ops:
            if op.shape != shape:
                raise ValueError(f"Kraus operators must all have the same shape, found "
                                 f"{shape!r} and {op.shape!r}")

        completeness = sum(op.conj().T @ op for op in ops)
        error = np.linalg.norm(completeness - np.eye(shape[1]))
        if error > COMPLETENESS_ATOL:
            raise ValueError(f"Kraus operators must satisfy completeness within "
                             f"{COMPLETENESS_ATOL}, deviation is {error:.3e}")

        self._kraus_ops = tuple(_frozen(op) for op in ops)

    @classmethod
    def unitary(cls, u):
        return cls([u])

    @classmethod
    def identity(cls, dim):
        return cls([np.eye(_check_dim(dim))])

    @property
    def kraus_ops(self):
        return self._kraus_ops

    @property
    def dim_in(self):
        return self._kraus_ops[0].shape[1]

    @property
    def dim_out(self):
        return self._kraus_ops[0].shape[0]

    def compose(self, first):
        """Channel applying ``first`` and then ``self``."""
        if not isinstance(first, KrausChannel):
            raise TypeError(f"Channel must be an instance of KrausChannel, not {first!r}")
        if first.dim_out != self.dim_in:
            raise ValueError(f"Cannot compose a channel with input dimension {self.dim_in} "
                             f"after a channel with output dimension {first.dim_out}")
        return KrausChannel([a @ b for a in self._kraus_ops for b in first.kraus_ops])

    def tensor(self, other):
        """Channel acting as ``self`` on the left factor and ``other`` on the right one."""
        if not isinstance(other, KrausChannel):
            raise TypeError(f"Channel must be an instance of KrausChannel, not {other!r}")
        return KrausChannel([np.kron(a, b) for a in self._kraus_ops for b in other.kraus_ops])

    def canonical(self, *, atol=1e-12):
        """Equivalent channel with the minimal number of Kraus operators.

        The operators are obtained from the eigendecomposition of the Choi matrix; eigenvalues
        below ``atol`` are dropped.
        """
        eigenvalues, eigenvectors = np.linalg.eigh(choi_matrix(self))
        ops = [np.sqrt(value) * eigenvectors[:, index].reshape(self.dim_out, self.dim_in)
               for index, value in enumerate(eigenvalues) if value > atol]
        return KrausChannel(ops)

    def __repr__(self):
        return (f"KrausChannel(dim_in={self.dim_in}, dim_out={self.dim_out}, "
                f"kraus_rank={len(self._kraus_ops)})")


class Observable:
    """Hermitian observable.

    Parameters
    ----------
    matrix : array-like
        Square complex matrix, Hermitian within ``1e-10``.
    """
    def __init__(self, matrix):
        matrix = _as_matrix(matrix, "Observable")
        if matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"Observable must be square, not of shape {matrix.shape!r}")
        hermitian_error = np.max(np.abs(matrix - matrix.conj().T))
        if hermitian_error > HERMITIAN_ATOL:
            raise ValueError(f"Observable must be Hermitian within {HERMITIAN_ATOL}, "
                             f"deviation is {hermitian_error:.3e}")
        self._matrix = _frozen(matrix)

    @classmethod
    def pauli(cls, word, coefficient=1.0):
        """Pauli string observable, e.g. ``Observable.pauli("ZZI")`` for Z on qubits 0 and 1."""
        if not isinstance(word, str) or not word or set(word) - set(_PAULIS):
            raise ValueError(f"Pauli word must be a non-empty string over I, X, Y, Z, "
                             f"not {word!r}")
        if not isinstance(coefficient, numbers.Real):
            raise TypeError(f"Coefficient must be a real number, not {coefficient!r}")
        matrix = np.ones((1, 1), dtype=complex)
        for letter in word:
            matrix = np.kron(matrix, _PAULIS[letter])
        return cls(coefficient * matrix)

    @property
    def matrix(self):
        return self._matrix

    @property
    def dim(self):
        return self._matrix.shape[0]

    def norm(self):
        """Hilbert-Schmidt (Frobenius) norm."""
        return float(np.linalg.norm(self._matrix))

    def normalized(self):
        norm = self.norm()
        if norm == 0:
            raise ValueError("Cannot normalize the zero observable")
        return Observable(self._matrix / norm)

    def expectation(self, rho):
        """``Tr(H rho)``."""
        if not isinstance(rho, DensityMatrix):
            raise TypeError(f"State must be an instance of DensityMatrix, not {rho!r}")
        if rho.dim != self.dim:
            raise ValueError(f"State dimension {rho.dim} does not match observable dimension "
                             f"{self.dim}")
        value = np.vdot(self._matrix, rho.matrix)
        assert abs(value.imag) < 1e-10
        return float(value.real)

    def __repr__(self):
        return f"Observable(dim={self.dim})"


def tensor(a, b):
    """Kronecker product ``a ⊗ b``."""
    return np.kron(_as_matrix(a, "Left factor"), _as_matrix(b, "Right factor"))


def embed_operator(op, n, qubits):
    """Embed a ``k``-qubit operator into an ``n``-qubit register.

    Arguments
    ---------
    op : array-like
        Operator of shape ``(2 ** k, 2 ** k)``. Its tensor factors act on ``qubits`` in order.
    n : int
        Register size.
    qubits : iterable of int
        Distinct target qubits; they need not be adjacent or sorted.

    Return value
    ------------
    A ``2 ** n`` by ``2 ** n`` matrix acting as ``op`` on ``qubits`` and as identity elsewhere.
    """
    op = _as_matrix(op, "Operator")
    qubits = tuple(qubits)
    _check_qubits(n, qubits)
    k = len(qubits)
    if op.shape != (2 ** k, 2 ** k):
        raise ValueError(f"Operator on {k} qubits must have shape {(2 ** k, 2 ** k)!r}, "
                         f"not {op.shape!r}")

    rest  = [qubit for qubit in range(n) if qubit not in qubits]
    order = list(qubits) + rest
    full  = np.kron(op, np.eye(2 ** len(rest))).reshape((2,) * (2 * n))
    axes  = [order.index(qubit) for qubit in range(n)]
    full  = full.transpose(axes + [n + axis for axis in axes])
    return full.reshape(2 ** n, 2 ** n)


def embed_one_qubit(op, n, q):
    return embed_operator(op, n, (q,))


def embed_two_qubit(op, n, q1, q2):
    """Embed a two-qubit operator acting on ``(q1, q2)``; ``q1`` is its leftmost factor."""
    if q1 == q2:
        raise ValueError(f"Qubit indices must be distinct, not ({q1!r}, {q2!r})")
    return embed_operator(op, n, (q1, q2))


def partial_trace(matrix, n, keep):
    """Trace out every qubit of an ``n``-qubit operator that is not in ``keep``.

    The kept qubits appear in ascending order in the result.
    """
    matrix = _as_matrix(matrix, "Operator")
    keep = sorted(set(keep))
    _check_qubits(n, keep)
    if matrix.shape != (2 ** n, 2 ** n):
        raise ValueError(f"Operator on {n} qubits must have shape {(2 ** n, 2 ** n)!r}, "
                         f"not {matrix.shape!r}")

    labels = list(range(2 * n))
    for qubit in range(n):
        if qubit not in keep:
            labels[n + qubit] = labels[qubit]
    output_labels = keep + [n + qubit for qubit in keep]
    reduced = np.einsum(matrix.reshape((2,) * (2 * n)), labels, output_labels)
    return reduced.reshape(2 ** len(keep), 2 ** len(keep))


def swap_operator(dim):
    """SWAP on ``C^dim ⊗ C^dim``."""
    dim = _check_dim(dim)
    index = np.arange(dim)
    rows = (index[:, None] * dim + index[None, :]).ravel()
    cols = (index[None, :] * dim + index[:, None]).ravel()
    swap = np.zeros((dim * dim, dim * dim), dtype=complex)
    swap[rows, cols] = 1
    return swap


def _kraus_sum(ops, matrix):
    return sum(op @ matrix @ op.conj().T for op in ops)


def _adjoint_kraus_sum(ops, matrix):
    return sum(op.conj().T @ matrix @ op for op in ops)


def apply_channel(ch, rho):
    """``sum(E rho E†)`` over the Kraus operators of ``ch``."""
    if not isinstance(ch, KrausChannel):
        raise TypeError(f"Channel must be an instance of KrausChannel, not {ch!r}")
    if not isinstance(rho, DensityMatrix):
        raise TypeError(f"State must be an instance of DensityMatrix, not {rho!r}")
    if ch.dim_in != rho.dim:
        raise ValueError(f"Channel input dimension {ch.dim_in} does not match state dimension "
                         f"{rho.dim}")
    return DensityMatrix(_kraus_sum(ch.kraus_ops, rho.matrix))


def adjoint_apply(ch, obs):
    """Heisenberg-picture action ``sum(E† H E)``."""
    if not isinstance(ch, KrausChannel):
        raise TypeError(f"Channel must be an instance of KrausChannel, not {ch!r}")
    if not isinstance(obs, Observable):
        raise TypeError(f"Observable must be an instance of Observable, not {obs!r}")
    if ch.dim_out != obs.dim:
        raise ValueError(f"Channel output dimension {ch.dim_out} does not match observable "
                         f"dimension {obs.dim}")
    return Observable(_adjoint_kraus_sum(ch.kraus_ops, obs.matrix))


def apply_local(ops, matrix, n, qubits, *, adjoint=False):
    """Apply a local Kraus map to an ``n``-qubit operator without embedding it.

    Computes ``sum(A M A†)`` where each ``A`` of ``ops`` acts on ``qubits``, or
    ``sum(A† M A)`` when ``adjoint`` is set. The cost is linear in the size of ``matrix``.
    """
    k = len(qubits)
    row_axes = list(qubits)
    col_axes = [n + qubit for qubit in qubits]
    op_in    = list(range(k, 2 * k))
    tensor_  = np.asarray(matrix).reshape((2,) * (2 * n))
    result   = 0
    for op in ops:
        if adjoint:
            op = op.conj().T
        factor = op.reshape((2,) * (2 * k))
        left   = np.tensordot(factor, tensor_, axes=(op_in, row_axes))
        left   = np.moveaxis(left, list(range(k)), row_axes)
        both   = np.tensordot(left, factor.conj(), axes=(col_axes, op_in))
        both   = np.moveaxis(both, list(range(2 * n - k, 2 * n)), col_axes)
        result = result + both
    return result.reshape(2 ** n, 2 ** n)


def purity(rho):
    """``Tr(rho²)``."""
    if not isinstance(rho, DensityMatrix):
        raise TypeError(f"State must be an instance of DensityMatrix, not {rho!r}")
    return float(np.vdot(rho.matrix, rho.matrix).real)


def haar_unitary(dim, rng):
    """Haar-random unitary from the QR decomposition of a complex Ginibre matrix.

    The phases of the diagonal of ``R`` are moved into ``Q`` so that the distribution is exactly
    Haar.
    """
    dim = _check_dim(dim)
    _check_rng(rng)
    ginibre = (rng.standard_normal((dim, dim))
               + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(ginibre)
    diagonal = np.diagonal(r)
    return q * (diagonal / np.abs(diagonal))


def haar_unitary_batch(dim, count, rng):
    """``count`` independent Haar-random unitaries stacked along the first axis."""
    dim = _check_dim(dim)
    if not isinstance(count, int) or count < 1:
        raise TypeError(f"Sample count must be a positive integer, not {count!r}")
    _check_rng(rng)
    ginibre = (rng.standard_normal((count, dim, dim))
               + 1j * rng.standard_normal((count, dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(ginibre)
    diagonal = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diagonal / np.abs(diagonal))[:, None, :]


def random_pure_state(dim, rng):
    return haar_unitary(dim, rng)[:, 0]


def random_density_matrix(dim, rng, *, rank=None):
    """Random mixed state ``G G† / Tr(G G†)`` with ``G`` a ``dim`` by ``rank`` Ginibre matrix."""
    dim = _check_dim(dim)
    _check_rng(rng)
    if rank is None:
        rank = dim
    if not isinstance(rank, int) or not 1 <= rank <= dim:
        raise TypeError(f"Rank must be an integer in range(1, {dim + 1}), not {rank!r}")
    ginibre = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    matrix  = ginibre @ ginibre.conj().T
    return DensityMatrix(matrix / np.trace(matrix).real)


def choi_matrix(ch):
    """Unnormalized Choi matrix ``sum(vec(E) vec(E)†)`` with row-major ``vec``.

    Its first tensor factor is the output space and its second the input space, so tracing out
    the first factor yields the identity for a trace-preserving channel.
    """
    if not isinstance(ch, KrausChannel):
        raise TypeError(f"Channel must be an instance of KrausChannel, not {ch!r}")
    vectors = np.stack([op.reshape(-1) for op in ch.kraus_ops], axis=1)
    return vectors @ vectors.conj().T


def trace_norm(m):
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(_as_matrix(m, "Matrix"), compute_uv=False)))
