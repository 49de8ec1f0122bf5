"""Variational eigensolver running on a noisy ansatz.

Hamiltonians are read from a line-based text format::

    # source: where the coefficients come from
    # ground_energy: -1.137270174660902
    -0.0988639693354571 IIII
    0.17119774903432955 ZIII

Each non-comment line holds a decimal coefficient followed by a Pauli word over ``I, X, Y, Z``;
spaces inside the word are ignored. Comment lines of the form ``# key: value`` are kept as
metadata.
"""

import functools
import importlib.resources
import logging
import math
import numbers
import re

import numpy as np
import scipy.linalg

from .qcore import DensityMatrix, Observable, _PAULIS
from .ansatz import ParamInit, sample_params, _check_ansatz, _check_state
from .trainability import _energy_and_gradient


__all__ = [
    "PauliTermHamiltonian", "OptimizerConfig", "TrajectoryRecord",
    "load_hamiltonian", "load_hamiltonian_file", "packaged_hamiltonian",
    "exact_ground_energy", "run_vqe",
]


logger = logging.getLogger(__name__)


MAX_QUBITS = 10

_METADATA = re.compile(r"#\s*(?P<key>[A-Za-z_][\w.-]*)\s*:\s*(?P<value>.*)$")


class PauliTermHamiltonian:
    """Real linear combination of Pauli words.

    Parameters
    ----------
    n : int
        Number of qubits.
    terms : iterable of (float, str)
        Coefficient and Pauli word of every term; the first letter of a word acts on qubit 0.
    metadata : dict of str to str
        Free-form provenance, such as the stated ground energy.
    """
    def __init__(self, n, terms, *, metadata=None):
        if not isinstance(n, int) or n < 1:
            raise TypeError(f"Qubit count must be a positive integer, not {n!r}")
        checked = []
        for coefficient, word in terms:
            if not isinstance(coefficient, numbers.Real) or isinstance(coefficient, bool):
                raise TypeError(f"Coefficient must be a real number, not {coefficient!r}")
            if not isinstance(word, str) or len(word) != n or set(word) - set(_PAULIS):
                raise ValueError(f"Pauli word must be a string of {n} letters over I, X, Y, Z, "
                                 f"not {word!r}")
            checked.append((float(coefficient), word))
        if not checked:
            raise ValueError("Hamiltonian must have at least one term")

        self._n        = n
        self._terms    = tuple(checked)
        self._metadata = dict(metadata or {})

    @property
    def n(self):
        return self._n

    @property
    def dim(self):
        return 2 ** self._n

    @property
    def terms(self):
        return self._terms

    @property
    def metadata(self):
        return dict(self._metadata)

    @functools.cached_property
    def _matrix(self):
        matrix = np.zeros((self.dim, self.dim), dtype=complex)
        for coefficient, word in self._terms:
            matrix += coefficient * functools.reduce(np.kron, (_PAULIS[p] for p in word))
        matrix.setflags(write=False)
        return matrix

    def matrix(self):
        """Dense ``2**n`` by ``2**n`` matrix."""
        return self._matrix

    def observable(self):
        return Observable(self._matrix)

    @functools.cached_property
    def _spectrum_bounds(self):
        eigenvalues = scipy.linalg.eigvalsh(self._matrix)
        return float(eigenvalues[0]), float(eigenvalues[-1])

    def spectrum_bounds(self):
        """Smallest and largest eigenvalue."""
        return self._spectrum_bounds

    def __repr__(self):
        return f"PauliTermHamiltonian(n={self._n}, terms={len(self._terms)})"


class OptimizerConfig:
    """Settings of plain gradient descent.

    Parameters
    ----------
    learning_rate : float
        Step size.
    max_iters : int
        Maximum number of parameter updates.
    grad_tolerance : float
        Descent stops once the largest gradient component falls below this value.
    seed : int
        Seed of the initial parameters.
    """
    def __init__(self, learning_rate=0.1, max_iters=500, grad_tolerance=1e-6, seed=0):
        if not isinstance(learning_rate, numbers.Real) or not learning_rate > 0:
            raise ValueError(f"Learning rate must be a positive real number, "
                             f"not {learning_rate!r}")
        if not isinstance(max_iters, int) or max_iters < 0:
            raise TypeError(f"Iteration count must be a non-negative integer, "
                            f"not {max_iters!r}")
        if not isinstance(grad_tolerance, numbers.Real) or not grad_tolerance > 0:
            raise ValueError(f"Gradient tolerance must be a positive real number, "
                             f"not {grad_tolerance!r}")
        if not isinstance(seed, int) or seed < 0:
            raise TypeError(f"Seed must be a non-negative integer, not {seed!r}")
        self._learning_rate  = float(learning_rate)
        self._max_iters      = max_iters
        self._grad_tolerance = float(grad_tolerance)
        self._seed           = seed

    @property
    def learning_rate(self):
        return self._learning_rate

    @property
    def max_iters(self):
        return self._max_iters

    @property
    def grad_tolerance(self):
        return self._grad_tolerance

    @property
    def seed(self):
        return self._seed


class TrajectoryRecord:
    """Course of one optimization run.

    ``iterations`` holds ``(iteration, energy, grad_norm)`` for the starting point and after each
    update; ``grad_norm`` is the largest absolute gradient component.
    """
    def __init__(self, iterations, ground_energy_exact, final_theta):
        self._iterations          = tuple(iterations)
        self._ground_energy_exact = float(ground_energy_exact)
        self._final_theta         = np.array(final_theta, dtype=float)
        self._final_theta.setflags(write=False)

    @property
    def iterations(self):
        return self._iterations

    @property
    def final_energy(self):
        return self._iterations[-1][1]

    @property
    def ground_energy_exact(self):
        return self._ground_energy_exact

    @property
    def bias(self):
        return self.final_energy - self._ground_energy_exact

    @property
    def final_theta(self):
        return self._final_theta

    def __repr__(self):
        return (f"TrajectoryRecord(iterations={len(self._iterations)}, "
                f"final_energy={self.final_energy:.9g}, bias={self.bias:.3g})")


def load_hamiltonian(text):
    """Parse a Hamiltonian document.

    Exceptions
    ----------
    Raises :exn:`ValueError` naming the line number if a line is malformed or its Pauli word has
    a different length than the previous ones, and if the document has no terms.
    """
    if not isinstance(text, str):
        raise TypeError(f"Hamiltonian document must be a string, not {text!r}")
    terms, metadata, n = [], {}, None
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            match = _METADATA.match(line)
            if match:
                metadata[match.group("key")] = match.group("value").strip()
            continue

        line = line.split("#", 1)[0]
        fields = line.split(None, 1)
        if len(fields) != 2:
            raise ValueError(f"Line {line_number}: expected '<coefficient> <pauli word>', "
                             f"not {raw!r}")
        try:
            coefficient = float(fields[0])
        except ValueError:
            raise ValueError(f"Line {line_number}: coefficient must be a decimal number, "
                             f"not {fields[0]!r}") from None
        if not math.isfinite(coefficient):
            raise ValueError(f"Line {line_number}: coefficient must be finite, "
                             f"not {fields[0]!r}")
        word = "".join(fields[1].split()).upper()
        if set(word) - set(_PAULIS):
            raise ValueError(f"Line {line_number}: Pauli word must consist of I, X, Y, Z, "
                             f"not {fields[1]!r}")
        if n is None:
            n = len(word)
        elif len(word) != n:
            raise ValueError(f"Line {line_number}: Pauli word {word!r} acts on {len(word)} "
                             f"qubits, but the previous terms act on {n}")
        terms.append((coefficient, word))

    if not terms:
        raise ValueError("Hamiltonian document has no terms")
    return PauliTermHamiltonian(n, terms, metadata=metadata)


def load_hamiltonian_file(path):
    with open(path, encoding="utf-8") as f:
        return load_hamiltonian(f.read())


def packaged_hamiltonian(name):
    """Hamiltonian shipped in the ``kraus_vqa.data`` package, e.g. ``h2_sto3g_jw.txt``."""
    resource = importlib.resources.files("kraus_vqa.data").joinpath(name)
    if not resource.is_file():
        raise ValueError(f"No packaged Hamiltonian named {name!r}")
    return load_hamiltonian(resource.read_text(encoding="utf-8"))


def exact_ground_energy(h, *, max_qubits=MAX_QUBITS):
    """Smallest eigenvalue by dense diagonalization.

    Exceptions
    ----------
    Raises :exn:`ValueError` if ``h`` acts on more than ``max_qubits`` qubits.
    """
    if not isinstance(h, PauliTermHamiltonian):
        raise TypeError(f"Hamiltonian must be an instance of PauliTermHamiltonian, not {h!r}")
    if h.n > max_qubits:
        raise ValueError(f"Exact diagonalization is limited to {max_qubits} qubits, not {h.n}")
    return float(scipy.linalg.eigvalsh(h.matrix(), subset_by_index=[0, 0])[0])


def run_vqe(h, ansatz, opt, rho0=None):
    """Minimize ``Tr(H E_θ(ρ₀))`` by gradient descent.

    The initial parameters are uniform on ``[0, 2π)``, drawn from ``opt.seed``. Every iteration
    evaluates the energy and the full analytic gradient, stops if the largest gradient component
    is below ``opt.grad_tolerance`` or ``opt.max_iters`` updates were made, and otherwise steps
    against the gradient.

    Arguments
    ---------
    h : :class:`PauliTermHamiltonian`
        Hamiltonian to minimize.
    ansatz : :class:`PQChAnsatz`
        Ansatz on ``h.n`` qubits.
    opt : :class:`OptimizerConfig`
        Optimizer settings.
    rho0 : :class:`DensityMatrix` or None
        Input state; ``|0...0>`` by default.

    Return value
    ------------
    A :class:`TrajectoryRecord`.
    """
    if not isinstance(h, PauliTermHamiltonian):
        raise TypeError(f"Hamiltonian must be an instance of PauliTermHamiltonian, not {h!r}")
    _check_ansatz(ansatz)
    if not isinstance(opt, OptimizerConfig):
        raise TypeError(f"Optimizer configuration must be an instance of OptimizerConfig, "
                        f"not {opt!r}")
    if ansatz.n != h.n:
        raise ValueError(f"Ansatz acts on {ansatz.n} qubits, but the Hamiltonian on {h.n}")
    if rho0 is None:
        rho0 = DensityMatrix.basis("0" * h.n)
    _check_state(ansatz, rho0)

    obs = h.observable()
    lowest, highest = h.spectrum_bounds()
    theta = sample_params(ansatz, ParamInit(), np.random.default_rng(opt.seed))
    iterations = []
    for iteration in range(opt.max_iters + 1):
        energy, gradient = _energy_and_gradient(ansatz, theta, rho0, obs)
        assert lowest - 1e-9 <= energy <= highest + 1e-9
        grad_norm = float(np.max(np.abs(gradient))) if gradient.size else 0.0
        iterations.append((iteration, energy, grad_norm))
        logger.debug("Iteration %d: energy=%.12g, grad_norm=%.3g", iteration, energy, grad_norm)
        if grad_norm < opt.grad_tolerance or iteration == opt.max_iters:
            break
        theta = theta - opt.learning_rate * gradient

    record = TrajectoryRecord(iterations, exact_ground_energy(h), theta)
    logger.info("Gradient descent finished after %d iterations: energy=%.12g, bias=%.3g",
                len(iterations) - 1, record.final_energy, record.bias)
    return record
