import math

import numpy as np

from ..qcore import DensityMatrix, Observable


__all__ = [
    "INITIAL_ANGLE", "DEFAULT_TRIALS", "MAX_QUBITS", "MAX_DEPTH", "SHARED_DEFAULTS",
    "EXPERIMENT_DEFAULTS",
    "initial_state", "local_cost_observable",
]


# Every experiment qubit starts in exp(-iπσ_Y/8)|0>.
INITIAL_ANGLE = math.pi / 8

DEFAULT_TRIALS = 100

# Dense simulation of 2**n by 2**n density matrices.
MAX_QUBITS = 10
MAX_DEPTH  = 200


SHARED_DEFAULTS = {
    "master_seed": 0,
    "threads":     1,
    "output":      "",
}

# Sweep defaults per experiment. `hamiltonian` of vqe-run has no default.
EXPERIMENT_DEFAULTS = {
    "expressibility-sweep": {
        "n":              6,
        "depth":          (1, 2, 3, 4, 5, 6, 7, 8, 9, 10),
        "kappa":          (0.8, 0.9, 1.0),
        "trials":         DEFAULT_TRIALS,
        "mode":           "ensemble",
        "topology":       "ladder",
    },
    # At depth 1 the ideal ladder maps Z₁Z₂ onto the second qubit alone, so the first gradient is 0.
    "gradvar-depth": {
        "n":              6,
        "depth":          (2, 3, 4, 5, 6, 7, 8, 9, 10),
        "kappa":          (0.8, 0.9, 1.0),
        "param_index":    "first",
        "trials":         DEFAULT_TRIALS,
        "topology":       "ladder",
    },
    "gradvar-concurrence": {
        "n":              6,
        "depth":          (10,),
        "kappa":          (0.5, 0.6, 0.7, 0.8, 0.9, 1.0),
        "param_index":    "first",
        "trials":         DEFAULT_TRIALS,
        "topology":       "ladder",
    },
    "gradvar-qubits-restricted": {
        "n":              (2, 4, 6),
        "depth":          10,
        "kappa":          (0.8, 0.9, 1.0),
        "r":              (1.0, 0.1, 0.01),
        "param_index":    "first",
        "trials":         DEFAULT_TRIALS,
        "topology":       "ladder",
    },
    "vqe-run": {
        "depth":          3,
        "kappa":          (1.0,),
        "learning_rate":  0.1,
        "iters":          500,
        "grad_tolerance": 1e-6,
        "seeds":          (0,),
        "topology":       "ladder",
    },
    "protocol-verify": {
        "grid_points":    20,
        "random_pairs":   50,
        "inputs":         20,
    },
    "bound-check": {
        "n":              2,
        "depth":          (2, 4),
        "kappa":          (0.8, 0.9, 1.0),
        "param_index":    ("first", "last"),
        "trials":         DEFAULT_TRIALS,
        "norm_trials":    400,
        "topology":       "ladder",
    },
}


def initial_state(n):
    """``|ψ₀>^⊗n`` with ``|ψ₀> = cos(π/8)|0> + sin(π/8)|1>``."""
    psi0 = np.array([math.cos(INITIAL_ANGLE), math.sin(INITIAL_ANGLE)], dtype=complex)
    return DensityMatrix.product(*(DensityMatrix.from_statevector(psi0) for _ in range(n)))


def local_cost_observable(n):
    """``Z ⊗ Z`` on the first two qubits, identity elsewhere."""
    return Observable.pauli("ZZ" + "I" * (n - 2))
