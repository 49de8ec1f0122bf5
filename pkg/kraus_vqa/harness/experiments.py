"""Experiment drivers.

Every sweep point draws its randomness from its own seed, derived from the master seed, the
experiment name and the indices of the point's coordinates; the seed is written into the row so
that a single point can be re-run alone.
"""

import logging
import pathlib

import numpy as np

from .. import __version__
from ..qcore import random_density_matrix, random_pure_state
from ..adversary import PerturbationParams, family_from_concurrence
from ..protocol import max_channel_deviation
from ..ansatz import ParamInit, build_hea
from ..expressibility import AnsatzEnsemble, kraus_norm_ensemble, kraus_norm_snapshots
from ..trainability import grad_variance, variance_deviation_bound
from ..vqe import (OptimizerConfig, exact_ground_energy, load_hamiltonian_file,
                   packaged_hamiltonian, run_vqe, MAX_QUBITS as VQE_MAX_QUBITS)
from .._trials import map_trials
from .config import ConfigError, Experiment, ExperimentConfig
from .defaults import initial_state, local_cost_observable
from .seeding import point_seed
from .table import ResultTable


__all__ = ["run_experiment", "resolve_param_index", "load_experiment_hamiltonian"]


logger = logging.getLogger(__name__)


def resolve_param_index(index, param_count):
    """Map ``"first"`` and ``"last"`` to parameter indices."""
    if index == "first":
        return 0
    if index == "last":
        return param_count - 1
    return index


def load_experiment_hamiltonian(name):
    """Read a Hamiltonian file, or the packaged Hamiltonian ``name`` if no such file exists.

    Exceptions
    ----------
    Raises :exn:`ConfigError` if neither can be read or the Hamiltonian is too small or too large
    for the experiments.
    """
    try:
        if pathlib.Path(name).is_file():
            h = load_hamiltonian_file(name)
        else:
            h = packaged_hamiltonian(name)
    except (OSError, ValueError) as exc:
        raise ConfigError([f"vqe-run: hamiltonian {name!r} cannot be loaded: {exc}"]) from None
    if not 2 <= h.n <= VQE_MAX_QUBITS:
        raise ConfigError([f"vqe-run: hamiltonian must act on 2 to {VQE_MAX_QUBITS} qubits, "
                           f"not {h.n}"])
    return h


def _expressibility_sweep(cfg, seed_of):
    n, trials = cfg["n"], cfg["trials"]
    rho0 = initial_state(n)
    header = ("n", "depth", "kappa", "delta_sq", "std_err", "nu_bar", "n_noise", "trials",
              "seed")
    fixed = cfg["mode"] == "fixed"
    estimator = kraus_norm_snapshots if fixed else kraus_norm_ensemble
    rows = []
    for i, depth in enumerate(cfg["depth"]):
        for j, kappa in enumerate(cfg["kappa"]):
            # Fixed parameters are shared by every kappa at a given depth.
            seed = seed_of(i) if fixed else seed_of(i, j)
            ensemble = AnsatzEnsemble(build_hea(n, depth, kappa, cfg["topology"]))
            estimate = estimator(ensemble, rho0, trials, np.random.default_rng(seed),
                                 threads=cfg["threads"])
            logger.info("%s depth=%d kappa=%r: delta_sq=%.6g ± %.2g",
                        cfg["mode"], depth, kappa, estimate.delta_sq, estimate.std_err)
            rows.append((n, depth, kappa, estimate.delta_sq, estimate.std_err, estimate.nu_bar,
                         estimate.n_noise, trials, seed))
    return header, rows, {}


def _gradient_row(cfg, n, depth, kappa, init, seed):
    ansatz = build_hea(n, depth, kappa, cfg["topology"])
    k = resolve_param_index(cfg["param_index"], ansatz.param_count)
    stats = grad_variance(ansatz, init, initial_state(n), local_cost_observable(n), k,
                          cfg["trials"], np.random.default_rng(seed), threads=cfg["threads"])
    logger.info("n=%d depth=%d kappa=%r r=%r: variance=%.6g ± %.2g",
                n, depth, kappa, init.r, stats.variance, stats.std_err_variance)
    return stats


def _gradvar_depth(cfg, seed_of):
    n, trials = cfg["n"], cfg["trials"]
    header = ("n", "depth", "kappa", "variance", "std_err", "mean", "trials", "seed")
    rows = []
    for i, depth in enumerate(cfg["depth"]):
        for j, kappa in enumerate(cfg["kappa"]):
            seed = seed_of(i, j)
            stats = _gradient_row(cfg, n, depth, kappa, ParamInit(), seed)
            rows.append((n, depth, kappa, stats.variance, stats.std_err_variance, stats.mean,
                         trials, seed))
    return header, rows, {}


def _gradvar_concurrence(cfg, seed_of):
    n, trials = cfg["n"], cfg["trials"]
    header = ("n", "kappa", "depth", "variance", "std_err", "mean", "trials", "seed")
    rows = []
    for i, kappa in enumerate(cfg["kappa"]):
        for j, depth in enumerate(cfg["depth"]):
            seed = seed_of(i, j)
            stats = _gradient_row(cfg, n, depth, kappa, ParamInit(), seed)
            rows.append((n, kappa, depth, stats.variance, stats.std_err_variance, stats.mean,
                         trials, seed))
    return header, rows, {}


def _gradvar_qubits_restricted(cfg, seed_of):
    depth, trials = cfg["depth"], cfg["trials"]
    header = ("n", "r", "kappa", "variance", "std_err", "mean", "trials", "seed")
    rows = []
    for i, kappa in enumerate(cfg["kappa"]):
        for j, r in enumerate(cfg["r"]):
            init = ParamInit.from_width(r, seed=cfg["master_seed"])
            for m, n in enumerate(cfg["n"]):
                seed = seed_of(i, j, m)
                stats = _gradient_row(cfg, n, depth, kappa, init, seed)
                rows.append((n, r, kappa, stats.variance, stats.std_err_variance, stats.mean,
                             trials, seed))
    return header, rows, {}


def _vqe_run(cfg, seed_of):
    h = load_experiment_hamiltonian(cfg["hamiltonian"])
    ground = exact_ground_energy(h)
    runs = [(kappa, seed) for kappa in cfg["kappa"] for seed in cfg["seeds"]]

    def run(job):
        kappa, seed = job
        ansatz = build_hea(h.n, cfg["depth"], kappa, cfg["topology"])
        opt = OptimizerConfig(cfg["learning_rate"], cfg["iters"], cfg["grad_tolerance"], seed)
        return run_vqe(h, ansatz, opt)

    records = map_trials(run, runs, cfg["threads"])
    header = ("kappa", "seed", "iteration", "energy", "grad_norm")
    rows, metadata = [], {"result.ground_energy": repr(ground)}
    for (kappa, seed), record in zip(runs, records):
        logger.info("kappa=%r seed=%d: final energy %.12g, bias %.3g",
                    kappa, seed, record.final_energy, record.bias)
        rows.extend((kappa, seed, *iteration) for iteration in record.iterations)
        metadata[f"result.final_energy.kappa={kappa!r}.seed={seed}"] = repr(record.final_energy)
        metadata[f"result.bias.kappa={kappa!r}.seed={seed}"] = repr(record.bias)
    return header, rows, metadata


def _protocol_verify(cfg, seed_of):
    header = ("family", "bells", "inputs", "max_deviation", "seed")
    families = (
        ("symmetric", cfg["grid_points"],
         lambda rng: [family_from_concurrence(kappa)
                      for kappa in np.linspace(0, 1, cfg["grid_points"])]),
        ("random", cfg["random_pairs"],
         lambda rng: [PerturbationParams.from_statevector(random_pure_state(4, rng))
                      for _ in range(cfg["random_pairs"])]),
    )
    rows = []
    for i, (family, count, make_bells) in enumerate(families):
        seed = seed_of(i)
        rng = np.random.default_rng(seed)
        bells = make_bells(rng)
        inputs = [random_density_matrix(4, rng) for _ in range(cfg["inputs"])]
        deviation = max_channel_deviation(bells, inputs)
        logger.info("%s family: max deviation %.3g over %d pairs", family, deviation, count)
        rows.append((family, count, cfg["inputs"], deviation, seed))
    return header, rows, {}


def _bound_check(cfg, seed_of):
    n, trials = cfg["n"], cfg["trials"]
    rho0, obs = initial_state(n), local_cost_observable(n)
    header = ("n", "depth", "kappa", "param_index", "lhs", "rhs", "satisfied", "trials", "seed")
    rows = []
    for i, depth in enumerate(cfg["depth"]):
        for j, kappa in enumerate(cfg["kappa"]):
            ansatz = build_hea(n, depth, kappa, cfg["topology"])
            for m, index in enumerate(cfg["param_index"]):
                seed = seed_of(i, j, m)
                k = resolve_param_index(index, ansatz.param_count)
                report = variance_deviation_bound(ansatz, ParamInit(), rho0, obs, k, trials,
                                                  np.random.default_rng(seed),
                                                  norm_trials=cfg["norm_trials"],
                                                  threads=cfg["threads"])
                logger.info("depth=%d kappa=%r k=%d: %r", depth, kappa, k, report)
                rows.append((n, depth, kappa, k, report.lhs, report.rhs, report.satisfied,
                             trials, seed))
    metadata = {"result.satisfied": "true" if all(row[6] for row in rows) else "false"}
    return header, rows, metadata


_DRIVERS = {
    Experiment.EXPRESSIBILITY_SWEEP:      _expressibility_sweep,
    Experiment.GRADVAR_DEPTH:             _gradvar_depth,
    Experiment.GRADVAR_CONCURRENCE:       _gradvar_concurrence,
    Experiment.GRADVAR_QUBITS_RESTRICTED: _gradvar_qubits_restricted,
    Experiment.VQE_RUN:                   _vqe_run,
    Experiment.PROTOCOL_VERIFY:           _protocol_verify,
    Experiment.BOUND_CHECK:               _bound_check,
}


def run_experiment(cfg):
    """Run the experiment described by ``cfg``.

    The result depends only on the configuration, never on ``threads``.

    Return value
    ------------
    A :class:`ResultTable` whose metadata echoes every configuration value, the package version
    and experiment-level results.
    """
    if not isinstance(cfg, ExperimentConfig):
        raise TypeError(f"Configuration must be an instance of ExperimentConfig, not {cfg!r}")
    experiment = cfg.experiment

    def seed_of(*key):
        return point_seed(cfg["master_seed"], experiment.value, *key)

    logger.info("Running %s", experiment.value)
    header, rows, results = _DRIVERS[experiment](cfg, seed_of)
    metadata = {"version": __version__, **cfg.metadata(), **results}
    return ResultTable(header, rows, metadata=metadata)
