import argparse
import logging
import sys

from .. import __version__
from .config import ConfigError, Experiment, parse_config
from .experiments import run_experiment


__all__ = ["main"]


logger = logging.getLogger(__name__)


def _parser():
    parser = argparse.ArgumentParser(
        prog="kraus-vqa",
        description="Run an adversarial-entanglement experiment and write its results as CSV.")
    parser.add_argument(
        "experiment", choices=[experiment.value for experiment in Experiment],
        help="experiment to run")
    parser.add_argument(
        "--config", metavar="PATH",
        help="INI configuration file; defaults are used for missing keys")
    parser.add_argument(
        "--out", metavar="PATH",
        help="output CSV file (default: standard output)")
    parser.add_argument(
        "--seed", metavar="N",
        help="master seed; for vqe-run, the seed of the initial parameters")
    parser.add_argument(
        "--threads", metavar="N",
        help="worker threads per sweep point")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0,
        help="log progress (-v) or every Monte-Carlo point and iteration (-vv)")
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}")

    vqe = parser.add_argument_group("vqe-run options")
    vqe.add_argument(
        "--hamiltonian", metavar="PATH",
        help="Hamiltonian file, or the name of a packaged Hamiltonian")
    vqe.add_argument(
        "--kappa", metavar="R",
        help="concurrence of the shared pairs (comma-separated list allowed)")
    vqe.add_argument(
        "--layers", metavar="N",
        help="ansatz depth")
    vqe.add_argument(
        "--lr", metavar="R",
        help="learning rate")
    vqe.add_argument(
        "--iters", metavar="N",
        help="maximum number of gradient steps")
    return parser


def _overrides(args):
    experiment = Experiment(args.experiment)
    overrides = {
        "output":  args.out,
        "threads": args.threads,
    }
    if experiment == Experiment.VQE_RUN:
        overrides.update({
            "seeds":         args.seed,
            "hamiltonian":   args.hamiltonian,
            "kappa":         args.kappa,
            "depth":         args.layers,
            "learning_rate": args.lr,
            "iters":         args.iters,
        })
    else:
        overrides["master_seed"] = args.seed
        for flag, value in (("--hamiltonian", args.hamiltonian), ("--kappa", args.kappa),
                            ("--layers", args.layers), ("--lr", args.lr),
                            ("--iters", args.iters)):
            if value is not None:
                raise ConfigError([f"{flag} only applies to vqe-run"])
    return overrides


def main(argv=None):
    """Entry point of the ``kraus-vqa`` command.

    Returns the process exit status: 0 on success, 2 if the configuration is invalid.
    """
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level={0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        text = ""
        if args.config is not None:
            try:
                with open(args.config, encoding="utf-8") as f:
                    text = f.read()
            except OSError as exc:
                raise ConfigError([f"Cannot read configuration {args.config!r}: "
                                   f"{exc.strerror}"]) from None
        cfg = parse_config(text, args.experiment, overrides=_overrides(args))
        table = run_experiment(cfg)
    except ConfigError as exc:
        for message in exc.errors:
            print(f"kraus-vqa: error: {message}", file=sys.stderr)
        return 2

    csv_text = table.to_csv()
    if cfg["output"]:
        with open(cfg["output"], "w", encoding="utf-8", newline="") as f:
            f.write(csv_text)
        logger.info("Wrote %d rows to %s", len(table.rows), cfg["output"])
    else:
        sys.stdout.write(csv_text)
    return 0
