"""Experiment configuration.

Configurations are INI documents. Keys before the first section are shared by every experiment;
each experiment reads its own ``[experiment-name]`` section::

    master_seed = 7
    threads = 4

    [gradvar-depth]
    n = 6
    depth = 2..10
    kappa = 0.8, 0.9, 1.0

Lists are comma-separated, and integer lists also accept inclusive ranges ``a..b``.
"""

import configparser
import difflib
import enum
import math
from collections.abc import Mapping

from ..ansatz import Topology
from ..trainability import BOUND_MAX_QUBITS
from .defaults import SHARED_DEFAULTS, EXPERIMENT_DEFAULTS, MAX_QUBITS, MAX_DEPTH


__all__ = ["ConfigError", "Experiment", "ExperimentConfig", "parse_config"]


_SHARED = "shared"


class ConfigError(ValueError):
    """Invalid experiment configuration.

    All problems found are collected in :attr:`errors`, one message each.
    """
    def __init__(self, errors):
        self._errors = tuple(errors)
        super().__init__("\n".join(self._errors))

    @property
    def errors(self):
        return self._errors


class Experiment(enum.Enum):
    EXPRESSIBILITY_SWEEP      = "expressibility-sweep"
    GRADVAR_DEPTH             = "gradvar-depth"
    GRADVAR_CONCURRENCE       = "gradvar-concurrence"
    GRADVAR_QUBITS_RESTRICTED = "gradvar-qubits-restricted"
    VQE_RUN                   = "vqe-run"
    PROTOCOL_VERIFY           = "protocol-verify"
    BOUND_CHECK               = "bound-check"


def _integer(minimum, maximum=None):
    if maximum is None:
        requirement = f"an integer of at least {minimum}"
    else:
        requirement = f"an integer between {minimum} and {maximum}"

    def parse(text):
        try:
            value = int(text)
        except ValueError:
            value = None
        if value is None or value < minimum or (maximum is not None and value > maximum):
            raise ValueError(f"must be {requirement}, not {text!r}")
        return value
    return parse


def _real(minimum, maximum=None, *, open_minimum=False):
    if maximum is None:
        requirement = f"a real number {'above' if open_minimum else 'of at least'} {minimum}"
    else:
        requirement = (f"a real number in {'(' if open_minimum else '['}{minimum}, "
                       f"{maximum}]")

    def parse(text):
        try:
            value = float(text)
        except ValueError:
            value = math.nan
        if (not math.isfinite(value) or value < minimum or (open_minimum and value == minimum)
                or (maximum is not None and value > maximum)):
            raise ValueError(f"must be {requirement}, not {text!r}")
        return value
    return parse


def _choice(values):
    values = tuple(values)

    def parse(text):
        if text not in values:
            raise ValueError(f"must be one of {', '.join(map(repr, values))}, not {text!r}")
        return text
    return parse


def _text(text):
    return text


def _param_index(text):
    if text in ("first", "last"):
        return text
    try:
        value = int(text)
    except ValueError:
        value = -1
    if value < 0:
        raise ValueError(f"must be 'first', 'last' or a non-negative integer, not {text!r}")
    return value


class _Field:
    def __init__(self, parse_item, *, many=False, ranges=False):
        self._parse_item = parse_item
        self._many       = many
        self._ranges     = ranges

    def parse(self, text):
        text = text.strip()
        if not self._many:
            return self._parse_item(text)
        values = []
        for item in text.split(","):
            item = item.strip()
            if self._ranges and ".." in item:
                first, last = (self._parse_item(bound.strip()) for bound in item.split("..", 1))
                if last < first:
                    raise ValueError(f"must not contain the empty range {item!r}")
                values.extend(range(first, last + 1))
            else:
                values.append(self._parse_item(item))
        return tuple(values)

    def format(self, value):
        if isinstance(value, (tuple, list)):
            return ", ".join(map(self._format_item, value))
        return self._format_item(value)

    @staticmethod
    def _format_item(item):
        if isinstance(item, float):
            return repr(item)
        return str(item)

    def normalize(self, value):
        if isinstance(value, str):
            return self.parse(value)
        return self.parse(self.format(value))


_SHARED_SCHEMA = {
    "master_seed": _Field(_integer(0)),
    "threads":     _Field(_integer(1)),
    "output":      _Field(_text),
}

_QUBITS       = _integer(2, MAX_QUBITS)
_DEPTH        = _integer(1, MAX_DEPTH)
_TRIALS       = _integer(2)
_CONCURRENCE  = _real(0, 1)
_TOPOLOGY     = _Field(_choice(topology.value for topology in Topology))

_SCHEMAS = {
    Experiment.EXPRESSIBILITY_SWEEP: {
        "n":              _Field(_QUBITS),
        "depth":          _Field(_DEPTH, many=True, ranges=True),
        "kappa":          _Field(_CONCURRENCE, many=True),
        "trials":         _Field(_TRIALS),
        "mode":           _Field(_choice(("ensemble", "fixed"))),
        "topology":       _TOPOLOGY,
    },
    Experiment.GRADVAR_DEPTH: {
        "n":              _Field(_QUBITS),
        "depth":          _Field(_DEPTH, many=True, ranges=True),
        "kappa":          _Field(_CONCURRENCE, many=True),
        "param_index":    _Field(_param_index),
        "trials":         _Field(_TRIALS),
        "topology":       _TOPOLOGY,
    },
    Experiment.GRADVAR_CONCURRENCE: {
        "n":              _Field(_QUBITS),
        "depth":          _Field(_DEPTH, many=True, ranges=True),
        "kappa":          _Field(_CONCURRENCE, many=True),
        "param_index":    _Field(_param_index),
        "trials":         _Field(_TRIALS),
        "topology":       _TOPOLOGY,
    },
    Experiment.GRADVAR_QUBITS_RESTRICTED: {
        "n":              _Field(_QUBITS, many=True, ranges=True),
        "depth":          _Field(_DEPTH),
        "kappa":          _Field(_CONCURRENCE, many=True),
        "r":              _Field(_real(0, 1, open_minimum=True), many=True),
        "param_index":    _Field(_param_index),
        "trials":         _Field(_TRIALS),
        "topology":       _TOPOLOGY,
    },
    Experiment.VQE_RUN: {
        "hamiltonian":    _Field(_text),
        "depth":          _Field(_DEPTH),
        "kappa":          _Field(_CONCURRENCE, many=True),
        "learning_rate":  _Field(_real(0, open_minimum=True)),
        "iters":          _Field(_integer(0)),
        "grad_tolerance": _Field(_real(0, open_minimum=True)),
        "seeds":          _Field(_integer(0), many=True, ranges=True),
        "topology":       _TOPOLOGY,
    },
    Experiment.PROTOCOL_VERIFY: {
        "grid_points":    _Field(_integer(2)),
        "random_pairs":   _Field(_integer(0)),
        "inputs":         _Field(_integer(1)),
    },
    Experiment.BOUND_CHECK: {
        "n":              _Field(_integer(2, BOUND_MAX_QUBITS)),
        "depth":          _Field(_DEPTH, many=True, ranges=True),
        "kappa":          _Field(_CONCURRENCE, many=True),
        "param_index":    _Field(_param_index, many=True),
        "trials":         _Field(_TRIALS),
        "norm_trials":    _Field(_TRIALS),
        "topology":       _TOPOLOGY,
    },
}

_ALL_KEYS = sorted({*_SHARED_SCHEMA, *(key for schema in _SCHEMAS.values() for key in schema)})


def _schema(experiment):
    return {**_SHARED_SCHEMA, **_SCHEMAS[experiment]}


def _suggest(name, candidates):
    matches = difflib.get_close_matches(name, list(candidates), n=1)
    if matches:
        return f"; did you mean {matches[0]!r}?"
    return ""


def _unknown_experiment(name):
    return f"Unknown experiment {name!r}{_suggest(str(name), (e.value for e in Experiment))}"


def _as_tuple(value):
    return value if isinstance(value, tuple) else (value,)


def _check_param_indices(experiment, values):
    if "param_index" not in values:
        return []
    indices = [index for index in _as_tuple(values["param_index"]) if isinstance(index, int)]
    if not indices:
        return []
    param_count = 2 * min(_as_tuple(values["n"])) * min(_as_tuple(values["depth"]))
    return [f"{experiment.value}: param_index {index} is out of range for the smallest sweep "
            f"point, which has {param_count} parameters"
            for index in indices if index >= param_count]


class ExperimentConfig(Mapping):
    """Validated settings of one experiment.

    The mapping holds every effective value, defaults included. Values given as strings are
    parsed with the same rules as configuration files; other values are checked against them.

    Parameters
    ----------
    experiment : :class:`Experiment`
        Experiment to run.
    values : :class:`dict` of :class:`str` to object
        Explicit settings; missing keys take their defaults.

    Raises
    ------
    :exc:`ConfigError`
        Listing every unknown key, missing required key and invalid value.
    """
    def __init__(self, experiment, values=None):
        try:
            experiment = Experiment(experiment)
        except ValueError:
            raise ConfigError([_unknown_experiment(experiment)]) from None
        schema   = _schema(experiment)
        defaults = {**SHARED_DEFAULTS, **EXPERIMENT_DEFAULTS[experiment.value]}
        values   = dict(values or {})

        errors = []
        for key in values:
            if key not in schema:
                errors.append(f"{experiment.value}: unknown key {key!r}{_suggest(key, schema)}")

        effective = {}
        for key, field in schema.items():
            if key in values:
                value = values[key]
            elif key in defaults:
                value = defaults[key]
            else:
                errors.append(f"{experiment.value}: {key} is required")
                continue
            try:
                effective[key] = field.normalize(value)
            except ValueError as exc:
                errors.append(f"{experiment.value}: {key} {exc}")

        if not errors:
            errors += _check_param_indices(experiment, effective)
        if errors:
            raise ConfigError(errors)

        self._experiment = experiment
        self._values     = effective

    @property
    def experiment(self):
        return self._experiment

    def __getitem__(self, key):
        return self._values[key]

    def __iter__(self):
        yield from self._values

    def __len__(self):
        return len(self._values)

    def __eq__(self, other):
        if not isinstance(other, ExperimentConfig):
            return NotImplemented
        return self._experiment == other._experiment and self._values == other._values

    __hash__ = None

    def replace(self, **changes):
        """Copy with some values changed."""
        return ExperimentConfig(self._experiment, {**self._values, **changes})

    def formatted(self):
        """Every effective value in configuration file syntax."""
        schema = _schema(self._experiment)
        return {key: schema[key].format(value) for key, value in self._values.items()}

    def echo(self):
        """Configuration document that parses back to an equal configuration."""
        lines = [f"[{self._experiment.value}]"]
        for key, text in self.formatted().items():
            lines.append(f"{key} = {text}".rstrip())
        return "\n".join(lines) + "\n"

    def metadata(self):
        """Result metadata entries ``config.<key>``."""
        return {
            "config.experiment": self._experiment.value,
            **{f"config.{key}": text for key, text in self.formatted().items()},
        }

    @classmethod
    def from_metadata(cls, metadata):
        """Rebuild a configuration from the entries of :meth:`metadata`."""
        values = {key[len("config."):]: text for key, text in metadata.items()
                  if key.startswith("config.") and key != "config.experiment"}
        if "config.experiment" not in metadata:
            raise ConfigError(["Metadata does not name an experiment"])
        return cls(metadata["config.experiment"], values)

    def __repr__(self):
        return f"ExperimentConfig({self._experiment.value!r}, {self._values!r})"


def parse_config(text, experiment=None, *, overrides=None):
    """Parse a configuration document.

    Arguments
    ---------
    text : str
        INI document.
    experiment : :class:`Experiment` or str or None
        Experiment to configure. May be omitted if the document has exactly one experiment
        section.
    overrides : dict of str to object
        Values that take precedence over the document, such as command line flags. ``None``
        values are ignored.

    Return value
    ------------
    An :class:`ExperimentConfig`.

    Exceptions
    ----------
    Raises :exn:`ConfigError` listing every problem found: malformed syntax, unknown sections and
    keys (with the closest valid name), invalid values and missing required keys.
    """
    if not isinstance(text, str):
        raise TypeError(f"Configuration document must be a string, not {text!r}")
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(f"[{_SHARED}]\n{text}")
    except configparser.Error as exc:
        raise ConfigError([f"Configuration is malformed: {exc}"]) from None

    errors = []
    if parser.defaults():
        errors.append("Section [DEFAULT] is not supported; place shared keys before the first "
                      "section")
    shared = dict(parser[_SHARED])
    for key in shared:
        if key not in _ALL_KEYS:
            errors.append(f"Unknown key {key!r}{_suggest(key, _ALL_KEYS)}")

    sections = {}
    for name in parser.sections():
        if name == _SHARED:
            continue
        try:
            section = Experiment(name)
        except ValueError:
            errors.append(f"Unknown section [{name}]"
                          f"{_suggest(name, (e.value for e in Experiment))}")
            continue
        sections[section] = dict(parser[name])
        schema = _schema(section)
        for key in sections[section]:
            if key not in schema:
                errors.append(f"{name}: unknown key {key!r}{_suggest(key, schema)}")

    if experiment is None:
        if len(sections) == 1:
            experiment, = sections
        else:
            errors.append(f"Experiment must be named when the configuration has "
                          f"{len(sections)} experiment sections")
    else:
        try:
            experiment = Experiment(experiment)
        except ValueError:
            errors.append(_unknown_experiment(experiment))
    if errors:
        raise ConfigError(errors)

    schema = _schema(experiment)
    values = {key: value for key, value in shared.items() if key in schema}
    values.update(sections.get(experiment, {}))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return ExperimentConfig(experiment, values)
