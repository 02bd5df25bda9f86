# Configuration for the symmetric-top toolkit
"""Tool settings (symtop.ini) and the JSON experiment configuration."""

import configparser
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .errors import ConfigError


# Default config values
DEFAULTS = {
    'performance': {
        'max_workers': '4',
        'reserved_core_count': '1',
    },
    'closure': {
        'rank_tol': '1e-9',
        'max_iterations': '200',
        'batch_size': '512',
        'allow_large_blocks': 'false',
    },
    'quadrature': {
        'alpha_nodes': '64',
        'gamma_nodes': '64',
        'beta_nodes': '32',
    },
    'output': {
        'float_digits': '17',
        'trace_stride': '10',
    },
}

# Configuration parameter descriptions for the ini file
COMMENTS = {
    'max_workers': '# Upper bound on worker threads for block closures and Monte Carlo samples.',
    'reserved_core_count': '# Number of CPU threads kept free for the OS/background tasks.',
    'rank_tol': '# Relative threshold below which a bracket direction counts as dependent.',
    'max_iterations': '# Bracket rounds before a closure is reported as incomplete.',
    'allow_large_blocks': '# Allow closures on blocks j >= 2 (su(74) and beyond).',
    'beta_nodes': '# Gauss-Legendre nodes in cos(beta) for the quadrature oracle.',
    'trace_stride': '# Keep every n-th segment in exported population traces.',
}

# Config file path
CONFIG_FILE = Path('symtop.ini')

THREADS_ENV = 'SYMTOP_THREADS'


def get_default_config() -> configparser.ConfigParser:
    """Create a ConfigParser with default values."""
    config = configparser.ConfigParser()
    for section, values in DEFAULTS.items():
        config[section] = values
    return config


def create_config_file(path: Path = CONFIG_FILE) -> None:
    """Create symtop.ini with default values and descriptive comments."""
    with open(path, 'w') as f:
        for section, values in DEFAULTS.items():
            f.write(f"[{section}]\n")
            for key, val in values.items():
                if key in COMMENTS:
                    f.write(f"{COMMENTS[key]}\n")
                f.write(f"{key} = {val}\n\n" if key in COMMENTS else f"{key} = {val}\n")
            f.write("\n")


def load_config(path: Path = CONFIG_FILE) -> configparser.ConfigParser:
    """Load config from file, falling back to defaults."""
    config = get_default_config()
    if path.exists():
        config.read(path)
    return config


class Config:
    """Configuration wrapper with typed access."""

    def __init__(self, config_path: Optional[Path] = None):
        self._config = load_config(config_path or CONFIG_FILE)

    @property
    def max_workers(self) -> int:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                pass
        return self._config.getint('performance', 'max_workers')

    @property
    def threads_from_env(self) -> bool:
        return bool(os.environ.get(THREADS_ENV))

    @property
    def reserved_core_count(self) -> int:
        return self._config.getint('performance', 'reserved_core_count')

    @property
    def rank_tol(self) -> float:
        return self._config.getfloat('closure', 'rank_tol')

    @property
    def max_iterations(self) -> int:
        return self._config.getint('closure', 'max_iterations')

    @property
    def batch_size(self) -> int:
        return self._config.getint('closure', 'batch_size')

    @property
    def allow_large_blocks(self) -> bool:
        return self._config.getboolean('closure', 'allow_large_blocks')

    @property
    def alpha_nodes(self) -> int:
        return self._config.getint('quadrature', 'alpha_nodes')

    @property
    def gamma_nodes(self) -> int:
        return self._config.getint('quadrature', 'gamma_nodes')

    @property
    def beta_nodes(self) -> int:
        return self._config.getint('quadrature', 'beta_nodes')

    @property
    def float_digits(self) -> int:
        return self._config.getint('output', 'float_digits')

    @property
    def trace_stride(self) -> int:
        return self._config.getint('output', 'trace_stride')


# Global config instance (lazy loaded)
_config: Optional[Config] = None


def get_config() -> Config:
    """Get the global config instance."""
    global _config
    if _config is None:
        _config = Config()
    return _config


# Experiment configuration (JSON, schema 1)

SCHEMA_VERSION = 1

TASKS = (
    'verify-quantum',
    'verify-classical',
    'simulate',
    'restricted-sk',
    'three-wave',
    'resonance-report',
)

DEFAULT_TOLERANCES = {'rank': 1e-8, 'closure': 1e-9, 'unitarity': 1e-9}

_TOP_KEYS = {'schema', 'task', 'inertia', 'dipole', 'j_max', 'tolerances', 'seed', 'output', 'params'}
_INERTIA_KEYS = {'I2', 'I3', 'resonance_exact'}
_DIPOLE_KEYS = {'delta1', 'delta2', 'delta3'}
_PARAM_KEYS = {
    'j': int, 'k': int, 'm': int,
    'samples': int, 'segments': int, 'depth': int, 'pulses': int,
    'dt': float, 'u_max': float, 'duration': float, 'step': float, 'p_scale': float,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description."""

    task: str
    inertia: Tuple[float, float, bool]
    dipole: Tuple[float, float, float]
    j_max: int = 2
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0
    output: str = 'results'
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        I2, I3, exact = self.inertia
        d1, d2, d3 = self.dipole
        return {
            'schema': SCHEMA_VERSION,
            'task': self.task,
            'inertia': {'I2': I2, 'I3': I3, 'resonance_exact': exact},
            'dipole': {'delta1': d1, 'delta2': d2, 'delta3': d3},
            'j_max': self.j_max,
            'tolerances': dict(sorted(self.tolerances.items())),
            'seed': self.seed,
            'output': self.output,
            'params': dict(sorted(self.params.items())),
        }

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def param(self, name: str, default: Any = None) -> Any:
        return self.params.get(name, default)

    def with_overrides(self, **changes) -> 'ExperimentConfig':
        values = {
            'task': self.task, 'inertia': self.inertia, 'dipole': self.dipole,
            'j_max': self.j_max, 'tolerances': dict(self.tolerances), 'seed': self.seed,
            'output': self.output, 'params': dict(self.params),
        }
        values.update({k: v for k, v in changes.items() if v is not None})
        return ExperimentConfig(**values)


def _locate(text: str, key: str) -> Optional[int]:
    """First line mentioning a JSON key, for diagnostics."""
    needle = f'"{key}"'
    for lineno, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return lineno
    return None


def _number(value: Any, path: str, text: str, kind=float) -> Any:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}", _locate(text, path.split('.')[-1]))
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(path, f"expected an integer, got {value!r}", _locate(text, path.split('.')[-1]))
        return int(value)
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite", _locate(text, path.split('.')[-1]))
    return float(value)


def _object(value: Any, path: str, allowed: set, text: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path or '<document>', "expected an object", _locate(text, path.split('.')[-1]) if path else None)
    for key in value:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown key", _locate(text, key))
    return value


def parse_experiment_config(text: str) -> ExperimentConfig:
    """Parse and validate a schema-1 experiment document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError('<document>', f"invalid JSON: {e.msg} (column {e.colno})", e.lineno) from None

    raw = _object(raw, '', _TOP_KEYS, text)
    if raw.get('schema') != SCHEMA_VERSION:
        raise ConfigError('schema', f"expected {SCHEMA_VERSION}, got {raw.get('schema')!r}", _locate(text, 'schema'))

    task = raw.get('task')
    if task not in TASKS:
        raise ConfigError('task', f"unknown task {task!r}; expected one of {', '.join(TASKS)}", _locate(text, 'task'))

    if 'inertia' not in raw:
        raise ConfigError('inertia', "required")
    inertia = _object(raw['inertia'], 'inertia', _INERTIA_KEYS, text)
    I2 = _number(inertia.get('I2'), 'inertia.I2', text)
    I3 = _number(inertia.get('I3'), 'inertia.I3', text)
    for name, value in (('inertia.I2', I2), ('inertia.I3', I3)):
        if value <= 0:
            raise ConfigError(name, f"must be positive, got {value}", _locate(text, name.split('.')[-1]))
    exact = inertia.get('resonance_exact', True)
    if not isinstance(exact, bool):
        raise ConfigError('inertia.resonance_exact', "expected true or false", _locate(text, 'resonance_exact'))

    if 'dipole' not in raw:
        raise ConfigError('dipole', "required")
    dipole = _object(raw['dipole'], 'dipole', _DIPOLE_KEYS, text)
    deltas = tuple(_number(dipole.get(k, 0.0), f"dipole.{k}", text) for k in ('delta1', 'delta2', 'delta3'))
    if all(d == 0.0 for d in deltas):
        raise ConfigError('dipole', "dipole is zero", _locate(text, 'dipole'))

    j_max = _number(raw.get('j_max', 2), 'j_max', text, int)
    if j_max < 0:
        raise ConfigError('j_max', f"must be non-negative, got {j_max}", _locate(text, 'j_max'))

    tolerances = dict(DEFAULT_TOLERANCES)
    if 'tolerances' in raw:
        given = _object(raw['tolerances'], 'tolerances', set(DEFAULT_TOLERANCES), text)
        for key, value in given.items():
            value = _number(value, f"tolerances.{key}", text)
            if value <= 0:
                raise ConfigError(f"tolerances.{key}", "must be positive", _locate(text, key))
            tolerances[key] = value

    seed = _number(raw.get('seed', 0), 'seed', text, int)
    output = raw.get('output', 'results')
    if not isinstance(output, str) or not output:
        raise ConfigError('output', "expected a non-empty path string", _locate(text, 'output'))

    params = {}
    if 'params' in raw:
        given = _object(raw['params'], 'params', set(_PARAM_KEYS), text)
        for key, value in given.items():
            params[key] = _number(value, f"params.{key}", text, _PARAM_KEYS[key])

    return ExperimentConfig(
        task=task,
        inertia=(I2, I3, exact),
        dipole=deltas,
        j_max=j_max,
        tolerances=tolerances,
        seed=seed,
        output=output,
        params=params,
    )


def load_experiment_config(path: Path) -> ExperimentConfig:
    """Read an experiment document from disk."""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(str(path), f"cannot read config: {e.strerror}") from None
    return parse_experiment_config(text)


def reference_config(task: str = 'verify-quantum') -> ExperimentConfig:
    """Reference parameters: I2=1, I3=1/sqrt(2), dipole (0, 0.2, 0.3)."""
    return ExperimentConfig(
        task=task,
        inertia=(1.0, 1.0 / math.sqrt(2.0), True),
        dipole=(0.0, 0.2, 0.3),
        j_max=2,
    )
