"""
Run Configuration
Parses, validates and prints line-based `key = value` run files.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from config import (
    CONTROL_DEFAULTS, DEFAULT_VALUES, GRID_KEYS, MAX_TRUNCATION, MIN_NODES, PROBLEMS, PROFILE_KINDS, SOURCE_SLOTS,
    SPLIT_METHODS, STRIP_LOAD_KINDS, STRIP_NORMALIZATIONS,
)
from utils.checks import is_normal_lambda
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

SOLVER_PROBLEMS = ('heat-rod', 'heat-rod-n', 'aw-conv', 'wedge', 'strip')
TRUE_WORDS = ('true', 'yes', 'on', '1')
FALSE_WORDS = ('false', 'no', 'off', '0')


@dataclass
class RunConfig:
    """A validated run: the problem, its parameters and the numeric controls"""

    problem: str
    params: Dict[str, object] = field(default_factory=dict)
    tol: float = CONTROL_DEFAULTS['tol']
    truncation: int = CONTROL_DEFAULTS['truncation']
    nodes: int = CONTROL_DEFAULTS['nodes']
    out: str = CONTROL_DEFAULTS['out']
    report: str = CONTROL_DEFAULTS['report']

    @property
    def target(self) -> str:
        """Problem whose parameters the run carries; oracle runs name it with the target key"""
        return self.params['target'] if self.problem == 'oracle' else self.problem

    def __getitem__(self, key: str):
        return self.params[key]

    def grid(self, key: str) -> np.ndarray:
        return parse_grid(self.params[key], key)

    def floats(self, key: str) -> List[float]:
        return parse_floats(self.params[key], key)


# Values

def parse_complex(text: str) -> complex:
    """'1.0+2.0i' (also plain reals and the j suffix) to a complex number"""
    s = text.replace(' ', '')
    if s.endswith('i'):
        s = s[:-1] + 'j'
    return complex(s)


def format_complex(value: complex) -> str:
    value = complex(value)
    sign = '-' if value.imag < 0 else '+'
    return f"{float(value.real)!r}{sign}{abs(float(value.imag))!r}i"


def parse_floats(text: str, key: str = 'value') -> List[float]:
    try:
        values = [float(v) for v in str(text).split(',') if v.strip()]
    except ValueError:
        raise ConfigError(f"{key} must be a comma-separated list of numbers, got '{text}'")
    if not values:
        raise ConfigError(f"{key} is empty")
    return values


def parse_grid(text: str, key: str = 'grid') -> np.ndarray:
    """'lo:hi:n' for n evenly spaced points, or a comma-separated list"""
    text = str(text).strip()
    if ':' in text:
        parts = text.split(':')
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except (ValueError, IndexError):
            raise ConfigError(f"grid {key} must read lo:hi:n, got '{text}'")
        if len(parts) != 3 or count < 1:
            raise ConfigError(f"grid {key} must read lo:hi:n with n >= 1, got '{text}'")
        return np.linspace(lo, hi, count)
    return np.asarray(parse_floats(text, f"grid {key}"))


def parse_value(key: str, raw: str, default, line: Optional[int] = None):
    """Read raw text with the type of the key's default value"""
    try:
        if isinstance(default, bool):
            word = raw.lower()
            if word in TRUE_WORDS:
                return True
            if word in FALSE_WORDS:
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            value = float(raw)
            if not np.isfinite(value):
                raise ValueError(raw)
            return value
        if isinstance(default, complex):
            value = parse_complex(raw)
            if not np.isfinite(value):
                raise ValueError(raw)
            return value
    except ValueError:
        kind = type(default).__name__
        raise ConfigError(f"key '{key}': cannot read '{raw}' as {kind}", line=line)
    return raw


def format_value(key: str, value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, complex):
        return format_complex(value)
    if isinstance(value, float):
        return repr(value)
    text = str(value)
    if '#' in text or '\n' in text or text != text.strip():
        raise ConfigError(f"value of '{key}' cannot be written to a run file: {text!r}")
    return text


# Parsing

def known_keys(problem: str, target: Optional[str] = None) -> Dict[str, object]:
    """Default parameters of a problem; oracle runs also take their target's keys"""
    if problem not in PROBLEMS:
        raise ConfigError(f"unknown problem '{problem}', expected one of {', '.join(PROBLEMS)}")
    values = dict(DEFAULT_VALUES[problem])
    if problem == 'oracle':
        target = target or values['target']
        if target not in SOLVER_PROBLEMS:
            raise ConfigError(f"oracle target '{target}' is not one of {', '.join(SOLVER_PROBLEMS)}")
        values['target'] = target
        values.update(DEFAULT_VALUES[target])
    return values


def _entries(text: str) -> Dict[str, Tuple[str, int]]:
    entries = {}
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got '{raw_line.strip()}'", line=number)
        if key in entries:
            raise ConfigError(f"duplicate key '{key}'", line=number)
        entries[key] = (value, number)
    return entries


def parse_config(text: str) -> RunConfig:
    """Validated RunConfig from run-file text; user values are merged over the problem defaults"""
    entries = _entries(text)
    if 'problem' not in entries:
        raise ConfigError("missing subcommand key 'problem'")
    problem, problem_line = entries.pop('problem')
    try:
        params = known_keys(problem, entries.get('target', (None, 0))[0])
    except ConfigError as e:
        raise ConfigError(e.detail, line=entries.get('target', (None, problem_line))[1])
    controls = dict(CONTROL_DEFAULTS)
    for key, (raw, number) in entries.items():
        if key in params:
            params[key] = parse_value(key, raw, params[key], number)
        elif key in controls:
            controls[key] = parse_value(key, raw, controls[key], number)
        else:
            raise ConfigError(f"unknown key '{key}' for problem '{problem}'", line=number)
    config = RunConfig(problem, params, **controls)
    validate_config(config, {key: number for key, (_, number) in entries.items()})
    logger.debug(f"Parsed run config for {problem} with {len(entries)} explicit keys")
    return config


def format_config(config: RunConfig) -> str:
    """Run-file text that parses back to the same RunConfig"""
    lines = [f"problem = {config.problem}"]
    lines += [f"{key} = {format_value(key, value)}" for key, value in config.params.items()]
    lines += [f"{key} = {format_value(key, getattr(config, key))}" for key in CONTROL_DEFAULTS]
    return '\n'.join(lines) + '\n'


def default_config(problem: str, target: Optional[str] = None) -> RunConfig:
    text = f"problem = {problem}\n" + (f"target = {target}\n" if target else '')
    return parse_config(text)


def with_overrides(config: RunConfig, overrides: Iterable[str]) -> RunConfig:
    """Apply `key=value` overrides and re-validate"""
    values, given = {}, {}
    for line in format_config(config).splitlines():
        key, _, value = line.partition(' = ')
        values[key] = value
    for item in overrides:
        key, sep, value = item.partition('=')
        if not sep or not key.strip():
            raise ConfigError(f"override '{item}' is not key=value")
        given[key.strip()] = value.strip()
    if given.get('problem', config.problem) != config.problem or given.get('target', values.get('target')) != values.get('target'):
        # a new problem or oracle target starts again from its own defaults
        values = {key: values[key] for key in CONTROL_DEFAULTS}
        values['problem'] = config.problem
    values.update(given)
    return parse_config('\n'.join(f"{key} = {value}" for key, value in values.items()))


# Validation

def validate_config(config: RunConfig, lines: Optional[Dict[str, int]] = None):
    """Raise ConfigError naming the first violated precondition"""
    lines = lines or {}

    def fail(key: str, detail: str):
        raise ConfigError(detail, line=lines.get(key))

    if not config.tol > 0:
        fail('tol', f"tol={config.tol} must be positive")
    if not 1 <= config.truncation <= MAX_TRUNCATION:
        fail('truncation', f"truncation={config.truncation} must lie in [1, {MAX_TRUNCATION}]")
    if config.nodes < MIN_NODES:
        fail('nodes', f"nodes={config.nodes} must be at least {MIN_NODES}")
    if config.problem == 'selftest':
        return
    p = config.params
    for key in GRID_KEYS:
        if key in p:
            try:
                config.grid(key)
            except ConfigError as e:
                fail(key, e.detail)

    def positive(*keys):
        for key in keys:
            if not p[key] > 0:
                fail(key, f"{key}={p[key]} must be positive")

    def one_of(key, choices):
        if p[key] not in choices:
            fail(key, f"{key}='{p[key]}' must be one of {', '.join(choices)}")

    target = config.target
    if target in ('heat-rod', 'heat-rod-n'):
        if np.any(config.grid('t') <= 0):
            fail('t', "sample times t must be positive")
        for prefix in ('profile',) + SOURCE_SLOTS:
            lo, hi = p[f'{prefix}_lo'], p[f'{prefix}_hi']
            one_of(prefix, PROFILE_KINDS)
            if p[prefix] == 'box' and not hi > lo:
                fail(f'{prefix}_hi', f"box {prefix} needs {prefix}_lo < {prefix}_hi, got [{lo}, {hi}]")
            if p[prefix] == 'gaussian':
                positive(f'{prefix}_width')
            if p[prefix] == 'table' and not p[f'{prefix}_path']:
                fail(f'{prefix}_path', f"table {prefix} needs {prefix}_path")
        for slot in SOURCE_SLOTS:
            if p[f'{slot}_rate'] < 0:
                fail(f'{slot}_rate', f"{slot}_rate={p[f'{slot}_rate']} must not be negative")
    if target == 'heat-rod':
        positive('a_minus', 'a_plus', 'k_minus', 'k_plus')
    elif target == 'heat-rod-n':
        for key in ('breakpoints', 'a', 'k'):
            try:
                config.floats(key)
            except ConfigError as e:
                fail(key, e.detail)
        breaks, a, k = config.floats('breakpoints'), config.floats('a'), config.floats('k')
        if np.any(np.diff(breaks) <= 0):
            fail('breakpoints', f"breakpoints must increase: {breaks}")
        if len(a) != len(breaks) + 1 or len(k) != len(breaks) + 1:
            fail('a', f"{len(breaks)} breakpoints need {len(breaks) + 1} values of a and k")
        if min(a) <= 0 or min(k) <= 0:
            fail('a', "diffusivities a and conductivities k must be positive")
    elif target == 'aw-conv':
        if not is_normal_lambda(p['lambda']):
            fail('lambda', f"lambda={format_complex(p['lambda'])} lies in [1/4, inf) (non-normal case)")
        positive('a', 'f1_rate', 'f2_rate')
        one_of('method', SPLIT_METHODS)
        if np.any(config.grid('x') <= 0):
            fail('x', "sample points x must be positive")
    elif target == 'wedge':
        if not 0.0 < p['alpha'] < 2.0 * np.pi:
            fail('alpha', f"wedge angle alpha={p['alpha']} must lie in (0, 2 pi)")
        positive('a1', 'a2', 'gamma1', 'gamma2', 'kappa1', 'kappa2')
        if p['a2'] < p['a1']:
            fail('a2', f"a2={p['a2']} must not be below a1={p['a1']}")
        one_of('mu', ('0,1', '1,0'))
        one_of('method', SPLIT_METHODS)
        if np.any(config.grid('r') <= 0):
            fail('r', "radii r must be positive")
        theta = config.grid('theta')
        if np.any((theta < 0) | (theta > p['alpha'])):
            fail('theta', f"angles theta must lie in [0, {p['alpha']!r}]")
    elif target == 'strip':
        positive('b_plus', 'b_minus')
        if not p['k'].imag > 0:
            fail('k', f"k={format_complex(p['k'])} must have a positive imaginary part")
        one_of('load', STRIP_LOAD_KINDS)
        one_of('normalization', STRIP_NORMALIZATIONS)
        if p['load'] == 'gaussian':
            positive('load_width')
        if p['load'] == 'table' and not p['load_path']:
            fail('load_path', "table load needs load_path")
        y = config.grid('y')
        if np.any(y > p['b_plus']) or np.any(y < -p['b_minus']):
            fail('y', f"sample heights y must lie in [-{p['b_minus']!r}, {p['b_plus']!r}]")
