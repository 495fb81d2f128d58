"""
Solver Runner
Builds problem specs from run configurations, runs solvers, oracles and the acceptance suite.
"""

import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional

import numpy as np

import config
from solvers.conv_system import AWSpec, aw_field, aw_residual, aw_rhp_residual, aw_solve
from solvers.diagnostics import DiagnosticsStore
from solvers.heat_rod import (
    RodSpec, SourceTerm, TwoPartSolution, interface_residuals, solve_general_n, solve_two_part, steady_limit,
)
from solvers.oracle_fd import aw_nystrom, heat_cn, helmholtz_strip_fd, laplace_wedge_fd
from solvers.strip import StripSpec, crack_flux, eval_strip_field, solve_strip, strip_rhp_residual
from solvers.wedge import (
    WedgeSpec, build_matrix_factors, factorization_residual, far_field_amplitude, plus_at_origin, solve_wedge_rhp,
)
from utils.errors import ConfigError, DomainError, SolverError
from utils.profiles import (
    BoxProfile, ExponentialProfile, GaussianProfile, Profile, TableProfile, ZeroProfile, make_profile,
)
from utils.run_config import RunConfig
from utils.special_fn import cgamma, gauss2f1

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    """Sampled field in its CSV schema, plus the diagnostics of the run"""

    problem: str
    columns: List[str]
    rows: np.ndarray
    diagnostics: Dict[str, object] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    run_id: str = ''

    def to_csv(self) -> str:
        lines = [','.join(self.columns)]
        lines += [','.join(config.CSV_FLOAT_FORMAT.format(float(v)) for v in row) for row in self.rows]
        return '\n'.join(lines) + '\n'


# Problem specs

def build_profile(params: Dict[str, object], prefix: str = 'profile') -> Profile:
    """Rod profile from the keys under prefix (initial profile by default)"""
    return make_profile(params[prefix], lo=params[f'{prefix}_lo'], hi=params[f'{prefix}_hi'],
                        amp=params[f'{prefix}_amp'], center=params[f'{prefix}_center'],
                        width=params[f'{prefix}_width'], path=params[f'{prefix}_path'])


def build_sources(params: Dict[str, object]) -> List[SourceTerm]:
    """Heat source modes from the source_* and source2_* keys"""
    return [SourceTerm(build_profile(params, slot), params[f'{slot}_rate'])
            for slot in config.SOURCE_SLOTS if params[slot] != 'zero']


def build_load(params: Dict[str, object]) -> Profile:
    """Slit load from the load_* keys"""
    kind = params['load']
    if kind == 'constant':
        return BoxProfile(0.0, 1.0, params['load_amp'])
    if kind == 'zero':
        return ZeroProfile()
    if kind == 'gaussian':
        return GaussianProfile(params['load_center'], params['load_width'], params['load_amp'])
    if kind == 'table':
        return TableProfile.from_file(params['load_path'])
    raise ConfigError(f"unknown load kind '{kind}'")


def _exponential(amp: float, rate: float) -> Profile:
    return ExponentialProfile(amp, rate) if amp else ZeroProfile()


def build_rod_spec(run: RunConfig) -> RodSpec:
    p = run.params
    common = dict(initial=build_profile(p), gamma_minus=p['gamma_minus'], gamma_plus=p['gamma_plus'],
                  source=build_sources(p))
    if run.target == 'heat-rod':
        return RodSpec([p['breakpoint']], [p['a_minus'], p['a_plus']], [p['k_minus'], p['k_plus']], **common)
    return RodSpec(run.floats('breakpoints'), run.floats('a'), run.floats('k'), **common)


def build_aw_spec(run: RunConfig) -> AWSpec:
    p = run.params
    return AWSpec(p['lambda'], p['a'], _exponential(p['f1_amp'], p['f1_rate']), _exponential(p['f2_amp'], p['f2_rate']))


def build_wedge_spec(run: RunConfig) -> WedgeSpec:
    p = run.params
    return WedgeSpec.power_law(p['alpha'], p['a1'], p['a2'], p['t1'], p['t2'], c=(p['c1'], p['c2']),
                               gamma=(p['gamma1'], p['gamma2']), d=(p['d1'], p['d2']),
                               kappa=(p['kappa1'], p['kappa2']), mu=tuple(int(v) for v in p['mu'].split(',')))


def build_strip_spec(run: RunConfig) -> StripSpec:
    p = run.params
    return StripSpec(p['b_plus'], p['b_minus'], p['k'], build_load(p), truncation=run.truncation, tol=run.tol)


SPEC_BUILDERS = {
    'heat-rod': build_rod_spec,
    'heat-rod-n': build_rod_spec,
    'aw-conv': build_aw_spec,
    'wedge': build_wedge_spec,
    'strip': build_strip_spec,
}


def build_spec(run: RunConfig):
    return SPEC_BUILDERS[run.target](run)


def _plane(first: np.ndarray, second: np.ndarray):
    """Flattened product grid, second coordinate fastest"""
    a, b = np.meshgrid(first, second, indexing='ij')
    return a.ravel(), b.ravel()


# Acceptance suite

@dataclass(frozen=True)
class Check:
    name: str
    limit: float
    measure: Callable[[], float]
    slow: bool = False


def _poisson_gaussian(x, t):
    return np.exp(-x ** 2 / (1.0 + 4.0 * t)) / np.sqrt(1.0 + 4.0 * t)


@lru_cache(maxsize=None)
def _rod_benchmark() -> RodSpec:
    return RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], initial=BoxProfile(-1.0, 1.0))


@lru_cache(maxsize=None)
def _rod_three_segments() -> RodSpec:
    return RodSpec([-0.5, 0.5], [1.0, 2.0, 1.0], [1.0, 3.0, 1.0], initial=BoxProfile(-1.0, 1.0))


@lru_cache(maxsize=None)
def _aw_benchmark():
    return aw_solve(AWSpec(0.1, 1.0, ExponentialProfile(1.0, 1.0)))


@lru_cache(maxsize=None)
def _wedge_benchmark():
    return solve_wedge_rhp(WedgeSpec(np.pi / 2, 1.0, 2.0, 0.0, 1.0))


@lru_cache(maxsize=None)
def _strip_benchmark():
    return solve_strip(StripSpec(1.0, 1.0, 1.0 + 2.0j))


def _check_poisson() -> float:
    solution = solve_two_part(RodSpec([0.0], [1.0, 1.0], [1.0, 1.0], initial=GaussianProfile(0.0, 1.0)))
    x = np.linspace(-3.0, 3.0, 5)
    return max(float(np.max(np.abs(solution(x, t) - _poisson_gaussian(x, t)))) for t in (0.05, 0.3, 1.0, 4.0))


def _check_steady_limit() -> float:
    spec = RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], gamma_plus=1.0)
    solution = solve_two_part(spec)
    far = solution(np.linspace(-2.0, 2.0, 9), 1e7)
    near = solution(np.linspace(-0.15, 0.15, 7), 1e4)
    return float(max(np.max(np.abs(far - steady_limit(spec))), np.max(np.abs(near - steady_limit(spec)))))


def _interface_error(solution, t: float) -> float:
    return max(max(abs(row['value']), abs(row['flux'])) for row in interface_residuals(solution, t))


def _check_wedge_origin() -> float:
    lam, angle = 2.0, np.pi / 2
    root = lam ** (-np.pi / (2 * angle))
    x0 = plus_at_origin(lam, angle)
    chi21 = 2 * np.arctan(root)
    expected = np.array([[-np.pi + chi21, -np.pi + 2 / root + chi21], [chi21, 2 / root + chi21]])
    return float(max(np.max(np.abs(x0 - expected)), abs(np.linalg.det(x0) + 2 * np.pi / root)))


def _check_wedge_factorization() -> float:
    plus, minus = build_matrix_factors(WedgeSpec(np.pi / 2, 1.0, 2.0))
    return factorization_residual(plus, minus, 0.5 + 1j * np.linspace(-20.0, 20.0, 30))


def _check_strip_jump() -> float:
    solution, alpha = _strip_benchmark(), np.linspace(-9.0, 9.0, 10)
    return float(np.max(np.abs(solution.phi1_plus(alpha) - np.exp(1j * alpha) * solution.phi1_minus(alpha))))


def _check_heat_oracle() -> float:
    oracle = heat_cn(_rod_benchmark(), 0.5)
    x = np.array([-0.25, 0.25])
    return float(np.max(np.abs(solve_two_part(_rod_benchmark())(x, 0.5) - oracle.sample(x))))


def _check_general_n_oracle() -> float:
    oracle = heat_cn(_rod_three_segments(), 0.5)
    x = np.linspace(-1.0, 1.0, 11)
    return float(np.max(np.abs(solve_general_n(_rod_three_segments())(x, 0.5) - oracle.sample(x))))


def _check_aw_oracle() -> float:
    oracle = aw_nystrom(_aw_benchmark().spec)
    x = np.array([0.5, 1.0, 2.0])
    return float(np.max(np.abs(aw_field(_aw_benchmark(), x) - oracle.sample(x))))


def _check_wedge_oracle() -> float:
    solution = _wedge_benchmark()
    oracle = laplace_wedge_fd(solution.spec)
    r, theta = np.array([1.5, 0.5, 3.0]), np.pi / 2 * np.array([0.25, 0.5, 1 / 3])
    return float(max(np.max(np.abs(oracle.sample(r, theta) - solution.temperature(r, theta))),
                     abs(oracle.meta['far_field'] - solution.t_inf)))


def _check_strip_oracle() -> float:
    solution = _strip_benchmark()
    oracle = helmholtz_strip_fd(solution.spec)
    x = np.linspace(-1.0, 2.0, 7)
    return max(float(np.max(np.abs(eval_strip_field(solution, x, y) - oracle.sample(x, np.full(x.shape, y)))))
               for y in (0.5, -0.5))


def _check_strip_flux() -> float:
    x = np.linspace(0.2, 0.8, 7)
    return float(np.max(np.abs(crack_flux(_strip_benchmark(), x) - 1.0)))


ACCEPTANCE_CHECKS = [
    Check('gamma reflection |G(1/2+3i)|^2', 1e-12,
          lambda: abs(abs(complex(cgamma(0.5 + 3j))) ** 2 * np.cosh(3 * np.pi) / np.pi - 1.0)),
    Check('2F1(1,1/2;3/2;-1/4) = 2 atan(1/2)', 1e-13,
          lambda: abs(complex(gauss2f1(1.0, 0.5, 1.5, -0.25)) - 2 * np.arctan(0.5))),
    Check('rod Poisson reduction', 1e-8, _check_poisson),
    Check('rod steady limit', 1e-3, _check_steady_limit),
    Check('rod two-part interface residual', 1e-6,
          lambda: _interface_error(solve_two_part(RodSpec([0.0], [1.0, 2.0], [1.0, 3.0], initial=BoxProfile(-1.0, 1.0),
                                                          gamma_minus=0.2, gamma_plus=1.0)), 0.5)),
    Check('rod general-n interface residual', 1e-6, lambda: _interface_error(solve_general_n(_rod_three_segments()), 0.5)),
    Check('aw pole residues', 1e-10, lambda: max(abs(v) for v in _aw_benchmark().pole_residues().values())),
    Check('aw boundary relation residual', 1e-8,
          lambda: aw_rhp_residual(_aw_benchmark(), np.linspace(-20.0, 20.0, 50))),
    Check('aw integral equation residual', 1e-6,
          lambda: float(np.max(np.abs(aw_residual(_aw_benchmark(), np.linspace(0.1, 4.0, 20)))))),
    Check('wedge factor at origin', 1e-10, _check_wedge_origin),
    Check('wedge factorization residual', 1e-8, _check_wedge_factorization),
    Check('wedge temperature at infinity', 1e-10,
          lambda: abs(_wedge_benchmark().t_inf - (1.0 - 2.0 / np.pi * np.arctan(0.5)))),
    Check('wedge equal segments', 1e-10,
          lambda: abs(solve_wedge_rhp(WedgeSpec(np.pi / 2, 1.0, 1.0, 0.0, 1.0)).t_inf - 0.5)),
    Check('strip truncation drift', 1e-8, lambda: _strip_benchmark().coeffs.drift),
    Check('strip pole residues', 1e-8, lambda: max(_strip_benchmark().pole_residues(count=3).values())),
    Check('strip crack jump identity', 1e-8, _check_strip_jump),
    Check('strip boundary relation residual', 1e-6,
          lambda: strip_rhp_residual(_strip_benchmark(), np.linspace(-20.0, 20.0, 50))),
    Check('rod two-part vs Crank-Nicolson', 1e-3, _check_heat_oracle, slow=True),
    Check('rod general-n vs Crank-Nicolson', 1e-3, _check_general_n_oracle, slow=True),
    Check('aw vs Nystrom', 1e-4, _check_aw_oracle, slow=True),
    Check('wedge vs finite differences', 1e-2, _check_wedge_oracle, slow=True),
    Check('strip vs finite differences', 1e-2, _check_strip_oracle, slow=True),
    Check('strip crack-face flux', 1e-3, _check_strip_flux, slow=True),
]


class SolverRunner:
    def __init__(self, store: Optional[DiagnosticsStore] = None):
        self.store = store or DiagnosticsStore()
        self.count = 0
        self.solvers = {
            'heat-rod': self.solve_heat,
            'heat-rod-n': self.solve_heat,
            'aw-conv': self.solve_aw,
            'wedge': self.solve_wedge,
            'strip': self.solve_strip,
        }
        self.oracles = {
            'heat-rod': self.oracle_heat,
            'heat-rod-n': self.oracle_heat,
            'aw-conv': self.oracle_aw,
            'wedge': self.oracle_wedge,
            'strip': self.oracle_strip,
        }

    def _next_id(self, problem: str) -> str:
        self.count += 1
        return f"{problem}-{self.count}"

    def run(self, run: RunConfig) -> RunResult:
        """Solve (or run the oracle for) one configured problem"""
        if run.problem == 'selftest':
            raise ConfigError("selftest runs are started with SolverRunner.selftest")
        handler = self.oracles[run.target] if run.problem == 'oracle' else self.solvers[run.problem]
        run_id = self._next_id(run.problem)
        self.store.create_run(run_id, run.problem, {
            **run.params, 'tol': run.tol, 'truncation': run.truncation, 'nodes': run.nodes})
        started = time.perf_counter()
        try:
            result = handler(run)
        except SolverError as e:
            self.store.finish_run(run_id, e)
            raise
        result.run_id = run_id
        self.store.add_records(run_id, result.diagnostics)
        self.store.finish_run(run_id)
        logger.info(f"Run {run_id} finished in {time.perf_counter() - started:.2f}s, {len(result.rows)} rows")
        return result

    # Solvers

    def solve_heat(self, run: RunConfig) -> RunResult:
        spec = build_rod_spec(run)
        if run.target == 'heat-rod':
            solution = TwoPartSolution(spec, time_nodes=run.nodes)
        else:
            solution = solve_general_n(spec, tol=run.tol)
        x, rows, residuals = run.grid('x'), [], []
        for t in run.grid('t'):
            rows.append(np.column_stack([x, np.full(x.shape, t), solution(x, t)]))
            residuals += interface_residuals(solution, float(t))
        diagnostics = {
            'breakpoints': spec.breakpoints,
            'interface_value_residual': max(abs(row['value']) for row in residuals),
            'interface_flux_residual': max(abs(row['flux']) for row in residuals),
        }
        notes = []
        if spec.m == 1:
            diagnostics['steady_limit'] = steady_limit(spec)
            notes.append(f"steady_limit = {config.CSV_FLOAT_FORMAT.format(diagnostics['steady_limit'])}")
        return RunResult(run.problem, config.CSV_SCHEMAS['heat'], np.concatenate(rows), diagnostics, notes)

    def solve_aw(self, run: RunConfig) -> RunResult:
        solution = aw_solve(build_aw_spec(run), run['method'], run.tol)
        x = run.grid('x')
        u = aw_field(solution, x, run.tol)
        diagnostics = solution.diagnostics()
        diagnostics['rhp_residual'] = aw_rhp_residual(solution, np.linspace(-20.0, 20.0, 50))
        diagnostics['equation_residual'] = float(np.max(np.abs(aw_residual(solution, x))))
        diagnostics['max_imag_part'] = float(np.max(np.abs(np.imag(u))))
        if diagnostics['max_imag_part'] > run.tol:
            logger.warning(f"Complex solution for lambda={run['lambda']}; the CSV holds real parts")
        rows = np.column_stack([x, np.real(u[0]), np.real(u[1])])
        return RunResult(run.problem, config.CSV_SCHEMAS['aw'], rows, diagnostics)

    def solve_wedge(self, run: RunConfig) -> RunResult:
        solution = solve_wedge_rhp(build_wedge_spec(run), run['method'], run.tol)
        r, theta = _plane(run.grid('r'), run.grid('theta'))
        values = solution.temperature(r, theta)
        diagnostics = solution.diagnostics()
        diagnostics['far_field_amplitude'] = far_field_amplitude(solution)
        notes = [f"T_inf = {config.CSV_FLOAT_FORMAT.format(solution.t_inf)}"]
        return RunResult(run.problem, config.CSV_SCHEMAS['wedge'], np.column_stack([r, theta, values]),
                         diagnostics, notes)

    def solve_strip(self, run: RunConfig) -> RunResult:
        solution = solve_strip(build_strip_spec(run), normalization=run['normalization'])
        y, x = _plane(run.grid('y'), run.grid('x'))
        values = eval_strip_field(solution, x, y, side=1)
        diagnostics = solution.diagnostics()
        diagnostics['rhp_residual'] = strip_rhp_residual(solution, np.linspace(-20.0, 20.0, 50))
        rows = np.column_stack([x, y, values.real, values.imag])
        return RunResult(run.problem, config.CSV_SCHEMAS['strip'], rows, diagnostics)

    # Oracles

    def oracle_heat(self, run: RunConfig) -> RunResult:
        spec = build_rod_spec(run)
        x, rows, estimates = run.grid('x'), [], []
        for t in run.grid('t'):
            grid = heat_cn(spec, float(t))
            rows.append(np.column_stack([x, np.full(x.shape, t), grid.sample(x)]))
            estimates.append(grid.error_estimate)
        return RunResult(run.problem, config.CSV_SCHEMAS['heat'], np.concatenate(rows),
                         {'oracle': 'crank-nicolson', 'error_estimate': max(estimates)})

    def oracle_aw(self, run: RunConfig) -> RunResult:
        grid = aw_nystrom(build_aw_spec(run))
        x = run.grid('x')
        u = grid.sample(x)
        diagnostics = {'oracle': 'nystrom', 'error_estimate': grid.error_estimate, **grid.meta}
        return RunResult(run.problem, config.CSV_SCHEMAS['aw'], np.column_stack([x, np.real(u[0]), np.real(u[1])]),
                         diagnostics)

    def oracle_wedge(self, run: RunConfig) -> RunResult:
        grid = laplace_wedge_fd(build_wedge_spec(run))
        r, theta = _plane(run.grid('r'), run.grid('theta'))
        diagnostics = {'oracle': 'finite-difference', 'error_estimate': grid.error_estimate, **grid.meta}
        notes = [f"T_inf = {config.CSV_FLOAT_FORMAT.format(grid.meta['far_field'])}"]
        return RunResult(run.problem, config.CSV_SCHEMAS['wedge'], np.column_stack([r, theta, grid.sample(r, theta)]),
                         diagnostics, notes)

    def oracle_strip(self, run: RunConfig) -> RunResult:
        reach = config.STRIP_FD_HALF_LENGTH
        y, x = _plane(run.grid('y'), run.grid('x'))
        if np.any(x < -reach) or np.any(x > 1.0 + reach):
            raise DomainError(f"oracle samples need x in [{-reach}, {1.0 + reach}]")
        grid = helmholtz_strip_fd(build_strip_spec(run))
        values = grid.sample(x, y)
        diagnostics = {'oracle': 'finite-difference', 'error_estimate': grid.error_estimate,
                       'domain_change': grid.meta['domain_change']}
        return RunResult(run.problem, config.CSV_SCHEMAS['strip'], np.column_stack([x, y, values.real, values.imag]),
                         diagnostics)

    # Acceptance

    def selftest(self, slow: bool = False, checks: Optional[List[Check]] = None) -> List[Dict[str, object]]:
        """Run the acceptance checks; a check fails on a large measure or on any solver error"""
        run_id = self._next_id('selftest')
        self.store.create_run(run_id, 'selftest', {'slow': slow})
        table = []
        for check in checks if checks is not None else ACCEPTANCE_CHECKS:
            if check.slow and not slow:
                continue
            row = {'name': check.name, 'limit': check.limit, 'value': None, 'passed': False, 'error': None}
            try:
                row['value'] = float(check.measure())
                row['passed'] = bool(row['value'] < check.limit)
            except SolverError as e:
                row['error'] = e.category
                logger.error(f"Check '{check.name}' raised: {e}")
            logger.info(f"Check '{check.name}': {row['value']} (limit {check.limit}) "
                        f"{'pass' if row['passed'] else 'FAIL'}")
            table.append(row)
        self.store.add_record(run_id, 'checks', table)
        self.store.finish_run(run_id)
        return table
