"""
Solver Errors
Exception hierarchy with machine-readable categories and exit codes.
"""

from typing import Optional

from config import ERROR_MESSAGES, EXIT_CODES


class SolverError(Exception):
    """Base class for every failure reported by the solvers"""

    category = 'internal'

    def __init__(self, detail: str, line: Optional[int] = None):
        self.detail = detail
        self.line = line
        template = ERROR_MESSAGES.get(self.category, ERROR_MESSAGES['internal'])
        message = template.format(detail=detail)
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES.get(self.category, EXIT_CODES['internal'])


class DomainError(SolverError):
    """Input outside the admissible region of an operation"""

    category = 'domain'


class ConvergenceError(SolverError):
    """Quadrature, series, truncation or grid refinement failed to settle"""

    category = 'convergence'


class SingularSystemError(SolverError):
    """A linear system or a scalar denominator degenerated"""

    category = 'singular'


class TailDivergenceError(SolverError):
    category = 'tail'


class ConfigError(SolverError):
    category = 'config'
