"""
Brute-Force Oracles
Grid and Nystrom solvers used as independent references for the semi-analytic solvers.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import linalg, sparse
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.linalg import spsolve

from config import (
    CONDITION_LIMIT, HEAT_CN_CELLS, HEAT_CN_HALF_WIDTH, HEAT_CN_STEPS, NYSTROM_CUTOFF, NYSTROM_NODES,
    ORACLE_TOLERANCES, STRIP_FD_CELLS_PER_UNIT, STRIP_FD_HALF_LENGTH, WEDGE_FD_DECADES, WEDGE_FD_THETA_CELLS,
)
from utils.errors import ConvergenceError, DomainError, SingularSystemError

logger = logging.getLogger(__name__)


@dataclass
class GridSolution:
    """Oracle output: nodes, values, spacings and the two-grid error estimate"""

    coords: Tuple[np.ndarray, ...]
    values: np.ndarray
    spacing: Tuple[float, ...]
    error_estimate: float
    meta: Dict[str, object] = field(default_factory=dict)
    interpolant: Optional[Callable] = None

    def sample(self, *points):
        if self.interpolant is not None:
            return self.interpolant(*points)
        if len(self.coords) == 1:
            x = np.asarray(points[0], dtype=float)
            if np.iscomplexobj(self.values):
                return (np.interp(x, self.coords[0], self.values.real)
                        + 1j * np.interp(x, self.coords[0], self.values.imag))
            return np.interp(x, self.coords[0], self.values)
        grid = np.stack(np.broadcast_arrays(*[np.asarray(p, dtype=float) for p in points]), axis=-1)
        return RegularGridInterpolator(self.coords, self.values)(grid)

    def tolerance(self, stated: float) -> float:
        """Acceptance tolerance for comparisons against this oracle"""
        return max(self.error_estimate, stated)


# Heat conduction in a layered rod

def _rod_nodes(spec, half_width: float, cells: int, refine: int = 1,
               reach: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes with every breakpoint on the grid, and the segment index of each cell.
    A reach beyond half_width continues the outer spacings, so the nodes of the
    narrower grid are kept.
    """
    edges = [-half_width, *spec.breakpoints, half_width]
    if edges[1] <= edges[0] or edges[-1] <= edges[-2]:
        raise DomainError(f"half-width {half_width} does not contain every breakpoint")
    nodes, owner = [np.array([edges[0]])], []
    for j, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        count = refine * max(2, int(round(cells * (hi - lo) / (2 * half_width))))
        nodes.append(np.linspace(lo, hi, count + 1)[1:])
        owner.append(np.full(count, j))
    x, owner = np.concatenate(nodes), np.concatenate(owner)
    if reach is not None and reach > half_width:
        h_left, h_right = x[1] - x[0], x[-1] - x[-2]
        n_left = int(np.ceil((reach - half_width) / h_left))
        n_right = int(np.ceil((reach - half_width) / h_right))
        x = np.concatenate([x[0] - h_left * np.arange(n_left, 0, -1), x, x[-1] + h_right * np.arange(1, n_right + 1)])
        owner = np.concatenate([np.zeros(n_left, dtype=int), owner, np.full(n_right, spec.m)])
    return x, owner


def _control_average(x: np.ndarray, owner: np.ndarray, weight: np.ndarray, func) -> np.ndarray:
    """Capacity-weighted average of func over each node's control volume"""
    gl, gw = np.polynomial.legendre.leggauss(8)
    total = np.zeros(x.size)
    mass = np.zeros(x.size)
    for i in range(x.size - 1):
        lo, hi = x[i], x[i + 1]
        mid = 0.5 * (lo + hi)
        for a, b, node in ((lo, mid, i), (mid, hi, i + 1)):
            pts = 0.5 * (a + b) + 0.5 * (b - a) * gl
            w = 0.5 * (b - a) * gw * weight[i]
            total[node] += np.sum(w * func(pts, owner[i]))
            mass[node] += np.sum(w)
    return total / mass


def _crank_nicolson(spec, half_width: float, cells: int, steps: int, t_end: float, refine: int = 1,
                   reach: Optional[float] = None):
    x, owner = _rod_nodes(spec, half_width, cells, refine, reach)
    a = np.asarray(spec.a)[owner]
    k = np.asarray(spec.k)[owner]
    h = np.diff(x)
    capacity_density = k / a ** 2
    conductance = k / h
    capacity = np.zeros(x.size)
    capacity[:-1] += 0.5 * h * capacity_density
    capacity[1:] += 0.5 * h * capacity_density
    m = spec.m

    def level(seg):
        return spec.gamma_minus if seg == 0 else (spec.gamma_plus if seg == m else 0.0)

    initial = _control_average(x, owner, capacity_density, lambda p, seg: spec.initial(p) + level(seg))
    sources = [(term.rate, capacity * _control_average(x, owner, capacity_density, lambda p, seg, g=term.profile: g(p)))
               for term in spec.sources]

    inner = slice(1, x.size - 1)
    n = x.size - 2
    diag = conductance[:-1] + conductance[1:]
    lower = -conductance[1:-1]
    left, right = spec.gamma_minus, spec.gamma_plus
    boundary = np.zeros(n)
    boundary[0] = conductance[0] * left
    boundary[-1] = conductance[-1] * right

    def apply(u):
        out = diag * u
        out[1:] += lower * u[:-1]
        out[:-1] += lower * u[1:]
        return out

    def step(u, t, dt, theta):
        banded = np.zeros((3, n))
        banded[0, 1:] = theta * dt * lower
        banded[1] = capacity[inner] + theta * dt * diag
        banded[2, :-1] = theta * dt * lower
        rhs = capacity[inner] * u - (1 - theta) * dt * apply(u) + dt * boundary
        for rate, source in sources:
            decay = theta * np.exp(-rate * (t + dt)) + (1 - theta) * np.exp(-rate * t)
            rhs += dt * decay * source[inner]
        return linalg.solve_banded((1, 1), banded, rhs)

    u = initial[inner].copy()
    dt = t_end / steps
    t = 0.0
    # Rannacher start: four implicit half steps damp the initial discontinuities
    for _ in range(4):
        u = step(u, t, 0.5 * dt, 1.0)
        t += 0.5 * dt
    for _ in range(steps - 2):
        u = step(u, t, dt, 0.5)
        t += dt
    values = np.concatenate([[left], u, [right]])
    return x, values, float(h.max())


def heat_cn(spec, t_end: float, half_width: float = HEAT_CN_HALF_WIDTH, cells: int = HEAT_CN_CELLS,
            steps: int = HEAT_CN_STEPS, check_domain: bool = True) -> GridSolution:
    """
    Total temperature of the layered rod at t_end by flux-conservative
    Crank-Nicolson on two grids, Richardson-combined.
    """
    if not t_end > 0:
        raise DomainError(f"t_end={t_end} must be positive")
    x, coarse, h = _crank_nicolson(spec, half_width, cells, steps, t_end)
    x_fine, fine, _ = _crank_nicolson(spec, half_width, cells, 2 * steps, t_end, refine=2)
    fine_on_coarse = fine[::2]
    if not np.allclose(x_fine[::2], x):
        raise ConvergenceError("refined heat grid does not nest the coarse grid")
    estimate = float(np.max(np.abs(fine_on_coarse - coarse))) / 3.0
    values = fine_on_coarse + (fine_on_coarse - coarse) / 3.0
    logger.info(f"Crank-Nicolson oracle: {x.size} nodes, {steps} steps, Richardson estimate {estimate:.3e}")
    tolerance = ORACLE_TOLERANCES['heat']
    if estimate > tolerance:
        raise ConvergenceError(f"heat grid refinement estimate {estimate:.3e} exceeds {tolerance}")
    domain_change = 0.0
    if check_domain:
        x_wide, wide, _ = _crank_nicolson(spec, half_width, cells, steps, t_end, reach=2 * half_width)
        # the wide grid carries every coarse node
        window = np.abs(x) <= 0.5 * half_width
        domain_change = float(np.max(np.abs(np.interp(x[window], x_wide, wide) - coarse[window])))
        if domain_change > 0.1 * tolerance:
            raise ConvergenceError(f"doubling the half-width {half_width} changes the field by {domain_change:.3e}")
    return GridSolution((x,), values, (h,), estimate,
                        meta={'t_end': t_end, 'steps': steps, 'domain_change': domain_change})


# Convolution system

def _nystrom_solve(spec, cutoff: float, nodes: int):
    t = np.linspace(0.0, cutoff, nodes + 1)
    h = cutoff / nodes
    w = np.full(t.size, h)
    w[0] = w[-1] = 0.5 * h
    lam, a = complex(spec.lam), spec.a

    def kernel_blocks(x):
        d = x[:, None] - t[None, :]
        return (np.exp(-np.abs(d)), np.exp(-np.abs(d - a)), np.exp(-np.abs(d + a)))

    k_same, k_shift, k_back = kernel_blocks(t)
    size = t.size
    matrix = np.eye(2 * size, dtype=complex)
    matrix[:size, :size] -= lam * k_same * w
    matrix[:size, size:] -= lam * k_shift * w
    matrix[size:, :size] -= lam * k_back * w
    matrix[size:, size:] -= lam * k_same * w
    rhs = np.concatenate([spec.f1(t), spec.f2(t)]).astype(complex)
    u = linalg.solve(matrix, rhs)

    def interpolant(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        same, shift, back = kernel_blocks(x)
        u1, u2 = u[:size], u[size:]
        first = spec.f1(x) + lam * ((same * w) @ u1 + (shift * w) @ u2)
        second = spec.f2(x) + lam * ((back * w) @ u1 + (same * w) @ u2)
        return np.stack([first, second])

    return t, u.reshape(2, size), matrix, interpolant


def aw_nystrom(spec, cutoff: float = NYSTROM_CUTOFF, nodes: int = NYSTROM_NODES) -> GridSolution:
    """
    Trapezoid Nystrom discretization of the convolution system on (0, cutoff)
    at two resolutions; samples are Richardson-combined Nystrom interpolants.
    """
    if abs(round(spec.a * nodes / cutoff) - spec.a * nodes / cutoff) > 1e-9:
        logger.warning(f"Offset a={spec.a} is not a multiple of the Nystrom step, Richardson gain is reduced")
    t, coarse, matrix, coarse_u = _nystrom_solve(spec, cutoff, nodes)
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularSystemError(f"Nystrom matrix condition number {cond:.3e} at lambda={spec.lam}")
    if cond > 1e8:
        logger.warning(f"Nystrom matrix is ill-conditioned ({cond:.3e}); lambda={spec.lam} is near the non-normal ray")
    _, fine, _, fine_u = _nystrom_solve(spec, cutoff, 2 * nodes)
    estimate = float(np.max(np.abs(fine[:, ::2] - coarse))) / 3.0
    logger.info(f"Nystrom oracle: {nodes} and {2 * nodes} nodes, condition {cond:.3e}, estimate {estimate:.3e}")

    def interpolant(x):
        return (4.0 * fine_u(x) - coarse_u(x)) / 3.0

    values = (4.0 * fine[:, ::2] - coarse) / 3.0
    return GridSolution((t,), values, (cutoff / nodes,), estimate,
                        meta={'condition': float(cond)}, interpolant=interpolant)


# Laplace wedge

def _wedge_grid(spec, theta_cells: int, decades: float, refine: int):
    """Nodes in (rho = ln r, theta) with ln a1 and ln a2 on the grid; refine halves both spacings"""
    coarse_theta = spec.angle / theta_cells
    span = float(np.log(spec.lam))
    steps = int(np.ceil(span / coarse_theta)) if span > 0 else 0
    coarse_rho = span / steps if steps else coarse_theta
    reach = int(np.ceil(decades / coarse_rho))
    rho = np.log(spec.a1) + (coarse_rho / refine) * np.arange(-reach * refine, (steps + reach) * refine + 1)
    theta = (coarse_theta / refine) * np.arange(theta_cells * refine + 1)
    return rho, theta


def _wedge_fd_solve(spec, theta_cells: int, decades: float, refine: int = 1):
    rho, theta = _wedge_grid(spec, theta_cells, decades, refine)
    h_rho, h_theta = rho[1] - rho[0], theta[1] - theta[0]
    last, n = rho.size - 1, theta.size - 1
    index = np.arange(rho.size * theta.size).reshape(rho.size, theta.size)
    r = np.exp(rho)
    t1_profile, t2_profile = spec.temperature_profiles
    f1_profile, f2_profile = spec.flux_profiles

    dirichlet = np.zeros(index.shape, dtype=bool)
    values = np.zeros(index.shape)
    dirichlet[0, :] = True
    values[0, :] = (1.0 - theta / spec.angle) * spec.t1 + (theta / spec.angle) * spec.t2
    side1 = rho <= np.log(spec.a1) + 1e-12
    side2 = rho <= np.log(spec.a2) + 1e-12
    dirichlet[side1, 0] = True
    values[side1, 0] = spec.t1 + t1_profile(r[side1])
    dirichlet[side2, n] = True
    values[side2, n] = spec.t2 + t2_profile(r[side2])

    # Discrete transparent closure: cosine modes of the theta operator decay geometrically in rho
    modes = np.arange(n + 1)
    basis = np.cos(np.pi * np.outer(modes, modes) / n)
    mu = (4.0 / h_theta ** 2) * np.sin(modes * np.pi / (2.0 * n)) ** 2
    x = h_rho ** 2 * mu
    zeta = 1.0 + 0.5 * x - np.sqrt(x + 0.25 * x ** 2)
    basis_inverse = np.linalg.inv(basis)
    closure = basis @ np.diag(zeta) @ basis_inverse

    rows, cols, vals = [], [], []
    rhs = np.where(dirichlet, values, 0.0)
    fixed = index[dirichlet]
    rows.append(fixed)
    cols.append(fixed)
    vals.append(np.ones(fixed.size))

    free = ~dirichlet
    k, i = np.nonzero(free)
    center = index[k, i]

    def couple(target, weight):
        rows.append(center)
        cols.append(target)
        vals.append(np.broadcast_to(weight, center.shape).astype(float))

    couple(center, -2.0 / h_rho ** 2 - 2.0 / h_theta ** 2)
    couple(index[k - 1, i], 1.0 / h_rho ** 2)
    inner = k < last
    rows.append(center[inner])
    cols.append(index[k[inner] + 1, i[inner]])
    vals.append(np.full(inner.sum(), 1.0 / h_rho ** 2))
    edge = ~inner
    for kk, ii, node in zip(k[edge], i[edge], center[edge]):
        rows.append(np.full(n + 1, node))
        cols.append(index[kk, :])
        vals.append(closure[ii] / h_rho ** 2)
    upper_weight = np.where(i == 0, 2.0, 1.0) / h_theta ** 2
    lower_weight = np.where(i == n, 2.0, 1.0) / h_theta ** 2
    has_left, has_right = i > 0, i < n
    rows += [center[has_right], center[has_left]]
    cols += [index[k[has_right], i[has_right] + 1], index[k[has_left], i[has_left] - 1]]
    vals += [upper_weight[has_right], lower_weight[has_left]]
    flux_rhs = np.zeros(center.size)
    at0, atn = i == 0, i == n
    flux_rhs[at0] = -2.0 * r[k[at0]] * f1_profile(r[k[at0]]) / h_theta
    flux_rhs[atn] = -2.0 * r[k[atn]] * f2_profile(r[k[atn]]) / h_theta
    rhs[k, i] = flux_rhs

    size = index.size
    matrix = sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                               shape=(size, size)).tocsr()
    solution = spsolve(matrix, rhs.ravel()).reshape(index.shape)
    far_field = float((basis_inverse @ solution[last])[0])
    return rho, theta, solution, far_field


def laplace_wedge_fd(spec, theta_cells: int = WEDGE_FD_THETA_CELLS, decades: float = WEDGE_FD_DECADES) -> GridSolution:
    """
    Temperature in the wedge by the five-point Laplacian in (ln r, theta) on two
    grids. Sides carry Dirichlet data below a_j and flux data above; the
    outer row is closed by the decaying cosine modes, whose constant mode is
    the temperature at infinity.
    """
    rho, theta, coarse, far_coarse = _wedge_fd_solve(spec, theta_cells, decades)
    _, _, fine, far_fine = _wedge_fd_solve(spec, theta_cells, decades, refine=2)
    fine_on_coarse = fine[::2, ::2]
    # The square-root edge singularities are excluded from the refinement estimate
    grid_rho, grid_theta = np.meshgrid(rho, theta, indexing='ij')
    away = np.ones(grid_rho.shape, dtype=bool)
    for edge_rho, edge_theta in ((np.log(spec.a1), 0.0), (np.log(spec.a2), spec.angle)):
        away &= np.hypot(grid_rho - edge_rho, grid_theta - edge_theta) > 0.25
    estimate = max(float(np.max(np.abs(fine_on_coarse - coarse)[away])), abs(far_fine - far_coarse))
    logger.info(f"Wedge FD oracle: {rho.size}x{theta.size} and refined grids, far field {far_fine:.8g}, "
                f"estimate {estimate:.3e}")
    tolerance = ORACLE_TOLERANCES['wedge']
    if estimate > tolerance:
        raise ConvergenceError(f"wedge grid refinement estimate {estimate:.3e} exceeds {tolerance}")
    interpolator = RegularGridInterpolator((rho, theta), fine_on_coarse)

    def interpolant(r, th):
        points = np.broadcast_arrays(np.log(np.asarray(r, dtype=float)), np.asarray(th, dtype=float))
        return interpolator(np.stack(points, axis=-1))

    return GridSolution((rho, theta), fine_on_coarse, (rho[1] - rho[0], theta[1] - theta[0]), estimate,
                        meta={'far_field': far_fine, 'coarse_far_field': far_coarse}, interpolant=interpolant)


# Helmholtz strip with a slit

def _strip_fd_solve(spec, cells: int, half_length: float, refine: int = 1):
    """
    Five-point Helmholtz operator on x in [-X, 1 + X] with u = 0 at both ends.
    y = 0 carries two rows of nodes: the lower face and the upper face, tied
    together off the slit and loaded with u_y = f on it.
    """
    hx = 1.0 / (cells * refine)
    reach = int(round(half_length * cells)) * refine
    x = -half_length + hx * np.arange(2 * reach + cells * refine + 1)
    n_minus = refine * max(2, int(round(spec.b_minus * cells)))
    n_plus = refine * max(2, int(round(spec.b_plus * cells)))
    h_minus, h_plus = spec.b_minus / n_minus, spec.b_plus / n_plus
    y_lower = -spec.b_minus + h_minus * np.arange(n_minus + 1)
    y_upper = h_plus * np.arange(n_plus + 1)
    face_lo, face_up = n_minus, n_minus + 1
    row_count = n_minus + n_plus + 2
    index = np.arange(row_count * x.size).reshape(row_count, x.size)
    k2 = complex(spec.k) ** 2
    inner = np.arange(1, x.size - 1)
    slit = (x > 1e-12) & (x < 1.0 - 1e-12)
    on_slit = slit[inner]
    load = np.zeros(x.size)
    load[inner[on_slit]] = spec.load(x[inner[on_slit]])

    rows, cols, vals = [], [], []
    rhs = np.zeros(index.shape, dtype=complex)

    def couple(centre, target, weight):
        rows.append(centre)
        cols.append(target)
        vals.append(np.full(centre.size, weight, dtype=complex))

    def helmholtz(r, mask, vertical):
        j = inner[mask]
        centre = index[r, j]
        couple(centre, centre, -2.0 / hx ** 2 + k2 - sum(weight for _, weight in vertical))
        couple(centre, index[r, j - 1], 1.0 / hx ** 2)
        couple(centre, index[r, j + 1], 1.0 / hx ** 2)
        for target_row, weight in vertical:
            couple(centre, index[target_row, j], weight)

    def merged(r):
        """Off-slit nodes of y = 0; a slit neighbour enters as the mean of its two faces"""
        j = inner[~on_slit]
        centre = index[r, j]
        mean = 2.0 / (h_plus + h_minus)
        couple(centre, centre, -2.0 / hx ** 2 + k2 - mean / h_plus - mean / h_minus)
        couple(centre, index[r + 1, j], mean / h_plus)
        couple(centre, index[face_lo - 1, j], mean / h_minus)
        for step in (-1, 1):
            neighbour = j + step
            faces = slit[neighbour]
            couple(centre[~faces], index[r, neighbour[~faces]], 1.0 / hx ** 2)
            couple(centre[faces], index[r, neighbour[faces]], 0.5 / hx ** 2)
            couple(centre[faces], index[face_lo, neighbour[faces]], 0.5 / hx ** 2)

    everywhere = np.ones(inner.size, dtype=bool)
    for r in range(row_count):
        if r == 0:
            helmholtz(r, everywhere, [(1, 2.0 / h_minus ** 2)])
        elif r < face_lo:
            helmholtz(r, everywhere, [(r - 1, 1.0 / h_minus ** 2), (r + 1, 1.0 / h_minus ** 2)])
        elif r == face_lo:
            helmholtz(r, on_slit, [(r - 1, 2.0 / h_minus ** 2)])
            rhs[r, inner[on_slit]] = -2.0 * load[inner[on_slit]] / h_minus
            j = inner[~on_slit]
            couple(index[r, j], index[r, j], 1.0)
            couple(index[r, j], index[face_up, j], -1.0)
        elif r == face_up:
            helmholtz(r, on_slit, [(r + 1, 2.0 / h_plus ** 2)])
            rhs[r, inner[on_slit]] = 2.0 * load[inner[on_slit]] / h_plus
            merged(r)
        elif r < row_count - 1:
            helmholtz(r, everywhere, [(r - 1, 1.0 / h_plus ** 2), (r + 1, 1.0 / h_plus ** 2)])
        else:
            helmholtz(r, everywhere, [(r - 1, 2.0 / h_plus ** 2)])
    ends = np.concatenate([index[:, 0], index[:, -1]])
    couple(ends, ends, 1.0)

    size = index.size
    matrix = sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                               shape=(size, size)).tocsr()
    solution = spsolve(matrix, rhs.ravel()).reshape(index.shape)
    return x, y_lower, y_upper, solution[:face_lo + 1], solution[face_up:]


def helmholtz_strip_fd(spec, cells_per_unit: int = STRIP_FD_CELLS_PER_UNIT,
                       half_length: float = STRIP_FD_HALF_LENGTH, check_domain: bool = True) -> GridSolution:
    """
    Field of the slit strip by second-order finite differences on two grids.
    The refinement estimate leaves out the neighbourhoods of the slit tips,
    where the field has square-root behaviour.
    """
    if not complex(spec.k).imag > 0:
        raise DomainError(f"k={spec.k} must have a positive imaginary part")
    x, y_lower, y_upper, coarse_lower, coarse_upper = _strip_fd_solve(spec, cells_per_unit, half_length)
    _, _, _, fine_lower, fine_upper = _strip_fd_solve(spec, cells_per_unit, half_length, refine=2)
    fine_lower, fine_upper = fine_lower[::2, ::2], fine_upper[::2, ::2]
    estimate = 0.0
    for y, coarse, fine in ((y_lower, coarse_lower, fine_lower), (y_upper, coarse_upper, fine_upper)):
        grid_y, grid_x = np.meshgrid(y, x, indexing='ij')
        away = (np.hypot(grid_x, grid_y) > 0.25) & (np.hypot(grid_x - 1.0, grid_y) > 0.25)
        estimate = max(estimate, float(np.max(np.abs(fine - coarse)[away])))
    logger.info(f"Strip FD oracle: {x.size} columns, {y_lower.size + y_upper.size} rows and refined grid, "
                f"estimate {estimate:.3e}")
    tolerance = ORACLE_TOLERANCES['strip']
    if estimate > tolerance:
        raise ConvergenceError(f"strip grid refinement estimate {estimate:.3e} exceeds {tolerance}")
    domain_change = 0.0
    if check_domain:
        x_wide, _, _, wide_lower, wide_upper = _strip_fd_solve(spec, cells_per_unit, 2 * half_length)
        offset = int(round(half_length * cells_per_unit))
        window = (x >= -1.0) & (x <= 2.0)
        domain_change = max(
            float(np.max(np.abs(wide_lower[:, offset:offset + x.size][:, window] - coarse_lower[:, window]))),
            float(np.max(np.abs(wide_upper[:, offset:offset + x.size][:, window] - coarse_upper[:, window]))))
        if domain_change > 0.1 * tolerance:
            raise ConvergenceError(f"doubling the half-length {half_length} changes the field by {domain_change:.3e}")

    def grid_interpolator(y, values):
        real = RegularGridInterpolator((y, x), values.real)
        imag = RegularGridInterpolator((y, x), values.imag)
        return lambda points: real(points) + 1j * imag(points)

    upper, lower = grid_interpolator(y_upper, fine_upper), grid_interpolator(y_lower, fine_lower)

    def interpolant(px, py, side: int = 1):
        px, py = np.broadcast_arrays(np.asarray(px, dtype=float), np.asarray(py, dtype=float))
        points = np.stack([py, px], axis=-1)
        use_upper = (py > 0) | ((py == 0) & (side >= 0))
        out = np.empty(px.shape, dtype=complex)
        if np.any(use_upper):
            out[use_upper] = upper(points[use_upper])
        if np.any(~use_upper):
            out[~use_upper] = lower(points[~use_upper])
        return out

    values = np.concatenate([fine_lower, fine_upper]).T
    return GridSolution((x, np.concatenate([y_lower, y_upper])), values,
                        (x[1] - x[0], y_upper[1] - y_upper[0]), estimate,
                        meta={'opening': fine_upper[0] - fine_lower[-1], 'domain_change': domain_change,
                              'lower': (y_lower, fine_lower), 'upper': (y_upper, fine_upper)},
                        interpolant=interpolant)
