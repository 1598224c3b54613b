"""
Dirichlet problem for p-minimal graphs

Solves g |grad f|^2 Delta f + (p - 2 - |grad f|^2) <Hess f grad f, grad f> = 0
on a square grid with prescribed boundary values, by damped Newton on the
central-difference discretization with continuation in p from the
uniformly elliptic case p = 2.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import spsolve

from pminimal.config import settings
from pminimal.exceptions import ConvergenceError, DomainError
from pminimal.models.surface import GraphFunction, GraphGrid

logger = logging.getLogger(__name__)

ARMIJO = 1e-4
MIN_STEP = 2.0 ** -20

# Central-difference weights (di, dj) -> (d/dx, d/dy, d2/dx2, d2/dy2, d2/dxdy), before scaling by h
_STENCIL = {
    (1, 0): (0.5, 0.0, 1.0, 0.0, 0.0),
    (-1, 0): (-0.5, 0.0, 1.0, 0.0, 0.0),
    (0, 1): (0.0, 0.5, 0.0, 1.0, 0.0),
    (0, -1): (0.0, -0.5, 0.0, 1.0, 0.0),
    (0, 0): (0.0, 0.0, -2.0, -2.0, 0.0),
    (1, 1): (0.0, 0.0, 0.0, 0.0, 0.25),
    (1, -1): (0.0, 0.0, 0.0, 0.0, -0.25),
    (-1, 1): (0.0, 0.0, 0.0, 0.0, -0.25),
    (-1, -1): (0.0, 0.0, 0.0, 0.0, 0.25),
}


@dataclass
class GraphSolution:
    """Solved graph and solver diagnostics"""
    graph: GraphFunction
    p: float
    iterations: int
    residual: float
    exponents: List[float] = field(default_factory=list)


def _derivatives(f: np.ndarray, h: float):
    """Central differences on the interior nodes"""
    c = f[1:-1, 1:-1]
    fx = (f[2:, 1:-1] - f[:-2, 1:-1]) / (2.0 * h)
    fy = (f[1:-1, 2:] - f[1:-1, :-2]) / (2.0 * h)
    fxx = (f[2:, 1:-1] - 2.0 * c + f[:-2, 1:-1]) / (h * h)
    fyy = (f[1:-1, 2:] - 2.0 * c + f[1:-1, :-2]) / (h * h)
    fxy = (f[2:, 2:] - f[2:, :-2] - f[:-2, 2:] + f[:-2, :-2]) / (4.0 * h * h)
    return fx, fy, fxx, fyy, fxy


def graph_operator(f: np.ndarray, h: float, p: float) -> np.ndarray:
    """Discrete p-minimal graph operator on the interior nodes"""
    fx, fy, fxx, fyy, fxy = _derivatives(f, h)
    slope = fx * fx + fy * fy
    laplacian = fxx + fyy
    drift = fx * fx * fxx + 2.0 * fx * fy * fxy + fy * fy * fyy
    return (1.0 + slope) * slope * laplacian + (p - 2.0 - slope) * drift


def scaled_residual(f: np.ndarray, h: float, p: float) -> float:
    """max |operator| / max(1, max g |grad f|^2)"""
    fx, fy, *_ = _derivatives(f, h)
    slope = fx * fx + fy * fy
    scale = max(1.0, float(np.max((1.0 + slope) * slope)))
    return float(np.max(np.abs(graph_operator(f, h, p)))) / scale


def _jacobian(f: np.ndarray, h: float, p: float, eps: float):
    """Sparse Jacobian of the interior operator with respect to interior values

    Exact derivative of graph_operator, except that the elliptic coefficient
    g |grad f|^2 of the second derivatives is floored at eps^2 where the
    graph is flat and the coefficient vanishes.
    """
    fx, fy, fxx, fyy, fxy = _derivatives(f, h)
    slope = fx * fx + fy * fy
    ellipticity = np.maximum((1.0 + slope) * slope, eps * eps)
    laplacian = fxx + fyy
    drift = fx * fx * fxx + 2.0 * fx * fy * fxy + fy * fy * fyy
    coupling = p - 2.0 - slope

    d_fx = 2.0 * fx * (1.0 + 2.0 * slope) * laplacian - 2.0 * fx * drift + coupling * (2.0 * fx * fxx + 2.0 * fy * fxy)
    d_fy = 2.0 * fy * (1.0 + 2.0 * slope) * laplacian - 2.0 * fy * drift + coupling * (2.0 * fy * fyy + 2.0 * fx * fxy)
    d_fxx = ellipticity + coupling * fx * fx
    d_fyy = ellipticity + coupling * fy * fy
    d_fxy = 2.0 * fx * fy * coupling

    m = f.shape[0] - 2
    index = np.arange(m * m).reshape(m, m)
    rows, cols, values = [], [], []
    for (di, dj), (wx, wy, wxx, wyy, wxy) in _STENCIL.items():
        weight = (d_fx * wx + d_fy * wy) / h + (d_fxx * wxx + d_fyy * wyy + d_fxy * wxy) / (h * h)
        # Neighbour (i+di, j+dj) in interior coordinates must itself be interior
        i0, i1 = max(0, -di), m - max(0, di)
        j0, j1 = max(0, -dj), m - max(0, dj)
        rows.append(index[i0:i1, j0:j1].ravel())
        cols.append(index[i0 + di:i1 + di, j0 + dj:j1 + dj].ravel())
        values.append(weight[i0:i1, j0:j1].ravel())
    return coo_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))),
        shape=(m * m, m * m),
    ).tocsc()


def _newton(f: np.ndarray, h: float, p: float, max_iter: int, tol: float, eps: float) -> Tuple[np.ndarray, int, float]:
    """Damped Newton with Armijo backtracking on half the squared residual"""
    f = f.copy()
    residual = graph_operator(f, h, p)
    merit = 0.5 * float(residual.ravel() @ residual.ravel())
    for iteration in range(max_iter + 1):
        scaled = scaled_residual(f, h, p)
        logger.debug("p=%.3f iteration %d scaled residual %.3e", p, iteration, scaled)
        if scaled <= tol:
            return f, iteration, scaled
        if iteration == max_iter:
            break

        step = spsolve(_jacobian(f, h, p, eps), -residual.ravel())
        if not np.all(np.isfinite(step)):
            raise ConvergenceError("Singular Newton system", scaled, iteration, p)
        step = step.reshape(residual.shape)

        length = 1.0
        while length >= MIN_STEP:
            trial = f.copy()
            trial[1:-1, 1:-1] += length * step
            trial_residual = graph_operator(trial, h, p)
            trial_merit = 0.5 * float(trial_residual.ravel() @ trial_residual.ravel())
            if trial_merit <= (1.0 - 2.0 * ARMIJO * length) * merit:
                break
            length *= 0.5
        else:
            raise ConvergenceError("Newton line search stagnated", scaled, iteration + 1, p)

        f, residual, merit = trial, trial_residual, trial_merit

    raise ConvergenceError("Newton iteration limit reached", scaled_residual(f, h, p), max_iter, p)


def continuation_path(p: float, step: float) -> List[float]:
    """Exponents from 2 to p in steps of at most step"""
    count = max(1, int(np.ceil(abs(p - 2.0) / step - 1e-12)))
    return [float(v) for v in np.linspace(2.0, p, count + 1)[1:]] if p != 2.0 else [2.0]


def _coons(values: np.ndarray) -> np.ndarray:
    """Transfinite interpolation of the boundary values into the interior"""
    size = values.shape[0]
    s = np.linspace(0.0, 1.0, size)[:, None]
    t = np.linspace(0.0, 1.0, size)[None, :]
    left, right = values[0, :][None, :], values[-1, :][None, :]
    bottom, top = values[:, 0][:, None], values[:, -1][:, None]
    corners = (
        (1 - s) * (1 - t) * values[0, 0] + s * (1 - t) * values[-1, 0]
        + (1 - s) * t * values[0, -1] + s * t * values[-1, -1]
    )
    return (1 - s) * left + s * right + (1 - t) * bottom + t * top - corners


def solve_p_minimal_graph(
    boundary: Union[np.ndarray, Callable[[np.ndarray, np.ndarray], np.ndarray]],
    p: float,
    grid: GraphGrid,
    max_iter: Optional[int] = None,
    tol: Optional[float] = None,
    continuation_step: Optional[float] = None,
) -> GraphSolution:
    """Solve the p-minimal graph equation with Dirichlet data

    Args:
        boundary: Values on the whole grid (only the edges are read) or a
            function f(x, y) evaluated on the edges
        p: Target exponent
        grid: Square grid of at most 129 nodes per side
        max_iter: Newton iterations allowed per continuation step
        tol: Target scaled residual
        continuation_step: Largest change of p between Newton solves

    Returns:
        GraphSolution with the solved graph and diagnostics

    Raises:
        DomainError: If p <= 1 or the boundary data are not finite
        ConvergenceError: If Newton stagnates
    """
    if not p > 1.0:
        raise DomainError("p must exceed 1")
    max_iter = settings.NEWTON_MAX_ITER if max_iter is None else max_iter
    tol = settings.NEWTON_TOL if tol is None else tol
    step = settings.CONTINUATION_STEP if continuation_step is None else continuation_step
    eps = settings.NEWTON_REGULARIZATION

    if callable(boundary):
        x, y = grid.coordinates()
        values = np.asarray(boundary(x, y), dtype=float)
    else:
        values = np.asarray(boundary, dtype=float)
    if values.shape != (grid.size, grid.size):
        raise DomainError(f"Boundary values must have shape {(grid.size, grid.size)}")
    mask = grid.boundary_mask()
    if not np.all(np.isfinite(values[mask])):
        raise DomainError("Boundary values must be finite")

    f = _coons(np.where(mask, values, 0.0))
    total = 0
    path = continuation_path(p, step)
    for exponent in path:
        f, iterations, residual = _newton(f, grid.spacing, exponent, max_iter, tol, eps)
        total += iterations
        logger.info("Solved p=%.3f in %d Newton steps (scaled residual %.2e)", exponent, iterations, residual)

    return GraphSolution(
        graph=GraphFunction.from_grid(grid, f),
        p=p,
        iterations=total,
        residual=residual,
        exponents=path,
    )
