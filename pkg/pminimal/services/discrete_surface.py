"""
Finite-difference differential geometry

Curvature of sampled immersions x: grid -> R^{n+1} by second-order central
differences, the p-Laplace identities of the height function f = <x, e>,
the nonparametric p-minimal graph operator and the critical-point Hessian
criterion.

Normal convention: nu completes the tangent vectors x_1..x_n to a
positively oriented basis of R^{n+1} (times the patch orientation). For a
graph this is the upward normal. II_ij = <x_ij, nu> and A = I^{-1} II.
"""

import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np
import sympy

from pminimal.exceptions import DomainError
from pminimal.models.surface import CurvatureData, GraphFunction, Patch

logger = logging.getLogger(__name__)

CRITICAL_TOL = 1e-9
CONDITION_LIMIT = 1e12
SYMMETRY_TOL = 1e-10


# ---------------------------------------------------------------------------
# Stencils
# ---------------------------------------------------------------------------

def _shifted(node: Tuple[int, ...], *moves: Tuple[int, int]) -> Tuple[int, ...]:
    index = list(node)
    for axis, step in moves:
        index[axis] += step
    return tuple(index)


def _derivatives(patch: Patch, node: Tuple[int, ...]) -> Tuple[np.ndarray, np.ndarray]:
    """Tangents x_i (n, m) and second derivatives x_ij (n, n, m) at node"""
    n = patch.n
    h = patch.spacing
    center = patch.point(node)
    tangents = np.empty((n, n + 1))
    second = np.empty((n, n, n + 1))
    for i in range(n):
        forward = patch.point(_shifted(node, (i, 1)))
        backward = patch.point(_shifted(node, (i, -1)))
        tangents[i] = (forward - backward) / (2.0 * h[i])
        second[i, i] = (forward - 2.0 * center + backward) / (h[i] * h[i])
        for j in range(i + 1, n):
            mixed = (
                patch.point(_shifted(node, (i, 1), (j, 1)))
                - patch.point(_shifted(node, (i, 1), (j, -1)))
                - patch.point(_shifted(node, (i, -1), (j, 1)))
                + patch.point(_shifted(node, (i, -1), (j, -1)))
            ) / (4.0 * h[i] * h[j])
            second[i, j] = second[j, i] = mixed
    return tangents, second


def _metric(tangents: np.ndarray) -> np.ndarray:
    metric = tangents @ tangents.T
    if np.linalg.cond(metric) > CONDITION_LIMIT:
        raise DomainError("Degenerate metric: tangent vectors are nearly dependent")
    return metric


def _oriented_normal(tangents: np.ndarray, orientation: int = 1) -> np.ndarray:
    _, _, vt = np.linalg.svd(tangents)
    normal = vt[-1]
    if np.linalg.det(np.vstack([tangents, normal])) < 0.0:
        normal = -normal
    return orientation * normal


def surface_normal(patch: Patch, node: Tuple[int, ...]) -> np.ndarray:
    """Unit normal at an interior node"""
    tangents, _ = _derivatives(patch, node)
    _metric(tangents)
    return _oriented_normal(tangents, patch.orientation)


def _unit(e, dim: int) -> np.ndarray:
    e = np.asarray(e, dtype=float).reshape(-1)
    if e.shape[0] != dim:
        raise DomainError(f"Direction has dimension {e.shape[0]}, ambient space has {dim}")
    if abs(float(np.linalg.norm(e)) - 1.0) > 1e-12:
        raise DomainError("Direction e must be a unit vector")
    return e


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------

def curvature_at(patch: Patch, node: Tuple[int, ...], e) -> CurvatureData:
    """Normal, shape operator and the splitting of e at an interior node

    The shape operator is returned in the orthonormal frame L^{-1} X where
    the metric factors as L L^T, which makes it symmetric.

    Raises:
        DomainError: If the node is not interior or the metric is degenerate
    """
    node = tuple(int(i) for i in node)
    if not patch.is_interior(node):
        raise DomainError(f"Node {node} is not an interior node")
    e = _unit(e, patch.n + 1)

    tangents, second = _derivatives(patch, node)
    metric = _metric(tangents)
    normal = _oriented_normal(tangents, patch.orientation)

    second_form = second @ normal
    lower = np.linalg.cholesky(metric)
    lower_inv = np.linalg.inv(lower)
    frame = lower_inv @ tangents
    shape_operator = lower_inv @ second_form @ lower_inv.T
    shape_operator = 0.5 * (shape_operator + shape_operator.T)

    curvatures, directions = np.linalg.eigh(shape_operator)
    e_frame = frame @ e
    return CurvatureData(
        normal=normal,
        shape_operator=shape_operator,
        principal_curvatures=curvatures,
        principal_directions=directions,
        mean_curvature=float(np.trace(shape_operator)),
        e_tangent=frame.T @ e_frame,
        e_frame=e_frame,
        omega=float(e @ normal),
        frame=frame,
    )


def is_critical(data: CurvatureData) -> bool:
    """True where e is (numerically) normal to the surface"""
    return data.tangent_norm <= CRITICAL_TOL


def _require_noncritical(data: CurvatureData) -> float:
    norm = data.tangent_norm
    if norm <= CRITICAL_TOL:
        raise DomainError("Critical point of f = <x, e>: use hessian_criterion")
    return norm


def directional_curvature(data: CurvatureData) -> float:
    """Normal curvature k_e = <A t, t> along t = e^T/|e^T|"""
    norm = _require_noncritical(data)
    t = data.e_frame / norm
    return float(t @ data.shape_operator @ t)


def mean_curvature_identity_residual(data: CurvatureData, p: float) -> float:
    """H + (p-2) k_e, zero on p-minimal surfaces"""
    _check_exponent(p)
    return data.mean_curvature + (p - 2.0) * directional_curvature(data)


def section_mean_curvature(data: CurvatureData, p: float) -> float:
    """Mean curvature of the level set of f through the node, -(p-1) k_e / |e^T|

    Valid on p-minimal surfaces; on a rotational tube it equals -(n-1)/R
    for the outward normal.
    """
    _check_exponent(p)
    return -(p - 1.0) * directional_curvature(data) / data.tangent_norm


def _check_exponent(p: float) -> None:
    if not p > 1.0:
        raise DomainError("p must exceed 1")


def p_laplace_residual(data: CurvatureData, p: float) -> float:
    """Delta_p f = |e^T|^{p-4} w |e^T|^2 (H + (p-2) k_e) at a noncritical node"""
    _check_exponent(p)
    norm = _require_noncritical(data)
    k_e = directional_curvature(data)
    return norm ** (p - 4.0) * data.omega * norm * norm * (data.mean_curvature + (p - 2.0) * k_e)


def p_laplace_two_term(data: CurvatureData, p: float, laplacian: Optional[float] = None) -> float:
    """(p-2)|grad f|^{p-3} <grad f, grad|grad f|> + |grad f|^{p-2} Delta f

    grad f = e^T and grad|grad f| = w A(t). Delta f defaults to H w; pass a
    finite-difference Laplacian to assemble the operator independently.
    """
    _check_exponent(p)
    norm = _require_noncritical(data)
    t = data.e_frame / norm
    gradient_of_norm = data.omega * (data.shape_operator @ t)
    if laplacian is None:
        laplacian = data.mean_curvature * data.omega
    drift = (p - 2.0) * norm ** (p - 3.0) * float(data.e_frame @ gradient_of_norm)
    return drift + norm ** (p - 2.0) * laplacian


def _flux(patch: Patch, node: Tuple[int, ...], e: np.ndarray) -> Tuple[np.ndarray, float]:
    tangents, _ = _derivatives(patch, node)
    metric = _metric(tangents)
    volume = math.sqrt(np.linalg.det(metric))
    return volume * np.linalg.solve(metric, tangents @ e), volume


def laplace_beltrami(patch: Patch, node: Tuple[int, ...], e) -> float:
    """Laplace-Beltrami of f = <x, e> in divergence form

    (1/sqrt g) d_i (sqrt g g^{ij} f_j), each flux by central differences,
    so the stencil reaches two nodes in every direction.
    """
    node = tuple(int(i) for i in node)
    if not patch.is_interior(node, margin=2):
        raise DomainError(f"Node {node} needs two layers of neighbours")
    e = _unit(e, patch.n + 1)
    _, volume = _flux(patch, node, e)
    divergence = 0.0
    for i in range(patch.n):
        forward, _ = _flux(patch, _shifted(node, (i, 1)), e)
        backward, _ = _flux(patch, _shifted(node, (i, -1)), e)
        divergence += (forward[i] - backward[i]) / (2.0 * patch.spacing[i])
    return divergence / volume


def laplace_identity_residual(data: CurvatureData, patch: Patch, node: Tuple[int, ...], e) -> float:
    """|Delta f - H <e, nu>| at node"""
    return abs(laplace_beltrami(patch, node, e) - data.mean_curvature * data.omega)


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------

def _graph_derivatives(g: GraphFunction, node: Tuple[int, ...]) -> Tuple[np.ndarray, np.ndarray]:
    node = tuple(int(i) for i in node)
    if any(i < 1 or i > size - 2 for i, size in zip(node, g.f.shape)):
        raise DomainError(f"Node {node} is not an interior node")
    n, h, f = g.n, g.spacing, g.f
    gradient = np.empty(n)
    hessian = np.empty((n, n))
    for i in range(n):
        forward = f[_shifted(node, (i, 1))]
        backward = f[_shifted(node, (i, -1))]
        gradient[i] = (forward - backward) / (2.0 * h)
        hessian[i, i] = (forward - 2.0 * f[node] + backward) / (h * h)
        for j in range(i + 1, n):
            hessian[i, j] = hessian[j, i] = (
                f[_shifted(node, (i, 1), (j, 1))]
                - f[_shifted(node, (i, 1), (j, -1))]
                - f[_shifted(node, (i, -1), (j, 1))]
                + f[_shifted(node, (i, -1), (j, -1))]
            ) / (4.0 * h * h)
    return gradient, hessian


def nonparametric_residual(g: GraphFunction, p: float, node: Tuple[int, ...]) -> float:
    """g |grad f|^2 tr Hess f + (p - 2 - |grad f|^2) <Hess f grad f, grad f>

    g = 1 + |grad f|^2 is the determinant of the induced metric.
    """
    _check_exponent(p)
    gradient, hessian = _graph_derivatives(g, node)
    slope = float(gradient @ gradient)
    return (1.0 + slope) * slope * float(np.trace(hessian)) + (p - 2.0 - slope) * float(gradient @ hessian @ gradient)


def graph_residual_from_curvature(g: GraphFunction, p: float, node: Tuple[int, ...]) -> float:
    """g^{3/2} |grad f|^2 (H + (p-2) k_e) from the parametric pipeline

    The nonparametric operator rewritten through the curvature of the
    graph patch with e the vertical axis; agrees with
    nonparametric_residual up to discretization error.
    """
    _check_exponent(p)
    data = curvature_at(g.to_patch(), node, _vertical(g.n + 1))
    gradient, _ = _graph_derivatives(g, node)
    slope = float(gradient @ gradient)
    if is_critical(data):
        return 0.0
    return (1.0 + slope) ** 1.5 * slope * mean_curvature_identity_residual(data, p)


def _vertical(dim: int) -> np.ndarray:
    e = np.zeros(dim)
    e[-1] = 1.0
    return e


# ---------------------------------------------------------------------------
# Critical points
# ---------------------------------------------------------------------------

def _symmetric(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise DomainError("Shape operator must be square")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if np.max(np.abs(A - np.swapaxes(A, -1, -2)), initial=0.0) > SYMMETRY_TOL * scale:
        raise DomainError("Shape operator must be symmetric")
    return A


def hessian_residuals(matrices, p: float) -> np.ndarray:
    """Frobenius norms of A^2 (I tr A + (p-2) A) for a stack of matrices"""
    A = _symmetric(matrices)
    trace = np.trace(A, axis1=-2, axis2=-1)
    square = A @ A
    product = square * trace[..., None, None] + (p - 2.0) * (square @ A)
    return np.linalg.norm(product, axis=(-2, -1))


def hessian_criterion(A, p: float, tol: float = 1e-8) -> Tuple[float, bool]:
    """Residual of A^2 (I tr A + (p-2) A) = 0 and whether A is forced planar

    For p != 2 a vanishing residual forces A = 0; for p = 2 traceless A
    are admitted.
    """
    _check_exponent(p)
    A = _symmetric(A)
    residual = float(hessian_residuals(A, p))
    if p == 2.0:
        planar = residual <= tol
    else:
        planar = residual <= tol and float(np.linalg.norm(A)) <= tol
    return residual, planar


def critical_residual(data: CurvatureData, p: float) -> float:
    """Identity residual at a node, switching to the Hessian criterion at critical points"""
    if is_critical(data):
        return hessian_criterion(data.shape_operator, p)[0]
    return abs(mean_curvature_identity_residual(data, p))


def forced_exponents(n: int) -> Dict[int, sympy.Expr]:
    """Exponent p forced by k equal nonzero eigenvalues of a critical Hessian

    With k eigenvalues equal to lam != 0 and the rest zero, the criterion
    reads lam^3 (k + p - 2) = 0, so p = 2 - k for k = 1..n.
    """
    lam = sympy.Symbol("lam", nonzero=True)
    p = sympy.Symbol("p", real=True)
    forced = {}
    for k in range(1, n + 1):
        A = sympy.diag(*([lam] * k + [0] * (n - k)))
        criterion = A ** 2 * (sympy.eye(n) * A.trace() + (p - 2) * A)
        solutions = sympy.solve(criterion[0, 0], p)
        forced[k] = solutions[0]
    return forced
