"""
Convex geometry kernel

Minimum enclosing balls, support functions, convexity of Minkowski
families, the contact-set functional sigma, convex hull membership and the
touching-ball construction used by the maximum principle. All routines
work on (N, d) point clouds with d <= 4 and are pure functions of their
inputs.
"""

import logging
import math
from itertools import combinations
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import linprog, lsq_linear, minimize, nnls
from scipy.stats import norm, qmc

from pminimal.config import settings
from pminimal.exceptions import DomainError
from pminimal.models.geometry import Ball, CloudLike, as_cloud

logger = logging.getLogger(__name__)

MAX_DIMENSION = 4
BRUTE_FORCE_LIMIT = 6
CONTAINMENT_TOL = 1e-12
SEPARATION_TOL = 1e-9
UNIT_TOL = 1e-12
_SHUFFLE_SEED = 20240601
_SHUFFLE_ATTEMPTS = 3


# ---------------------------------------------------------------------------
# Enclosing balls
# ---------------------------------------------------------------------------

def _circumball(support: np.ndarray) -> Optional[Ball]:
    """Smallest ball with every support point on its sphere (None if affinely dependent)"""
    origin = support[0]
    if support.shape[0] == 1:
        return Ball(origin, 0.0)
    edges = (support[1:] - origin).T
    gram = edges.T @ edges
    scale = float(np.max(np.diag(gram)))
    if scale == 0.0:
        return None
    if np.linalg.matrix_rank(edges, tol=1e-10 * np.sqrt(scale)) < edges.shape[1]:
        return None
    coeffs = np.linalg.solve(gram, 0.5 * np.diag(gram))
    center = origin + edges @ coeffs
    radius = float(np.max(np.linalg.norm(support - center, axis=1)))
    return Ball(center, radius)


def _inside(ball: Ball, point: np.ndarray) -> bool:
    offset = point - ball.center
    return float(np.sqrt(offset @ offset)) <= ball.radius + CONTAINMENT_TOL * (1.0 + ball.radius)


def brute_force_ball(cloud: CloudLike) -> Ball:
    """Smallest enclosing ball by trying the circumball of every subset of size <= d+1

    If rounding keeps every circumball from containing the cloud, the
    candidate center with the smallest covering radius is returned.
    """
    points = as_cloud(cloud)
    dim = points.shape[1]
    best, covering = None, None
    for size in range(1, min(points.shape[0], dim + 1) + 1):
        for subset in combinations(range(points.shape[0]), size):
            ball = _circumball(points[list(subset)])
            if ball is None or (best is not None and ball.radius >= best.radius):
                continue
            if ball.contains(points, CONTAINMENT_TOL):
                best = ball
            elif best is None:
                radius = float(np.max(np.linalg.norm(points - ball.center, axis=1)))
                if covering is None or radius < covering.radius:
                    covering = Ball(ball.center, radius)
    return best if best is not None else covering


def _move_to_front(points: List[np.ndarray], end: int, support: List[np.ndarray], dim: int) -> Optional[Ball]:
    """Ball of points[:end] with support on its sphere; reorders points in place"""
    ball = _circumball(np.array(support)) if support else None
    if support and ball is None:
        return None
    if len(support) == dim + 1:
        return ball

    i = 0
    while i < end:
        point = points[i]
        if ball is None or not _inside(ball, point):
            candidate = _move_to_front(points, i, support + [point], dim)
            if candidate is not None:
                ball = candidate
                points.insert(0, points.pop(i))
        i += 1
    return ball


def _full_rank_ball(points: np.ndarray, seed: Optional[int]) -> Ball:
    if points.shape[0] <= BRUTE_FORCE_LIMIT:
        return brute_force_ball(points)

    rng = np.random.default_rng(_SHUFFLE_SEED if seed is None else seed)
    for attempt in range(_SHUFFLE_ATTEMPTS):
        order = [points[i] for i in rng.permutation(points.shape[0])]
        ball = _move_to_front(order, len(order), [], points.shape[1])
        if ball is not None and ball.contains(points, CONTAINMENT_TOL):
            return ball
        logger.debug("Move-to-front pass %d left points outside; reshuffling", attempt + 1)

    logger.warning("Move-to-front failed on %d points; falling back to the subset search", points.shape[0])
    return brute_force_ball(points)


def min_enclosing_ball(cloud: CloudLike, seed: Optional[int] = None) -> Ball:
    """Smallest ball containing every point of the cloud

    Duplicates are removed and the cloud is expressed in its affine hull, so
    collinear and coplanar inputs are solved in their own dimension. Clouds
    of at most six points use the subset oracle; larger clouds use the
    randomized move-to-front recursion with a fixed shuffle seed.

    Raises:
        DomainError: If the cloud is empty or has more than four coordinates
    """
    points = as_cloud(cloud)
    if points.shape[1] > MAX_DIMENSION:
        raise DomainError(f"Enclosing balls are supported up to dimension {MAX_DIMENSION}")

    unique = np.unique(points, axis=0)
    if unique.shape[0] == 1:
        return Ball(unique[0], 0.0)

    # Work in the affine hull
    origin = unique.mean(axis=0)
    centered = unique - origin
    _, singular, basis = np.linalg.svd(centered, full_matrices=False)
    rank = int(np.sum(singular > singular[0] * 1e-12))
    local = _full_rank_ball(centered @ basis[:rank].T, seed)

    center = origin + local.center @ basis[:rank]
    radius = float(np.max(np.linalg.norm(points - center, axis=1)))
    return Ball(center, radius)


# ---------------------------------------------------------------------------
# Support functions
# ---------------------------------------------------------------------------

def _unit_directions(directions, dim: int) -> np.ndarray:
    dirs = np.asarray(directions, dtype=float)
    if dirs.ndim == 1:
        dirs = dirs.reshape(1, -1)
    if dirs.shape[0] == 0:
        raise DomainError("Direction list is empty")
    if dirs.shape[1] != dim:
        raise DomainError(f"Directions have dimension {dirs.shape[1]}, points have {dim}")
    norms = np.linalg.norm(dirs, axis=1)
    if np.any(norms == 0.0):
        raise DomainError("Zero direction")
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise DomainError("Directions must be unit vectors")
    return dirs


def support_value(cloud: CloudLike, direction) -> float:
    """max over points of <point, direction>"""
    points = as_cloud(cloud)
    u = _unit_directions(direction, points.shape[1])[0]
    return float(np.max(points @ u))


def support_values(cloud: CloudLike, directions) -> np.ndarray:
    """Support function of the cloud on every direction of a list"""
    points = as_cloud(cloud)
    dirs = _unit_directions(directions, points.shape[1])
    return np.max(points @ dirs.T, axis=0)


def family_convexity_violation(A: CloudLike, B: CloudLike, C: CloudLike, t: float, directions) -> float:
    """Largest excess of h_A over t h_B + (1-t) h_C on the sampled directions

    A non-positive value certifies A within t B + (1-t) C along every
    sampled direction.
    """
    a, b, c = as_cloud(A), as_cloud(B), as_cloud(C)
    if not a.shape[1] == b.shape[1] == c.shape[1]:
        raise DomainError("Clouds have different dimensions")
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"Weight t must lie in [0, 1], got {t}")
    dirs = _unit_directions(directions, a.shape[1])
    excess = support_values(a, dirs) - t * support_values(b, dirs) - (1.0 - t) * support_values(c, dirs)
    return float(np.max(excess))


def direction_grid(dim: int, count: int) -> np.ndarray:
    """Deterministic unit directions: uniform angles, Fibonacci sphere or Halton points"""
    if count < 1:
        raise DomainError("Direction grid needs at least one direction")
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        angles = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(angles), np.sin(angles)])
    if dim == 3:
        k = np.arange(count) + 0.5
        z = 1.0 - 2.0 * k / count
        ring = np.sqrt(1.0 - z * z)
        phi = np.pi * (1.0 + np.sqrt(5.0)) * k
        return np.column_stack([ring * np.cos(phi), ring * np.sin(phi), z])

    sampler = qmc.Halton(d=dim, scramble=False)
    sampler.fast_forward(1)  # first Halton point is the origin
    gauss = norm.ppf(sampler.random(count))
    return gauss / np.linalg.norm(gauss, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# Convex hulls
# ---------------------------------------------------------------------------

def _simplex_system(shifted: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Least squares system for sum c_i (p_i - q) = 0 with a weighted row for sum c_i = 1"""
    scale = max(1.0, float(np.max(np.abs(shifted))))
    weight = 1e3 * scale
    system = np.vstack([shifted.T, np.full(shifted.shape[0], weight)])
    rhs = np.zeros(shifted.shape[1] + 1)
    rhs[-1] = weight
    return system, rhs


def _simplex_weights(shifted: np.ndarray) -> Optional[np.ndarray]:
    """Non-negative weights of the nearest hull point, None if no solver produced any"""
    system, rhs = _simplex_system(shifted)
    coeffs, reported = nnls(system, rhs)
    actual = float(np.linalg.norm(system @ coeffs - rhs))
    if abs(actual - reported) > 1e-9 * rhs[-1]:
        logger.debug("nnls reported residual %.3e but left %.3e; re-solving with BVLS", reported, actual)
        coeffs = lsq_linear(system, rhs, bounds=(0.0, np.inf), method="bvls").x
    total = float(coeffs.sum())
    return coeffs / total if total > 0.0 else None


def _feasible_weights(shifted: np.ndarray) -> Optional[np.ndarray]:
    """Exact convex combination reproducing the query, None if it lies outside"""
    equalities = np.vstack([shifted.T, np.ones(shifted.shape[0])])
    target = np.zeros(shifted.shape[1] + 1)
    target[-1] = 1.0
    result = linprog(
        np.zeros(shifted.shape[0]), A_eq=equalities, b_eq=target, bounds=(0.0, None), method="highs",
    )
    return result.x if result.status == 0 else None


def hull_projection(hull_cloud: CloudLike, query) -> Tuple[float, np.ndarray]:
    """Distance from query to conv(hull_cloud) and the nearest hull point

    The simplex-constrained least squares problem is solved as a
    non-negative least squares problem whose last row enforces the unit sum
    with a large weight. The reported residual is checked against the
    actual one; a mismatch re-solves with bounded-variable least squares.
    Queries left outside are confirmed by the linear feasibility problem.
    Every candidate is a point of the hull, so the smallest distance wins.
    """
    points = as_cloud(hull_cloud)
    q = np.asarray(query, dtype=float).reshape(-1)
    if q.shape[0] != points.shape[1]:
        raise DomainError(f"Query has dimension {q.shape[0]}, hull has {points.shape[1]}")

    shifted = points - q
    best, nearest = math.inf, points[0]
    weights = _simplex_weights(shifted)
    if weights is not None:
        nearest = weights @ points
        best = float(np.linalg.norm(nearest - q))
    if best > SEPARATION_TOL:
        feasible = _feasible_weights(shifted)
        if feasible is not None and float(np.linalg.norm(feasible @ points - q)) < best:
            nearest = feasible @ points
            best = float(np.linalg.norm(nearest - q))

    if not math.isfinite(best):
        raise DomainError("Hull projection failed")
    return best, nearest


def hull_distance(hull_cloud: CloudLike, query) -> float:
    """Euclidean distance from query to the convex hull of a cloud"""
    return hull_projection(hull_cloud, query)[0]


def hull_contains(hull_cloud: CloudLike, query, tol: float = SEPARATION_TOL) -> bool:
    """Check that query lies in conv(hull_cloud) up to tol"""
    return hull_distance(hull_cloud, query) <= tol


# ---------------------------------------------------------------------------
# Contact sets
# ---------------------------------------------------------------------------

def _contact_support(unit_contacts: np.ndarray, z: np.ndarray) -> float:
    length = float(np.linalg.norm(z))
    if length == 0.0:
        return np.inf
    return float(np.max(unit_contacts @ (z / length)))


def sigma(
    cloud: CloudLike,
    ball: Ball,
    contact_tol: Optional[float] = None,
    grid_size: Optional[int] = None,
    check_circumscribed: bool = True,
) -> float:
    """min over unit y of max over contact points b of <b - xi, y> / R

    The minimum is taken over a direction grid and refined by Nelder-Mead
    from the three best grid directions. The grid value bounds the true
    minimum from above; refinement closes the gap. The result is clipped
    to [0, 1].

    Raises:
        DomainError: If the contact set is empty or the ball is not the
            circumscribed ball of the cloud
    """
    points = as_cloud(cloud)
    dim = points.shape[1]
    if ball.dimension != dim:
        raise DomainError("Ball and cloud have different dimensions")
    if ball.radius <= 0.0:
        raise DomainError("sigma is undefined for a ball of radius zero")
    tol = settings.CONTACT_TOL if contact_tol is None else contact_tol

    distances = np.linalg.norm(points - ball.center, axis=1)
    if np.any(distances > ball.radius * (1.0 + tol)):
        raise DomainError("Ball does not contain the cloud")
    contact = points[np.abs(distances - ball.radius) <= tol * ball.radius]
    if contact.shape[0] == 0:
        raise DomainError("Empty contact set")
    if check_circumscribed and hull_distance(contact, ball.center) > tol * ball.radius:
        raise DomainError("Ball is not circumscribed: its center lies outside the hull of the contact set")

    unit = (contact - ball.center) / ball.radius
    directions = direction_grid(dim, grid_size or settings.DIRECTION_GRID)
    values = np.max(unit @ directions.T, axis=0)
    best = float(values.min())

    for start in directions[np.argsort(values)[:3]]:
        result = minimize(
            lambda z: _contact_support(unit, z),
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 400 * dim},
        )
        best = min(best, float(result.fun))

    return float(np.clip(best, 0.0, 1.0))


# ---------------------------------------------------------------------------
# Touching ball
# ---------------------------------------------------------------------------

def touching_ball(generators: CloudLike, cloud: CloudLike) -> Ball:
    """Ball containing the cloud whose sphere passes through a point outside conv(generators)

    The apex a is the cloud point farthest from conv(generators), at
    distance d from its foot b. Along e = (b - a)/d the hull lies in the
    half-space <x - a, e> >= d; a ball centered at a + R0 e with R0 large
    enough keeps the whole hull inside the concentric ball of radius
    R0 - d/2. The returned radius is then the covering radius of the
    cloud, so the farthest cloud point sits on the sphere and outside the
    hull.

    Raises:
        DomainError: If the cloud lies in conv(generators)
    """
    hull = as_cloud(generators)
    points = as_cloud(cloud)
    if hull.shape[1] != points.shape[1]:
        raise DomainError("Generators and cloud have different dimensions")

    projections = [hull_projection(hull, point) for point in points]
    distances = np.array([d for d, _ in projections])
    k = int(np.argmax(distances))
    gap = float(distances[k])
    if gap <= SEPARATION_TOL:
        raise DomainError("Nothing to separate: every point lies in the convex hull of the generators")

    apex = points[k]
    axis = (projections[k][1] - apex) / np.linalg.norm(projections[k][1] - apex)
    offsets = hull - apex
    heights = offsets @ axis
    squares = np.sum(offsets * offsets, axis=1)
    denominators = np.maximum(2.0 * heights - gap, 0.5 * gap)
    radius0 = max(gap, float(np.max((squares - 0.25 * gap * gap) / denominators)))

    center = apex + radius0 * axis
    radius = float(np.max(np.linalg.norm(points - center, axis=1)))
    return Ball(center, radius)
