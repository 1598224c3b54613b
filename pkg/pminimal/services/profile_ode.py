"""
Rotational p-minimal tubes

The waist-symmetric tube with radius R(tau) and fixed axis satisfies
R R'' = beta (1 + R'^2) with beta = (n-1)/(p-1). This module integrates
that equation, evaluates the quadrature constants bounding the life-time
of p-minimal tubes, samples the model hypersurface
x(theta, tau) = xi(tau) + R(tau) theta + tau e_{n+1} and evaluates its
directional curvature along the axis.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.special import beta as beta_function

from pminimal.config import settings
from pminimal.exceptions import DivergenceError, DomainError
from pminimal.models.profile import (
    PROFILE_COMPLETE,
    PROFILE_TRUNCATED,
    ModelSurface,
    Profile,
    TubeShape,
)
from pminimal.services.geom_kernel import direction_grid

logger = logging.getLogger(__name__)

QUAD_TOL = 1e-13
QUAD_LIMIT = 200
MIN_THETA_COUNT = 8
ODE_RTOL = 1e-12
ODE_ATOL = 1e-14


def beta(n: int, p: float) -> float:
    """(n-1)/(p-1)"""
    if int(n) != n or n < 2:
        raise DomainError(f"Dimension n must be an integer >= 2, got {n}")
    if not p > 1.0:
        raise DomainError("p must exceed 1")
    return (n - 1) / (p - 1.0)


def _check_quadrature(name: str, error: float, limit: float = 1e-10) -> None:
    if error > limit:
        logger.warning("%s quadrature error estimate %.2e exceeds %.0e", name, error, limit)


def c_beta(beta_value: float) -> float:
    """Integral of (1 + t^{2 beta})^{-1/2} over [0, inf)

    The range is split at t = 1 and the tail mapped to [0, 1] by t -> 1/x,
    which turns it into x^{beta-2} (1 + x^{2 beta})^{-1/2}; the algebraic
    factor is handed to the weighted quadrature rule.

    Raises:
        DivergenceError: If beta <= 1
    """
    if not beta_value > 1.0:
        raise DivergenceError("c_beta", beta_value)

    def smooth(x):
        return 1.0 / math.sqrt(1.0 + x ** (2.0 * beta_value))

    head, head_err = quad(smooth, 0.0, 1.0, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=QUAD_LIMIT)
    tail, tail_err = quad(
        smooth, 0.0, 1.0,
        weight="alg", wvar=(beta_value - 2.0, 0.0),
        epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=QUAD_LIMIT,
    )
    _check_quadrature("c_beta", head_err + tail_err)
    return head + tail


def c_beta_closed_form(beta_value: float) -> float:
    """(1/2b) B(1/2b, 1/2 - 1/2b)"""
    if not beta_value > 1.0:
        raise DivergenceError("c_beta", beta_value)
    a = 1.0 / (2.0 * beta_value)
    return a * beta_function(a, 0.5 - a)


def life_time(shape: TubeShape, r: float) -> float:
    """Height span of the equality tube with waist radius r

    Equals 2r times the integral of x^{beta-2} (1 - x^{2 beta})^{-1/2} over
    [0, 1] after s -> 1/x. Returns math.inf when beta <= 1.
    """
    if not r > 0.0:
        raise DomainError(f"Waist radius must be positive, got {r}")
    b = shape.beta
    if b <= 1.0:
        return math.inf

    def smooth(x):
        # sqrt((1 - x) / (1 - x^{2b})), continuous at both ends
        if x <= 0.0:
            return 1.0
        if x >= 1.0:
            return 1.0 / math.sqrt(2.0 * b)
        return math.sqrt((1.0 - x) / -math.expm1(2.0 * b * math.log(x)))

    value, error = quad(
        smooth, 0.0, 1.0,
        weight="alg", wvar=(b - 2.0, -0.5),
        epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=QUAD_LIMIT,
    )
    _check_quadrature("life_time", error)
    return 2.0 * r * value


def life_time_closed_form(beta_value: float) -> float:
    """Life-time of the equality tube per unit waist radius"""
    if beta_value <= 1.0:
        return math.inf
    return beta_function((beta_value - 1.0) / (2.0 * beta_value), 0.5) / beta_value


STOP_BLOWUP = "blow-up"
STOP_UNDERFLOW = "step size underflow"


def _integrate_branch(r: float, beta_value: float, h: float, steps: int, blowup: float):
    """Integrate R'' = beta (1 + R'^2)/R from the waist on the grid tau = k h

    Returns the radii and slopes at the grid nodes reached and the reason
    integration stopped early (None when the whole span was covered).
    """
    def rhs(_, y):
        return [y[1], beta_value * (1.0 + y[1] * y[1]) / y[0]]

    def blow_up(_, y):
        return y[0] - blowup

    blow_up.terminal = True
    blow_up.direction = 1

    nodes = h * np.arange(steps + 1)
    solution = solve_ivp(
        rhs, (0.0, float(nodes[-1])), [r, 0.0],
        method="DOP853", t_eval=nodes, events=blow_up,
        rtol=ODE_RTOL, atol=ODE_ATOL * r,
    )
    if solution.status == 1:
        stop = STOP_BLOWUP
    elif solution.status == -1:
        # DOP853 fails only when the step drops below float spacing
        logger.debug("Integrator stopped: %s", solution.message)
        stop = STOP_UNDERFLOW
    else:
        stop = None
    return solution.y[0], solution.y[1], stop


def solve_profile(shape: TubeShape, r: float, tau_span: float, h: float) -> Profile:
    """Equality tube with waist R(0) = r, R'(0) = 0 on [-tau_span, tau_span]

    The equation is invariant under tau -> -tau, so the branch tau >= 0 is
    integrated with an adaptive Dormand-Prince pair and mirrored. Integration
    stops once R exceeds BLOWUP_FACTOR * r or the step size underflows near
    the singularity; the profile is then truncated to the grid nodes reached
    and flagged. Derivatives are taken from the right-hand
    side, not re-differenced.

    Raises:
        DomainError: If r <= 0, h <= 0 or tau_span <= 0
    """
    if not r > 0.0:
        raise DomainError(f"Waist radius must be positive, got {r}")
    if not h > 0.0 or not tau_span > 0.0:
        raise DomainError("Step size and span must be positive")

    steps = max(int(round(tau_span / h)), 1)
    radii, slopes, stop = _integrate_branch(r, shape.beta, h, steps, settings.BLOWUP_FACTOR * r)
    if len(radii) < 2:
        raise DomainError("Profile blew up within one step; reduce h")

    m = len(radii) - 1
    tau = np.arange(-m, m + 1) * h
    R = np.concatenate([radii[:0:-1], radii])
    dR = np.concatenate([-slopes[:0:-1], slopes])
    ddR = shape.beta * (1.0 + dR * dR) / R

    status = PROFILE_COMPLETE if stop is None else PROFILE_TRUNCATED
    if stop is not None:
        logger.info("Profile (beta=%g, r=%g) stopped by %s at |tau|=%.6f", shape.beta, r, stop, m * h)

    zeros = np.zeros((tau.shape[0], shape.n))
    return Profile(
        tau=tau, R=R, dR=dR, ddR=ddR,
        xi=zeros, dxi=zeros.copy(), ddxi=zeros.copy(),
        status=status,
        meta={"beta": shape.beta, "p": shape.p, "r": r},
    )


def first_integral_residual(profile: Profile, beta_value: float, r: float) -> np.ndarray:
    """Relative residual of 1 + R'^2 = (R/r)^{2 beta}"""
    conserved = (profile.R / r) ** (2.0 * beta_value)
    return np.abs(1.0 + profile.dR ** 2 - conserved) / conserved


def tube_equation_residual(profile: Profile, beta_value: float) -> np.ndarray:
    """R R'' - beta (1 + R'^2) from the stored derivatives"""
    return profile.R * profile.ddR - beta_value * (1.0 + profile.dR ** 2)


def theta_grid(n: int, count: int) -> np.ndarray:
    """Unit directions of the base sphere used to sample sections"""
    if count < MIN_THETA_COUNT:
        raise DomainError(f"theta_count must be at least {MIN_THETA_COUNT}, got {count}")
    return direction_grid(n, count)


def sample_model_surface(profile: Profile, theta_count: int) -> ModelSurface:
    """Exact samples of xi(tau) + R(tau) theta + tau e_{n+1} on the product grid"""
    thetas = theta_grid(profile.n, theta_count)
    horizontal = profile.xi[:, None, :] + profile.R[:, None, None] * thetas[None, :, :]
    heights = np.broadcast_to(profile.tau[:, None, None], horizontal.shape[:2] + (1,))
    samples = np.concatenate([horizontal, heights], axis=-1)
    return ModelSurface(profile=profile, theta_grid=thetas, samples=samples)


def k_e_model(profile: Profile, theta, index: int) -> float:
    """Curvature along the axis of the model surface at (theta, tau[index])

    Uses the outward normal. w^2 = 1/(1 + (R' + <theta, xi'>)^2) is the
    squared length of the tangential part of the axis direction.
    """
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if abs(float(np.linalg.norm(theta)) - 1.0) > 1e-12:
        raise DomainError("theta must be a unit vector")
    R = float(profile.R[index])
    if not R > 0.0:
        raise DomainError(f"Radius must be positive at node {index}")

    dR, ddR = float(profile.dR[index]), float(profile.ddR[index])
    dxi, ddxi = profile.dxi[index], profile.ddxi[index]
    slope = dR + float(theta @ dxi)
    omega = 1.0 / math.sqrt(1.0 + slope * slope)
    bracket = R * ddR + R * float(ddxi @ theta) + float(theta @ dxi) ** 2 - float(dxi @ dxi)
    return omega ** 3 / R * bracket
