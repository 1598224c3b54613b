"""
Tube sections and the checks run on them

A sampled tube is cut by the hyperplanes x_{n+1} = tau; every section is
summarized by its circumscribed ball (radius R, center xi), its largest
axis distance rho and its contact functional sigma. The checks compare
these series with the convexity properties and differential inequalities
satisfied by p-minimal tubes. Each check normalizes by max(1, |quantities
involved|) and returns a CheckReport.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from pminimal.config import settings
from pminimal.exceptions import DomainError, TubeViolationError
from pminimal.models.profile import ModelSurface, TubeShape
from pminimal.models.surface import Patch
from pminimal.models.tube import Section, SeriesBundle
from pminimal.schemas import CheckReport
from pminimal.services import geom_kernel
from pminimal.services.profile_ode import c_beta

logger = logging.getLogger(__name__)

Surface = Union[ModelSurface, Patch]

MIN_SECTION_POINTS = 8
ALMOST_EVERYWHERE_NOTE = (
    "holds almost everywhere; the grid check covers interior nodes only and cannot see null sets"
)

STATEMENTS = {
    "radius_convexity": "The circumscribed radius R(tau) of the sections is convex",
    "family_convexity": (
        "Sections form a convex family: Omega(t a + (1-t) b) lies in t Omega(a) + (1-t) Omega(b)"
    ),
    "delta_convexity": "Each center coordinate xi_k = R/eps - psi_k with psi_k convex",
    "center_shift": "|xi(tau0) - xi0| <= (R0 - R(tau0)) / eps along every chord",
    "tube_inequality": "R R'' >= beta (1 + R'^2) + min(beta, 1) |xi'|^2",
    "lifetime_bound": "The height span of the tube is at most 2 c_beta min R",
    "axis_distance_inequality": "rho rho'' >= (n - 1)(1 + rho'^2) for minimal tubes",
    "maximum_principle": "The surface between two sections lies in the convex hull of those sections",
}


# ---------------------------------------------------------------------------
# Sections
# ---------------------------------------------------------------------------

def _meridian_grid(surface: Surface) -> np.ndarray:
    """Samples as (heights, meridians, n+1) with meridians running along tau"""
    if isinstance(surface, ModelSurface):
        return surface.samples
    if surface.time_axis is None:
        raise TubeViolationError(None, "patch has no height axis")
    others = [axis for axis in range(surface.n) if axis != surface.time_axis]
    if not all(surface.periodic[axis] for axis in others):
        raise TubeViolationError(None, "sections are not closed: the patch is open across the height axis")
    samples = np.moveaxis(surface.positions, surface.time_axis, 0)
    return samples.reshape(samples.shape[0], -1, surface.n + 1)


def _default_heights(grid: np.ndarray) -> np.ndarray:
    heights = grid[:, :, -1]
    if np.allclose(heights, heights[:, :1], rtol=0.0, atol=1e-12):
        return heights[:, 0].copy()
    raise DomainError("Meridian heights differ across the grid; pass tau_grid explicitly")


def section_heights(surface: Surface) -> np.ndarray:
    """Heights of the sampled rows of a tube"""
    return _default_heights(_meridian_grid(surface))


def _section_points(grid: np.ndarray, tau: float, thickness: float) -> np.ndarray:
    """Points where each sampled meridian crosses x_{n+1} = tau, in R^{n+1}"""
    heights = grid[:, :, -1] - tau
    on_plane = np.abs(heights) <= thickness
    rows = [grid[on_plane]]

    below, above = heights[:-1], heights[1:]
    crossing = (below * above < 0.0) & ~on_plane[:-1] & ~on_plane[1:]
    k, j = np.nonzero(crossing)
    if k.size:
        weight = (below[k, j] / (below[k, j] - above[k, j]))[:, None]
        rows.append(grid[k, j] + weight * (grid[k + 1, j] - grid[k, j]))
    points = np.concatenate(rows, axis=0)
    points[:, -1] = tau
    return points


def extract_sections(
    surface: Surface,
    tau_grid: Optional[Sequence[float]] = None,
    contact_tol: Optional[float] = None,
    sigma_grid: Optional[int] = None,
) -> List[Section]:
    """Cut a sampled tube into horizontal sections

    Sample points lying on a plane are taken as they are; every meridian
    segment crossing the plane contributes its linear interpolant.

    Raises:
        TubeViolationError: If the surface is not a tube over the heights
    """
    grid = _meridian_grid(surface)
    taus = _default_heights(grid) if tau_grid is None else np.asarray(tau_grid, dtype=float)
    node_heights = np.unique(grid[:, :, -1])
    thickness = 0.5 * float(np.min(np.diff(node_heights))) if node_heights.size > 1 else 0.0
    thickness = min(thickness, 1e-9 * max(1.0, float(np.max(np.abs(node_heights)))))

    sections = []
    for tau in taus:
        points = _section_points(grid, float(tau), thickness)
        if points.shape[0] == 0:
            raise TubeViolationError(float(tau), "empty section")
        if points.shape[0] < MIN_SECTION_POINTS:
            raise TubeViolationError(float(tau), f"only {points.shape[0]} section points")
        projected = points[:, :-1]
        ball = geom_kernel.min_enclosing_ball(projected)
        value = geom_kernel.sigma(projected, ball, contact_tol, sigma_grid, check_circumscribed=False)
        sections.append(Section(tau=float(tau), points=projected, ball=ball, sigma=value))

    logger.info("Extracted %d sections", len(sections))
    return sections


def build_series(sections: List[Section]) -> SeriesBundle:
    """R, xi, rho and sigma along the tube"""
    if not sections:
        raise DomainError("No sections")
    return SeriesBundle.from_sections(sections)


# ---------------------------------------------------------------------------
# Finite differences on the height grid
# ---------------------------------------------------------------------------

def _first_difference(values: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Central first differences on interior nodes (nonuniform grids allowed)"""
    back = tau[1:-1] - tau[:-2]
    ahead = tau[2:] - tau[1:-1]
    shape = (-1,) + (1,) * (values.ndim - 1)
    back, ahead = back.reshape(shape), ahead.reshape(shape)
    return (
        values[2:] * back * back - values[:-2] * ahead * ahead + values[1:-1] * (ahead * ahead - back * back)
    ) / (back * ahead * (back + ahead))


def _second_difference(values: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Central second differences on interior nodes"""
    back = tau[1:-1] - tau[:-2]
    ahead = tau[2:] - tau[1:-1]
    shape = (-1,) + (1,) * (values.ndim - 1)
    back, ahead = back.reshape(shape), ahead.reshape(shape)
    return 2.0 * ((values[2:] - values[1:-1]) / ahead - (values[1:-1] - values[:-2]) / back) / (back + ahead)


def _require_nodes(bundle: SeriesBundle, count: int = 3) -> None:
    if bundle.tau.shape[0] < count:
        raise DomainError(f"Need at least {count} sections, got {bundle.tau.shape[0]}")


def _scale(*arrays) -> float:
    return max([1.0] + [float(np.max(np.abs(a))) for a in arrays if np.size(a)])


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def check_radius_convexity(bundle: SeriesBundle, tol: float = 1e-6) -> CheckReport:
    """Largest concavity of R on the interior nodes"""
    _require_nodes(bundle)
    curvature = _second_difference(bundle.R, bundle.tau)
    scale = _scale(bundle.R)
    violation = max(0.0, float(np.max(-curvature))) / scale
    return CheckReport.evaluate(
        "radius_convexity",
        STATEMENTS["radius_convexity"],
        violation,
        tol,
        {"min_second_difference": float(np.min(curvature)), "scale": scale},
    )


def check_family_convexity(
    sections: List[Section],
    trials: int = 200,
    tol: float = 1e-9,
    seed: Optional[int] = None,
    direction_count: Optional[int] = None,
) -> CheckReport:
    """Support-function test of the Minkowski family on random triples"""
    if len(sections) < 3:
        raise DomainError(f"Need at least 3 sections, got {len(sections)}")
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    dim = sections[0].points.shape[1]
    directions = geom_kernel.direction_grid(dim, direction_count or settings.FAMILY_DIRECTIONS)
    scale = _scale(*[s.ball.radius + np.linalg.norm(s.ball.center) for s in sections])

    worst, worst_triple = -math.inf, None
    for _ in range(trials):
        i, k, j = np.sort(rng.choice(len(sections), size=3, replace=False))
        t = (sections[j].tau - sections[k].tau) / (sections[j].tau - sections[i].tau)
        violation = geom_kernel.family_convexity_violation(
            sections[k].points, sections[i].points, sections[j].points, t, directions
        )
        if violation > worst:
            worst, worst_triple = violation, (sections[i].tau, sections[k].tau, sections[j].tau)

    return CheckReport.evaluate(
        "family_convexity",
        STATEMENTS["family_convexity"],
        max(worst, 0.0) / scale,
        tol,
        {
            "trials": trials,
            "directions": int(directions.shape[0]),
            "max_signed_excess": worst / scale,
            "worst_triple": list(worst_triple),
        },
    )


def _epsilon_or_none(bundle: SeriesBundle) -> Optional[float]:
    epsilon = bundle.epsilon
    return epsilon if epsilon > 1e-12 else None


def check_delta_convexity(bundle: SeriesBundle, tol: float = 1e-6) -> CheckReport:
    """Convexity of psi_k = R/eps - xi_k for every center coordinate"""
    epsilon = _epsilon_or_none(bundle)
    if epsilon is None:
        return CheckReport.skipped(
            "delta_convexity", STATEMENTS["delta_convexity"], tol,
            "sections have eps = min sigma = 0; contact sets fit in a hemisphere",
        )
    _require_nodes(bundle)
    psi = bundle.R[:, None] / epsilon - bundle.xi
    curvature = _second_difference(psi, bundle.tau)
    scale = _scale(psi)
    per_coordinate = [max(0.0, float(v)) / scale for v in np.max(-curvature, axis=0)]
    return CheckReport.evaluate(
        "delta_convexity",
        STATEMENTS["delta_convexity"],
        max(per_coordinate),
        tol,
        {"epsilon": epsilon, "per_coordinate": per_coordinate},
    )


def center_shift_bounds(R0: float, R_mid: float, epsilon: float) -> Tuple[float, float]:
    """Linear bound (R0 - R)/eps and the quadratic-root bound on the center shift"""
    linear = (R0 - R_mid) / epsilon
    gap = R0 * R0 - R_mid * R_mid
    root = math.sqrt(max(R0 * R0 - R_mid * R_mid * (1.0 - epsilon * epsilon), 0.0))
    sharp = gap / (epsilon * R_mid + root) if epsilon * R_mid + root > 0.0 else linear
    return linear, sharp


def check_center_shift(
    bundle: SeriesBundle,
    trials: int = 200,
    tol: float = 1e-9,
    seed: Optional[int] = None,
) -> CheckReport:
    """Center displacement against the chord of R on random triples"""
    epsilon = _epsilon_or_none(bundle)
    if epsilon is None:
        return CheckReport.skipped(
            "center_shift", STATEMENTS["center_shift"], tol, "sections have eps = min sigma = 0",
        )
    _require_nodes(bundle)
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    scale = _scale(bundle.R, bundle.xi)

    worst, worst_sharp = -math.inf, -math.inf
    for _ in range(trials):
        i, k, j = np.sort(rng.choice(bundle.tau.shape[0], size=3, replace=False))
        t = (bundle.tau[j] - bundle.tau[k]) / (bundle.tau[j] - bundle.tau[i])
        R0 = t * bundle.R[i] + (1.0 - t) * bundle.R[j]
        xi0 = t * bundle.xi[i] + (1.0 - t) * bundle.xi[j]
        shift = float(np.linalg.norm(bundle.xi[k] - xi0))
        linear, sharp = center_shift_bounds(float(R0), float(bundle.R[k]), epsilon)
        worst = max(worst, shift - linear)
        worst_sharp = max(worst_sharp, shift - sharp)

    return CheckReport.evaluate(
        "center_shift",
        STATEMENTS["center_shift"],
        max(worst, 0.0) / scale,
        tol,
        {"epsilon": epsilon, "trials": trials, "sharp_bound_excess": worst_sharp / scale},
    )


def tube_inequality_residual(bundle: SeriesBundle, beta_value: float) -> np.ndarray:
    """Normalized residual of R R'' - beta(1 + R'^2) - min(beta,1)|xi'|^2 on interior nodes"""
    R = bundle.R[1:-1]
    dR = _first_difference(bundle.R, bundle.tau)
    ddR = _second_difference(bundle.R, bundle.tau)
    dxi = _first_difference(bundle.xi, bundle.tau)
    forcing = beta_value * (1.0 + dR * dR) + min(beta_value, 1.0) * np.sum(dxi * dxi, axis=1)
    return (R * ddR - forcing) / np.maximum(1.0, np.maximum(np.abs(R * ddR), forcing))


def check_tube_inequality(bundle: SeriesBundle, shape: TubeShape, tol: float = 1e-4) -> CheckReport:
    """R R'' - beta (1 + R'^2) - min(beta, 1) |xi'|^2 >= 0 on interior nodes"""
    _require_nodes(bundle)
    relative = tube_inequality_residual(bundle, shape.beta)
    return CheckReport.evaluate(
        "tube_inequality",
        STATEMENTS["tube_inequality"],
        max(0.0, float(np.max(-relative))),
        tol,
        {
            "beta": shape.beta,
            "min_residual": float(np.min(relative)),
            "equality_gap": float(np.max(np.abs(relative))),
            "note": ALMOST_EVERYWHERE_NOTE,
        },
    )


def check_lifetime_bound(
    bundle: SeriesBundle,
    shape: TubeShape,
    tol: float = 1e-9,
    span: Optional[float] = None,
) -> CheckReport:
    """Span of the tube against 2 c_beta min R

    span overrides the sampled span, e.g. with the existence interval of a
    truncated profile.
    """
    if shape.beta <= 1.0:
        return CheckReport.skipped(
            "lifetime_bound", STATEMENTS["lifetime_bound"], tol,
            f"beta={shape.beta:g} <= 1: tubes of infinite life-time exist",
        )
    radius = float(np.min(bundle.R))
    bound = 2.0 * c_beta(shape.beta) * radius
    measured = bundle.span if span is None else float(span)
    spacing = float(np.max(np.diff(bundle.tau))) if bundle.tau.shape[0] > 1 else 0.0
    tolerance = max(tol, 2.0 * spacing / bound)
    return CheckReport.evaluate(
        "lifetime_bound",
        STATEMENTS["lifetime_bound"],
        max(0.0, (measured - bound) / bound),
        tolerance,
        {"span": measured, "bound": bound, "ratio": measured / bound, "min_R": radius},
    )


def check_axis_distance_inequality(
    bundle: SeriesBundle,
    n: int,
    p: Optional[float] = None,
    tol: float = 1e-4,
) -> CheckReport:
    """rho rho'' - (n-1)(1 + rho'^2) for minimal tubes, next to the tube inequality at beta = n-1"""
    if p is not None and p != 2.0:
        return CheckReport.skipped(
            "axis_distance_inequality", STATEMENTS["axis_distance_inequality"], tol,
            f"comparison inequality applies to minimal tubes (p=2), got p={p:g}",
        )
    _require_nodes(bundle)
    rho = bundle.rho[1:-1]
    d_rho = _first_difference(bundle.rho, bundle.tau)
    dd_rho = _second_difference(bundle.rho, bundle.tau)
    forcing = (n - 1) * (1.0 + d_rho * d_rho)
    relative = (rho * dd_rho - forcing) / np.maximum(1.0, np.maximum(np.abs(rho * dd_rho), forcing))
    tube = tube_inequality_residual(bundle, float(n - 1))
    return CheckReport.evaluate(
        "axis_distance_inequality",
        STATEMENTS["axis_distance_inequality"],
        max(0.0, float(np.max(-relative))),
        tol,
        {
            "min_residual": float(np.min(relative)),
            "min_tube_inequality_residual": float(np.min(tube)),
            "max_difference_to_tube_inequality": float(np.max(np.abs(relative - tube))),
        },
    )


def check_max_principle(
    surface: Surface,
    tau1: float,
    tau2: float,
    inner_samples: int = 200,
    tol: float = 1e-9,
    seed: Optional[int] = None,
) -> CheckReport:
    """Distance of interior surface samples from the hull of the two boundary sections

    On failure the touching ball of (boundary sections, samples) is
    recorded: a p-minimal surface touching a sphere of radius R from
    inside would need principal curvatures beyond 1/R there.
    """
    if not tau1 < tau2:
        raise DomainError(f"Need tau1 < tau2, got {tau1} and {tau2}")
    grid = _meridian_grid(surface)
    node_heights = np.unique(grid[:, :, -1])
    thickness = 1e-9 * max(1.0, float(np.max(np.abs(node_heights))))
    hull = np.concatenate([
        _section_points(grid, tau1, thickness),
        _section_points(grid, tau2, thickness),
    ])
    if hull.shape[0] == 0:
        raise TubeViolationError(tau1, "boundary sections are empty")

    points = grid.reshape(-1, grid.shape[-1])
    inside = points[(points[:, -1] > tau1 + thickness) & (points[:, -1] < tau2 - thickness)]
    if inside.shape[0] == 0:
        raise DomainError(f"No surface samples strictly between {tau1} and {tau2}")
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    if inside.shape[0] > inner_samples:
        inside = inside[np.sort(rng.choice(inside.shape[0], size=inner_samples, replace=False))]

    distances = np.array([geom_kernel.hull_distance(hull, q) for q in inside])
    scale = _scale(hull)
    excess = float(np.max(distances)) / scale
    details = {"samples": int(inside.shape[0]), "hull_points": int(hull.shape[0]), "tau1": tau1, "tau2": tau2}

    report = CheckReport.evaluate("maximum_principle", STATEMENTS["maximum_principle"], excess, tol, details)
    if not report.passed:
        ball = geom_kernel.touching_ball(hull, np.concatenate([hull, inside]))
        contact = inside[int(np.argmax(np.linalg.norm(inside - ball.center, axis=1)))]
        details.update({
            "touching_ball": ball.to_dict(),
            "touching_point": contact.tolist(),
            "comparison_curvature": 1.0 / ball.radius,
        })
        report = CheckReport.evaluate("maximum_principle", STATEMENTS["maximum_principle"], excess, tol, details)
    return report
