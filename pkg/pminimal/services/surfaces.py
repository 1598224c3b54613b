"""
Analytic surfaces and graph boundaries

Builders for the sampled surfaces the laboratory verifies against: local
stencil patches of spheres, cylinders, catenoids and rotational tubes,
closed patches for section extraction, model surfaces of analytic
profiles, and the named boundary traces of the graph solver.
"""

import re
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from pminimal.exceptions import DomainError
from pminimal.models.profile import ModelSurface, Profile
from pminimal.models.surface import GraphGrid, Patch
from pminimal.services.discrete_surface import surface_normal
from pminimal.services.profile_ode import sample_model_surface

# ---------------------------------------------------------------------------
# Patches
# ---------------------------------------------------------------------------


def parametric_patch(
    fn: Callable[..., np.ndarray],
    axes: Sequence[np.ndarray],
    periodic: Optional[Sequence[bool]] = None,
    time_axis: Optional[int] = None,
) -> Patch:
    """Sample fn(u_1, ..., u_n) -> (..., n+1) on the product of uniform axes"""
    grids = np.meshgrid(*axes, indexing="ij")
    positions = fn(*grids)
    spacing = tuple(float(axis[1] - axis[0]) for axis in axes)
    return Patch(
        positions=positions,
        spacing=spacing,
        periodic=tuple(periodic) if periodic else (),
        time_axis=time_axis,
    )


def local_axes(center: Sequence[float], spacing: Sequence[float], half_width: int = 2):
    return [c + np.arange(-half_width, half_width + 1) * h for c, h in zip(center, spacing)]


def orient(patch: Patch, node: Tuple[int, ...], outward: np.ndarray) -> Patch:
    """Flip the patch orientation so the normal at node has positive component along outward"""
    if float(surface_normal(patch, node) @ outward) < 0.0:
        patch.orientation = -patch.orientation
    return patch


def center_node(patch: Patch) -> Tuple[int, ...]:
    return tuple(size // 2 for size in patch.shape)


def _sphere(theta, phi):
    return np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)


def _cylinder(phi, z):
    return np.stack([np.cos(phi), np.sin(phi), z], axis=-1)


def _catenoid(phi, tau):
    return np.stack([np.cosh(tau) * np.cos(phi), np.cosh(tau) * np.sin(phi), tau], axis=-1)


def sphere_patch(h: float, center: Tuple[float, float] = (1.1, 0.4), half_width: int = 2) -> Patch:
    """Unit sphere around polar angle center[0], azimuth center[1], outward normal"""
    patch = parametric_patch(_sphere, local_axes(center, (h, h), half_width))
    node = center_node(patch)
    return orient(patch, node, patch.point(node))


def cylinder_patch(h: float, center: Tuple[float, float] = (0.3, 0.2), half_width: int = 2) -> Patch:
    """Unit cylinder about the vertical axis, outward normal"""
    patch = parametric_patch(_cylinder, local_axes(center, (h, h), half_width))
    node = center_node(patch)
    return orient(patch, node, patch.point(node) * np.array([1.0, 1.0, 0.0]))


def catenoid_patch(h: float, center: Tuple[float, float] = (0.3, 0.0), half_width: int = 2) -> Patch:
    """Catenoid x = (cosh tau cos phi, cosh tau sin phi, tau), outward normal"""
    patch = parametric_patch(_catenoid, local_axes(center, (h, h), half_width))
    node = center_node(patch)
    return orient(patch, node, patch.point(node) * np.array([1.0, 1.0, 0.0]))


def plane_patch(h: float, slopes: Tuple[float, float] = (0.3, -0.2), half_width: int = 2) -> Patch:
    """Graph of a linear function, upward normal"""
    def plane(x, y):
        return np.stack([x, y, slopes[0] * x + slopes[1] * y], axis=-1)
    return parametric_patch(plane, local_axes((0.0, 0.0), (h, h), half_width))


def catenoid_band(count: int, h: float, height: float) -> Patch:
    """Closed catenoid band over |tau| <= height with count meridians"""
    phi = 2.0 * np.pi * np.arange(count) / count
    tau = np.arange(-int(round(height / h)), int(round(height / h)) + 1) * h
    patch = parametric_patch(_catenoid, [phi, tau], periodic=(True, False), time_axis=1)
    node = center_node(patch)
    return orient(patch, node, patch.point(node) * np.array([1.0, 1.0, 0.0]))


def sphere_barrel(count: int = 64, h: float = 1e-2, height: float = 0.5) -> Patch:
    """Unit sphere between the planes x_3 = -height and x_3 = height"""
    def barrel(phi, z):
        radius = np.sqrt(1.0 - z * z)
        return np.stack([radius * np.cos(phi), radius * np.sin(phi), z], axis=-1)

    phi = 2.0 * np.pi * np.arange(count) / count
    z = np.arange(-int(round(height / h)), int(round(height / h)) + 1) * h
    patch = parametric_patch(barrel, [phi, z], periodic=(True, False), time_axis=1)
    node = center_node(patch)
    return orient(patch, node, patch.point(node) * np.array([1.0, 1.0, 0.0]))


def half_plane(h: float = 0.1, size: int = 11) -> Patch:
    """Vertical half-plane {x_2 = 0, x_1 >= 0}: its sections are unbounded rays"""
    def sheet(s, z):
        return np.stack([s, np.zeros_like(s), z], axis=-1)
    axis = np.arange(size) * h
    return parametric_patch(sheet, [axis, axis - axis[size // 2]], time_axis=1)


def hyperspherical(angles: Sequence[np.ndarray]) -> np.ndarray:
    """Unit vectors (cos a1, sin a1 cos a2, ..., sin a1 ... sin a_{k}) on S^k"""
    components = []
    carry = np.ones_like(angles[0])
    for angle in angles:
        components.append(carry * np.cos(angle))
        carry = carry * np.sin(angle)
    components.append(carry)
    return np.stack(components, axis=-1)


_DEFAULT_ANGLES = (1.1, 0.9, 0.7)


def tube_patch(
    profile: Profile,
    index: int,
    h_angle: Optional[float] = None,
    angles: Optional[Sequence[float]] = None,
    half_width: int = 2,
) -> Patch:
    """Local patch of the model surface of a profile around node index

    Parameters are the hyperspherical angles of theta followed by tau,
    sampled on the profile's own height grid. The normal points away from
    the axis.
    """
    n = profile.n
    if index - half_width < 0 or index + half_width >= len(profile):
        raise DomainError(f"Node {index} is too close to the end of the profile")
    h_angle = h_angle or profile.h
    angles = tuple(angles) if angles is not None else _DEFAULT_ANGLES[: n - 1]
    if len(angles) != n - 1:
        raise DomainError(f"A tube in dimension {n} needs {n - 1} angles")

    axes = local_axes(angles, (h_angle,) * (n - 1), half_width)
    axes.append(np.arange(index - half_width, index + half_width + 1))
    grids = np.meshgrid(*axes, indexing="ij")
    k = grids[-1]
    theta = hyperspherical(grids[:-1])
    horizontal = profile.xi[k] + profile.R[k][..., None] * theta
    positions = np.concatenate([horizontal, profile.tau[k][..., None]], axis=-1)

    patch = Patch(positions=positions, spacing=(h_angle,) * (n - 1) + (profile.h,), time_axis=n - 1)
    node = center_node(patch)
    outward = np.append(hyperspherical([np.asarray(a) for a in angles]), 0.0)
    return orient(patch, node, outward)


# ---------------------------------------------------------------------------
# Model surfaces
# ---------------------------------------------------------------------------

def analytic_profile(
    radius: Callable[[np.ndarray], np.ndarray],
    slope: Callable[[np.ndarray], np.ndarray],
    curvature: Callable[[np.ndarray], np.ndarray],
    tau: np.ndarray,
    n: int = 2,
) -> Profile:
    """Profile with exact derivatives and a fixed axis"""
    zeros = np.zeros((tau.shape[0], n))
    return Profile(
        tau=tau, R=radius(tau), dR=slope(tau), ddR=curvature(tau),
        xi=zeros, dxi=zeros.copy(), ddxi=zeros.copy(),
    )


def _height_grid(h: float, span: float) -> np.ndarray:
    m = int(round(span / h))
    return np.arange(-m, m + 1) * h


def cylinder_surface(h: float = 1e-2, span: float = 1.0, theta_count: int = 64, n: int = 2) -> ModelSurface:
    tau = _height_grid(h, span)
    profile = analytic_profile(np.ones_like, np.zeros_like, np.zeros_like, tau, n)
    return sample_model_surface(profile, theta_count)


def catenoid_surface(h: float = 1e-2, span: float = 1.0, theta_count: int = 64) -> ModelSurface:
    tau = _height_grid(h, span)
    profile = analytic_profile(np.cosh, np.sinh, np.cosh, tau)
    return sample_model_surface(profile, theta_count)


def concave_radius_surface(h: float = 1e-2, span: float = 1.0, theta_count: int = 64, n: int = 2) -> ModelSurface:
    """Tube with the concave radius 1.5 - tau^2 / 2"""
    tau = _height_grid(h, span)
    profile = analytic_profile(
        lambda t: 1.5 - 0.5 * t * t,
        lambda t: -t,
        lambda t: -np.ones_like(t),
        tau, n,
    )
    return sample_model_surface(profile, theta_count)


# ---------------------------------------------------------------------------
# Graph boundaries
# ---------------------------------------------------------------------------

GraphTrace = Callable[[np.ndarray, np.ndarray], np.ndarray]

CATENOID_LOWER = (1.5, -0.5)
UNIT_LOWER = (0.0, 0.0)
DOMAIN_LENGTH = 1.0


def affine_trace(x, y):
    return 0.1 + 0.5 * x - 0.3 * y


def catenoid_trace(x, y):
    """Upper half of the catenoid over the annulus r > 1, f = arccosh(r)"""
    return np.arccosh(np.sqrt(x * x + y * y))


def sinusoid_trace(x, y):
    return x + 0.2 * np.sin(np.pi * x) * np.cos(np.pi * y)


BOUNDARY_TRACES: Dict[str, GraphTrace] = {
    "affine": affine_trace,
    "catenoid": catenoid_trace,
    "catenoid-trace": catenoid_trace,
    "sinusoid": sinusoid_trace,
}

_TERM = re.compile(r"\s*([+-])?\s*(?:(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*\*\s*)?([a-z]+(?:-trace)?)\s*")


def parse_boundary(expression: str) -> Tuple[GraphTrace, Tuple[float, float]]:
    """Parse a sum of scaled named traces, e.g. 'sinusoid + 0.5*affine'

    Returns the trace and the lower corner of its unit square domain
    (shifted onto the annulus when a catenoid term is present).
    """
    terms = []
    position = 0
    text = expression.strip()
    if not text:
        raise DomainError("Empty boundary expression")
    while position < len(text):
        match = _TERM.match(text, position)
        if match is None or match.end() == position:
            raise DomainError(f"Cannot parse boundary expression at '{text[position:]}'")
        sign, coefficient, name = match.groups()
        if terms and sign is None:
            raise DomainError(f"Missing operator before '{name}'")
        if name not in BOUNDARY_TRACES:
            raise DomainError(f"Unknown boundary '{name}'. Known: {', '.join(sorted(BOUNDARY_TRACES))}")
        weight = float(coefficient) if coefficient else 1.0
        terms.append((-weight if sign == "-" else weight, BOUNDARY_TRACES[name]))
        position = match.end()

    def trace(x, y):
        return sum(weight * fn(x, y) for weight, fn in terms)

    uses_catenoid = any(fn is catenoid_trace for _, fn in terms)
    return trace, CATENOID_LOWER if uses_catenoid else UNIT_LOWER


def boundary_grid(expression: str, size: int) -> Tuple[GraphGrid, np.ndarray, GraphTrace]:
    """Grid, traced values on the whole grid, and the trace itself"""
    trace, lower = parse_boundary(expression)
    grid = GraphGrid.over(lower, DOMAIN_LENGTH, size)
    x, y = grid.coordinates()
    return grid, trace(x, y), trace
