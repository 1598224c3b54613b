import math

import numpy as np
import pytest

from pminimal.exceptions import DomainError
from pminimal.models.profile import TubeShape
from pminimal.models.surface import GraphFunction, GraphGrid
from pminimal.services import discrete_surface, surfaces
from pminimal.services.graph_solver import graph_operator
from pminimal.services.profile_ode import solve_profile

E3 = np.array([0.0, 0.0, 1.0])


def _axis(n):
    e = np.zeros(n + 1)
    e[-1] = 1.0
    return e


def test_sphere_curvature():
    """Test principal curvatures -1, -1 of the unit sphere with outward normal"""
    patch = surfaces.sphere_patch(1e-3)
    node = surfaces.center_node(patch)
    data = discrete_surface.curvature_at(patch, node, E3)
    assert np.allclose(data.principal_curvatures, [-1.0, -1.0], atol=1e-5)
    assert data.mean_curvature == pytest.approx(-2.0, abs=1e-5)
    assert np.allclose(data.normal, patch.point(node), atol=1e-5)


def test_cylinder_curvature():
    """Test principal curvatures -1 and 0 of the unit cylinder"""
    patch = surfaces.cylinder_patch(1e-3)
    data = discrete_surface.curvature_at(patch, surfaces.center_node(patch), E3)
    assert np.allclose(data.principal_curvatures, [-1.0, 0.0], atol=1e-5)


def test_plane_is_flat():
    """Test that an affine graph has vanishing shape operator and upward normal"""
    patch = surfaces.plane_patch(1e-2)
    data = discrete_surface.curvature_at(patch, surfaces.center_node(patch), E3)
    assert np.max(np.abs(data.shape_operator)) <= 1e-8
    assert data.normal[2] > 0.0


def test_catenoid_is_minimal():
    """Test H = 0 on the catenoid"""
    patch = surfaces.catenoid_patch(1e-3, center=(0.3, 0.4))
    data = discrete_surface.curvature_at(patch, surfaces.center_node(patch), E3)
    assert abs(discrete_surface.mean_curvature_identity_residual(data, 2.0)) <= 1e-5


def test_catenoid_section_curvature():
    """Test that the section mean curvature equals -(n-1)/R on the catenoid"""
    tau = 0.4
    patch = surfaces.catenoid_patch(1e-3, center=(0.3, tau))
    data = discrete_surface.curvature_at(patch, surfaces.center_node(patch), E3)
    assert discrete_surface.section_mean_curvature(data, 2.0) == pytest.approx(-1.0 / math.cosh(tau), abs=1e-5)
    assert discrete_surface.directional_curvature(data) == pytest.approx(1.0 / math.cosh(tau) ** 2, abs=1e-5)


def test_two_term_assembly_matches_identity():
    """Test that both forms of the p-Laplacian agree at a sphere node"""
    patch = surfaces.sphere_patch(1e-3)
    data = discrete_surface.curvature_at(patch, surfaces.center_node(patch), E3)
    for p in (1.5, 2.0, 3.0, 5.0):
        identity = discrete_surface.p_laplace_residual(data, p)
        assert discrete_surface.p_laplace_two_term(data, p) == pytest.approx(identity, rel=1e-10)


def test_laplace_beltrami_of_height():
    """Test Delta f = H <e, nu> against the divergence-form Laplacian"""
    patch = surfaces.sphere_patch(1e-3, half_width=3)
    node = surfaces.center_node(patch)
    data = discrete_surface.curvature_at(patch, node, E3)
    assert discrete_surface.laplace_identity_residual(data, patch, node, E3) <= 1e-5

    two_term = discrete_surface.p_laplace_two_term(
        data, 3.0, laplacian=discrete_surface.laplace_beltrami(patch, node, E3)
    )
    assert two_term == pytest.approx(discrete_surface.p_laplace_residual(data, 3.0), abs=1e-5)


def test_laplace_beltrami_needs_margin():
    """Test that the divergence stencil needs two layers of neighbours"""
    patch = surfaces.sphere_patch(1e-3)
    with pytest.raises(DomainError):
        discrete_surface.laplace_beltrami(patch, (1, 2), E3)


def test_curvature_rejects_bad_input():
    """Test errors for a boundary node and a non-unit direction"""
    patch = surfaces.sphere_patch(1e-3)
    with pytest.raises(DomainError):
        discrete_surface.curvature_at(patch, (0, 2), E3)
    with pytest.raises(DomainError):
        discrete_surface.curvature_at(patch, (2, 2), [0.0, 0.0, 2.0])


def test_critical_point_is_detected():
    """Test that e normal to the surface is a critical point"""
    patch = surfaces.plane_patch(1e-2, slopes=(0.0, 0.0))
    data = discrete_surface.curvature_at(patch, surfaces.center_node(patch), E3)
    assert discrete_surface.is_critical(data)
    with pytest.raises(DomainError):
        discrete_surface.directional_curvature(data)
    residual = discrete_surface.critical_residual(data, 3.0)
    assert residual <= 1e-12


@pytest.mark.parametrize("n,p", [(2, 2.0), (3, 2.0), (2, 3.0), (4, 3.0)])
def test_curvature_identity_on_tubes(n, p):
    """Test H + (p-2) k_e = 0 on equality tubes and second-order convergence"""
    shape = TubeShape.from_exponent(n, p)

    def residual(h):
        profile = solve_profile(shape, r=1.0, tau_span=0.5, h=h)
        index = len(profile) // 2 + int(round(0.3 / h))
        patch = surfaces.tube_patch(profile, index)
        data = discrete_surface.curvature_at(patch, surfaces.center_node(patch), _axis(n))
        return abs(discrete_surface.mean_curvature_identity_residual(data, p))

    coarse, fine = residual(2e-3), residual(1e-3)
    assert fine <= 1e-4
    assert fine < 1e-8 or coarse / fine >= 3.7


@pytest.mark.parametrize("n,p", [(2, 2.0), (3, 2.0), (3, 3.0)])
def test_section_curvature_on_tubes(n, p):
    """Test the level-set mean curvature -(n-1)/R on equality tubes"""
    profile = solve_profile(TubeShape.from_exponent(n, p), r=1.0, tau_span=0.5, h=1e-3)
    index = len(profile) // 2 + 200
    patch = surfaces.tube_patch(profile, index)
    data = discrete_surface.curvature_at(patch, surfaces.center_node(patch), _axis(n))
    expected = -(n - 1) / profile.R[index]
    assert discrete_surface.section_mean_curvature(data, p) == pytest.approx(expected, abs=1e-4)


def test_graph_equation_from_curvature():
    """Test that the nonparametric operator equals g^(3/2) |grad f|^2 (H + (p-2) k_e)"""
    grid = GraphGrid.over((0.0, 0.0), 1.0, 33)
    x, y = grid.coordinates()
    g = GraphFunction.from_grid(grid, surfaces.sinusoid_trace(x, y))
    for node in [(5, 7), (16, 16), (30, 2)]:
        for p in (1.5, 3.0):
            direct = discrete_surface.nonparametric_residual(g, p, node)
            via_curvature = discrete_surface.graph_residual_from_curvature(g, p, node)
            assert via_curvature == pytest.approx(direct, rel=1e-8, abs=1e-8)


def test_graph_operator_matches_pointwise_residual():
    """Test the vectorized solver operator against the pointwise residual"""
    grid = GraphGrid.over((0.0, 0.0), 1.0, 17)
    x, y = grid.coordinates()
    f = surfaces.sinusoid_trace(x, y)
    g = GraphFunction.from_grid(grid, f)
    operator = graph_operator(f, grid.spacing, 3.0)
    for node in [(1, 1), (8, 4), (15, 15)]:
        expected = discrete_surface.nonparametric_residual(g, 3.0, node)
        assert operator[node[0] - 1, node[1] - 1] == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_hessian_criterion_forces_planar_points():
    """Test that no nonzero symmetric matrix satisfies the criterion for p != 2"""
    rng = np.random.default_rng(3)
    for n in (2, 3):
        for p in (1.5, 3.0):
            raw = rng.normal(size=(10_000, n, n))
            matrices = 0.5 * (raw + np.swapaxes(raw, 1, 2))
            norms = np.linalg.norm(matrices, axis=(1, 2))
            relative = discrete_surface.hessian_residuals(matrices, p) / norms ** 3
            assert np.min(relative) > 1e-2


def test_hessian_criterion_admits_traceless_for_p_two():
    """Test that a traceless matrix passes for p = 2 only"""
    A = np.diag([1.0, -1.0])
    residual, planar = discrete_surface.hessian_criterion(A, 2.0)
    assert residual == 0.0 and planar
    residual, planar = discrete_surface.hessian_criterion(A, 3.0)
    assert residual == pytest.approx(math.sqrt(2.0))
    assert not planar
    assert discrete_surface.hessian_criterion(np.zeros((3, 3)), 1.5) == (0.0, True)


def test_hessian_criterion_rejects_bad_matrices():
    """Test errors for non-square and non-symmetric input"""
    with pytest.raises(DomainError):
        discrete_surface.hessian_criterion(np.zeros((2, 3)), 3.0)
    with pytest.raises(DomainError):
        discrete_surface.hessian_criterion(np.array([[0.0, 1.0], [0.0, 0.0]]), 3.0)


def test_forced_exponents():
    """Test p = 2 - k for k equal nonzero eigenvalues"""
    assert discrete_surface.forced_exponents(3) == {1: 1, 2: 0, 3: -1}


def test_exponent_domain():
    """Test that p <= 1 is rejected"""
    patch = surfaces.sphere_patch(1e-3)
    data = discrete_surface.curvature_at(patch, surfaces.center_node(patch), E3)
    with pytest.raises(DomainError):
        discrete_surface.p_laplace_residual(data, 1.0)


@pytest.mark.parametrize(
    "build,exact",
    [
        (lambda h: surfaces.sphere_patch(h), lambda: [-1.0, -1.0]),
        (lambda h: surfaces.cylinder_patch(h), lambda: [-1.0, 0.0]),
        (
            lambda h: surfaces.catenoid_patch(h, center=(0.3, 0.4)),
            lambda: [-1.0 / math.cosh(0.4) ** 2, 1.0 / math.cosh(0.4) ** 2],
        ),
    ],
    ids=["sphere", "cylinder", "catenoid"],
)
def test_curvature_converges_at_second_order(build, exact):
    """Test that halving h divides the principal curvature error by about four"""
    def error(h):
        patch = build(h)
        data = discrete_surface.curvature_at(patch, surfaces.center_node(patch), E3)
        return float(np.max(np.abs(np.sort(data.principal_curvatures) - np.sort(exact()))))

    coarse, fine = error(4e-2), error(2e-2)
    assert fine < coarse
    assert math.log2(coarse / fine) >= 1.9
