import math

import numpy as np
import pytest

from pminimal.exceptions import DomainError, PreconditionError
from pminimal.models.profile import TubeShape
from pminimal.schemas import CheckStatus
from pminimal.services import gauss_map, surfaces
from pminimal.services.graph_solver import solve_p_minimal_graph
from pminimal.services.profile_ode import solve_profile

E3 = np.array([0.0, 0.0, 1.0])


@pytest.fixture(scope="module")
def solved_graph():
    """p = 3 graph over the unit square with sinusoidal boundary data"""
    grid, values, _ = surfaces.boundary_grid("sinusoid", 17)
    return solve_p_minimal_graph(values, 3.0, grid).graph


def test_k_bound():
    """Test max(p-1, 1/(p-1)) on both sides of p = 2"""
    assert gauss_map.k_bound(2.0) == 1.0
    assert gauss_map.k_bound(3.0) == 2.0
    assert gauss_map.k_bound(1.5) == 2.0
    with pytest.raises(DomainError):
        gauss_map.k_bound(1.0)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 5.0])
def test_q_sweep_reaches_the_bound(p):
    """Test that max(q, 1/q) over psi attains max(p-1, 1/(p-1))"""
    psi = np.linspace(0.0, math.pi, 10_001)
    q = gauss_map.q_of_psi(p, psi)
    assert np.all(q > 0.0)
    distortion = np.maximum(q, 1.0 / q)
    assert float(np.max(distortion)) == pytest.approx(gauss_map.k_bound(p), abs=1e-9)
    assert np.all(distortion <= gauss_map.k_bound(p) + 1e-12)


def test_distortion_at_special_points():
    """Test the ratio, the parabolic and the planar cases"""
    assert gauss_map.distortion_at(2.0, -1.0) == 2.0
    assert gauss_map.distortion_at(0.0, 1.0) == math.inf
    assert math.isnan(gauss_map.distortion_at(0.0, 0.0))


def test_gauss_map_on_solved_graph(solved_graph):
    """Test the distortion bound and negative Jacobian on a solved p = 3 graph"""
    report = gauss_map.verify_gauss_map(solved_graph.to_patch(), 3.0, E3)

    assert report.status is CheckStatus.PASS
    assert report.details["k_bound"] == 2.0
    assert report.details["max_K"] <= 2.0 + 1e-4
    assert report.details["max_jacobian"] <= 1e-6
    assert report.details["max_identity_residual"] <= 1e-5
    assert report.details["nodes"] == 15 * 15


def test_distortion_samples_on_solved_graph(solved_graph):
    """Test one sample per interior node"""
    samples = gauss_map.distortion_samples(solved_graph.to_patch(), E3)
    assert len(samples) == 15 * 15
    assert samples[0].node == (1, 1)
    for sample in samples:
        assert sample.jacobian == pytest.approx(sample.lambda1 * sample.lambda2)
        assert 0.0 <= sample.psi < 2.0 * math.pi


def test_gauss_map_on_catenoid():
    """Test that the catenoid has conformal Gauss map for p = 2"""
    patch = surfaces.catenoid_patch(1e-2, center=(0.3, 0.4))
    report = gauss_map.verify_gauss_map(patch, 2.0, E3)
    assert report.status is CheckStatus.PASS
    assert report.details["max_K"] == pytest.approx(1.0, abs=1e-3)
    assert report.details["max_jacobian"] < 0.0


def test_sphere_fails_the_precondition():
    """Test that a patch which is not p-minimal is refused"""
    with pytest.raises(PreconditionError) as excinfo:
        gauss_map.verify_gauss_map(surfaces.sphere_patch(1e-2), 3.0, E3)
    assert len(excinfo.value.residuals) == 9


def test_planar_patch_is_skipped():
    """Test that a plane has nothing to check"""
    report = gauss_map.verify_gauss_map(surfaces.plane_patch(1e-2, slopes=(0.0, 0.0)), 3.0, E3)
    assert report.status is CheckStatus.SKIPPED


def test_gauss_map_needs_a_surface_in_r3():
    """Test that hypersurfaces of R^4 are rejected"""
    profile = solve_profile(TubeShape.from_exponent(3, 2.0), r=1.0, tau_span=0.5, h=1e-2)
    patch = surfaces.tube_patch(profile, len(profile) // 2)
    with pytest.raises(DomainError):
        gauss_map.verify_gauss_map(patch, 2.0, np.array([0.0, 0.0, 0.0, 1.0]))


def test_q_reciprocal_identity():
    """Test q(psi) q(pi/2 - psi) = 1"""
    psi = np.linspace(-math.pi, math.pi, 2001)
    for p in (1.5, 2.0, 3.0, 5.0):
        product = gauss_map.q_of_psi(p, psi) * gauss_map.q_of_psi(p, 0.5 * math.pi - psi)
        assert np.allclose(product, 1.0, rtol=0.0, atol=1e-12)


def test_k_bound_is_one_only_for_p_two():
    """Test the bound on a grid of exponents"""
    for p in np.linspace(1.05, 6.0, 100):
        assert gauss_map.k_bound(float(p)) > 1.0
    assert gauss_map.k_bound(2.0) == 1.0


@pytest.fixture(scope="module")
def refined_graphs():
    """p = 3 graphs on the 65 and 129 node grids"""
    graphs = []
    for size in (65, 129):
        grid, values, _ = surfaces.boundary_grid("sinusoid", size)
        graphs.append(solve_p_minimal_graph(values, 3.0, grid).graph)
    return graphs


def test_gauss_map_under_refinement(refined_graphs):
    """Test the distortion bound and the Jacobian sign on a graph and its refinement"""
    reports = [gauss_map.verify_gauss_map(graph.to_patch(), 3.0, E3) for graph in refined_graphs]
    for report in reports:
        assert report.status is CheckStatus.PASS
        assert report.details["max_K"] <= 2.0 + report.details["slack"]
        assert report.details["max_jacobian"] <= report.details["slack"]
        assert report.details["max_relation_residual"] <= report.details["max_identity_residual"] + 1e-9


def test_relation_on_tube():
    """Test lambda_1 = -lambda_2 q(psi) on an n = 2, p = 3 equality tube"""
    profile = solve_profile(TubeShape.from_exponent(2, 3.0), r=1.0, tau_span=0.5, h=1e-3)
    patch = surfaces.tube_patch(profile, len(profile) // 2 + 300)
    report = gauss_map.verify_gauss_map(patch, 3.0, E3)
    assert report.status is CheckStatus.PASS
    assert report.details["max_relation_residual"] <= 1e-4
    assert report.details["max_jacobian"] < 0.0


def test_parabolic_node_fails_the_bound():
    """Test that an unbounded distortion is a failure, not a pass"""
    patch = surfaces.cylinder_patch(1e-2)
    report = gauss_map.verify_gauss_map(patch, 3.0, E3, precondition_threshold=10.0)
    assert report.status is CheckStatus.FAIL
    assert report.max_violation > 1e6
    assert report.details["max_K"] > 1e6


def test_infinite_distortion_is_reported(monkeypatch):
    """Test that an infinite distortion at a non-planar node fails the check"""
    monkeypatch.setattr(gauss_map, "distortion_at", lambda lambda1, lambda2: math.inf)
    report = gauss_map.verify_gauss_map(surfaces.catenoid_patch(1e-2, center=(0.3, 0.4)), 2.0, E3)
    assert report.status is CheckStatus.FAIL
    assert report.max_violation == math.inf
