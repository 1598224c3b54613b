import numpy as np
import pytest

from pminimal.exceptions import ConvergenceError, DomainError
from pminimal.models.surface import GraphGrid
from pminimal.services import surfaces
from pminimal.services.graph_solver import (
    _jacobian,
    continuation_path,
    graph_operator,
    scaled_residual,
    solve_p_minimal_graph,
)


def test_affine_boundary_is_solved_exactly():
    """Test that affine data give the affine graph with zero residual"""
    grid = GraphGrid.over((0.0, 0.0), 1.0, 9)
    solution = solve_p_minimal_graph(surfaces.affine_trace, 3.0, grid)

    x, y = grid.coordinates()
    assert np.max(np.abs(solution.graph.f - surfaces.affine_trace(x, y))) <= 1e-12
    assert solution.iterations == 0
    assert solution.residual <= 1e-12


def test_catenoid_boundary_converges_to_catenoid():
    """Test second-order agreement with arccosh(r) for p = 2"""
    errors = []
    for size in (17, 33):
        grid, values, trace = surfaces.boundary_grid("catenoid", size)
        solution = solve_p_minimal_graph(values, 2.0, grid)
        x, y = grid.coordinates()
        errors.append(float(np.max(np.abs(solution.graph.f - trace(x, y)))))
        assert solution.exponents == [2.0]

    coarse, fine = errors
    assert fine <= 1e-3
    assert coarse / fine >= 3.0


def test_sinusoid_boundary_with_continuation():
    """Test Newton with continuation from p = 2 to p = 3"""
    grid, values, _ = surfaces.boundary_grid("sinusoid", 17)
    solution = solve_p_minimal_graph(values, 3.0, grid)

    assert solution.exponents == [2.25, 2.5, 2.75, 3.0]
    assert solution.p == 3.0
    assert solution.residual <= 1e-8
    assert scaled_residual(solution.graph.f, grid.spacing, 3.0) <= 1e-8
    # Boundary values are kept
    mask = grid.boundary_mask()
    assert np.allclose(solution.graph.f[mask], values[mask], rtol=0.0, atol=1e-14)


def test_iteration_limit_raises():
    """Test that running out of Newton steps raises ConvergenceError"""
    grid, values, _ = surfaces.boundary_grid("sinusoid", 17)
    with pytest.raises(ConvergenceError) as excinfo:
        solve_p_minimal_graph(values, 3.0, grid, max_iter=0)
    assert excinfo.value.p == 2.25
    assert excinfo.value.iterations == 0
    assert excinfo.value.residual > 1e-8


def test_continuation_path():
    """Test exponent steps from 2 towards p"""
    assert continuation_path(2.0, 0.25) == [2.0]
    assert continuation_path(1.5, 0.25) == [1.75, 1.5]
    path = continuation_path(3.1, 0.25)
    assert path[-1] == 3.1
    assert len(path) == 5
    assert np.all(np.diff([2.0] + path) <= 0.25)


def test_solver_rejects_bad_input():
    """Test errors for p <= 1, mismatched and non-finite boundary values"""
    grid = GraphGrid.over((0.0, 0.0), 1.0, 9)
    with pytest.raises(DomainError):
        solve_p_minimal_graph(surfaces.affine_trace, 1.0, grid)
    with pytest.raises(DomainError):
        solve_p_minimal_graph(np.zeros((5, 5)), 3.0, grid)
    values = np.zeros((9, 9))
    values[0, 0] = np.nan
    with pytest.raises(DomainError):
        solve_p_minimal_graph(values, 3.0, grid)


def test_grid_limits():
    """Test the smallest and largest grids"""
    with pytest.raises(DomainError):
        GraphGrid.over((0.0, 0.0), 1.0, 4)
    with pytest.raises(DomainError):
        GraphGrid.over((0.0, 0.0), 1.0, 130)


def test_parse_boundary_sum():
    """Test a weighted sum of named traces"""
    trace, lower = surfaces.parse_boundary("sinusoid + 0.5*affine")
    x = np.array([0.1, 0.7])
    y = np.array([0.2, 0.4])
    expected = surfaces.sinusoid_trace(x, y) + 0.5 * surfaces.affine_trace(x, y)
    assert np.allclose(trace(x, y), expected, rtol=0.0, atol=1e-15)
    assert lower == surfaces.UNIT_LOWER


def test_parse_boundary_moves_catenoid_domain():
    """Test that catenoid terms shift the domain onto the annulus"""
    _, lower = surfaces.parse_boundary("-affine + catenoid-trace")
    assert lower == surfaces.CATENOID_LOWER


@pytest.mark.parametrize("expression", ["", "helicoid", "sinusoid affine", "2*"])
def test_parse_boundary_errors(expression):
    """Test rejection of empty, unknown and malformed expressions"""
    with pytest.raises(DomainError):
        surfaces.parse_boundary(expression)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_jacobian_matches_operator_derivative(p):
    """Test the Newton matrix against central differences of the operator"""
    grid = GraphGrid.over((0.0, 0.0), 1.0, 9)
    x, y = grid.coordinates()
    rng = np.random.default_rng(11)
    f = surfaces.sinusoid_trace(x, y) + 0.05 * rng.normal(size=x.shape)
    direction = np.zeros_like(f)
    direction[1:-1, 1:-1] = rng.normal(size=(7, 7))

    delta = 1e-6
    difference = (
        graph_operator(f + delta * direction, grid.spacing, p)
        - graph_operator(f - delta * direction, grid.spacing, p)
    ) / (2.0 * delta)
    product = _jacobian(f, grid.spacing, p, 1e-8) @ direction[1:-1, 1:-1].ravel()
    assert np.allclose(product, difference.ravel(), rtol=0.0, atol=1e-5 * np.max(np.abs(difference)))
