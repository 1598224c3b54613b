import math

import numpy as np
import pytest

from pminimal.exceptions import DomainError
from pminimal.models.geometry import Ball
from pminimal.services import geom_kernel


def _polygon(count, radius=1.0, center=(0.0, 0.0)):
    angles = 2.0 * np.pi * np.arange(count) / count
    return np.column_stack([np.cos(angles), np.sin(angles)]) * radius + np.asarray(center)


def test_ball_of_two_points():
    """Test that two points give the ball on their segment"""
    ball = geom_kernel.min_enclosing_ball([[0.0, 0.0], [2.0, 0.0]])
    assert np.allclose(ball.center, [1.0, 0.0], atol=1e-12)
    assert ball.radius == pytest.approx(1.0, abs=1e-12)


def test_ball_of_equilateral_triangle():
    """Test the circumradius of a unit equilateral triangle"""
    points = [[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]]
    ball = geom_kernel.min_enclosing_ball(points)
    assert ball.radius == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-12)


def test_ball_of_singleton():
    """Test that a single point gives a ball of radius zero"""
    ball = geom_kernel.min_enclosing_ball([[5.0, 5.0]])
    assert np.allclose(ball.center, [5.0, 5.0])
    assert ball.radius == 0.0


def test_ball_of_empty_cloud():
    """Test that an empty cloud is rejected"""
    with pytest.raises(DomainError):
        geom_kernel.min_enclosing_ball(np.empty((0, 2)))


def test_ball_dimension_limit():
    """Test that clouds in more than four dimensions are rejected"""
    with pytest.raises(DomainError):
        geom_kernel.min_enclosing_ball(np.eye(5))


def test_ball_of_collinear_cloud():
    """Test that a segment in R^3 is solved in its own dimension"""
    t = np.linspace(0.0, 2.0, 9)[:, None]
    points = t * np.array([[1.0, 1.0, 1.0]])
    ball = geom_kernel.min_enclosing_ball(points)
    assert ball.radius == pytest.approx(math.sqrt(3.0), abs=1e-12)
    assert np.allclose(ball.center, [1.0, 1.0, 1.0], atol=1e-12)


def test_ball_of_regular_polygon():
    """Test that points on a circle give that circle"""
    ball = geom_kernel.min_enclosing_ball(_polygon(64, radius=2.0, center=(0.3, -0.1)))
    assert ball.radius == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(ball.center, [0.3, -0.1], atol=1e-12)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_ball_matches_brute_force(dim):
    """Test the move-to-front ball against the subset oracle on 1000 random clouds"""
    rng = np.random.default_rng(dim)
    for _ in range(1000):
        cloud = rng.normal(size=(8, dim))
        ball = geom_kernel.min_enclosing_ball(cloud)
        oracle = geom_kernel.brute_force_ball(cloud)
        assert ball.contains(cloud)
        assert ball.radius == pytest.approx(oracle.radius, abs=1e-9)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_ball_is_translation_and_scaling_covariant(dim):
    """Test that translating or scaling the cloud moves the ball along"""
    rng = np.random.default_rng(10 + dim)
    for _ in range(50):
        cloud = rng.normal(size=(20, dim))
        shift = rng.uniform(-3.0, 3.0, size=dim)
        scale = rng.uniform(0.1, 10.0)
        ball = geom_kernel.min_enclosing_ball(cloud)

        moved = geom_kernel.min_enclosing_ball(cloud + shift)
        assert np.allclose(moved.center, ball.center + shift, rtol=0.0, atol=1e-10)
        assert moved.radius == pytest.approx(ball.radius, abs=1e-10)

        scaled = geom_kernel.min_enclosing_ball(scale * cloud)
        assert np.allclose(scaled.center, scale * ball.center, rtol=0.0, atol=1e-10 * scale)
        assert scaled.radius == pytest.approx(scale * ball.radius, rel=1e-10)


def test_ball_falls_back_to_subset_search(monkeypatch, caplog):
    """Test that failed move-to-front passes end in the subset oracle"""
    monkeypatch.setattr(geom_kernel, "_move_to_front", lambda *args: None)
    cloud = np.random.default_rng(5).normal(size=(20, 3))

    with caplog.at_level("WARNING", logger="pminimal.services.geom_kernel"):
        ball = geom_kernel.min_enclosing_ball(cloud)

    assert "falling back to the subset search" in caplog.text
    assert ball.contains(cloud, 1e-9)
    assert ball.radius == pytest.approx(geom_kernel.brute_force_ball(cloud).radius, abs=1e-9)


def test_ball_is_deterministic():
    """Test that repeated calls give identical balls"""
    cloud = np.random.default_rng(7).uniform(size=(50, 3))
    first = geom_kernel.min_enclosing_ball(cloud)
    second = geom_kernel.min_enclosing_ball(cloud)
    assert np.array_equal(first.center, second.center)
    assert first.radius == second.radius


def test_support_value_of_square():
    """Test support values of the square with vertices (+-1, +-1)"""
    square = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]
    assert geom_kernel.support_value(square, [1.0, 0.0]) == pytest.approx(1.0)
    diagonal = np.array([1.0, 1.0]) / math.sqrt(2.0)
    assert geom_kernel.support_value(square, diagonal) == pytest.approx(math.sqrt(2.0))


def test_support_value_rejects_bad_directions():
    """Test that zero and non-unit directions are rejected"""
    square = [[1.0, 1.0], [-1.0, -1.0]]
    with pytest.raises(DomainError):
        geom_kernel.support_value(square, [0.0, 0.0])
    with pytest.raises(DomainError):
        geom_kernel.support_value(square, [2.0, 0.0])
    with pytest.raises(DomainError):
        geom_kernel.support_value(square, [1.0, 0.0, 0.0])


def test_family_convexity_of_growing_disks():
    """Test that a smaller middle disk lies in the Minkowski combination"""
    directions = geom_kernel.direction_grid(2, 720)
    inner = _polygon(64, 1.0)
    violation = geom_kernel.family_convexity_violation(inner, _polygon(64, 2.0), _polygon(64, 0.5), 0.5, directions)
    assert violation <= 1e-12


def test_family_convexity_detects_bulge():
    """Test that a middle section larger than its neighbours is flagged"""
    directions = geom_kernel.direction_grid(2, 720)
    violation = geom_kernel.family_convexity_violation(
        _polygon(64, 2.0), _polygon(64, 1.0), _polygon(64, 1.0), 0.5, directions
    )
    assert violation > 0.9


def test_family_convexity_rejects_bad_weight():
    """Test that weights outside [0, 1] are rejected"""
    directions = geom_kernel.direction_grid(2, 8)
    with pytest.raises(DomainError):
        geom_kernel.family_convexity_violation(_polygon(8), _polygon(8), _polygon(8), 1.5, directions)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_direction_grid_is_unit_and_deterministic(dim):
    """Test that direction grids are unit vectors and reproducible"""
    grid = geom_kernel.direction_grid(dim, 256)
    assert grid.shape == (256, dim)
    assert np.allclose(np.linalg.norm(grid, axis=1), 1.0, atol=1e-12)
    assert np.array_equal(grid, geom_kernel.direction_grid(dim, 256))


def test_sigma_of_square():
    """Test sigma of the square's four contact points"""
    square = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    ball = geom_kernel.min_enclosing_ball(square)
    assert geom_kernel.sigma(square, ball) == pytest.approx(math.sqrt(2.0) / 2.0, abs=1e-9)


def test_sigma_of_diameter_is_zero():
    """Test that two antipodal contacts fit in a closed half-circle"""
    pair = np.array([[-1.0, 0.0], [1.0, 0.0]])
    ball = Ball(np.zeros(2), 1.0)
    assert geom_kernel.sigma(pair, ball) == pytest.approx(0.0, abs=1e-12)


def test_sigma_of_regular_polygon():
    """Test sigma of evenly spaced contacts, cos(pi/count)"""
    polygon = _polygon(64)
    ball = geom_kernel.min_enclosing_ball(polygon)
    assert geom_kernel.sigma(polygon, ball) == pytest.approx(math.cos(math.pi / 64), abs=1e-9)


def test_sigma_rejects_bad_balls():
    """Test errors for a degenerate, a too small and a non-circumscribed ball"""
    cloud = np.array([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(DomainError):
        geom_kernel.sigma(cloud, Ball(np.zeros(2), 0.0))
    with pytest.raises(DomainError):
        geom_kernel.sigma(cloud, Ball(np.zeros(2), 0.5))
    with pytest.raises(DomainError):
        geom_kernel.sigma(cloud, Ball(np.array([1.0, 0.0]), 1.0))


def test_hull_distance_of_square():
    """Test distances to the unit square from outside and inside"""
    square = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
    assert geom_kernel.hull_distance(square, [2.0, 0.5]) == pytest.approx(1.0, abs=1e-9)
    assert geom_kernel.hull_distance(square, [0.5, 0.5]) <= 1e-9
    assert geom_kernel.hull_contains(square, [0.25, 0.75])
    assert not geom_kernel.hull_contains(square, [-0.1, 0.5])


def test_touching_ball_construction():
    """Test the ball through the apex that keeps the generators inside"""
    generators = np.array([[-1.0, 0.0], [1.0, 0.0]])
    cloud = np.vstack([generators, [[0.0, 1.0]]])
    ball = geom_kernel.touching_ball(generators, cloud)

    assert np.allclose(ball.center, [0.0, -0.75], atol=1e-9)
    assert ball.radius == pytest.approx(1.75, abs=1e-9)
    assert ball.contains(cloud, 1e-9)
    assert np.all(np.linalg.norm(generators - ball.center, axis=1) < ball.radius - 0.25)


def test_touching_ball_needs_an_outside_point():
    """Test that a cloud inside the hull has nothing to touch"""
    generators = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(DomainError):
        geom_kernel.touching_ball(generators, [[0.0, 0.5]])


@pytest.mark.parametrize("dim", [2, 3])
def test_support_of_minkowski_sum(dim):
    """Test h_{A+B}(u) = h_A(u) + h_B(u) with A+B built from pairwise sums"""
    rng = np.random.default_rng(30 + dim)
    A = rng.normal(size=(12, dim))
    B = rng.uniform(-2.0, 2.0, size=(9, dim))
    total = (A[:, None, :] + B[None, :, :]).reshape(-1, dim)
    directions = geom_kernel.direction_grid(dim, 500)
    expected = geom_kernel.support_values(A, directions) + geom_kernel.support_values(B, directions)
    assert np.allclose(geom_kernel.support_values(total, directions), expected, rtol=0.0, atol=1e-12)


def test_support_is_translation_covariant():
    """Test h_{A+v}(u) = h_A(u) + <v, u>"""
    rng = np.random.default_rng(41)
    A = rng.normal(size=(15, 3))
    v = np.array([0.5, -2.0, 1.25])
    directions = geom_kernel.direction_grid(3, 300)
    shifted = geom_kernel.support_values(A + v, directions)
    assert np.allclose(shifted, geom_kernel.support_values(A, directions) + directions @ v, rtol=0.0, atol=1e-12)


@pytest.mark.parametrize("dim", [2, 3])
def test_sigma_stays_in_unit_interval(dim):
    """Test 0 <= sigma <= 1 for the circumscribed ball of random clouds"""
    rng = np.random.default_rng(50 + dim)
    for _ in range(25):
        cloud = rng.normal(size=(12, dim))
        ball = geom_kernel.min_enclosing_ball(cloud)
        value = geom_kernel.sigma(cloud, ball, grid_size=512)
        assert 0.0 <= value <= 1.0


def test_hull_projection_recovers_from_bad_nnls(monkeypatch, caplog):
    """Test that an nnls result with a wrong residual is re-solved"""
    monkeypatch.setattr(geom_kernel, "nnls", lambda A, b: (np.eye(A.shape[1])[0], 0.0))
    square = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]

    with caplog.at_level("DEBUG", logger="pminimal.services.geom_kernel"):
        inside = geom_kernel.hull_distance(square, [0.5, 0.5])
    assert "re-solving with BVLS" in caplog.text
    assert inside <= 1e-9

    outside, nearest = geom_kernel.hull_projection(square, [2.0, 0.5])
    assert outside == pytest.approx(1.0, abs=1e-6)
    assert np.allclose(nearest, [1.0, 0.5], atol=1e-6)


def test_hull_contains_random_combinations():
    """Test that convex combinations of a cloud lie in its hull"""
    rng = np.random.default_rng(60)
    cloud = rng.normal(size=(10, 3))
    for _ in range(20):
        weights = rng.dirichlet(np.ones(10))
        assert geom_kernel.hull_contains(cloud, weights @ cloud)


def _assert_touching(generators, cloud):
    ball = geom_kernel.touching_ball(generators, cloud)
    distances = np.linalg.norm(np.asarray(cloud) - ball.center, axis=1)
    assert ball.contains(cloud, 1e-9)
    on_sphere = np.asarray(cloud)[np.abs(distances - ball.radius) <= 1e-9 * ball.radius]
    assert any(geom_kernel.hull_distance(generators, point) > 1e-9 for point in on_sphere)
    inner = np.linalg.norm(np.asarray(generators) - ball.center, axis=1)
    assert np.all(inner < ball.radius)
    return ball


def test_touching_ball_over_square_base():
    """Test a pyramid apex over a square in R^3"""
    base = np.array([[1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [-1.0, -1.0, 0.0]])
    cloud = np.vstack([base, [[0.0, 0.0, 1.0], [0.5, 0.0, 0.0]]])
    ball = _assert_touching(base, cloud)
    assert np.linalg.norm(cloud[4] - ball.center) == pytest.approx(ball.radius, abs=1e-9)
    assert np.allclose(ball.center[:2], 0.0, atol=1e-9)


def test_touching_ball_on_random_clouds():
    """Test the touching ball when part of a random cloud leaves the generator hull"""
    rng = np.random.default_rng(70)
    for dim in (2, 3):
        for _ in range(10):
            generators = rng.normal(size=(8, dim))
            cloud = np.vstack([generators, rng.normal(scale=2.0, size=(6, dim))])
            if max(geom_kernel.hull_distance(generators, point) for point in cloud) <= 1e-3:
                continue
            _assert_touching(generators, cloud)
