import pytest

from pminimal.exceptions import UnknownCheckError
from pminimal.models.profile import TubeShape
from pminimal.schemas import KNOWN_CHECKS, TUBE_CHECKS, CheckStatus, CheckTolerances, SuiteConfig
from pminimal.services import surfaces
from pminimal.services.graph_solver import solve_p_minimal_graph
from pminimal.services.profile_ode import sample_model_surface, solve_profile
from pminimal.services.verification import VerificationService, parse_check_list


@pytest.fixture(scope="module")
def beta_two_run():
    """Model surface of the beta = 2 equality tube, capped at twice its waist"""
    config = SuiteConfig(
        n=3, p=2.0, h=5e-3, theta_count=32, family_trials=50, inner_samples=100,
        tolerances=CheckTolerances(tube_inequality=1e-3, axis_distance_inequality=1e-3),
    )
    shape = TubeShape.from_exponent(config.n, config.p)
    profile = solve_profile(shape, config.r, config.tau_span, config.h)
    surface = sample_model_surface(profile.capped(config.radius_cap), config.theta_count)
    return config, shape, profile, surface


def test_parse_check_list():
    assert parse_check_list(None) == list(KNOWN_CHECKS)
    assert parse_check_list("all") == list(KNOWN_CHECKS)
    assert parse_check_list(" radius_convexity , maximum_principle") == ["radius_convexity", "maximum_principle"]
    with pytest.raises(UnknownCheckError) as excinfo:
        parse_check_list("radius_convexity,bogus")
    assert excinfo.value.name == "bogus"


def test_tube_suite_passes_on_equality_tube(beta_two_run):
    """Test every tube check on the beta = 2 tube"""
    config, shape, profile, surface = beta_two_run
    service = VerificationService(config)
    reports = service.run_tube_checks(surface, shape, span=profile.span)

    assert [r.name for r in reports] == list(TUBE_CHECKS)
    failed = {r.name: r.max_violation for r in reports if r.status is not CheckStatus.PASS}
    assert failed == {}

    lifetime = next(r for r in reports if r.name == "lifetime_bound")
    assert lifetime.details["ratio"] == pytest.approx(2 ** -0.5, abs=0.02)


def test_sections_are_cached(beta_two_run):
    config, _, _, surface = beta_two_run
    service = VerificationService(config)
    first = service.sections(surface)
    assert service.sections(surface) is first
    sections, bundle = first
    assert len(sections) == bundle.tau.shape[0]


def test_section_stride(beta_two_run):
    config, _, _, surface = beta_two_run
    strided = VerificationService(config.with_overrides({"section_stride": 4}))
    full = VerificationService(config)
    assert len(strided.sections(surface)[0]) == (len(full.sections(surface)[0]) + 3) // 4


def test_graph_checks_skip_tube_checks():
    """Test the graph suite with a tube check in the selection"""
    grid, values, _ = surfaces.boundary_grid("sinusoid", 17)
    graph = solve_p_minimal_graph(values, 3.0, grid).graph
    service = VerificationService(SuiteConfig(p=3.0))
    reports = service.run_graph_checks(graph, 3.0, ["radius_convexity", "gauss_map_distortion"])
    assert [r.status for r in reports] == [CheckStatus.SKIPPED, CheckStatus.PASS]


def test_tube_checks_skip_graph_checks():
    surface = surfaces.cylinder_surface(h=0.05, span=0.5, theta_count=32)
    service = VerificationService(SuiteConfig())
    reports = service.run_tube_checks(surface, TubeShape.from_exponent(2, 2.0), ["gauss_map_distortion"])
    assert reports[0].status is CheckStatus.SKIPPED


def test_build_report_embeds_config():
    config = SuiteConfig(p=3.0, seed=7)
    service = VerificationService(config)
    report = service.build_report([])
    assert report.config["p"] == 3.0
    assert report.config["seed"] == 7
    assert report.all_passed


@pytest.mark.parametrize("n,p", [(2, 5.0 / 3.0), (2, 4.0 / 3.0)])
def test_tube_suite_on_other_exponents(n, p):
    """Test that equality tubes with beta = 1.5 and beta = 3 pass every applicable check"""
    config = SuiteConfig(
        n=n, p=p, h=2e-3, theta_count=32, family_trials=50, inner_samples=100,
        tolerances=CheckTolerances(tube_inequality=1e-3),
    )
    shape = TubeShape.from_exponent(config.n, config.p)
    profile = solve_profile(shape, config.r, config.tau_span, config.h)
    surface = sample_model_surface(profile.capped(config.radius_cap), config.theta_count)
    reports = VerificationService(config).run_tube_checks(surface, shape, span=profile.span)

    failed = {r.name: r.max_violation for r in reports if r.status is CheckStatus.FAIL}
    assert failed == {}
    by_name = {r.name: r for r in reports}
    assert by_name["maximum_principle"].status is CheckStatus.PASS
    assert by_name["lifetime_bound"].details["ratio"] <= 1.0
    assert by_name["axis_distance_inequality"].status is CheckStatus.SKIPPED


def test_concave_radius_suite_fails():
    """Test that the concave-radius tube fails the convexity checks"""
    surface = surfaces.concave_radius_surface(h=0.05, span=0.5, theta_count=32)
    service = VerificationService(SuiteConfig(family_trials=50))
    reports = service.run_tube_checks(
        surface, TubeShape.from_exponent(2, 2.0), ["radius_convexity", "family_convexity"]
    )
    assert [r.status for r in reports] == [CheckStatus.FAIL, CheckStatus.FAIL]
