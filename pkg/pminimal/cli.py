"""
Command-line entry point

    pminimal generate-tube --n 3 --p 2 --r 1 --out out/
    pminimal solve-graph --p 3 --boundary sinusoid --grid-size 33 --out out/
    pminimal verify --input out/ --checks all --out out/
    pminimal report out/report.json

Exit codes: 0 success, 1 a check failed, 2 invalid input or configuration,
3 the graph solver did not converge.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from pminimal import __version__, io
from pminimal.config import settings
from pminimal.exceptions import ConvergenceError, DomainError, PMinimalError
from pminimal.models.profile import ModelSurface, Profile, TubeShape
from pminimal.schemas import (
    GRAPH_CHECKS,
    KNOWN_CHECKS,
    TUBE_CHECKS,
    CheckReport,
    GraphSolveSummary,
    SuiteConfig,
)
from pminimal.services import gauss_map, surfaces, tube_analysis
from pminimal.services.graph_solver import solve_p_minimal_graph
from pminimal.services.profile_ode import sample_model_surface, solve_profile
from pminimal.services.verification import VerificationService, parse_check_list

logger = logging.getLogger("pminimal.cli")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3

BUILTIN_SPAN = 1.0
BUILTINS = ("sphere-barrel", "concave-radius", "catenoid", "cylinder")

_OVERRIDES = ("n", "p", "beta", "r", "h", "tau_span", "seed", "out", "theta_count", "grid_size", "boundary")


# ----------------------------- Configuration -----------------------------

def _suite_config(ns: argparse.Namespace) -> SuiteConfig:
    """JSON config (if any) with command-line flags applied on top"""
    base = SuiteConfig.from_json_file(ns.config) if ns.config else SuiteConfig()
    overrides = {name: getattr(ns, name, None) for name in _OVERRIDES}
    tolerances = {
        name: getattr(ns, f"tol_{name}")
        for name in KNOWN_CHECKS
        if getattr(ns, f"tol_{name}", None) is not None
    }
    return base.with_overrides(overrides, tolerances)


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


# ----------------------------- Subcommands -----------------------------

def cmd_generate_tube(ns: argparse.Namespace) -> int:
    """Solve the equality profile and sample its model surface"""
    config = _suite_config(ns)
    shape = TubeShape.from_exponent(config.n, config.p, config.beta)
    profile = solve_profile(shape, config.r, config.tau_span, config.h)
    surface = sample_model_surface(profile.capped(config.radius_cap), config.theta_count)

    out = Path(config.out)
    io.write_profile(out, profile)
    io.write_surface(out, surface)
    logger.info(
        "Wrote %s profile (beta=%g, span %.6f) and %d x %d surface samples to %s",
        profile.status, shape.beta, profile.span, surface.samples.shape[0], surface.samples.shape[1], out,
    )
    return EXIT_OK


def cmd_solve_graph(ns: argparse.Namespace) -> int:
    """Solve the Dirichlet problem for a named boundary expression"""
    config = _suite_config(ns)
    grid, values, _ = surfaces.boundary_grid(config.boundary, config.grid_size)
    out = Path(config.out)

    def summary(**fields) -> GraphSolveSummary:
        return GraphSolveSummary(
            boundary=config.boundary,
            p=config.p,
            grid_size=grid.size,
            spacing=grid.spacing,
            origin=list(grid.origin),
            **fields,
        )

    try:
        solution = solve_p_minimal_graph(
            values, config.p, grid, config.newton_max_iter, config.newton_tol, config.continuation_step,
        )
    except ConvergenceError as e:
        failed = summary(iterations=e.iterations, residual=e.residual, converged=False)
        io.write_json(out / io.GRAPH_SIDECAR, failed.model_dump(mode="python"))
        raise

    io.write_graph(out, solution.graph, summary(
        iterations=solution.iterations,
        residual=solution.residual,
        converged=True,
        exponents=solution.exponents,
    ))
    e = np.array([0.0, 0.0, 1.0])
    io.write_distortion(out / io.DISTORTION_FILE, gauss_map.distortion_samples(solution.graph.to_patch(), e))
    logger.info("Solved graph for p=%g in %d Newton steps", config.p, solution.iterations)
    return EXIT_OK


def _surface_from_files(path: Path, config: SuiteConfig) -> Tuple[ModelSurface, Profile]:
    """Model surface of a generated tube: surface.csv when present, else resampled"""
    profile = io.read_profile(path)
    window = profile.capped(config.radius_cap)
    directory = path if path.is_dir() else path.parent
    surface_file = directory / io.SURFACE_FILE
    if not surface_file.exists():
        return sample_model_surface(window, config.theta_count), profile

    samples = io.read_surface_samples(surface_file)
    if samples.shape[0] != len(window) or samples.shape[2] != profile.n + 1:
        raise DomainError(
            f"'{surface_file}' holds {samples.shape[0]} heights, the capped profile has {len(window)}"
        )
    thetas = (samples[0, :, :-1] - window.xi[0]) / window.R[0]
    return ModelSurface(profile=window, theta_grid=thetas, samples=samples), profile


def _tube_input(ns: argparse.Namespace, config: SuiteConfig):
    """(surface, shape, span) for the tube named by --input or --builtin"""
    if ns.input:
        surface, profile = _surface_from_files(Path(ns.input), config)
        p = float(profile.meta.get("p", config.p))
        beta = config.beta if config.beta is not None else profile.meta.get("beta")
        return surface, TubeShape.from_exponent(profile.n, p, beta), profile.span

    name = ns.builtin
    if name == "sphere-barrel":
        surface = surfaces.sphere_barrel(count=config.theta_count, h=config.h, height=0.5)
        return surface, TubeShape.from_exponent(2, config.p, config.beta), None
    if name == "concave-radius":
        surface = surfaces.concave_radius_surface(config.h, BUILTIN_SPAN, config.theta_count, config.n)
    elif name == "catenoid":
        surface = surfaces.catenoid_surface(config.h, BUILTIN_SPAN, config.theta_count)
    else:
        surface = surfaces.cylinder_surface(config.h, BUILTIN_SPAN, config.theta_count, config.n)
    return surface, TubeShape.from_exponent(surface.n, config.p, config.beta), None


def cmd_verify(ns: argparse.Namespace) -> int:
    """Run the selected checks and write report.json"""
    config = _suite_config(ns)
    checks = parse_check_list(ns.checks)
    if not (ns.input or ns.builtin or ns.graph):
        raise DomainError("Nothing to verify: pass --input, --builtin or --graph")
    if ns.input and ns.builtin:
        raise DomainError("Pass either --input or --builtin, not both")

    service = VerificationService(config)
    results: Dict[str, CheckReport] = {}

    tube_names = [name for name in checks if name in TUBE_CHECKS]
    if tube_names and (ns.input or ns.builtin):
        surface, shape, span = _tube_input(ns, config)
        for report in service.run_tube_checks(surface, shape, tube_names, span):
            results[report.name] = report

    graph_names = [name for name in checks if name in GRAPH_CHECKS]
    if graph_names and ns.graph:
        graph = io.read_graph(ns.graph)
        summary = io.read_graph_summary(ns.graph)
        p = summary.p if summary is not None else config.p
        for report in service.run_graph_checks(graph, p, graph_names):
            results[report.name] = report

    for name in checks:
        if name not in results:
            statement = gauss_map.GAUSS_MAP_STATEMENT if name in GRAPH_CHECKS else tube_analysis.STATEMENTS[name]
            needed = "--graph" if name in GRAPH_CHECKS else "--input or --builtin"
            results[name] = CheckReport.skipped(name, statement, config.tolerances.get(name), f"needs {needed}")

    report = service.build_report([results[name] for name in checks])
    path = io.write_report(Path(config.out) / io.REPORT_FILE, report)
    failed = [check.name for check in report.checks if not check.passed]
    if failed:
        logger.warning("Failed checks: %s (report: %s)", ", ".join(failed), path)
        return EXIT_CHECK_FAILED
    logger.info("All checks passed (report: %s)", path)
    return EXIT_OK


def format_report(report) -> str:
    """Fixed-width table of a report"""
    lines = [f"{'check':<26} {'status':<8} {'violation':>12} {'tolerance':>10}  reference"]
    for check in report.checks:
        lines.append(
            f"{check.name:<26} {check.status.value:<8} {check.max_violation:>12.3e} {check.tolerance:>10.1e}  {check.reference}"
        )
    verdict = "PASS" if report.all_passed else "FAIL"
    lines.append(f"{len(report.checks)} checks, overall {verdict}")
    return "\n".join(lines)


def cmd_report(ns: argparse.Namespace) -> int:
    """Print a report.json as a table on standard output"""
    path = Path(ns.report)
    if path.is_dir():
        path = path / io.REPORT_FILE
    print(format_report(io.read_report(path)))
    return EXIT_OK


# ----------------------------- Parser -----------------------------

def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override its values")
    common.add_argument("--n", type=int, help="Tube dimension (2-4)")
    common.add_argument("--p", type=float, help="Exponent of the p-Laplacian (> 1)")
    common.add_argument("--beta", type=float, help="Override of (n-1)/(p-1)")
    common.add_argument("--r", type=float, help="Waist radius")
    common.add_argument("--h", type=float, help="Grid spacing")
    common.add_argument("--tau-span", dest="tau_span", type=float, help="Half-length of the height interval")
    common.add_argument("--theta-count", dest="theta_count", type=int, help="Directions per section")
    common.add_argument("--grid-size", dest="grid_size", type=int, help="Graph grid nodes per side")
    common.add_argument("--boundary", help="Graph boundary, e.g. 'sinusoid + 0.5*affine'")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="Output directory")
    common.add_argument("--log-level", dest="log_level", default=settings.LOG_LEVEL)
    for name in KNOWN_CHECKS:
        common.add_argument(f"--tol.{name}", dest=f"tol_{name}", type=float, help=argparse.SUPPRESS)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="pminimal", description=settings.APP_NAME)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    generate = sub.add_parser("generate-tube", parents=[common], help="Write profile.csv and surface.csv")
    generate.set_defaults(handler=cmd_generate_tube)

    solve = sub.add_parser("solve-graph", parents=[common], help="Solve a p-minimal graph")
    solve.set_defaults(handler=cmd_solve_graph)

    verify = sub.add_parser("verify", parents=[common], help="Run checks and write report.json")
    verify.add_argument("--input", help="Directory (or profile.csv) written by generate-tube")
    verify.add_argument("--builtin", choices=BUILTINS, help="Built-in analytic tube")
    verify.add_argument("--graph", help="Directory (or graph.csv) written by solve-graph")
    verify.add_argument("--checks", help=f"Comma-separated subset of: {', '.join(KNOWN_CHECKS)} (default all)")
    verify.set_defaults(handler=cmd_verify)

    report = sub.add_parser("report", help="Print a report.json as a table")
    report.add_argument("report", help="report.json or the directory holding it")
    report.add_argument("--log-level", dest="log_level", default=settings.LOG_LEVEL)
    report.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    _configure_logging(ns.log_level)
    try:
        return ns.handler(ns)
    except ConvergenceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except ValidationError as e:
        messages = "; ".join(error["msg"] for error in e.errors())
        print(f"error: invalid configuration: {messages}", file=sys.stderr)
        return EXIT_INVALID
    except (PMinimalError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
