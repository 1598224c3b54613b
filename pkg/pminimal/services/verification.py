"""
Verification suites over tubes and graphs
"""

import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from pminimal.exceptions import UnknownCheckError
from pminimal.models.profile import TubeShape
from pminimal.models.surface import GraphFunction
from pminimal.models.tube import Section, SeriesBundle
from pminimal.schemas import (
    GRAPH_CHECKS,
    KNOWN_CHECKS,
    TUBE_CHECKS,
    CheckReport,
    SuiteConfig,
    SuiteReport,
)
from pminimal.services import gauss_map, tube_analysis

logger = logging.getLogger(__name__)


def parse_check_list(text: Optional[str]) -> List[str]:
    """Comma-separated check names; None or 'all' selects every check"""
    if text is None or text.strip() in ("", "all"):
        return list(KNOWN_CHECKS)
    names = [name.strip() for name in text.split(",") if name.strip()]
    for name in names:
        if name not in KNOWN_CHECKS:
            raise UnknownCheckError(name, KNOWN_CHECKS)
    return names


class VerificationService:
    """Runs the tube and graph check suites for one configuration"""

    def __init__(self, config: SuiteConfig, cache: Optional[Dict[int, Tuple[List[Section], SeriesBundle]]] = None):
        """
        Initialize VerificationService

        Args:
            config: Run configuration (tolerances, seeds, sampling sizes)
            cache: Optional mapping reused across calls for extracted sections
        """
        self.config = config
        self.cache = cache if cache is not None else {}

    def _tolerance(self, name: str) -> float:
        return self.config.tolerances.get(name)

    def sections(self, surface: tube_analysis.Surface, tau_grid: Optional[Sequence[float]] = None):
        """Sections and series of a surface (cached per surface object)"""
        key = id(surface)
        if key not in self.cache:
            if tau_grid is None:
                tau_grid = tube_analysis.section_heights(surface)[:: self.config.section_stride]
            sections = tube_analysis.extract_sections(surface, tau_grid)
            self.cache[key] = (sections, tube_analysis.build_series(sections))
        return self.cache[key]

    def run_tube_checks(
        self,
        surface: tube_analysis.Surface,
        shape: TubeShape,
        names: Optional[Iterable[str]] = None,
        span: Optional[float] = None,
    ) -> List[CheckReport]:
        """Run the selected tube checks on a sampled tube

        Graph-only checks in the selection are reported as skipped.
        """
        selected = list(names) if names is not None else list(TUBE_CHECKS)
        sections, bundle = self.sections(surface)
        logger.info("Running %d checks over %d sections", len(selected), len(sections))

        config = self.config
        runners = {
            "radius_convexity": lambda tol: tube_analysis.check_radius_convexity(bundle, tol),
            "family_convexity": lambda tol: tube_analysis.check_family_convexity(
                sections, config.family_trials, tol, config.seed
            ),
            "delta_convexity": lambda tol: tube_analysis.check_delta_convexity(bundle, tol),
            "center_shift": lambda tol: tube_analysis.check_center_shift(
                bundle, config.family_trials, tol, config.seed
            ),
            "tube_inequality": lambda tol: tube_analysis.check_tube_inequality(bundle, shape, tol),
            "lifetime_bound": lambda tol: tube_analysis.check_lifetime_bound(bundle, shape, tol, span),
            "axis_distance_inequality": lambda tol: tube_analysis.check_axis_distance_inequality(
                bundle, shape.n, shape.p, tol
            ),
            "maximum_principle": lambda tol: tube_analysis.check_max_principle(
                surface, float(bundle.tau[0]), float(bundle.tau[-1]), config.inner_samples, tol, config.seed
            ),
        }

        reports = []
        for name in selected:
            tol = self._tolerance(name)
            if name in GRAPH_CHECKS:
                reports.append(CheckReport.skipped(
                    name, gauss_map.GAUSS_MAP_STATEMENT, tol, "needs a graph input (--graph)",
                ))
                continue
            report = runners[name](tol)
            logger.info("%s: %s (violation %.3e)", name, report.status.value, report.max_violation)
            reports.append(report)
        return reports

    def run_graph_checks(
        self,
        graph: GraphFunction,
        p: float,
        names: Optional[Iterable[str]] = None,
    ) -> List[CheckReport]:
        """Run the selected checks on a solved graph; tube checks are skipped"""
        selected = list(names) if names is not None else list(GRAPH_CHECKS)
        e = np.zeros(graph.n + 1)
        e[-1] = 1.0

        reports = []
        for name in selected:
            tol = self._tolerance(name)
            if name in TUBE_CHECKS:
                reports.append(CheckReport.skipped(
                    name, tube_analysis.STATEMENTS[name], tol, "needs a tube input",
                ))
                continue
            report = gauss_map.verify_gauss_map(graph.to_patch(), p, e, tol)
            logger.info("%s: %s (violation %.3e)", name, report.status.value, report.max_violation)
            reports.append(report)
        return reports

    def build_report(self, checks: List[CheckReport]) -> SuiteReport:
        """Report document with the run configuration attached"""
        return SuiteReport(checks=checks, config=self.config.model_dump(mode="json"))
