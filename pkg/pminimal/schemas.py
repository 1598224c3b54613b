"""
Run configuration and report schemas
"""

import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from pminimal.config import settings
from pminimal.exceptions import DomainError


class CheckStatus(str, Enum):
    """Outcome of a single check"""
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"


# Stable tags for tracing a row back to the property it verifies (listed in README)
CHECK_REFERENCES = {
    "radius_convexity": "tube.sections.radius-convex",
    "family_convexity": "tube.sections.family-convex",
    "delta_convexity": "tube.sections.delta-convex",
    "center_shift": "tube.sections.center-shift",
    "tube_inequality": "tube.profile.differential-inequality",
    "lifetime_bound": "tube.profile.lifetime",
    "axis_distance_inequality": "tube.profile.axis-distance",
    "maximum_principle": "tube.hull.boundary-hull",
    "gauss_map_distortion": "graph.gauss-map.quasiconformal",
}


class CheckReport(BaseModel):
    """Named verification result"""
    name: str = Field(..., min_length=1, description="Check identifier used by --checks")
    statement: str = Field(..., description="Property the check verifies, in plain words")
    reference: str = Field(default="", description="Stable tag of the verified property")
    status: CheckStatus
    max_violation: float = Field(..., description="Largest normalized violation (0 when skipped)")
    tolerance: float = Field(..., gt=0.0, description="Largest admissible violation")
    details: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def validate_status(self) -> "CheckReport":
        """A row fails exactly when its violation exceeds its tolerance"""
        if self.status is CheckStatus.SKIPPED:
            return self
        exceeded = not (self.max_violation <= self.tolerance)
        if exceeded != (self.status is CheckStatus.FAIL):
            raise ValueError(
                f"Inconsistent status '{self.status.value}' for violation "
                f"{self.max_violation!r} and tolerance {self.tolerance!r}"
            )
        return self

    @model_validator(mode="before")
    @classmethod
    def fill_reference(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("reference"):
            data = {**data, "reference": CHECK_REFERENCES.get(data.get("name"), "")}
        return data

    @classmethod
    def evaluate(
        cls,
        name: str,
        statement: str,
        max_violation: float,
        tolerance: float,
        details: Optional[Dict[str, Any]] = None,
    ) -> "CheckReport":
        """Build a report whose status follows from the violation"""
        violation = float(max_violation)
        status = CheckStatus.PASS if violation <= tolerance else CheckStatus.FAIL
        return cls(
            name=name,
            statement=statement,
            status=status,
            max_violation=violation,
            tolerance=tolerance,
            details=details or {},
        )

    @classmethod
    def skipped(cls, name: str, statement: str, tolerance: float, note: str) -> "CheckReport":
        """Build a report for a check whose hypothesis does not hold"""
        return cls(
            name=name,
            statement=statement,
            status=CheckStatus.SKIPPED,
            max_violation=0.0,
            tolerance=tolerance,
            details={"note": note},
        )

    @property
    def passed(self) -> bool:
        return self.status is not CheckStatus.FAIL


class CheckTolerances(BaseModel):
    """Per-check tolerances (all dimensionless)"""
    radius_convexity: float = Field(default=1e-6, gt=0.0)
    family_convexity: float = Field(default=1e-9, gt=0.0)
    delta_convexity: float = Field(default=1e-6, gt=0.0)
    center_shift: float = Field(default=1e-9, gt=0.0)
    tube_inequality: float = Field(default=1e-4, gt=0.0)
    lifetime_bound: float = Field(default=1e-9, gt=0.0)
    axis_distance_inequality: float = Field(default=1e-4, gt=0.0)
    maximum_principle: float = Field(default=1e-9, gt=0.0)
    gauss_map_distortion: float = Field(default=1e-6, gt=0.0)

    def get(self, name: str) -> float:
        return float(getattr(self, name))


TUBE_CHECKS = (
    "radius_convexity",
    "family_convexity",
    "delta_convexity",
    "center_shift",
    "tube_inequality",
    "lifetime_bound",
    "axis_distance_inequality",
    "maximum_principle",
)
GRAPH_CHECKS = ("gauss_map_distortion",)
KNOWN_CHECKS = TUBE_CHECKS + GRAPH_CHECKS


def _json_default(value: Any) -> Any:
    """Serialize numpy scalars and arrays"""
    if isinstance(value, Enum):
        return value.value
    if hasattr(value, "tolist"):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


class SuiteConfig(BaseModel):
    """Parameters of one laboratory run"""
    n: int = Field(default=2, ge=2, le=4, description="Dimension of the tube")
    p: float = Field(default=2.0, description="Exponent of the p-Laplacian")
    beta: Optional[float] = Field(default=None, description="Override of (n-1)/(p-1)")
    r: float = Field(default=1.0, description="Waist radius")
    tau_span: float = Field(default=2.0, gt=0.0, description="Half-length of the integration interval")
    h: float = Field(default=1e-3, gt=0.0, description="Grid spacing")
    theta_count: int = Field(default=64, ge=8, description="Directions per section")
    grid_size: int = Field(default=33, ge=5, le=129, description="Graph grid nodes per side")
    radius_cap: float = Field(default=settings.RADIUS_CAP, gt=1.0, description="Sections kept while R <= radius_cap * r")
    section_stride: int = Field(default=1, ge=1)
    family_trials: int = Field(default=200, ge=1)
    inner_samples: int = Field(default=200, ge=1)
    seed: int = Field(default=settings.SEED)
    out: str = Field(default=settings.OUTPUT_DIR)
    boundary: str = Field(default="sinusoid", description="Graph boundary expression")
    newton_max_iter: int = Field(default=settings.NEWTON_MAX_ITER, ge=1)
    newton_tol: float = Field(default=settings.NEWTON_TOL, gt=0.0)
    continuation_step: float = Field(default=settings.CONTINUATION_STEP, gt=0.0)
    tolerances: CheckTolerances = Field(default_factory=CheckTolerances)

    @field_validator("p")
    @classmethod
    def validate_p(cls, v: float) -> float:
        """The p-Laplacian is only considered for p > 1"""
        if not v > 1.0 or not math.isfinite(v):
            raise ValueError("p must exceed 1")
        return v

    @field_validator("r")
    @classmethod
    def validate_r(cls, v: float) -> float:
        if not v > 0.0:
            raise ValueError("waist radius r must be positive")
        return v

    @field_validator("beta")
    @classmethod
    def validate_beta(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not v > 0.0:
            raise ValueError("beta must be positive")
        return v

    @property
    def effective_beta(self) -> float:
        if self.beta is not None:
            return self.beta
        return (self.n - 1) / (self.p - 1.0)

    @classmethod
    def from_json_file(cls, path: str) -> "SuiteConfig":
        """Load a configuration document"""
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise DomainError(f"Cannot read config '{path}': {e}") from e
        return cls.model_validate(data)

    def with_overrides(self, overrides: Dict[str, Any], tolerances: Optional[Dict[str, float]] = None) -> "SuiteConfig":
        """Return a copy with flag values applied (None values are ignored)"""
        data = self.model_dump()
        data.update({k: v for k, v in overrides.items() if v is not None})
        if tolerances:
            data["tolerances"].update(tolerances)
        return SuiteConfig.model_validate(data)


class SuiteReport(BaseModel):
    """Report document written by the verify command"""
    checks: List[CheckReport]
    config: Dict[str, Any]

    @property
    def all_passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_json(self) -> str:
        document = self.model_dump(mode="python")
        return json.dumps(document, indent=2, sort_keys=True, default=_json_default) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SuiteReport":
        try:
            return cls.model_validate(json.loads(text))
        except (json.JSONDecodeError, ValidationError) as e:
            raise DomainError(f"Malformed report: {e}") from e


class GraphSolveSummary(BaseModel):
    """Sidecar written next to a solved graph"""
    boundary: str
    p: float
    grid_size: int
    spacing: float
    origin: List[float]
    iterations: int
    residual: float
    converged: bool
    exponents: List[float] = Field(default_factory=list, description="Continuation path")
