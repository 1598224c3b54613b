"""
Quasiconformality of the Gauss map of p-minimal surfaces in R^3

On a p-minimal surface the Gauss map has differential -A, so its
distortion at a node is the ratio of the principal curvature magnitudes,
which is bounded by max(p - 1, 1/(p - 1)), and its Jacobian
lambda_1 lambda_2 is negative away from planar points.
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from pminimal.config import settings
from pminimal.exceptions import DomainError, PreconditionError
from pminimal.models.distortion import DistortionSample
from pminimal.models.surface import CurvatureData, Patch
from pminimal.schemas import CheckReport
from pminimal.services.discrete_surface import critical_residual, curvature_at, is_critical

logger = logging.getLogger(__name__)

UNBOUNDED = math.inf
UNDEFINED = math.nan

GAUSS_MAP_STATEMENT = (
    "The Gauss map of a p-minimal surface is quasiconformal with distortion at most "
    "max(p-1, 1/(p-1)) and has negative Jacobian at non-planar points"
)


def k_bound(p: float) -> float:
    """max(p - 1, 1/(p - 1))"""
    if not p > 1.0:
        raise DomainError("p must exceed 1")
    return max(p - 1.0, 1.0 / (p - 1.0))


def q_of_psi(p: float, psi):
    """(1 + (p-2) sin^2 psi) / (1 + (p-2) cos^2 psi)"""
    if not p > 1.0:
        raise DomainError("p must exceed 1")
    s = np.sin(psi)
    c = np.cos(psi)
    return (1.0 + (p - 2.0) * s * s) / (1.0 + (p - 2.0) * c * c)


def distortion_at(lambda1: float, lambda2: float) -> float:
    """max |lambda| / min |lambda|; inf at parabolic points, nan at planar ones"""
    big = max(abs(lambda1), abs(lambda2))
    small = min(abs(lambda1), abs(lambda2))
    if big == 0.0:
        return UNDEFINED
    if small == 0.0:
        return UNBOUNDED
    return big / small


def principal_angle(data: CurvatureData) -> float:
    """Angle of t = e^T/|e^T| measured from the first principal direction, in [0, 2 pi)"""
    t = data.e_frame / data.tangent_norm
    first, second = data.principal_directions[:, 0], data.principal_directions[:, 1]
    return float(math.atan2(float(t @ second), float(t @ first)) % (2.0 * math.pi))


def relation_residual(data: CurvatureData, p: float) -> float:
    """|lambda_1 + lambda_2 q(psi)| in the principal frame of the node"""
    lambda1, lambda2 = data.principal_curvatures
    return abs(float(lambda1 + lambda2 * q_of_psi(p, principal_angle(data))))


def sample_node(data: CurvatureData, node: Tuple[int, ...]) -> DistortionSample:
    lambda1, lambda2 = (float(v) for v in data.principal_curvatures)
    return DistortionSample(
        node=(int(node[0]), int(node[1])),
        lambda1=lambda1,
        lambda2=lambda2,
        psi=principal_angle(data) if not is_critical(data) else 0.0,
        K_m=distortion_at(lambda1, lambda2),
        jacobian=lambda1 * lambda2,
    )


def _curvature_field(patch: Patch, e) -> List[Tuple[Tuple[int, ...], CurvatureData]]:
    if patch.n != 2:
        raise DomainError(f"Gauss map distortion is checked on surfaces in R^3, got n={patch.n}")
    return [(node, curvature_at(patch, node, e)) for node in patch.interior_nodes()]


def distortion_samples(patch: Patch, e) -> List[DistortionSample]:
    """One DistortionSample per interior node"""
    return [sample_node(data, node) for node, data in _curvature_field(patch, e)]


def verify_gauss_map(
    patch: Patch,
    p: float,
    e,
    tolerance: float = 1e-6,
    slack_constant: Optional[float] = None,
    precondition_threshold: Optional[float] = None,
    planar_threshold: Optional[float] = None,
) -> CheckReport:
    """Check the distortion bound and the Jacobian sign on a p-minimal patch

    Node residuals are |H + (p-2) k_e| (the Hessian criterion at critical
    points) relative to the curvature scale of the patch. Nodes with
    ||A|| below planar_threshold times that scale are skipped. The allowed
    slack is C (max residual + h^2).

    Raises:
        DomainError: If the patch is not a surface in R^3
        PreconditionError: If the patch is not p-minimal within the threshold
    """
    k_max = k_bound(p)
    slack_constant = settings.SLACK_CONSTANT if slack_constant is None else slack_constant
    precondition_threshold = settings.PRECONDITION_THRESHOLD if precondition_threshold is None else precondition_threshold
    planar_threshold = settings.PLANAR_THRESHOLD if planar_threshold is None else planar_threshold

    field = _curvature_field(patch, e)
    norms = np.array([np.linalg.norm(data.shape_operator) for _, data in field])
    scale = float(np.max(norms)) if norms.size else 0.0
    if scale == 0.0:
        return CheckReport.skipped("gauss_map_distortion", GAUSS_MAP_STATEMENT, tolerance, "patch is planar")

    residuals = {node: critical_residual(data, p) / scale for node, data in field}
    worst = max(residuals.values())
    if worst > precondition_threshold:
        raise PreconditionError("Patch is not p-minimal", residuals)

    h = max(patch.spacing)
    slack = slack_constant * (worst + h * h)

    planar = critical = 0
    max_k, excess = 1.0, -math.inf
    min_jacobian, max_jacobian = math.inf, -math.inf
    relation = 0.0
    for (node, data), norm in zip(field, norms):
        if norm <= planar_threshold * scale:
            planar += 1
            continue
        lambda1, lambda2 = (float(v) for v in data.principal_curvatures)
        jacobian = lambda1 * lambda2 / (scale * scale)
        min_jacobian = min(min_jacobian, jacobian)
        max_jacobian = max(max_jacobian, jacobian)
        distortion = distortion_at(lambda1, lambda2)
        max_k = max(max_k, distortion)
        excess = max(excess, distortion - k_max - slack, jacobian - slack)
        if is_critical(data):
            critical += 1
        else:
            relation = max(relation, relation_residual(data, p) / scale)

    logger.info("Gauss map: max K=%.6f bound %.6f, %d planar nodes skipped", max_k, k_max, planar)
    return CheckReport.evaluate(
        "gauss_map_distortion",
        GAUSS_MAP_STATEMENT,
        max(excess, 0.0),
        tolerance,
        {
            "k_bound": k_max,
            "max_K": max_k,
            "min_jacobian": min_jacobian,
            "max_jacobian": max_jacobian,
            "slack": slack,
            "max_identity_residual": worst,
            "max_relation_residual": relation,
            "planar_nodes_skipped": planar,
            "critical_nodes": critical,
            "nodes": len(field),
        },
    )
