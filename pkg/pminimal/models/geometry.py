"""
Point clouds and balls
"""

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from pminimal.exceptions import DomainError

# An (N, d) array of finite coordinates.
PointCloud = np.ndarray
CloudLike = Union[np.ndarray, Sequence[Sequence[float]]]


def as_cloud(points: CloudLike, require_points: bool = True) -> PointCloud:
    """Validate and convert points to an (N, d) float array"""
    cloud = np.asarray(points, dtype=float)
    if cloud.ndim == 1 and cloud.size:
        cloud = cloud.reshape(1, -1)
    if cloud.ndim != 2:
        raise DomainError(f"Point cloud must be two-dimensional, got shape {cloud.shape}")
    if require_points and cloud.shape[0] == 0:
        raise DomainError("Point cloud is empty")
    if cloud.shape[1] == 0:
        raise DomainError("Points have no coordinates")
    if not np.all(np.isfinite(cloud)):
        raise DomainError("Point cloud contains non-finite coordinates")
    return cloud


@dataclass(frozen=True)
class Ball:
    """Closed ball given by its center and radius"""
    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(-1)
        if not np.all(np.isfinite(center)):
            raise DomainError("Ball center must be finite")
        if not self.radius >= 0.0:
            raise DomainError(f"Ball radius must be non-negative, got {self.radius}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dimension(self) -> int:
        return int(self.center.shape[0])

    def excess(self, points: CloudLike) -> np.ndarray:
        """Distance of each point beyond the sphere (negative inside)"""
        cloud = as_cloud(points)
        return np.linalg.norm(cloud - self.center, axis=1) - self.radius

    def contains(self, points: CloudLike, tol: float = 1e-12) -> bool:
        """Check containment within tol * (1 + radius)"""
        return bool(np.all(self.excess(points) <= tol * (1.0 + self.radius)))

    @classmethod
    def from_dict(cls, data: dict) -> "Ball":
        """Create Ball from a dictionary"""
        return cls(center=np.asarray(data["center"], dtype=float), radius=float(data["radius"]))

    def to_dict(self) -> dict:
        """Convert Ball to dictionary"""
        return {"center": self.center.tolist(), "radius": self.radius}
