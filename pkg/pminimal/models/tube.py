"""
Tube sections and the series built from them
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from pminimal.models.geometry import Ball


@dataclass
class Section:
    """Horizontal section of a tube projected to the base hyperplane"""
    tau: float
    points: np.ndarray
    ball: Ball
    sigma: float

    @property
    def rho(self) -> float:
        """Largest distance of a section point from the axis"""
        return float(np.max(np.linalg.norm(self.points, axis=1)))

    def to_dict(self) -> dict:
        """Convert Section to dictionary"""
        return {
            "tau": self.tau,
            "count": int(self.points.shape[0]),
            "ball": self.ball.to_dict(),
            "sigma": self.sigma,
        }


@dataclass
class SeriesBundle:
    """Radius, center and axis-distance series along the tube"""
    tau: np.ndarray
    R: np.ndarray
    xi: np.ndarray
    rho: np.ndarray
    sigma: np.ndarray

    @property
    def epsilon(self) -> float:
        """Smallest sigma over all sections"""
        return float(np.min(self.sigma))

    @property
    def span(self) -> float:
        return float(self.tau[-1] - self.tau[0])

    @classmethod
    def from_sections(cls, sections: List[Section]) -> "SeriesBundle":
        return cls(
            tau=np.array([s.tau for s in sections], dtype=float),
            R=np.array([s.ball.radius for s in sections], dtype=float),
            xi=np.array([s.ball.center for s in sections], dtype=float),
            rho=np.array([s.rho for s in sections], dtype=float),
            sigma=np.array([s.sigma for s in sections], dtype=float),
        )

    def to_dict(self) -> dict:
        """Convert SeriesBundle summary to dictionary"""
        return {
            "sections": int(self.tau.shape[0]),
            "tau_range": [float(self.tau[0]), float(self.tau[-1])],
            "min_R": float(np.min(self.R)),
            "epsilon": self.epsilon,
        }
