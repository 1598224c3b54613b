"""
Tube profiles and model hypersurfaces
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from pminimal.exceptions import DomainError

PROFILE_COMPLETE = "complete"
PROFILE_TRUNCATED = "truncated"


@dataclass(frozen=True)
class TubeShape:
    """Dimension, exponent and the resulting tube exponent beta"""
    n: int
    p: float
    beta: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"Dimension n must be an integer >= 2, got {self.n}")
        if not self.p > 1.0:
            raise DomainError("p must exceed 1")
        if not self.beta > 0.0:
            raise DomainError(f"beta must be positive, got {self.beta}")

    @classmethod
    def from_exponent(cls, n: int, p: float, beta: Optional[float] = None) -> "TubeShape":
        """Shape with beta = (n-1)/(p-1) unless overridden"""
        if not p > 1.0:
            raise DomainError("p must exceed 1")
        return cls(n=int(n), p=float(p), beta=float(beta) if beta is not None else (n - 1) / (p - 1.0))

    @classmethod
    def from_dict(cls, data: dict) -> "TubeShape":
        """Create TubeShape from a dictionary"""
        return cls(n=int(data["n"]), p=float(data["p"]), beta=float(data["beta"]))

    def to_dict(self) -> dict:
        """Convert TubeShape to dictionary"""
        return {"n": self.n, "p": self.p, "beta": self.beta}


@dataclass
class Profile:
    """Radius and center series of a tube on a uniform height grid"""
    tau: np.ndarray
    R: np.ndarray
    dR: np.ndarray
    ddR: np.ndarray
    xi: np.ndarray
    dxi: np.ndarray
    ddxi: np.ndarray
    status: str = PROFILE_COMPLETE
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=float)
        count = self.tau.shape[0]
        if count < 3:
            raise DomainError("Profile needs at least three nodes")
        if np.any(np.diff(self.tau) <= 0.0):
            raise DomainError("Profile heights must be strictly increasing")
        for name in ("R", "dR", "ddR"):
            values = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if values.shape[0] != count:
                raise DomainError(f"Profile series '{name}' has {values.shape[0]} values, expected {count}")
            setattr(self, name, values)
        for name in ("xi", "dxi", "ddxi"):
            values = np.asarray(getattr(self, name), dtype=float)
            if values.ndim != 2 or values.shape[0] != count:
                raise DomainError(f"Profile series '{name}' must have shape ({count}, n)")
            setattr(self, name, values)
        if np.any(self.R <= 0.0):
            raise DomainError("Profile radius must be positive")

    @property
    def n(self) -> int:
        return int(self.xi.shape[1])

    @property
    def h(self) -> float:
        return float(self.tau[1] - self.tau[0])

    @property
    def span(self) -> float:
        return float(self.tau[-1] - self.tau[0])

    def __len__(self) -> int:
        return int(self.tau.shape[0])

    @classmethod
    def from_radius(cls, tau: np.ndarray, R: np.ndarray, xi: Optional[np.ndarray] = None, n: int = 2) -> "Profile":
        """Profile whose derivatives are second-order finite differences"""
        tau = np.asarray(tau, dtype=float)
        R = np.asarray(R, dtype=float)
        if xi is None:
            xi = np.zeros((tau.shape[0], n))
        xi = np.asarray(xi, dtype=float)
        dR = np.gradient(R, tau, edge_order=2)
        ddR = np.gradient(dR, tau, edge_order=2)
        dxi = np.gradient(xi, tau, axis=0, edge_order=2)
        ddxi = np.gradient(dxi, tau, axis=0, edge_order=2)
        return cls(tau=tau, R=R, dR=dR, ddR=ddR, xi=xi, dxi=dxi, ddxi=ddxi)

    def window(self, mask: np.ndarray) -> "Profile":
        """Sub-profile on the nodes selected by a boolean mask"""
        return Profile(
            tau=self.tau[mask],
            R=self.R[mask],
            dR=self.dR[mask],
            ddR=self.ddR[mask],
            xi=self.xi[mask],
            dxi=self.dxi[mask],
            ddxi=self.ddxi[mask],
            status=self.status,
            meta=dict(self.meta),
        )

    def capped(self, radius_cap: float) -> "Profile":
        """Nodes where R <= radius_cap * min(R)"""
        return self.window(self.R <= radius_cap * float(np.min(self.R)))

    def to_dict(self) -> dict:
        """Convert Profile metadata to dictionary"""
        return {
            "n": self.n,
            "h": self.h,
            "nodes": len(self),
            "status": self.status,
            "span": self.span,
            **self.meta,
        }


@dataclass
class ModelSurface:
    """Samples of x(theta, tau) = xi(tau) + R(tau) theta + tau e_{n+1}"""
    profile: Profile
    theta_grid: np.ndarray
    samples: np.ndarray

    def __post_init__(self):
        self.theta_grid = np.asarray(self.theta_grid, dtype=float)
        self.samples = np.asarray(self.samples, dtype=float)
        expected = (len(self.profile), self.theta_grid.shape[0], self.profile.n + 1)
        if self.samples.shape != expected:
            raise DomainError(f"Surface samples have shape {self.samples.shape}, expected {expected}")

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def points(self) -> np.ndarray:
        """All samples as an (N, n+1) cloud"""
        return self.samples.reshape(-1, self.n + 1)
