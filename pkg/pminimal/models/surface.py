"""
Sampled immersions, graphs and pointwise curvature data
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from pminimal.exceptions import DomainError


@dataclass
class Patch:
    """Sampled parametric immersion of an n-dimensional grid into R^{n+1}

    positions has shape (N_1, ..., N_n, n+1). Axes flagged periodic wrap
    around; time_axis names the parameter axis along which the last
    ambient coordinate grows, if any. orientation flips the normal chosen
    by the parameter order.
    """
    positions: np.ndarray
    spacing: Tuple[float, ...]
    periodic: Tuple[bool, ...] = ()
    time_axis: Optional[int] = None
    orientation: int = 1

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        n = self.positions.ndim - 1
        if n < 1 or self.positions.shape[-1] != n + 1:
            raise DomainError(
                f"Patch positions must have shape (N_1..N_n, n+1), got {self.positions.shape}"
            )
        if not np.all(np.isfinite(self.positions)):
            raise DomainError("Patch positions must be finite")
        self.spacing = tuple(float(s) for s in np.broadcast_to(np.asarray(self.spacing, dtype=float), (n,)))
        if any(s <= 0.0 for s in self.spacing):
            raise DomainError("Patch spacing must be positive")
        self.periodic = tuple(bool(b) for b in self.periodic) if self.periodic else (False,) * n
        if len(self.periodic) != n:
            raise DomainError("One periodic flag per parameter axis is required")
        if self.time_axis is not None and not 0 <= self.time_axis < n:
            raise DomainError(f"time_axis {self.time_axis} out of range")
        if self.orientation not in (1, -1):
            raise DomainError("orientation must be +1 or -1")

    @property
    def n(self) -> int:
        return self.positions.ndim - 1

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.positions.shape[:-1]

    def point(self, node: Tuple[int, ...]) -> np.ndarray:
        """Position at a node, wrapping periodic axes"""
        index = []
        for axis, i in enumerate(node):
            size = self.shape[axis]
            if self.periodic[axis]:
                i = i % size
            elif not 0 <= i < size:
                raise DomainError(f"Node {tuple(node)} leaves the grid along axis {axis}")
            index.append(i)
        return self.positions[tuple(index)]

    def is_interior(self, node: Tuple[int, ...], margin: int = 1) -> bool:
        """Check that a stencil of the given radius fits around node"""
        for axis, i in enumerate(node):
            if self.periodic[axis]:
                continue
            if i < margin or i > self.shape[axis] - 1 - margin:
                return False
        return True

    def interior_nodes(self, margin: int = 1):
        """Iterate over nodes whose stencil fits in the grid"""
        ranges = [
            range(size) if self.periodic[axis] else range(margin, size - margin)
            for axis, size in enumerate(self.shape)
        ]
        for node in np.ndindex(*[len(r) for r in ranges]):
            yield tuple(r[i] for r, i in zip(ranges, node))


@dataclass(frozen=True)
class GraphGrid:
    """Uniform square grid over a rectangle of the horizontal plane"""
    size: int
    spacing: float
    origin: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.size < 5:
            raise DomainError("Graph grid needs at least 5 nodes per side")
        if self.size > 129:
            raise DomainError(f"Graph grid of {self.size} nodes per side exceeds 129")
        if not self.spacing > 0.0:
            raise DomainError("Graph grid spacing must be positive")

    @classmethod
    def over(cls, lower: Tuple[float, float], length: float, size: int) -> "GraphGrid":
        """Grid covering [lower, lower + length]^2 with size nodes per side"""
        return cls(size=int(size), spacing=float(length) / (size - 1), origin=(float(lower[0]), float(lower[1])))

    def coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        """Node coordinates x[i, j], y[i, j]"""
        axis = np.arange(self.size) * self.spacing
        return np.meshgrid(self.origin[0] + axis, self.origin[1] + axis, indexing="ij")

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros((self.size, self.size), dtype=bool)
        mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = True
        return mask


@dataclass
class GraphFunction:
    """Height function f over a uniform grid of the horizontal space"""
    f: np.ndarray
    spacing: float
    origin: Tuple[float, ...] = ()

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float)
        if self.f.ndim not in (2, 3):
            raise DomainError("Graph domains must be two- or three-dimensional")
        if not np.all(np.isfinite(self.f)):
            raise DomainError("Graph values must be finite")
        if not self.spacing > 0.0:
            raise DomainError("Graph spacing must be positive")
        self.origin = tuple(float(o) for o in self.origin) if self.origin else (0.0,) * self.f.ndim

    @property
    def n(self) -> int:
        return self.f.ndim

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        axes = [o + np.arange(size) * self.spacing for o, size in zip(self.origin, self.f.shape)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def to_patch(self) -> Patch:
        """The graph x -> (x, f(x)) as a parametric patch with upward normal"""
        positions = np.stack(self.coordinates() + (self.f,), axis=-1)
        return Patch(positions=positions, spacing=(self.spacing,) * self.n)

    @classmethod
    def from_grid(cls, grid: GraphGrid, f: np.ndarray) -> "GraphFunction":
        return cls(f=f, spacing=grid.spacing, origin=grid.origin)


@dataclass
class CurvatureData:
    """Curvature of a sampled immersion at one node relative to a direction e

    shape_operator is expressed in the orthonormal tangent frame whose rows
    are stored in frame; e_frame holds the coordinates of e^T in that frame.
    """
    normal: np.ndarray
    shape_operator: np.ndarray
    principal_curvatures: np.ndarray
    principal_directions: np.ndarray
    mean_curvature: float
    e_tangent: np.ndarray
    e_frame: np.ndarray
    omega: float
    frame: np.ndarray

    @property
    def tangent_norm(self) -> float:
        """|e^T|"""
        return float(np.linalg.norm(self.e_frame))

    def to_dict(self) -> dict:
        """Convert CurvatureData to dictionary"""
        return {
            "normal": self.normal.tolist(),
            "principal_curvatures": self.principal_curvatures.tolist(),
            "mean_curvature": self.mean_curvature,
            "omega": self.omega,
            "tangent_norm": self.tangent_norm,
        }
