"""
Domain models of the laboratory
"""

from pminimal.models.distortion import DISTORTION_COLUMNS, DistortionSample
from pminimal.models.geometry import Ball, PointCloud, as_cloud
from pminimal.models.profile import (
    PROFILE_COMPLETE,
    PROFILE_TRUNCATED,
    ModelSurface,
    Profile,
    TubeShape,
)
from pminimal.models.surface import CurvatureData, GraphFunction, GraphGrid, Patch
from pminimal.models.tube import Section, SeriesBundle

__all__ = [
    "Ball",
    "PointCloud",
    "as_cloud",
    "TubeShape",
    "Profile",
    "ModelSurface",
    "PROFILE_COMPLETE",
    "PROFILE_TRUNCATED",
    "Patch",
    "GraphGrid",
    "GraphFunction",
    "CurvatureData",
    "Section",
    "SeriesBundle",
    "DistortionSample",
    "DISTORTION_COLUMNS",
]
