"""
Gauss map distortion samples
"""

from dataclasses import dataclass
from typing import Tuple

DISTORTION_COLUMNS = ("i", "j", "lambda1", "lambda2", "psi", "K_m", "jacobian")


@dataclass
class DistortionSample:
    """Principal curvatures, frame angle and distortion at one node"""
    node: Tuple[int, int]
    lambda1: float
    lambda2: float
    psi: float
    K_m: float
    jacobian: float

    @classmethod
    def from_dict(cls, data: dict) -> "DistortionSample":
        """Create DistortionSample from a CSV row"""
        return cls(
            node=(int(data["i"]), int(data["j"])),
            lambda1=float(data["lambda1"]),
            lambda2=float(data["lambda2"]),
            psi=float(data["psi"]),
            K_m=float(data["K_m"]),
            jacobian=float(data["jacobian"]),
        )

    def to_dict(self) -> dict:
        """Convert to a CSV row"""
        return {
            "i": self.node[0],
            "j": self.node[1],
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "psi": self.psi,
            "K_m": self.K_m,
            "jacobian": self.jacobian,
        }
