"""
Custom exceptions for the p-minimal surface laboratory
"""

from typing import Dict, Iterable, Optional


class PMinimalError(Exception):
    """Base exception for all laboratory errors"""
    pass


class DomainError(PMinimalError, ValueError):
    """Raised when an input lies outside the domain of an operation"""
    pass


class DivergenceError(DomainError):
    """Raised when an improper integral does not converge"""
    def __init__(self, quantity: str, beta: float):
        self.quantity = quantity
        self.beta = beta
        super().__init__(f"{quantity} diverges for beta={beta:g} (requires beta > 1)")


class ConvergenceError(PMinimalError):
    """Raised when the Newton solver stagnates"""
    def __init__(self, message: str, residual: float, iterations: int, p: Optional[float] = None):
        self.residual = residual
        self.iterations = iterations
        self.p = p
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")


class TubeViolationError(PMinimalError):
    """Raised when a surface is not a tube over the requested heights"""
    def __init__(self, tau: Optional[float], reason: str):
        self.tau = tau
        self.reason = reason
        where = "" if tau is None else f" at tau={tau:.6g}"
        super().__init__(f"Not a tube{where}: {reason}")


class PreconditionError(PMinimalError):
    """Raised when a patch fails the p-minimality precondition of a check"""
    def __init__(self, message: str, residuals: Dict[tuple, float]):
        self.residuals = residuals
        worst = max(residuals.values()) if residuals else 0.0
        super().__init__(f"{message} (worst residual {worst:.3e} over {len(residuals)} nodes)")


class UnknownCheckError(PMinimalError):
    """Raised when a check list names a check that does not exist"""
    def __init__(self, name: str, known: Iterable[str]):
        self.name = name
        self.known = sorted(known)
        super().__init__(f"Unknown check '{name}'. Known checks: {', '.join(self.known)}")
