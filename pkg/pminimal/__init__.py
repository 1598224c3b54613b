"""
p-minimal surface laboratory

Numerical checks of the geometry of p-minimal surfaces: equality tube
profiles, convexity of tube sections, the p-minimal graph equation and the
quasiconformality of the Gauss map.

Example usage:
    from pminimal.models import TubeShape
    from pminimal.services.profile_ode import solve_profile

    profile = solve_profile(TubeShape.from_exponent(3, 2.0), r=1.0, tau_span=2.0, h=1e-3)
"""

__version__ = "1.0.0"
__all__ = ["__version__"]
