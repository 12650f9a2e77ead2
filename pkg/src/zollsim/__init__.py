"""Numerical laboratory for geodesic flows, Radon transforms and
semiclassical propagation on Zoll surfaces."""
from .geometry import ChartError, PhasePoint, RevolutionProfile, ZollSurface
from .potential import Potential

__all__ = ["ChartError", "PhasePoint", "Potential", "RevolutionProfile", "ZollSurface"]
__version__ = "0.1.0"
