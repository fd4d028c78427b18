"""Integrable flows on CP^N = SU(N+1)/U(N).

The Hasimoto variable q, the spin field T, the curve gamma and the map
Ad(psi) A are four faces of the same dynamics; the modules below cover
each face and the transforms between them.
"""
from .algebra import CPN
from .calculus import Grid
from .errors import (BlowUpError, ConfigError, DimensionError, FrameError, HasimotoError,
                     IntegrabilityError, SingularityError, SnapshotError)
from .hierarchy import HasimotoState, evolve, plane_wave
from .geometry import CurveState, SpinState
from .mapping import MapCoords, MapState
from .transform import EquivalenceConfig, equivalence_run

__version__ = "0.1.0"

__all__ = [
    "CPN", "Grid", "HasimotoState", "SpinState", "CurveState", "MapState", "MapCoords",
    "EquivalenceConfig", "equivalence_run", "evolve", "plane_wave",
    "HasimotoError", "DimensionError", "IntegrabilityError", "BlowUpError",
    "SingularityError", "FrameError", "ConfigError", "SnapshotError",
]
