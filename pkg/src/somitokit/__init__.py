"""somitokit: 1D somitogenesis models, integration and phase-plane analysis."""

__version__ = "0.1.0"

from .grid import BoundaryMode, Grid1D, heaviside, laplacian, positive_part
from .models import (
    CW2Params,
    CW3Params,
    FHNParams,
    FHNProtoParams,
    Model,
    PORDParams,
    PulseParams,
    cw2_model,
    cw3_model,
    fhn_model,
    pord_model,
)
from .integrate import SimConfig, SpaceTimeRaster, run, stability_guard, step

__all__ = [
    "__version__",
    "BoundaryMode",
    "Grid1D",
    "heaviside",
    "laplacian",
    "positive_part",
    "CW2Params",
    "CW3Params",
    "FHNParams",
    "FHNProtoParams",
    "PORDParams",
    "PulseParams",
    "Model",
    "cw2_model",
    "cw3_model",
    "fhn_model",
    "pord_model",
    "SimConfig",
    "SpaceTimeRaster",
    "run",
    "stability_guard",
    "step",
]
