"""House-elevation decision engine for riverine flood risk under uncertainty."""

__version__ = "0.1.0"

from .exposure import DepthDamageCurve, ElevationCostModel, House, LifetimeDist
from .hazard import GevParams, GevPosterior, PriorSpec
from .sow import Scenario, SowEnsemble

__all__ = [
    "DepthDamageCurve",
    "ElevationCostModel",
    "GevParams",
    "GevPosterior",
    "House",
    "LifetimeDist",
    "PriorSpec",
    "Scenario",
    "SowEnsemble",
    "__version__",
]
