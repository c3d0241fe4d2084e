"""Sub-Nyquist radar simulation and sparse recovery."""

from .scene import (ClutterModel, RadarConfig, Target, TargetScene, synthesize_fourier,
                    synthesize_time)
from .xampling import FrequencyIndexSet, XampledData, select_kappa, xample
from .results import RecoveryResult

__version__ = "0.1.0"

__all__ = [
    "ClutterModel", "RadarConfig", "Target", "TargetScene", "synthesize_fourier",
    "synthesize_time", "FrequencyIndexSet", "XampledData", "select_kappa", "xample",
    "RecoveryResult",
]
