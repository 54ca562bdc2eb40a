"""Line-Circle geometric filter for edge-based object detection from a single forward-moving camera."""

from .config import RunConfig
from .geometry import (
    Collector,
    EdgePoint,
    EgoState,
    ErrorModel,
    FrameGeometry,
    IgnoreRegion,
    PixelPoint,
    RegionType,
    TrustThresholds,
)
from .pipeline import FilterState, LCFilter, compute_dimensionality, run_pipeline

__version__ = "0.1.0"
