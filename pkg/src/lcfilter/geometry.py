"""Shared value types and geometric predicates.

Image coordinates throughout: origin top-left, x to the right, y downward.
All internal quantities are pixels and seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import NamedTuple


class DegenerateGeometry(ValueError):
    """Raised when a direction is requested between coincident points."""


class PixelPoint(NamedTuple):
    x: float
    y: float

    def distance_to(self, other: "PixelPoint") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class FrameGeometry:
    width: int = 640
    height: int = 480

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("frame dimensions must be positive")

    @property
    def center(self) -> PixelPoint:
        return PixelPoint(self.width / 2.0, self.height / 2.0)

    def contains(self, p: PixelPoint) -> bool:
        return 0.0 <= p.x < self.width and 0.0 <= p.y < self.height


@dataclass(frozen=True)
class EdgePoint:
    """A detected corner. ``source_id`` carries simulator ground truth (-1 if unknown)."""

    location: PixelPoint
    frame_id: int
    timestamp: float
    source_id: int = -1


@dataclass(frozen=True)
class TrustThresholds:
    standard: float = 3.0
    critical: float = 2.0
    maximum: float = 5.0

    def __post_init__(self):
        if not self.critical < self.standard < self.maximum:
            raise ValueError("trust thresholds must satisfy critical < standard < maximum")

    @property
    def initial(self) -> float:
        return 0.5 * (self.critical + self.standard)

    def clamp(self, value: float) -> float:
        return min(value, self.maximum)

    def survives(self, value: float) -> bool:
        return value >= self.critical


class RegionType(IntEnum):
    NONE = 0
    CIRCLE = 1
    RECTANGLE = 2


@dataclass(frozen=True)
class IgnoreRegion:
    location: PixelPoint
    radius: float
    region_type: RegionType = RegionType.CIRCLE
    expires_at_frame: int = 0
    # half-extents, only used for rectangles
    radius_y: float | None = None
    source_circle: int = -1

    def __post_init__(self):
        if self.region_type != RegionType.NONE:
            if self.radius <= 0 or (self.radius_y is not None and self.radius_y <= 0):
                raise ValueError("ignore region extents must be positive")

    def is_active(self, frame_id: int) -> bool:
        return self.expires_at_frame >= frame_id


@dataclass(frozen=True)
class Collector:
    location: PixelPoint
    boundary_size: float

    def __post_init__(self):
        if self.boundary_size <= 0:
            raise ValueError("collector boundary size must be positive")


@dataclass(frozen=True)
class ErrorModel:
    rotational_span: float = 4.0
    governing_errors: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.rotational_span < 0:
            raise ValueError("rotational span must be non-negative")


@dataclass(frozen=True)
class EgoState:
    speed: float
    frame_interval: float
    distance_traveled: float = 0.0

    def __post_init__(self):
        if self.frame_interval <= 0:
            raise ValueError("frame interval must be positive")
        if self.speed < 0:
            raise ValueError("ego speed must be non-negative")


def within_collector(edge: PixelPoint, collector: Collector) -> bool:
    dx = collector.location.x - edge.x
    dy = collector.location.y - edge.y
    return math.sqrt(dx * dx + dy * dy) < collector.boundary_size


def inside_ignore_region(edge: PixelPoint, region: IgnoreRegion) -> bool:
    if region.region_type == RegionType.NONE:
        return False
    dx = edge.x - region.location.x
    dy = edge.y - region.location.y
    if region.region_type == RegionType.CIRCLE:
        return math.hypot(dx, dy) <= region.radius
    ry = region.radius if region.radius_y is None else region.radius_y
    return abs(dx) <= region.radius and abs(dy) <= ry


def error_span_distance(edge: PixelPoint, tracked_location: PixelPoint, frame: FrameGeometry) -> float:
    """Perpendicular distance of ``edge`` from the radial line through the
    frame center and ``tracked_location``."""
    c = frame.center
    run = tracked_location.x - c.x
    rise = tracked_location.y - c.y
    if run == 0.0 and rise == 0.0:
        raise DegenerateGeometry("tracked location coincides with frame center")
    ex = edge.x - c.x
    ey = edge.y - c.y
    if rise == 0.0:
        return abs(ey)
    if run == 0.0:
        return abs(ex)
    # slope of the ray as dx/dy so that the line is x = m*y through the center
    m = run / rise
    return abs(-ex + m * ey) / math.sqrt(1.0 + m * m)


def radial_angle(point: PixelPoint, origin: PixelPoint) -> float:
    dx = point.x - origin.x
    dy = point.y - origin.y
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometry("angle undefined for coincident points")
    return math.degrees(math.atan2(dy, dx)) % 360.0


def angle_difference(a: float, b: float) -> float:
    """Signed shortest circular difference a - b, in (-180, 180]."""
    d = (a - b) % 360.0
    if d > 180.0:
        d -= 360.0
    return d


def angle_within(a: float, b: float, window: float) -> bool:
    return abs(angle_difference(a, b)) < window


def circular_mean(angles) -> float:
    angles = list(angles)
    if not angles:
        raise ValueError("mean of empty angle set")
    s = sum(math.sin(math.radians(a)) for a in angles)
    c = sum(math.cos(math.radians(a)) for a in angles)
    if abs(s) < 1e-12 and abs(c) < 1e-12:
        return angles[0] % 360.0
    return math.degrees(math.atan2(s, c)) % 360.0


def unit_vector(angle_deg: float) -> PixelPoint:
    r = math.radians(angle_deg)
    return PixelPoint(math.cos(r), math.sin(r))


def trust_weighted(prior: float, measured: float, trust: float, critical: float) -> float:
    """Trust-weighted blend: prior weighted by (trust - critical), measurement by 1."""
    w = trust - critical
    return (w * prior + measured) / (w + 1.0)
