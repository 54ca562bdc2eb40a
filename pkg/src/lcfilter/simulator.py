"""Synthetic edge streams under straight forward camera motion.

Static landmarks flow radially away from the image center; moving objects
break that flow and are labeled rebel. Every edge carries the id of the
world point that produced it so tracks can be scored against ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import EdgePoint, EgoState, FrameGeometry, PixelPoint


@dataclass(frozen=True)
class WorldPoint:
    # camera frame axes: x right, y down, z forward (meters)
    position: tuple
    velocity: tuple | None = None

    @property
    def moving(self) -> bool:
        return self.velocity is not None

    def at(self, t: float) -> np.ndarray:
        p = np.asarray(self.position, dtype=float)
        if self.velocity is None:
            return p
        return p + t * np.asarray(self.velocity, dtype=float)


@dataclass(frozen=True)
class SimConfig:
    landmark_count: int = 1000
    focal_length: float = 400.0
    # meters / second, and meters / second^2
    ego_speed: float = 0.05
    ego_acceleration: float = 0.001
    frame_rate: float = 1.0
    frames: int = 30
    pixel_noise_sigma: float = 0.0
    rotational_error_sigma: float = 0.0
    seed: int = 0
    width: int = 640
    height: int = 480
    # depth band, in meters ahead of the camera, where landmarks are placed
    depth_near: float = 6.0
    depth_far: float = 12.0
    # replace landmarks that leave the view so the count stays constant
    respawn: bool = True
    pixels_per_unit: float = 40.0

    def __post_init__(self):
        if self.frame_rate <= 0:
            raise ValueError("frame rate must be positive")
        if self.landmark_count < 0:
            raise ValueError("landmark count must be non-negative")
        if self.focal_length <= 0:
            raise ValueError("focal length must be positive")
        if not 0 < self.depth_near < self.depth_far:
            raise ValueError("depth band must satisfy 0 < near < far")

    @property
    def frame(self) -> FrameGeometry:
        return FrameGeometry(self.width, self.height)


@dataclass
class SimFrame:
    frame_id: int
    timestamp: float
    edges: list
    labels: list
    ego: EgoState
    # physical ego speed and distance traveled, as written to the ego log
    speed: float
    distance: float
    # noise-free image position of every visible world point, by source id
    truth: dict = field(default_factory=dict)


def project(world, camera_z: float, frame: FrameGeometry, focal: float, t: float = 0.0):
    """Pinhole projection; ``None`` when behind the camera or outside the frame."""
    if focal <= 0:
        raise ValueError("focal length must be positive")
    p = world.at(t) if isinstance(world, WorldPoint) else np.asarray(world, dtype=float)
    depth = p[2] - camera_z
    if depth <= 0:
        return None
    c = frame.center
    pix = PixelPoint(c.x + focal * p[0] / depth, c.y + focal * p[1] / depth)
    return pix if frame.contains(pix) else None


def camera_z_at(config: SimConfig, t: float) -> float:
    return config.ego_speed * t + 0.5 * config.ego_acceleration * t * t


def _sample_landmark(rng: np.random.Generator, config: SimConfig, camera_z: float) -> WorldPoint:
    frame = config.frame
    u = rng.uniform(0, config.width)
    v = rng.uniform(0, config.height)
    d = rng.uniform(config.depth_near, config.depth_far)
    c = frame.center
    f = config.focal_length
    return WorldPoint(((u - c.x) * d / f, (v - c.y) * d / f, camera_z + d))


def flow_deviation(world: WorldPoint, config: SimConfig, t: float) -> float:
    """Pixels by which a point's image motion over the last frame departs from
    the motion a static point at the same place would have had."""
    dt = 1.0 / config.frame_rate
    frame = config.frame
    f = config.focal_length
    c = frame.center
    z_now = camera_z_at(config, t)
    z_prev = camera_z_at(config, t - dt)
    now = world.at(t)
    prev = world.at(t - dt)

    def img(p, cz):
        depth = p[2] - cz
        if depth <= 0:
            return None
        return np.array([c.x + f * p[0] / depth, c.y + f * p[1] / depth])

    actual = img(prev, z_prev)
    static = img(now, z_prev)
    if actual is None or static is None:
        return float("inf")
    return float(np.hypot(*(actual - static)))


def generate_sequence(config: SimConfig, moving_objects=()) -> list:
    rng = np.random.default_rng(config.seed)
    frame = config.frame
    dt = 1.0 / config.frame_rate
    landmarks = {i: _sample_landmark(rng, config, 0.0) for i in range(config.landmark_count)}
    next_id = config.landmark_count
    objects = {next_id + k: w for k, w in enumerate(moving_objects)}
    next_id += len(objects)
    noise_floor = 1.0 + 3.0 * (config.pixel_noise_sigma + config.rotational_error_sigma)

    frames = []
    for k in range(config.frames):
        frame_id = k + 1
        t = k * dt
        cz = camera_z_at(config, t)
        speed = config.ego_speed + config.ego_acceleration * t

        if config.respawn and k > 0:
            for i in sorted(landmarks):
                if project(landmarks[i], cz, frame, config.focal_length) is None:
                    del landmarks[i]
                    landmarks[next_id] = _sample_landmark(rng, config, cz)
                    next_id += 1

        shift = rng.normal(0.0, config.rotational_error_sigma, size=2) if config.rotational_error_sigma > 0 else np.zeros(2)
        edges, labels, truth = [], [], {}
        sources = [(i, w, "normal") for i, w in sorted(landmarks.items())]
        sources += [(i, w, None) for i, w in sorted(objects.items())]
        for i, w, label in sources:
            p = project(w, cz, frame, config.focal_length, t)
            if p is None:
                continue
            truth[i] = p
            if label is None:
                label = "rebel" if k > 0 and flow_deviation(w, config, t) > noise_floor else "normal"
            x, y = p.x + shift[0], p.y + shift[1]
            if config.pixel_noise_sigma > 0:
                x += rng.normal(0.0, config.pixel_noise_sigma)
                y += rng.normal(0.0, config.pixel_noise_sigma)
            q = PixelPoint(float(x), float(y))
            if not frame.contains(q):
                continue
            edges.append(EdgePoint(q, frame_id, t, i))
            labels.append(label)
        ego = EgoState(speed * config.pixels_per_unit, dt, cz * config.pixels_per_unit)
        frames.append(SimFrame(frame_id, t, edges, labels, ego, speed, cz, truth))
    return frames


def render_frame(edges, frame: FrameGeometry) -> np.ndarray:
    """Single bright pixels on black, one per edge."""
    img = np.zeros((frame.height, frame.width), dtype=np.uint8)
    for e in edges:
        x, y = int(round(e.location.x)), int(round(e.location.y))
        if 0 <= x < frame.width and 0 <= y < frame.height:
            img[y, x] = 255
    return img


def crossing_objects(count: int, config: SimConfig, seed: int | None = None) -> list:
    """Independently moving points with lateral velocities that break the radial flow."""
    rng = np.random.default_rng(config.seed + 7919 if seed is None else seed)
    out = []
    f = config.focal_length
    c = config.frame.center
    for _ in range(count):
        d = rng.uniform(config.depth_near, config.depth_far)
        u = rng.uniform(0.25, 0.75) * config.width
        v = rng.uniform(0.25, 0.75) * config.height
        heading = rng.uniform(0.0, 2 * np.pi)
        speed = rng.uniform(0.15, 0.35)
        out.append(WorldPoint(((u - c.x) * d / f, (v - c.y) * d / f, d),
                              (speed * np.cos(heading), speed * np.sin(heading), 0.0)))
    return out
