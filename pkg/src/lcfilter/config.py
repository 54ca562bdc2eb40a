"""Run configuration with the published parameter set as defaults."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .geometry import ErrorModel, FrameGeometry, TrustThresholds


@dataclass(frozen=True)
class RunConfig:
    trust_standard: float = 3.0
    trust_critical: float = 2.0
    trust_max: float = 5.0
    # rotational error span, pixels
    delta: float = 4.0
    # initial boundary layer of normal edges / default collector size, pixels
    bs0: float = 25.0
    # lower bound on the learned boundary layer, pixels
    bl_min: float = 12.5
    fast_threshold: int = 25
    fast_nms: bool = True
    # normal edge grouping
    eps_beta: float = 20.0
    eps_v: float = 10.0
    # normal circle comparison
    eps_beta_circle: float = 4.0
    eps_v_circle: float = 100.0
    # rebel edge grouping
    eps_beta_rebel: float = 50.0
    eps_v_rebel: float = 40.0
    # rebel circle comparison
    eps_beta_rebel_circle: float = 10.0
    eps_v_rebel_circle: float = 1000.0
    involvement: float = 0.5
    psi_lifetime: int = 3
    # largest direction change accepted while validating a rebel chain, degrees
    rebel_max_deviation: float = 50.0
    # pixels per physical unit of ego speed / distance
    pixels_per_unit: float = 40.0
    frame_interval: float = 1.0
    width: int = 640
    height: int = 480
    feedback: bool = True

    def __post_init__(self):
        TrustThresholds(self.trust_standard, self.trust_critical, self.trust_max)
        eps = [self.eps_beta, self.eps_v, self.eps_beta_circle, self.eps_v_circle,
               self.eps_beta_rebel, self.eps_v_rebel, self.eps_beta_rebel_circle,
               self.eps_v_rebel_circle]
        if any(e <= 0 for e in eps):
            raise ValueError("all epsilon parameters must be positive")
        if self.bs0 <= 0 or self.bl_min <= 0 or self.delta < 0:
            raise ValueError("boundary sizes must be positive and delta non-negative")
        if not 0.0 < self.involvement <= 1.0:
            raise ValueError("involvement must be a fraction in (0, 1]")
        if self.psi_lifetime < 1:
            raise ValueError("psi lifetime must be at least one frame")

    @property
    def trust(self) -> TrustThresholds:
        return TrustThresholds(self.trust_standard, self.trust_critical, self.trust_max)

    @property
    def frame(self) -> FrameGeometry:
        return FrameGeometry(self.width, self.height)

    @property
    def error_model(self) -> ErrorModel:
        return ErrorModel(rotational_span=self.delta)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)
