"""Run configuration: defaults, key-value config files and overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping


@dataclass(frozen=True)
class UpdateSchedule:
    """Frame periods of the distance-map, skeleton and graph loops."""

    distmap_every: int = 1
    skeleton_every: int = 20
    graph_every: int = 80

    def __post_init__(self) -> None:
        if min(self.distmap_every, self.skeleton_every, self.graph_every) < 1:
            raise ValueError("update periods must be >= 1")
        if self.skeleton_every % self.distmap_every:
            raise ValueError("skeleton period must be a multiple of the distance-map period")
        if self.graph_every % self.skeleton_every:
            raise ValueError("graph period must be a multiple of the skeleton period")

    @classmethod
    def parse(cls, text: str) -> "UpdateSchedule":
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if len(parts) != 3:
            raise ValueError(f"schedule needs three periods d,s,g; got {text!r}")
        return cls(*(int(p) for p in parts))

    def __str__(self) -> str:
        return f"{self.distmap_every},{self.skeleton_every},{self.graph_every}"


@dataclass(frozen=True)
class RunConfig:
    sigma: float = 4.0
    laplacian_scale: float = 255.0
    binarize_threshold: float = 10.0
    schedule: UpdateSchedule = field(default_factory=UpdateSchedule)
    protected_layer_width: int = 3
    connect_radius: float = 3.0
    outlier_threshold: float = 20.0
    stencil: int = 4
    kernel_radius: int | None = None
    # world frame of the pixel lattice used to project scans
    resolution: float = 0.05
    origin_x: float = 0.0
    origin_y: float = 0.0

    def __post_init__(self) -> None:
        positive = ("sigma", "laplacian_scale", "binarize_threshold", "protected_layer_width",
                    "connect_radius", "outlier_threshold", "resolution")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.stencil not in (4, 8):
            raise ValueError("stencil must be 4 or 8")

    @property
    def origin(self) -> tuple[float, float]:
        return (self.origin_x, self.origin_y)

    def replace(self, **changes: Any) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def with_overrides(self, values: Mapping[str, Any]) -> "RunConfig":
        """Apply string or typed values by field name; ``None`` values are skipped."""
        types = {f.name: f.type for f in dataclasses.fields(self)}
        changes = {}
        for key, value in values.items():
            key = key.replace("-", "_")
            if value is None:
                continue
            if key not in types:
                raise ValueError(f"unknown config key {key!r}")
            changes[key] = _coerce(key, value)
        return self.replace(**changes)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is not None:
                lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


def _coerce(key: str, value: Any) -> Any:
    if key == "schedule":
        return value if isinstance(value, UpdateSchedule) else UpdateSchedule.parse(str(value))
    if key in ("protected_layer_width", "stencil", "kernel_radius"):
        return int(value)
    return float(value)


def read_config_file(path: str | Path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value
    return values


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Defaults, then the config file, then explicit overrides."""
    cfg = RunConfig()
    if path is not None:
        cfg = cfg.with_overrides(read_config_file(path))
    if overrides:
        cfg = cfg.with_overrides(overrides)
    return cfg
