"""Environment and generator configuration.

The map distribution is deliberately parameterized: zone count weights,
boundary layouts drawn from an enumerable family of straight separating
lines, and per-zone object count ranges.  Keeping the structural part of the
family enumerable is what makes the exact posterior backend tractable.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import yaml

from ..objects import RESOURCES, WORKSHOPS


@dataclass(frozen=True)
class CraftGenParams:
    """Distribution parameters for craft map generation."""

    size: int = 8
    zone_weights: tuple[float, ...] = (0.3, 0.5, 0.2)   # P(1), P(2), P(3) zones
    # separating lines may sit on these row/col indices (orientation chosen
    # uniformly); two parallel lines are drawn for three zones
    line_positions: tuple[int, ...] = (2, 3, 4, 5)
    boundary_types: tuple[str, ...] = ("water", "stone")
    # inclusive (lo, hi) count range per zone for each resource
    resource_ranges: dict[str, tuple[int, int]] = field(
        default_factory=lambda: {
            "wood": (0, 2), "iron": (0, 2), "grass": (0, 2),
            "gold": (0, 1), "gem": (0, 1),
        }
    )
    workshop_prob: float = 0.7        # per workshop type, placed in one zone
    placement: str = "uniform"        # "uniform" | "first-free"
    fixed_agent: tuple[int, int] | None = None
    max_retries: int = 200

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BoxGenParams:
    """Distribution parameters for box-world map generation."""

    size: int = 12
    goal_lengths: tuple[int, ...] = (1, 2, 3, 4)
    distractor_counts: tuple[int, ...] = (1, 2, 3, 4)
    max_retries: int = 200

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EnvConfig:
    domain: str = "craft"                 # "craft" | "box"
    horizon: int = 100
    view_radius: int | None = None        # None -> domain default (2 craft, 3 box)
    full_observation: bool = False
    craft: CraftGenParams = field(default_factory=CraftGenParams)
    box: BoxGenParams = field(default_factory=BoxGenParams)

    @property
    def radius(self) -> int:
        if self.full_observation:
            return max(self.craft.size, self.box.size)
        if self.view_radius is not None:
            return self.view_radius
        return 2 if self.domain == "craft" else 3

    @property
    def size(self) -> int:
        return self.craft.size if self.domain == "craft" else self.box.size

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "horizon": self.horizon,
            "view_radius": self.view_radius,
            "full_observation": self.full_observation,
            "craft": self.craft.to_dict(),
            "box": self.box.to_dict(),
        }


def config_from_dict(data: dict) -> EnvConfig:
    craft = data.get("craft", {})
    box = data.get("box", {})
    if isinstance(craft, dict):
        craft = dict(craft)
        for key in ("zone_weights", "line_positions", "boundary_types"):
            if key in craft:
                craft[key] = tuple(craft[key])
        if "resource_ranges" in craft:
            craft["resource_ranges"] = {
                r: tuple(v) for r, v in craft["resource_ranges"].items()
            }
        if craft.get("fixed_agent") is not None:
            craft["fixed_agent"] = tuple(craft["fixed_agent"])
        craft = CraftGenParams(**craft)
    if isinstance(box, dict):
        box = dict(box)
        for key in ("goal_lengths", "distractor_counts"):
            if key in box:
                box[key] = tuple(box[key])
        box = BoxGenParams(**box)
    return EnvConfig(
        domain=data.get("domain", "craft"),
        horizon=data.get("horizon", 100),
        view_radius=data.get("view_radius"),
        full_observation=data.get("full_observation", False),
        craft=craft,
        box=box,
    )


def load_config(path: str) -> EnvConfig:
    with open(path) as fh:
        return config_from_dict(yaml.safe_load(fh) or {})


def save_config(cfg: EnvConfig, path: str) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(cfg.to_dict(), fh, sort_keys=True)


def validate_params(cfg: EnvConfig) -> None:
    if cfg.domain not in ("craft", "box"):
        raise ValueError(f"unknown domain {cfg.domain!r}")
    if cfg.horizon < 1:
        raise ValueError("horizon must be positive")
    for r in cfg.craft.resource_ranges:
        if r not in RESOURCES:
            raise ValueError(f"unknown resource {r!r}")
    if len(cfg.craft.zone_weights) != 3:
        raise ValueError("zone_weights must cover 1..3 zones")
    assert all(w in WORKSHOPS for w in WORKSHOPS)
