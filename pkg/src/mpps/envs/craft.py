"""The 2D craft gridworld: deterministic simulator and procedural generator.

Maps are squares whose passable area is split into 1-3 zones by straight
separating lines of water or stone.  Cells may hold a resource, a workshop or
an obstacle; the agent picks resources, crafts at workshops and clears
obstacle cells with tools via the "use" action.  Movement into a blocked cell
is a position no-op but still turns the agent, which is what "use" targeting
is based on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EpisodeOver, GenerationRetryExhausted
from ..objects import (
    ACTION_DELTAS, A_DOWN, A_USE, CELL_EMPTY, CELL_OF_RESOURCE, CELL_OF_WORKSHOP,
    CELL_UNKNOWN, CELL_WATER, CELL_STONE, COUNT_CAP, CRAFT_OBJECTS, OBSTACLE_CELLS,
    RESOURCE_CELLS, RESOURCES, TOOL_CLEARS, WORKSHOP_CELLS, WORKSHOPS,
)
from .config import CraftGenParams, EnvConfig
from .observe import Observation, blank_observation, refresh_known, reveal_window


@dataclass
class CraftWorld:
    grid: np.ndarray                 # uint8 HxW
    agent_pos: tuple[int, int]
    inventory: dict[str, int]
    t: int = 0
    facing: int = A_DOWN             # last attempted move direction
    start_pos: tuple[int, int] = (0, 0)

    def copy(self) -> "CraftWorld":
        return CraftWorld(
            grid=self.grid.copy(),
            agent_pos=self.agent_pos,
            inventory=dict(self.inventory),
            t=self.t,
            facing=self.facing,
            start_pos=self.start_pos,
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape


def empty_inventory() -> dict[str, int]:
    return {name: 0 for name in CRAFT_OBJECTS}


def passable(code: int) -> bool:
    return code == CELL_EMPTY


# ---------------------------------------------------------------------------
# Structure family (the enumerable part of the map distribution)

@dataclass(frozen=True)
class CraftStructure:
    """Obstacle skeleton of a craft map: 0-2 parallel separating lines."""

    size: int
    orient: str | None                         # None (one zone), "v" or "h"
    lines: tuple[tuple[int, str], ...]         # (index, "water" | "stone")

    @property
    def n_zones(self) -> int:
        return len(self.lines) + 1

    def obstacle_grid(self) -> np.ndarray:
        grid = np.zeros((self.size, self.size), dtype=np.uint8)
        for pos, kind in self.lines:
            code = CELL_WATER if kind == "water" else CELL_STONE
            if self.orient == "v":
                grid[:, pos] = code
            else:
                grid[pos, :] = code
        return grid


def enumerate_structures(params: CraftGenParams) -> list[list[CraftStructure]]:
    """All structures, bucketed by zone count (index 0 -> 1 zone)."""
    buckets: list[list[CraftStructure]] = [[], [], []]
    buckets[0].append(CraftStructure(params.size, None, ()))
    for orient in ("v", "h"):
        for pos in params.line_positions:
            for kind in params.boundary_types:
                buckets[1].append(CraftStructure(params.size, orient, ((pos, kind),)))
        for i, p1 in enumerate(params.line_positions):
            for p2 in params.line_positions[i + 1:]:
                if p2 - p1 < 2:
                    continue
                for k1 in params.boundary_types:
                    for k2 in params.boundary_types:
                        buckets[2].append(
                            CraftStructure(params.size, orient, ((p1, k1), (p2, k2)))
                        )
    return buckets


def sample_structure(params: CraftGenParams, rng: np.random.Generator) -> CraftStructure:
    buckets = enumerate_structures(params)
    weights = np.asarray(params.zone_weights, dtype=float)
    weights = weights / weights.sum()
    nz = int(rng.choice(3, p=weights))
    options = buckets[nz]
    return options[int(rng.integers(len(options)))]


# ---------------------------------------------------------------------------
# Content placement

def zone_partition(grid: np.ndarray) -> np.ndarray:
    """Label passable cells with zone ids (row-major flood fill, -1 elsewhere)."""
    h, w = grid.shape
    labels = np.full((h, w), -1, dtype=np.int32)
    next_label = 0
    for r in range(h):
        for c in range(w):
            if labels[r, c] != -1 or not passable(int(grid[r, c])):
                continue
            stack = [(r, c)]
            labels[r, c] = next_label
            while stack:
                rr, cc = stack.pop()
                for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                    nr, nc = rr + dr, cc + dc
                    if 0 <= nr < h and 0 <= nc < w and labels[nr, nc] == -1 \
                            and passable(int(grid[nr, nc])):
                        labels[nr, nc] = next_label
                        stack.append((nr, nc))
            next_label += 1
    return labels


def _place_contents(structure: CraftStructure, params: CraftGenParams,
                    rng: np.random.Generator) -> CraftWorld | None:
    grid = structure.obstacle_grid()
    labels = zone_partition(grid)
    n_zones = labels.max() + 1
    if n_zones != structure.n_zones:
        return None

    zone_cells = [
        [tuple(map(int, rc)) for rc in np.argwhere(labels == z)]
        for z in range(n_zones)
    ]

    def draw_cell(zone: int, used: set) -> tuple[int, int] | None:
        free = [c for c in zone_cells[zone] if c not in used]
        if not free:
            return None
        if params.placement == "first-free":
            return free[0]
        return free[int(rng.integers(len(free)))]

    used: set[tuple[int, int]] = set()
    for z in range(n_zones):
        for res in RESOURCES:
            lo, hi = params.resource_ranges.get(res, (0, 0))
            count = int(rng.integers(lo, hi + 1))
            count = min(count, COUNT_CAP)
            for _ in range(count):
                cell = draw_cell(z, used)
                if cell is None:
                    return None
                grid[cell] = CELL_OF_RESOURCE[res]
                used.add(cell)
    for ws in WORKSHOPS:
        if rng.random() < params.workshop_prob:
            z = int(rng.integers(n_zones))
            cell = draw_cell(z, used)
            if cell is None:
                return None
            grid[cell] = CELL_OF_WORKSHOP[ws]
            used.add(cell)

    # agent on a remaining empty cell
    if params.fixed_agent is not None:
        agent = tuple(params.fixed_agent)
        if agent in used or not passable(int(grid[agent])):
            return None
    else:
        free = [c for z in range(n_zones) for c in zone_cells[z] if c not in used]
        if not free:
            return None
        agent = free[int(rng.integers(len(free)))]

    world = CraftWorld(grid=grid, agent_pos=agent, inventory=empty_inventory(),
                       start_pos=agent)
    if check_craft_world(world, for_generation=True) is not None:
        return None
    return world


def check_craft_world(world: CraftWorld, for_generation: bool = False) -> str | None:
    """Return a violation description, or None if the world is well formed.

    ``for_generation`` adds the constraints fresh maps must satisfy (zone-level
    count caps, unambiguous object ownership, at least one trivially solvable
    task); mid-episode worlds are only held to the basic invariants.
    """
    grid = world.grid
    h, w = grid.shape
    if h != w:
        return "grid not square"
    if not passable(int(grid[world.agent_pos])):
        return "agent on a blocked cell"
    if any(v < 0 for v in world.inventory.values()):
        return "negative inventory"
    labels = zone_partition(grid)
    n_zones = labels.max() + 1
    if n_zones < 1 or n_zones > 3:
        return f"{n_zones} zones outside 1..3"
    if not for_generation:
        return None
    # object cells must border exactly one zone so counts are unambiguous
    per_zone = np.zeros((n_zones, len(RESOURCES)), dtype=int)
    agent_zone = labels[world.agent_pos]
    agent_zone_resources = 0
    for r in range(h):
        for c in range(w):
            code = int(grid[r, c])
            if code == CELL_EMPTY or code in OBSTACLE_CELLS:
                continue
            zones = set()
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                nr, nc = r + dr, c + dc
                if 0 <= nr < h and 0 <= nc < w and labels[nr, nc] >= 0:
                    zones.add(int(labels[nr, nc]))
            if len(zones) != 1:
                return f"object at {(r, c)} borders {len(zones)} zones"
            if code in RESOURCE_CELLS:
                z = zones.pop()
                per_zone[z, RESOURCES.index(RESOURCE_CELLS[code])] += 1
                if z == agent_zone:
                    agent_zone_resources += 1
    if (per_zone > COUNT_CAP).any():
        return "per-zone resource count above cap"
    if agent_zone_resources == 0:
        return "agent zone holds no resource"
    return None


def generate_craft_map(config: EnvConfig, seed: int) -> CraftWorld:
    """Sample a well-formed craft map; raises after bounded retries."""
    params = config.craft
    rng = np.random.default_rng(seed)
    for _ in range(params.max_retries):
        structure = sample_structure(params, rng)
        world = _place_contents(structure, params, rng)
        if world is not None:
            return world
    raise GenerationRetryExhausted(
        f"no valid craft map in {params.max_retries} attempts (seed {seed})")


# ---------------------------------------------------------------------------
# Step semantics

def reset_craft(world: CraftWorld, config: EnvConfig) -> Observation:
    obs = blank_observation("craft", world.shape)
    obs.agent_pos = world.agent_pos
    obs.start_pos = world.agent_pos
    obs.inventory = dict(world.inventory)
    reveal_window(obs, world.grid, world.agent_pos, config.radius)
    return obs


def _use_effect(world: CraftWorld, cell: tuple[int, int], recipes) -> bool:
    """Apply the use action against one cell; True if anything happened."""
    code = int(world.grid[cell])
    inv = world.inventory
    if code in RESOURCE_CELLS:
        inv[RESOURCE_CELLS[code]] += 1
        world.grid[cell] = CELL_EMPTY
        return True
    if code in WORKSHOP_CELLS:
        made = recipes.craft_depletion(WORKSHOP_CELLS[code], inv)
        return sum(made.values()) > 0
    if code in OBSTACLE_CELLS:
        for tool, clears in TOOL_CLEARS.items():
            if clears == code and inv.get(tool, 0) >= 1:
                inv[tool] -= 1
                world.grid[cell] = CELL_EMPTY
                return True
    return False


def _use_eligible(world: CraftWorld, cell: tuple[int, int], recipes) -> bool:
    code = int(world.grid[cell])
    inv = world.inventory
    if code in RESOURCE_CELLS:
        return True
    if code in WORKSHOP_CELLS:
        return recipes.any_craftable(WORKSHOP_CELLS[code], inv)
    if code in OBSTACLE_CELLS:
        return any(clears == code and inv.get(tool, 0) >= 1
                   for tool, clears in TOOL_CLEARS.items())
    return False


def step_craft(world: CraftWorld, obs: Observation, action: int,
               config: EnvConfig, recipes) -> Observation:
    """Advance one step in place; returns the updated observation."""
    if world.t >= config.horizon:
        raise EpisodeOver(f"t={world.t} >= horizon {config.horizon}")
    h, w = world.shape
    if action in ACTION_DELTAS:
        world.facing = action
        dr, dc = ACTION_DELTAS[action]
        nr, nc = world.agent_pos[0] + dr, world.agent_pos[1] + dc
        if 0 <= nr < h and 0 <= nc < w and passable(int(world.grid[nr, nc])):
            world.agent_pos = (nr, nc)
    elif action == A_USE:
        r, c = world.agent_pos
        dr, dc = ACTION_DELTAS[world.facing]
        candidates = []
        faced = (r + dr, c + dc)
        if 0 <= faced[0] < h and 0 <= faced[1] < w:
            candidates.append(faced)
        for adj in ((r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c)):
            if adj != faced and 0 <= adj[0] < h and 0 <= adj[1] < w:
                candidates.append(adj)
        for cell in candidates:
            if _use_eligible(world, cell, recipes):
                _use_effect(world, cell, recipes)
                break
    else:
        raise ValueError(f"invalid craft action {action}")
    world.t += 1
    obs.agent_pos = world.agent_pos
    obs.t = world.t
    obs.inventory = dict(world.inventory)
    refresh_known(obs, world.grid)
    reveal_window(obs, world.grid, world.agent_pos, config.radius)
    return obs


class CraftSim:
    """Stateful wrapper pairing a world with its observation stream."""

    def __init__(self, world: CraftWorld, config: EnvConfig, recipes):
        self.world = world
        self.config = config
        self.recipes = recipes
        self.obs = reset_craft(world, config)

    def step(self, action: int) -> Observation:
        return step_craft(self.world, self.obs, action, self.config, self.recipes)

    @property
    def t(self) -> int:
        return self.world.t

    def done(self) -> bool:
        return self.world.t >= self.config.horizon

    def copy(self) -> "CraftSim":
        dup = CraftSim.__new__(CraftSim)
        dup.world = self.world.copy()
        dup.config = self.config
        dup.recipes = self.recipes
        dup.obs = self.obs.copy()
        return dup
