"""Box-world: keys, locks and boxes on a 12x12 grid.

A box is a horizontal [key][lock] cell pair; the lock sits immediately right
of its key.  Walking onto a lock while holding the matching color opens the
box atomically: the lock and key cells clear and the boxed key replaces the
held one.  Walking onto a loose key swaps it into the hand.  Colors the agent
has held are latched in ``obtained`` for goal checking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EpisodeOver, GenerationRetryExhausted
from ..objects import (
    ACTION_DELTAS, A_DOWN, BOX_COLORS, CELL_EMPTY,
    boxkey_cell, cell_color, is_boxkey, is_lock, is_loose_key, lock_cell, loose_cell,
)
from .config import BoxGenParams, EnvConfig
from .observe import Observation, blank_observation, refresh_known, reveal_window


@dataclass
class BoxWorld:
    grid: np.ndarray
    agent_pos: tuple[int, int]
    held_key: int | None
    obtained: frozenset
    goal_color: int
    t: int = 0
    facing: int = A_DOWN
    start_pos: tuple[int, int] = (0, 0)
    goal_length: int = 1
    distractors: int = 0

    def copy(self) -> "BoxWorld":
        return BoxWorld(
            grid=self.grid.copy(), agent_pos=self.agent_pos, held_key=self.held_key,
            obtained=self.obtained, goal_color=self.goal_color, t=self.t,
            facing=self.facing, start_pos=self.start_pos,
            goal_length=self.goal_length, distractors=self.distractors,
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape


def box_passable(code: int, held_key: int | None) -> bool:
    if code == CELL_EMPTY or is_loose_key(code):
        return True
    if is_lock(code):
        return held_key is not None and cell_color(code) == held_key
    return False


def list_boxes(grid: np.ndarray) -> list[tuple[int, int, tuple[int, int]]]:
    """(key_color, lock_color, key_cell) for every [key][lock] pair."""
    out = []
    h, w = grid.shape
    for r in range(h):
        for c in range(w - 1):
            if is_boxkey(int(grid[r, c])) and is_lock(int(grid[r, c + 1])):
                out.append((cell_color(int(grid[r, c])),
                            cell_color(int(grid[r, c + 1])), (r, c)))
    return out


def check_box_world(world: BoxWorld) -> str | None:
    grid = world.grid
    h, w = grid.shape
    loose = [(r, c) for r in range(h) for c in range(w) if is_loose_key(int(grid[r, c]))]
    if len(loose) > 1:
        return f"{len(loose)} loose keys on the map"
    if not box_passable(int(grid[world.agent_pos]), world.held_key) \
            and int(grid[world.agent_pos]) != CELL_EMPTY:
        return "agent stuck on a blocked cell"
    # every lock must pair with the key cell on its left
    for r in range(h):
        for c in range(w):
            if is_lock(int(grid[r, c])):
                if c == 0 or not is_boxkey(int(grid[r, c - 1])):
                    return f"orphan lock at {(r, c)}"
            if is_boxkey(int(grid[r, c])):
                if c + 1 >= w or not is_lock(int(grid[r, c + 1])):
                    return f"orphan boxed key at {(r, c)}"
    return None


# ---------------------------------------------------------------------------
# Generation

def _scripted_solvable(world: BoxWorld, config: EnvConfig) -> bool:
    """Can a greedy key-chase finish within the horizon?  Used for validation."""
    sim = BoxSim(world.copy(), config)
    target_chain = [world.goal_color]
    # reconstruct the chain by walking lock colors backwards from the goal key
    boxes = list_boxes(world.grid)
    by_key = {k: l for k, l, _ in boxes}
    color = world.goal_color
    guard = 0
    while color in by_key and guard < 20:
        color = by_key[color]
        target_chain.append(color)
        guard += 1
    target_chain.reverse()  # loose key color first
    for color in target_chain:
        if not _walk_to_color(sim, color):
            return False
        if sim.world.t >= config.horizon:
            return False
    return goal_reached_box(sim.world)


def _walk_to_color(sim: "BoxSim", color: int) -> bool:
    """BFS the true grid to acquire ``color`` (loose key or openable lock)."""
    world = sim.world
    h, w = world.shape
    targets = set()
    for r in range(h):
        for c in range(w):
            code = int(world.grid[r, c])
            if is_loose_key(code) and cell_color(code) == color:
                targets.add((r, c))
            if is_lock(code) and world.held_key is not None \
                    and cell_color(code) == world.held_key \
                    and c >= 1 and is_boxkey(int(world.grid[r, c - 1])) \
                    and cell_color(int(world.grid[r, c - 1])) == color:
                targets.add((r, c))
    if not targets:
        return False
    prev = {world.agent_pos: None}
    queue = [world.agent_pos]
    goal = None
    while queue:
        cur = queue.pop(0)
        if cur in targets:
            goal = cur
            break
        for a, (dr, dc) in ACTION_DELTAS.items():
            nxt = (cur[0] + dr, cur[1] + dc)
            if not (0 <= nxt[0] < h and 0 <= nxt[1] < w) or nxt in prev:
                continue
            code = int(world.grid[nxt])
            # loose keys and matching locks are passable but have side effects,
            # so the path may only cross them when they are the target
            if nxt in targets or code == CELL_EMPTY:
                prev[nxt] = (cur, a)
                queue.append(nxt)
    if goal is None:
        return False
    actions = []
    node = goal
    while prev[node] is not None:
        node, act = prev[node]
        actions.append(act)
    for act in reversed(actions):
        if sim.world.t >= sim.config.horizon:
            return False
        sim.step(act)
    return sim.world.held_key == color


def generate_box_map(config: EnvConfig, seed: int) -> BoxWorld:
    params = config.box
    rng = np.random.default_rng(seed)
    for _ in range(params.max_retries):
        world = _try_box_map(params, rng)
        if world is not None and check_box_world(world) is None \
                and _scripted_solvable(world, config):
            return world
    raise GenerationRetryExhausted(
        f"no valid box map in {params.max_retries} attempts (seed {seed})")


def _try_box_map(params: BoxGenParams, rng: np.random.Generator) -> BoxWorld | None:
    size = params.size
    goal_length = int(rng.choice(params.goal_lengths))
    distractors = int(rng.choice(params.distractor_counts))
    n_colors = goal_length + 1 + distractors
    if n_colors > len(BOX_COLORS):
        return None
    colors = list(rng.permutation(len(BOX_COLORS))[:n_colors])
    chain = colors[: goal_length + 1]          # chain[0] loose, chain[-1] goal
    junk = colors[goal_length + 1:]

    grid = np.zeros((size, size), dtype=np.uint8)
    taken: set[tuple[int, int]] = set()

    def place_pair(key_color: int, lock_color: int) -> bool:
        for _ in range(60):
            r = int(rng.integers(size))
            c = int(rng.integers(size - 1))
            cells = {(r, c), (r, c + 1)}
            # keep one empty cell of padding so locks stay reachable
            halo = {(r + dr, c + dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1, 2)}
            if halo & taken:
                continue
            grid[r, c] = boxkey_cell(key_color)
            grid[r, c + 1] = lock_cell(lock_color)
            taken.update(cells)
            return True
        return False

    def place_single() -> tuple[int, int] | None:
        for _ in range(60):
            r = int(rng.integers(size))
            c = int(rng.integers(size))
            halo = {(r + dr, c + dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1)}
            if halo & taken:
                continue
            taken.add((r, c))
            return (r, c)
        return None

    # chain boxes: box i holds key chain[i+1] behind lock chain[i]
    for i in range(goal_length):
        if not place_pair(chain[i + 1], chain[i]):
            return None
    for i, junk_color in enumerate(junk):
        lock_color = chain[int(rng.integers(len(chain) - 1))]
        if not place_pair(junk_color, lock_color):
            return None
    loose_at = place_single()
    if loose_at is None:
        return None
    grid[loose_at] = loose_cell(chain[0])
    agent_at = place_single()
    if agent_at is None:
        return None
    return BoxWorld(grid=grid, agent_pos=agent_at, held_key=None,
                    obtained=frozenset(), goal_color=chain[-1],
                    start_pos=agent_at, goal_length=goal_length,
                    distractors=distractors)


# ---------------------------------------------------------------------------
# Step semantics

def goal_reached_box(world: BoxWorld) -> bool:
    return world.goal_color in world.obtained or world.held_key == world.goal_color


def reset_box(world: BoxWorld, config: EnvConfig) -> Observation:
    obs = blank_observation("box", world.shape)
    obs.agent_pos = world.agent_pos
    obs.start_pos = world.agent_pos
    obs.held_key = world.held_key
    obs.obtained = world.obtained
    reveal_window(obs, world.grid, world.agent_pos, config.radius)
    return obs


def step_box(world: BoxWorld, obs: Observation, action: int, config: EnvConfig) -> Observation:
    if world.t >= config.horizon:
        raise EpisodeOver(f"t={world.t} >= horizon {config.horizon}")
    if action not in ACTION_DELTAS:
        raise ValueError(f"invalid box action {action}")
    h, w = world.shape
    world.facing = action
    dr, dc = ACTION_DELTAS[action]
    nr, nc = world.agent_pos[0] + dr, world.agent_pos[1] + dc
    if 0 <= nr < h and 0 <= nc < w:
        code = int(world.grid[nr, nc])
        if is_loose_key(code):
            world.held_key = cell_color(code)
            world.obtained = world.obtained | {world.held_key}
            world.grid[nr, nc] = CELL_EMPTY
            world.agent_pos = (nr, nc)
        elif is_lock(code) and world.held_key == cell_color(code):
            # atomic open: lock and key cells clear, boxed key swaps into hand
            key_cell = (nr, nc - 1)
            world.held_key = cell_color(int(world.grid[key_cell]))
            world.obtained = world.obtained | {world.held_key}
            world.grid[nr, nc] = CELL_EMPTY
            world.grid[key_cell] = CELL_EMPTY
            world.agent_pos = (nr, nc)
        elif code == CELL_EMPTY:
            world.agent_pos = (nr, nc)
    world.t += 1
    obs.agent_pos = world.agent_pos
    obs.t = world.t
    obs.held_key = world.held_key
    obs.obtained = world.obtained
    refresh_known(obs, world.grid)
    reveal_window(obs, world.grid, world.agent_pos, config.radius)
    return obs


class BoxSim:
    def __init__(self, world: BoxWorld, config: EnvConfig):
        self.world = world
        self.config = config
        self.obs = reset_box(world, config)

    def step(self, action: int) -> Observation:
        return step_box(self.world, self.obs, action, self.config)

    @property
    def t(self) -> int:
        return self.world.t

    def done(self) -> bool:
        return self.world.t >= self.config.horizon

    def copy(self) -> "BoxSim":
        dup = BoxSim.__new__(BoxSim)
        dup.world = self.world.copy()
        dup.config = self.config
        dup.obs = self.obs.copy()
        return dup
