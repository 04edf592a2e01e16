"""Abstract states over gridworlds and the goal specification language.

The craft abstraction summarizes a map as zones (maximal 4-connected regions
of empty cells), a boundary type per zone pair, per-zone resource counts,
per-zone workshop flags and the inventory.  Box-world is summarized as box
counts per (key color, lock color) pair plus loose-key and held-key flags.
Partial variants carry the same fields as observed lower bounds together with
enough structure (fragments, frontiers) for the hallucinator backends.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnknownSymbol
from .objects import (
    B_CONNECTED, B_NOT_ADJACENT, B_STONE, B_WATER, BOUNDARY_OF_OBSTACLE,
    BOX_COLORS, CELL_EMPTY, CELL_UNKNOWN, COUNT_CAP, CRAFT_OBJECTS, OBJECT_INDEX,
    OBSTACLE_CELLS, RESOURCE_CELLS, RESOURCES, WORKSHOP_CELLS, WORKSHOPS,
    cell_color, is_boxkey, is_lock, is_loose_key,
)
from .envs.boxworld import BoxWorld, list_boxes
from .envs.craft import CraftWorld, zone_partition
from .envs.observe import Observation

NEIGHBORS = ((-1, 0), (1, 0), (0, -1), (0, 1))


def pair_index(i: int, j: int, n: int) -> int:
    """Upper-triangle index of the unordered zone pair (i, j)."""
    if i == j:
        raise ValueError("diagonal pair")
    if i > j:
        i, j = j, i
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


@dataclass(frozen=True)
class CraftAbstract:
    n_zones: int
    agent_zone: int
    boundaries: tuple[int, ...]                 # upper-triangle boundary codes
    zone_resources: tuple[tuple[int, ...], ...]  # [zone][resource]
    zone_workshops: tuple[tuple[bool, ...], ...]
    inventory: tuple[int, ...]                   # [object], saturated at the cap

    def boundary(self, i: int, j: int) -> int:
        if i == j:
            return B_CONNECTED
        return self.boundaries[pair_index(i, j, self.n_zones)]

    def connected(self, i: int, j: int) -> bool:
        return self.boundary(i, j) == B_CONNECTED

    def inv(self, name: str) -> int:
        return self.inventory[OBJECT_INDEX[name]]

    def validate(self) -> None:
        assert 1 <= self.n_zones <= 3, self.n_zones
        assert 0 <= self.agent_zone < self.n_zones
        assert len(self.boundaries) == n_pairs(self.n_zones)
        assert all(0 <= b <= 3 for b in self.boundaries)
        assert len(self.zone_resources) == self.n_zones
        assert len(self.zone_workshops) == self.n_zones
        for row in self.zone_resources:
            assert len(row) == len(RESOURCES)
            assert all(0 <= v <= COUNT_CAP for v in row)
        assert len(self.inventory) == len(CRAFT_OBJECTS)
        assert all(0 <= v <= COUNT_CAP for v in self.inventory)


@dataclass(frozen=True)
class BoxAbstract:
    colors: tuple[int, ...]                  # global color ids, ascending
    boxes: tuple[tuple[int, ...], ...]       # [key_idx][lock_idx] counts
    loose: tuple[bool, ...]
    held: tuple[bool, ...]

    def color_idx(self, color: int) -> int:
        try:
            return self.colors.index(color)
        except ValueError:
            raise UnknownSymbol(f"color {BOX_COLORS[color]} outside universe")

    def validate(self) -> None:
        k = len(self.colors)
        assert tuple(sorted(self.colors)) == self.colors
        assert len(self.boxes) == k and all(len(row) == k for row in self.boxes)
        assert all(0 <= v <= COUNT_CAP for row in self.boxes for v in row)
        assert sum(self.loose) <= 1
        assert sum(self.held) <= 1

    def reindexed(self, colors: tuple[int, ...]) -> "BoxAbstract":
        """Re-express this state over a (super)set color universe."""
        where = {c: i for i, c in enumerate(colors)}
        k = len(colors)
        boxes = [[0] * k for _ in range(k)]
        loose = [False] * k
        held = [False] * k
        for a, ca in enumerate(self.colors):
            loose[where[ca]] = self.loose[a]
            held[where[ca]] = self.held[a]
            for b, cb in enumerate(self.colors):
                boxes[where[ca]][where[cb]] = self.boxes[a][b]
        return BoxAbstract(tuple(colors), tuple(tuple(r) for r in boxes),
                           tuple(loose), tuple(held))


def object_zone(grid: np.ndarray, labels: np.ndarray, r: int, c: int) -> int:
    """Zone owning an impassable object cell: first adjacent passable cell."""
    h, w = grid.shape
    for dr, dc in NEIGHBORS:
        nr, nc = r + dr, c + dc
        if 0 <= nr < h and 0 <= nc < w and labels[nr, nc] >= 0:
            return int(labels[nr, nc])
    return -1


def abstract_full(world) -> CraftAbstract | BoxAbstract:
    if isinstance(world, CraftWorld):
        return _abstract_craft(world)
    if isinstance(world, BoxWorld):
        return _abstract_box(world)
    raise TypeError(f"cannot abstract {type(world)!r}")


def _abstract_craft(world: CraftWorld) -> CraftAbstract:
    grid = world.grid
    labels = zone_partition(grid)
    nz = int(labels.max()) + 1
    h, w = grid.shape
    res = [[0] * len(RESOURCES) for _ in range(nz)]
    ws = [[False] * len(WORKSHOPS) for _ in range(nz)]
    btypes: dict[int, set[int]] = {}
    for r in range(h):
        for c in range(w):
            code = int(grid[r, c])
            if code == CELL_EMPTY:
                continue
            if code in OBSTACLE_CELLS:
                zones = set()
                for dr, dc in NEIGHBORS:
                    nr, nc = r + dr, c + dc
                    if 0 <= nr < h and 0 <= nc < w and labels[nr, nc] >= 0:
                        zones.add(int(labels[nr, nc]))
                zones = sorted(zones)
                for a in range(len(zones)):
                    for b in range(a + 1, len(zones)):
                        idx = pair_index(zones[a], zones[b], nz)
                        btypes.setdefault(idx, set()).add(BOUNDARY_OF_OBSTACLE[code])
            elif code in RESOURCE_CELLS:
                z = object_zone(grid, labels, r, c)
                if z >= 0:
                    res[z][RESOURCES.index(RESOURCE_CELLS[code])] += 1
            elif code in WORKSHOP_CELLS:
                z = object_zone(grid, labels, r, c)
                if z >= 0:
                    ws[z][WORKSHOPS.index(WORKSHOP_CELLS[code])] = True
    boundaries = []
    for idx in range(n_pairs(nz)):
        kinds = btypes.get(idx, set())
        if B_WATER in kinds:
            boundaries.append(B_WATER)   # water wins mixed boundaries
        elif B_STONE in kinds:
            boundaries.append(B_STONE)
        else:
            boundaries.append(B_NOT_ADJACENT)
    inventory = tuple(min(world.inventory.get(o, 0), COUNT_CAP) for o in CRAFT_OBJECTS)
    return CraftAbstract(
        n_zones=nz,
        agent_zone=int(labels[world.agent_pos]),
        boundaries=tuple(boundaries),
        zone_resources=tuple(tuple(min(v, COUNT_CAP) for v in row) for row in res),
        zone_workshops=tuple(tuple(row) for row in ws),
        inventory=inventory,
    )


def _abstract_box(world: BoxWorld) -> BoxAbstract:
    boxes = list_boxes(world.grid)
    colors = set()
    loose_color = None
    h, w = world.grid.shape
    for r in range(h):
        for c in range(w):
            code = int(world.grid[r, c])
            if is_loose_key(code):
                loose_color = cell_color(code)
                colors.add(loose_color)
            elif is_lock(code) or is_boxkey(code):
                colors.add(cell_color(code))
    if world.held_key is not None:
        colors.add(world.held_key)
    colors.add(world.goal_color)
    universe = tuple(sorted(colors))
    where = {c: i for i, c in enumerate(universe)}
    k = len(universe)
    counts = [[0] * k for _ in range(k)]
    for key_color, lock_color, _ in boxes:
        counts[where[key_color]][where[lock_color]] = min(
            counts[where[key_color]][where[lock_color]] + 1, COUNT_CAP)
    loose = [False] * k
    if loose_color is not None:
        loose[where[loose_color]] = True
    held = [False] * k
    if world.held_key is not None:
        held[where[world.held_key]] = True
    return BoxAbstract(universe, tuple(tuple(r) for r in counts),
                       tuple(loose), tuple(held))


# ---------------------------------------------------------------------------
# Partial abstraction from observations

class PartialCraftAbstract:
    """Observed fragments of the zone structure plus field lower bounds.

    A fragment is a connected component of *seen* empty cells; closed
    fragments coincide with true zones, open ones may still grow.  Built from
    either the current view or the first-seen (initial-map) view.
    """

    def __init__(self, obs: Observation, initial: bool = False):
        grid = obs.first_seen if initial else obs.known
        self.grid = grid
        self.seen = obs.seen
        self.size = grid.shape[0]
        self.inventory = tuple(min(obs.inventory.get(o, 0), COUNT_CAP)
                               for o in CRAFT_OBJECTS)
        self.has_unseen = not bool(obs.seen.all())
        h, w = grid.shape
        labels = np.full((h, w), -1, dtype=np.int32)
        nf = 0
        for r in range(h):
            for c in range(w):
                if labels[r, c] != -1 or not obs.seen[r, c] \
                        or int(grid[r, c]) != CELL_EMPTY:
                    continue
                stack = [(r, c)]
                labels[r, c] = nf
                while stack:
                    rr, cc = stack.pop()
                    for dr, dc in NEIGHBORS:
                        nr, nc = rr + dr, cc + dc
                        if 0 <= nr < h and 0 <= nc < w and labels[nr, nc] == -1 \
                                and obs.seen[nr, nc] and int(grid[nr, nc]) == CELL_EMPTY:
                            labels[nr, nc] = nf
                            stack.append((nr, nc))
                nf += 1
        self.labels = labels
        self.n_fragments = nf
        frontier = [False] * nf
        for r in range(h):
            for c in range(w):
                if labels[r, c] < 0:
                    continue
                for dr, dc in NEIGHBORS:
                    nr, nc = r + dr, c + dc
                    if 0 <= nr < h and 0 <= nc < w and not obs.seen[nr, nc]:
                        frontier[int(labels[r, c])] = True
        self.frontier = tuple(frontier)
        self.closed = tuple(not f for f in frontier)

        res = [[0] * len(RESOURCES) for _ in range(nf)]
        ws = [[False] * len(WORKSHOPS) for _ in range(nf)]
        btypes: dict[int, set[int]] = {}
        for r in range(h):
            for c in range(w):
                if not obs.seen[r, c]:
                    continue
                code = int(grid[r, c])
                if code == CELL_EMPTY or code == CELL_UNKNOWN:
                    continue
                if code in OBSTACLE_CELLS:
                    frags = set()
                    for dr, dc in NEIGHBORS:
                        nr, nc = r + dr, c + dc
                        if 0 <= nr < h and 0 <= nc < w and labels[nr, nc] >= 0:
                            frags.add(int(labels[nr, nc]))
                    frags = sorted(frags)
                    for a in range(len(frags)):
                        for b in range(a + 1, len(frags)):
                            idx = pair_index(frags[a], frags[b], nf)
                            btypes.setdefault(idx, set()).add(
                                BOUNDARY_OF_OBSTACLE[code])
                elif code in RESOURCE_CELLS:
                    f = object_zone(grid, labels, r, c)
                    if f >= 0:
                        res[f][RESOURCES.index(RESOURCE_CELLS[code])] += 1
                elif code in WORKSHOP_CELLS:
                    f = object_zone(grid, labels, r, c)
                    if f >= 0:
                        ws[f][WORKSHOPS.index(WORKSHOP_CELLS[code])] = True
        self.res_lb = tuple(tuple(min(v, COUNT_CAP) for v in row) for row in res)
        self.ws_seen = tuple(tuple(row) for row in ws)
        observed_boundary = []
        for idx in range(n_pairs(nf)):
            kinds = btypes.get(idx, set())
            if B_WATER in kinds:
                observed_boundary.append(B_WATER)
            elif B_STONE in kinds:
                observed_boundary.append(B_STONE)
            else:
                observed_boundary.append(-1)
        self.boundary_seen = tuple(observed_boundary)
        anchor = obs.start_pos if initial else obs.agent_pos
        self.agent_fragment = int(labels[anchor]) if labels[anchor] >= 0 else 0

    def summary_key(self) -> tuple:
        """Canonical hashable summary used for posterior matching."""
        return (
            self.n_fragments, self.agent_fragment, self.closed,
            self.res_lb, self.ws_seen, self.boundary_seen,
        )

    def known_fields_match(self, full: CraftAbstract, frag_to_zone: dict[int, int]) -> bool:
        """Soundness check: known fields agree with the true abstraction."""
        for f in range(self.n_fragments):
            z = frag_to_zone[f]
            for ridx in range(len(RESOURCES)):
                lb = self.res_lb[f][ridx]
                truth = full.zone_resources[z][ridx]
                if self.closed[f]:
                    if lb != truth:
                        return False
                elif lb > truth:
                    return False
            for widx in range(len(WORKSHOPS)):
                if self.ws_seen[f][widx] and not full.zone_workshops[z][widx]:
                    return False
                if self.closed[f] and self.ws_seen[f][widx] != full.zone_workshops[z][widx]:
                    return False
        return True


class PartialBoxAbstract:
    """Observed box-world summary: box multiset lower bound plus key state."""

    def __init__(self, obs: Observation, initial: bool = False):
        grid = obs.first_seen if initial else obs.known
        self.grid = grid
        self.seen = obs.seen
        self.size = grid.shape[0]
        self.has_unseen = not bool(obs.seen.all())
        self.held = obs.held_key
        self.obtained = obs.obtained
        h, w = grid.shape
        counts: dict[tuple[int, int], int] = {}
        loose_color = None
        for r in range(h):
            for c in range(w - 1):
                if obs.seen[r, c] and obs.seen[r, c + 1] \
                        and is_boxkey(int(grid[r, c])) and is_lock(int(grid[r, c + 1])):
                    pair = (cell_color(int(grid[r, c])), cell_color(int(grid[r, c + 1])))
                    counts[pair] = counts.get(pair, 0) + 1
        for r in range(h):
            for c in range(w):
                if obs.seen[r, c] and is_loose_key(int(grid[r, c])):
                    loose_color = cell_color(int(grid[r, c]))
        self.box_lb = counts
        self.loose_seen = loose_color

    def summary_key(self) -> tuple:
        return (
            tuple(sorted(self.box_lb.items())), self.loose_seen,
            self.held, not self.has_unseen,
        )


def abstract_observed(obs: Observation, initial: bool = False):
    if obs.domain == "craft":
        return PartialCraftAbstract(obs, initial=initial)
    if obs.domain == "box":
        return PartialBoxAbstract(obs, initial=initial)
    raise ValueError(f"unknown domain {obs.domain!r}")


# ---------------------------------------------------------------------------
# Goal specifications

@dataclass(frozen=True)
class GoalSpec:
    domain: str
    atoms: tuple[tuple[str, int], ...]   # craft: (object, min count); box: (color, 1)

    def __str__(self) -> str:
        if self.domain == "craft":
            return " & ".join(f"inv({o}) >= {n}" for o, n in self.atoms)
        return " & ".join(f"key({c})" for c, _ in self.atoms)


def parse_goal(text: str, domain: str | None = None) -> GoalSpec:
    atoms = []
    inferred = domain
    for part in text.split("&"):
        part = part.strip()
        if part.startswith("inv("):
            name, _, rest = part[4:].partition(")")
            name = name.strip()
            if name not in CRAFT_OBJECTS:
                raise UnknownSymbol(f"unknown object {name!r}")
            rest = rest.strip()
            if not rest.startswith(">="):
                raise ValueError(f"craft atom needs '>= n': {part!r}")
            atoms.append((name, int(rest[2:].strip())))
            inferred = inferred or "craft"
        elif part.startswith("key("):
            name = part[4:].partition(")")[0].strip()
            if name not in BOX_COLORS:
                raise UnknownSymbol(f"unknown color {name!r}")
            atoms.append((name, 1))
            inferred = inferred or "box"
        else:
            raise ValueError(f"cannot parse goal atom {part!r}")
    return GoalSpec(domain=inferred or "craft", atoms=tuple(atoms))


def eval_goal(goal: GoalSpec, state) -> bool:
    if goal.domain == "craft":
        if not isinstance(state, CraftAbstract):
            raise UnknownSymbol("craft goal on non-craft state")
        return all(state.inventory[OBJECT_INDEX[o]] >= n for o, n in goal.atoms)
    if not isinstance(state, BoxAbstract):
        raise UnknownSymbol("box goal on non-box state")
    for color_name, _ in goal.atoms:
        color = BOX_COLORS.index(color_name)
        if color not in state.colors or not state.held[state.colors.index(color)]:
            return False
    return True


def goal_satisfied(world, goal: GoalSpec) -> bool:
    """Concrete goal check; box-world latches colors ever obtained."""
    if isinstance(world, CraftWorld):
        return all(world.inventory.get(o, 0) >= n for o, n in goal.atoms)
    if isinstance(world, BoxWorld):
        for color_name, _ in goal.atoms:
            color = BOX_COLORS.index(color_name)
            if color not in world.obtained and world.held_key != color:
                return False
        return True
    raise TypeError(f"cannot evaluate goal on {type(world)!r}")
