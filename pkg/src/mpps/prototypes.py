"""Component library: declarative transition relations and their transformers.

Each prototype is usable three ways: ``check_transition`` decides whether an
abstract state pair satisfies the component's relation (returning the witness
assignment), ``successors`` enumerates every admissible post-state, and
``monitor`` builds the termination predicate the executor evaluates against
observations.  The checker and the transformer are kept in exact agreement;
property tests enforce it.

Relations are defined over the capped count domain (counts saturate at
COUNT_CAP); transitions that would leave the domain are simply inapplicable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from importlib import resources as importlib_resources

import numpy as np
import yaml

from .abstraction import (
    BoxAbstract, CraftAbstract, abstract_full, n_pairs, pair_index,
)
from .errors import DomainMismatch
from .objects import (
    B_CONNECTED, B_STONE, B_WATER, BOX_COLORS, CELL_EMPTY, COUNT_CAP,
    CRAFT_OBJECTS, OBJECT_INDEX, OBSTACLE_CELLS, RESOURCES, TOOLS, WORKSHOPS,
)

TOOL_BOUNDARY = {"bridge": B_WATER, "axe": B_STONE}


# ---------------------------------------------------------------------------
# Recipe table

class RecipeTable:
    """Workshop -> ordered {artifact: ingredients}; listing order is priority."""

    def __init__(self, workshops: dict[str, dict[str, dict[str, int]]],
                 tasks: list[str] | None = None):
        self.by_workshop = {
            w: {art: dict(ing) for art, ing in arts.items()}
            for w, arts in workshops.items()
        }
        self.tasks = list(tasks or [])
        self._workshop_of: dict[str, str] = {}
        for w, arts in self.by_workshop.items():
            for art in arts:
                if art in self._workshop_of:
                    raise ValueError(f"artifact {art} listed under two workshops")
                self._workshop_of[art] = w
        self.validate()

    @classmethod
    def load(cls, path: str | None = None) -> "RecipeTable":
        if path is None:
            text = importlib_resources.files("mpps.data").joinpath(
                "recipes.yaml").read_text()
        else:
            with open(path) as fh:
                text = fh.read()
        data = yaml.safe_load(text)
        return cls(data["workshops"], data.get("tasks"))

    def artifacts(self, workshop: str) -> tuple[str, ...]:
        return tuple(self.by_workshop.get(workshop, {}))

    def ingredients(self, artifact: str) -> dict[str, int]:
        return self.by_workshop[self._workshop_of[artifact]][artifact]

    def workshop_of(self, artifact: str) -> str:
        return self._workshop_of[artifact]

    def any_craftable(self, workshop: str, inv: dict[str, int]) -> bool:
        return any(
            all(inv.get(q, 0) >= k for q, k in ing.items())
            for ing in self.by_workshop.get(workshop, {}).values()
        )

    def craft_depletion(self, workshop: str, inv: dict[str, int]) -> dict[str, int]:
        """Craft by priority until nothing is makeable; mutates ``inv``."""
        made: dict[str, int] = {}
        while True:
            for art, ing in self.by_workshop.get(workshop, {}).items():
                if all(inv.get(q, 0) >= k for q, k in ing.items()):
                    for q, k in ing.items():
                        inv[q] -= k
                    inv[art] = inv.get(art, 0) + 1
                    made[art] = made.get(art, 0) + 1
                    break
            else:
                return made

    def validate(self) -> None:
        # ingredient references resolve and the recipe graph is acyclic
        names = set(self._workshop_of)
        for art, w in self._workshop_of.items():
            for q in self.by_workshop[w][art]:
                if q not in RESOURCES and q not in names:
                    raise ValueError(f"recipe {art} uses unknown {q}")
        seen: set[str] = set()

        def craftable(art: str, stack: tuple[str, ...] = ()) -> bool:
            if art in stack:
                raise ValueError(f"recipe cycle through {art}")
            if art in seen:
                return True
            for q in self.ingredients(art):
                if q not in RESOURCES and not craftable(q, stack + (art,)):
                    return False
            seen.add(art)
            return True

        for art in self._workshop_of:
            if not craftable(art):
                raise ValueError(f"artifact {art} not craftable from resources")


_DEFAULT_TABLE: RecipeTable | None = None


def default_recipes() -> RecipeTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = RecipeTable.load()
    return _DEFAULT_TABLE


# ---------------------------------------------------------------------------
# Prototype roster

@dataclass(frozen=True)
class Prototype:
    pid: str        # "get-wood", "use-axe", "use-factory", "get-red", ...
    kind: str       # "get" | "tool" | "workshop" | "box-get"
    target: str     # resource / tool / workshop / color name

    def __str__(self) -> str:
        return self.pid


def craft_roster(recipes: RecipeTable | None = None) -> tuple[Prototype, ...]:
    protos = []
    for r in RESOURCES:
        protos.append(Prototype(f"get-{r}", "get", r))
    for t in TOOLS:
        protos.append(Prototype(f"use-{t}", "tool", t))
    for w in WORKSHOPS:
        protos.append(Prototype(f"use-{w}", "workshop", w))
    return tuple(protos)


def box_roster(colors: tuple[int, ...]) -> tuple[Prototype, ...]:
    return tuple(
        Prototype(f"get-{BOX_COLORS[c]}", "box-get", BOX_COLORS[c])
        for c in sorted(colors)
    )


@dataclass(frozen=True)
class TransitionCheck:
    pid: str
    witness: tuple[tuple[str, object], ...]

    def get(self, key: str):
        return dict(self.witness)[key]


# ---------------------------------------------------------------------------
# Relation checker

def _craft_states(s_minus, s_plus):
    if not isinstance(s_minus, CraftAbstract) or not isinstance(s_plus, CraftAbstract):
        raise DomainMismatch("craft prototype on non-craft states")
    if s_minus.n_zones != s_plus.n_zones:
        return None
    return s_minus, s_plus


def check_transition(proto: Prototype, s_minus, s_plus,
                     recipes: RecipeTable | None = None) -> TransitionCheck | None:
    """Witness iff (s-, s+) satisfies the prototype relation, else None."""
    recipes = recipes or default_recipes()
    if proto.kind == "box-get":
        return _check_box_get(proto, s_minus, s_plus)
    if _craft_states(s_minus, s_plus) is None:
        return None
    if proto.kind == "get":
        return _check_get(proto, s_minus, s_plus)
    if proto.kind == "workshop":
        return _check_workshop(proto, s_minus, s_plus, recipes)
    if proto.kind == "tool":
        return _check_tool(proto, s_minus, s_plus)
    raise ValueError(f"unknown prototype kind {proto.kind}")


def _check_get(proto, sm: CraftAbstract, sp: CraftAbstract):
    i, j = sm.agent_zone, sp.agent_zone
    r = RESOURCES.index(proto.target)
    if sm.boundary(i, j) != B_CONNECTED:
        return None
    if sp.zone_resources[j][r] != sm.zone_resources[j][r] - 1:
        return None
    if sp.inventory[r] != sm.inventory[r] + 1:
        return None
    # frame: everything else untouched
    if sp.boundaries != sm.boundaries or sp.zone_workshops != sm.zone_workshops:
        return None
    for q in range(len(CRAFT_OBJECTS)):
        if q != r and sp.inventory[q] != sm.inventory[q]:
            return None
    for z in range(sm.n_zones):
        for q in range(len(RESOURCES)):
            if (z, q) != (j, r) and sp.zone_resources[z][q] != sm.zone_resources[z][q]:
                return None
    return TransitionCheck(proto.pid, (("i", i), ("j", j)))


def _workshop_outcomes(recipes: RecipeTable, workshop: str,
                       inv: tuple[int, ...]) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All (made-vector, resulting inventory) depletion endpoints.  Cached on
    the recipe table since monitors evaluate this every executor step."""
    cache = getattr(recipes, "_outcome_cache", None)
    if cache is None:
        cache = recipes._outcome_cache = {}
    hit = cache.get((workshop, inv))
    if hit is not None:
        return hit
    arts = recipes.artifacts(workshop)
    outcomes = []
    ranges = [range(COUNT_CAP + 1) for _ in arts]
    for made in itertools.product(*ranges):
        if sum(made) < 1:
            continue
        new_inv = list(inv)
        feasible = True
        for art, count in zip(arts, made):
            if count == 0:
                continue
            for q, k in recipes.ingredients(art).items():
                new_inv[OBJECT_INDEX[q]] -= k * count
        for art, count in zip(arts, made):
            new_inv[OBJECT_INDEX[art]] += count
        if any(v < 0 or v > COUNT_CAP for v in new_inv):
            continue
        # depletion: nothing further makeable from the resulting inventory
        for art in arts:
            if all(new_inv[OBJECT_INDEX[q]] >= k
                   for q, k in recipes.ingredients(art).items()):
                feasible = False
                break
        if feasible:
            outcomes.append((made, tuple(new_inv)))
    cache[(workshop, inv)] = outcomes
    return outcomes


def _check_workshop(proto, sm: CraftAbstract, sp: CraftAbstract, recipes: RecipeTable):
    i, j = sm.agent_zone, sp.agent_zone
    w = WORKSHOPS.index(proto.target)
    if sm.boundary(i, j) != B_CONNECTED:
        return None
    if not sm.zone_workshops[j][w]:
        return None
    if sp.boundaries != sm.boundaries or sp.zone_workshops != sm.zone_workshops \
            or sp.zone_resources != sm.zone_resources:
        return None
    for made, result in _workshop_outcomes(recipes, proto.target, sm.inventory):
        if result == sp.inventory:
            arts = recipes.artifacts(proto.target)
            witness = (("i", i), ("j", j),
                       ("made", tuple(zip(arts, made))))
            return TransitionCheck(proto.pid, witness)
    return None


def _check_tool(proto, sm: CraftAbstract, sp: CraftAbstract):
    i, j = sm.agent_zone, sp.agent_zone
    tool = proto.target
    t_idx = OBJECT_INDEX[tool]
    required = TOOL_BOUNDARY[tool]
    if i == j or sm.boundary(i, j) != required:
        return None
    if sp.boundary(i, j) != B_CONNECTED:
        return None
    if sp.inventory[t_idx] != sm.inventory[t_idx] - 1:
        return None
    for q in range(len(CRAFT_OBJECTS)):
        if q != t_idx and sp.inventory[q] != sm.inventory[q]:
            return None
    if sp.zone_resources != sm.zone_resources or sp.zone_workshops != sm.zone_workshops:
        return None
    # connectivity update: newly connected pairs must be licensed by closure
    for a in range(sm.n_zones):
        for b in range(a + 1, sm.n_zones):
            before = sm.boundary(a, b)
            after = sp.boundary(a, b)
            if after == B_CONNECTED:
                if before == B_CONNECTED or (a, b) == tuple(sorted((i, j))):
                    continue
                left = sm.boundary(a, i) == B_CONNECTED or sm.boundary(a, j) == B_CONNECTED
                right = sm.boundary(b, i) == B_CONNECTED or sm.boundary(b, j) == B_CONNECTED
                if not (left and right):
                    return None
            elif after != before:
                return None
    return TransitionCheck(proto.pid, (("i", i), ("j", j)))


def _check_box_get(proto, sm, sp):
    if not isinstance(sm, BoxAbstract) or not isinstance(sp, BoxAbstract):
        raise DomainMismatch("box prototype on non-box states")
    if sm.colors != sp.colors:
        return None
    color = BOX_COLORS.index(proto.target)
    if color not in sm.colors:
        return None
    k = sm.colors.index(color)
    if not sp.held[k] or sum(sp.held) != 1:
        return None
    # X: pick up the loose key
    if sm.loose[k] and sum(sp.loose) == 0 and sp.boxes == sm.boxes:
        return TransitionCheck(proto.pid, (("branch", "loose"),))
    # Y: open a box with the held key
    if sum(sm.held) == 1 and not sm.held[k] and sp.loose == sm.loose:
        k1 = sm.held.index(True)
        ok = sp.boxes[k][k1] == sm.boxes[k][k1] - 1
        if ok:
            for a in range(len(sm.colors)):
                for b in range(len(sm.colors)):
                    if (a, b) != (k, k1) and sp.boxes[a][b] != sm.boxes[a][b]:
                        ok = False
        if ok:
            return TransitionCheck(
                proto.pid, (("branch", "unlock"), ("lock_color", sm.colors[k1])))
    return None


# ---------------------------------------------------------------------------
# Executable transformer

def _replace(tup, idx, value):
    return tup[:idx] + (value,) + tup[idx + 1:]


def successors(proto: Prototype, s_minus, recipes: RecipeTable | None = None) -> list:
    """Exactly the post-states the relation admits, deterministically ordered."""
    recipes = recipes or default_recipes()
    out = []
    if proto.kind == "box-get":
        sm: BoxAbstract = s_minus
        color = BOX_COLORS.index(proto.target)
        if color in sm.colors:
            k = sm.colors.index(color)
            kcount = len(sm.colors)
            held_k = tuple(c == k for c in range(kcount))
            if sm.loose[k]:
                out.append(BoxAbstract(sm.colors, sm.boxes,
                                       tuple([False] * kcount), held_k))
            if sum(sm.held) == 1 and not sm.held[k]:
                k1 = sm.held.index(True)
                if sm.boxes[k][k1] >= 1:
                    boxes = tuple(
                        tuple(v - 1 if (a, b) == (k, k1) else v
                              for b, v in enumerate(row))
                        for a, row in enumerate(sm.boxes)
                    )
                    out.append(BoxAbstract(sm.colors, boxes, sm.loose, held_k))
        return _dedupe(out)

    sm: CraftAbstract = s_minus
    i = sm.agent_zone
    if proto.kind == "get":
        r = RESOURCES.index(proto.target)
        if sm.inventory[r] < COUNT_CAP:
            for j in range(sm.n_zones):
                if sm.boundary(i, j) == B_CONNECTED and sm.zone_resources[j][r] >= 1:
                    res = tuple(
                        _replace(row, r, row[r] - 1) if z == j else row
                        for z, row in enumerate(sm.zone_resources)
                    )
                    out.append(CraftAbstract(
                        sm.n_zones, j, sm.boundaries, res, sm.zone_workshops,
                        _replace(sm.inventory, r, sm.inventory[r] + 1)))
    elif proto.kind == "workshop":
        w = WORKSHOPS.index(proto.target)
        for j in range(sm.n_zones):
            if sm.boundary(i, j) == B_CONNECTED and sm.zone_workshops[j][w]:
                for _, result in _workshop_outcomes(recipes, proto.target, sm.inventory):
                    out.append(CraftAbstract(
                        sm.n_zones, j, sm.boundaries, sm.zone_resources,
                        sm.zone_workshops, result))
    elif proto.kind == "tool":
        tool = proto.target
        t_idx = OBJECT_INDEX[tool]
        required = TOOL_BOUNDARY[tool]
        if sm.inventory[t_idx] >= 1:
            inv = _replace(sm.inventory, t_idx, sm.inventory[t_idx] - 1)
            for j in range(sm.n_zones):
                if j == i or sm.boundary(i, j) != required:
                    continue
                forced = pair_index(i, j, sm.n_zones)
                optional = []
                for a in range(sm.n_zones):
                    for b in range(a + 1, sm.n_zones):
                        idx = pair_index(a, b, sm.n_zones)
                        if idx == forced or sm.boundaries[idx] == B_CONNECTED:
                            continue
                        left = sm.boundary(a, i) == B_CONNECTED or sm.boundary(a, j) == B_CONNECTED
                        right = sm.boundary(b, i) == B_CONNECTED or sm.boundary(b, j) == B_CONNECTED
                        if left and right:
                            optional.append(idx)
                for mask in range(1 << len(optional)):
                    bnd = list(sm.boundaries)
                    bnd[forced] = B_CONNECTED
                    for bit, idx in enumerate(optional):
                        if mask >> bit & 1:
                            bnd[idx] = B_CONNECTED
                    out.append(CraftAbstract(
                        sm.n_zones, j, tuple(bnd), sm.zone_resources,
                        sm.zone_workshops, inv))
    else:
        raise ValueError(f"unknown prototype kind {proto.kind}")
    return _dedupe(out)


def _state_key(s):
    if isinstance(s, CraftAbstract):
        return (0, s.n_zones, s.agent_zone, s.boundaries, s.zone_resources,
                s.zone_workshops, s.inventory)
    return (1, s.colors, s.boxes, s.loose, s.held)


def _dedupe(states: list) -> list:
    seen = set()
    out = []
    for s in sorted(states, key=_state_key):
        key = _state_key(s)
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out


# ---------------------------------------------------------------------------
# Monitors

def _known_component(obs, pos) -> set[tuple[int, int]]:
    """Component of seen empty cells around ``pos`` in this observation."""
    h, w = obs.known.shape
    if not (0 <= pos[0] < h and 0 <= pos[1] < w):
        return set()
    if not obs.seen[pos] or int(obs.known[pos]) != CELL_EMPTY:
        return set()
    comp = {pos}
    stack = [pos]
    while stack:
        r, c = stack.pop()
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and (nr, nc) not in comp \
                    and obs.seen[nr, nc] and int(obs.known[nr, nc]) == CELL_EMPTY:
                comp.add((nr, nc))
                stack.append((nr, nc))
    return comp


class Monitor:
    """Termination predicate: has the abstract delta since the snapshot
    satisfied this prototype's relation, judging from observations alone."""

    def __init__(self, proto: Prototype, snapshot, recipes: RecipeTable | None = None):
        self.proto = proto
        self.snapshot = snapshot.copy()
        self.recipes = recipes or default_recipes()
        if proto.kind == "tool":
            self._home = _known_component(self.snapshot, self.snapshot.agent_pos)
            self._was_obstacle = {
                (r, c)
                for r in range(self.snapshot.known.shape[0])
                for c in range(self.snapshot.known.shape[1])
                if self.snapshot.seen[r, c]
                and int(self.snapshot.known[r, c]) in OBSTACLE_CELLS
            }

    def __call__(self, obs) -> bool:
        proto = self.proto
        snap = self.snapshot
        if proto.kind == "get":
            target = proto.target
            for name in CRAFT_OBJECTS:
                want = 1 if name == target else 0
                if obs.inventory.get(name, 0) - snap.inventory.get(name, 0) != want:
                    return False
            return True
        if proto.kind == "workshop":
            sm = tuple(min(snap.inventory.get(o, 0), COUNT_CAP) for o in CRAFT_OBJECTS)
            sp = tuple(min(obs.inventory.get(o, 0), COUNT_CAP) for o in CRAFT_OBJECTS)
            if sp == sm:
                return False
            return any(result == sp for _, result
                       in _workshop_outcomes(self.recipes, proto.target, sm))
        if proto.kind == "tool":
            tool = proto.target
            for name in CRAFT_OBJECTS:
                want = -1 if name == tool else 0
                if obs.inventory.get(name, 0) - snap.inventory.get(name, 0) != want:
                    return False
            pos = obs.agent_pos
            return pos not in self._home and pos not in self._was_obstacle
        if proto.kind == "box-get":
            color = BOX_COLORS.index(proto.target)
            if obs.held_key != color:
                return False
            if snap.held_key != color:
                return True
            # already held: only a genuine re-pick of a loose key counts
            return bool(((snap.known != obs.known) & snap.seen).any())
        raise ValueError(f"unknown prototype kind {proto.kind}")


def monitor(proto: Prototype, snapshot, recipes: RecipeTable | None = None) -> Monitor:
    return Monitor(proto, snapshot, recipes)


# ---------------------------------------------------------------------------
# Concrete-pair verification (tests and replay use this)

def concrete_pair_check(proto: Prototype, world_before, world_after,
                        recipes: RecipeTable | None = None) -> TransitionCheck | None:
    """Check the relation on true abstractions of two concrete worlds.

    Zones of the before-world form the universe; after-world zones are mapped
    back onto it (merges become 'connected' entries), so the pair is judged in
    the fixed-universe representation the relations are written in.
    """
    recipes = recipes or default_recipes()
    if proto.kind == "box-get":
        sm = abstract_full(world_before)
        sp = abstract_full(world_after)
        universe = tuple(sorted(set(sm.colors) | set(sp.colors)))
        return check_transition(proto, sm.reindexed(universe),
                                sp.reindexed(universe), recipes)

    from .envs.craft import zone_partition

    sm = abstract_full(world_before)
    labels_before = zone_partition(world_before.grid)
    labels_after = zone_partition(world_after.grid)
    nz = sm.n_zones
    # map each before-zone to the after-zone that swallowed it
    rep_after = [-1] * nz
    h, w = world_before.grid.shape
    for r in range(h):
        for c in range(w):
            z = int(labels_before[r, c])
            if z >= 0 and rep_after[z] == -1 and labels_after[r, c] >= 0:
                rep_after[z] = int(labels_after[r, c])
    if any(v == -1 for v in rep_after):
        return None
    after_abs = abstract_full(world_after)

    # post-state fields pulled back to the before-universe
    res = [[0] * len(RESOURCES) for _ in range(nz)]
    ws = [[False] * len(WORKSHOPS) for _ in range(nz)]
    from .abstraction import object_zone
    from .objects import RESOURCE_CELLS, WORKSHOP_CELLS
    for r in range(h):
        for c in range(w):
            code = int(world_after.grid[r, c])
            if code in RESOURCE_CELLS or code in WORKSHOP_CELLS:
                z = object_zone(world_before.grid, labels_before, r, c)
                if z < 0:
                    continue
                if code in RESOURCE_CELLS:
                    res[z][RESOURCES.index(RESOURCE_CELLS[code])] += 1
                else:
                    ws[z][WORKSHOPS.index(WORKSHOP_CELLS[code])] = True
    boundaries = []
    for a in range(nz):
        for b in range(a + 1, nz):
            if rep_after[a] == rep_after[b]:
                boundaries.append(B_CONNECTED)
            else:
                boundaries.append(after_abs.boundary(rep_after[a], rep_after[b]))
    agent_cell = world_after.agent_pos
    if labels_before[agent_cell] >= 0:
        agent_zone = int(labels_before[agent_cell])
    else:
        # agent stands on a cell cleared or emptied during the option; take
        # the before-zone whose merged region contains the agent now
        candidates = [z for z in range(nz)
                      if rep_after[z] == int(labels_after[agent_cell])]
        others = [z for z in candidates if z != sm.agent_zone]
        agent_zone = others[0] if others else (candidates[0] if candidates else sm.agent_zone)
    sp = CraftAbstract(
        n_zones=nz,
        agent_zone=agent_zone,
        boundaries=tuple(boundaries),
        zone_resources=tuple(tuple(min(v, COUNT_CAP) for v in row) for row in res),
        zone_workshops=tuple(tuple(row) for row in ws),
        inventory=tuple(min(world_after.inventory.get(o, 0), COUNT_CAP)
                        for o in CRAFT_OBJECTS),
    )
    return check_transition(proto, sm, sp, recipes)
