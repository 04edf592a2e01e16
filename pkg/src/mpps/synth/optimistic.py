"""Optimistic synthesis baseline: shortest program that succeeds on at least
one completion of the unobserved map.

Unknown fields take any value up to the cap.  The search walks an
interval/possibility abstraction of the observation and commits assumptions
as components consume them (a committed boundary type or hidden object stays
committed for the rest of the program), which makes it an exact existential
search over per-field-independent completions.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..abstraction import GoalSpec, PartialBoxAbstract, PartialCraftAbstract
from ..errors import NoProgramFound
from ..objects import (
    B_CONNECTED, B_NOT_ADJACENT, B_STONE, B_WATER, BOX_COLORS, COUNT_CAP,
    CRAFT_OBJECTS, OBJECT_INDEX, RESOURCES, WORKSHOPS,
)
from ..prototypes import (
    Prototype, RecipeTable, TOOL_BOUNDARY, _workshop_outcomes, box_roster,
    craft_roster, default_recipes,
)
from .synthesize import SynthesisResult

WS_NO, WS_YES, WS_MAYBE = 0, 1, 2


def _pidx(i: int, j: int, n: int) -> int:
    if i > j:
        i, j = j, i
    return i * n - i * (i + 1) // 2 + (j - i - 1)


@dataclass(frozen=True)
class OptCraftState:
    nz: int
    agent: int
    bnd: tuple[tuple[int, ...], ...]      # possible boundary codes per pair
    res_lo: tuple[tuple[int, ...], ...]
    res_hi: tuple[tuple[int, ...], ...]
    ws: tuple[tuple[int, ...], ...]       # WS_NO / WS_YES / WS_MAYBE
    inv: tuple[int, ...]


@dataclass(frozen=True)
class OptBoxState:
    colors: tuple[int, ...]   # global color ids
    boxes: tuple[tuple[int, ...], ...]
    loose: int                # >=0 color idx, -1 none, -2 possibly hidden
    held: int                 # >=0 color idx or -1
    hidden: bool              # unseen cells may hide boxes/keys


def initial_optimistic(partial, goal: GoalSpec, max_zones: int = 3):
    if isinstance(partial, PartialCraftAbstract):
        return _initial_craft(partial, max_zones)
    if isinstance(partial, PartialBoxAbstract):
        return _initial_box(partial, goal)
    raise TypeError(f"cannot build optimistic state from {type(partial)!r}")


def _initial_craft(pa: PartialCraftAbstract, max_zones: int) -> OptCraftState:
    nf = pa.n_fragments
    virtual = max(0, max_zones - nf) if pa.has_unseen else 0
    nz = nf + virtual
    res_lo, res_hi, ws = [], [], []
    for z in range(nz):
        if z < nf:
            lo = list(pa.res_lb[z])
            hi = list(lo) if pa.closed[z] else [COUNT_CAP] * len(RESOURCES)
            hi = [max(l, h) for l, h in zip(lo, hi)]
            wrow = [WS_YES if pa.ws_seen[z][w]
                    else (WS_NO if pa.closed[z] else WS_MAYBE)
                    for w in range(len(WORKSHOPS))]
        else:
            lo = [0] * len(RESOURCES)
            hi = [COUNT_CAP] * len(RESOURCES)
            wrow = [WS_MAYBE] * len(WORKSHOPS)
        res_lo.append(tuple(lo))
        res_hi.append(tuple(hi))
        ws.append(tuple(wrow))
    bnd = []
    anything = (B_CONNECTED, B_WATER, B_STONE, B_NOT_ADJACENT)
    for i in range(nz):
        for j in range(i + 1, nz):
            open_i = pa.frontier[i] if i < nf else True
            open_j = pa.frontier[j] if j < nf else True
            possible: set[int] = set()
            if i < nf and j < nf:
                seen = pa.boundary_seen[_pidx(i, j, nf)]
                if seen >= 0:
                    possible.add(seen)
                    if seen == B_STONE and open_i and open_j:
                        possible.add(B_WATER)   # hidden water wins mixed labels
                if open_i and open_j:
                    possible.update(anything)
                if not possible:
                    possible.add(B_NOT_ADJACENT)
            else:
                if open_i and open_j:
                    possible.update(anything)
                else:
                    possible.add(B_NOT_ADJACENT)
            bnd.append(tuple(sorted(possible)))
    return OptCraftState(
        nz=nz, agent=pa.agent_fragment, bnd=tuple(bnd),
        res_lo=tuple(res_lo), res_hi=tuple(res_hi), ws=tuple(ws),
        inv=tuple(pa.inventory),
    )


def _initial_box(pa: PartialBoxAbstract, goal: GoalSpec) -> OptBoxState:
    colors = set()
    for (a, b), count in pa.box_lb.items():
        if count > 0:
            colors.add(a)
            colors.add(b)
    if pa.loose_seen is not None:
        colors.add(pa.loose_seen)
    if pa.held is not None:
        colors.add(pa.held)
    for name, _ in goal.atoms:
        colors.add(BOX_COLORS.index(name))
    universe = tuple(sorted(colors))
    where = {c: i for i, c in enumerate(universe)}
    k = len(universe)
    boxes = [[0] * k for _ in range(k)]
    for (a, b), count in pa.box_lb.items():
        boxes[where[a]][where[b]] = min(count, COUNT_CAP)
    if pa.loose_seen is not None:
        loose = where[pa.loose_seen]
    elif pa.has_unseen:
        loose = -2
    else:
        loose = -1
    return OptBoxState(
        colors=universe,
        boxes=tuple(tuple(r) for r in boxes),
        loose=loose,
        held=where[pa.held] if pa.held is not None else -1,
        hidden=pa.has_unseen,
    )


# ---------------------------------------------------------------------------
# Optimistic transformers

def _close_committed(bnd: list[tuple[int, ...]], nz: int) -> None:
    """Pairs joined through definitely-connected chains become connected."""
    parent = list(range(nz))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(nz):
        for j in range(i + 1, nz):
            if bnd[_pidx(i, j, nz)] == (B_CONNECTED,):
                parent[find(i)] = find(j)
    for i in range(nz):
        for j in range(i + 1, nz):
            if find(i) == find(j):
                bnd[_pidx(i, j, nz)] = (B_CONNECTED,)


def _commit_connected(state: OptCraftState, i: int, j: int) -> tuple:
    bnd = list(state.bnd)
    if i != j:
        bnd[_pidx(i, j, state.nz)] = (B_CONNECTED,)
        _close_committed(bnd, state.nz)
    return tuple(bnd)


def _movement_targets(state: OptCraftState) -> list[tuple[int, bool]]:
    """(zone, needs_commit) pairs the agent may end up in."""
    out = [(state.agent, False)]
    for j in range(state.nz):
        if j == state.agent:
            continue
        p = state.bnd[_pidx(state.agent, j, state.nz)]
        if B_CONNECTED in p:
            out.append((j, p != (B_CONNECTED,)))
    return out


def optimistic_successors(proto: Prototype, state,
                          recipes: RecipeTable | None = None) -> list:
    recipes = recipes or default_recipes()
    if isinstance(state, OptBoxState):
        return _box_successors(proto, state)
    out = []
    if proto.kind == "get":
        r = RESOURCES.index(proto.target)
        if state.inv[r] >= COUNT_CAP:
            return []
        for j, _ in _movement_targets(state):
            if state.res_hi[j][r] < 1:
                continue
            bnd = _commit_connected(state, state.agent, j)
            lo = [list(row) for row in state.res_lo]
            hi = [list(row) for row in state.res_hi]
            lo[j][r] = max(lo[j][r] - 1, 0)
            hi[j][r] -= 1
            inv = list(state.inv)
            inv[r] += 1
            out.append(OptCraftState(
                state.nz, j, bnd,
                tuple(tuple(x) for x in lo), tuple(tuple(x) for x in hi),
                state.ws, tuple(inv)))
    elif proto.kind == "workshop":
        w = WORKSHOPS.index(proto.target)
        for j, _ in _movement_targets(state):
            if state.ws[j][w] == WS_NO:
                continue
            bnd = _commit_connected(state, state.agent, j)
            ws = [list(row) for row in state.ws]
            ws[j][w] = WS_YES
            for _, result in _workshop_outcomes(recipes, proto.target, state.inv):
                out.append(OptCraftState(
                    state.nz, j, bnd, state.res_lo, state.res_hi,
                    tuple(tuple(x) for x in ws), result))
    elif proto.kind == "tool":
        t_idx = OBJECT_INDEX[proto.target]
        required = TOOL_BOUNDARY[proto.target]
        if state.inv[t_idx] < 1:
            return []
        inv = list(state.inv)
        inv[t_idx] -= 1
        for j in range(state.nz):
            if j == state.agent:
                continue
            p = state.bnd[_pidx(state.agent, j, state.nz)]
            if required not in p:
                continue
            bnd = _commit_connected(state, state.agent, j)
            out.append(OptCraftState(
                state.nz, j, bnd, state.res_lo, state.res_hi, state.ws,
                tuple(inv)))
    else:
        raise ValueError(proto.kind)
    return out


def _box_successors(proto: Prototype, state: OptBoxState) -> list[OptBoxState]:
    color = BOX_COLORS.index(proto.target)
    if color not in state.colors:
        return []
    k = state.colors.index(color)
    out = []
    # pick up the loose key (possibly assuming a hidden one)
    if state.loose == k or (state.loose == -2 and state.hidden):
        out.append(OptBoxState(state.colors, state.boxes, -1, k, state.hidden))
    # unlock a box with the held key
    if state.held >= 0 and state.held != k:
        if state.boxes[k][state.held] >= 1:
            boxes = tuple(
                tuple(v - 1 if (a, b) == (k, state.held) else v
                      for b, v in enumerate(row))
                for a, row in enumerate(state.boxes))
            out.append(OptBoxState(state.colors, boxes, state.loose, k,
                                   state.hidden))
        elif state.hidden:
            out.append(OptBoxState(state.colors, state.boxes, state.loose, k,
                                   state.hidden))
    # dedupe, deterministic order
    seen = set()
    uniq = []
    for s in out:
        if s not in seen:
            seen.add(s)
            uniq.append(s)
    return uniq


def optimistic_goal(goal: GoalSpec, state) -> bool:
    if isinstance(state, OptCraftState):
        return all(state.inv[OBJECT_INDEX[o]] >= n for o, n in goal.atoms)
    for name, _ in goal.atoms:
        color = BOX_COLORS.index(name)
        if color not in state.colors or state.held != state.colors.index(color):
            return False
    return True


def synthesize_optimistic(partial, goal: GoalSpec, k_max: int = 7,
                          recipes: RecipeTable | None = None,
                          max_zones: int = 3) -> SynthesisResult:
    """Shortest program solving at least one observation-consistent
    completion; ties broken by roster order (breadth-first in roster order)."""
    recipes = recipes or default_recipes()
    start = initial_optimistic(partial, goal, max_zones)
    if isinstance(start, OptBoxState):
        roster = box_roster(start.colors)
    else:
        roster = craft_roster(recipes)
    if optimistic_goal(goal, start):
        return SynthesisResult(program=[], objective=1.0, satisfied=[], k=0)
    frontier: list[tuple[object, tuple]] = [(start, ())]
    visited = {start}
    for depth in range(1, k_max + 1):
        nxt = []
        for state, prefix in frontier:
            for proto in roster:
                for child in optimistic_successors(proto, state, recipes):
                    if child in visited:
                        continue
                    program = prefix + (proto,)
                    if optimistic_goal(goal, child):
                        return SynthesisResult(
                            program=list(program), objective=1.0,
                            satisfied=[], k=depth)
                    visited.add(child)
                    nxt.append((child, program))
        frontier = nxt
        if not frontier:
            break
    raise NoProgramFound(f"no optimistic program of length <= {k_max}")
