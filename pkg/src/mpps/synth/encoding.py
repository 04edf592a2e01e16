"""Grounding program synthesis into weighted CNF.

One-hot Boolean selectors pick a component per program slot; every sampled
world gets its own bit-blasted pre/post state per slot, with hard clauses for
the start state, the per-component transition relations, the equality chain
between consecutive slots, and the goal, all guarded by a per-world indicator
whose unit clause is the soft (weight 1) part.  Maximizing satisfied soft
clauses maximizes the number of sampled worlds the shared program solves.

Fields that provably cannot change in a given world (zone resources starting
at zero, unobtainable key colors, workshop presence, already-connected zone
pairs) fold to constants; that prunes both variables and whole components per
world without changing the optimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..abstraction import BoxAbstract, CraftAbstract, GoalSpec, n_pairs, pair_index
from ..errors import CapExceeded
from ..objects import (
    B_CONNECTED, BOX_COLORS, COUNT_CAP, CRAFT_OBJECTS, OBJECT_INDEX,
    RESOURCES, WORKSHOPS,
)
from ..prototypes import (
    Prototype, RecipeTable, TOOL_BOUNDARY, box_roster, craft_roster,
    default_recipes,
)

# template literal namespaces (abs value ranges)
_MINUS = 1_000_000
_PLUS = 2_000_000
_AUX = 3_000_000
_SEL = 9_000_000


@dataclass
class SynthesisProblem:
    goal: GoalSpec
    worlds: list
    k_max: int = 7
    theta_obj: float = 1.0
    recipes: RecipeTable = field(default_factory=default_recipes)
    roster: tuple[Prototype, ...] = ()

    @property
    def domain(self) -> str:
        return self.goal.domain

    @property
    def m(self) -> int:
        return len(self.worlds)


def make_problem(goal: GoalSpec, worlds: list, k_max: int = 7,
                 theta_obj: float = 1.0,
                 recipes: RecipeTable | None = None) -> SynthesisProblem:
    recipes = recipes or default_recipes()
    worlds = list(worlds)
    if goal.domain == "box":
        colors = {BOX_COLORS.index(name) for name, _ in goal.atoms}
        for w in worlds:
            colors.update(w.colors)
        universe = tuple(sorted(colors))
        worlds = [w.reindexed(universe) for w in worlds]
        roster = box_roster(universe)
    else:
        roster = craft_roster(recipes)
    for w in worlds:
        w.validate()
    return SynthesisProblem(goal=goal, worlds=worlds, k_max=k_max,
                            theta_obj=theta_obj, recipes=recipes, roster=roster)


# ---------------------------------------------------------------------------
# Cells: possibly-folded finite-domain fields

class Cell:
    """A field over values 0..hi, either a constant or a few template bits."""

    __slots__ = ("slots", "const", "hi")

    def __init__(self, slots, const, hi):
        self.slots = slots
        self.const = const
        self.hi = hi

    @staticmethod
    def constant(v: int) -> "Cell":
        return Cell((), v, v)

    @staticmethod
    def variable(first_slot: int, hi: int) -> "Cell":
        width = max(1, hi.bit_length())
        return Cell(tuple(range(first_slot, first_slot + width)), None, hi)

    @property
    def width(self) -> int:
        return len(self.slots)

    def pattern(self, v: int, block: int):
        """Conjunction (template lits) asserting cell == v; None if impossible,
        [] if trivially true."""
        if self.const is not None:
            return [] if v == self.const else None
        if v < 0 or v >= (1 << self.width):
            return None
        out = []
        for i, slot in enumerate(self.slots):
            lit = block + slot + 1
            out.append(lit if (v >> i) & 1 else -lit)
        return out


def _negate(conj) -> list[int]:
    return [-l for l in conj]


class _TemplateBuilder:
    """Collects template clauses plus the number of auxiliary bits used."""

    def __init__(self):
        self.clauses: list[list[int]] = []
        self.n_aux = 0
        self.impossible = False

    def aux_bit(self) -> int:
        self.n_aux += 1
        return self.n_aux - 1

    def aux_cell(self, hi: int) -> Cell:
        width = max(1, hi.bit_length())
        first = self.n_aux
        self.n_aux += width
        return Cell(tuple(range(first, first + width)), None, hi)

    def add(self, clause: list[int]) -> None:
        self.clauses.append(clause)

    def imply(self, guard, clause) -> None:
        self.clauses.append(_negate(guard) + list(clause))

    def imply_all(self, guard, conj) -> None:
        neg = _negate(guard)
        for lit in conj:
            self.clauses.append(neg + [lit])

    def forbid(self, conj) -> None:
        if not conj:
            self.impossible = True
        else:
            self.clauses.append(_negate(conj))

    def equal(self, a: Cell, b: Cell, block_a: int, block_b: int, guard=()) -> None:
        guard = list(guard)
        if a.const is not None and b.const is not None:
            if a.const != b.const:
                self.forbid(guard)
            return
        if a.const is not None or b.const is not None:
            cell, blk = (b, block_b) if a.const is not None else (a, block_a)
            v = a.const if a.const is not None else b.const
            pat = cell.pattern(v, blk)
            if pat is None:
                self.forbid(guard)
            else:
                self.imply_all(guard, pat)
            return
        if a.width == b.width and a.hi == b.hi:
            for sa, sb in zip(a.slots, b.slots):
                la, lb = block_a + sa + 1, block_b + sb + 1
                self.imply(guard, [-la, lb])
                self.imply(guard, [la, -lb])
            return
        for v in range(max(a.hi, b.hi) + 1):
            pa, pb = a.pattern(v, block_a), b.pattern(v, block_b)
            if pa is not None and pb is not None:
                self.imply_all(guard + pa, pb)
                self.imply_all(guard + pb, pa)
            elif pa is not None:
                self.forbid(guard + pa)
            elif pb is not None:
                self.forbid(guard + pb)

    def delta(self, a: Cell, b: Cell, change: int, block_a: int, block_b: int,
              guard=()) -> None:
        """Constrain b == a + change; source values with no valid image are
        forbidden under the guard."""
        guard = list(guard)
        any_ok = False
        for v in range(a.hi + 1):
            pa = a.pattern(v, block_a)
            if pa is None:
                continue
            res = v + change
            pb = b.pattern(res, block_b) if res >= 0 and res <= b.hi else None
            if pb is None:
                self.forbid(guard + pa)
            else:
                any_ok = True
                self.imply_all(guard + pa, pb)
        if not any_ok:
            self.forbid(guard)

    def at_least(self, cell: Cell, n: int, block: int, guard=()) -> None:
        guard = list(guard)
        if cell.const is not None:
            if cell.const < n:
                self.forbid(guard)
            return
        if cell.hi < n:
            self.forbid(guard)
            return
        for v in range(n):
            pat = cell.pattern(v, block)
            if pat is not None:
                self.forbid(guard + pat)


def _instantiate(clauses, minus_base: int, plus_base: int, aux_base: int,
                 extra=(), sel_map=None) -> list[list[int]]:
    """Resolve template literals into solver variable ids.

    Bases are the var id of slot 0 in each namespace; ``extra`` literals are
    prepended to every clause (guards); ``sel_map[c]`` resolves selector
    markers."""
    out = []
    extra = list(extra)
    for cl in clauses:
        inst = list(extra)
        for lit in cl:
            a = abs(lit)
            if a > _SEL:
                v = sel_map[a - _SEL - 1]
            elif a > _AUX:
                v = aux_base + (a - _AUX) - 1
            elif a > _PLUS:
                v = plus_base + (a - _PLUS) - 1
            else:
                v = minus_base + (a - _MINUS) - 1
            inst.append(v if lit > 0 else -v)
        out.append(inst)
    return out


def _sel_marker(c: int) -> int:
    return _SEL + c + 1


# ---------------------------------------------------------------------------
# Craft world coding

class CraftWorldCoding:
    def __init__(self, world: CraftAbstract, recipes: RecipeTable):
        world.validate()
        self.world = world
        self.recipes = recipes
        Z = world.n_zones
        self.Z = Z
        slot = 0
        if Z == 1:
            self.z_cell = Cell.constant(0)
        else:
            self.z_cell = Cell.variable(slot, Z - 1)
            slot += self.z_cell.width
        self.pair_type = list(world.boundaries)
        self.conn_cells: list[Cell] = []
        for p in range(n_pairs(Z)):
            if world.boundaries[p] == B_CONNECTED:
                self.conn_cells.append(Cell.constant(1))
            else:
                self.conn_cells.append(Cell.variable(slot, 1))
                slot += 1
        self.rho_cells: list[list[Cell]] = []
        for z in range(Z):
            row = []
            for r in range(len(RESOURCES)):
                v0 = world.zone_resources[z][r]
                if v0 > COUNT_CAP:
                    raise CapExceeded(f"zone resource count {v0} above cap")
                if v0 == 0:
                    row.append(Cell.constant(0))
                else:
                    cell = Cell.variable(slot, v0)
                    slot += cell.width
                    row.append(cell)
            self.rho_cells.append(row)
        self.inv_hi = self._inventory_bounds()
        self.inv_cells: list[Cell] = []
        for q in range(len(CRAFT_OBJECTS)):
            hi = self.inv_hi[q]
            if world.inventory[q] > COUNT_CAP:
                raise CapExceeded("inventory count above cap")
            if hi == 0:
                self.inv_cells.append(Cell.constant(0))
            else:
                cell = Cell.variable(slot, hi)
                slot += cell.width
                self.inv_cells.append(cell)
        self.nbits = slot
        self._templates: dict[str, _TemplateBuilder] = {}

    def _inventory_bounds(self) -> list[int]:
        w = self.world
        hi = [0] * len(CRAFT_OBJECTS)
        for r in range(len(RESOURCES)):
            total = w.inventory[r] + sum(w.zone_resources[z][r]
                                         for z in range(w.n_zones))
            hi[r] = min(COUNT_CAP, total)
        for art in self.recipes._workshop_of:
            q = OBJECT_INDEX[art]
            hi[q] = w.inventory[q]
        workshop_present = [any(w.zone_workshops[z][i] for z in range(w.n_zones))
                            for i in range(len(WORKSHOPS))]
        changed = True
        while changed:
            changed = False
            for art in self.recipes._workshop_of:
                q = OBJECT_INDEX[art]
                if hi[q] == COUNT_CAP:
                    continue
                ws = self.recipes.workshop_of(art)
                if not workshop_present[WORKSHOPS.index(ws)]:
                    continue
                if all(hi[OBJECT_INDEX[i]] >= k
                       for i, k in self.recipes.ingredients(art).items()):
                    hi[q] = COUNT_CAP
                    changed = True
        return hi

    def _all_cells(self):
        yield self.z_cell
        yield from self.conn_cells
        for row in self.rho_cells:
            yield from row
        yield from self.inv_cells

    # -- per-state clauses ----------------------------------------------------

    def validity_clauses(self, base: int) -> list[list[int]]:
        out = []
        for cell in self._all_cells():
            if cell.const is None:
                for v in range(cell.hi + 1, 1 << cell.width):
                    out.append([-(base + s) if (v >> i) & 1 else (base + s)
                                for i, s in enumerate(cell.slots)])
        return out

    def start_units(self, base: int) -> list[int]:
        units = []

        def pin(cell: Cell, v: int):
            if cell.const is not None:
                assert cell.const == v, "start value contradicts folding"
                return
            for i, slot in enumerate(cell.slots):
                lit = base + slot
                units.append(lit if (v >> i) & 1 else -lit)

        w = self.world
        pin(self.z_cell, w.agent_zone)
        for p in range(n_pairs(w.n_zones)):
            pin(self.conn_cells[p], 1 if w.boundaries[p] == B_CONNECTED else 0)
        for z in range(w.n_zones):
            for r in range(len(RESOURCES)):
                pin(self.rho_cells[z][r], w.zone_resources[z][r])
        for q in range(len(CRAFT_OBJECTS)):
            pin(self.inv_cells[q], w.inventory[q])
        return units

    def decode_state(self, base: int, model: list[bool]) -> CraftAbstract:
        def read(cell: Cell) -> int:
            if cell.const is not None:
                return cell.const
            v = 0
            for i, slot in enumerate(cell.slots):
                if model[base + slot]:
                    v |= 1 << i
            return v

        w = self.world
        boundaries = tuple(
            B_CONNECTED if read(self.conn_cells[p]) else self.pair_type[p]
            for p in range(n_pairs(w.n_zones))
        )
        return CraftAbstract(
            n_zones=w.n_zones,
            agent_zone=read(self.z_cell),
            boundaries=boundaries,
            zone_resources=tuple(tuple(read(self.rho_cells[z][r])
                                       for r in range(len(RESOURCES)))
                                 for z in range(w.n_zones)),
            zone_workshops=w.zone_workshops,
            inventory=tuple(read(self.inv_cells[q])
                            for q in range(len(CRAFT_OBJECTS))),
        )

    def goal_clauses(self, goal: GoalSpec, plus_base: int, y_var: int) -> list[list[int]]:
        tb = _TemplateBuilder()
        for name, n in goal.atoms:
            tb.at_least(self.inv_cells[OBJECT_INDEX[name]], n, _PLUS)
        if tb.impossible:
            return [[-y_var]]
        return _instantiate(tb.clauses, 0, plus_base, 0, extra=[-y_var])

    # -- prototype templates ----------------------------------------------------

    def template(self, proto: Prototype) -> _TemplateBuilder:
        tb = self._templates.get(proto.pid)
        if tb is None:
            tb = _TemplateBuilder()
            if proto.kind == "get":
                self._tpl_get(tb, RESOURCES.index(proto.target))
            elif proto.kind == "workshop":
                self._tpl_workshop(tb, proto.target)
            elif proto.kind == "tool":
                self._tpl_tool(tb, proto.target)
            else:
                raise ValueError(proto.kind)
            self._templates[proto.pid] = tb
        return tb

    def _zone_guard(self, i: int, j: int):
        gm = self.z_cell.pattern(i, _MINUS)
        gp = self.z_cell.pattern(j, _PLUS)
        if gm is None or gp is None:
            return None
        return gm + gp

    def _conn_true(self, i: int, j: int, block: int):
        if i == j:
            return []
        return self.conn_cells[pair_index(i, j, self.Z)].pattern(1, block)

    def _movement_guard(self, tb: _TemplateBuilder) -> None:
        """(z- = i and z+ = j) requires i~j connected beforehand."""
        for i in range(self.Z):
            for j in range(self.Z):
                if i == j:
                    continue
                guard = self._zone_guard(i, j)
                if guard is None:
                    continue
                conn = self._conn_true(i, j, _MINUS)
                if conn is None:
                    tb.forbid(guard)
                else:
                    tb.imply_all(guard, conn)

    def _frame_inv(self, tb, touched: set[int]) -> None:
        for q in range(len(CRAFT_OBJECTS)):
            if q not in touched:
                tb.equal(self.inv_cells[q], self.inv_cells[q], _MINUS, _PLUS)

    def _frame_conn(self, tb) -> None:
        for cell in self.conn_cells:
            tb.equal(cell, cell, _MINUS, _PLUS)

    def _frame_rho(self, tb, skip_resource: int | None = None) -> None:
        for z in range(self.Z):
            for r in range(len(RESOURCES)):
                if r != skip_resource:
                    tb.equal(self.rho_cells[z][r], self.rho_cells[z][r],
                             _MINUS, _PLUS)

    def _tpl_get(self, tb: _TemplateBuilder, r: int) -> None:
        if self.inv_cells[r].const is not None \
                or all(self.rho_cells[z][r].const == 0 for z in range(self.Z)
                       if self.rho_cells[z][r].const is not None) \
                and all(self.rho_cells[z][r].const is not None for z in range(self.Z)):
            tb.impossible = True
            return
        self._movement_guard(tb)
        tb.delta(self.inv_cells[r], self.inv_cells[r], +1, _MINUS, _PLUS)
        for j in range(self.Z):
            guard = self.z_cell.pattern(j, _PLUS)
            if guard is None:
                continue
            cell = self.rho_cells[j][r]
            if cell.const is not None:
                tb.forbid(guard)    # no such resource ever in this zone
                continue
            tb.delta(cell, cell, -1, _MINUS, _PLUS, guard)
            for j2 in range(self.Z):
                if j2 != j:
                    tb.equal(self.rho_cells[j2][r], self.rho_cells[j2][r],
                             _MINUS, _PLUS, guard)
        self._frame_inv(tb, {r})
        self._frame_conn(tb)
        self._frame_rho(tb, skip_resource=r)

    def _tpl_workshop(self, tb: _TemplateBuilder, workshop: str) -> None:
        w_idx = WORKSHOPS.index(workshop)
        if not any(self.world.zone_workshops[z][w_idx] for z in range(self.Z)):
            tb.impossible = True
            return
        self._movement_guard(tb)
        for j in range(self.Z):
            guard = self.z_cell.pattern(j, _PLUS)
            if guard is not None and not self.world.zone_workshops[j][w_idx]:
                tb.forbid(guard)
        arts = self.recipes.artifacts(workshop)
        made: dict[str, Cell] = {}
        for art in arts:
            hi = self.inv_hi[OBJECT_INDEX[art]]
            made[art] = tb.aux_cell(hi) if hi > 0 else Cell.constant(0)
        active_bits = [_AUX + s + 1 for art in arts
                       for s in made[art].slots]
        if not active_bits:
            tb.impossible = True
            return
        tb.add(list(active_bits))      # at least one artifact made
        for q in range(len(CRAFT_OBJECTS)):
            name = CRAFT_OBJECTS[q]
            ops = [(made[art], -self.recipes.ingredients(art)[name])
                   for art in arts if name in self.recipes.ingredients(art)]
            if name in made:
                ops.append((made[name], +1))
            if not ops:
                tb.equal(self.inv_cells[q], self.inv_cells[q], _MINUS, _PLUS)
                continue
            cur, cur_block = self.inv_cells[q], _MINUS
            for idx, (m_cell, unit) in enumerate(ops):
                last = idx == len(ops) - 1
                nxt = self.inv_cells[q] if last else tb.aux_cell(COUNT_CAP)
                nxt_block = _PLUS if last else _AUX
                self._linear_step(tb, cur, cur_block, m_cell, unit, nxt, nxt_block)
                cur, cur_block = nxt, nxt_block
        # depletion: no artifact craftable from the resulting inventory
        for art in arts:
            terms: list[tuple[Cell, int]] | None = []
            for ing, k in self.recipes.ingredients(art).items():
                cell = self.inv_cells[OBJECT_INDEX[ing]]
                if cell.const is not None:
                    if cell.const < k:
                        terms = None      # never craftable again: vacuous
                        break
                    continue              # always stocked: contributes nothing
                terms.append((cell, k))
            if terms is None:
                continue
            if not terms:
                tb.impossible = True      # perpetually craftable: no endpoint
                return
            lits = []
            for cell, k in terms:
                a_lit = _AUX + tb.aux_bit() + 1
                lits.append(a_lit)
                for v in range(k, cell.hi + 1):
                    pat = cell.pattern(v, _PLUS)
                    if pat is not None:
                        tb.add([-a_lit] + _negate(pat))
            tb.add(lits)
        self._frame_conn(tb)
        self._frame_rho(tb)

    def _linear_step(self, tb, cur: Cell, cur_block: int, m_cell: Cell,
                     unit: int, nxt: Cell, nxt_block: int) -> None:
        """Encode nxt == cur + unit * m (unit carries the ingredient factor)."""
        for v in range(cur.hi + 1):
            pv = cur.pattern(v, cur_block)
            if pv is None:
                continue
            for u in range(m_cell.hi + 1):
                pu = m_cell.pattern(u, _AUX)
                if pu is None:
                    continue
                res = v + unit * u
                pr = nxt.pattern(res, nxt_block) if 0 <= res <= nxt.hi else None
                if pr is None:
                    tb.forbid(pv + pu)
                else:
                    tb.imply_all(pv + pu, pr)

    def _tpl_tool(self, tb: _TemplateBuilder, tool: str) -> None:
        t_idx = OBJECT_INDEX[tool]
        required = TOOL_BOUNDARY[tool]
        t_cell = self.inv_cells[t_idx]
        if t_cell.const is not None \
                or not any(t == required for t in self.pair_type):
            tb.impossible = True
            return
        tb.delta(t_cell, t_cell, -1, _MINUS, _PLUS)
        possible = False
        for i in range(self.Z):
            for j in range(self.Z):
                guard = self._zone_guard(i, j)
                if guard is None:
                    continue
                if i == j:
                    tb.forbid(guard)
                    continue
                p = pair_index(i, j, self.Z)
                if self.pair_type[p] != required or self.conn_cells[p].const is not None:
                    tb.forbid(guard)
                    continue
                possible = True
                tb.imply_all(guard, self.conn_cells[p].pattern(0, _MINUS))
                tb.imply_all(guard, self.conn_cells[p].pattern(1, _PLUS))
                # closure licensing for every other pair that newly connects
                for a in range(self.Z):
                    for b in range(a + 1, self.Z):
                        p2 = pair_index(a, b, self.Z)
                        if p2 == p:
                            continue
                        cell2 = self.conn_cells[p2]
                        if cell2.const is not None:
                            continue
                        ante = guard + cell2.pattern(0, _MINUS) \
                            + cell2.pattern(1, _PLUS)
                        for endpoint in (a, b):
                            lits = []
                            trivial = False
                            for target in (i, j):
                                conn = self._conn_true(endpoint, target, _MINUS)
                                if conn is None:
                                    continue
                                if not conn:
                                    trivial = True
                                    break
                                lits.append(conn[0])
                            if trivial:
                                continue
                            if lits:
                                tb.imply(ante, lits)
                            else:
                                tb.forbid(ante)
        if not possible:
            tb.impossible = True
            return
        # connected pairs never disconnect
        for cell in self.conn_cells:
            if cell.const is None:
                tb.forbid(cell.pattern(1, _MINUS) + cell.pattern(0, _PLUS))
        self._frame_inv(tb, {t_idx})
        self._frame_rho(tb)


# ---------------------------------------------------------------------------
# Box world coding

class BoxWorldCoding:
    def __init__(self, world: BoxAbstract, recipes: RecipeTable | None = None):
        world.validate()
        self.world = world
        K = len(world.colors)
        self.K = K
        slot = 0
        self.box_cells: list[list[Cell]] = []
        for a in range(K):
            row = []
            for b in range(K):
                v0 = world.boxes[a][b]
                if v0 > COUNT_CAP:
                    raise CapExceeded("box count above cap")
                if v0 == 0:
                    row.append(Cell.constant(0))
                else:
                    cell = Cell.variable(slot, v0)
                    slot += cell.width
                    row.append(cell)
            self.box_cells.append(row)
        self.loose_cells: list[Cell] = []
        for c in range(K):
            if world.loose[c]:
                self.loose_cells.append(Cell.variable(slot, 1))
                slot += 1
            else:
                self.loose_cells.append(Cell.constant(0))
        self.obtainable = self._obtainable()
        self.held_cells: list[Cell] = []
        for c in range(K):
            if self.obtainable[c]:
                self.held_cells.append(Cell.variable(slot, 1))
                slot += 1
            else:
                self.held_cells.append(Cell.constant(0))
        self.nbits = slot
        self._template: _TemplateBuilder | None = None

    def _obtainable(self) -> list[bool]:
        w = self.world
        reach = [w.loose[c] or w.held[c] for c in range(self.K)]
        changed = True
        while changed:
            changed = False
            for a in range(self.K):
                if not reach[a] and any(w.boxes[a][b] >= 1 and reach[b]
                                        for b in range(self.K)):
                    reach[a] = True
                    changed = True
        return reach

    def validity_clauses(self, base: int) -> list[list[int]]:
        out = []
        for row in self.box_cells:
            for cell in row:
                if cell.const is None:
                    for v in range(cell.hi + 1, 1 << cell.width):
                        out.append([-(base + s) if (v >> i) & 1 else (base + s)
                                    for i, s in enumerate(cell.slots)])
        for group in (self.held_cells, self.loose_cells):
            vs = [base + c.slots[0] for c in group if c.const is None]
            for i in range(len(vs)):
                for j in range(i + 1, len(vs)):
                    out.append([-vs[i], -vs[j]])
        return out

    def start_units(self, base: int) -> list[int]:
        units = []

        def pin(cell: Cell, v: int):
            if cell.const is not None:
                assert cell.const == v
                return
            for i, slot in enumerate(cell.slots):
                lit = base + slot
                units.append(lit if (v >> i) & 1 else -lit)

        w = self.world
        for a in range(self.K):
            for b in range(self.K):
                pin(self.box_cells[a][b], w.boxes[a][b])
        for c in range(self.K):
            pin(self.loose_cells[c], 1 if w.loose[c] else 0)
            pin(self.held_cells[c], 1 if w.held[c] else 0)
        return units

    def decode_state(self, base: int, model: list[bool]) -> BoxAbstract:
        def read(cell: Cell) -> int:
            if cell.const is not None:
                return cell.const
            v = 0
            for i, slot in enumerate(cell.slots):
                if model[base + slot]:
                    v |= 1 << i
            return v

        K = self.K
        return BoxAbstract(
            self.world.colors,
            tuple(tuple(read(self.box_cells[a][b]) for b in range(K))
                  for a in range(K)),
            tuple(bool(read(self.loose_cells[c])) for c in range(K)),
            tuple(bool(read(self.held_cells[c])) for c in range(K)),
        )

    def goal_clauses(self, goal: GoalSpec, plus_base: int, y_var: int) -> list[list[int]]:
        out = []
        for name, _ in goal.atoms:
            color = BOX_COLORS.index(name)
            if color not in self.world.colors:
                return [[-y_var]]
            cell = self.held_cells[self.world.colors.index(color)]
            pat = cell.pattern(1, _PLUS)
            if pat is None:
                return [[-y_var]]
            for lit in pat:
                v = plus_base + (abs(lit) - _PLUS) - 1
                out.append([-y_var, v if lit > 0 else -v])
        return out

    def template(self) -> _TemplateBuilder:
        """Shared slot transition: selector markers choose the color."""
        if self._template is not None:
            return self._template
        K = self.K
        tb = _TemplateBuilder()
        x = _AUX + tb.aux_bit() + 1
        ybr = _AUX + tb.aux_bit() + 1
        tb.add([x, ybr])
        tb.add([-x, -ybr])
        # X: pick up the loose key of the selected color
        for c in range(K):
            sel = _sel_marker(c)
            pat = self.loose_cells[c].pattern(1, _MINUS)
            if pat is None:
                tb.add([-x, -sel])
            else:
                tb.imply_all([x, sel], pat)
        for c in range(K):
            cell = self.loose_cells[c]
            if cell.const is None:
                tb.imply_all([x], cell.pattern(0, _PLUS))
        for a in range(K):
            for b in range(K):
                cell = self.box_cells[a][b]
                tb.equal(cell, cell, _MINUS, _PLUS, guard=[x])
        # Y: open a box with the held key
        held_lits = [self.held_cells[c].pattern(1, _MINUS)[0]
                     for c in range(K) if self.held_cells[c].const is None]
        if held_lits:
            tb.imply([ybr], held_lits)
        else:
            tb.add([-ybr])
        for c in range(K):
            sel = _sel_marker(c)
            pat = self.held_cells[c].pattern(0, _MINUS)
            if pat is None:
                continue
            tb.imply_all([ybr, sel], pat)      # selected color not already held
        for c in range(K):
            cell = self.loose_cells[c]
            tb.equal(cell, cell, _MINUS, _PLUS, guard=[ybr])
        for a in range(K):
            for b in range(K):
                cell = self.box_cells[a][b]
                sel_a = _sel_marker(a)
                held_b = self.held_cells[b].pattern(1, _MINUS)
                if held_b is None:
                    continue
                if cell.const is not None:
                    tb.add([-ybr, -sel_a] + _negate(held_b))
                    continue
                e = _AUX + tb.aux_bit() + 1
                tb.add([-e, ybr])
                tb.add([-e, sel_a])
                for lit in held_b:
                    tb.add([-e, lit])
                tb.add([-ybr, -sel_a] + _negate(held_b) + [e])
                tb.delta(cell, cell, -1, _MINUS, _PLUS, guard=[e])
                self._equal_unless(tb, cell, e)
        # post-state: the selected color is in hand
        for c in range(K):
            sel = _sel_marker(c)
            pat = self.held_cells[c].pattern(1, _PLUS)
            if pat is None:
                tb.add([-sel])
            else:
                tb.imply_all([sel], pat)
        self._template = tb
        return tb

    @staticmethod
    def _equal_unless(tb: _TemplateBuilder, cell: Cell, e_lit: int) -> None:
        for s in cell.slots:
            lm, lp = _MINUS + s + 1, _PLUS + s + 1
            tb.add([e_lit, -lm, lp])
            tb.add([e_lit, lm, -lp])


# ---------------------------------------------------------------------------
# Grounded encoding

@dataclass
class GroundedEncoding:
    problem: SynthesisProblem
    k: int
    nvars: int
    hard: list[list[int]]
    soft: list[tuple[int, int]]            # (weight, y_var)
    sel: list[list[int]]                   # [slot][roster_idx] -> var
    y_vars: list[int]                      # per encoded world
    world_weights: list[int]               # multiplicity of each encoded world
    world_index_groups: list[list[int]]    # original world indices per group
    codings: list
    minus_bases: list[list[int]]           # [group][slot]
    plus_bases: list[list[int]]

    @property
    def total_weight(self) -> int:
        return sum(w for w, _ in self.soft)

    def program_of_model(self, model: list[bool]) -> list[Prototype]:
        roster = self.problem.roster
        program = []
        for t in range(self.k):
            chosen = None
            for c, var in enumerate(self.sel[t]):
                if model[var]:
                    chosen = roster[c]
                    break
            assert chosen is not None, "one-hot selector violated"
            program.append(chosen)
        return program

    def satisfied_groups(self, model: list[bool]) -> list[bool]:
        return [model[y] for y in self.y_vars]

    def to_wcnf(self) -> str:
        top = self.total_weight + 1
        lines = [f"c mpps grounded encoding k={self.k} m={self.problem.m}",
                 f"p wcnf {self.nvars} {len(self.hard) + len(self.soft)} {top}"]
        for cl in self.hard:
            lines.append(" ".join([str(top)] + [str(l) for l in cl] + ["0"]))
        for w, y in self.soft:
            lines.append(f"{w} {y} 0")
        return "\n".join(lines) + "\n"


def _state_key(s) -> tuple:
    if isinstance(s, CraftAbstract):
        return (s.n_zones, s.agent_zone, s.boundaries, s.zone_resources,
                s.zone_workshops, s.inventory)
    return (s.colors, s.boxes, s.loose, s.held)


def encode(problem: SynthesisProblem, k: int,
           group_worlds: bool = False) -> GroundedEncoding:
    """Ground the length-k synthesis problem to weighted CNF.

    ``group_worlds`` merges identical sampled worlds into one block whose soft
    indicator carries the multiplicity as its weight; the optimum is
    unchanged and point-mass posteriors get much smaller instances.
    """
    if k < 1 or k > problem.k_max:
        raise ValueError(f"k={k} outside 1..{problem.k_max}")
    roster = problem.roster
    groups: list[list[int]] = []
    group_worlds_list: list = []
    if group_worlds:
        index: dict[tuple, int] = {}
        for j, w in enumerate(problem.worlds):
            key = _state_key(w)
            if key in index:
                groups[index[key]].append(j)
            else:
                index[key] = len(groups)
                groups.append([j])
                group_worlds_list.append(w)
    else:
        groups = [[j] for j in range(problem.m)]
        group_worlds_list = list(problem.worlds)

    nvars = 0

    def alloc(n: int) -> int:
        nonlocal nvars
        first = nvars + 1
        nvars += n
        return first

    hard: list[list[int]] = []
    # selectors first: their variable order defines the lexicographic tiebreak
    sel = [[alloc(1) for _ in roster] for _ in range(k)]
    for t in range(k):
        hard.append(list(sel[t]))
        for a in range(len(roster)):
            for b in range(a + 1, len(roster)):
                hard.append([-sel[t][a], -sel[t][b]])
    y_vars = [alloc(1) for _ in groups]

    codings = []
    minus_bases: list[list[int]] = []
    plus_bases: list[list[int]] = []
    for g, world in enumerate(group_worlds_list):
        if problem.domain == "craft":
            coding = CraftWorldCoding(world, problem.recipes)
        else:
            coding = BoxWorldCoding(world)
        codings.append(coding)
        y = y_vars[g]
        mb, pb = [], []
        for t in range(k):
            mb.append(alloc(coding.nbits))
            pb.append(alloc(coding.nbits))
        minus_bases.append(mb)
        plus_bases.append(pb)
        for t in range(k):
            hard.extend(coding.validity_clauses(mb[t]))
            hard.extend(coding.validity_clauses(pb[t]))
        # start state
        for lit in coding.start_units(mb[0]):
            hard.append([-y, lit])
        # chaining: post state of slot t equals pre state of slot t+1
        for t in range(k - 1):
            for s in range(coding.nbits):
                a, b = pb[t] + s, mb[t + 1] + s
                hard.append([-y, -a, b])
                hard.append([-y, a, -b])
        # transitions
        if problem.domain == "craft":
            for t in range(k):
                for c, proto in enumerate(roster):
                    tpl = coding.template(proto)
                    guard = [-y, -sel[t][c]]
                    if tpl.impossible:
                        hard.append(guard)
                        continue
                    aux_base = alloc(tpl.n_aux) if tpl.n_aux else 0
                    hard.extend(_instantiate(tpl.clauses, mb[t], pb[t],
                                             aux_base, extra=guard))
        else:
            tpl = coding.template()
            for t in range(k):
                aux_base = alloc(tpl.n_aux) if tpl.n_aux else 0
                hard.extend(_instantiate(tpl.clauses, mb[t], pb[t], aux_base,
                                         extra=[-y], sel_map=sel[t]))
        # goal on the final post-state
        hard.extend(coding.goal_clauses(problem.goal, pb[k - 1], y))

    soft = [(len(groups[g]), y_vars[g]) for g in range(len(groups))]
    return GroundedEncoding(
        problem=problem, k=k, nvars=nvars, hard=hard, soft=soft, sel=sel,
        y_vars=y_vars, world_weights=[len(g) for g in groups],
        world_index_groups=groups, codings=codings,
        minus_bases=minus_bases, plus_bases=plus_bases,
    )


def parse_wcnf(text: str) -> tuple[int, int, list[tuple[int, list[int]]]]:
    """Parse weighted DIMACS; returns (nvars, top, [(weight, clause), ...])."""
    nvars = top = None
    clauses = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 5 or parts[1] != "wcnf":
                raise ValueError(f"bad problem line {line!r}")
            nvars, _, top = int(parts[2]), int(parts[3]), int(parts[4])
            continue
        parts = [int(x) for x in line.split()]
        if parts[-1] != 0:
            raise ValueError(f"clause not zero-terminated: {line!r}")
        clauses.append((parts[0], parts[1:-1]))
    if nvars is None:
        raise ValueError("missing p line")
    return nvars, top, clauses
