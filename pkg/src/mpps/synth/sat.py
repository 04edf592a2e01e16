"""A small CDCL SAT solver: two-watched literals, 1UIP learning, VSIDS,
Luby restarts, incremental clause addition and solving under assumptions.

Clauses are lists of nonzero signed ints (DIMACS convention).  Everything is
deterministic: decisions follow activity with index tiebreaks, activities are
updated in a fixed order, and nothing is randomized.
"""

from __future__ import annotations

import heapq


def _luby(x: int) -> int:
    # Luby restart sequence, 0-indexed: 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return 1 << seq


class Solver:
    def __init__(self):
        self.nvars = 0
        self.ok = True
        self.clauses: list[list[int]] = []
        self.learned: list[list[int]] = []
        self.watches: list[list[list[int]]] = [[], []]
        self.val: list[int] = [0, 0]           # per internal lit: 1 true, -1 false
        self.level: list[int] = [0]            # per var
        self.reason: list[list[int] | None] = [None]
        self.activity: list[float] = [0.0]
        self.phase: list[int] = [0]            # saved polarity (0 -> negative first)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.var_inc = 1.0
        self.units: list[int] = []
        self.order: list[tuple[float, int]] = []
        self._n_assumed = 0
        self.decisions = 0
        self.conflicts = 0
        self.propagations = 0

    # -- construction -------------------------------------------------------

    def new_var(self) -> int:
        self.nvars += 1
        self.watches.append([])
        self.watches.append([])
        self.val.append(0)
        self.val.append(0)
        self.level.append(0)
        self.reason.append(None)
        self.activity.append(0.0)
        self.phase.append(0)
        return self.nvars

    def new_vars(self, n: int) -> int:
        first = self.nvars + 1
        for _ in range(n):
            self.new_var()
        return first

    @staticmethod
    def _ilit(lit: int) -> int:
        v = lit if lit > 0 else -lit
        return (v << 1) | (1 if lit < 0 else 0)

    def add_clause(self, clause) -> bool:
        """Add a clause of signed ints; False signals the formula is now UNSAT."""
        if not self.ok:
            return False
        lits = sorted({self._ilit(l) for l in clause})
        seen = set(lits)
        if any(l ^ 1 in seen for l in lits):
            return True  # tautology
        # strip literals already settled at level 0 (permanent facts)
        filtered = []
        for l in lits:
            if self.val[l] != 0 and self.level[l >> 1] == 0:
                if self.val[l] == 1:
                    return True  # permanently satisfied
                continue
            filtered.append(l)
        if not filtered:
            self.ok = False
            return False
        if len(filtered) == 1:
            self.units.append(filtered[0])
            return True
        cl = filtered
        self.clauses.append(cl)
        self.watches[cl[0]].append(cl)
        self.watches[cl[1]].append(cl)
        return True

    # -- assignment machinery ------------------------------------------------

    def _assign(self, lit: int, reason) -> None:
        self.val[lit] = 1
        self.val[lit ^ 1] = -1
        var = lit >> 1
        self.level[var] = len(self.trail_lim)
        self.reason[var] = reason
        self.phase[var] = (lit & 1) ^ 1
        self.trail.append(lit)

    def _propagate(self):
        val = self.val
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            fl = p ^ 1
            ws = watches[fl]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == fl:
                    c[0] = c[1]
                    c[1] = fl
                first = c[0]
                if val[first] == 1:
                    ws[j] = c
                    j += 1
                    continue
                found = False
                for k in range(2, len(c)):
                    lk = c[k]
                    if val[lk] != -1:
                        c[1] = lk
                        c[k] = fl
                        watches[lk].append(c)
                        found = True
                        break
                if found:
                    continue
                ws[j] = c
                j += 1
                if val[first] == -1:
                    while i < n:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    del ws[j:]
                    return c
                self._assign(first, c)
            del ws[j:]
        return None

    def _bump(self, var: int) -> None:
        act = self.activity[var] + self.var_inc
        self.activity[var] = act
        if act > 1e100:
            for v in range(1, self.nvars + 1):
                self.activity[v] *= 1e-100
            self.var_inc *= 1e-100
        heapq.heappush(self.order, (-self.activity[var], var))

    def _analyze(self, confl) -> tuple[list[int], int]:
        learnt = [0]
        seen = bytearray(self.nvars + 1)
        counter = 0
        p = None
        index = len(self.trail) - 1
        cur_level = len(self.trail_lim)
        c = confl
        while True:
            start = 1 if p is not None else 0
            for k in range(start, len(c)):
                q = c[k]
                v = q >> 1
                if not seen[v] and self.level[v] > 0:
                    seen[v] = 1
                    self._bump(v)
                    if self.level[v] >= cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while True:
                pl = self.trail[index]
                index -= 1
                if seen[pl >> 1]:
                    break
            counter -= 1
            if counter == 0:
                p = pl ^ 1
                break
            c = self.reason[pl >> 1]
            if c[0] != pl:
                c = [pl] + [l for l in c if l != pl]
        learnt[0] = p
        if len(learnt) == 1:
            return learnt, 0
        # second watch must sit at the backjump level for watch soundness
        mi = 1
        for k in range(2, len(learnt)):
            if self.level[learnt[k] >> 1] > self.level[learnt[mi] >> 1]:
                mi = k
        learnt[1], learnt[mi] = learnt[mi], learnt[1]
        return learnt, self.level[learnt[1] >> 1]

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        bound = self.trail_lim[lvl]
        for lit in reversed(self.trail[bound:]):
            var = lit >> 1
            self.val[lit] = 0
            self.val[lit ^ 1] = 0
            self.reason[var] = None
            heapq.heappush(self.order, (-self.activity[var], var))
        del self.trail[bound:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)
        if self._n_assumed > lvl:
            self._n_assumed = lvl

    def _decide(self) -> int | None:
        val = self.val
        order = self.order
        while order:
            neg_act, var = heapq.heappop(order)
            if val[var << 1] != 0:
                continue
            if -neg_act != self.activity[var]:
                heapq.heappush(order, (-self.activity[var], var))
                continue
            return var
        return None

    # -- main search ----------------------------------------------------------

    def solve(self, assumptions=()) -> bool:
        if not self.ok:
            return False
        self._cancel_until(0)
        self._n_assumed = 0
        self.order = [(-self.activity[v], v) for v in range(1, self.nvars + 1)
                      if self.val[v << 1] == 0]
        heapq.heapify(self.order)
        while self.units:
            u = self.units.pop()
            if self.val[u] == -1:
                self.ok = False
                return False
            if self.val[u] == 0:
                self._assign(u, None)
        if self._propagate() is not None:
            self.ok = False
            return False
        assumps = [self._ilit(a) for a in assumptions]
        restart_idx = 0
        limit = 100 * _luby(restart_idx)
        conflicts_here = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                conflicts_here += 1
                if not self.trail_lim:
                    self.ok = False
                    return False
                if len(self.trail_lim) <= self._n_assumed:
                    return False
                learnt, bt = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    if self.val[learnt[0]] == -1:
                        if not self.trail_lim:
                            self.ok = False
                        return False
                    if self.val[learnt[0]] == 0:
                        self._assign(learnt[0], None)
                else:
                    self.learned.append(learnt)
                    self.watches[learnt[0]].append(learnt)
                    self.watches[learnt[1]].append(learnt)
                    self._assign(learnt[0], learnt)
                self.var_inc *= 1.0 / 0.95
                if conflicts_here >= limit:
                    conflicts_here = 0
                    restart_idx += 1
                    limit = 100 * _luby(restart_idx)
                    self._cancel_until(self._n_assumed)
            else:
                lvl = len(self.trail_lim)
                if lvl < len(assumps):
                    a = assumps[lvl]
                    if self.val[a] == -1:
                        return False
                    self.trail_lim.append(len(self.trail))
                    self._n_assumed = len(self.trail_lim)
                    if self.val[a] == 0:
                        self._assign(a, None)
                    continue
                var = self._decide()
                if var is None:
                    return True
                self.decisions += 1
                self.trail_lim.append(len(self.trail))
                self._assign((var << 1) | (self.phase[var] ^ 1), None)

    def model_true(self, var: int) -> bool:
        return self.val[var << 1] == 1

    def model(self) -> list[bool]:
        return [False] + [self.val[v << 1] == 1 for v in range(1, self.nvars + 1)]

    @property
    def stats(self) -> dict:
        return {
            "vars": self.nvars,
            "clauses": len(self.clauses),
            "learned": len(self.learned),
            "decisions": self.decisions,
            "conflicts": self.conflicts,
            "propagations": self.propagations,
        }
