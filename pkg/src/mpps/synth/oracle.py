"""Independent enumerative oracle for the synthesis objective.

Searches all programs of exactly length k, tracking per-world reachable
abstract-state sets through the component transformers; a world counts as
solved when some chained state sequence ends in a goal state.  Memoization on
the tuple of reachable sets collapses the exponential program space on the
small instances this is meant for.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..abstraction import eval_goal
from ..errors import BudgetExceeded
from ..prototypes import successors
from .encoding import SynthesisProblem


def _skey(s):
    # deterministic sort key for abstract states
    if hasattr(s, "n_zones"):
        return (s.n_zones, s.agent_zone, s.boundaries, s.zone_resources,
                s.zone_workshops, s.inventory)
    return (s.colors, s.boxes, s.loose, s.held)


@dataclass
class OracleResult:
    program: list | None
    solved: int
    objective: float
    nodes: int


class _Search:
    def __init__(self, problem: SynthesisProblem, k: int, budget: int):
        self.problem = problem
        self.k = k
        self.budget = budget
        self.nodes = 0
        self.step_cache: dict = {}
        self.memo: dict = {}
        self.goal_cache: dict = {}

    def goal_weight(self, sets) -> int:
        total = 0
        for states in sets:
            hit = self.goal_cache.get(states)
            if hit is None:
                hit = any(eval_goal(self.problem.goal, s) for s in states)
                self.goal_cache[states] = hit
            total += 1 if hit else 0
        return total

    def advance(self, states: frozenset, proto) -> frozenset:
        key = (proto.pid, states)
        out = self.step_cache.get(key)
        if out is None:
            acc = set()
            for s in sorted(states, key=_skey):
                acc.update(successors(proto, s, self.problem.recipes))
            out = frozenset(acc)
            self.step_cache[key] = out
        return out

    def value(self, depth: int, sets: tuple) -> int:
        if depth == self.k:
            return self.goal_weight(sets)
        if all(not s for s in sets):
            return 0
        key = (depth, sets)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceeded(f"oracle node budget {self.budget} exceeded")
        best = 0
        for proto in self.problem.roster:
            child = tuple(self.advance(s, proto) for s in sets)
            v = self.value(depth + 1, child)
            if v > best:
                best = v
                if best == len(sets):
                    break
        self.memo[key] = best
        return best

    def extract(self, sets: tuple, target: int) -> list:
        program = []
        for depth in range(self.k):
            for proto in self.problem.roster:
                child = tuple(self.advance(s, proto) for s in sets)
                if self.value(depth + 1, child) == target:
                    program.append(proto)
                    sets = child
                    break
            else:  # pragma: no cover
                raise AssertionError("memoized optimum not reproducible")
        return program


def enumerate_oracle(problem: SynthesisProblem, k: int,
                     budget: int = 2_000_000) -> OracleResult:
    """Best length-k program and how many sampled worlds it solves."""
    search = _Search(problem, k, budget)
    init = tuple(frozenset([w]) for w in problem.worlds)
    best = search.value(0, init)
    program = search.extract(init, best) if best > 0 else None
    return OracleResult(program=program, solved=best,
                        objective=best / max(1, problem.m), nodes=search.nodes)


def oracle_best_upto(problem: SynthesisProblem, k_max: int,
                     budget: int = 2_000_000) -> OracleResult:
    """Best objective over program lengths 1..k_max (ties to shorter k)."""
    best = OracleResult(program=None, solved=0, objective=0.0, nodes=0)
    for k in range(1, k_max + 1):
        res = enumerate_oracle(problem, k, budget)
        if res.solved > best.solved:
            best = res
        if best.solved == problem.m:
            break
    return best
