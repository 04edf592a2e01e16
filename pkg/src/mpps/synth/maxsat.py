"""Exact MaxSAT on grounded encodings: linear search over the objective bound
with an incremental SAT core, plus lexicographic program extraction."""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations

from ..errors import MppsError
from .encoding import GroundedEncoding
from .sat import Solver


@dataclass
class MaxSatOutcome:
    model: list[bool]
    weight: int                 # satisfied soft weight (worlds solved)
    optimal: bool
    stats: dict


def _achievable_weights(weights: list[int]) -> list[int]:
    sums = {0}
    for w in weights:
        sums |= {s + w for s in sums}
    return sorted(sums, reverse=True)


def _at_least_clauses(weights: list[int], y_vars: list[int], bound: int,
                      guard: int) -> list[list[int]]:
    """CNF for sum(w_j * y_j) >= bound, active when ``guard`` holds.

    For every subset whose complement cannot reach the bound, at least one
    member must be true.  Fine for the handful of sampled worlds used here."""
    n = len(weights)
    total = sum(weights)
    out = []
    for r in range(n + 1):
        for subset in combinations(range(n), r):
            outside = total - sum(weights[j] for j in subset)
            if outside < bound:
                # minimality: dropping any member must break the property
                if all(outside + weights[j] >= bound for j in subset):
                    out.append([-guard] + [y_vars[j] for j in subset])
    return out


def solve_maxsat(enc: GroundedEncoding, lex_program: bool = True,
                 timeout: float | None = None) -> MaxSatOutcome:
    """Maximize satisfied soft weight; exact unless the timeout trips.

    The returned model always satisfies all hard clauses; with ``lex_program``
    the selector assignment is additionally the lexicographically least one
    among objective-optimal programs (roster order per slot)."""
    t0 = time.perf_counter()
    solver = Solver()
    solver.new_vars(enc.nvars)
    for cl in enc.hard:
        solver.add_clause(cl)
    weights = [w for w, _ in enc.soft]
    y_vars = [y for _, y in enc.soft]
    if not solver.solve():
        raise MppsError("hard clauses unsatisfiable; encoding bug")
    best_model = solver.model()
    best_weight = sum(w for w, y in enc.soft if best_model[y])
    optimal = True
    bound_guard: dict[int, int] = {}

    def guard_for(bound: int) -> int:
        g = bound_guard.get(bound)
        if g is None:
            g = solver.new_var()
            bound_guard[bound] = g
            for cl in _at_least_clauses(weights, y_vars, bound, g):
                solver.add_clause(cl)
        return g

    for bound in _achievable_weights(weights):
        if bound <= best_weight:
            break
        if timeout is not None and time.perf_counter() - t0 > timeout:
            optimal = False
            break
        if solver.solve([guard_for(bound)]):
            best_model = solver.model()
            best_weight = bound
            break
    # lexicographic extraction under the achieved bound
    if lex_program:
        assumptions = [guard_for(best_weight)] if best_weight > 0 else []
        fixed: list[int] = []
        for t in range(enc.k):
            for c, var in enumerate(enc.sel[t]):
                if best_model[var]:
                    witness = c
                    break
            for c in range(witness + 1):
                var = enc.sel[t][c]
                if c == witness:
                    fixed.append(var)
                    break
                if timeout is not None and time.perf_counter() - t0 > timeout:
                    fixed.append(enc.sel[t][witness])
                    optimal = False
                    break
                if solver.solve(assumptions + fixed + [var]):
                    best_model = solver.model()
                    fixed.append(var)
                    # the new model may pick smaller components downstream
                    break
        if solver.solve(assumptions + fixed):
            best_model = solver.model()
        else:  # pragma: no cover - fixed literals came from models
            raise MppsError("lexicographic extraction lost satisfiability")
    stats = dict(solver.stats)
    stats["wall_time"] = time.perf_counter() - t0
    return MaxSatOutcome(model=best_model, weight=best_weight,
                         optimal=optimal, stats=stats)
