"""Iterative-deepening synthesis driver with independent certification."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..abstraction import eval_goal
from ..errors import MppsError, NoProgramFound
from ..prototypes import Prototype, successors
from .encoding import GroundedEncoding, SynthesisProblem, encode
from .maxsat import solve_maxsat


@dataclass
class SynthesisResult:
    program: list[Prototype]
    objective: float
    satisfied: list[bool]          # per sampled world
    k: int
    optimal: bool = True
    stats: dict = field(default_factory=dict)

    @property
    def pids(self) -> list[str]:
        return [p.pid for p in self.program]


def certify(problem: SynthesisProblem, program: list[Prototype]) -> list[bool]:
    """Re-simulate the program on every world through the transformers."""
    flags = []
    for world in problem.worlds:
        states = {world}
        for proto in program:
            nxt = set()
            for s in states:
                nxt.update(successors(proto, s, problem.recipes))
            states = nxt
            if not states:
                break
        flags.append(any(eval_goal(problem.goal, s) for s in states))
    return flags


def synthesize(problem: SynthesisProblem, group_worlds: bool = True,
               lex_program: bool = True, timeout: float | None = None,
               collect_wcnf: list | None = None) -> SynthesisResult:
    """Search lengths 1..k_max; stop at the first program whose certified
    objective reaches the threshold, else return the best program found.

    Raises NoProgramFound when nothing solves any world at any length."""
    t0 = time.perf_counter()
    best: SynthesisResult | None = None
    for k in range(1, problem.k_max + 1):
        enc = encode(problem, k, group_worlds=group_worlds)
        if collect_wcnf is not None:
            collect_wcnf.append(enc.to_wcnf())
        remaining = None if timeout is None else timeout - (time.perf_counter() - t0)
        outcome = solve_maxsat(enc, lex_program=lex_program, timeout=remaining)
        program = enc.program_of_model(outcome.model)
        flags = certify(problem, program)
        cert_weight = sum(flags)
        if cert_weight != outcome.weight:
            raise MppsError(
                f"certification mismatch at k={k}: solver claims "
                f"{outcome.weight}, re-simulation gives {cert_weight} "
                f"for {[p.pid for p in program]}")
        result = SynthesisResult(
            program=program,
            objective=cert_weight / problem.m,
            satisfied=flags,
            k=k,
            optimal=outcome.optimal,
            stats={**outcome.stats, "k": k,
                   "hard_clauses": len(enc.hard), "vars": enc.nvars,
                   "total_wall_time": time.perf_counter() - t0},
        )
        if best is None or result.objective > best.objective:
            best = result
        if result.objective >= problem.theta_obj:
            return result
        if timeout is not None and time.perf_counter() - t0 > timeout:
            best.optimal = False
            break
    assert best is not None
    if best.objective == 0.0:
        raise NoProgramFound(
            f"no program of length <= {problem.k_max} solves any world")
    return best
