from .encoding import (
    GroundedEncoding, SynthesisProblem, encode, make_problem, parse_wcnf,
)
from .maxsat import MaxSatOutcome, solve_maxsat
from .oracle import OracleResult, enumerate_oracle, oracle_best_upto
from .optimistic import (
    OptBoxState, OptCraftState, initial_optimistic, optimistic_goal,
    optimistic_successors, synthesize_optimistic,
)
from .sat import Solver
from .synthesize import SynthesisResult, certify, synthesize

__all__ = [
    "GroundedEncoding", "MaxSatOutcome", "OptBoxState", "OptCraftState",
    "OracleResult", "Solver", "SynthesisProblem", "SynthesisResult",
    "certify", "encode", "enumerate_oracle", "initial_optimistic",
    "make_problem", "optimistic_goal", "optimistic_successors",
    "oracle_best_upto", "parse_wcnf", "solve_maxsat", "synthesize",
    "synthesize_optimistic",
]
