"""pdeduce: an online partial deduction engine for pure logic programs."""

from .globalctl import GlobalConfig, SpecResult, SpecializationError, specialize
from .parser import ParseError, parse_goal, parse_program, parse_term
from .pretty import pp_clause, pp_goal, pp_program, pp_term
from .sld import LocalConfig, RunResult, leaves, resultants, run_query, unfold

__all__ = [
    "GlobalConfig",
    "LocalConfig",
    "ParseError",
    "RunResult",
    "SpecResult",
    "SpecializationError",
    "leaves",
    "parse_goal",
    "parse_program",
    "parse_term",
    "pp_clause",
    "pp_goal",
    "pp_program",
    "pp_term",
    "resultants",
    "run_query",
    "specialize",
    "unfold",
]
