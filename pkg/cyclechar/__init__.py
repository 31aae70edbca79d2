from .cycles import GeneralizedChain, character, character_exponential, cycle, verify_theorem_one
from .cyclic import BBCochain, KClass, bb, pair
from .errors import AmbiguityError, ConventionError, CycleCharError, ScenarioError
from .fredholm import FredholmModule, even_module, fredholm_index, index_pairing, odd_module, sf_pairing
from .logger import add_console_handler, logger, setup_logger
from .runner import Report, run, set_default
from .scenario import load
from .selftest import selftest

__all__ = [
    "run",
    "set_default",
    "selftest",
    "load",
    "Report",
    "GeneralizedChain",
    "cycle",
    "character",
    "character_exponential",
    "verify_theorem_one",
    "BBCochain",
    "KClass",
    "bb",
    "pair",
    "FredholmModule",
    "even_module",
    "odd_module",
    "fredholm_index",
    "index_pairing",
    "sf_pairing",
    "CycleCharError",
    "ConventionError",
    "AmbiguityError",
    "ScenarioError",
    "setup_logger",
    "logger",
    "add_console_handler",
]
