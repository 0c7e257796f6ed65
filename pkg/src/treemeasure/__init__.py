"""Coin-flipping measure of tree languages recognized by game automata."""

from .automata import (AutomatonError, GameAutomaton, ParseError, Transition, builtin, language_linf,
                       language_ln, language_w, normalize_distinct_children, parse_automaton,
                       render_automaton, validate)
from .fixpoint import FixpointSystem, build_system, classify, simplify
from .mbp import MBP, build_mbp
from .numeric import NumericConfig, solve_numeric
from .pipeline import Pipeline, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "AutomatonError", "FixpointSystem", "GameAutomaton", "MBP", "NumericConfig", "ParseError", "Pipeline",
    "Transition", "build_mbp", "build_system", "builtin", "classify", "language_linf", "language_ln",
    "language_w", "normalize_distinct_children", "parse_automaton", "render_automaton", "run_pipeline",
    "simplify", "solve_numeric", "validate",
]
