"""Automaton to simplified equation system, keeping every intermediate stage."""

from __future__ import annotations

from dataclasses import dataclass

from .automata import GameAutomaton
from .fixpoint import FixpointSystem, SystemClass, build_system, classify, simplify
from .mbp import MBP, build_mbp, prob_state
from .poly import Poly


@dataclass(frozen=True)
class Pipeline:
    automaton: GameAutomaton
    mbp: MBP
    raw: FixpointSystem
    system: FixpointSystem
    classification: SystemClass

    @property
    def start(self) -> str:
        """MBP state whose value is the measure of the language."""
        return prob_state(self.automaton.initial)

    @property
    def target_binding(self) -> Poly:
        """The start state's value as a polynomial over the simplified variables."""
        return self.system.bindings[self.start]

    def value_from(self, values):
        """Start-state value given a solution of the simplified system."""
        return self.target_binding.evaluate(values)


def run_pipeline(a: GameAutomaton) -> Pipeline:
    m = build_mbp(a)
    raw = build_system(m, target=prob_state(a.initial))
    sys = simplify(raw)
    return Pipeline(a, m, raw, sys, classify(sys))
