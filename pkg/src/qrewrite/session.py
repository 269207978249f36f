"""Interactive derivation sessions: one current term, an undo stack, and
the full step history, replayable from the initial term at any point."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NoMatch
from .rules import Registry, RewriteStep, applicable, apply_rule
from .strategy import NormalizeConfig, normalize
from .syntax import DerivationDocument, render_canonical
from .terms import Term


@dataclass
class SessionState:
    initial: Term
    registry: Registry
    config: NormalizeConfig = field(default_factory=NormalizeConfig)

    def __post_init__(self):
        self.current: Term = self.initial
        self.steps: list[RewriteStep] = []
        # each undo entry restores one mutation (a step or a normalize burst)
        self.undo_stack: list[tuple[Term, int]] = []
        self.moves_version: int = 0
        self._moves: list[RewriteStep] | None = None

    # -- moves --------------------------------------------------------------

    def moves(self) -> list[RewriteStep]:
        if self._moves is None:
            self._moves = applicable(self.current, self.registry)
        return self._moves

    def _mutated(self) -> None:
        self.moves_version += 1
        self._moves = None

    # -- mutations ----------------------------------------------------------

    def apply_step(self, step: RewriteStep) -> None:
        new = apply_rule(self.current, step, self.registry)
        self.undo_stack.append((self.current, len(self.steps)))
        self.current = new
        self.steps.append(step)
        self._mutated()

    def apply_index(self, index: int) -> RewriteStep:
        moves = self.moves()
        if not 0 <= index < len(moves):
            raise IndexError(f"move index {index} out of range 0..{len(moves) - 1}")
        step = moves[index]
        self.apply_step(step)
        return step

    def undo(self) -> bool:
        if not self.undo_stack:
            return False
        term, nsteps = self.undo_stack.pop()
        self.current = term
        del self.steps[nsteps:]
        self._mutated()
        return True

    def run_normalize(self) -> int:
        final, deriv = normalize(self.current, self.registry, self.config)
        if not deriv.steps:
            return 0
        self.undo_stack.append((self.current, len(self.steps)))
        self.current = final
        self.steps.extend(deriv.steps)
        self._mutated()
        return len(deriv.steps)

    # -- export ---------------------------------------------------------------

    def derivation_document(self) -> DerivationDocument:
        return DerivationDocument(
            initial_text=render_canonical(self.initial),
            steps=list(self.steps),
            expect_text=render_canonical(self.current))
