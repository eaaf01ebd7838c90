"""Model checker driven by syntactic residuation.

Dynamic modalities enumerate the (finite) language of their expression in the
lexicographic order of the alphabet; updated models are derived letter by
letter and memoized per observed word, so formulas sharing observation
prefixes share the updates.
"""

from __future__ import annotations

from functools import lru_cache

from .formula import (
    And,
    Atom,
    Bottom,
    Box,
    Dia,
    Formula,
    Implies,
    Know,
    Not,
    Or,
    Poss,
    Top,
)
from .model import ExpectationModel, PointedModel, surviving, update
from .obsexpr import ObsExpr, Word, lang


@lru_cache(maxsize=4096)
def _observations(obs: ObsExpr, letters: tuple[str, ...]) -> tuple[Word, ...]:
    order = {a: i for i, a in enumerate(letters)}
    return tuple(sorted(lang(obs), key=lambda w: tuple(order[a] for a in w)))


class Checker:
    """Shares updated models across checks against one base model."""

    def __init__(self, model: ExpectationModel):
        self._models: dict[Word, ExpectationModel] = {(): model}
        self._letters = model.alphabet.letters

    def model_at(self, word: Word) -> ExpectationModel:
        cached = self._models.get(word)
        if cached is None:
            cached = update(self.model_at(word[:-1]), word[-1:])
            self._models[word] = cached
        return cached

    def holds(self, word: Word, state: str, phi: Formula) -> bool:
        model = self.model_at(word)
        if isinstance(phi, Top):
            return True
        if isinstance(phi, Bottom):
            return False
        if isinstance(phi, Atom):
            return phi.name in model.valuation[state]
        if isinstance(phi, Not):
            return not self.holds(word, state, phi.sub)
        if isinstance(phi, And):
            return self.holds(word, state, phi.left) and self.holds(word, state, phi.right)
        if isinstance(phi, Or):
            return self.holds(word, state, phi.left) or self.holds(word, state, phi.right)
        if isinstance(phi, Implies):
            return (not self.holds(word, state, phi.left)) or self.holds(word, state, phi.right)
        if isinstance(phi, Know):
            return all(self.holds(word, t, phi.sub) for t in sorted(model.cell(phi.agent, state)))
        if isinstance(phi, Poss):
            return any(self.holds(word, t, phi.sub) for t in sorted(model.cell(phi.agent, state)))
        if isinstance(phi, (Box, Dia)):
            universal = isinstance(phi, Box)
            for observed in _observations(phi.obs, self._letters):
                if not surviving(model, state, observed):
                    continue
                verdict = self.holds(word + observed, state, phi.sub)
                if universal and not verdict:
                    return False
                if not universal and verdict:
                    return True
            return universal
        raise TypeError(f"unknown formula node {phi!r}")


def check(model: ExpectationModel, state: str, phi: Formula) -> bool:
    """Truth of `phi` at `state`; the model is assumed valid."""
    if state not in model.states:
        raise ValueError(f"unknown state {state!r}")
    return Checker(model).holds((), state, phi)


def check_pointed_batch(pointed: PointedModel, phis: list[Formula]) -> list[bool]:
    """Element-wise `check` at the point, sharing update work across formulas."""
    checker = Checker(pointed.model)
    return [checker.holds((), pointed.point, phi) for phi in phis]
