"""Brute-force bounded-model satisfiability search and a word-set evaluator.

The evaluator here works on explicit finite word languages: update by an
observation strips prefixes, survival is a prefix test against the word set.
It shares no code with the expression-based checker, which makes it the
ground truth the rest of the package is cross-validated against.

`bounded_sat` enumerates every candidate model within the given bounds
(canonically ordered states, set partitions in restricted-growth order,
expectations as sorted non-empty word sets) and returns the first pointed
model satisfying the formula.  A negative answer only means no model exists
*within the bounds*; it is never an unsatisfiability proof.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

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
from .model import ExpectationModel, PointedModel, require_valid
from .obsexpr import Alphabet, ObsExpr, Word, lang, sum_of_words


class SearchSpaceTooLarge(ValueError):
    def __init__(self, space: int, cap: int):
        self.space = space
        self.cap = cap
        super().__init__(f"search space has {space} candidate models, cap is {cap}")


@dataclass(frozen=True)
class SearchBounds:
    max_states: int
    max_word_len: int
    max_words: int
    alphabet: Alphabet
    agents: tuple[str, ...]
    atoms: tuple[str, ...]

    def __post_init__(self) -> None:
        if min(self.max_states, self.max_word_len + 1, self.max_words) < 1:
            raise ValueError("bounds must be at least 1 (word length at least 0)")


@dataclass(frozen=True)
class OracleResult:
    status: str  # "sat" | "no-model-within-bounds"
    witness: PointedModel | None
    models_tried: int


# ---------------------------------------------------------------------------
# Word-set models

class SetModel:
    """Model whose expectations are explicit word sets."""

    __slots__ = ("states", "cells", "valuation", "languages")

    def __init__(
        self,
        states: tuple[str, ...],
        cells: dict[str, dict[str, frozenset[str]]],
        valuation: dict[str, frozenset[str]],
        languages: dict[str, frozenset[Word]],
    ):
        self.states = states
        self.cells = cells
        self.valuation = valuation
        self.languages = languages


def word_set_model(model: ExpectationModel) -> SetModel:
    cells = {
        agent: {s: model.cell(agent, s) for s in model.states}
        for agent in model.agents
    }
    return SetModel(
        states=model.states,
        cells=cells,
        valuation={s: model.valuation[s] for s in model.states},
        languages={s: lang(model.exp[s]) for s in model.states},
    )


def _survives(language: frozenset[Word], word: Word) -> bool:
    n = len(word)
    return any(v[:n] == word for v in language)


def _strip(language: frozenset[Word], word: Word) -> frozenset[Word]:
    n = len(word)
    return frozenset(v[n:] for v in language if v[:n] == word)


class SetEvaluator:
    """Evaluates formulas over a word-set model, one state set at a time."""

    def __init__(self, root: SetModel):
        self.root = root
        self._models: dict[Word, SetModel] = {(): root}
        self._sat: dict[tuple[Word, Formula], frozenset[str]] = {}

    def model_at(self, word: Word) -> SetModel:
        cached = self._models.get(word)
        if cached is not None:
            return cached
        parent = self.model_at(word[:-1])
        last = word[-1:]
        states = tuple(s for s in parent.states if _survives(parent.languages[s], last))
        keep = set(states)
        cells = {
            agent: {s: parent.cells[agent][s] & keep for s in states}
            for agent in parent.cells
        }
        model = SetModel(
            states=states,
            cells=cells,
            valuation={s: parent.valuation[s] for s in states},
            languages={s: _strip(parent.languages[s], last) for s in states},
        )
        self._models[word] = model
        return model

    def sat_states(self, word: Word, phi: Formula) -> frozenset[str]:
        key = (word, phi)
        cached = self._sat.get(key)
        if cached is not None:
            return cached
        model = self.model_at(word)
        states = set(model.states)
        if isinstance(phi, Top):
            result = frozenset(states)
        elif isinstance(phi, Bottom):
            result = frozenset()
        elif isinstance(phi, Atom):
            result = frozenset(s for s in states if phi.name in model.valuation[s])
        elif isinstance(phi, Not):
            result = frozenset(states - self.sat_states(word, phi.sub))
        elif isinstance(phi, And):
            result = self.sat_states(word, phi.left) & self.sat_states(word, phi.right)
        elif isinstance(phi, Or):
            result = self.sat_states(word, phi.left) | self.sat_states(word, phi.right)
        elif isinstance(phi, Implies):
            result = frozenset(states - self.sat_states(word, phi.left)) | self.sat_states(
                word, phi.right
            )
        elif isinstance(phi, Know):
            sub = self.sat_states(word, phi.sub)
            result = frozenset(s for s in states if model.cells[phi.agent][s] <= sub)
        elif isinstance(phi, Poss):
            sub = self.sat_states(word, phi.sub)
            result = frozenset(s for s in states if model.cells[phi.agent][s] & sub)
        elif isinstance(phi, (Box, Dia)):
            observations = sorted(lang(phi.obs))
            universal = isinstance(phi, Box)
            out = set()
            for s in states:
                verdicts = [
                    s in self.sat_states(word + w, phi.sub)
                    for w in observations
                    if _survives(model.languages[s], w)
                ]
                if all(verdicts) if universal else any(verdicts):
                    out.add(s)
            result = frozenset(out)
        else:  # pragma: no cover - exhaustive over the AST
            raise TypeError(f"unknown formula node {phi!r}")
        self._sat[key] = result
        return result


def naive_check(model: ExpectationModel, state: str, phi: Formula) -> bool:
    """Truth at a pointed model, via language enumeration only."""
    evaluator = SetEvaluator(word_set_model(model))
    return state in evaluator.sat_states((), phi)


# ---------------------------------------------------------------------------
# Bounded enumeration

def _set_partitions(items: tuple[str, ...]) -> list[tuple[frozenset[str], ...]]:
    """All partitions, in restricted-growth (canonical) order."""
    if not items:
        return [()]
    out: list[tuple[frozenset[str], ...]] = []

    def extend(index: int, cells: list[list[str]]) -> None:
        if index == len(items):
            out.append(tuple(frozenset(c) for c in cells))
            return
        item = items[index]
        for cell in cells:
            cell.append(item)
            extend(index + 1, cells)
            cell.pop()
        cells.append([item])
        extend(index + 1, cells)
        cells.pop()

    extend(0, [])
    return out


def word_pool(alphabet: Alphabet, max_len: int) -> list[Word]:
    pool: list[Word] = []
    for length in range(max_len + 1):
        pool.extend(itertools.product(alphabet.letters, repeat=length))
    return pool


def _expectation_options(pool: list[Word], max_words: int) -> list[frozenset[Word]]:
    options: list[frozenset[Word]] = []
    for count in range(1, max_words + 1):
        options.extend(frozenset(c) for c in itertools.combinations(pool, count))
    return options


def search_space_size(bounds: SearchBounds) -> int:
    pool = len(word_pool(bounds.alphabet, bounds.max_word_len))
    expectations = sum(math.comb(pool, j) for j in range(1, bounds.max_words + 1))
    total = 0
    for k in range(1, bounds.max_states + 1):
        partitions = len(_set_partitions(tuple(map(str, range(k)))))
        total += (
            partitions ** len(bounds.agents)
            * (2 ** len(bounds.atoms)) ** k
            * expectations**k
        )
    return total


def candidate_set_models(bounds: SearchBounds):
    """Yield every candidate model within bounds, deterministically ordered."""
    pool = word_pool(bounds.alphabet, bounds.max_word_len)
    expectations = _expectation_options(pool, bounds.max_words)
    valuations = [frozenset(c) for n in range(len(bounds.atoms) + 1)
                  for c in itertools.combinations(bounds.atoms, n)]
    for k in range(1, bounds.max_states + 1):
        states = tuple(f"s{i}" for i in range(k))
        partition_choices = _set_partitions(states)
        for partition_combo in itertools.product(partition_choices, repeat=len(bounds.agents)):
            cells = {
                agent: {s: next(c for c in partition if s in c) for s in states}
                for agent, partition in zip(bounds.agents, partition_combo)
            }
            for val_combo in itertools.product(valuations, repeat=k):
                valuation = dict(zip(states, val_combo))
                for exp_combo in itertools.product(expectations, repeat=k):
                    yield SetModel(
                        states=states,
                        cells={a: dict(m) for a, m in cells.items()},
                        valuation=valuation,
                        languages=dict(zip(states, exp_combo)),
                    )


def set_model_to_expectation_model(sm: SetModel, bounds: SearchBounds) -> ExpectationModel:
    partitions: dict[str, tuple[frozenset[str], ...]] = {}
    for agent in bounds.agents:
        seen: list[frozenset[str]] = []
        for s in sm.states:
            cell = sm.cells[agent][s]
            if cell not in seen:
                seen.append(cell)
        partitions[agent] = tuple(seen)
    model = ExpectationModel(
        alphabet=bounds.alphabet,
        agents=bounds.agents,
        atoms=bounds.atoms,
        states=sm.states,
        partitions=partitions,
        valuation=dict(sm.valuation),
        exp={s: sum_of_words(sm.languages[s]) for s in sm.states},
    )
    return require_valid(model)


def bounded_sat(
    phi: Formula,
    bounds: SearchBounds,
    space_cap: int = 10_000_000,
) -> OracleResult:
    """Search every model within bounds for a satisfying pointed model."""
    space = search_space_size(bounds)
    if space > space_cap:
        raise SearchSpaceTooLarge(space, space_cap)
    tried = 0
    for sm in candidate_set_models(bounds):
        tried += 1
        evaluator = SetEvaluator(sm)
        holds = evaluator.sat_states((), phi)
        if holds:
            point = next(s for s in sm.states if s in holds)
            witness = PointedModel(set_model_to_expectation_model(sm, bounds), point)
            return OracleResult("sat", witness, tried)
    return OracleResult("no-model-within-bounds", None, tried)
