"""Announcement logic: syntax, update, truth, and the word-fragment bridge.

Formulas of the word fragment (no unions in modalities) translate into
announcement formulas over fresh occurrence atoms ``occ_<letters>``: observing
one more letter ``a`` after history ``w`` becomes the public announcement of
``occ_wa``.  A pointed expectation model is matched by enriching its epistemic
skeleton with the occurrence atoms (``occ_w`` true exactly where some expected
observation extends ``w``) and dropping the expectations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

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
from .model import ExpectationModel
from .obsexpr import Concat, Epsilon, Letter, ObsExpr, Word, cache_hash, in_prefixes


class PalFormula:
    __slots__ = ()


@cache_hash
@dataclass(frozen=True)
class PalTop(PalFormula):
    pass


@cache_hash
@dataclass(frozen=True)
class PalBottom(PalFormula):
    pass


@cache_hash
@dataclass(frozen=True)
class PalAtom(PalFormula):
    name: str


@cache_hash
@dataclass(frozen=True)
class PalNot(PalFormula):
    sub: PalFormula


@cache_hash
@dataclass(frozen=True)
class PalAnd(PalFormula):
    left: PalFormula
    right: PalFormula


@cache_hash
@dataclass(frozen=True)
class PalOr(PalFormula):
    left: PalFormula
    right: PalFormula


@cache_hash
@dataclass(frozen=True)
class PalImplies(PalFormula):
    left: PalFormula
    right: PalFormula


@cache_hash
@dataclass(frozen=True)
class PalKnow(PalFormula):
    agent: str
    sub: PalFormula


@cache_hash
@dataclass(frozen=True)
class PalPoss(PalFormula):
    agent: str
    sub: PalFormula


@cache_hash
@dataclass(frozen=True)
class Announce(PalFormula):
    """[ann !] sub: if `ann` holds, `sub` holds after announcing it."""

    ann: PalFormula
    sub: PalFormula


@cache_hash
@dataclass(frozen=True)
class AnnounceDia(PalFormula):
    """<ann !> sub: `ann` holds and `sub` holds after announcing it."""

    ann: PalFormula
    sub: PalFormula


@dataclass(frozen=True)
class EpistemicModel:
    """S5 model without expectations; the target of enrichment."""

    agents: tuple[str, ...]
    atoms: tuple[str, ...]
    states: tuple[str, ...]
    partitions: Mapping[str, tuple[frozenset[str], ...]]
    valuation: Mapping[str, frozenset[str]]

    def cell(self, agent: str, state: str) -> frozenset[str]:
        for cell in self.partitions[agent]:
            if state in cell:
                return cell
        raise ValueError(f"state {state!r} missing from partition of agent {agent!r}")


def pal_update(model: EpistemicModel, phi: PalFormula) -> EpistemicModel:
    """Restrict the model to the states where `phi` holds."""
    keep = {s for s in model.states if pal_check(model, s, phi)}
    states = tuple(s for s in model.states if s in keep)
    partitions = {
        agent: tuple(cell & keep for cell in model.partitions[agent] if cell & keep)
        for agent in model.agents
    }
    return EpistemicModel(
        agents=model.agents,
        atoms=model.atoms,
        states=states,
        partitions=partitions,
        valuation={s: model.valuation[s] for s in states},
    )


def pal_check(model: EpistemicModel, state: str, phi: PalFormula) -> bool:
    if isinstance(phi, PalTop):
        return True
    if isinstance(phi, PalBottom):
        return False
    if isinstance(phi, PalAtom):
        return phi.name in model.valuation[state]
    if isinstance(phi, PalNot):
        return not pal_check(model, state, phi.sub)
    if isinstance(phi, PalAnd):
        return pal_check(model, state, phi.left) and pal_check(model, state, phi.right)
    if isinstance(phi, PalOr):
        return pal_check(model, state, phi.left) or pal_check(model, state, phi.right)
    if isinstance(phi, PalImplies):
        return (not pal_check(model, state, phi.left)) or pal_check(model, state, phi.right)
    if isinstance(phi, PalKnow):
        return all(pal_check(model, t, phi.sub) for t in model.cell(phi.agent, state))
    if isinstance(phi, PalPoss):
        return any(pal_check(model, t, phi.sub) for t in model.cell(phi.agent, state))
    if isinstance(phi, Announce):
        if not pal_check(model, state, phi.ann):
            return True
        return pal_check(pal_update(model, phi.ann), state, phi.sub)
    if isinstance(phi, AnnounceDia):
        if not pal_check(model, state, phi.ann):
            return False
        return pal_check(pal_update(model, phi.ann), state, phi.sub)
    raise TypeError(f"unknown announcement formula node {phi!r}")


# ---------------------------------------------------------------------------
# Word-fragment translation

def occurrence_atom(word: Word) -> str:
    """Canonical occurrence atom for a non-empty observation history."""
    if not word:
        raise ValueError("occurrence atoms exist only for non-empty histories")
    return "occ_" + "_".join(word)


def _modality_word(obs: ObsExpr) -> Word:
    """The single word denoted by a union-free expression; rejects others."""
    if isinstance(obs, Epsilon):
        return ()
    if isinstance(obs, Letter):
        return (obs.symbol,)
    if isinstance(obs, Concat):
        return _modality_word(obs.left) + _modality_word(obs.right)
    raise ValueError(f"modality is not a word: {obs!r}")


def translation_words(phi: Formula) -> frozenset[Word]:
    """All non-empty observation histories the translation announces."""
    out: set[Word] = set()

    def walk(psi: Formula, history: Word) -> None:
        if isinstance(psi, Not):
            walk(psi.sub, history)
        elif isinstance(psi, (And, Or, Implies)):
            walk(psi.left, history)
            walk(psi.right, history)
        elif isinstance(psi, (Know, Poss)):
            walk(psi.sub, history)
        elif isinstance(psi, (Box, Dia)):
            word = _modality_word(psi.obs)
            for i in range(1, len(word) + 1):
                out.add(history + word[:i])
            walk(psi.sub, history + word)

    walk(phi, ())
    return frozenset(out)


def translate(phi: Formula) -> PalFormula:
    """Word-fragment formula to announcement formula, starting from history eps.

    Multi-letter modalities are split letter by letter; a box becomes the
    announcement box of its occurrence atom, dually for diamonds.
    """
    return _translate(phi, ())


def _translate(phi: Formula, history: Word) -> PalFormula:
    if isinstance(phi, Top):
        return PalTop()
    if isinstance(phi, Bottom):
        return PalBottom()
    if isinstance(phi, Atom):
        return PalAtom(phi.name)
    if isinstance(phi, Not):
        return PalNot(_translate(phi.sub, history))
    if isinstance(phi, And):
        return PalAnd(_translate(phi.left, history), _translate(phi.right, history))
    if isinstance(phi, Or):
        return PalOr(_translate(phi.left, history), _translate(phi.right, history))
    if isinstance(phi, Implies):
        return PalImplies(_translate(phi.left, history), _translate(phi.right, history))
    if isinstance(phi, Know):
        return PalKnow(phi.agent, _translate(phi.sub, history))
    if isinstance(phi, Poss):
        return PalPoss(phi.agent, _translate(phi.sub, history))
    if isinstance(phi, (Box, Dia)):
        word = _modality_word(phi.obs)
        body = _translate(phi.sub, history + word)
        shape = Announce if isinstance(phi, Box) else AnnounceDia
        for i in range(len(word), 0, -1):
            body = shape(PalAtom(occurrence_atom(history + word[:i])), body)
        return body
    raise TypeError(f"unknown formula node {phi!r}")


def enrich_model(model: ExpectationModel, words: frozenset[Word]) -> EpistemicModel:
    """Epistemic skeleton with occurrence atoms replacing the expectations."""
    occurrence = tuple(sorted(occurrence_atom(w) for w in words))
    valuation = {
        s: model.valuation[s]
        | frozenset(
            occurrence_atom(w) for w in words if in_prefixes(model.exp[s], w)
        )
        for s in model.states
    }
    return EpistemicModel(
        agents=model.agents,
        atoms=model.atoms + occurrence,
        states=model.states,
        partitions={a: model.partitions[a] for a in model.agents},
        valuation=valuation,
    )


def pal_to_text(phi: PalFormula) -> str:
    return _render(phi, 0)


def _render(phi: PalFormula, level: int) -> str:
    # mirrors the base grammar with `[ann !] psi` / `<ann !> psi` modalities
    if isinstance(phi, PalTop):
        return "true"
    if isinstance(phi, PalBottom):
        return "false"
    if isinstance(phi, PalAtom):
        return phi.name
    if isinstance(phi, PalImplies):
        text = f"{_render(phi.left, 2)} -> {_render(phi.right, 1)}"
        return f"({text})" if level > 1 else text
    if isinstance(phi, PalOr):
        text = f"{_render(phi.left, 2)} | {_render(phi.right, 3)}"
        return f"({text})" if level > 2 else text
    if isinstance(phi, PalAnd):
        text = f"{_render(phi.left, 3)} & {_render(phi.right, 4)}"
        return f"({text})" if level > 3 else text
    if isinstance(phi, PalNot):
        return f"~{_render(phi.sub, 4)}"
    if isinstance(phi, PalKnow):
        return f"K {phi.agent} {_render(phi.sub, 4)}"
    if isinstance(phi, PalPoss):
        return f"Khat {phi.agent} {_render(phi.sub, 4)}"
    if isinstance(phi, Announce):
        return f"[{_render(phi.ann, 0)} !] {_render(phi.sub, 4)}"
    assert isinstance(phi, AnnounceDia)
    return f"<{_render(phi.ann, 0)} !> {_render(phi.sub, 4)}"
