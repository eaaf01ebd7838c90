"""Epistemic expectation models and update by observation.

A model is an S5 multi-agent Kripke structure whose indistinguishability
relations are stored as partitions (so reflexivity, symmetry and transitivity
hold by construction), plus one observation expression per state denoting the
non-empty set of observations expected there.  Updating by a word keeps the
states whose expectation has a word extending the observation, and residuates
the survivors' expectations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .obsexpr import (
    Alphabet,
    ObsExpr,
    ParseError,
    TokenStream,
    Word,
    in_prefixes,
    is_empty,
    letters_in,
    obsexpr_to_text,
    parse_obs_tokens,
    residual,
)


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ExpectationModel:
    alphabet: Alphabet
    agents: tuple[str, ...]
    atoms: tuple[str, ...]
    states: tuple[str, ...]
    partitions: Mapping[str, tuple[frozenset[str], ...]]
    valuation: Mapping[str, frozenset[str]]
    exp: Mapping[str, ObsExpr]

    def cell(self, agent: str, state: str) -> frozenset[str]:
        for cell in self.partitions[agent]:
            if state in cell:
                return cell
        raise ModelError(f"state {state!r} missing from partition of agent {agent!r}")


@dataclass(frozen=True)
class PointedModel:
    model: ExpectationModel
    point: str

    def __post_init__(self) -> None:
        if self.point not in self.model.states:
            raise ModelError(f"point {self.point!r} is not a state of the model")


def validate(model: ExpectationModel) -> list[str]:
    """All invariant violations, empty when the model is well-formed.

    A model with zero states is accepted: it arises as an intermediate of
    update and is never evaluated against a point.
    """
    problems: list[str] = []
    states = model.states
    if len(set(states)) != len(states):
        problems.append("duplicate state ids")
    state_set = set(states)
    for agent in model.agents:
        if agent not in model.partitions:
            problems.append(f"agent {agent!r} has no partition")
            continue
        seen: set[str] = set()
        for cell in model.partitions[agent]:
            if not cell:
                problems.append(f"agent {agent!r} has an empty partition cell")
            overlap = seen & cell
            if overlap:
                problems.append(f"agent {agent!r} partition cells overlap on {sorted(overlap)}")
            seen |= cell
        if seen != state_set:
            missing = sorted(state_set - seen)
            extra = sorted(seen - state_set)
            if missing:
                problems.append(f"agent {agent!r} partition misses states {missing}")
            if extra:
                problems.append(f"agent {agent!r} partition mentions unknown states {extra}")
    for extra_agent in set(model.partitions) - set(model.agents):
        problems.append(f"partition given for undeclared agent {extra_agent!r}")
    for state in states:
        if state not in model.valuation:
            problems.append(f"state {state!r} has no valuation")
        else:
            unknown = model.valuation[state] - set(model.atoms)
            if unknown:
                problems.append(f"state {state!r} valuation uses undeclared atoms {sorted(unknown)}")
        if state not in model.exp:
            problems.append(f"state {state!r} has no expectation")
            continue
        expr = model.exp[state]
        stray = letters_in(expr) - set(model.alphabet.letters)
        if stray:
            problems.append(f"state {state!r} expectation uses undeclared letters {sorted(stray)}")
        if is_empty(expr):
            problems.append(f"state {state!r} has an empty expectation")
    return problems


def require_valid(model: ExpectationModel) -> ExpectationModel:
    problems = validate(model)
    if problems:
        raise ModelError("; ".join(problems))
    return model


def surviving(model: ExpectationModel, state: str, word: Word) -> bool:
    """True iff the state's expectation has a word extending `word`."""
    return in_prefixes(model.exp[state], word)


def update(model: ExpectationModel, word: Word) -> ExpectationModel:
    """Restrict to the states where `word` could have been observed.

    The result may have zero states; callers quantifying over observations
    never evaluate it against a dropped point.
    """
    survivors = tuple(s for s in model.states if surviving(model, s, word))
    keep = set(survivors)
    partitions = {
        agent: tuple(
            cell & keep for cell in model.partitions[agent] if cell & keep
        )
        for agent in model.agents
    }
    return ExpectationModel(
        alphabet=model.alphabet,
        agents=model.agents,
        atoms=model.atoms,
        states=survivors,
        partitions=partitions,
        valuation={s: model.valuation[s] for s in survivors},
        exp={s: residual(model.exp[s], word) for s in survivors},
    )


# ---------------------------------------------------------------------------
# Model text format (line oriented)
#
#   alphabet: l d r u
#   agents: alice bob
#   atoms: debris power
#   state s props debris exp (r + u)^<=3
#   rel alice: {s t u}
#   rel bob: {s t} {u}
#   point: t
#
# `props` may be empty.  The `point:` line is optional.

def parse_model(text: str) -> tuple[ExpectationModel, str | None]:
    alphabet: Alphabet | None = None
    agents: tuple[str, ...] | None = None
    atoms: tuple[str, ...] = ()
    states: list[str] = []
    valuation: dict[str, frozenset[str]] = {}
    exp: dict[str, ObsExpr] = {}
    partitions: dict[str, tuple[frozenset[str], ...]] = {}
    point: str | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("alphabet:"):
                alphabet = Alphabet(tuple(line[len("alphabet:"):].split()))
            elif line.startswith("agents:"):
                agents = tuple(line[len("agents:"):].split())
            elif line.startswith("atoms:"):
                atoms = tuple(line[len("atoms:"):].split())
            elif line.startswith("state "):
                if alphabet is None:
                    raise ModelError("alphabet must be declared before states")
                m = re.fullmatch(r"state\s+(\S+)\s+props\s*(.*?)\s*exp\s+(.*)", line)
                if m is None:
                    raise ModelError("state line must be `state <id> props <atoms...> exp <expr>`")
                name, props_text, expr_text = m.group(1), m.group(2), m.group(3)
                if name in valuation:
                    raise ModelError(f"duplicate state {name!r}")
                states.append(name)
                valuation[name] = frozenset(props_text.split())
                stream = TokenStream(expr_text)
                expr = parse_obs_tokens(stream, alphabet)
                if stream.peek().kind != "end":
                    raise ModelError(f"trailing input in expectation of state {name!r}")
                exp[name] = expr
            elif line.startswith("rel "):
                rest = line[len("rel "):]
                agent, _, cells_text = rest.partition(":")
                agent = agent.strip()
                if agent in partitions:
                    raise ModelError(f"duplicate rel line for agent {agent!r}")
                cells: list[frozenset[str]] = []
                for chunk in cells_text.split("}"):
                    chunk = chunk.strip()
                    if not chunk:
                        continue
                    if not chunk.startswith("{"):
                        raise ModelError("partition cells must be written {s t ...}")
                    cells.append(frozenset(chunk[1:].split()))
                partitions[agent] = tuple(cells)
            elif line.startswith("point:"):
                point = line[len("point:"):].strip()
            else:
                raise ModelError(f"unrecognized line: {line!r}")
        except (ParseError, ValueError) as exc:
            raise ModelError(f"line {lineno}: {exc}") from exc

    if alphabet is None:
        raise ModelError("missing alphabet declaration")
    if agents is None:
        agents = tuple(sorted(partitions))
    model = ExpectationModel(
        alphabet=alphabet,
        agents=agents,
        atoms=atoms if atoms else tuple(sorted(set().union(*valuation.values()) if valuation else set())),
        states=tuple(states),
        partitions=partitions,
        valuation=valuation,
        exp=exp,
    )
    require_valid(model)
    if point is not None and point not in model.states:
        raise ModelError(f"point {point!r} is not a declared state")
    return model, point


def model_to_text(model: ExpectationModel, point: str | None = None) -> str:
    lines = [
        "alphabet: " + " ".join(model.alphabet.letters),
        "agents: " + " ".join(model.agents),
        "atoms: " + " ".join(model.atoms),
    ]
    for state in model.states:
        props = " ".join(sorted(model.valuation[state]))
        lines.append(f"state {state} props {props} exp {obsexpr_to_text(model.exp[state])}")
    for agent in model.agents:
        cells = " ".join("{" + " ".join(sorted(cell)) + "}" for cell in model.partitions[agent])
        lines.append(f"rel {agent}: {cells}")
    if point is not None:
        lines.append(f"point: {point}")
    return "\n".join(lines) + "\n"
