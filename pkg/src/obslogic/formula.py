"""Formula syntax for the observation logic, with parser, NNF and closure.

Formulas combine the propositional connectives, knowledge operators ``K i``
and ``Khat i`` per agent, and dynamic modalities ``[pi]`` / ``<pi>`` indexed
by star-free observation expressions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .obsexpr import (
    RESERVED_WORDS,
    cache_hash,
    Alphabet,
    Concat,
    Epsilon,
    ObsExpr,
    TokenStream,
    UndeclaredSymbolError,
    Union,
    _IDENT_RE,
    is_empty,
    letter_residual,
    letters_in,
    obsexpr_to_text,
    parse_obs_tokens,
    simplify,
)


class Formula:
    __slots__ = ()


@cache_hash
@dataclass(frozen=True)
class Top(Formula):
    pass


@cache_hash
@dataclass(frozen=True)
class Bottom(Formula):
    pass


@cache_hash
@dataclass(frozen=True)
class Atom(Formula):
    name: str


@cache_hash
@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@cache_hash
@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@cache_hash
@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@cache_hash
@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@cache_hash
@dataclass(frozen=True)
class Know(Formula):
    agent: str
    sub: Formula


@cache_hash
@dataclass(frozen=True)
class Poss(Formula):
    """The dual of Know: the agent considers a state satisfying `sub` possible."""

    agent: str
    sub: Formula


@cache_hash
@dataclass(frozen=True)
class Box(Formula):
    obs: ObsExpr
    sub: Formula


@cache_hash
@dataclass(frozen=True)
class Dia(Formula):
    obs: ObsExpr
    sub: Formula


TRUE = Top()
FALSE = Bottom()


@dataclass(frozen=True)
class Vocab:
    """Declared alphabet, agent set and atom set for a family of formulas."""

    alphabet: Alphabet
    agents: tuple[str, ...]
    atoms: tuple[str, ...]

    def __post_init__(self) -> None:
        for group, names in (("agent", self.agents), ("atom", self.atoms)):
            if len(set(names)) != len(names):
                raise ValueError(f"duplicate {group} names: {names}")
            for name in names:
                if not _IDENT_RE.fullmatch(name) or name in RESERVED_WORDS:
                    raise ValueError(f"invalid {group} name: {name!r}")


def conj(parts: list[Formula]) -> Formula:
    """Left-assoc conjunction of a non-empty list (Top for the empty list)."""
    if not parts:
        return TRUE
    acc = parts[0]
    for part in parts[1:]:
        acc = And(acc, part)
    return acc


def disj(parts: list[Formula]) -> Formula:
    if not parts:
        return FALSE
    acc = parts[0]
    for part in parts[1:]:
        acc = Or(acc, part)
    return acc


def size(phi: Formula) -> int:
    """Formula node count; modality expressions are not included."""
    if isinstance(phi, (Top, Bottom, Atom)):
        return 1
    if isinstance(phi, Not):
        return 1 + size(phi.sub)
    if isinstance(phi, (And, Or, Implies)):
        return 1 + size(phi.left) + size(phi.right)
    if isinstance(phi, (Know, Poss)):
        return 1 + size(phi.sub)
    assert isinstance(phi, (Box, Dia))
    return 1 + size(phi.sub)


def atoms_in(phi: Formula) -> frozenset[str]:
    if isinstance(phi, Atom):
        return frozenset({phi.name})
    if isinstance(phi, Not):
        return atoms_in(phi.sub)
    if isinstance(phi, (And, Or, Implies)):
        return atoms_in(phi.left) | atoms_in(phi.right)
    if isinstance(phi, (Know, Poss, Box, Dia)):
        return atoms_in(phi.sub)
    return frozenset()


def agents_in(phi: Formula) -> frozenset[str]:
    if isinstance(phi, (Know, Poss)):
        return frozenset({phi.agent}) | agents_in(phi.sub)
    if isinstance(phi, Not):
        return agents_in(phi.sub)
    if isinstance(phi, (And, Or, Implies)):
        return agents_in(phi.left) | agents_in(phi.right)
    if isinstance(phi, (Box, Dia)):
        return agents_in(phi.sub)
    return frozenset()


def letters_in_formula(phi: Formula) -> frozenset[str]:
    if isinstance(phi, (Box, Dia)):
        return letters_in(phi.obs) | letters_in_formula(phi.sub)
    if isinstance(phi, Not):
        return letters_in_formula(phi.sub)
    if isinstance(phi, (And, Or, Implies)):
        return letters_in_formula(phi.left) | letters_in_formula(phi.right)
    if isinstance(phi, (Know, Poss)):
        return letters_in_formula(phi.sub)
    return frozenset()


def infer_vocab(phi: Formula, default_letter: str = "a") -> Vocab:
    """Vocabulary mentioned by the formula; falls back to one dummy letter.

    Adding unused letters to the alphabet does not change satisfiability or
    truth, so the fallback is harmless for formulas without modalities.
    """
    letters = sorted(letters_in_formula(phi))
    if not letters:
        letters = [default_letter]
    return Vocab(
        alphabet=Alphabet(tuple(letters)),
        agents=tuple(sorted(agents_in(phi))),
        atoms=tuple(sorted(atoms_in(phi))),
    )


# ---------------------------------------------------------------------------
# Negation normal form

def nnf_negate(phi: Formula) -> Formula:
    """NNF of the negation of an NNF formula."""
    return to_nnf(Not(phi))


def to_nnf(phi: Formula) -> Formula:
    """Push negations to atoms, eliminate Implies, rewrite trivial modalities.

    Modalities over the empty language become constants and diamonds over the
    bare empty word disappear, as forced by the truth conditions.  Modality
    expressions are lightly simplified on the way.
    """
    if isinstance(phi, (Top, Bottom, Atom)):
        return phi
    if isinstance(phi, And):
        return And(to_nnf(phi.left), to_nnf(phi.right))
    if isinstance(phi, Or):
        return Or(to_nnf(phi.left), to_nnf(phi.right))
    if isinstance(phi, Implies):
        return Or(to_nnf(Not(phi.left)), to_nnf(phi.right))
    if isinstance(phi, Know):
        return Know(phi.agent, to_nnf(phi.sub))
    if isinstance(phi, Poss):
        return Poss(phi.agent, to_nnf(phi.sub))
    if isinstance(phi, Box):
        obs = simplify(phi.obs)
        if is_empty(obs):
            return TRUE
        return Box(obs, to_nnf(phi.sub))
    if isinstance(phi, Dia):
        obs = simplify(phi.obs)
        if is_empty(obs):
            return FALSE
        if isinstance(obs, Epsilon):
            return to_nnf(phi.sub)
        return Dia(obs, to_nnf(phi.sub))
    assert isinstance(phi, Not)
    sub = phi.sub
    if isinstance(sub, Top):
        return FALSE
    if isinstance(sub, Bottom):
        return TRUE
    if isinstance(sub, Atom):
        return phi
    if isinstance(sub, Not):
        return to_nnf(sub.sub)
    if isinstance(sub, And):
        return Or(to_nnf(Not(sub.left)), to_nnf(Not(sub.right)))
    if isinstance(sub, Or):
        return And(to_nnf(Not(sub.left)), to_nnf(Not(sub.right)))
    if isinstance(sub, Implies):
        return And(to_nnf(sub.left), to_nnf(Not(sub.right)))
    if isinstance(sub, Know):
        return Poss(sub.agent, to_nnf(Not(sub.sub)))
    if isinstance(sub, Poss):
        return Know(sub.agent, to_nnf(Not(sub.sub)))
    if isinstance(sub, Box):
        obs = simplify(sub.obs)
        if is_empty(obs):
            return FALSE
        if isinstance(obs, Epsilon):
            return to_nnf(Not(sub.sub))
        return Dia(obs, to_nnf(Not(sub.sub)))
    assert isinstance(sub, Dia)
    obs = simplify(sub.obs)
    if is_empty(obs):
        return TRUE
    return Box(obs, to_nnf(Not(sub.sub)))


def is_nnf(phi: Formula) -> bool:
    if isinstance(phi, Not):
        return isinstance(phi.sub, Atom)
    if isinstance(phi, (Top, Bottom, Atom)):
        return True
    if isinstance(phi, Implies):
        return False
    if isinstance(phi, (And, Or)):
        return is_nnf(phi.left) and is_nnf(phi.right)
    if isinstance(phi, (Know, Poss, Box, Dia)):
        return is_nnf(phi.sub)
    return False


# ---------------------------------------------------------------------------
# Fischer-Ladner style closure
#
# Closed under subformulas, concatenation/union splitting of modalities,
# letter residuation of boxes (needed because projection rules rewrite a box
# into its residual) and NNF negation.  Residuation strictly shrinks the
# longest word of the expression, so the closure stays finite.

def fl_closure(phi: Formula) -> frozenset[Formula]:
    if not is_nnf(phi):
        raise ValueError("closure is defined on NNF formulas")
    closure: set[Formula] = set()
    todo = [phi]
    while todo:
        psi = todo.pop()
        if psi in closure:
            continue
        closure.add(psi)
        todo.append(nnf_negate(psi))
        if isinstance(psi, (And, Or)):
            todo.extend([psi.left, psi.right])
        elif isinstance(psi, (Know, Poss)):
            todo.append(psi.sub)
        elif isinstance(psi, Not):
            todo.append(psi.sub)
        elif isinstance(psi, (Box, Dia)):
            cls = Box if isinstance(psi, Box) else Dia
            todo.append(psi.sub)
            obs = psi.obs
            if isinstance(obs, Concat):
                todo.append(cls(obs.left, cls(obs.right, psi.sub)))
            elif isinstance(obs, Union):
                todo.append(cls(obs.left, psi.sub))
                todo.append(cls(obs.right, psi.sub))
            if isinstance(psi, Box):
                for letter in sorted(letters_in(obs)):
                    res = letter_residual(obs, letter)
                    if not is_empty(res):
                        todo.append(Box(res, psi.sub))
    return frozenset(closure)


def classify_fragment(phi: Formula) -> str:
    """One of word-single, word-multi, starfree-single, starfree-multi."""

    def has_union(psi: Formula) -> bool:
        if isinstance(psi, (Box, Dia)):
            return _obs_has_union(psi.obs) or has_union(psi.sub)
        if isinstance(psi, Not):
            return has_union(psi.sub)
        if isinstance(psi, (And, Or, Implies)):
            return has_union(psi.left) or has_union(psi.right)
        if isinstance(psi, (Know, Poss)):
            return has_union(psi.sub)
        return False

    word = "starfree" if has_union(phi) else "word"
    multi = "multi" if len(agents_in(phi)) > 1 else "single"
    return f"{word}-{multi}"


def _obs_has_union(obs: ObsExpr) -> bool:
    if isinstance(obs, Union):
        return True
    if isinstance(obs, Concat):
        return _obs_has_union(obs.left) or _obs_has_union(obs.right)
    return False


# ---------------------------------------------------------------------------
# Parsing and printing
#
# Grammar: `->` (right assoc, lowest) < `|` < `&` < prefixes (`~`, `K i`,
# `Khat i`, `[pi]`, `<pi>`).  Prefix operators chain to the right.

def parse_formula(text: str, vocab: Vocab | None = None) -> Formula:
    stream = TokenStream(text)
    phi = _parse_implies(stream, vocab)
    if stream.peek().kind != "end":
        raise stream.error(f"trailing input after formula: {stream.peek().value!r}")
    return phi


def _parse_implies(stream: TokenStream, vocab: Vocab | None) -> Formula:
    left = _parse_or(stream, vocab)
    if stream.peek().kind == "sym" and stream.peek().value == "->":
        stream.next()
        return Implies(left, _parse_implies(stream, vocab))
    return left


def _parse_or(stream: TokenStream, vocab: Vocab | None) -> Formula:
    phi = _parse_and(stream, vocab)
    while stream.peek().kind == "sym" and stream.peek().value == "|":
        stream.next()
        phi = Or(phi, _parse_and(stream, vocab))
    return phi


def _parse_and(stream: TokenStream, vocab: Vocab | None) -> Formula:
    phi = _parse_prefix(stream, vocab)
    while stream.peek().kind == "sym" and stream.peek().value == "&":
        stream.next()
        phi = And(phi, _parse_prefix(stream, vocab))
    return phi


def _parse_agent(stream: TokenStream, vocab: Vocab | None) -> str:
    token = stream.peek()
    if token.kind != "ident":
        raise stream.error("expected an agent name")
    stream.next()
    if vocab is not None and token.value not in vocab.agents:
        raise UndeclaredSymbolError(f"undeclared agent {token.value!r}", stream.text, token.pos)
    return token.value


def _parse_prefix(stream: TokenStream, vocab: Vocab | None) -> Formula:
    token = stream.peek()
    if token.kind == "sym" and token.value == "~":
        stream.next()
        return Not(_parse_prefix(stream, vocab))
    if token.kind == "ident" and token.value == "K":
        stream.next()
        agent = _parse_agent(stream, vocab)
        return Know(agent, _parse_prefix(stream, vocab))
    if token.kind == "ident" and token.value == "Khat":
        stream.next()
        agent = _parse_agent(stream, vocab)
        return Poss(agent, _parse_prefix(stream, vocab))
    if token.kind == "sym" and token.value == "[":
        stream.next()
        obs = parse_obs_tokens(stream, vocab.alphabet if vocab else None)
        stream.expect_sym("]")
        return Box(obs, _parse_prefix(stream, vocab))
    if token.kind == "sym" and token.value == "<":
        stream.next()
        obs = parse_obs_tokens(stream, vocab.alphabet if vocab else None)
        stream.expect_sym(">")
        return Dia(obs, _parse_prefix(stream, vocab))
    return _parse_atom(stream, vocab)


def _parse_atom(stream: TokenStream, vocab: Vocab | None) -> Formula:
    token = stream.peek()
    if token.kind == "sym" and token.value == "(":
        stream.next()
        phi = _parse_implies(stream, vocab)
        stream.expect_sym(")")
        return phi
    if token.kind == "ident":
        if token.value in ("K", "Khat"):
            raise stream.error(f"{token.value} must be followed by an agent and a formula")
        stream.next()
        if token.value == "true":
            return TRUE
        if token.value == "false":
            return FALSE
        if vocab is not None and token.value not in vocab.atoms:
            raise UndeclaredSymbolError(f"undeclared atom {token.value!r}", stream.text, token.pos)
        return Atom(token.value)
    raise stream.error(f"expected a formula, found {token.value or 'end of input'!r}")


def formula_to_text(phi: Formula) -> str:
    """Render in the surface grammar; parses back to a structurally equal tree."""
    return _render(phi, 0)


def _render(phi: Formula, level: int) -> str:
    # levels: -> 1, | 2, & 3, prefix 4
    if isinstance(phi, Top):
        return "true"
    if isinstance(phi, Bottom):
        return "false"
    if isinstance(phi, Atom):
        return phi.name
    if isinstance(phi, Implies):
        text = f"{_render(phi.left, 2)} -> {_render(phi.right, 1)}"
        return f"({text})" if level > 1 else text
    if isinstance(phi, Or):
        text = f"{_render(phi.left, 2)} | {_render(phi.right, 3)}"
        return f"({text})" if level > 2 else text
    if isinstance(phi, And):
        text = f"{_render(phi.left, 3)} & {_render(phi.right, 4)}"
        return f"({text})" if level > 3 else text
    if isinstance(phi, Not):
        return f"~{_render(phi.sub, 4)}"
    if isinstance(phi, Know):
        return f"K {phi.agent} {_render(phi.sub, 4)}"
    if isinstance(phi, Poss):
        return f"Khat {phi.agent} {_render(phi.sub, 4)}"
    if isinstance(phi, Box):
        return f"[{obsexpr_to_text(phi.obs)}] {_render(phi.sub, 4)}"
    assert isinstance(phi, Dia)
    return f"<{obsexpr_to_text(phi.obs)}> {_render(phi.sub, 4)}"
