"""Star-free observation expressions over a finite action alphabet.

An expression denotes a finite set of observation words.  The grammar has
five constructors: the empty language ``0``, the empty word ``eps``, single
letters, concatenation ``.`` and union ``+``.  Residuation is implemented
syntactically (derivative-style rules folded over the word), so emptiness
and prefix tests never enumerate the language.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

Word = tuple[str, ...]

EPSILON_WORD: Word = ()

RESERVED_WORDS = frozenset({"eps", "true", "false", "K", "Khat"})

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class ParseError(ValueError):
    """Syntax error with the offset (and line/column) of the offending token."""

    def __init__(self, message: str, text: str, pos: int):
        self.pos = pos
        prefix = text[:pos]
        self.line = prefix.count("\n") + 1
        self.column = pos - (prefix.rfind("\n") + 1) + 1
        super().__init__(f"{message} (line {self.line}, column {self.column})")


class UndeclaredSymbolError(ParseError):
    """An identifier was used in a role it is not declared for."""


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct action letters."""

    letters: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.letters:
            raise ValueError("alphabet must be non-empty")
        if len(set(self.letters)) != len(self.letters):
            raise ValueError(f"duplicate letters in alphabet: {self.letters}")
        for name in self.letters:
            if not _IDENT_RE.fullmatch(name) or name in RESERVED_WORDS:
                raise ValueError(f"invalid letter name: {name!r}")

    def __contains__(self, letter: str) -> bool:
        return letter in self.letters

    def __iter__(self) -> Iterator[str]:
        return iter(self.letters)

    def index(self, letter: str) -> int:
        return self.letters.index(letter)

    def word_key(self, word: Word) -> tuple[int, ...]:
        """Sort key realizing the lexicographic order induced by the alphabet."""
        return tuple(self.letters.index(a) for a in word)


class ObsExpr:
    """Base class for observation expression nodes."""

    __slots__ = ()


def cache_hash(cls):
    """Memoize the generated dataclass hash; trees hash in O(1) after the first call."""
    generated = cls.__hash__

    def __hash__(self):
        cached = self.__dict__.get("_hash")
        if cached is None:
            cached = generated(self)
            self.__dict__["_hash"] = cached
        return cached

    cls.__hash__ = __hash__
    return cls


@cache_hash
@dataclass(frozen=True)
class Empty(ObsExpr):
    pass


@cache_hash
@dataclass(frozen=True)
class Epsilon(ObsExpr):
    pass


@cache_hash
@dataclass(frozen=True)
class Letter(ObsExpr):
    symbol: str


@cache_hash
@dataclass(frozen=True)
class Concat(ObsExpr):
    left: ObsExpr
    right: ObsExpr


@cache_hash
@dataclass(frozen=True)
class Union(ObsExpr):
    left: ObsExpr
    right: ObsExpr


EMPTY = Empty()
EPSILON = Epsilon()


def size(expr: ObsExpr) -> int:
    """Node count of the expression tree."""
    if isinstance(expr, (Empty, Epsilon, Letter)):
        return 1
    assert isinstance(expr, (Concat, Union))
    return 1 + size(expr.left) + size(expr.right)


def letters_in(expr: ObsExpr) -> frozenset[str]:
    if isinstance(expr, Letter):
        return frozenset({expr.symbol})
    if isinstance(expr, (Concat, Union)):
        return letters_in(expr.left) | letters_in(expr.right)
    return frozenset()


def lang(expr: ObsExpr) -> frozenset[Word]:
    """The denoted (finite) set of words."""
    if isinstance(expr, Empty):
        return frozenset()
    if isinstance(expr, Epsilon):
        return frozenset({EPSILON_WORD})
    if isinstance(expr, Letter):
        return frozenset({(expr.symbol,)})
    if isinstance(expr, Concat):
        left, right = lang(expr.left), lang(expr.right)
        return frozenset(u + v for u in left for v in right)
    assert isinstance(expr, Union)
    return lang(expr.left) | lang(expr.right)


def is_empty(expr: ObsExpr) -> bool:
    """True iff the expression denotes no word at all.  Structural, no enumeration."""
    if isinstance(expr, Empty):
        return True
    if isinstance(expr, (Epsilon, Letter)):
        return False
    if isinstance(expr, Concat):
        return is_empty(expr.left) or is_empty(expr.right)
    assert isinstance(expr, Union)
    return is_empty(expr.left) and is_empty(expr.right)


def is_nullable(expr: ObsExpr) -> bool:
    """True iff the empty word belongs to the denoted language."""
    if isinstance(expr, (Empty, Letter)):
        return False
    if isinstance(expr, Epsilon):
        return True
    if isinstance(expr, Concat):
        return is_nullable(expr.left) and is_nullable(expr.right)
    assert isinstance(expr, Union)
    return is_nullable(expr.left) or is_nullable(expr.right)


def concat(left: ObsExpr, right: ObsExpr) -> ObsExpr:
    """Concatenation with the light simplifications 0.x = 0, eps.x = x."""
    if isinstance(left, Empty) or isinstance(right, Empty):
        return EMPTY
    if isinstance(left, Epsilon):
        return right
    if isinstance(right, Epsilon):
        return left
    return Concat(left, right)


def union(left: ObsExpr, right: ObsExpr) -> ObsExpr:
    """Union with the light simplifications 0+x = x, x+x = x."""
    if isinstance(left, Empty):
        return right
    if isinstance(right, Empty):
        return left
    if left == right:
        return left
    return Union(left, right)


def simplify(expr: ObsExpr) -> ObsExpr:
    """Rebuild the tree through the simplifying constructors."""
    if isinstance(expr, Concat):
        return concat(simplify(expr.left), simplify(expr.right))
    if isinstance(expr, Union):
        return union(simplify(expr.left), simplify(expr.right))
    return expr


def letter_residual(expr: ObsExpr, letter: str) -> ObsExpr:
    if isinstance(expr, (Empty, Epsilon)):
        return EMPTY
    if isinstance(expr, Letter):
        return EPSILON if expr.symbol == letter else EMPTY
    if isinstance(expr, Concat):
        head = concat(letter_residual(expr.left, letter), expr.right)
        if is_nullable(expr.left):
            return union(head, letter_residual(expr.right, letter))
        return head
    assert isinstance(expr, Union)
    return union(letter_residual(expr.left, letter), letter_residual(expr.right, letter))


def residual(expr: ObsExpr, word: Word) -> ObsExpr:
    """Expression denoting { v | word . v in lang(expr) }."""
    for letter in word:
        expr = letter_residual(expr, letter)
    return expr


def in_prefixes(expr: ObsExpr, word: Word) -> bool:
    """True iff some word of the language extends `word` (possibly trivially)."""
    return not is_empty(residual(expr, word))


def prefix_language(expr: ObsExpr) -> frozenset[Word]:
    """All prefixes of all words of the language, by enumeration."""
    out: set[Word] = set()
    for word in lang(expr):
        for i in range(len(word) + 1):
            out.add(word[:i])
    return frozenset(out)


def sum_of_words(words: frozenset[Word] | set[Word]) -> ObsExpr:
    """Union-of-concatenations expression denoting exactly the given word set.

    Expectation languages are never empty, so an empty set is rejected.
    """
    if not words:
        raise ValueError("cannot build an expression for the empty word set")
    parts = []
    for word in sorted(words):
        if not word:
            parts.append(EPSILON)
        else:
            acc: ObsExpr = Letter(word[0])
            for letter in word[1:]:
                acc = Concat(acc, Letter(letter))
            parts.append(acc)
    acc = parts[0]
    for part in parts[1:]:
        acc = Union(acc, part)
    return acc


# ---------------------------------------------------------------------------
# Lexing (shared with the formula and model parsers)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>\d+)
  | (?P<sym><=|->|[.+()\[\]<>~&|!^{}:=,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "sym" | "end"
    value: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), pos))  # type: ignore[arg-type]
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class TokenStream:
    """Cursor over a token list, shared by the expression and formula parsers."""

    def __init__(self, text: str, tokens: list[Token] | None = None):
        self.text = text
        self.tokens = tokens if tokens is not None else tokenize(text)
        self.index = 0

    def peek(self) -> Token:
        return self.tokens[self.index]

    def next(self) -> Token:
        token = self.tokens[self.index]
        if token.kind != "end":
            self.index += 1
        return token

    def expect_sym(self, value: str) -> Token:
        token = self.peek()
        if token.kind != "sym" or token.value != value:
            raise ParseError(f"expected {value!r}, found {token.value or 'end of input'!r}", self.text, token.pos)
        return self.next()

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.text, self.peek().pos)


# ---------------------------------------------------------------------------
# Parsing
#
# Grammar:  union is lowest precedence, concatenation binds tighter, and a
# postfix power binds tightest.  `pi ^ n` expands to n-fold concatenation and
# `pi ^<= n` (also written `pi ^{<= n}`) to the n-fold concatenation of
# (pi + eps); both are loader shorthands, the AST stays star-free.

def parse_obs_tokens(stream: TokenStream, alphabet: Alphabet | None = None) -> ObsExpr:
    return _parse_union(stream, alphabet)


def _parse_union(stream: TokenStream, alphabet: Alphabet | None) -> ObsExpr:
    expr = _parse_concat(stream, alphabet)
    while stream.peek().kind == "sym" and stream.peek().value == "+":
        stream.next()
        expr = Union(expr, _parse_concat(stream, alphabet))
    return expr


def _parse_concat(stream: TokenStream, alphabet: Alphabet | None) -> ObsExpr:
    expr = _parse_power(stream, alphabet)
    while stream.peek().kind == "sym" and stream.peek().value == ".":
        stream.next()
        expr = Concat(expr, _parse_power(stream, alphabet))
    return expr


def _parse_power(stream: TokenStream, alphabet: Alphabet | None) -> ObsExpr:
    expr = _parse_primary(stream, alphabet)
    while stream.peek().kind == "sym" and stream.peek().value == "^":
        stream.next()
        at_most = False
        braced = False
        if stream.peek().kind == "sym" and stream.peek().value == "{":
            stream.next()
            braced = True
        if stream.peek().kind == "sym" and stream.peek().value == "<=":
            stream.next()
            at_most = True
        count_token = stream.peek()
        if count_token.kind != "int":
            raise stream.error("expected a number in the power suffix")
        stream.next()
        if braced:
            stream.expect_sym("}")
        count = int(count_token.value)
        base = Union(expr, EPSILON) if at_most else expr
        if count == 0:
            expr = EPSILON
        else:
            acc: ObsExpr = base
            for _ in range(count - 1):
                acc = Concat(acc, base)
            expr = acc
    return expr


def _parse_primary(stream: TokenStream, alphabet: Alphabet | None) -> ObsExpr:
    token = stream.peek()
    if token.kind == "int" and token.value == "0":
        stream.next()
        return EMPTY
    if token.kind == "ident":
        stream.next()
        if token.value == "eps":
            return EPSILON
        if alphabet is not None and token.value not in alphabet:
            raise UndeclaredSymbolError(f"undeclared letter {token.value!r}", stream.text, token.pos)
        return Letter(token.value)
    if token.kind == "sym" and token.value == "(":
        stream.next()
        expr = _parse_union(stream, alphabet)
        stream.expect_sym(")")
        return expr
    raise stream.error(f"expected an observation expression, found {token.value or 'end of input'!r}")


def parse_obsexpr(text: str, alphabet: Alphabet | None = None) -> ObsExpr:
    """Parse a standalone observation expression."""
    stream = TokenStream(text)
    expr = parse_obs_tokens(stream, alphabet)
    if stream.peek().kind != "end":
        raise stream.error(f"trailing input after expression: {stream.peek().value!r}")
    return expr


def obsexpr_to_text(expr: ObsExpr) -> str:
    """Render in the text grammar; parses back to a structurally equal tree."""
    return _render(expr, 0)


def _render(expr: ObsExpr, parent_level: int) -> str:
    # levels: union 1, concat 2, atoms 3
    if isinstance(expr, Empty):
        return "0"
    if isinstance(expr, Epsilon):
        return "eps"
    if isinstance(expr, Letter):
        return expr.symbol
    if isinstance(expr, Union):
        text = f"{_render(expr.left, 1)} + {_render(expr.right, 2)}"
        return f"({text})" if parent_level > 1 else text
    assert isinstance(expr, Concat)
    text = f"{_render(expr.left, 2)} . {_render(expr.right, 3)}"
    return f"({text})" if parent_level > 2 else text
