"""Hardness-instance generators and their ground-truth deciders.

Quantified Boolean formulas map to single-agent formulas: a valuation of
x_1..x_n is a length-n word choosing letter ``x_i`` or ``nx_i`` at position i,
quantifiers become box/diamond over the two letters of their variable, and
each clause demands a marker state whose expectation covers exactly the
valuations satisfying one of its literals.  The designated state is forced to
observe every valuation word so that universal choices genuinely branch.

Exponential tiling instances map to two-agent formulas: the composed
modalities K_a K_b / their duals simulate an unrestricted box/diamond, a
binary tree of depth 4n carries two position encodings (one for each of two
copies of the tiling), observation letters ``A``/``nA`` (and ``B``/``nB``)
tie bit atoms to observable words, and matching constraints compare the two
encoded positions through ripple increment/equality circuits.

Both deciders are exhaustive and exact; they are the oracles the generated
formulas are validated against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .formula import (
    And,
    Atom,
    Box,
    Dia,
    FALSE,
    Formula,
    Implies,
    Know,
    Not,
    Or,
    Poss,
    TRUE,
    conj,
    disj,
)
from .obsexpr import EPSILON, Concat, Letter, ObsExpr, Union


# ---------------------------------------------------------------------------
# Quantified Boolean formulas

@dataclass(frozen=True)
class QbfInstance:
    quantifiers: tuple[str, ...]  # "exists" | "forall"; position k binds x_{k+1}
    clauses: tuple[tuple[int, ...], ...]  # signed 1-based variable indices

    def __post_init__(self) -> None:
        if not self.quantifiers:
            raise ValueError("at least one quantified variable is required")
        for q in self.quantifiers:
            if q not in ("exists", "forall"):
                raise ValueError(f"bad quantifier {q!r}")
        n = len(self.quantifiers)
        for clause in self.clauses:
            if not clause:
                raise ValueError("empty clause")
            for literal in clause:
                if literal == 0 or abs(literal) > n:
                    raise ValueError(f"literal {literal} out of range 1..{n}")

    @property
    def n(self) -> int:
        return len(self.quantifiers)


def parse_qbf(text: str) -> QbfInstance:
    """`exists x1 forall x2 : (x1 x2)(x1 -x2)`"""
    if ":" not in text:
        raise ValueError("missing ':' between prefix and clauses")
    prefix_text, matrix_text = text.split(":", 1)
    tokens = prefix_text.split()
    if len(tokens) % 2 != 0:
        raise ValueError("prefix must alternate quantifier and variable tokens")
    quantifiers: list[str] = []
    names: dict[str, int] = {}
    for q, name in zip(tokens[::2], tokens[1::2]):
        if q not in ("exists", "forall"):
            raise ValueError(f"bad quantifier {q!r}")
        if name in names:
            raise ValueError(f"variable {name!r} bound twice")
        names[name] = len(quantifiers) + 1
        quantifiers.append(q)
    clauses: list[tuple[int, ...]] = []
    rest = matrix_text.strip()
    while rest:
        if not rest.startswith("("):
            raise ValueError(f"expected '(' at {rest[:10]!r}")
        end = rest.index(")")
        literals = []
        for token in rest[1:end].split():
            negative = token.startswith("-")
            name = token[1:] if negative else token
            if name not in names:
                raise ValueError(f"unknown variable {name!r}")
            literals.append(-names[name] if negative else names[name])
        clauses.append(tuple(literals))
        rest = rest[end + 1 :].strip()
    return QbfInstance(tuple(quantifiers), tuple(clauses))


def qbf_eval(instance: QbfInstance) -> bool:
    """Exact truth value by recursive game-tree evaluation."""

    def matrix(assignment: dict[int, bool]) -> bool:
        return all(
            any(assignment[abs(l)] == (l > 0) for l in clause)
            for clause in instance.clauses
        )

    def play(index: int, assignment: dict[int, bool]) -> bool:
        if index > instance.n:
            return matrix(assignment)
        outcomes = (
            play(index + 1, {**assignment, index: value}) for value in (True, False)
        )
        if instance.quantifiers[index - 1] == "exists":
            return any(outcomes)
        return all(outcomes)

    return play(1, {})


def _qbf_letter(literal: int) -> Letter:
    index = abs(literal)
    return Letter(f"x{index}" if literal > 0 else f"nx{index}")


def _valuation_block(low: int, high: int) -> ObsExpr:
    """(x_{low+1}+nx_{low+1}) ... (x_high+nx_high); the empty word if low == high."""
    factors = [Union(_qbf_letter(i), _qbf_letter(-i)) for i in range(low + 1, high + 1)]
    if not factors:
        return EPSILON
    expr: ObsExpr = factors[0]
    for factor in factors[1:]:
        expr = Concat(expr, factor)
    return expr


def _both_observable(i: int) -> Formula:
    return And(Dia(_qbf_letter(i), TRUE), Dia(_qbf_letter(-i), TRUE))


def _literal_constraint(literal: int, n: int) -> Formula:
    """The current state expects exactly the valuations making `literal` true."""
    h = abs(literal)
    parts: list[Formula] = []
    for i in range(1, h):
        parts.append(Box(_valuation_block(0, i - 1), _both_observable(i)))
    parts.append(
        Box(
            _valuation_block(0, h - 1),
            And(Dia(_qbf_letter(literal), TRUE), Box(_qbf_letter(-literal), FALSE)),
        )
    )
    for i in range(h + 1, n + 1):
        prefix = Concat(_valuation_block(0, h - 1), _qbf_letter(literal))
        if i - 1 > h:
            prefix = Concat(prefix, _valuation_block(h, i - 1))
        parts.append(Box(prefix, _both_observable(i)))
    return conj(parts)


QBF_AGENT = "a"


def gen_qbf(instance: QbfInstance) -> Formula:
    """Single-agent formula satisfiable iff the instance is true.

    Conjunction of: one marker constraint per clause (some indistinguishable
    `p_j` state whose expectation matches a literal of the clause), the
    quantifier game over valuation letters ending in the demand that every
    clause marker is still considered possible, and full observability of
    every valuation word at the designated state so that universal quantifier
    boxes range over both letters of their variable.
    """
    n = instance.n
    for clause in instance.clauses:
        if len(clause) > 3:
            raise ValueError("clauses are limited to 3 literals")
    parts: list[Formula] = []
    for j, clause in enumerate(instance.clauses, start=1):
        marker = Atom(f"p{j}")
        options = disj([_literal_constraint(l, n) for l in clause])
        parts.append(
            And(Know(QBF_AGENT, Implies(marker, options)), Poss(QBF_AGENT, marker))
        )
    game: Formula = conj(
        [Poss(QBF_AGENT, Atom(f"p{j}")) for j in range(1, len(instance.clauses) + 1)]
    )
    for i in range(n, 0, -1):
        letters = Union(_qbf_letter(i), _qbf_letter(-i))
        shape = Dia if instance.quantifiers[i - 1] == "exists" else Box
        game = shape(letters, game)
    parts.append(game)
    for i in range(1, n + 1):
        parts.append(Box(_valuation_block(0, i - 1), _both_observable(i)))
    return conj(parts)


# ---------------------------------------------------------------------------
# Exponential tiling

@dataclass(frozen=True)
class Tile:
    name: str
    top: str
    right: str
    bottom: str
    left: str


@dataclass(frozen=True)
class TilingInstance:
    tiles: tuple[Tile, ...]
    origin: str
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be at least 1")
        names = [t.name for t in self.tiles]
        if len(set(names)) != len(names):
            raise ValueError("duplicate tile names")
        if self.tiles and self.origin not in names:
            raise ValueError(f"origin tile {self.origin!r} is not in the tile set")


def parse_tiling(text: str) -> TilingInstance:
    """Header lines `n: <int>` and `origin: <name>`, then one tile per line:
    `tile <name> <top> <right> <bottom> <left>`."""
    n: int | None = None
    origin: str | None = None
    tiles: list[Tile] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("n:"):
            n = int(line[2:].strip())
        elif line.startswith("origin:"):
            origin = line[len("origin:"):].strip()
        elif line.startswith("tile "):
            fields = line.split()
            if len(fields) != 6:
                raise ValueError(f"tile line needs name and 4 colors: {line!r}")
            tiles.append(Tile(fields[1], fields[2], fields[3], fields[4], fields[5]))
        else:
            raise ValueError(f"unrecognized line: {line!r}")
    if n is None or origin is None:
        raise ValueError("instance needs `n:` and `origin:` lines")
    return TilingInstance(tuple(tiles), origin, n)


def tiling_eval(instance: TilingInstance) -> bool:
    """Exhaustive backtracking over the full 2^n x 2^n grid; n <= 2 only."""
    if instance.n > 2:
        raise ValueError("exhaustive tiling decision is limited to n <= 2")
    if not instance.tiles:
        return False
    side = 2 ** instance.n
    by_name = {t.name: t for t in instance.tiles}
    origin = by_name[instance.origin]
    grid: list[list[Tile | None]] = [[None] * side for _ in range(side)]

    def fits(x: int, y: int, tile: Tile) -> bool:
        if x > 0:
            left = grid[y][x - 1]
            if left is not None and left.right != tile.left:
                return False
        if y > 0:
            below = grid[y - 1][x]
            if below is not None and below.top != tile.bottom:
                return False
        return True

    def place(position: int) -> bool:
        if position == side * side:
            return True
        y, x = divmod(position, side)
        candidates = (origin,) if (x, y) == (0, 0) else instance.tiles
        for tile in candidates:
            if fits(x, y, tile):
                grid[y][x] = tile
                if place(position + 1):
                    return True
                grid[y][x] = None
        return False

    return place(0)


TILING_AGENTS = ("a", "b")


def _square(phi: Formula, depth: int = 1) -> Formula:
    """K_a K_b composition simulating an unrestricted box, iterated."""
    for _ in range(depth):
        phi = Know(TILING_AGENTS[0], Know(TILING_AGENTS[1], phi))
    return phi


def _lozenge(phi: Formula, depth: int = 1) -> Formula:
    for _ in range(depth):
        phi = Poss(TILING_AGENTS[0], Poss(TILING_AGENTS[1], phi))
    return phi


def _iff(a: Formula, b: Formula) -> Formula:
    return Or(And(a, b), And(Not(a), Not(b)))


def _bits_equal(bits_a: list[Formula], bits_b: list[Formula]) -> Formula:
    return conj([_iff(a, b) for a, b in zip(bits_a, bits_b)])


def _bits_increment(small: list[Formula], big: list[Formula]) -> Formula:
    """big = small + 1 over most-significant-first bit vectors (no wraparound)."""
    n = len(small)
    cases = []
    for k in range(n):
        case = [Not(small[k]), big[k]]
        case += [And(small[j], Not(big[j])) for j in range(k + 1, n)]
        case += [_iff(big[j], small[j]) for j in range(k)]
        cases.append(conj(case))
    return disj(cases)


def _letters_power(names: tuple[str, ...], count: int) -> ObsExpr:
    base: ObsExpr = Letter(names[0])
    for name in names[1:]:
        base = Union(base, Letter(name))
    if count == 0:
        return EPSILON
    expr = base
    for _ in range(count - 1):
        expr = Concat(expr, base)
    return expr


def gen_tiling(instance: TilingInstance) -> Formula:
    """Two-agent formula satisfiable iff the 2^n square can be tiled.

    Bit atoms p_0..p_{4n-1} encode two positions, most significant bit first:
    p_0..p_{n-1} the x coordinate and p_n..p_{2n-1} the y coordinate of copy
    A, then the same pair for copy B.  Letters A/nA spell copy A's position
    bit by bit (nA for a zero bit), likewise B/nB.
    """
    n = instance.n
    depth = 4 * n
    tiles = instance.tiles
    bit = [Atom(f"p{i}") for i in range(depth)]
    q_a = {t.name: Atom(f"qA_{t.name}") for t in tiles}
    q_b = {t.name: Atom(f"qB_{t.name}") for t in tiles}
    x_a, y_a = bit[0:n], bit[n : 2 * n]
    x_b, y_b = bit[2 * n : 3 * n], bit[3 * n : 4 * n]

    parts: list[Formula] = []
    # (1) binary tree branching on each bit in depth order
    for level in range(depth):
        persistence = conj(
            [
                And(
                    Implies(bit[i], _square(bit[i])),
                    Implies(Not(bit[i]), _square(Not(bit[i]))),
                )
                for i in range(level)
            ]
        )
        layer = And(And(_lozenge(bit[level]), _lozenge(Not(bit[level]))), persistence)
        parts.append(_square(layer, level) if level else layer)
    # (2),(3) exactly one tile marker per copy at the leaves
    for markers in (q_a, q_b):
        some = disj([markers[t.name] for t in tiles]) if tiles else FALSE
        unique = conj(
            [
                Or(Not(markers[t.name]), Not(markers[u.name]))
                for t, u in itertools.combinations(tiles, 2)
            ]
        )
        parts.append(_square(And(some, unique), depth))
    # (4) the origin tile sits at position (0, 0) of copy A
    at_origin = conj([Not(b) for b in x_a + y_a])
    parts.append(_square(Implies(at_origin, q_a[instance.origin]), depth))
    # (5),(6) horizontal and vertical matching between the copies
    horizontal = disj(
        [
            And(q_a[t.name], q_b[u.name])
            for t in tiles
            for u in tiles
            if u.right == t.left
        ]
    )
    parts.append(
        _square(
            Implies(And(_bits_increment(x_b, x_a), _bits_equal(y_a, y_b)), horizontal),
            depth,
        )
    )
    vertical = disj(
        [
            And(q_a[t.name], q_b[u.name])
            for t in tiles
            for u in tiles
            if u.top == t.bottom
        ]
    )
    parts.append(
        _square(
            Implies(And(_bits_equal(x_a, x_b), _bits_increment(y_b, y_a)), vertical),
            depth,
        )
    )
    # (7),(8) bits determine which position words are observable
    for offset, names, letter in ((0, ("A", "nA"), "A"), (2 * n, ("B", "nB"), "B")):
        yes, no = Letter(names[0]), Letter(names[1])
        linkage = conj(
            [
                Box(
                    _letters_power(names, i),
                    And(
                        Implies(bit[offset + i], And(Dia(yes, TRUE), Box(no, FALSE))),
                        Implies(Not(bit[offset + i]), And(Dia(no, TRUE), Box(yes, FALSE))),
                    ),
                )
                for i in range(2 * n)
            ]
        )
        parts.append(_square(linkage, depth))
    # (9) inner nodes observe every letter at every step
    all_letters = ("A", "nA", "B", "nB")
    observable = conj([Dia(Letter(name), TRUE) for name in all_letters])
    for level in range(depth):
        inner = conj(
            [Box(_letters_power(all_letters, i), observable) for i in range(2 * n)]
        )
        parts.append(_square(inner, level) if level else inner)
    # (10) one tile per position, uniformly in the other copy's position
    parts.append(
        Box(
            _letters_power(("A", "nA"), 2 * n),
            disj([_square(q_a[t.name], depth) for t in tiles]) if tiles else FALSE,
        )
    )
    parts.append(
        Box(
            _letters_power(("B", "nB"), 2 * n),
            disj([_square(q_b[t.name], depth) for t in tiles]) if tiles else FALSE,
        )
    )
    return conj(parts)


# ---------------------------------------------------------------------------
# Watcher-scenario fixtures (two observers guessing a cleaning bot's moves)

VBOT_LETTERS = ("l", "d", "r", "u")
VBOT_AGENTS = ("a", "b")


def _moves(letters: tuple[str, ...]) -> ObsExpr:
    expr: ObsExpr = Letter(letters[0])
    for name in letters[1:]:
        expr = Union(expr, Letter(name))
    return expr


def _progress(towards: tuple[str, ...], over: ObsExpr, steps: int) -> Formula:
    """After any k <= steps observed moves from `over`, every move in
    `towards` is still observable."""
    both = conj([Dia(Letter(name), TRUE) for name in towards])
    parts: list[Formula] = [both]
    power: ObsExpr | None = None
    for _ in range(steps):
        power = over if power is None else Concat(power, over)
        parts.append(Box(power, both))
    return conj(parts)


def gen_vbot(n: int) -> dict[str, Formula]:
    """Named fixtures for the watching-children scenario (grid walk bound n)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    power_moves = _moves(("d", "l"))
    debris_moves = _moves(("r", "u"))
    any_moves = _moves(VBOT_LETTERS)
    p_n = _progress(("l", "d"), power_moves, n)
    psi_p = _progress(("l", "d"), power_moves, min(n, 3))
    psi_d = _progress(("r", "u"), debris_moves, min(n, 3))
    psi_de = _progress(("r", "u"), any_moves, min(n, 3))
    info = Dia(
        Union(Letter("d"), Letter("l")),
        And(Know("b", Atom("power")), Poss("a", Atom("debris"))),
    )
    scenario = And(And(Poss("a", psi_de), psi_p), And(Poss("a", psi_d), Poss("b", psi_d)))
    query = Not(Implies(scenario, info))
    return {
        "P_n": p_n,
        "psi_p": psi_p,
        "psi_d": psi_d,
        "psi_de": psi_de,
        "INFO_ab": info,
        "query": query,
    }
