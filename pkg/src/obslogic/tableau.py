"""Tableau-based satisfiability decision procedure.

Branches are sets of three kinds of terms: a labelled formula under a word
projection, a labelled survival mark under a word projection, and an
indistinguishability pair of labels per agent.  Saturation applies, in a
fixed order, the propositional rules, survival rules (prefix chaining and
copying literals up to the empty word), projection rules (diamonds extend
the observed word, boxes follow survival marks through letter residuation,
boxes over nullable expressions release their body), and the knowledge rules
over agent cells.  Disjunctions and union diamonds branch the search;
possibility terms create fresh labels last, suppressed when a same-agent
ancestor (or the label itself) already carries the candidate node's seed
terms, which keeps the label tree finite.

An open saturated branch induces a witness model: one state per label, cells
from the indistinguishability closure, valuation from the literals recorded
at the empty word, and each state's expectation the sum of its maximal
survival words.  The witness is re-validated and model-checked against the
input before it is returned.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

from .formula import (
    And,
    Atom,
    Bottom,
    Box,
    Dia,
    Formula,
    Know,
    Not,
    Or,
    Poss,
    Top,
    Vocab,
    agents_in,
    atoms_in,
    formula_to_text,
    infer_vocab,
    letters_in_formula,
    nnf_negate,
    to_nnf,
)
from .model import ExpectationModel, PointedModel, require_valid
from .obsexpr import (
    Concat,
    Empty,
    Epsilon,
    Letter,
    ObsExpr,
    Union,
    Word,
    is_empty,
    is_nullable,
    letter_residual,
    sum_of_words,
)
from .semantics import check


class LimitExceeded(Exception):
    """A configured resource cap was hit; the verdict is indeterminate."""


class InternalSolverError(Exception):
    """An internal invariant failed; indicates a rule bug, not an input error."""


@dataclass(frozen=True)
class SolveLimits:
    max_terms: int = 1_000_000
    max_branches: int = 100_000
    timeout_s: float = 60.0


@dataclass
class SolveStats:
    branches: int = 0
    terms: int = 0
    max_depth: int = 0
    elapsed_s: float = 0.0


@dataclass(frozen=True)
class SolveResult:
    status: str  # "sat" | "unsat" | "indeterminate"
    model: PointedModel | None
    reason: str | None
    stats: SolveStats
    trace: tuple[str, ...] | None = None


def max_word_len(obs: ObsExpr) -> int:
    """Length of the longest denoted word (0 for the empty language)."""
    if isinstance(obs, (Empty, Epsilon)):
        return 0
    if isinstance(obs, Letter):
        return 1
    if isinstance(obs, Concat):
        return max_word_len(obs.left) + max_word_len(obs.right)
    assert isinstance(obs, Union)
    return max(max_word_len(obs.left), max_word_len(obs.right))


def word_budget(phi: Formula) -> int:
    """Upper bound on survival-word length: letters along nested modalities.

    Projection is the only rule that lengthens words, and every projection
    consumes a modality layer of the input, so longer words indicate a bug.
    """
    if isinstance(phi, (Top, Bottom, Atom, Not)):
        return 0
    if isinstance(phi, (And, Or)):
        return max(word_budget(phi.left), word_budget(phi.right))
    if isinstance(phi, (Know, Poss)):
        return word_budget(phi.sub)
    assert isinstance(phi, (Box, Dia))
    return max_word_len(phi.obs) + word_budget(phi.sub)


def _word_text(word: Word) -> str:
    return ".".join(word) if word else "eps"


def _fterm_text(label: int, word: Word, phi: Formula) -> str:
    return f"(s{label} {_word_text(word)} {formula_to_text(phi)})"


def _sterm_text(label: int, word: Word) -> str:
    return f"(s{label} {_word_text(word)} ok)"


class _Branch:
    __slots__ = (
        "n_labels",
        "label_meta",
        "fterms",
        "formulas_at",
        "formulas_by_label",
        "poison_at",
        "sterms",
        "words_of",
        "boxes_at",
        "knows",
        "cells",
        "queue",
        "betas",
        "beta_cursor",
        "poss_pending",
        "poss_done",
        "closed",
        "trace",
    )

    def __init__(self, agents: tuple[str, ...], tracing: bool):
        self.n_labels = 1
        self.label_meta: dict[int, tuple[int | None, str | None]] = {0: (None, None)}
        self.fterms: set[tuple[int, Word, Formula]] = set()
        self.formulas_at: dict[tuple[int, Word], set[Formula]] = {}
        self.formulas_by_label: dict[int, set[tuple[Word, Formula]]] = {0: set()}
        self.poison_at: dict[tuple[int, Word], set[Formula]] = {}
        self.sterms: set[tuple[int, Word]] = set()
        self.words_of: dict[int, set[Word]] = {0: set()}
        self.boxes_at: dict[tuple[int, Word], list[Box]] = {}
        self.knows: dict[tuple[str, Word], list[tuple[int, Formula]]] = {}
        self.cells: dict[str, dict[int, frozenset[int]]] = {
            agent: {0: frozenset({0})} for agent in agents
        }
        self.queue: deque = deque()
        self.betas: list[tuple[int, Word, Formula]] = []
        self.beta_cursor = 0
        self.poss_pending: list[tuple[int, Word, Formula]] = []
        self.poss_done: set[tuple[int, Word, Formula]] = set()
        self.closed = False
        self.trace: list[str] | None = [] if tracing else None

    def clone(self) -> "_Branch":
        other = _Branch.__new__(_Branch)
        other.n_labels = self.n_labels
        other.label_meta = dict(self.label_meta)
        other.fterms = set(self.fterms)
        other.formulas_at = {k: set(v) for k, v in self.formulas_at.items()}
        other.formulas_by_label = {k: set(v) for k, v in self.formulas_by_label.items()}
        other.poison_at = {k: set(v) for k, v in self.poison_at.items()}
        other.sterms = set(self.sterms)
        other.words_of = {k: set(v) for k, v in self.words_of.items()}
        other.boxes_at = {k: list(v) for k, v in self.boxes_at.items()}
        other.knows = {k: list(v) for k, v in self.knows.items()}
        other.cells = {a: dict(m) for a, m in self.cells.items()}
        other.queue = deque()
        other.betas = list(self.betas)
        other.beta_cursor = self.beta_cursor
        other.poss_pending = list(self.poss_pending)
        other.poss_done = set(self.poss_done)
        other.closed = self.closed
        other.trace = list(self.trace) if self.trace is not None else None
        return other


class _Solver:
    def __init__(self, root: Formula, vocab: Vocab, limits: SolveLimits, tracing: bool,
                 term_observer=None):
        self.root = root
        self.vocab = vocab
        self.limits = limits
        self.tracing = tracing
        self.observer = term_observer
        self.stats = SolveStats()
        self.deadline = time.monotonic() + limits.timeout_s
        self.budget = word_budget(root)
        self.last_closed_trace: tuple[str, ...] | None = None
        self._neg_cache: dict[Formula, Formula] = {}
        self._complement: dict[Formula, Formula] = {}
        self._dia_step: dict[Formula, Formula] = {}
        self._box_step: dict[tuple[Formula, str], Formula | None] = {}
        self._nd_alts: dict[Formula, tuple[Formula, Formula]] = {}

    # -- shared helpers ----------------------------------------------------

    def _negated(self, phi: Formula) -> Formula:
        cached = self._neg_cache.get(phi)
        if cached is None:
            cached = nnf_negate(phi)
            self._neg_cache[phi] = cached
        return cached

    def _close(self, br: _Branch, rule: str, detail: str) -> None:
        br.closed = True
        if br.trace is not None:
            br.trace.append(f"RULE {rule} | {detail} | closed")
            self.last_closed_trace = tuple(br.trace)

    def _tick(self) -> None:
        if time.monotonic() > self.deadline:
            raise LimitExceeded(f"timeout after {self.limits.timeout_s}s")

    # -- term insertion (non-branching rules fire eagerly) ------------------

    def _push_fterm(self, br: _Branch, label: int, word: Word, phi: Formula,
                    rule: str, premises: str | None) -> None:
        br.queue.append(("f", label, word, phi, rule, premises))

    def _push_sterm(self, br: _Branch, label: int, word: Word,
                    rule: str, premises: str | None) -> None:
        br.queue.append(("s", label, word, rule, premises))

    def _insert_fterm(self, br: _Branch, label: int, word: Word, phi: Formula,
                      rule: str, premises: str | None) -> None:
        term = (label, word, phi)
        if term in br.fterms:
            return
        self.stats.terms += 1
        if self.stats.terms > self.limits.max_terms:
            raise LimitExceeded(f"term cap {self.limits.max_terms} exceeded")
        br.fterms.add(term)
        at = br.formulas_at.setdefault((label, word), set())
        at.add(phi)
        br.formulas_by_label[label].add((word, phi))
        if self.observer is not None:
            self.observer(term)
        if br.trace is not None:
            br.trace.append(f"RULE {rule} | {premises} | {_fterm_text(label, word, phi)}")
        if br.closed:
            return

        poison = br.poison_at.get((label, word))
        if poison is not None and phi in poison:
            self._close(br, "Marking",
                        f"{_fterm_text(label, word, phi)} contradicts a knowledge body"
                        if br.trace is not None else "")
            return

        if isinstance(phi, Bottom):
            self._close(br, "Clash", _fterm_text(label, word, phi) if br.trace is not None else "")
            return
        if isinstance(phi, Top):
            return
        if isinstance(phi, Atom) or (isinstance(phi, Not) and isinstance(phi.sub, Atom)):
            complement = self._complement.get(phi)
            if complement is None:
                complement = phi.sub if isinstance(phi, Not) else Not(phi)
                self._complement[phi] = complement
            if complement in at:
                self._close(
                    br, "Clash",
                    f"{_fterm_text(label, word, phi)}, {_fterm_text(label, word, complement)}"
                    if br.trace is not None else "",
                )
                return
            if word:
                self._push_fterm(br, label, (), phi, "ConstantValuationUp",
                                 _fterm_text(label, word, phi) if br.trace is not None else None)
            return
        premise = _fterm_text(label, word, phi) if br.trace is not None else None
        if isinstance(phi, And):
            self._push_fterm(br, label, word, phi.left, "And", premise)
            self._push_fterm(br, label, word, phi.right, "And", premise)
            return
        if isinstance(phi, Or):
            br.betas.append(term)
            return
        if isinstance(phi, Know):
            br.knows.setdefault((phi.agent, word), []).append((label, phi.sub))
            # reflexivity makes the body itself poisonous at this projection
            br.poison_at.setdefault((label, word), set()).add(self._negated(phi.sub))
            if self._negated(phi.sub) in at:
                self._close(
                    br, "Marking",
                    f"{_fterm_text(label, word, phi)}, "
                    f"{_fterm_text(label, word, self._negated(phi.sub))}"
                    if br.trace is not None else "",
                )
                return
            for mate in sorted(br.cells[phi.agent][label]):
                if (mate, word) in br.sterms:
                    self._push_fterm(
                        br, mate, word, phi.sub, "Knowledge",
                        f"{premise}, {_sterm_text(mate, word)}, (s{label},s{mate})_{phi.agent}"
                        if br.trace is not None else None,
                    )
            return
        if isinstance(phi, Poss):
            br.poss_pending.append(term)
            return
        if isinstance(phi, Dia):
            obs = phi.obs
            if isinstance(obs, Empty):
                self._close(br, "Clash", premise or "")
            elif isinstance(obs, Epsilon):
                self._push_fterm(br, label, word, phi.sub, "DiamondEpsilon", premise)
            elif isinstance(obs, Letter):
                extended = word + (obs.symbol,)
                self._push_sterm(br, label, extended, "DiamondProject", premise)
                self._push_fterm(br, label, extended, phi.sub, "DiamondProject", premise)
            elif isinstance(obs, Concat):
                product = self._dia_step.get(phi)
                if product is None:
                    product = Dia(obs.left, Dia(obs.right, phi.sub))
                    self._dia_step[phi] = product
                self._push_fterm(br, label, word, product, "DiamondDecompose", premise)
            else:
                assert isinstance(obs, Union)
                br.betas.append(term)
            return
        assert isinstance(phi, Box)
        obs = phi.obs
        if is_empty(obs):
            return  # denotes no observation; vacuously true
        br.boxes_at.setdefault((label, word), []).append(phi)
        if is_nullable(obs):
            self._push_fterm(br, label, word, phi.sub, "EmptyBox", premise)
        for letter in self.vocab.alphabet.letters:
            extended = word + (letter,)
            if (label, extended) in br.sterms:
                product = self._box_residue(phi, letter)
                if product is not None:
                    self._push_fterm(
                        br, label, extended, product, "BoxProject",
                        f"{premise}, {_sterm_text(label, extended)}"
                        if br.trace is not None else None,
                    )

    def _box_residue(self, box: Box, letter: str) -> Formula | None:
        """[pi % letter] body, or None when the residual denotes nothing."""
        key = (box, letter)
        try:
            return self._box_step[key]
        except KeyError:
            residue = letter_residual(box.obs, letter)
            product = None if is_empty(residue) else Box(residue, box.sub)
            self._box_step[key] = product
            return product

    def _insert_sterm(self, br: _Branch, label: int, word: Word,
                      rule: str, premises: str | None) -> None:
        if (label, word) in br.sterms:
            return
        if len(word) > self.budget:
            raise InternalSolverError(
                f"survival word {word} exceeds the projection budget {self.budget}"
            )
        self.stats.terms += 1
        if self.stats.terms > self.limits.max_terms:
            raise LimitExceeded(f"term cap {self.limits.max_terms} exceeded")
        br.sterms.add((label, word))
        br.words_of[label].add(word)
        if br.trace is not None:
            br.trace.append(f"RULE {rule} | {premises} | {_sterm_text(label, word)}")
        mark = _sterm_text(label, word) if br.trace is not None else None
        if word:
            self._push_sterm(br, label, word[:-1], "SurvivalChain", mark)
            for box in br.boxes_at.get((label, word[:-1]), ()):
                product = self._box_residue(box, word[-1])
                if product is not None:
                    self._push_fterm(
                        br, label, word, product, "BoxProject",
                        f"{_fterm_text(label, word[:-1], box)}, {mark}"
                        if br.trace is not None else None,
                    )
        for agent in self.vocab.agents:
            cell = br.cells[agent][label]
            entries = br.knows.get((agent, word))
            if not entries:
                continue
            for know_label, body in entries:
                if know_label in cell:
                    self._push_fterm(
                        br, label, word, body, "Knowledge",
                        f"(s{know_label} {_word_text(word)} K {agent} ...), {mark}"
                        if br.trace is not None else None,
                    )

    def _merge_cells(self, br: _Branch, agent: str, left: int, right: int) -> None:
        cells = br.cells[agent]
        if cells[left] is cells[right] or cells[left] == cells[right]:
            return
        merged = cells[left] | cells[right]
        for member in merged:
            cells[member] = merged
        if br.trace is not None:
            br.trace.append(
                f"RULE Relation | (s{left},s{right})_{agent} | cell "
                + "{" + ",".join(f"s{m}" for m in sorted(merged)) + "}_" + agent
            )
        # knowledge terms now see new cell mates
        for (know_agent, word), entries in br.knows.items():
            if know_agent != agent:
                continue
            for know_label, body in entries:
                if know_label in merged:
                    for mate in sorted(merged):
                        if (mate, word) in br.sterms:
                            self._push_fterm(
                                br, mate, word, body, "Knowledge",
                                f"(s{know_label} {_word_text(word)} K {agent} ...), "
                                f"{_sterm_text(mate, word)}"
                                if br.trace is not None else None,
                            )

    # -- saturation and search ----------------------------------------------

    def _saturate(self, br: _Branch) -> None:
        while br.queue and not br.closed:
            self._tick()
            op = br.queue.popleft()
            if op[0] == "f":
                _, label, word, phi, rule, premises = op
                self._insert_fterm(br, label, word, phi, rule, premises)
            else:
                _, label, word, rule, premises = op
                self._insert_sterm(br, label, word, rule, premises)

    def _blocked(self, br: _Branch, label: int, word: Word, phi: Poss) -> bool:
        agent = phi.agent
        seed: set[tuple[Word, Formula]] = {(word, phi.sub)}
        for entry in br.formulas_by_label[label]:
            entry_formula = entry[1]
            if isinstance(entry_formula, (Know, Poss)) and entry_formula.agent == agent:
                seed.add(entry)
        candidates = [label]
        current = label
        while True:
            parent, via = br.label_meta[current]
            if parent is None or via != agent:
                break
            candidates.append(parent)
            current = parent
        return any(seed <= br.formulas_by_label[candidate] for candidate in candidates)

    def _apply_possibility(self, br: _Branch, label: int, word: Word, phi: Poss) -> None:
        fresh = br.n_labels
        br.n_labels += 1
        br.label_meta[fresh] = (label, phi.agent)
        br.formulas_by_label[fresh] = set()
        br.words_of[fresh] = set()
        for agent in self.vocab.agents:
            br.cells[agent][fresh] = frozenset({fresh})
        premise = _fterm_text(label, word, phi) if br.trace is not None else None
        if br.trace is not None:
            br.trace.append(
                f"RULE Possibility | {premise} | (s{label},s{fresh})_{phi.agent}, "
                f"{_sterm_text(fresh, word)}, {_fterm_text(fresh, word, phi.sub)}"
            )
        self._merge_cells(br, phi.agent, label, fresh)
        self._push_sterm(br, fresh, word, "Possibility", premise)
        self._push_fterm(br, fresh, word, phi.sub, "Possibility", premise)

    def search(self, br: _Branch, depth: int) -> _Branch | None:
        self.stats.max_depth = max(self.stats.max_depth, depth)
        while True:
            self._saturate(br)
            if br.closed:
                if br.trace is not None and self.last_closed_trace is None:
                    self.last_closed_trace = tuple(br.trace)
                return None

            beta = None
            while br.beta_cursor < len(br.betas):
                candidate = br.betas[br.beta_cursor]
                br.beta_cursor += 1
                label, word, phi = candidate
                if isinstance(phi, Or):
                    alternatives = (phi.left, phi.right)
                else:
                    alts = self._nd_alts.get(phi)
                    if alts is None:
                        obs = phi.obs  # type: ignore[attr-defined]
                        alts = (Dia(obs.left, phi.sub), Dia(obs.right, phi.sub))  # type: ignore[attr-defined]
                        self._nd_alts[phi] = alts
                    alternatives = alts
                present = br.formulas_at.get((label, word), ())
                if not any(alt in present for alt in alternatives):
                    beta = (candidate, alternatives)
                    break
                # some alternative already holds; the rule does not fire
            if beta is not None:
                (label, word, phi), alternatives = beta
                rule = "Or" if isinstance(phi, Or) else "DiamondNDDecompose"
                premise = _fterm_text(label, word, phi) if br.trace is not None else None
                for index, alt in enumerate(alternatives):
                    self.stats.branches += 1
                    if self.stats.branches > self.limits.max_branches:
                        raise LimitExceeded(f"branch cap {self.limits.max_branches} exceeded")
                    child = br.clone()
                    if child.trace is not None:
                        child.trace.append(
                            f"RULE {rule} | {premise} | alternative {index + 1}: "
                            f"{formula_to_text(alt)}"
                        )
                    self._push_fterm(child, label, word, alt, rule, premise)
                    found = self.search(child, depth + 1)
                    if found is not None:
                        return found
                return None

            applied = False
            for term in br.poss_pending:
                if term in br.poss_done:
                    continue
                label, word, phi = term
                assert isinstance(phi, Poss)
                if self._blocked(br, label, word, phi):
                    continue
                br.poss_done.add(term)
                self._apply_possibility(br, label, word, phi)
                applied = True
                break
            if applied:
                continue
            return br  # saturated and open

    # -- model extraction ----------------------------------------------------

    def extract_model(self, br: _Branch) -> PointedModel:
        labels = sorted(br.words_of)
        names = {label: f"s{label}" for label in labels}
        partitions: dict[str, tuple[frozenset[str], ...]] = {}
        for agent in self.vocab.agents:
            seen: list[frozenset[int]] = []
            for label in labels:
                cell = br.cells[agent][label]
                if cell not in seen:
                    seen.append(cell)
            partitions[agent] = tuple(frozenset(names[l] for l in cell) for cell in seen)
        valuation = {
            names[label]: frozenset(
                phi.name
                for phi in br.formulas_at.get((label, ()), set())
                if isinstance(phi, Atom)
            )
            for label in labels
        }
        expectations = {}
        for label in labels:
            words = br.words_of[label]
            maximal = {
                w for w in words
                if not any(v != w and v[: len(w)] == w for v in words)
            }
            expectations[names[label]] = sum_of_words(maximal)
        model = ExpectationModel(
            alphabet=self.vocab.alphabet,
            agents=self.vocab.agents,
            atoms=self.vocab.atoms,
            states=tuple(names[l] for l in labels),
            partitions=partitions,
            valuation=valuation,
            exp=expectations,
        )
        try:
            require_valid(model)
        except ValueError as exc:  # pragma: no cover - indicates a rule bug
            raise InternalSolverError(f"extracted model is invalid: {exc}") from exc
        return PointedModel(model, names[0])


def _check_declared(phi: Formula, vocab: Vocab) -> None:
    undeclared_letters = letters_in_formula(phi) - set(vocab.alphabet.letters)
    if undeclared_letters:
        raise ValueError(f"formula uses undeclared letters {sorted(undeclared_letters)}")
    undeclared_agents = agents_in(phi) - set(vocab.agents)
    if undeclared_agents:
        raise ValueError(f"formula uses undeclared agents {sorted(undeclared_agents)}")
    undeclared_atoms = atoms_in(phi) - set(vocab.atoms)
    if undeclared_atoms:
        raise ValueError(f"formula uses undeclared atoms {sorted(undeclared_atoms)}")


def solve(
    phi: Formula,
    vocab: Vocab | None = None,
    limits: SolveLimits | None = None,
    want_trace: bool = False,
    verify: bool = True,
    _term_observer=None,
) -> SolveResult:
    """Decide satisfiability; SAT results carry a checked witness model.

    Resource caps yield an indeterminate result, never an unsatisfiability
    verdict.
    """
    if vocab is None:
        vocab = infer_vocab(phi)
    else:
        _check_declared(phi, vocab)
    limits = limits or SolveLimits()
    nnf = to_nnf(phi)
    solver = _Solver(nnf, vocab, limits, want_trace, _term_observer)
    started = time.monotonic()
    branch = _Branch(vocab.agents, want_trace)
    if branch.trace is not None:
        branch.trace.append(
            f"RULE Initialize | input {formula_to_text(nnf)} | "
            f"(s0 eps {formula_to_text(nnf)}), (s0 eps ok), (s0,s0)_i for each agent i"
        )
    solver._push_fterm(branch, 0, (), nnf, "Initialize", "input")
    solver._push_sterm(branch, 0, (), "Initialize", "input")
    solver.stats.branches = 1
    try:
        open_branch = solver.search(branch, 0)
    except LimitExceeded as exc:
        solver.stats.elapsed_s = time.monotonic() - started
        return SolveResult("indeterminate", None, str(exc), solver.stats, None)
    solver.stats.elapsed_s = time.monotonic() - started
    if open_branch is None:
        trace = solver.last_closed_trace if want_trace else None
        return SolveResult("unsat", None, None, solver.stats, trace)
    witness = solver.extract_model(open_branch)
    if verify:
        if not check(witness.model, witness.point, nnf):
            raise InternalSolverError(
                "open branch produced a model that does not satisfy the input"
            )
    trace = tuple(open_branch.trace) if want_trace and open_branch.trace is not None else None
    return SolveResult("sat", witness, None, solver.stats, trace)
