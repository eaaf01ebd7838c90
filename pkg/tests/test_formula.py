import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from obslogic.formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    Bottom,
    Box,
    Dia,
    Implies,
    Know,
    Not,
    Or,
    Poss,
    Top,
    Vocab,
    classify_fragment,
    fl_closure,
    formula_to_text,
    infer_vocab,
    is_nnf,
    nnf_negate,
    parse_formula,
    size,
    to_nnf,
)
from obslogic.obsexpr import (
    EPSILON,
    Alphabet,
    Concat,
    Letter,
    ParseError,
    UndeclaredSymbolError,
    Union,
)
from obslogic.oracle import SearchBounds, candidate_set_models, SetEvaluator

VOCAB = Vocab(Alphabet(("a", "b")), ("i", "j"), ("p", "q", "debris", "power"))


def formulas(max_leaves=5):
    leaf = st.sampled_from([TRUE, FALSE, Atom("p"), Atom("q")])
    obs = st.sampled_from(
        [
            Letter("a"),
            Letter("b"),
            EPSILON,
            Concat(Letter("a"), Letter("b")),
            Union(Letter("a"), Letter("b")),
            Union(Letter("a"), EPSILON),
        ]
    )
    unary = [
        lambda sub: Not(sub),
        lambda sub: Know("i", sub),
        lambda sub: Poss("j", sub),
    ]
    return st.recursive(
        leaf,
        lambda sub: st.one_of(
            st.builds(And, sub, sub),
            st.builds(Or, sub, sub),
            st.builds(Implies, sub, sub),
            st.builds(Not, sub),
            st.builds(Know, st.sampled_from(["i", "j"]), sub),
            st.builds(Poss, st.sampled_from(["i", "j"]), sub),
            st.builds(Box, obs, sub),
            st.builds(Dia, obs, sub),
        ),
        max_leaves=max_leaves,
    )


class TestParsing:
    def test_running_example(self):
        phi = parse_formula("Khat i <a> p & <a> K i ~p")
        assert phi == And(
            Poss("i", Dia(Letter("a"), Atom("p"))),
            Dia(Letter("a"), Know("i", Not(Atom("p")))),
        )

    def test_constants(self):
        assert parse_formula("true") == TRUE
        assert parse_formula("false") == FALSE

    def test_box_over_grouped_body(self):
        phi = parse_formula("[l](K b ~debris & Khat a debris)", None)
        assert isinstance(phi, Box) and phi.obs == Letter("l")
        assert isinstance(phi.sub, And)

    def test_precedence(self):
        phi = parse_formula("p & q -> p | ~q")
        assert isinstance(phi, Implies)
        assert isinstance(phi.left, And)
        assert isinstance(phi.right, Or)

    def test_modalities_bind_tighter_than_and(self):
        phi = parse_formula("<a> p & q")
        assert isinstance(phi, And)
        assert isinstance(phi.left, Dia)

    def test_undeclared_symbols(self):
        with pytest.raises(UndeclaredSymbolError):
            parse_formula("K z p", VOCAB)
        with pytest.raises(UndeclaredSymbolError):
            parse_formula("K i zoom", VOCAB)
        with pytest.raises(UndeclaredSymbolError):
            parse_formula("<zap> p", VOCAB)

    def test_syntax_error_position(self):
        with pytest.raises(ParseError) as err:
            parse_formula("p & & q")
        assert err.value.column == 5

    @given(formulas())
    @settings(max_examples=300)
    def test_print_parse_round_trip(self, phi):
        assert parse_formula(formula_to_text(phi)) == phi


def model_bank():
    bounds = SearchBounds(2, 1, 2, Alphabet(("a", "b")), ("i", "j"), ("p", "q"))
    bank = list(itertools.islice(candidate_set_models(bounds), 600))
    rng = random.Random(4)
    return rng.sample(bank, 60)


BANK = model_bank()


def semantically_equal(phi, psi) -> bool:
    for sm in BANK:
        evaluator = SetEvaluator(sm)
        if evaluator.sat_states((), phi) != evaluator.sat_states((), psi):
            return False
    return True


class TestNnf:
    def test_de_morgan_with_dual(self):
        phi = Not(And(Atom("p"), Know("i", Atom("q"))))
        assert to_nnf(phi) == Or(Not(Atom("p")), Poss("i", Not(Atom("q"))))

    def test_box_negation_becomes_diamond(self):
        obs = Union(Letter("a"), Letter("b"))
        assert to_nnf(Not(Box(obs, Atom("p")))) == Dia(obs, Not(Atom("p")))

    def test_double_negation(self):
        assert to_nnf(Not(Not(Atom("p")))) == Atom("p")

    def test_trivial_modalities_rewritten(self):
        assert to_nnf(Dia(EPSILON, Atom("p"))) == Atom("p")
        assert to_nnf(parse_formula("<0> p")) == FALSE
        assert to_nnf(parse_formula("[0] p")) == TRUE

    @given(formulas())
    @settings(max_examples=200)
    def test_output_is_nnf_and_idempotent(self, phi):
        nnf = to_nnf(phi)
        assert is_nnf(nnf)
        assert to_nnf(nnf) == nnf

    @given(formulas(max_leaves=4))
    @settings(max_examples=60, deadline=None)
    def test_equivalent_on_small_models(self, phi):
        assert semantically_equal(phi, to_nnf(phi))

    @given(formulas(max_leaves=4))
    @settings(max_examples=40, deadline=None)
    def test_negation_is_complement(self, phi):
        nnf = to_nnf(phi)
        negated = nnf_negate(nnf)
        for sm in BANK[:20]:
            evaluator = SetEvaluator(sm)
            sat = evaluator.sat_states((), nnf)
            co = evaluator.sat_states((), negated)
            assert sat & co == frozenset()
            assert sat | co == frozenset(sm.states)


class TestFlClosure:
    def test_atom(self):
        assert fl_closure(Atom("p")) == frozenset({Atom("p"), Not(Atom("p"))})

    def test_diamond_word_decomposition(self):
        phi = Dia(Concat(Letter("a"), Letter("b")), Atom("p"))
        closure = fl_closure(phi)
        assert Dia(Letter("a"), Dia(Letter("b"), Atom("p"))) in closure
        assert Dia(Letter("b"), Atom("p")) in closure
        assert Atom("p") in closure
        assert Not(Atom("p")) in closure

    def test_union_box_splits(self):
        phi = Box(Union(Letter("a"), Letter("b")), Atom("p"))
        closure = fl_closure(phi)
        assert Box(Letter("a"), Atom("p")) in closure
        assert Box(Letter("b"), Atom("p")) in closure

    def test_residuals_of_boxes_included(self):
        phi = Box(Concat(Letter("a"), Letter("b")), Atom("p"))
        closure = fl_closure(phi)
        assert Box(Letter("b"), Atom("p")) in closure

    def test_rejects_non_nnf(self):
        with pytest.raises(ValueError):
            fl_closure(Implies(Atom("p"), Atom("q")))

    @given(formulas())
    @settings(max_examples=100, deadline=None)
    def test_contains_formula_and_is_fixpoint(self, phi):
        nnf = to_nnf(phi)
        closure = fl_closure(nnf)
        assert nnf in closure
        assert frozenset().union(*(fl_closure(psi) for psi in closure)) == closure

    @given(formulas())
    @settings(max_examples=100, deadline=None)
    def test_growth_stays_polynomial(self, phi):
        # sanity bound; flags blow-ups in the residual closure
        nnf = to_nnf(phi)
        n = max(size(nnf), 2)
        assert len(fl_closure(nnf)) <= 40 * n * n * n


class TestClassify:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("<a . b> p & K i q", "word-single"),
            ("Khat a ([u + r] p) & Khat b p", "starfree-multi"),
            ("p & ~q", "word-single"),
            ("K i p & K j p", "word-multi"),
            ("<a + b> p", "starfree-single"),
        ],
    )
    def test_examples(self, text, expected):
        assert classify_fragment(parse_formula(text)) == expected


class TestInferVocab:
    def test_collects_all_symbols(self):
        phi = parse_formula("Khat i <a> p & [b . c] K j q")
        vocab = infer_vocab(phi)
        assert vocab.alphabet.letters == ("a", "b", "c")
        assert vocab.agents == ("i", "j")
        assert vocab.atoms == ("p", "q")

    def test_falls_back_to_default_letter(self):
        vocab = infer_vocab(parse_formula("K i p"))
        assert vocab.alphabet.letters == ("a",)
