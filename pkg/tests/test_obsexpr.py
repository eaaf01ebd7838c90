import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from obslogic.obsexpr import (
    EMPTY,
    EPSILON,
    Alphabet,
    Concat,
    Letter,
    ParseError,
    UndeclaredSymbolError,
    Union,
    in_prefixes,
    is_empty,
    is_nullable,
    lang,
    letter_residual,
    obsexpr_to_text,
    parse_obsexpr,
    prefix_language,
    residual,
    simplify,
    size,
    sum_of_words,
)

ABC = Alphabet(("a", "b", "c"))


def words(*texts):
    return frozenset(tuple(t) if t else () for t in texts)


def expressions(letters=("a", "b"), max_leaves=4):
    leaf = st.sampled_from([EMPTY, EPSILON] + [Letter(x) for x in letters])
    return st.recursive(
        leaf,
        lambda sub: st.builds(Concat, sub, sub) | st.builds(Union, sub, sub),
        max_leaves=max_leaves,
    )


def brute_residual(expr, word):
    """Independent oracle: enumerate, filter by prefix, strip."""
    n = len(word)
    return frozenset(v[n:] for v in lang(expr) if v[:n] == word)


class TestLang:
    def test_motivating_pair(self):
        expr = parse_obsexpr("l . d + r . u")
        assert lang(expr) == words("ld", "ru")

    def test_epsilon_is_concat_identity(self):
        assert lang(EPSILON) == words("")
        assert lang(Concat(EPSILON, Letter("a"))) == words("a")

    def test_empty_annihilates_concat(self):
        assert lang(Concat(EMPTY, Letter("a"))) == frozenset()

    @given(expressions())
    def test_words_no_longer_than_size(self, expr):
        assert all(len(w) <= size(expr) for w in lang(expr))


class TestResidual:
    def test_worked_example(self):
        assert lang(residual(parse_obsexpr("l . d"), ("l",))) == words("d")
        assert lang(residual(parse_obsexpr("l . d + r . u"), ("l",))) == words("d")

    def test_empty_word_residual_is_identity(self):
        expr = parse_obsexpr("a . b + c")
        assert residual(expr, ()) is expr

    def test_union_concat_residual(self):
        assert lang(residual(parse_obsexpr("(a + b) . c"), ("b",))) == words("c")

    def test_residual_may_be_empty(self):
        assert is_empty(residual(parse_obsexpr("a . b"), ("b",)))

    @given(expressions(), st.lists(st.sampled_from("ab"), max_size=3).map(tuple))
    @settings(max_examples=300)
    def test_matches_enumeration(self, expr, word):
        assert lang(residual(expr, word)) == brute_residual(expr, word)

    @given(
        expressions(),
        st.lists(st.sampled_from("ab"), max_size=2).map(tuple),
        st.lists(st.sampled_from("ab"), max_size=2).map(tuple),
    )
    def test_composes(self, expr, w, v):
        assert lang(residual(expr, w + v)) == lang(residual(residual(expr, w), v))


class TestEmptinessAndNullability:
    def test_structural_emptiness(self):
        assert is_empty(parse_obsexpr("0 + 0 . a"))
        assert not is_empty(EPSILON)

    def test_nullability(self):
        assert is_nullable(parse_obsexpr("eps + a"))
        assert not is_nullable(parse_obsexpr("a . b"))
        assert is_nullable(parse_obsexpr("(a + eps) . (b + eps)"))

    @given(expressions())
    def test_agree_with_language(self, expr):
        assert is_empty(expr) == (lang(expr) == frozenset())
        assert is_nullable(expr) == (() in lang(expr))


class TestPrefixes:
    def test_motivating_prefix_set(self):
        expr = parse_obsexpr("l . d + r . u")
        assert prefix_language(expr) == words("", "l", "ld", "r", "ru")
        assert in_prefixes(expr, ("l",))
        assert not in_prefixes(expr, ("d",))

    def test_empty_word_always_prefix_of_nonempty_language(self):
        assert in_prefixes(parse_obsexpr("a + b . c"), ())

    def test_not_prefix(self):
        assert not in_prefixes(parse_obsexpr("a . b"), ("b", "a"))

    @given(expressions(), st.lists(st.sampled_from("ab"), max_size=3).map(tuple))
    def test_matches_prefix_language(self, expr, word):
        assert in_prefixes(expr, word) == (word in prefix_language(expr))


class TestSumOfWords:
    def test_direct(self):
        expr = sum_of_words(words("ab", "c"))
        assert lang(expr) == words("ab", "c")

    def test_just_epsilon(self):
        assert lang(sum_of_words(words(""))) == words("")

    def test_rejects_empty_set(self):
        with pytest.raises(ValueError):
            sum_of_words(frozenset())

    @given(st.sets(st.lists(st.sampled_from("abc"), max_size=3).map(tuple), min_size=1, max_size=5))
    def test_round_trip(self, word_set):
        assert lang(sum_of_words(frozenset(word_set))) == frozenset(word_set)


class TestSimplify:
    @given(expressions())
    def test_preserves_language(self, expr):
        assert lang(simplify(expr)) == lang(expr)

    def test_collapses_trivial_units(self):
        assert simplify(parse_obsexpr("0 + a")) == Letter("a")
        assert simplify(parse_obsexpr("eps . a")) == Letter("a")
        assert is_empty(simplify(parse_obsexpr("0 . a")))

    @given(expressions(), st.sampled_from("ab"))
    def test_letter_residual_never_grows_past_bound(self, expr, letter):
        # carried-over factors stay as-is; only the spine is rebuilt
        assert size(letter_residual(expr, letter)) <= 2 * size(expr) + 1


class TestGrammar:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("0", frozenset()),
            ("eps", words("")),
            ("a . b + c", words("ab", "c")),
            ("(a + b) . c", words("ac", "bc")),
            ("a^3", words("aaa")),
            ("a^0", words("")),
            ("(a + b)^<=1", words("", "a", "b")),
            ("(a)^{<=2}", words("", "a", "aa")),
        ],
    )
    def test_parse(self, text, expected):
        assert lang(parse_obsexpr(text)) == expected

    def test_rejects_undeclared_letter(self):
        with pytest.raises(UndeclaredSymbolError):
            parse_obsexpr("a . z", Alphabet(("a", "b")))

    def test_syntax_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse_obsexpr("a . . b")
        assert err.value.column == 5

    @given(expressions(letters=("a", "b", "go")))
    def test_print_parse_round_trip(self, expr):
        assert parse_obsexpr(obsexpr_to_text(expr)) == expr


class TestAlphabet:
    def test_rejects_duplicates_and_empties(self):
        with pytest.raises(ValueError):
            Alphabet(("a", "a"))
        with pytest.raises(ValueError):
            Alphabet(())
        with pytest.raises(ValueError):
            Alphabet(("a b",))
        with pytest.raises(ValueError):
            Alphabet(("eps",))

    def test_word_key_orders_lexicographically(self):
        pool = [(), ("b",), ("a",), ("a", "b"), ("b", "a")]
        assert sorted(pool, key=ABC.word_key) == [
            (),
            ("a",),
            ("a", "b"),
            ("b",),
            ("b", "a"),
        ]
