import pytest
from hypothesis import given, strategies as st

from slpforge.repair import Variant, compress
from slpforge.slp import (
    SLP, CapacityError, ParseError, Production, SLPError, Symbol, expand, expand_runs,
    expansion_lengths, from_rules, parse, serialize, size, validate,
)

EXAMPLE1 = from_rules([
    ("S", ["X3", "X3", "X3", "X1", "a"]),
    ("X1", ["aa"]),
    ("X2", ["X1", "X1"]),
    ("X3", ["X2", "X2"]),
])
ABC = from_rules([("S", ["A", "A"]), ("A", ["abc"])])


def test_validate_examples():
    assert validate(from_rules([("S", ["a"])])).ok
    assert validate(ABC).ok
    cyclic = from_rules([("S", ["A"]), ("A", ["S"])])
    report = validate(cyclic)
    assert not report.ok
    assert any("cycle" in v and "S" in v and "A" in v for v in report.violations)


def test_validate_reports_duplicates_and_undefined():
    s, a = 0, 1
    dup = SLP((Production(s, (Symbol(True, a),)), Production(a, (Symbol(False, 97),)),
               Production(a, (Symbol(False, 98),))), s)
    assert any("duplicate" in v for v in validate(dup).violations)
    undefined = SLP((Production(s, (Symbol(True, 7),)),), s)
    assert any("undefined" in v for v in validate(undefined).violations)
    assert not validate(SLP((), 0)).ok


def test_length_one_bodies_are_allowed():
    assert validate(from_rules([("S", ["A", "A"]), ("A", ["b"])])).ok


def test_expand_examples():
    assert expand(ABC) == b"abcabc"
    assert expand(from_rules([("S", ["a"])])) == b"a"
    assert expand(EXAMPLE1) == b"a" * 27
    assert expand(ABC, 1) == b"abc"


def test_expand_undefined_nonterminal():
    with pytest.raises(SLPError):
        expand(ABC, 5)


def test_size_examples():
    assert size(ABC) == 5
    assert size(from_rules([("S", ["a"])])) == 1
    assert size(EXAMPLE1) == 11


def test_expand_budget():
    with pytest.raises(CapacityError, match="limit of 20"):
        expand(EXAMPLE1, budget=20)


def test_expand_deep_chain_is_not_recursive():
    # 5000 nested rules would overflow a recursive expander
    rules = [("S", ["N1", "N1"])] + [(f"N{i}", [f"N{i + 1}", "a"]) for i in range(1, 5000)] + [("N5000", ["b"])]
    slp = from_rules(rules)
    word = expand(slp)
    assert len(word) == 2 * 5000
    assert expansion_lengths(slp)[0] == len(word)


def test_expand_large_doubling_chain():
    depth = 24
    rules = [("S", [f"D{depth}", "b"])] + [(f"D{i}", [f"D{i - 1}", f"D{i - 1}"]) for i in range(1, depth + 1)]
    rules.append(("D0", ["a"]))
    slp = from_rules(rules)
    word = expand(slp)
    assert len(word) == 2**depth + 1 and word[-2:] == b"ab"
    assert expand_runs(slp) == ((97, 2**depth), (98, 1))


def test_serialize_format():
    assert serialize(ABC) == "S -> A A\nA -> 'a' 'b' 'c'"


def test_serialize_start_first():
    slp = SLP((Production(1, (Symbol(False, 97), Symbol(False, 97))),
               Production(0, (Symbol(True, 1), Symbol(True, 1)))), 0)
    assert serialize(slp).splitlines()[0] == "S -> X1 X1"


def test_round_trip_example1():
    assert parse(serialize(EXAMPLE1)) == EXAMPLE1


def test_parse_cycle_rejected():
    with pytest.raises(SLPError, match="cycle"):
        parse("S -> S")


def test_parse_duplicate_rejected():
    with pytest.raises(SLPError, match="duplicate"):
        parse("S -> A A\nA -> 'a'\nA -> 'b'")


@pytest.mark.parametrize("text,line,col", [
    ("S -> 'a' ?", 1, 10),
    ("S 'a'", 1, 1),
    ("S -> A\n\nA ->", 3, 5),
    ("S -> 'ab'", 1, 6),
])
def test_parse_errors_have_position(text, line, col):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert (info.value.line, info.value.column) == (line, col)


def test_parse_comments_blank_lines_and_escapes():
    slp = parse("# grammar\n\nS -> A '#' '\\x00' A  # trailing\nA -> '\\'' ' '\n")
    assert expand(slp) == b"' #\x00' "


@given(st.binary(min_size=1, max_size=40), st.sampled_from(list(Variant)))
def test_round_trip_generated(word, variant):
    slp = compress(word, variant)
    assert validate(slp).ok
    back = parse(serialize(slp))
    assert back == slp
    assert expand(back) == word


@given(st.binary(min_size=1, max_size=60))
def test_lengths_match_expansion(word):
    slp = compress(word)
    lengths = expansion_lengths(slp)
    for head, body in slp.productions:
        assert lengths[head] == len(expand(slp, head))
