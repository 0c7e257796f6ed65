import pytest

from treemeasure.automata import (AND, OR, AutomatonError, GameAutomaton, ParseError, Transition, builtin,
                                  has_distinct_children, is_deterministic, language_w,
                                  normalize_distinct_children, parse_automaton, render_automaton, validate)

L1_TEXT = """\
# one a on every branch
alphabet a b c
states q1 top
initial q1
priority q1 1
trans q1 a AND top top
trans q1 b AND q1 q1
trans q1 c AND q1 q1
sink top ACCEPT
"""


def test_parse_matches_builtin():
    assert parse_automaton(L1_TEXT) == builtin("L1")


@pytest.mark.parametrize("name", ["L1", "L2", "L3", "Linf"])
def test_render_round_trip(name):
    a = builtin(name)
    assert parse_automaton(render_automaton(a)) == a


def test_render_round_trip_w():
    a = language_w(0, 3)
    assert parse_automaton(render_automaton(a)) == a
    assert not is_deterministic(a)
    assert is_deterministic(builtin("L2"))


def test_duplicate_priority_is_reported_with_line():
    bad = L1_TEXT + "priority q1 3\n"
    with pytest.raises(ParseError) as err:
        parse_automaton(bad)
    assert err.value.line == 10
    assert "duplicate priority" in str(err.value)


@pytest.mark.parametrize("text, fragment", [
    ("alphabet a\nstates q\ninitial q\npriority q 1\n", "missing transition"),
    ("alphabet a\nstates q\ninitial r\npriority q 1\ntrans q a AND q q\n", "undefined state"),
    ("alphabet a\nstates q\ninitial q\npriority q x\ntrans q a AND q q\n", "nonnegative integer"),
    ("alphabet a\nstates q\ninitial q\npriority q 1\ntrans q a XOR q q\n", "AND or OR"),
    ("alphabet a\nstates q\ninitial q\nfoo q\n", "unknown keyword"),
    ("states q\ninitial q\n", "missing 'alphabet'"),
    ("alphabet a\nstates q\ninitial q\npriority q 1\ntrans q b AND q q\ntrans q a AND q q\n", "undefined letter"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError) as err:
        parse_automaton(text)
    assert fragment in str(err.value)


def test_parse_error_column():
    with pytest.raises(ParseError) as err:
        parse_automaton("alphabet a\nstates q! r\n")
    assert (err.value.line, err.value.column) == (2, 8)


def test_validate_reports_codes():
    a = GameAutomaton(["a"], ["q", "top"], "q", {"q": 1, "top": 1},
                      {("q", "a"): Transition(AND, "q", "top"), ("top", "a"): Transition(OR, "q", "q")})
    d = validate(a)
    codes = {e.code for e in d.errors}
    assert "bad sink" in codes
    assert not d.ok


def test_equal_children_warns_but_sink_loops_do_not():
    d = validate(builtin("L1"))
    assert d.ok
    warned = {w.location for w in d.warnings}
    assert "q1,b" in warned
    assert not any(loc.startswith("top") for loc in warned)


def test_normalize_distinct_children():
    a = builtin("L2")
    assert not has_distinct_children(a)
    n = normalize_distinct_children(a)
    assert has_distinct_children(n)
    assert normalize_distinct_children(n) == n
    assert validate(n).ok
    assert len(n.states) == 2 * len(a.states)


def test_builtin_errors():
    with pytest.raises(ValueError):
        builtin("nope")
    with pytest.raises(ValueError):
        builtin("W", 3)
    with pytest.raises(ValueError):
        builtin("W", 2, 2)
    assert builtin("L", 2) == builtin("L2")
    assert builtin("L∞") == builtin("Linf")


def test_automaton_is_immutable():
    a = builtin("L1")
    with pytest.raises(AttributeError):
        a.initial = "top"
    assert isinstance(AutomatonError("x"), ValueError)
