
import pytest
from hypothesis import given, settings, strategies as st

from ffkoopman.errors import (
    DuplicateUpdate,
    FssSyntaxError,
    MissingField,
    MissingUpdate,
    NotPrime,
    UndeclaredVariable,
)
from ffkoopman.sysdef import load_example, parse_system, render_system

from fuzzing import run_fuzz

EXAMPLES = ["biochem", "obs3", "d1", "hidden"]

OBS3_TEXT = """
field 3
vars x1 x2
update x1 = 2*x1 + x2
update x2 = x1 + x2   # linear
output z1 = x1^2 + x2
"""


@pytest.mark.parametrize("name", EXAMPLES)
def test_examples_round_trip(name):
    sys = load_example(name)
    again = parse_system(render_system(sys))
    assert again == sys


def test_obs3_contents():
    sys = parse_system(OBS3_TEXT)
    assert (sys.p, sys.n, sys.m) == (3, 2, 1)
    assert sys.step((2, 0)) == (1, 2)
    assert sys.output((2, 0)) == (1,)
    states, outs = sys.simulate((2, 0), 4)
    assert states == [(2, 0), (1, 2), (1, 0), (2, 1), (2, 0)]
    assert [z[0] for z in outs] == [1, 0, 1, 2, 1]


def test_expression_semantics():
    sys = parse_system("field 5\nvars a b\nupdate a = -(a - b)^2 * 3 + 7\nupdate b = (a)\n")
    for a in range(5):
        for b in range(5):
            assert sys.step((a, b)) == ((-3 * (a - b) ** 2 + 7) % 5, a)


def test_exponent_binds_tighter_than_product():
    sys = parse_system("field 7\nvars x\nupdate x = 2*x^3\n")
    assert sys.step((3,)) == (2 * 27 % 7,)


def test_huge_exponent_is_reduced():
    sys = parse_system("field 3\nvars x\nupdate x = x^100000000000000000000001\n")
    assert [sys.step((v,))[0] for v in range(3)] == [pow(v, 3, 3) for v in range(3)]


@pytest.mark.parametrize(
    "text, exc, line, col",
    [
        ("vars x\nupdate x = x\n", MissingField, 3, 1),
        ("field 2\nupdate x = x\n", FssSyntaxError, 2, 1),
        ("field 2\nvars x y\nupdate x = y\n", MissingUpdate, 4, 1),
        ("field 2\nvars x\nupdate x = y\n", UndeclaredVariable, 3, 12),
        ("field 2\nvars x\nupdate x = x\nupdate x = 1\n", DuplicateUpdate, 4, 8),
        ("field 2\nvars x\nupdate x = x +\n", FssSyntaxError, 3, 15),
        ("field 2\nvars x\nupdate x = (x\n", FssSyntaxError, 3, 14),
        ("field 2\nvars x\nupdate x = x $ 1\n", FssSyntaxError, 3, 14),
        ("field 2\nvars x\nupdate x = x^x\n", FssSyntaxError, 3, 14),
        ("field 2\nvars x field\n", FssSyntaxError, 2, 8),
        ("field 2\nfield 3\n", FssSyntaxError, 2, 1),
        ("field 2\nvars x\nupdate x = x\nvars y\n", FssSyntaxError, 4, 1),
        ("field 2\nvars x\nupdate x = update\n", FssSyntaxError, 3, 12),
        ("field 2\nvars x\nupdate x = x\noutput z = x\noutput z = 1\n", FssSyntaxError, 5, 8),
    ],
)
def test_located_errors(text, exc, line, col):
    with pytest.raises(exc) as info:
        parse_system(text)
    assert (info.value.line, info.value.col) == (line, col)


def test_not_prime_is_located():
    with pytest.raises(NotPrime) as info:
        parse_system("# header\nfield 15\nvars x\nupdate x = x\n")
    assert (info.value.line, info.value.col) == (2, 7)


def test_nesting_limit():
    deep = "(" * 500 + "x" + ")" * 500
    with pytest.raises(FssSyntaxError):
        parse_system(f"field 2\nvars x\nupdate x = {deep}\n")


def test_long_literal_rejected():
    with pytest.raises(FssSyntaxError):
        parse_system("field 2\nvars x\nupdate x = " + "1" * 5000 + "\n")


def test_non_ascii_rejected():
    with pytest.raises(FssSyntaxError):
        parse_system("field 2\nvars x²\nupdate x = x\n")


# ------------------------------------------------------------------ fuzzing


def test_fuzz_10k_never_crashes():
    outcomes = run_fuzz(10_000)
    assert outcomes["ok"] > 100 and outcomes["error"] > 1000


@st.composite
def expressions(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(st.sampled_from(["a", "b", "c", "0", "1", "4", "12"]))
    op = draw(st.sampled_from(["+", "-", "*", "^", "()"]))
    left = draw(expressions(depth=depth - 1))
    if op == "()":
        return f"({left})"
    if op == "^":
        return f"({left})^{draw(st.integers(0, 9))}"
    return f"{left} {op} {draw(expressions(depth=depth - 1))}"


@settings(max_examples=200, deadline=None)
@given(expressions(), st.sampled_from([2, 3, 5]))
def test_generated_expressions_parse_and_round_trip(expr, p):
    text = f"field {p}\nvars a b c\nupdate a = {expr}\nupdate b = b\nupdate c = c\n"
    sys = parse_system(text)
    assert parse_system(render_system(sys)) == sys
    py = expr.replace("^", "**")
    for pt in [(0, 0, 0), (1, 2, 3), (p - 1, 1, 0)]:
        env = dict(zip("abc", pt))
        assert sys.step(pt)[0] == eval(py, {}, env) % p
