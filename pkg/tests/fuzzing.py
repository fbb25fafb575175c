"""Grammar fuzzing: random and mutated .fss texts must parse or fail with a location."""

import random

from ffkoopman.errors import NotPrime, ParseError
from ffkoopman.sysdef import FssSystem, load_example, parse_system, render_system

ALPHABET = list("x1y2 +-*^()=#\n\t0") + ["field", "vars", "update", "output", " 3", "x1", "é"]


def check_outcome(text: str) -> str:
    try:
        sys = parse_system(text)
    except ParseError as exc:
        assert exc.line >= 1 and exc.col >= 1
        return "error"
    except NotPrime as exc:
        assert exc.line is not None and exc.col is not None
        return "error"
    assert isinstance(sys, FssSystem)
    assert parse_system(render_system(sys)) == sys
    return "ok"


def mutate(rng: random.Random, text: str) -> str:
    chars = list(text)
    for _ in range(rng.randint(1, 4)):
        op = rng.randrange(3)
        pos = rng.randrange(len(chars) + 1)
        if op == 0:
            chars.insert(pos, rng.choice(ALPHABET))
        elif op == 1 and chars:
            del chars[min(pos, len(chars) - 1)]
        elif chars:
            chars[min(pos, len(chars) - 1)] = rng.choice(ALPHABET)
    return "".join(chars)


def run_fuzz(count: int = 10_000, seed: int = 20240601, examples=("biochem", "obs3", "d1", "hidden")) -> dict:
    """Outcome counts; any crash propagates as an exception."""
    rng = random.Random(seed)
    seeds = [render_system(load_example(n)) for n in examples]
    outcomes = {"ok": 0, "error": 0}
    for i in range(count):
        if i % 5 == 0:
            text = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 40)))
        else:
            text = mutate(rng, rng.choice(seeds))
        outcomes[check_outcome(text)] += 1
    return outcomes
