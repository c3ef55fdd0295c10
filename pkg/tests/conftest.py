import random
from pathlib import Path

import pytest

from sepgame.machine import (IAcquire, IAssign, INop, IRelease, MachineState,
                             MemoryState, mstate)
from sepgame.maps import fmap
from sepgame.syntax import Lit, Var, parse_universe
from sepgame.traces import OK, CodeTransition, Trace

CORPUS = Path(__file__).parent / "corpus"

PROGRAMS = ["par_writes", "framed_assign", "lock_transfer", "seq_load_store",
            "conj_precise", "if_def", "while_count"]
EMPTY_CTX_PROGRAMS = ["par_writes", "framed_assign", "lock_transfer",
                      "seq_load_store", "if_def", "while_count"]


@pytest.fixture(scope="session")
def tiny_universe():
    return parse_universe(
        "vars = x, y\nlocs = 2\nvals = 0..3\nperms = 1/2, 1\nlocks = r\n"
        "maxlen = 4\nenv = passive\n")


@pytest.fixture(scope="session")
def micro_universe():
    # small enough for exhaustive sweeps
    return parse_universe(
        "vars = x\nlocs = 2\nvals = 0..1\nperms = 1/2, 1\nlocks = r\n"
        "maxlen = 2\nenv = passive\n")


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text()


class TraceGen:
    """Seeded random traces for the algebra tests; steps need not chain."""

    def __init__(self, seed=0):
        self.rng = random.Random(seed)
        self.states = []
        for x in (0, 1):
            for locks in (frozenset(), frozenset(["r"])):
                self.states.append(
                    MachineState(MemoryState(fmap({"x": x}), fmap()), locks))
        self.instrs = [INop(), IAssign("x", Lit(1)), IAssign("x", Var("x")),
                       IAcquire("r"), IRelease("r")]

    def state(self):
        return self.rng.choice(self.states)

    def step(self):
        return CodeTransition(self.state(), self.rng.choice(self.instrs),
                              self.state(), OK)

    def trace(self, max_len=4, source=None, target=None):
        n = self.rng.randrange(max_len + 1)
        steps = tuple(self.step() for _ in range(n))
        return Trace(source or self.state(), steps, target or self.state())

    def chained_pair(self):
        mid = self.state()
        return (self.trace(target=mid), self.trace(source=mid))
