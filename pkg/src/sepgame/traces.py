"""Execution traces and their algebra: sequential composition, restriction,
shuffles, parallel composition and hiding.

A trace stores its source, its code transitions and its target; environment
transitions are implicit because the environment may move between any two
machine states.  An error step, when present, is always the last step and
keeps its pre-state as post-state.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import machine
from .machine import (ERROR, INop, IAcquire, IRelease, MachineState, Return,
                      instr_to_text, mstate_to_text, parse_instr, parse_mstate)

OK = "ok"
ERR = "err"


class TraceError(Exception):
    pass


@dataclass(frozen=True)
class CodeTransition:
    pre: MachineState
    instr: object
    post: MachineState
    status: str = OK

    def __post_init__(self):
        if self.status not in (OK, ERR):
            raise TraceError(f"bad status {self.status!r}")
        if self.status == ERR and self.post != self.pre:
            raise TraceError("an error step keeps its pre-state")


@dataclass(frozen=True)
class Trace:
    source: MachineState
    steps: tuple
    target: MachineState

    def __post_init__(self):
        for k, st in enumerate(self.steps):
            if st.status == ERR and k != len(self.steps) - 1:
                raise TraceError("an error step must be the last step")

    def __len__(self):
        return len(self.steps)

    @property
    def errored(self) -> bool:
        return bool(self.steps) and self.steps[-1].status == ERR

    @property
    def returning_shape(self) -> bool:
        return not self.errored

    def prefix(self, k: int) -> "Trace":
        """The length-k path prefix; its target is the next code state."""
        if k == len(self.steps):
            return self
        return Trace(self.source, self.steps[:k], self.steps[k].pre)


def step_is_valid(step: CodeTransition, u) -> bool:
    """Check a code transition against the machine-step relation.

    An error step labelled nop is additionally accepted: it is the marker for
    a failed boolean test, which no ordinary instruction produces.
    """
    outs = machine.machine_step(step.pre, step.instr, u)
    if step.status == OK:
        return Return(step.post) in outs
    if ERROR in outs:
        return True
    return isinstance(step.instr, INop)


def validate_trace(t: Trace, u) -> bool:
    return all(step_is_valid(st, u) for st in t.steps)


# --- algebra -------------------------------------------------------------------

def seq_compose(t1: Trace, t2: Trace) -> Trace:
    if t1.target != t2.source:
        raise TraceError("sequential composition needs matching endpoints")
    if t1.errored and t2.steps:
        raise TraceError("no steps may follow an error step")
    return Trace(t1.source, t1.steps + t2.steps, t2.target)


def restrict(f, t: Trace) -> Trace:
    """Restriction along an increasing map, given as a sequence of indices (1-based)."""
    f = tuple(f)
    for a, b in zip(f, f[1:]):
        if a >= b:
            raise TraceError("restriction map must be increasing")
    steps = []
    for k in f:
        if not (1 <= k <= len(t.steps)):
            raise TraceError(f"restriction index {k} out of range")
        steps.append(t.steps[k - 1])
    return Trace(t.source, tuple(steps), t.target)


@dataclass(frozen=True)
class Shuffle:
    """A monotone bijection {1..p} + {1..q} -> {1..p+q}, stored as fiber tags."""
    tags: tuple   # each tag is 1 or 2

    @property
    def p(self):
        return sum(1 for t in self.tags if t == 1)

    @property
    def q(self):
        return sum(1 for t in self.tags if t == 2)

    def left_positions(self) -> tuple:
        return tuple(i + 1 for i, t in enumerate(self.tags) if t == 1)

    def right_positions(self) -> tuple:
        return tuple(i + 1 for i, t in enumerate(self.tags) if t == 2)


def shuffles(p: int, q: int) -> tuple:
    """All C(p+q, p) shuffles, in a fixed order."""
    out = []
    for left in itertools.combinations(range(p + q), p):
        tags = [2] * (p + q)
        for i in left:
            tags[i] = 1
        out.append(Shuffle(tuple(tags)))
    return tuple(out)


def par_compose_by_shuffle(t1: Trace, t2: Trace) -> dict:
    """Interleavings of two coinitial, cofinal traces, keyed by shuffle.

    Interleavings that would put a step after an error step are not traces
    and are skipped.
    """
    out = {}
    if t1.source != t2.source or t1.target != t2.target:
        return out
    for omega in shuffles(len(t1), len(t2)):
        steps = []
        i = j = 0
        for tag in omega.tags:
            if tag == 1:
                steps.append(t1.steps[i])
                i += 1
            else:
                steps.append(t2.steps[j])
                j += 1
        if any(st.status == ERR for st in steps[:-1]):
            continue
        out[omega] = Trace(t1.source, tuple(steps), t1.target)
    return out


def par_compose(t1: Trace, t2: Trace) -> frozenset:
    return frozenset(par_compose_by_shuffle(t1, t2).values())


def hide_state(r: str, s: MachineState) -> MachineState:
    return s.with_locked(s.locked - {r})


def hide(r: str, t: Trace) -> Trace:
    steps = []
    for st in t.steps:
        instr = st.instr
        if isinstance(instr, (IAcquire, IRelease)) and instr.lock == r:
            instr = INop()
        steps.append(CodeTransition(hide_state(r, st.pre), instr,
                                    hide_state(r, st.post), st.status))
    return Trace(hide_state(r, t.source), tuple(steps), hide_state(r, t.target))


# --- line-oriented serialization -------------------------------------------------

def trace_to_lines(t: Trace) -> list:
    lines = [f"source {mstate_to_text(t.source)}"]
    for st in t.steps:
        lines.append(f"step {st.status} {mstate_to_text(st.pre)} ; "
                     f"{instr_to_text(st.instr)} ; {mstate_to_text(st.post)}")
    lines.append(f"target {mstate_to_text(t.target)}")
    return lines


def trace_to_text(t: Trace) -> str:
    return "\n".join(trace_to_lines(t)) + "\n"


def trace_from_text(text: str) -> Trace:
    source = target = None
    steps = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        kind, _, rest = line.partition(" ")
        if kind == "source":
            source = parse_mstate(rest)
        elif kind == "target":
            target = parse_mstate(rest)
        elif kind == "step":
            status, _, body = rest.partition(" ")
            pre_text, instr_text, post_text = (p.strip() for p in body.split(";"))
            steps.append(CodeTransition(parse_mstate(pre_text),
                                        parse_instr(instr_text),
                                        parse_mstate(post_text), status))
        else:
            raise TraceError(f"bad trace line {line!r}")
    if source is None or target is None:
        raise TraceError("trace needs source and target lines")
    return Trace(source, tuple(steps), target)
