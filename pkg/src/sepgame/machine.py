"""Memory states, machine states and the labelled machine-step relation.

Steps either return a successor state or produce a runtime error; a blocked
lock instruction produces no step at all, which is how `with` waits.
"""

from __future__ import annotations

from dataclasses import dataclass

from .maps import fmap
from .syntax import (Add, BAnd, BEq, BFalse, BOr, BTrue, Lit, Mul, ParseError,
                     Universe, Var, _Parser, expr_to_text)


class _Abort:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ABORT"


ABORT = _Abort()


@dataclass(frozen=True)
class MemoryState:
    stack: fmap = fmap()   # var -> value
    heap: fmap = fmap()    # location -> value

    def set_var(self, x, v):
        return MemoryState(self.stack.set(x, v), self.heap)

    def set_cell(self, loc, v):
        return MemoryState(self.stack, self.heap.set(loc, v))

    def drop_cell(self, loc):
        return MemoryState(self.stack, self.heap.remove(loc))


@dataclass(frozen=True)
class MachineState:
    memory: MemoryState = MemoryState()
    locked: frozenset = frozenset()

    def with_memory(self, mu):
        return MachineState(mu, self.locked)

    def with_locked(self, locked):
        return MachineState(self.memory, frozenset(locked))


def mstate(stack=(), heap=(), locked=()) -> MachineState:
    return MachineState(MemoryState(fmap(stack), fmap(heap)), frozenset(locked))


# --- instructions -------------------------------------------------------------

@dataclass(frozen=True)
class IAssign:
    var: str
    expr: object

@dataclass(frozen=True)
class ILoad:
    var: str
    addr: object

@dataclass(frozen=True)
class IStore:
    addr: object
    expr: object

@dataclass(frozen=True)
class INop:
    pass

@dataclass(frozen=True)
class IAlloc:
    var: str
    expr: object

@dataclass(frozen=True)
class IDispose:
    addr: object

@dataclass(frozen=True)
class IAcquire:
    lock: str

@dataclass(frozen=True)
class IRelease:
    lock: str

Instr = (IAssign, ILoad, IStore, INop, IAlloc, IDispose, IAcquire, IRelease)


@dataclass(frozen=True)
class Return:
    state: MachineState

@dataclass(frozen=True)
class Error:
    pass

ERROR = Error()


def eval_expr(e, mu: MemoryState):
    """Value of an arithmetic expression, or ABORT if a variable is unallocated."""
    match e:
        case Lit(v):
            return v
        case Var(name):
            try:
                return mu.stack[name]
            except KeyError:
                return ABORT
        case Add(a, b):
            va, vb = eval_expr(a, mu), eval_expr(b, mu)
            return ABORT if va is ABORT or vb is ABORT else va + vb
        case Mul(a, b):
            va, vb = eval_expr(a, mu), eval_expr(b, mu)
            return ABORT if va is ABORT or vb is ABORT else va * vb
    raise TypeError(e)


def eval_bool(b, mu: MemoryState):
    """Three-valued evaluation: True, False or ABORT.

    Evaluation is strict: every subexpression is evaluated, so an unallocated
    variable aborts even under `true or ...`.
    """
    match b:
        case BTrue():
            return True
        case BFalse():
            return False
        case BAnd(l, r):
            vl, vr = eval_bool(l, mu), eval_bool(r, mu)
            return ABORT if vl is ABORT or vr is ABORT else (vl and vr)
        case BOr(l, r):
            vl, vr = eval_bool(l, mu), eval_bool(r, mu)
            return ABORT if vl is ABORT or vr is ABORT else (vl or vr)
        case BEq(l, r):
            vl, vr = eval_expr(l, mu), eval_expr(r, mu)
            return ABORT if vl is ABORT or vr is ABORT else (vl == vr)
    raise TypeError(b)


def locks_plus(m) -> frozenset:
    return frozenset([m.lock]) if isinstance(m, IAcquire) else frozenset()


def locks_minus(m) -> frozenset:
    return frozenset([m.lock]) if isinstance(m, IRelease) else frozenset()


def locks(m) -> frozenset:
    return locks_plus(m) | locks_minus(m)


def machine_step(s: MachineState, m, u: Universe) -> frozenset:
    """All outcomes of executing one instruction.

    The empty set means no step exists (a blocked lock), which is distinct
    from {Error}.  Values written outside the universe's range are an Error;
    alloc returns one outcome per free location.
    """
    mu, L = s.memory, s.locked
    match m:
        case IAssign(x, e):
            v = eval_expr(e, mu)
            if v is ABORT or v not in u.values:
                return frozenset([ERROR])
            return frozenset([Return(s.with_memory(mu.set_var(x, v)))])
        case ILoad(x, e):
            loc = eval_expr(e, mu)
            if loc is ABORT or loc not in mu.heap:
                return frozenset([ERROR])
            return frozenset([Return(s.with_memory(mu.set_var(x, mu.heap[loc])))])
        case IStore(a, e):
            loc, v = eval_expr(a, mu), eval_expr(e, mu)
            if loc is ABORT or v is ABORT or loc not in mu.heap or v not in u.values:
                return frozenset([ERROR])
            return frozenset([Return(s.with_memory(mu.set_cell(loc, v)))])
        case INop():
            return frozenset([Return(s)])
        case IAlloc(x, e):
            v = eval_expr(e, mu)
            if v is ABORT or v not in u.values:
                return frozenset([ERROR])
            outs = []
            for loc in u.locations:
                if loc not in mu.heap:
                    mu2 = MemoryState(mu.stack.set(x, loc), mu.heap.set(loc, v))
                    outs.append(Return(s.with_memory(mu2)))
            return frozenset(outs)
        case IDispose(e):
            loc = eval_expr(e, mu)
            if loc is ABORT or loc not in mu.heap:
                return frozenset([ERROR])
            return frozenset([Return(s.with_memory(mu.drop_cell(loc)))])
        case IAcquire(r):
            if r in L:
                return frozenset()
            return frozenset([Return(s.with_locked(L | {r}))])
        case IRelease(r):
            if r not in L:
                return frozenset()
            return frozenset([Return(s.with_locked(L - {r}))])
    raise TypeError(m)


# --- textual form of states and instructions ----------------------------------

def mstate_to_text(s: MachineState) -> str:
    stack = " ".join(f"{k}={v}" for k, v in s.memory.stack.items())
    heap = " ".join(f"{k}={v}" for k, v in s.memory.heap.items())
    locked = " ".join(sorted(s.locked))
    return "{%s | %s | %s}" % (stack, heap, locked)


def instr_to_text(m) -> str:
    match m:
        case IAssign(x, e):
            return f"{x} := {expr_to_text(e)}"
        case ILoad(x, e):
            return f"{x} := [{expr_to_text(e)}]"
        case IStore(a, e):
            return f"[{expr_to_text(a)}] := {expr_to_text(e)}"
        case INop():
            return "nop"
        case IAlloc(x, e):
            return f"{x} := alloc({expr_to_text(e)})"
        case IDispose(e):
            return f"dispose({expr_to_text(e)})"
        case IAcquire(r):
            return f"acquire({r})"
        case IRelease(r):
            return f"release({r})"
    raise TypeError(m)


def parse_mstate(text: str) -> MachineState:
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise ParseError(f"bad machine state {text!r}")
    sections = body[1:-1].split("|")
    if len(sections) != 3:
        raise ParseError(f"machine state needs 3 sections: {text!r}")

    def pairs(section, key_is_int):
        out = {}
        for chunk in section.split():
            if "=" not in chunk:
                raise ParseError(f"bad binding {chunk!r}")
            k, _, v = chunk.partition("=")
            out[int(k) if key_is_int else k] = int(v)
        return out

    stack = pairs(sections[0], key_is_int=False)
    heap = pairs(sections[1], key_is_int=True)
    locked = frozenset(sections[2].split())
    return MachineState(MemoryState(fmap(stack), fmap(heap)), locked)


def parse_instr(text: str):
    p = _Parser(text)
    if p.at_name("nop"):
        p.next()
        p.eof()
        return INop()
    if p.at_name("acquire") or p.at_name("release"):
        kind = p.next().text
        p.expect_sym("(")
        r = p.expect_name()
        p.expect_sym(")")
        p.eof()
        return IAcquire(r) if kind == "acquire" else IRelease(r)
    if p.at_name("dispose"):
        p.next()
        p.expect_sym("(")
        e = p.expr()
        p.expect_sym(")")
        p.eof()
        return IDispose(e)
    if p.at_sym("["):
        p.next()
        a = p.expr()
        p.expect_sym("]")
        p.expect_sym(":=")
        e = p.expr()
        p.eof()
        return IStore(a, e)
    x = p.expect_name()
    p.expect_sym(":=")
    if p.at_name("alloc"):
        p.next()
        p.expect_sym("(")
        e = p.expr()
        p.expect_sym(")")
        p.eof()
        return IAlloc(x, e)
    if p.at_sym("["):
        p.next()
        e = p.expr()
        p.expect_sym("]")
        p.eof()
        return ILoad(x, e)
    e = p.expr()
    p.eof()
    return IAssign(x, e)


def resolve_env_moves(u: Universe) -> tuple:
    """Parse the move-list pairs of a universe into machine states."""
    return tuple((parse_mstate(a), parse_mstate(b)) for a, b in u.env_moves_text)
