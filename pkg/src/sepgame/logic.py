"""Permissions, logical states, the separation tensor and formula satisfaction.

Permissions are rationals in (0,1] under addition; 1 is the write permission
and admits no multiple.  Quantifiers, substate splits, precision and
entailment are all decided by bounded enumeration over a declared universe.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction

from .maps import fmap
from .syntax import (Add, Emp, Exists, FAnd, FEq, FFalse, FImplies, FNot,
                     FOr, Forall, FTrue, Lit, Mul, Own, ParseError, PointsTo,
                     Star, Universe, Var, bexpr_program_vars, is_logical_name,
                     perm_to_text)
from .machine import MemoryState

TOP = Fraction(1)


class UncoveredLogicalVariable(Exception):
    pass


def perm_add(p: Fraction, q: Fraction):
    """Sum of two permissions, or None when the sum leaves (0,1]."""
    s = p + q
    return s if s <= 1 else None


@dataclass(frozen=True)
class LogicalState:
    stack: fmap = fmap()   # var -> (value, perm)
    heap: fmap = fmap()    # loc -> (value, perm)

    def is_empty(self):
        return not self.stack and not self.heap


EMPTY_LSTATE = LogicalState()


def lstate(stack=(), heap=()) -> LogicalState:
    norm = lambda m: fmap({k: (v, Fraction(p)) for k, (v, p) in dict(m).items()})
    return LogicalState(norm(stack), norm(heap))


def _join(a: fmap, b: fmap):
    out = dict(a.items())
    for k, (v, p) in b.items():
        if k not in out:
            out[k] = (v, p)
            continue
        v0, p0 = out[k]
        if v0 != v:
            return None
        s = perm_add(p0, p)
        if s is None:
            return None
        out[k] = (v, s)
    return fmap(out)


def tensor(a: LogicalState, b: LogicalState):
    """Separation product; None when values disagree or permissions overflow."""
    stack = _join(a.stack, b.stack)
    if stack is None:
        return None
    heap = _join(a.heap, b.heap)
    if heap is None:
        return None
    return LogicalState(stack, heap)


def tensor_all(states) -> LogicalState | None:
    acc = EMPTY_LSTATE
    for s in states:
        acc = tensor(acc, s)
        if acc is None:
            return None
    return acc


def erase(sigma: LogicalState) -> MemoryState:
    """Forget the permissions."""
    return MemoryState(fmap({k: v for k, (v, _) in sigma.stack.items()}),
                       fmap({k: v for k, (v, _) in sigma.heap.items()}))


# --- substate enumeration -------------------------------------------------------

def _slot_splits(p: Fraction, perms) -> list:
    """Ordered ways of splitting one slot's permission: left share ascending."""
    out = [(Fraction(0), p)]
    for p1 in perms:
        p2 = p - p1
        if p2 > 0 and p2 in perms:
            out.append((p1, p2))
    out.append((p, Fraction(0)))
    return out


def _slots(sigma: LogicalState) -> list:
    return ([("s", k, v, p) for k, (v, p) in sigma.stack.items()]
            + [("h", k, v, p) for k, (v, p) in sigma.heap.items()])


def _from_slots(slots) -> LogicalState:
    stack = {k: (v, p) for kind, k, v, p in slots if kind == "s" and p > 0}
    heap = {k: (v, p) for kind, k, v, p in slots if kind == "h" and p > 0}
    return LogicalState(fmap(stack), fmap(heap))


@functools.lru_cache(maxsize=None)
def _sub_pairs(sigma: LogicalState, u: Universe) -> tuple:
    slots = _slots(sigma)
    choices = [_slot_splits(p, u.perms) for _, _, _, p in slots]
    out = []
    for combo in itertools.product(*choices):
        left = [(kind, k, v, p1) for (kind, k, v, _), (p1, _) in zip(slots, combo)]
        right = [(kind, k, v, p2) for (kind, k, v, _), (_, p2) in zip(slots, combo)]
        out.append((_from_slots(left), _from_slots(right)))
    return tuple(out)


def substates(sigma: LogicalState, u: Universe):
    """All ordered pairs (a, b) with a * b == sigma, permissions drawn from
    the universe's declared set (or transferred whole); smallest left part
    first."""
    return iter(_sub_pairs(sigma, u))


def sub_lstates(sigma: LogicalState, u: Universe) -> tuple:
    """Distinct left components of all splits of sigma, smallest first."""
    return tuple(a for a, _ in _sub_pairs(sigma, u))


# --- satisfaction ----------------------------------------------------------------

def eval_formula_expr(e, sigma: LogicalState, rho: fmap):
    """Expression value inside a formula; None when a program variable is not
    in the state's stack, an exception for an uninstantiated logical variable."""
    match e:
        case Lit(v):
            return v
        case Var(name):
            if is_logical_name(name):
                try:
                    return rho[name]
                except KeyError:
                    raise UncoveredLogicalVariable(name) from None
            entry = sigma.stack._dict.get(name)
            return None if entry is None else entry[0]
        case Add(a, b):
            va = eval_formula_expr(a, sigma, rho)
            vb = eval_formula_expr(b, sigma, rho)
            return None if va is None or vb is None else va + vb
        case Mul(a, b):
            va = eval_formula_expr(a, sigma, rho)
            vb = eval_formula_expr(b, sigma, rho)
            return None if va is None or vb is None else va * vb
    raise TypeError(e)


def satisfies(sigma: LogicalState, f, rho: fmap = fmap(), u: Universe = None) -> bool:
    """The satisfaction judgement between a logical state and a formula."""
    return _sat(sigma, f, rho, u)


@functools.lru_cache(maxsize=None)
def _sat(sigma, f, rho, u) -> bool:
    match f:
        case FTrue():
            return True
        case FFalse():
            return False
        case Emp():
            return sigma.is_empty()
        case FAnd(l, r):
            return _sat(sigma, l, rho, u) and _sat(sigma, r, rho, u)
        case FOr(l, r):
            return _sat(sigma, l, rho, u) or _sat(sigma, r, rho, u)
        case FNot(b):
            return not _sat(sigma, b, rho, u)
        case FImplies(l, r):
            return (not _sat(sigma, l, rho, u)) or _sat(sigma, r, rho, u)
        case Forall(x, body):
            return all(_sat(sigma, body, rho.set(x, v), u) for v in u.values)
        case Exists(x, body):
            return any(_sat(sigma, body, rho.set(x, v), u) for v in u.values)
        case Star(l, r):
            for a, b in _sub_pairs(sigma, u):
                if _sat(a, l, rho, u) and _sat(b, r, rho, u):
                    return True
            return False
        case Own(p, x):
            entry = sigma.stack._dict.get(x)
            return entry is not None and entry[1] == p
        case FEq(l, r):
            fv = {v for v in _expr_vars_cached(l) | _expr_vars_cached(r)
                  if not is_logical_name(v)}
            if not fv.issubset(set(sigma.stack)):
                return False
            return eval_formula_expr(l, sigma, rho) == eval_formula_expr(r, sigma, rho)
        case PointsTo(a, p, v):
            va = eval_formula_expr(a, sigma, rho)
            vv = eval_formula_expr(v, sigma, rho)
            if va is None or vv is None:
                return False
            return sigma.heap._dict.get(va) == (vv, p)
    raise TypeError(f)


@functools.lru_cache(maxsize=None)
def _expr_vars_cached(e):
    from .syntax import expr_vars
    return expr_vars(e)


# --- bounded enumeration: all states, precision, entailment ----------------------

@functools.lru_cache(maxsize=None)
def all_logical_states(u: Universe) -> tuple:
    """Every logical state over the universe's alphabets, values and permissions."""
    slot_options = []
    for x in u.variables:
        slot_options.append([None] + [("s", x, v, p) for v in u.values for p in u.perms])
    for loc in u.locations:
        slot_options.append([None] + [("h", loc, v, p) for v in u.values for p in u.perms])
    out = []
    for combo in itertools.product(*slot_options):
        chosen = [c for c in combo if c is not None]
        out.append(_from_slots(chosen))
    return tuple(out)


def is_precise(f, u: Universe, rho: fmap = fmap()) -> bool:
    """At most one substate of any enumerable state satisfies the formula."""
    return _is_precise(f, u, rho)


@functools.lru_cache(maxsize=None)
def _is_precise(f, u, rho) -> bool:
    for sigma in all_logical_states(u):
        found = None
        for cand in sub_lstates(sigma, u):
            if _sat(cand, f, rho, u):
                if found is not None and cand != found:
                    return False
                found = cand
    return True


def entails(p, q, u: Universe, rho: fmap = fmap()) -> bool:
    """Bounded semantic entailment: every enumerable state satisfying p
    satisfies q."""
    return _entails(p, q, u, rho)


@functools.lru_cache(maxsize=None)
def _entails(p, q, u, rho) -> bool:
    for sigma in all_logical_states(u):
        if _sat(sigma, p, rho, u) and not _sat(sigma, q, rho, u):
            return False
    return True


def def_formula(b, u: Universe):
    """Ownership of every free variable of a boolean expression, at any
    permission from the universe's set."""
    conjuncts = []
    for x in sorted(bexpr_program_vars(b)):
        owns = None
        for p in u.perms:
            owns = Own(p, x) if owns is None else FOr(owns, Own(p, x))
        conjuncts.append(owns)
    out = FTrue()
    for c in conjuncts:
        out = c if isinstance(out, FTrue) else FAnd(out, c)
    return out


# --- textual form -----------------------------------------------------------------

def lstate_to_text(sigma: LogicalState) -> str:
    stack = ",".join(f"{k}={v}@{perm_to_text(p)}" for k, (v, p) in sigma.stack.items())
    heap = ",".join(f"{k}={v}@{perm_to_text(p)}" for k, (v, p) in sigma.heap.items())
    return "{%s|%s}" % (stack, heap)


def lstate_from_text(text: str) -> LogicalState:
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise ParseError(f"bad logical state {text!r}")
    sections = body[1:-1].split("|")
    if len(sections) != 2:
        raise ParseError(f"logical state needs 2 sections: {text!r}")

    def pairs(section, key_is_int):
        out = {}
        for chunk in section.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            k, _, rest = chunk.partition("=")
            v, _, p = rest.partition("@")
            out[int(k) if key_is_int else k] = (int(v), Fraction(p))
        return out

    return LogicalState(fmap(pairs(sections[0], False)),
                        fmap(pairs(sections[1], True)))
