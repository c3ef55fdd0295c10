"""Separated states and the legality of Eve and Adam moves.

A separated state splits one logical state between the code, a per-resource
table and the frame; it combines into a machine state by tensoring the pieces,
forgetting permissions and locking exactly the held resources.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction

from .logic import (EMPTY_LSTATE, LogicalState, erase, lstate_from_text,
                    lstate_to_text, tensor, tensor_all)
from .machine import MachineState, MemoryState, Return, locks, locks_minus, \
    locks_plus, machine_step
from .maps import fmap
from .syntax import ParseError, Universe


class SeparationError(Exception):
    pass


@dataclass(frozen=True)
class Available:
    state: LogicalState


@dataclass(frozen=True)
class HeldBy:
    owner: str   # "C" or "F"


HELD_BY_CODE = HeldBy("C")
HELD_BY_FRAME = HeldBy("F")


@dataclass(frozen=True)
class SeparatedState:
    code: LogicalState
    resources: fmap          # lockname -> Available | HeldBy
    frame: LogicalState

    def __post_init__(self):
        if big_tensor(self) is None:
            raise SeparationError("separated-state tensor is undefined")

    def dom(self) -> frozenset:
        return frozenset(r for r, e in self.resources.items()
                         if isinstance(e, Available))

    def dom_code(self) -> frozenset:
        return frozenset(r for r, e in self.resources.items() if e == HELD_BY_CODE)

    def dom_frame(self) -> frozenset:
        return frozenset(r for r, e in self.resources.items() if e == HELD_BY_FRAME)


def sep_state(code=EMPTY_LSTATE, resources=(), frame=EMPTY_LSTATE) -> SeparatedState:
    return SeparatedState(code, fmap(resources), frame)


@functools.lru_cache(maxsize=None)
def _big_tensor_cached(code, resources, frame):
    parts = [code]
    parts += [e.state for _, e in resources.items() if isinstance(e, Available)]
    parts.append(frame)
    return tensor_all(parts)


def big_tensor(s: SeparatedState):
    return _big_tensor_cached(s.code, s.resources, s.frame)


def combine(s: SeparatedState) -> MachineState:
    """The homomorphism to machine states."""
    sigma = big_tensor(s)
    if sigma is None:
        raise SeparationError("separated-state tensor is undefined")
    return MachineState(erase(sigma), s.dom_code() | s.dom_frame())


def legal_eve_move(s: SeparatedState, m, s2: SeparatedState, u: Universe) -> bool:
    """An Eve move keeps the frame, combines into a successful machine step and
    respects the lock conditions of the instruction."""
    if s.frame != s2.frame:
        return False
    if Return(combine(s2)) not in machine_step(combine(s), m, u):
        return False
    lk = locks(m)
    for r in s.resources:
        if r not in lk and s.resources[r] != s2.resources[r]:
            return False
    for r in locks_plus(m):
        if not isinstance(s.resources[r], Available):
            return False
        if s2.resources[r] != HELD_BY_CODE:
            return False
    for r in locks_minus(m):
        if s.resources[r] != HELD_BY_CODE:
            return False
        if not isinstance(s2.resources[r], Available):
            return False
    return True


def legal_adam_move(s: SeparatedState, s2: SeparatedState) -> bool:
    """An Adam move keeps the code fragment and the set of code-held resources."""
    return s.code == s2.code and s.dom_code() == s2.dom_code()


def _perm_profile(s: SeparatedState):
    sigma = big_tensor(s)
    return {("s", k): p for k, (_, p) in sigma.stack.items()} | \
           {("h", k): p for k, (_, p) in sigma.heap.items()}


def permission_conserving(s: SeparatedState, s2: SeparatedState) -> bool:
    """Diagnostic only: move legality as defined does not require it."""
    a, b = _perm_profile(s), _perm_profile(s2)
    return all(a[k] == b[k] for k in set(a) & set(b))


# --- bounded enumeration of separated states over a machine state ----------------

def _memory_slots(mu: MemoryState):
    return ([("s", k, v) for k, v in mu.stack.items()]
            + [("h", k, v) for k, v in mu.heap.items()])


def _assemble(slots, perms_per_slot, idx):
    stack, heap = {}, {}
    for (kind, key, value), qs in zip(slots, perms_per_slot):
        q = qs[idx]
        if q > 0:
            (stack if kind == "s" else heap)[key] = (value, q)
    return LogicalState(fmap(stack), fmap(heap))


def component_assignments(mu: MemoryState, fixed: LogicalState, n: int,
                          u: Universe):
    """Distribute the memory's slots over n unknown logical components, next to
    a fixed component, so that everything tensors and erases exactly to mu.

    Yields n-tuples of LogicalState in a fixed order.  Yields nothing when the
    fixed component disagrees with mu.
    """
    slots = _memory_slots(mu)
    fixed_map = {("s", k): (v, p) for k, (v, p) in fixed.stack.items()} | \
                {("h", k): (v, p) for k, (v, p) in fixed.heap.items()}
    covered = set()
    for kind_key, (v, _) in fixed_map.items():
        covered.add(kind_key)
    slot_keys = {(kind, key) for kind, key, _ in slots}
    if not covered.issubset(slot_keys):
        return
    for (kind, key, value) in slots:
        entry = fixed_map.get((kind, key))
        if entry is not None and entry[0] != value:
            return

    zero = Fraction(0)
    shares = (zero,) + tuple(u.perms)

    def slot_vectors(p0):
        out = []
        for qs in itertools.product(shares, repeat=n):
            total = p0 + sum(qs)
            if 0 < total <= 1:
                out.append(qs)
        return out

    options = []
    for kind, key, value in slots:
        entry = fixed_map.get((kind, key))
        p0 = entry[1] if entry is not None else zero
        vecs = slot_vectors(p0)
        if not vecs:
            return
        options.append(vecs)

    for choice in itertools.product(*options):
        yield tuple(_assemble(slots, choice, i) for i in range(n))


def enumerate_eve_moves(s: SeparatedState, m, target: MachineState,
                        u: Universe):
    """All separated states reachable by a legal Eve move labelled m that
    combine into the given machine state."""
    if Return(target) not in machine_step(combine(s), m, u):
        return
    entries = dict(s.resources.items())
    released = []
    for r in locks_plus(m):
        if not isinstance(entries.get(r), Available):
            return
        entries[r] = HELD_BY_CODE
    for r in locks_minus(m):
        if entries.get(r) != HELD_BY_CODE:
            return
        released.append(r)
    fixed_parts = [s.frame]
    fixed_parts += [e.state for r, e in entries.items()
                    if isinstance(e, Available) and r not in released]
    fixed = tensor_all(fixed_parts)
    if fixed is None:
        return
    n = 1 + len(released)
    for parts in component_assignments(target.memory, fixed, n, u):
        code = parts[0]
        res = dict(entries)
        for r, st in zip(released, parts[1:]):
            res[r] = Available(st)
        try:
            cand = SeparatedState(code, fmap(res), s.frame)
        except SeparationError:
            continue
        if combine(cand) == target:
            yield cand


# --- textual form ------------------------------------------------------------------

def sep_state_to_text(s: SeparatedState) -> str:
    parts = []
    for r, e in s.resources.items():
        if isinstance(e, Available):
            parts.append(f"{r}:avail{lstate_to_text(e.state)}")
        else:
            parts.append(f"{r}:{e.owner}")
    res = " ".join(parts)
    return (f"code={lstate_to_text(s.code)} ; res=[{res}] ; "
            f"frame={lstate_to_text(s.frame)}")


def sep_state_from_text(text: str) -> SeparatedState:
    try:
        code_part, res_part, frame_part = text.split(";")
        code = lstate_from_text(code_part.split("=", 1)[1])
        frame = lstate_from_text(frame_part.split("=", 1)[1])
        res_body = res_part.split("=", 1)[1].strip()
        if not (res_body.startswith("[") and res_body.endswith("]")):
            raise ValueError
        entries = {}
        chunks = res_body[1:-1].split()
        for chunk in chunks:
            name, _, rest = chunk.partition(":")
            if rest == "C":
                entries[name] = HELD_BY_CODE
            elif rest == "F":
                entries[name] = HELD_BY_FRAME
            elif rest.startswith("avail"):
                entries[name] = Available(lstate_from_text(rest[len("avail"):]))
            else:
                raise ValueError
        return SeparatedState(code, fmap(entries), frame)
    except (ValueError, IndexError) as exc:
        raise ParseError(f"bad separated state {text!r}") from exc
