import itertools

import pytest

from sepgame.machine import (IAssign, INop, MachineState, Return,
                             machine_step, mstate)
from sepgame.semantics import (IN, NOTIN, RETURNS, AtomTS, EnumerationBudget,
                               SeqSplitW, SeqTS, WhenAbortTS, WhenTS,
                               all_machine_states, denote, enumerate_traces,
                               instruction_alphabet)
from sepgame.syntax import BEq, BTrue, Lit, Var, parse_program, parse_universe
from sepgame.traces import ERR, OK, CodeTransition, Trace


@pytest.fixture(scope="module")
def u():
    return parse_universe("vars = x, y\nlocs = 2\nvals = 0..3\n"
                          "perms = 1/2, 1\nlocks = r\nmaxlen = 4\n")


@pytest.fixture(scope="module")
def u_micro():
    return parse_universe("vars = x\nlocs = 2\nvals = 0..1\n"
                          "perms = 1\nlocks = r\nmaxlen = 2\n")


S0 = mstate(stack={"x": 0})
S5 = mstate(stack={"x": 1})


def _ok_step(pre, m, u):
    (out,) = [o for o in machine_step(pre, m, u) if o is not None]
    return CodeTransition(pre, m, out.state, OK)


def test_atom_verdicts(u):
    atom = AtomTS(IAssign("x", Lit(1)), u)
    step = _ok_step(S0, IAssign("x", Lit(1)), u)
    t1 = Trace(S0, (step,), step.post)
    assert atom.member(t1)[0] == RETURNS
    empty = Trace(S0, (), S0)
    assert atom.member(empty)[0] == IN
    t2 = Trace(S0, (step, _ok_step(step.post, IAssign("x", Lit(1)), u)), step.post)
    assert atom.member(t2)[0] == NOTIN


def test_atom_error_step_is_in_not_returns(u):
    bad = IAssign("x", Lit(9))
    t = Trace(S0, (CodeTransition(S0, bad, S0, ERR),), S0)
    assert AtomTS(bad, u).member(t)[0] == IN


def test_seq_split_matches_brute_force_over_intermediates(u):
    # oracle: try every split point and every universe state as the midpoint
    prog = parse_program("x := 1 ; x := 2")
    sys = denote(prog, u)
    first = denote(parse_program("x := 1"), u)
    second = denote(parse_program("x := 2"), u)
    s1 = _ok_step(S0, IAssign("x", Lit(1)), u)
    s2 = _ok_step(s1.post, IAssign("x", Lit(2)), u)
    candidates = [
        Trace(S0, (s1, s2), s2.post),
        Trace(S0, (s1,), s1.post),
        Trace(S0, (s2,), s2.post),
        Trace(S0, (), S0),
    ]
    for t in candidates:
        def oracle(t):
            best = NOTIN
            for k in range(len(t) + 1):
                for mid in all_machine_states(u):
                    t1 = Trace(t.source, t.steps[:k], mid)
                    t2 = Trace(mid, t.steps[k:], t.target)
                    if first.member(t1)[0] != RETURNS:
                        continue
                    v2 = second.member(t2)[0]
                    if v2 == RETURNS:
                        return RETURNS
                    if v2 == IN:
                        best = IN
            if first.member(t)[0] != NOTIN:
                best = max(best, IN)
            return best
        assert sys.member(t)[0] == oracle(t)
    v, w = sys.member(candidates[0])
    assert v == RETURNS and isinstance(w, SeqSplitW) and w.k == 1


def test_when_gates_on_first_code_state(u):
    atom = AtomTS(INop(), u)
    gated = WhenTS(BEq(Var("x"), Lit(0)), True, atom)
    step = _ok_step(S0, INop(), u)
    t = Trace(S0, (step,), S0)
    assert gated.member(t)[0] == RETURNS
    t_wrong = Trace(S5, (_ok_step(S5, INop(), u),), S5)
    assert gated.member(t_wrong)[0] == NOTIN


def test_when_true_passthrough(u):
    sys = WhenTS(BTrue(), True, AtomTS(INop(), u))
    plain = AtomTS(INop(), u)
    step = _ok_step(S0, INop(), u)
    for t in [Trace(S0, (), S0), Trace(S0, (step,), S0)]:
        assert sys.member(t)[0] == plain.member(t)[0]


def test_when_abort_recognizes_failed_tests(u):
    sys = WhenAbortTS(BEq(Var("y"), Lit(0)))
    t = Trace(S0, (CodeTransition(S0, INop(), S0, ERR),), S0)
    v, w = sys.member(t)
    assert v == IN
    assert sys.member(Trace(S0, (), S0))[0] == IN  # prefix
    ok_t = Trace(S0, (_ok_step(S0, INop(), u),), S0)
    assert sys.member(ok_t)[0] == NOTIN
    # a true test never aborts
    assert WhenAbortTS(BTrue()).member(t)[0] == NOTIN


def test_denote_skip_is_nop(u):
    sys = denote(parse_program("skip"), u)
    step = _ok_step(S0, INop(), u)
    assert sys.member(Trace(S0, (step,), S0))[0] == RETURNS


def test_par_contains_both_interleavings(u):
    traces = list(enumerate_traces(parse_program("x := 1 || y := 1"),
                                   [mstate(stack={"x": 0, "y": 0})], u))
    rets = [t for t, ret, _ in traces if ret]
    assert len(rets) == 2
    orders = {tuple(type(s.instr).__name__ + repr(s.post.memory.stack._dict)
                    for s in t.steps) for t in rets}
    assert len(orders) == 2


def test_while_false_returns_single_nop(u):
    prog = parse_program("while x = 1 do skip")
    traces = list(enumerate_traces(prog, [S0], u))
    rets = [t for t, ret, _ in traces if ret]
    assert len(rets) == 1
    assert len(rets[0]) == 1 and isinstance(rets[0].steps[0].instr, INop)


def test_enumerate_maxlen_zero(u):
    traces = list(enumerate_traces(parse_program("x := 1"), [S0], u, maxlen=0))
    assert len(traces) == 1
    t, ret, _ = traces[0]
    assert len(t) == 0 and not ret


def test_enumerate_parallel_assign_counts(u):
    traces = list(enumerate_traces(parse_program("x := 1 || x := 2"),
                                   [S0], u))
    rets = [(t, w) for t, ret, w in traces if ret]
    assert len(rets) == 2
    finals = sorted(t.target.memory.stack["x"] for t, _ in rets)
    assert finals == [1, 2]


def test_enumerate_budget_is_loud(u):
    with pytest.raises(EnumerationBudget):
        list(enumerate_traces(parse_program("x := 1 || x := 2"), [S0], u,
                              max_traces=2))


def test_prefix_closure_on_enumerated_traces(u):
    prog = parse_program("if x = 0 then { x := 1 ; x := 2 } else skip")
    sys = denote(prog, u)
    for t, ret, _ in enumerate_traces(prog, [S0], u):
        for k in range(len(t)):
            assert sys.member(t.prefix(k))[0] != NOTIN


def test_returns_decompose_through_witnesses(u):
    prog = parse_program("x := 1 ; x := 2")
    sys = denote(prog, u)
    first = denote(parse_program("x := 1"), u)
    second = denote(parse_program("x := 2"), u)
    for t, ret, w in enumerate_traces(prog, [S0], u):
        if not ret:
            continue
        assert isinstance(w, SeqSplitW)
        t1 = Trace(t.source, t.steps[:w.k], w.mid)
        t2 = Trace(w.mid, t.steps[w.k:], t.target)
        assert first.member(t1)[0] == RETURNS
        assert second.member(t2)[0] == RETURNS


def test_enumerate_and_member_agree(u_micro):
    # exhaustive candidate sweep on a micro universe
    prog = parse_program("with r when true do x := 1")
    sys = denote(prog, u_micro)
    inits = [mstate(stack={"x": 0})]
    enumerated = {t for t, _, _ in enumerate_traces(prog, inits, u_micro)}
    alphabet = instruction_alphabet(prog)

    def all_candidates(source, length):
        if length == 0:
            yield Trace(source, (), source)
            return
        for shorter in all_candidates(source, length - 1):
            if shorter.errored or len(shorter) < length - 1:
                continue
            cur = shorter.target
            for m in alphabet:
                for out in machine_step(cur, m, u_micro):
                    if out is None:
                        continue
                    from sepgame.machine import ERROR
                    if out is ERROR:
                        step = CodeTransition(cur, m, cur, ERR)
                    else:
                        step = CodeTransition(cur, m, out.state, OK)
                    yield Trace(source, shorter.steps + (step,), step.post)
                step = CodeTransition(cur, INop(), cur, ERR)
                yield Trace(source, shorter.steps + (step,), step.post)

    candidates = set()
    for n in range(3):
        candidates |= set(all_candidates(inits[0], n))
    for cand in candidates:
        in_denotation = sys.member(cand)[0] != NOTIN
        assert in_denotation == (cand in enumerated), cand


def test_resource_traces_never_mention_lock(u):
    prog = parse_program("resource r do with r when true do x := 1")
    for t, _, _ in enumerate_traces(prog, [S0], u):
        states = [t.source, t.target] + \
            [s for st in t.steps for s in (st.pre, st.post)]
        assert all("r" not in s.locked for s in states)
