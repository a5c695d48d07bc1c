import random

import pytest

from shmlmon.events import Atom, EvalTypeError, Event, Int, PRef, Tup
from shmlmon.formula import (
    Conj,
    Max,
    Nec,
    check_wellformed,
    flatten_conjunctions,
    pretty,
)
from shmlmon.oracle import NO_VIOLATION, normalize, oracle_verdict, step_obligation, violation
from shmlmon.parser import parse_formula, parse_trace

from conftest import PREDECESSOR, wf


def ev(text, index):
    from shmlmon.parser import parse_event_line

    return parse_event_line(text, index)


# ---------------------------------------------------------------------------
# normalize

def test_normalize_predecessor_single_obligation(predecessor):
    obs = normalize(predecessor.formula)
    assert len(obs) == 1
    assert isinstance(obs[0], Nec)
    assert str(obs[0].action) == "srv ? {x,y}"


def test_normalize_truth_conjunction_empty():
    assert normalize(parse_formula("tt & tt")) == []


def test_normalize_reachable_falsity_is_immediate():
    assert normalize(parse_formula("if 1 == 1 then ff else tt")) is None


def test_normalize_resolves_conditionals_and_fixpoints():
    obs = normalize(wf("max X. (if 2 > 1 then [a ? x] X else ff) & tt").formula)
    assert len(obs) == 1 and isinstance(obs[0], Nec)


# ---------------------------------------------------------------------------
# step_obligation

def test_step_request_spawns_three_obligations(predecessor):
    obs = normalize(predecessor.formula)
    obs = step_obligation(obs, ev("srv ? {5,c1}", 1))
    assert [str(o.action) for o in obs] == ["end ! _", "err ! z", "c1 ! z1"]


def test_step_response_discharges_and_recurses(predecessor):
    obs = normalize(predecessor.formula)
    obs = step_obligation(obs, ev("srv ? {5,c1}", 1))
    obs = step_obligation(obs, ev("c1 ! 4", 2))
    assert [str(o.action) for o in obs] == ["srv ? {x,y}"]


def test_step_wrong_response_violates(predecessor):
    obs = normalize(predecessor.formula)
    obs = step_obligation(obs, ev("srv ? {5,c1}", 1))
    assert step_obligation(obs, ev("c1 ! 3", 2)) is None


# ---------------------------------------------------------------------------
# oracle_verdict

def test_verdict_good_trace(predecessor, good_trace):
    assert oracle_verdict(predecessor, good_trace) == NO_VIOLATION


def test_verdict_bad_trace(predecessor, bad_trace):
    assert oracle_verdict(predecessor, bad_trace) == violation(2)


def test_verdict_zero_request_error_path(predecessor):
    trace = [ev("srv ? {0,c1}", 1), ev("err ! c1", 2)]
    assert oracle_verdict(predecessor, trace) == NO_VIOLATION


def test_verdict_zero_request_wrong_client(predecessor):
    trace = [ev("srv ? {0,c1}", 1), ev("err ! c2", 2)]
    assert oracle_verdict(predecessor, trace) == violation(2)


def test_verdict_end_during_round(predecessor):
    trace = [ev("srv ? {5,c1}", 1), ev("end ! done", 2)]
    assert oracle_verdict(predecessor, trace) == violation(2)


def test_verdict_end_between_rounds_discharges(predecessor):
    trace = parse_trace("srv ? {5,c1}\nc1 ! 4\nend ! done\nsrv ? {9,c9}\nc9 ! 0")
    assert oracle_verdict(predecessor, trace) == NO_VIOLATION


def test_verdict_immediate_falsity_index_zero():
    assert oracle_verdict(parse_formula("ff"), []) == violation(0)


def test_typeerror_carries_event_index():
    f = wf("[a ? x] if x + 1 == 2 then tt else ff")
    with pytest.raises(EvalTypeError) as err:
        oracle_verdict(f, [ev("a ? b", 1)])
    assert err.value.event_index == 1


# ---------------------------------------------------------------------------
# properties

def _random_cases(n, seed, depth=5, trace_len=20):
    from genrand import random_formula, random_trace

    rng = random.Random(seed)
    for _ in range(n):
        yield check_wellformed(random_formula(rng, depth=rng.randint(0, depth))), \
            random_trace(rng, trace_len), rng


def test_violations_are_irrevocable():
    from genrand import random_event

    hits = 0
    for wf_formula, trace, rng in _random_cases(400, seed=13):
        verdict = oracle_verdict(wf_formula, trace)
        if verdict.is_violation:
            hits += 1
            extended = trace + [random_event(rng, len(trace) + 1)]
            assert oracle_verdict(wf_formula, extended) == verdict
    assert hits > 20


def test_no_violation_holds_on_prefixes():
    for wf_formula, trace, _rng in _random_cases(150, seed=17):
        if not oracle_verdict(wf_formula, trace).is_violation:
            for k in range(len(trace) + 1):
                assert not oracle_verdict(wf_formula, trace[:k]).is_violation


def test_nonmatching_necessity_is_discharged_not_retried():
    # after a non-matching event the obligation is gone: a later matching
    # event must not resurrect it
    f = wf("[a ! 1] [b ! 2] ff").formula
    obs = normalize(f)
    obs = step_obligation(obs, ev("zz ? 9", 1))
    assert obs == []
    assert oracle_verdict(f, [ev("zz ? 9", 1), ev("a ! 1", 2), ev("b ! 2", 3)]) == NO_VIOLATION


def test_normalize_terminates_on_guarded_formulas():
    for wf_formula, _trace, _rng in _random_cases(300, seed=23, depth=8, trace_len=0):
        assert normalize(wf_formula.formula) is not None or True  # no hang, any result


def test_verdict_invariant_under_flatten_and_rename():
    for wf_formula, trace, _rng in _random_cases(250, seed=29):
        base = oracle_verdict(wf_formula, trace)
        flat = flatten_conjunctions(wf_formula)
        assert oracle_verdict(flat, trace) == base
        renamed = check_wellformed(_suffix_binders(wf_formula.formula))
        assert oracle_verdict(renamed, trace) == base


def _suffix_binders(f):
    """Systematic alpha-renaming, independent of the library renamer."""
    from shmlmon.events import PTup, PVar, AVar, ABin, Cmp, BAnd, BOr, BNot
    from shmlmon.formula import Cond, FVar, Truth, Falsity
    from shmlmon.events import ActionPattern

    def rename_pat(p, env):
        if isinstance(p, PVar):
            env = dict(env)
            env[p.name] = p.name + "9"
            return PVar(p.name + "9"), env
        if isinstance(p, PRef):
            return PRef(env.get(p.name, p.name)), env
        if isinstance(p, PTup):
            items = []
            for item in p.items:
                new, env = rename_pat(item, env)
                items.append(new)
            return PTup(tuple(items)), env
        return p, env

    def rename_bool(b, env):
        if isinstance(b, AVar):
            return AVar(env.get(b.name, b.name))
        if isinstance(b, ABin):
            return ABin(b.op, rename_bool(b.lhs, env), rename_bool(b.rhs, env))
        if isinstance(b, Cmp):
            return Cmp(b.op, rename_bool(b.lhs, env), rename_bool(b.rhs, env))
        if isinstance(b, BAnd):
            return BAnd(rename_bool(b.lhs, env), rename_bool(b.rhs, env))
        if isinstance(b, BOr):
            return BOr(rename_bool(b.lhs, env), rename_bool(b.rhs, env))
        if isinstance(b, BNot):
            return BNot(rename_bool(b.arg, env))
        return b

    def walk(g, env, fenv):
        if isinstance(g, (Truth, Falsity)):
            return g
        if isinstance(g, FVar):
            return FVar(fenv.get(g.name, g.name))
        if isinstance(g, Max):
            fenv = dict(fenv)
            fenv[g.name] = g.name + "9"
            return Max(g.name + "9", walk(g.body, env, fenv))
        if isinstance(g, Conj):
            return Conj(tuple(walk(c, env, fenv) for c in g.children))
        if isinstance(g, Cond):
            return Cond(rename_bool(g.test, env), walk(g.then_branch, env, fenv),
                        walk(g.else_branch, env, fenv))
        if isinstance(g, Nec):
            target, env2 = rename_pat(g.action.target, env)
            payload, env2 = rename_pat(g.action.payload, env2)
            return Nec(ActionPattern(g.action.direction, target, payload),
                       walk(g.body, env2, fenv))
        raise AssertionError(g)

    return walk(f, {}, {})
