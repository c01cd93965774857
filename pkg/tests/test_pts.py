import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from callcheck.errors import BudgetExceeded, EntryNotFound, UnknownVariable
from callcheck.ir import parse_module
from callcheck.pts import (
    AllocSite,
    FunctionObj,
    LocalVar,
    MemVar,
    RetVar,
    SymbolVar,
    generate_constraints,
    points_to,
    push_context,
    resolve_call_targets,
    solve,
)
from conftest import ALL_FIXTURES, GOLDEN, analyze_fixture, analyze_text, load_module
from gen import pointer_program, random_constraints
from oracles import closure

MAIN_ONLY = parse_module("define void @main() {\nentry:\n  ret void\n}\n")


def fn(*names):
    return frozenset(FunctionObj(n) for n in names)


def erased_map(state):
    out = {}
    for (_, v), objs in state.pts.items():
        out.setdefault(v, set()).update(objs)
    return out


# -- constraint generation -------------------------------------------------------

def test_four_instruction_fragment():
    text = """declare void @first()
define void @main() {
entry:
  %slot = alloca void ()*
  store void ()* @first, void ()** %slot
  %one = load void ()*, void ()** %slot
  call void %one()
  ret void
}
"""
    cs = generate_constraints(parse_module(text))
    slot, one, first = LocalVar("main", "slot"), LocalVar("main", "one"), SymbolVar("first")
    assert (slot, AllocSite("main", "entry", 0)) in cs.address_of
    assert cs.store == {(slot, first)}
    assert cs.load == {(one, slot)}
    assert cs.copy == frozenset()
    (site,) = cs.call_sites
    assert site.indirect and site.callee == one


def test_branched_funptr_constraints():
    cs = generate_constraints(load_module("branched_funptr"))
    slot = LocalVar("main", "one.slot")
    assert sorted(str(s) for d, s in cs.store if d == slot) == ["@first", "@second"]
    assert sum(1 for s in cs.call_sites if s.indirect) == 1


def test_no_pointer_module():
    m = parse_module("define i32 @main(i32 %a) {\nentry:\n  %c = icmp eq i32 %a, 0\n"
                     "  ret i32 0\n}\n")
    cs = generate_constraints(m)
    assert len(cs) == 0
    s = solve(cs, m)
    assert points_to(s, LocalVar("main", "c")) == frozenset()


# -- solving: examples --------------------------------------------------------------

def test_branched_funptr_matches_golden_closure():
    gold = json.loads((GOLDEN / "branched_funptr_pts.json").read_text())
    a = analyze_fixture("branched_funptr")
    got = {str(v): sorted(map(str, o)) for v, o in erased_map(a.state).items()}
    want = {k: sorted(v) for k, v in gold.items() if not k.startswith("_")}
    assert got == want
    assert sorted([e.caller, e.callee] for e in a.state.edges) == gold["_callgraph"]


def test_branched_funptr_points_to():
    a = analyze_fixture("branched_funptr")
    assert points_to(a.state, LocalVar("main", "one")) == fn("first", "second")
    (site,) = [s for s in a.constraints.call_sites if s.indirect]
    assert resolve_call_targets(a.state, site) == {"first", "second"}


def test_single_store():
    a = analyze_fixture("funptr")
    assert points_to(a.state, LocalVar("main", "one")) == fn("first")
    assert {(e.caller, e.callee) for e in a.state.edges if e.caller == "main"} == {
        ("main", "first")}


def test_direct_external_target():
    a = analyze_fixture("branched_funptr")
    (site,) = [s for s in a.constraints.call_sites if s.caller == "first"]
    assert resolve_call_targets(a.state, site) == {"puts"}


@pytest.mark.parametrize("k,expect_a,expect_b", [
    (0, ("first", "second"), ("first", "second")),
    (1, ("first",), ("second",)),
    (2, ("first",), ("second",)),
])
def test_id_function_sensitivity(k, expect_a, expect_b):
    a = analyze_fixture("id_function", k=k)
    assert a.state.erased(LocalVar("main", "a")) == fn(*expect_a)
    assert a.state.erased(LocalVar("main", "b")) == fn(*expect_b)


def test_id_function_contexts():
    s = analyze_fixture("id_function", k=1).state
    assert s.contexts_of("id") == [("main:entry:0",), ("main:entry:1",)]
    assert points_to(s, RetVar("id"), ("main:entry:0",)) == fn("first")


def test_push_context_k_limits():
    assert push_context((), "s1", 0) == ()
    assert push_context(("s1",), "s2", 1) == ("s2",)
    assert push_context(("s1", "s2"), "s3", 2) == ("s2", "s3")
    assert push_context(("s1",), "s2", 2) == ("s1", "s2")


def test_non_function_target():
    text = """define void @main() {
entry:
  %slot = alloca i8
  %fp = bitcast i8* %slot to void ()*
  call void %fp()
  ret void
}
"""
    a = analyze_text(text)
    (site,) = a.constraints.call_sites
    assert resolve_call_targets(a.state, site) == frozenset()
    assert any(d.code == "NonFunctionTarget" for d in a.state.diagnostics)


def test_arity_filter():
    text = """define void @zero() {
entry:
  ret void
}
define void @one(i8* %p) {
entry:
  ret void
}
define void @var(...) {
entry:
  ret void
}
@slot = global void ()* null
define void @main() {
entry:
  store void ()* @zero, void ()** @slot
  store void ()* bitcast (void (i8*)* @one to void ()*), void ()** @slot
  store void ()* bitcast (void (...)* @var to void ()*), void ()** @slot
  %fp = load void ()*, void ()** @slot
  call void %fp()
  ret void
}
"""
    a = analyze_text(text)
    (site,) = [s for s in a.constraints.call_sites if s.indirect]
    assert resolve_call_targets(a.state, site) == {"zero", "var"}
    assert any(d.code == "IncompatibleTarget" for d in a.state.diagnostics)


def test_escape_fallback():
    text = """declare void @register(void ()*)
declare void ()* @lookup()
define void @handler() {
entry:
  ret void
}
define void @unused() {
entry:
  ret void
}
define void @main() {
entry:
  call void @register(void ()* @handler)
  %fp = call void ()* @lookup()
  call void %fp()
  ret void
}
"""
    a = analyze_text(text)
    site = [s for s in a.constraints.call_sites if s.indirect][0]
    assert resolve_call_targets(a.state, site) == {"handler"}
    assert any(d.code == "EscapeFallback" for d in a.state.diagnostics)


def test_unresolved_indirect_call_diagnostic():
    text = """define void @main(void ()* %f) {
entry:
  call void %f()
  ret void
}
"""
    a = analyze_text(text)
    assert any(d.code == "UnresolvedCall" for d in a.state.diagnostics)


def test_recursion_terminates():
    text = """define i8* @f(i8* %p) {
entry:
  %r = call i8* @f(i8* %p)
  ret i8* %p
}
define void @main() {
entry:
  %x = alloca i8
  %y = call i8* @f(i8* %x)
  ret void
}
"""
    for k in (0, 1, 2):
        s = analyze_text(text, k=k).state
        assert s.erased(LocalVar("main", "y")) == {AllocSite("main", "entry", 0)}


# -- errors -------------------------------------------------------------------------

def test_unknown_variable():
    s = analyze_fixture("funptr").state
    with pytest.raises(UnknownVariable):
        points_to(s, LocalVar("main", "nope"))


def test_entry_not_found():
    m = load_module("funptr")
    with pytest.raises(EntryNotFound):
        solve(generate_constraints(m), m, entry="nope")


def test_sensitivity_range():
    m = load_module("funptr")
    with pytest.raises(ValueError):
        solve(generate_constraints(m), m, k=3)


def test_budget_exceeded():
    m = load_module("branched_funptr")
    with pytest.raises(BudgetExceeded):
        solve(generate_constraints(m), m, budget=2)


# -- properties ---------------------------------------------------------------------

def _closure_holds(cs, state):
    pts = erased_map(state)
    for d, s in cs.copy:
        assert pts.get(s, set()) <= pts.get(d, set())
    for d, s in cs.load:
        for o in pts.get(s, ()):
            assert pts.get(MemVar(o), set()) <= pts.get(d, set())
    for d, s in cs.store:
        for o in pts.get(d, ()):
            assert pts.get(s, set()) <= pts.get(MemVar(o), set())


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_matches_brute_force_closure(seed):
    cs = random_constraints(random.Random(seed))
    s = solve(cs, MAIN_ONLY)
    assert {v: o for (_, v), o in s.pts.items()} == closure(cs)
    _closure_holds(cs, s)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_idempotent_fixpoint(seed):
    cs = random_constraints(random.Random(seed))
    s = solve(cs, MAIN_ONLY)
    facts = [(v, o) for (_, v), objs in s.pts.items() if not isinstance(v, MemVar)
             for o in objs]
    s2 = solve(cs.with_constraints(address_of=facts), MAIN_ONLY)
    assert s2.pts == s.pts


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9), st.integers(0, 10**9))
def test_monotone(seed, extra_seed):
    rng = random.Random(seed)
    cs = random_constraints(rng)
    more = random_constraints(random.Random(extra_seed))
    bigger = cs.with_constraints(address_of=more.address_of, copy=more.copy,
                                 load=more.load, store=more.store)
    small, big = solve(cs, MAIN_ONLY).pts, solve(bigger, MAIN_ONLY).pts
    for key, objs in small.items():
        assert objs <= big.get(key, frozenset())


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from(["fifo", "lifo", 7, 12345]))
def test_worklist_order_independent(seed, order):
    m = parse_module(pointer_program(random.Random(seed)))
    cs = generate_constraints(m)
    for k in (0, 1, 2):
        base = solve(cs, m, k=k)
        other = solve(cs, m, k=k, order=order)
        assert other.pts == base.pts
        assert other.edges == base.edges
        assert other.resolved == base.resolved


def _refines(m):
    cs = generate_constraints(m)
    insensitive = erased_map(solve(cs, m, k=0))
    for k in (1, 2):
        for v, objs in erased_map(solve(cs, m, k=k)).items():
            assert objs <= insensitive.get(v, set()), (k, v)


@pytest.mark.parametrize("name", ALL_FIXTURES)
def test_sensitivity_refinement_fixtures(name):
    _refines(load_module(name))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**9))
def test_sensitivity_refinement_generated(seed):
    _refines(parse_module(pointer_program(random.Random(seed))))


@pytest.mark.parametrize("name", ["branched_funptr", "funptr", "funptr_order", "socket"])
def test_refinement_exact_without_shared_callees(name):
    m = load_module(name)
    cs = generate_constraints(m)
    base = erased_map(solve(cs, m, k=0))
    for k in (1, 2):
        assert erased_map(solve(cs, m, k=k)) == base
