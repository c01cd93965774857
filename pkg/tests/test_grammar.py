import random

import pytest
from hypothesis import given, settings, strategies as st

from callcheck.errors import EntryNotFound
from callcheck.grammar import (
    NT,
    EventGrammar,
    ExitPolicy,
    Production,
    ViolationDFA,
    binarize,
    bounded_language,
    extract_grammar,
    intersect,
    is_empty,
    remove_useless,
    shortest_witness,
    simplify_grammar,
)
from callcheck.ir import parse_module
from callcheck.pts import generate_constraints, solve
from callcheck.graphs import build_icfg
from conftest import ALL_FIXTURES, analyze_fixture
from gen import EVENTS, random_acyclic_program, random_dfa, random_grammar, random_program
from oracles import all_words, bounded_paths, derives, path_language

FS = ("first", "second")
SOCK = ("connect", "write_to_server", "close")


def lang(g, n=8):
    return bounded_language(g, n)


def accept_all(alphabet):
    return ViolationDFA.from_function([0], alphabet, lambda q, a: 0, 0, [0])


def icfg_of(text, k=0):
    m = parse_module(text)
    return build_icfg(m, solve(generate_constraints(m), m, k=k))


# -- extraction on the examples -------------------------------------------------

def test_branched_order_language():
    g = extract_grammar(analyze_fixture("branched_funptr_order").icfg, FS)
    assert lang(g) == {("first", "first"), ("first", "second"),
                       ("second", "first"), ("second", "second")}


def test_single_call_language():
    assert lang(extract_grammar(analyze_fixture("funptr").icfg, FS)) == {("first",)}
    assert lang(extract_grammar(analyze_fixture("branched_funptr").icfg, FS)) == {
        ("first",), ("second",)}


def test_socket_language_erases_failure_exits():
    icfg = analyze_fixture("socket").icfg
    assert lang(extract_grammar(icfg, SOCK)) == {(), SOCK}
    strict = extract_grammar(icfg, SOCK, policy=ExitPolicy(mode="strict"))
    assert lang(strict) == {(), ("connect",), SOCK}


def test_socket_noclose_language():
    g = extract_grammar(analyze_fixture("socket_noclose").icfg, SOCK)
    assert lang(g) == {(), ("connect", "write_to_server")}


def test_disjoint_alphabet_gives_epsilon():
    g = extract_grammar(analyze_fixture("branched_funptr").icfg, ("nothing",))
    assert lang(g) == {()}


def test_context_sensitive_extraction_is_more_precise():
    a0 = analyze_fixture("id_function", k=0)
    assert len(lang(extract_grammar(a0.icfg, FS))) == 4
    a1 = analyze_fixture("id_function", k=1)
    cs = extract_grammar(a1.icfg, FS, context_sensitive=True)
    assert lang(cs) == {("first", "second")}


def test_extraction_errors():
    icfg = analyze_fixture("funptr").icfg
    with pytest.raises(ValueError):
        extract_grammar(icfg, ())
    with pytest.raises(EntryNotFound):
        extract_grammar(icfg, FS, entry="nope")
    with pytest.raises(ValueError):
        ExitPolicy(mode="lenient")


def test_exit_policy_failure_classification():
    m = parse_module("declare void @exit(i32)\ndeclare void @abort()\n"
                     "define void @main() {\nentry:\n  call void @exit(i32 0)\n"
                     "  call void @exit(i32 3)\n  call void @abort()\n  ret void\n}\n")
    a, b, c = m.function("main").instructions()
    p = ExitPolicy()
    assert not p.is_failure("exit", a)
    assert p.is_failure("exit", b)
    assert p.is_failure("abort", c)
    assert not ExitPolicy(mode="strict").is_failure("abort", c)


def test_exit_inside_callee_stops_caller():
    text = """declare void @a()
declare void @b()
declare void @exit(i32)
define void @stop() {
entry:
  call void @a()
  call void @exit(i32 0)
  unreachable
}
define void @main() {
entry:
  call void @stop()
  call void @b()
  ret void
}
"""
    assert lang(extract_grammar(icfg_of(text), ("a", "b"))) == {("a",)}


def test_recursion_produces_unbounded_language():
    text = """declare void @a()
define void @f(i1 %c) {
entry:
  call void @a()
  br i1 %c, label %again, label %done
again:
  call void @f(i1 %c)
  br label %done
done:
  ret void
}
define void @main() {
entry:
  call void @f(i1 true)
  ret void
}
"""
    g = extract_grammar(icfg_of(text), ("a",))
    assert lang(g, 5) == {("a",) * n for n in range(1, 6)}


def test_grammar_is_linear_in_calls():
    sizes = []
    for n in (10, 20, 40):
        body = "\n".join("  call void @a()" for _ in range(n))
        text = f"declare void @a()\ndefine void @main() {{\nentry:\n{body}\n  ret void\n}}\n"
        sizes.append(len(extract_grammar(icfg_of(text), ("a",), simplify=False).productions))
    assert sizes[2] - sizes[1] == 2 * (sizes[1] - sizes[0])


# -- relation to the ICFG ------------------------------------------------------------

@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from(["erase", "strict"]))
def test_acyclic_language_equals_path_enumeration(seed, mode):
    icfg = icfg_of(random_acyclic_program(random.Random(seed)))
    g = extract_grammar(icfg, EVENTS, policy=ExitPolicy(mode=mode))
    want = path_language(icfg, EVENTS, erase_failures=mode == "erase")
    assert lang(g, 2 * max(map(len, want)) + 2) == want


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**9))
def test_cyclic_paths_are_in_language(seed):
    icfg = icfg_of(random_program(random.Random(seed)))
    g = extract_grammar(icfg, EVENTS, policy=ExitPolicy(mode="strict"))
    for w in bounded_paths(icfg, EVENTS, max_events=6):
        assert derives(g, w), w


@pytest.mark.parametrize("name", ALL_FIXTURES)
def test_unsimplified_and_simplified_agree(name):
    icfg = analyze_fixture(name).icfg
    for alphabet in (FS, SOCK):
        raw = extract_grammar(icfg, alphabet, simplify=False)
        assert lang(raw) == lang(extract_grammar(icfg, alphabet))


# -- simplification ----------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_simplify_preserves_language_and_is_idempotent(seed):
    g = random_grammar(random.Random(seed))
    s = simplify_grammar(g)
    assert simplify_grammar(s) == s
    got = lang(s, 5)
    assert got == lang(g, 5)
    for w in all_words(("a", "b"), 4):
        assert derives(g, w) == (w in got)
    assert is_empty(s) == is_empty(g)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_binarize_preserves_language(seed):
    g = random_grammar(random.Random(seed))
    b = binarize(g)
    assert b.is_binarized
    assert lang(b, 5) == lang(g, 5)


def test_remove_useless_drops_unproductive():
    S, A, B = NT("S"), NT("A"), NT("B")
    g = EventGrammar.build(("a",), [Production(S, ("a",)), Production(S, (A,)),
                                    Production(A, (A, "a")), Production(B, ("a",))], S)
    r = remove_useless(g)
    assert r.nonterminals == {S}
    assert is_empty(EventGrammar.build(("a",), [Production(S, (S,))], S))


def test_unit_collapse_keeps_provenance():
    from callcheck.ir.model import SourceLoc
    S, A = NT("S"), NT("A")
    l1, l2 = SourceLoc("main", "entry", 0), SourceLoc("f", "entry", 2)
    g = EventGrammar.build(("a",), [Production(S, (A,), (l1,)),
                                    Production(A, ("a",), (l2,))], S)
    (p,) = simplify_grammar(g).productions
    assert p.body == ("a",) and p.prov == (l1, l2)


# -- intersection and witnesses --------------------------------------------------------

def test_dfa_must_be_total():
    with pytest.raises(ValueError):
        ViolationDFA((0, 1), ("a",), {(0, "a"): 1}, 0, frozenset({1}))


def test_dfa_ignores_foreign_events():
    d = random_dfa(random.Random(3))
    assert d.run(("zz",)) == d.start


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9), st.integers(0, 10**9))
def test_intersection_matches_membership_oracle(gseed, dseed):
    g = random_grammar(random.Random(gseed))
    d = random_dfa(random.Random(dseed))
    p = intersect(g, d)
    got = lang(p, 6)
    for w in all_words(("a", "b"), 6):
        assert (w in got) == (d.accepts(w) and derives(g, w))
    assert (is_empty(p)) == (shortest_witness(p) is None)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9), st.integers(0, 10**9))
def test_witness_is_shortest_then_lexmin(gseed, dseed):
    g = random_grammar(random.Random(gseed))
    p = intersect(g, random_dfa(random.Random(dseed)))
    w = shortest_witness(p)
    small = lang(p, 7)
    if w is None:
        assert not small
        return
    assert derives(g, w.word)
    if small:
        n = min(map(len, small))
        assert w.word == min(x for x in small if len(x) == n)
    else:
        assert len(w) > 7


def test_empty_product_has_no_witness():
    g = extract_grammar(analyze_fixture("funptr").icfg, FS)
    never = ViolationDFA.from_function([0], FS, lambda q, a: 0, 0, [])
    p = intersect(g, never)
    assert is_empty(p) and shortest_witness(p) is None


def test_witness_provenance_points_at_call_sites():
    a = analyze_fixture("branched_funptr_order")
    g = extract_grammar(a.icfg, FS)
    w = shortest_witness(intersect(g, accept_all(FS)))
    assert w.word == ("first", "first") and str(w) == "first·first"
    for ev in w.events:
        assert ev.chain and ev.loc == ev.chain[-1]
        site = a.icfg.sites_by_loc[ev.loc]
        assert ev.event in a.icfg.targets(site)


def test_epsilon_witness_renders():
    g = extract_grammar(analyze_fixture("socket").icfg, SOCK)
    w = shortest_witness(intersect(g, accept_all(SOCK)))
    assert w.word == () and str(w) == "ε" and len(w) == 0


@pytest.mark.parametrize("name", ALL_FIXTURES)
def test_emptiness_cross_check(name):
    icfg = analyze_fixture(name).icfg
    g = extract_grammar(icfg, FS)
    for d in (random_dfa(random.Random(i), alphabet=FS) for i in range(20)):
        p = intersect(g, d)
        assert is_empty(p) == (not any(d.accepts(w) for w in lang(g)))
