import itertools

import pytest
from conftest import load_sample
from hypothesis import given, settings
from strategies import instances

from pargraph.graph import AttributedGraph, Derived, image, joinable
from pargraph.rules import (
    Matching,
    Rule,
    UnsupportedMatching,
    check_matching,
    find_matchings,
    is_consistent,
    validate_rule,
)
from pargraph.sigma import TermAlgebra, Value, Var, evaluate
from pargraph.syntax import ParseError, parse_document

HEADER = """
signature S { sort s; sort int builtin; const 0 : s; const 1 : s; op f : s -> s; op inc : int -> int; }
algebra A over S { carrier s = {0, 1}; map f : (0) -> 1, (1) -> 0; map inc = succ; }
"""


def doc(text: str):
    return parse_document(HEADER + text)


def rule_errors(text: str) -> list[str]:
    with pytest.raises(ParseError) as exc:
        doc(text)
    return [d.message for d in exc.value.diagnostics]


def test_swap_rules_are_valid():
    for r in load_sample("swap").rules.values():
        assert validate_rule(r) == []


def test_identity_rule_is_valid():
    d = doc("rule id over S vars (u : s) { L { node x [u]; } K { node x [u]; } R { node x [u]; } }")
    assert validate_rule(d.rules["id"]) == []


def test_rhs_variable_outside_lhs():
    d = doc("rule ok over S vars (u : s) { L { node x [u]; } K { node x [u]; } R { node x [u]; } }")
    r = d.rules["ok"]
    w = Var("w", "s")
    talg = TermAlgebra(r.signature, (*r.variables, w))
    rhs = AttributedGraph(talg, r.rhs.nodes, r.rhs.arrows, {}, {}, {"ok.x": {w}})
    lhs = AttributedGraph(talg, r.lhs.nodes, r.lhs.arrows, {}, {}, r.lhs.attrs)
    interface = AttributedGraph(talg, r.interface.nodes, r.interface.arrows, {}, {}, r.interface.attrs)
    bad = Rule("bad", r.signature, (*r.variables, w), lhs, interface, rhs)
    assert any("Var(R) ⊄ Var(L)" in e for e in validate_rule(bad))


def test_undeclared_variable_in_rhs_is_a_diagnostic():
    msgs = rule_errors("rule r over S vars (u : s) { L { node x [u]; } K { node x [u]; } R { node x [w]; } }")
    assert any("unknown symbol 'w'" in m for m in msgs)


def test_interface_outside_lhs():
    msgs = rule_errors("rule r over S { L { node x; } K { node x; node y; } R { node x; } }")
    assert any("K ⋬ L" in m for m in msgs)


def test_deleted_attribute_reappearing_in_rhs():
    msgs = rule_errors("rule r over S { L { node x [0]; } K { node x; } R { node x [0]; } }")
    assert any("L ⊓ R ⋬ K" in m for m in msgs)


def test_unused_variable():
    msgs = rule_errors("rule r over S vars (u : s) { L { node x; } K { node x; } R { node x; } }")
    assert any("variable 'u' does not occur in L" in m for m in msgs)


def test_lhs_and_rhs_must_be_joinable():
    msgs = rule_errors("rule r over S { L { node x; node y; arrow e : x -> y; } K { node x; node y; arrow e : x -> y; }"
                       " R { node x; node y; arrow e : y -> x; } }")
    assert any("joinable" in m for m in msgs)


def test_swap_matchings():
    d = load_sample("swap")
    G = d.graphs["G"]
    for name in ("r1", "r2"):
        (m,) = find_matchings(d.rules[name], G)
        asg = {v.name: val for v, val in m.assignment.items()}
        assert asg == {"u": Value("int", 1), "v": Value("int", -1)}
        assert set(m.items.values()) == {"x", "y"}
        assert m.lhs_image == G


def test_conflict_matchings():
    d = load_sample("conflict")
    ms = find_matchings(d.rules["r"], d.graphs["G"])
    maps = sorted(tuple(sorted((d.rules["r"].local_name(k), v) for k, v in m.items.items())) for m in ms)
    assert maps == [
        (("f", "g"), ("f'", "h"), ("x", "y"), ("x'", "z")),
        (("f", "h"), ("f'", "g"), ("x", "z"), ("x'", "y")),
    ]


def test_no_matchings_in_empty_graph():
    d = doc("graph E over A { } rule r over S { L { node x; } K { node x; } R { node x; } }")
    assert find_matchings(d.rules["r"], d.graphs["E"]) == []


def test_inconsistent_matching():
    d = doc("graph G over A { node x [0]; }"
            " rule r over S vars (u : s, v : s) { L { node x [u, v]; } K { node x [v]; } R { node x [v]; } }")
    r, G = d.rules["r"], d.graphs["G"]
    u, v = r.variables
    m = Matching(r, G, {"r.x": "x"}, {u: Value("s", "0"), v: Value("s", "0")})
    assert m.morphism.check() == []
    assert not is_consistent(m)
    assert find_matchings(r, G) == []


def test_unlabeled_matchings_are_consistent():
    d = load_sample("conflict")
    assert all(is_consistent(m) for m in find_matchings(d.rules["r"], d.graphs["G"]))


def test_lift_swap():
    d = load_sample("swap")
    (m,) = find_matchings(d.rules["r1"], d.graphs["G"])
    a = Value("ident", "a")
    assert m.rhs_image == AttributedGraph.build(d.graphs["G"].algebra, {"x": [a, Value("int", -1)]})


def test_lift_without_created_items_is_the_image():
    d = load_sample("three_rules")
    (m,) = find_matchings(d.rules["r3"], d.graphs["G"])
    assert m.rhs_image.items == {"x"}
    assert m.rhs_image.attr("x") == {Value("s", "0"), Value("s", "1")}


def test_lift_creates_fresh_items():
    d = doc("graph G over A { node x [0]; }"
            " rule r over S { L { node a; } K { node a; } R { node a; node n [1]; arrow e : a -> n; } }")
    (m,) = find_matchings(d.rules["r"], d.graphs["G"])
    img = m.rhs_image
    created = img.items - {"x"}
    assert created == {Derived("r.n", m.id), Derived("r.e", m.id)}
    assert not created & d.graphs["G"].items
    assert img.src[Derived("r.e", m.id)] == "x"


def test_compound_terms_are_evaluated():
    d = doc("graph G over A { node x [0, 1]; node y [1]; }"
            " rule r over S vars (u : s) { L { node p [u, f(u)]; } K { node p [u, f(u)]; } R { node p [u]; } }")
    ms = find_matchings(d.rules["r"], d.graphs["G"])
    assert sorted((m.items["r.p"], str(next(iter(m.assignment.values())))) for m in ms) == [("x", "0"), ("x", "1")]


def test_unconstrained_integer_variable_is_unsupported():
    d = doc("graph G over A { node x [5 : int]; }"
            " rule r over S vars (n : int) { L { node p [inc(n)]; } K { node p [inc(n)]; } R { node p; } }")
    with pytest.raises(UnsupportedMatching):
        find_matchings(d.rules["r"], d.graphs["G"])


def test_integer_variable_seeded_by_bare_occurrence():
    d = doc("graph G over A { node x [5 : int]; }"
            " rule r over S vars (n : int) { L { node p [n]; } K { node p [n]; } R { node p [n, inc(n)]; } }")
    (m,) = find_matchings(d.rules["r"], d.graphs["G"])
    assert m.rhs_image.attr("x") == {Value("int", 5), Value("int", 6)}


def test_self_loops_match():
    d = doc("graph G over A { node x; node y; arrow l : x -> x; arrow e : x -> y; }"
            " rule r over S { L { node p; arrow q : p -> p; } K { node p; arrow q : p -> p; } R { node p; } }")
    (m,) = find_matchings(d.rules["r"], d.graphs["G"])
    assert m.items == {"r.p": "x", "r.q": "l"}


def test_matching_order_is_canonical():
    d = load_sample("conflict")
    ids = [m.id for m in find_matchings(d.rules["r"], d.graphs["G"])]
    assert ids == sorted(ids)


# brute force oracle ---------------------------------------------------------

def brute_force(r, G) -> set:
    """Every injective, attribute-containing, consistent morphism, by exhaustive search."""
    L, K = r.lhs, r.interface
    alg = G.algebra
    carrier = sorted(alg.carriers["s"], key=str)
    lnodes, larrows = sorted(L.nodes), sorted(L.arrows)
    out = set()
    for ns in itertools.permutations(sorted(G.nodes), len(lnodes)):
        for arr in itertools.permutations(sorted(G.arrows), len(larrows)):
            f = dict(zip(lnodes, ns)) | dict(zip(larrows, arr))
            if any(G.src[f[a]] != f[L.src[a]] or G.tgt[f[a]] != f[L.tgt[a]] for a in larrows):
                continue
            for vals in itertools.product(carrier, repeat=len(r.variables)):
                asg = dict(zip(r.variables, vals))
                ev = lambda terms: {evaluate(t, alg, asg) for t in terms}  # noqa: E731
                if any(not ev(L.attr(x)) <= G.attr(f[x]) for x in L.items):
                    continue
                if any(ev(L.attr(x) - K.attr(x)) & ev(K.attr(x)) for x in K.items):
                    continue
                out.add((tuple(sorted(f.items())), tuple(sorted((v.name, val) for v, val in asg.items()))))
    return out


@settings(max_examples=150, deadline=None)
@given(instances)
def test_find_matchings_equals_brute_force(inst):
    for r in inst.rules:
        found = find_matchings(r, inst.host)
        got = {(tuple(sorted(m.items.items())), tuple(sorted((v.name, val) for v, val in m.assignment.items())))
               for m in found}
        assert got == brute_force(r, inst.host)
        assert len(got) == len(found)


@settings(max_examples=100, deadline=None)
@given(instances)
def test_matching_invariants(inst):
    ms = list(inst.matches)
    for m in ms:
        assert check_matching(m) == []
        lift = m.lifted.items
        for x in m.rule.rhs_meet_interface.items:
            assert lift[x] == m.items[x]
        assert image(m.morphism, m.rule.rhs_meet_interface) == m.kept_rhs_image
        assert joinable(m.rhs_image, inst.host)
    for a, b in itertools.combinations(ms, 2):
        assert joinable(a.rhs_image, b.rhs_image)
