import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from strategies import algebras, graph_with_subgraphs, graphs, instances

from pargraph.graph import (
    AttributedGraph,
    Derived,
    GraphError,
    GraphMorphism,
    NotJoinable,
    delete_disjoint,
    image,
    is_disjoint,
    is_subgraph,
    isomorphic,
    join,
    join_family,
    joinable,
    meet,
    rename_items,
)
from pargraph.sigma import Algebra, OpDecl, Signature, Value

SIG = Signature("B", ["s"], [OpDecl("0", (), "s"), OpDecl("1", (), "s")])
A = Algebra("A", SIG, {"s": ["0", "1"]})
ZERO, ONE = Value("s", "0"), Value("s", "1")


def g(nodes=None, arrows=None, alg=A):
    return AttributedGraph.build(alg, nodes or {}, arrows or {})


PIC_G = g({"x": [ONE], "y": [ZERO, ONE], "z": []}, {"f": ("x", "y"), "g": ("y", "z", [ZERO])})
PIC_H = g({"x": [], "y": [ONE]}, {"f": ("x", "y")})


def all_subgraphs(G):
    """Every subgraph of a small graph (the enumeration oracle)."""
    nodes = sorted(G.nodes)
    for nk in range(len(nodes) + 1):
        for ns in itertools.combinations(nodes, nk):
            cand = [a for a in sorted(G.arrows) if G.src[a] in ns and G.tgt[a] in ns]
            for ak in range(len(cand) + 1):
                for arr in itertools.combinations(cand, ak):
                    items = [*ns, *arr]
                    choices = [[frozenset(c) for k in range(len(G.attr(x)) + 1)
                                for c in itertools.combinations(sorted(G.attr(x), key=str), k)] for x in items]
                    for attrs in itertools.product(*choices):
                        yield AttributedGraph(G.algebra, frozenset(ns), frozenset(arr),
                                              {a: G.src[a] for a in arr}, {a: G.tgt[a] for a in arr},
                                              dict(zip(items, attrs)))


# examples ------------------------------------------------------------------

def test_picture_subgraph():
    assert is_subgraph(PIC_H, PIC_G)
    assert is_subgraph(PIC_G, PIC_G)
    assert not is_subgraph(PIC_G, PIC_H)


def test_subgraph_requires_same_arrow_ends():
    other = g({"x": [ONE], "y": [ZERO, ONE], "z": []}, {"f": ("y", "x")})
    assert not is_subgraph(other, PIC_G)


def test_joinable_examples():
    assert joinable(PIC_H, g({"z": []}, {}))
    assert joinable(PIC_G, PIC_G)
    assert not joinable(g({"e": []}), g({"x": []}, {"e": ("x", "x")}))
    assert not joinable(g({"x": [], "y": []}, {"e": ("x", "y")}), g({"x": [], "y": []}, {"e": ("y", "x")}))
    other = Algebra("B", SIG, {"s": ["0", "1"]})
    assert not joinable(PIC_H, g({"x": []}, alg=other))


def test_join_of_swap_pieces():
    Z = Signature("Env", ["ident", "int"], [OpDecl("a", (), "ident"), OpDecl("b", (), "ident")], ["int"])
    alg = Algebra("Z", Z, {"ident": ["a", "b"]})
    a, b = Value("ident", "a"), Value("ident", "b")
    i = lambda n: Value("int", n)  # noqa: E731
    base = g({"x": [a], "y": [b]}, alg=alg)
    out = join_family([base, g({"x": [a, i(-1)]}, alg=alg), g({"y": [b, i(1)]}, alg=alg)], alg)
    assert out == g({"x": [a, i(-1)], "y": [b, i(1)]}, alg=alg)


def test_meet_join_trivial_cases():
    assert join(PIC_G, PIC_G) == PIC_G and meet(PIC_G, PIC_G) == PIC_G
    assert meet(g({"x": [ONE]}), g({"y": [ONE]})) == g()
    assert join_family([], A) == g()


def test_join_conflict_is_named():
    with pytest.raises(NotJoinable, match="e"):
        join(g({"e": []}), g({"x": []}, {"e": ("x", "x")}))


def test_structure_is_validated():
    with pytest.raises(GraphError):
        g({"x": []}, {"e": ("x", "nowhere")})
    with pytest.raises(GraphError):
        AttributedGraph(A, frozenset({"x"}), frozenset({"x"}), {"x": "x"}, {"x": "x"}, {})
    with pytest.raises(GraphError):
        AttributedGraph(A, frozenset({"x"}), frozenset(), {}, {}, {"y": {ZERO}})


def test_attribute_values_checked_against_carrier():
    G = g({"x": [Value("s", "7")]})
    assert G.check_values()
    assert not PIC_G.check_values()


def test_delete_examples():
    G = g({"x": [ZERO, ONE], "y": [ONE]})
    assert delete_disjoint(G, (), (), {"x": {ONE}, "y": {ONE}}) == g({"x": [ZERO], "y": []})
    conflict = g({"y": [], "z": []}, {"g": ("y", "z"), "h": ("z", "y")})
    assert delete_disjoint(conflict, {"y", "z"}, (), {}) == g()
    assert delete_disjoint(PIC_G, (), (), {}) == PIC_G


def test_delete_removes_dangling_arrows():
    out = delete_disjoint(PIC_G, {"z"}, (), {"unknown": {ONE}})
    assert out.arrows == {"f"} and out.nodes == {"x", "y"}


def test_identity_image_and_attribute_free_image():
    ident = GraphMorphism(PIC_G, PIC_G, {x: x for x in PIC_G.items})
    assert image(ident, PIC_H) == PIC_H
    assert image(ident, g({"y": []})) == g({"y": []})
    with pytest.raises(GraphError):
        image(ident, g({"y": [ZERO, ONE], "w": []}))


def test_isomorphism_examples():
    renamed = rename_items(PIC_G, {"x": "x'", "y": "y'"})
    w = isomorphic(PIC_G, renamed)
    assert w is not None and w["x"] == "x'" and w["f"] == "f"
    assert isomorphic(g({"x": [ZERO]}), g({"x": []})) is None
    assert isomorphic(PIC_G, PIC_H) is None


def test_isomorphism_distinguishes_orientation_and_parallel_arrows():
    two_way = g({"p": [], "q": []}, {"e1": ("p", "q"), "e2": ("q", "p")})
    same_way = g({"p": [], "q": []}, {"e1": ("p", "q"), "e2": ("p", "q")})
    assert isomorphic(two_way, same_way) is None
    assert isomorphic(same_way, rename_items(same_way, {"e1": "e2", "e2": "e1"})) is not None


def test_derived_ids_never_equal_plain_ids():
    d = Derived("r.x", "r[x=x]")
    assert d != "r.x" and d == Derived("r.x", "r[x=x]")
    G = g({d: [ONE], "x": []})
    assert d in G.nodes and len(G.nodes) == 2


# properties ----------------------------------------------------------------

@given(graph_with_subgraphs(2))
def test_order_laws(gs):
    _, H, K = gs
    assert is_subgraph(H, K) == (meet(H, K) == H) == (join(H, K) == K)
    assert is_subgraph(meet(H, K), H) and is_subgraph(H, join(H, K))
    assert meet(H, K) == meet(K, H) and join(H, K) == join(K, H)


@given(graph_with_subgraphs(3))
def test_associativity_and_distributivity(gs):
    _, F, H, K = gs
    assert join(join(F, H), K) == join(F, join(H, K))
    assert meet(meet(F, H), K) == meet(F, meet(H, K))
    assert meet(F, join(H, K)) == join(meet(F, H), meet(F, K))
    assert join(F, meet(H, K)) == meet(join(F, H), join(F, K))


@settings(max_examples=40, deadline=None)
@given(algebras(max_size=2), st.data())
def test_delete_is_the_largest_disjoint_subgraph(alg, data):
    G = data.draw(graphs(alg, max_nodes=3, max_arrows=2))
    carrier = sorted(alg.carriers["s"], key=str)
    V = data.draw(st.frozensets(st.sampled_from(["x", "y", "z", "w"])))
    Ar = data.draw(st.frozensets(st.sampled_from(["e0", "e1", "e9"])))
    l = data.draw(st.dictionaries(st.sampled_from(["x", "y", "z", "e0", "e1"]),
                                  st.frozensets(st.sampled_from(carrier))))
    D = delete_disjoint(G, V, Ar, l)
    assert is_subgraph(D, G) and is_disjoint(D, V, Ar, l)
    for S in all_subgraphs(G):
        if is_disjoint(S, V, Ar, l):
            assert is_subgraph(S, D)


@settings(max_examples=60, deadline=None)
@given(instances)
def test_image_is_smallest(inst):
    for m in inst.matches:
        L, img = m.rule.lhs, m.lhs_image
        assert is_subgraph(img, inst.host)
        assert GraphMorphism(L, img, m.items, m.assignment).check() == []
        # dropping anything from the image breaks the factorization
        for S in all_subgraphs(img):
            if S != img:
                assert GraphMorphism(L, S, m.items, m.assignment).check() != []


@given(algebras(max_size=2), st.data())
def test_isomorphism_under_random_renaming(alg, data):
    G = data.draw(graphs(alg, max_nodes=3, max_arrows=3))
    rng = random.Random(data.draw(st.integers(0, 1000)))
    names = sorted(G.items)
    fresh = [f"q{i}" for i in range(len(names))]
    rng.shuffle(fresh)
    H = rename_items(G, dict(zip(names, fresh)))
    w = isomorphic(G, H)
    assert w is not None
    assert rename_items(G, w) == H
    assert isomorphic(H, G) is not None
    if G.nodes:
        x = min(G.nodes)
        bumped = AttributedGraph(G.algebra, G.nodes, G.arrows, G.src, G.tgt,
                                 {**G.attrs, x: G.attr(x) ^ {min(alg.carriers["s"], key=str)}})
        assert isomorphic(G, bumped) is None


@settings(max_examples=30)
@given(algebras(max_size=2), st.data())
def test_isomorphism_is_an_equivalence(alg, data):
    sample = [data.draw(graphs(alg, max_nodes=2, max_arrows=2)) for _ in range(4)]
    for G in sample:
        assert isomorphic(G, G) is not None
    for G, H in itertools.product(sample, repeat=2):
        assert (isomorphic(G, H) is None) == (isomorphic(H, G) is None)
        for K in sample:
            if isomorphic(G, H) is not None and isomorphic(H, K) is not None:
                assert isomorphic(G, K) is not None
