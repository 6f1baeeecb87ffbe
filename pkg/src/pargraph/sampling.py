"""Random small instances (host graph, rules, set of matchings) for property checks.

Everything is driven by a seeded :class:`random.Random`, so an instance is
reproduced from its seed. Sizes stay at desk scale: hosts with at most four
items, at most two rules, carriers of at most three values and at most four
selected matchings.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .graph import AttributedGraph
from .rewrite import MatchSet
from .rules import Rule, find_matchings, validate_rule
from .sigma import Algebra, App, OpDecl, Signature, TermAlgebra, Var, vars_of
from .syntax import format_algebra, format_graph, format_rule, format_signature

__all__ = ["Instance", "random_algebra", "random_host", "random_instance", "random_rule"]

SORT = "s"
U, V = Var("u", SORT), Var("v", SORT)


@dataclass
class Instance:
    seed: int
    unlabeled: bool
    algebra: Algebra
    host: AttributedGraph
    rules: list[Rule]
    matches: MatchSet

    def describe(self) -> str:
        blocks = [format_signature(self.algebra.signature), format_algebra(self.algebra),
                  format_graph("G", self.host)]
        blocks += [format_rule(r) for r in self.rules]
        blocks.append("# M = " + ", ".join(self.matches.ids))
        return f"# seed {self.seed}\n" + "\n".join(blocks)


def random_algebra(rng: random.Random, size: int | None = None) -> Algebra:
    """One sort ``s`` with values ``0..k-1``, a constant per value and a unary ``f``."""
    k = size or rng.randint(1, 3)
    values = [str(i) for i in range(k)]
    sig = Signature("Sample", [SORT], [OpDecl(v, (), SORT) for v in values] + [OpDecl("f", (SORT,), SORT)])
    table = {(v,): rng.choice(values) for v in values}
    return Algebra("A", sig, {SORT: values}, {"f": table})


def _subset(rng: random.Random, pool, p: float = 0.4) -> frozenset:
    return frozenset(x for x in pool if rng.random() < p)


def random_host(rng: random.Random, alg: Algebra, unlabeled: bool = False, max_items: int = 4) -> AttributedGraph:
    carrier = sorted(alg.carriers[SORT], key=str)
    n = rng.randint(1, min(3, max_items))
    nodes = [f"n{i}" for i in range(n)]
    arrows = {}
    for i in range(rng.randint(0, max_items - n)):
        arrows[f"a{i}"] = (rng.choice(nodes), rng.choice(nodes))
    attrs = {} if unlabeled else {x: _subset(rng, carrier, 0.5) for x in [*nodes, *arrows]}
    src = {a: s for a, (s, _) in arrows.items()}
    tgt = {a: t for a, (_, t) in arrows.items()}
    return AttributedGraph(alg, frozenset(nodes), frozenset(arrows), src, tgt, attrs)


def _terms(alg: Algebra, variables) -> list:
    consts = [App(op.name) for op in alg.signature.ops.values() if not op.args]
    out = consts + list(variables)
    out += [App("f", (v,)) for v in variables]
    if consts:
        out.append(App("f", (consts[0],)))
    return out


def random_rule(rng: random.Random, name: str, alg: Algebra, unlabeled: bool = False) -> Rule:
    """A valid rule with a one- or two-node left-hand side.

    K keeps a sub-selection of L, R keeps some K items and may create a node
    or an arrow; attributes of R on kept items avoid the terms deleted there.
    """
    sig = alg.signature
    p = name + "."
    n = rng.choice((1, 1, 2))
    l_nodes = [f"{p}x{i}" for i in range(n)]
    l_arrows = {}
    if rng.random() < 0.3:
        l_arrows[p + "e"] = (rng.choice(l_nodes), rng.choice(l_nodes))
    declared = [] if unlabeled else [v for v in (U, V) if rng.random() < 0.5]
    pool = [] if unlabeled else _terms(alg, declared)
    l_items = [*l_nodes, *l_arrows]
    l_attr = {x: _subset(rng, pool, 0.35) for x in l_items}
    used = frozenset().union(*(vars_of(t) for terms in l_attr.values() for t in terms))
    variables = tuple(v for v in declared if v in used)
    pool = [t for t in pool if vars_of(t) <= used]

    k_nodes = [x for x in l_nodes if rng.random() < 0.75]
    k_arrows = {a: e for a, e in l_arrows.items() if e[0] in k_nodes and e[1] in k_nodes and rng.random() < 0.7}
    k_attr = {x: _subset(rng, l_attr[x], 0.6) for x in [*k_nodes, *k_arrows]}

    r_nodes = [x for x in k_nodes if rng.random() < 0.8]
    r_arrows = {a: e for a, e in k_arrows.items() if e[0] in r_nodes and e[1] in r_nodes and rng.random() < 0.8}
    if rng.random() < 0.2:
        r_nodes.append(p + "new")
    if r_nodes and rng.random() < 0.15:
        r_arrows[p + "f"] = (rng.choice(r_nodes), rng.choice(r_nodes))
    r_attr = {}
    for x in [*r_nodes, *r_arrows]:
        banned = l_attr.get(x, frozenset()) - k_attr.get(x, frozenset())
        r_attr[x] = _subset(rng, [t for t in pool if t not in banned], 0.35)

    talg = TermAlgebra(sig, variables)

    def graph(nodes, arrows, attrs):
        return AttributedGraph(talg, frozenset(nodes), frozenset(arrows), {a: e[0] for a, e in arrows.items()},
                               {a: e[1] for a, e in arrows.items()}, attrs)

    r = Rule(name, sig, variables, graph(l_nodes, l_arrows, l_attr), graph(k_nodes, k_arrows, k_attr),
             graph(r_nodes, r_arrows, r_attr))
    problems = validate_rule(r)
    if problems:
        raise AssertionError(f"sampler built an invalid rule {name}: {problems}")
    return r


def random_instance(seed: int, unlabeled: bool | None = None, max_matchings: int = 4) -> Instance:
    rng = random.Random(seed)
    if unlabeled is None:
        unlabeled = rng.random() < 0.2
    # redraw a few times so that most instances have something to select
    for _ in range(6):
        alg = random_algebra(rng)
        host = random_host(rng, alg, unlabeled)
        rules = [random_rule(rng, f"r{i + 1}", alg, unlabeled) for i in range(rng.randint(1, 2))]
        found = [m for r in rules for m in find_matchings(r, host)]
        if len(found) > 1 or (found and rng.random() < 0.3):
            break
    k = rng.randint(min(2, len(found)), min(max_matchings, len(found)))
    chosen = rng.sample(found, k)
    return Instance(seed, unlabeled, alg, host, rules, MatchSet(host, tuple(chosen)))
