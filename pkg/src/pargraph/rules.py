"""Rules, consistent matchings and lifted matchings.

A rule is a triple of term-attributed graphs ``(L, K, R)``. ``L`` minus
``K`` is deleted, ``R`` is added; ``K`` need not be contained in ``R``, so
what ``K`` holds but ``R`` drops may still be deleted by other rules.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from .graph import (
    AttributedGraph,
    Derived,
    GraphMorphism,
    ItemId,
    image,
    is_subgraph,
    item_key,
    join_conflict,
    meet,
    subgraph_violation,
)
from .sigma import (
    EvaluationError,
    Signature,
    SortError,
    TermAlgebra,
    Value,
    Var,
    evaluate,
    validate_term,
    value_key,
    vars_of,
)

__all__ = [
    "LiftedMatching",
    "Matching",
    "Rule",
    "RuleError",
    "UnsupportedMatching",
    "check_matching",
    "find_matchings",
    "graph_vars",
    "is_consistent",
    "lift_matching",
    "validate_rule",
]


class RuleError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


class UnsupportedMatching(ValueError):
    """A variable can only be bound by enumerating an infinite carrier."""


def graph_vars(G: AttributedGraph) -> frozenset[Var]:
    out: set[Var] = set()
    for s in G.attrs.values():
        for t in s:
            out |= vars_of(t)
    return frozenset(out)


@dataclass(frozen=True, eq=False)
class Rule:
    """``lhs``, ``interface`` and ``rhs`` are the graphs L, K and R.

    Item ids are expected to be unique to the rule (the parser prefixes them
    with the rule name), so matchings of distinct rules never coincide.
    """

    name: str
    signature: Signature
    variables: tuple[Var, ...]
    lhs: AttributedGraph
    interface: AttributedGraph
    rhs: AttributedGraph

    def local_name(self, x: ItemId) -> str:
        s = str(x)
        prefix = self.name + "."
        return s[len(prefix):] if s.startswith(prefix) else s

    @cached_property
    def rhs_meet_interface(self) -> AttributedGraph:
        return meet(self.rhs, self.interface)

    @property
    def term_algebra(self) -> TermAlgebra:
        return self.lhs.algebra

    def is_unlabeled(self) -> bool:
        return self.lhs.is_unlabeled() and self.interface.is_unlabeled() and self.rhs.is_unlabeled()

    def __repr__(self) -> str:
        return f"Rule({self.name!r})"


def validate_rule(r: Rule) -> list[str]:
    """Every violated rule invariant, one message each; empty when valid."""
    errors: list[str] = []
    names = [v.name for v in r.variables]
    for n in sorted({n for n in names if names.count(n) > 1}):
        errors.append(f"variable {n!r} declared twice")
    alg = r.lhs.algebra
    if not getattr(alg, "is_term_algebra", False):
        errors.append("L is not attributed by terms")
    for label, g in (("K", r.interface), ("R", r.rhs)):
        if g.algebra != alg:
            errors.append(f"{label} and L are over different term algebras")
    for label, g in (("L", r.lhs), ("K", r.interface), ("R", r.rhs)):
        for x in sorted(g.attrs, key=item_key):
            for t in sorted(g.attrs[x], key=str):
                try:
                    validate_term(t, r.signature, r.variables)
                except SortError as exc:
                    errors.append(f"{label}: attribute {t} of {r.local_name(x)}: {exc}")
    if errors:
        return errors
    problem = join_conflict(r.lhs, r.rhs)
    if problem is not None:
        errors.append(f"L and R are not joinable: {problem}")
    else:
        bad = subgraph_violation(meet(r.lhs, r.rhs), r.interface)
        if bad is not None:
            errors.append(f"L ⊓ R ⋬ K: {_fmt_violation(r, bad)}")
    bad = subgraph_violation(r.interface, r.lhs)
    if bad is not None:
        errors.append(f"K ⋬ L: {_fmt_violation(r, bad)}")
    used = graph_vars(r.lhs)
    for v in r.variables:
        if v not in used:
            errors.append(f"variable {v.name!r} does not occur in L")
    extra = graph_vars(r.rhs) - used
    if extra:
        errors.append("Var(R) ⊄ Var(L): " + ", ".join(sorted(v.name for v in extra)))
    return errors


def _fmt_violation(r: Rule, bad) -> str:
    x, why = bad
    return why if x is None else f"{r.local_name(x)}: {why}"


def _encode_item(x: ItemId) -> str:
    if isinstance(x, Derived):
        return f"<{_encode_item(x.origin)}@{x.matching}>"
    return x


@dataclass(frozen=True, eq=False)
class LiftedMatching:
    """The graph RImg together with the lifted item map from R onto it."""

    graph: AttributedGraph
    items: Mapping[ItemId, ItemId]


@dataclass(frozen=True, eq=False)
class Matching:
    """A consistent, item-injective morphism from a rule's L into ``host``.

    Matchings are identified by ``id``, a canonical encoding of the rule name,
    item map and assignment. The host is deliberately not part of it: the
    same matching transported along a canonical injection keeps its id, so
    items it creates keep their names.
    """

    rule: Rule
    host: AttributedGraph
    items: Mapping[ItemId, ItemId]
    assignment: Mapping[Var, Value]

    @cached_property
    def id(self) -> str:
        r = self.rule
        parts = [f"{r.local_name(x)}={_encode_item(self.items[x])}"
                 for x in sorted(self.items, key=item_key)]
        out = f"{r.name}[{','.join(parts)}"
        if self.assignment:
            out += "|" + ",".join(f"{v.name}={val!r}"
                                  for v, val in sorted(self.assignment.items(), key=lambda p: p[0].name))
        return out + "]"

    def __eq__(self, other):
        if not isinstance(other, Matching):
            return NotImplemented
        return self.id == other.id and (self.host is other.host or self.host == other.host)

    def __hash__(self):
        return hash(self.id)

    def __repr__(self):
        return f"Matching({self.id})"

    def values(self, terms) -> frozenset:
        alg, asg = self.host.algebra, self.assignment
        return frozenset(evaluate(t, alg, asg) for t in terms)

    @cached_property
    def morphism(self) -> GraphMorphism:
        return GraphMorphism(self.rule.lhs, self.host, self.items, self.assignment)

    def image(self, F: AttributedGraph) -> AttributedGraph:
        return image(self.morphism, F)

    @cached_property
    def lhs_image(self) -> AttributedGraph:
        return self.image(self.rule.lhs)

    @cached_property
    def interface_image(self) -> AttributedGraph:
        return self.image(self.rule.interface)

    @cached_property
    def kept_rhs_image(self) -> AttributedGraph:
        """Image of R ⊓ K."""
        return self.image(self.rule.rhs_meet_interface)

    @cached_property
    def lifted(self) -> LiftedMatching:
        return lift_matching(self)

    @property
    def rhs_image(self) -> AttributedGraph:
        """RImg, the lifted image of R."""
        return self.lifted.graph

    @cached_property
    def deleted(self) -> tuple[frozenset, frozenset, dict]:
        """Images of the L minus K nodes, arrows and attributes."""
        r, f = self.rule, self.items
        L, K = r.lhs, r.interface
        nodes = frozenset(f[n] for n in L.nodes - K.nodes)
        arrows = frozenset(f[a] for a in L.arrows - K.arrows)
        attrs = {}
        for x, s in L.attrs.items():
            gone = s - K.attr(x)
            if gone:
                attrs[f[x]] = self.values(gone)
        return nodes, arrows, attrs

    @cached_property
    def recovered(self) -> dict:
        """Images of the R minus K attributes on items of the host."""
        r, f = self.rule, self.items
        out = {}
        for x, s in r.rhs.attrs.items():
            if x in f:
                added = s - r.interface.attr(x)
                if added:
                    out[f[x]] = self.values(added)
        return out

    def transport(self, host: AttributedGraph) -> "Matching":
        """The same matching composed with the canonical injection into ``host``."""
        return Matching(self.rule, host, self.items, self.assignment)


def is_consistent(m: Matching) -> bool:
    """Deleted attribute images never meet kept attribute images on K items."""
    L, K = m.rule.lhs, m.rule.interface
    for x in K.items:
        kept = K.attr(x)
        gone = L.attr(x) - kept
        if gone and kept and m.values(gone) & m.values(kept):
            return False
    return True


def check_matching(m: Matching) -> list[str]:
    """Re-check every matching invariant independently of the search."""
    errors = []
    if not m.morphism.is_injective():
        errors.append("item map is not injective")
    for v in m.rule.variables:
        if v not in m.assignment:
            errors.append(f"variable {v.name!r} is unassigned")
        elif m.assignment[v].sort != v.sort or not m.host.algebra.contains(m.assignment[v]):
            errors.append(f"variable {v.name!r} is assigned outside its carrier")
    if errors:
        return errors
    errors.extend(m.morphism.check())
    if not errors and not is_consistent(m):
        errors.append("matching is not consistent")
    return errors


def lift_matching(m: Matching) -> LiftedMatching:
    r = m.rule
    R, K = r.rhs, r.interface
    lift = {x: (m.items[x] if x in K.nodes or x in K.arrows else Derived(x, m.id))
            for x in R.items}
    arrows = frozenset(lift[a] for a in R.arrows)
    graph = AttributedGraph(
        m.host.algebra,
        frozenset(lift[n] for n in R.nodes),
        arrows,
        {lift[a]: lift[R.src[a]] for a in R.arrows},
        {lift[a]: lift[R.tgt[a]] for a in R.arrows},
        {lift[x]: m.values(s) for x, s in R.attrs.items()},
    )
    return LiftedMatching(graph, lift)


class _Plan:
    """Search order for the items of L: arrows follow already-placed endpoints."""

    def __init__(self, L: AttributedGraph):
        self.steps: list[tuple[str, ItemId]] = []
        placed: set = set()
        pending = sorted(L.arrows, key=item_key)
        for n in sorted(L.nodes, key=item_key):
            if n in placed:
                continue
            self.steps.append(("node", n))
            placed.add(n)
            progress = True
            while progress:
                progress = False
                for a in list(pending):
                    if L.src[a] in placed or L.tgt[a] in placed:
                        self.steps.append(("arrow", a))
                        placed.update((L.src[a], L.tgt[a]))
                        pending.remove(a)
                        progress = True


def find_matchings(r: Rule, G: AttributedGraph) -> list[Matching]:
    """All consistent matchings of ``r`` in ``G``, sorted by id."""
    L = r.lhs
    alg = G.algebra
    ground: dict = {}
    bare: dict = {}
    compound: list = []
    for x in L.items:
        g, b = [], []
        for t in L.attr(x):
            vs = vars_of(t)
            if not vs:
                g.append(t)
            elif isinstance(t, Var):
                b.append(t)
            else:
                compound.append((x, t, vs))
        try:
            ground[x] = frozenset(evaluate(t, alg, {}) for t in g)
        except EvaluationError:
            return []
        bare[x] = b
    seeded = {v for b in bare.values() for v in b}
    for v in r.variables:
        if v not in seeded and alg.carrier(v.sort) is None:
            raise UnsupportedMatching(
                f"rule {r.name!r}: variable {v.name!r} only occurs inside compound terms "
                f"and its sort {v.sort!r} has an infinite carrier")

    out_arrows: dict = {}
    in_arrows: dict = {}
    for a in G.arrows:
        out_arrows.setdefault(G.src[a], []).append(a)
        in_arrows.setdefault(G.tgt[a], []).append(a)
    plan = _Plan(L).steps
    f: dict = {}
    used: set = set()
    results: list[Matching] = []

    def fits(x, y) -> bool:
        return ground[x] <= G.attr(y)

    def bind_node(n, y) -> bool:
        if n in f:
            return f[n] == y
        if y in used or not fits(n, y):
            return False
        f[n] = y
        used.add(y)
        return True

    def items_step(i: int):
        if i == len(plan):
            assign_vars()
            return
        kind, x = plan[i]
        if kind == "node":
            for y in sorted(G.nodes, key=item_key):
                if y not in used and fits(x, y):
                    f[x] = y
                    used.add(y)
                    items_step(i + 1)
                    del f[x]
                    used.discard(y)
            return
        s, t = L.src[x], L.tgt[x]
        cands = out_arrows.get(f[s], ()) if s in f else in_arrows.get(f[t], ())
        for b in cands:
            if b in used or not fits(x, b):
                continue
            newly = [n for n in dict.fromkeys((s, t)) if n not in f]
            if not (bind_node(s, G.src[b]) and bind_node(t, G.tgt[b])):
                for n in newly:
                    if n in f:
                        used.discard(f.pop(n))
                continue
            f[x] = b
            used.add(b)
            items_step(i + 1)
            del f[x]
            used.discard(b)
            for n in newly:
                used.discard(f.pop(n))

    def assign_vars():
        domains = {}
        for v in r.variables:
            dom = None
            for x, b in bare.items():
                if v in b:
                    here = frozenset(val for val in G.attr(f[x]) if val.sort == v.sort)
                    dom = here if dom is None else dom & here
            if dom is None:
                dom = alg.carrier(v.sort)
            if not dom:
                return
            domains[v] = sorted(dom, key=value_key)
        order = sorted(r.variables, key=lambda v: (len(domains[v]), v.name))
        # check each compound term as soon as its last variable is bound
        checks_at: dict = {}
        position = {v: i for i, v in enumerate(order)}
        for x, t, vs in compound:
            last = max(position[v] for v in vs)
            checks_at.setdefault(last, []).append((x, t))
        asg: dict = {}

        def step(i: int):
            if i == len(order):
                m = Matching(r, G, dict(f), dict(asg))
                if is_consistent(m):
                    results.append(m)
                return
            v = order[i]
            for val in domains[v]:
                asg[v] = val
                ok = True
                for x, t in checks_at.get(i, ()):
                    try:
                        if evaluate(t, alg, asg) not in G.attr(f[x]):
                            ok = False
                            break
                    except EvaluationError:
                        ok = False
                        break
                if ok:
                    step(i + 1)
            asg.pop(v, None)

        step(0)

    items_step(0)
    results.sort(key=lambda m: m.id)
    return results
