"""Attributed graphs with set-valued attributes and their lattice operations.

Every vertex and arrow carries a finite *set* of attribute values. Two
graphs that agree on their overlap are joinable; their meet and join are
computed componentwise, which is what makes simultaneous rule application
a plain union.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Union

from .sigma import Algebra, EvaluationError, TermAlgebra, Value, evaluate

__all__ = [
    "AttributedGraph",
    "Derived",
    "GraphError",
    "GraphMorphism",
    "ItemId",
    "NotJoinable",
    "delete_disjoint",
    "is_disjoint",
    "image",
    "is_subgraph",
    "isomorphic",
    "item_key",
    "join",
    "join_conflict",
    "join_family",
    "joinable",
    "meet",
    "rename_items",
    "subgraph_violation",
]


class GraphError(ValueError):
    """A graph violates its structural invariants."""


class NotJoinable(GraphError):
    """Meet or join was requested on graphs that are not joinable."""


@dataclass(frozen=True)
class Derived:
    """An item created by a rule application: the rule item tagged with the matching."""

    origin: "ItemId"
    matching: str

    def __str__(self) -> str:
        return f"<{self.origin}@{self.matching}>"


ItemId = Union[str, Derived]


def item_key(x: ItemId) -> tuple:
    """Total order on item ids: plain ids first, then derived ids by origin and matching."""
    if isinstance(x, Derived):
        return (1, item_key(x.origin), x.matching)
    return (0, x, "")


Attribution = Mapping[ItemId, frozenset]

_EMPTY: frozenset = frozenset()


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """A directed multigraph over ``algebra`` whose items carry attribute sets.

    ``attrs`` is stored without empty entries, so two equal graphs have equal
    dictionaries; use :meth:`attr` to read the (possibly empty) set of an item.
    """

    algebra: Union[Algebra, TermAlgebra]
    nodes: frozenset = frozenset()
    arrows: frozenset = frozenset()
    src: Mapping[ItemId, ItemId] = field(default_factory=dict)
    tgt: Mapping[ItemId, ItemId] = field(default_factory=dict)
    attrs: Mapping[ItemId, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        nodes = frozenset(self.nodes)
        arrows = frozenset(self.arrows)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "arrows", arrows)
        object.__setattr__(self, "src", dict(self.src))
        object.__setattr__(self, "tgt", dict(self.tgt))
        object.__setattr__(self, "attrs", {x: frozenset(s) for x, s in self.attrs.items() if s})
        if nodes & arrows:
            raise GraphError(f"items are both nodes and arrows: {sorted(map(str, nodes & arrows))}")
        for name, fn in (("source", self.src), ("target", self.tgt)):
            if fn.keys() != arrows:
                raise GraphError(f"{name} map must be defined exactly on the arrows")
            for a, n in fn.items():
                if n not in nodes:
                    raise GraphError(f"{name} of arrow {a} is {n}, which is not a node")
        for x in self.attrs:
            if x not in nodes and x not in arrows:
                raise GraphError(f"attribute given for unknown item {x}")

    @classmethod
    def build(cls, algebra, nodes: Mapping | Iterable = (), arrows: Mapping | None = None) -> "AttributedGraph":
        """Shorthand: ``nodes`` maps names to attribute iterables (or is a plain
        iterable of names), ``arrows`` maps names to ``(src, tgt[, attrs])``."""
        if not isinstance(nodes, Mapping):
            nodes = {n: () for n in nodes}
        attrs = {n: frozenset(s) for n, s in nodes.items()}
        src, tgt = {}, {}
        for a, spec in (arrows or {}).items():
            src[a], tgt[a] = spec[0], spec[1]
            if len(spec) > 2:
                attrs[a] = frozenset(spec[2])
        return cls(algebra, frozenset(nodes), frozenset(src), src, tgt, attrs)

    @property
    def items(self) -> frozenset:
        return self.nodes | self.arrows

    def attr(self, x: ItemId) -> frozenset:
        return self.attrs.get(x, _EMPTY)

    def is_unlabeled(self) -> bool:
        return not self.attrs

    def check_values(self) -> list[str]:
        """Attribute values that fall outside the algebra's carrier."""
        return [f"attribute {v!r} of {x} is not in the carrier of {self.algebra!r}"
                for x, s in self.attrs.items() for v in s if not self.algebra.contains(v)]

    def __eq__(self, other: Any) -> bool:
        if self is other:
            return True
        if not isinstance(other, AttributedGraph):
            return NotImplemented
        return (self.nodes == other.nodes and self.arrows == other.arrows
                and self.src == other.src and self.tgt == other.tgt
                and self.attrs == other.attrs and self.algebra == other.algebra)

    def __hash__(self) -> int:
        return hash((self.nodes, self.arrows))

    def __repr__(self) -> str:
        parts = []
        for n in sorted(self.nodes, key=item_key):
            parts.append(_fmt_item(n, self.attr(n)))
        for a in sorted(self.arrows, key=item_key):
            parts.append(f"{_fmt_item(a, self.attr(a))}:{self.src[a]}->{self.tgt[a]}")
        return "Graph(" + "  ".join(parts) + ")"


def _fmt_item(x, s) -> str:
    if not s:
        return str(x)
    vals = sorted(s, key=lambda v: (str(type(v)), str(v)))
    return f"{x}|{','.join(map(str, vals))}"


def _same_algebra(a, b) -> bool:
    return a is b or a == b


def subgraph_violation(H: AttributedGraph, G: AttributedGraph) -> tuple[ItemId | None, str] | None:
    """First reason why ``H`` is not a subgraph of ``G``, or None."""
    if not _same_algebra(H.algebra, G.algebra):
        return None, "algebras differ"
    for n in sorted(H.nodes - G.nodes, key=item_key):
        return n, "node missing"
    for a in sorted(H.arrows - G.arrows, key=item_key):
        return a, "arrow missing"
    for a in H.arrows:
        if H.src[a] != G.src[a] or H.tgt[a] != G.tgt[a]:
            return a, "arrow has different endpoints"
    for x in sorted(H.attrs, key=item_key):
        extra = H.attrs[x] - G.attr(x)
        if extra:
            return x, "attributes not contained: " + ", ".join(sorted(map(str, extra)))
    return None


def is_subgraph(H: AttributedGraph, G: AttributedGraph) -> bool:
    if not _same_algebra(H.algebra, G.algebra):
        return False
    if not (H.nodes <= G.nodes and H.arrows <= G.arrows):
        return False
    gsrc, gtgt = G.src, G.tgt
    for a in H.arrows:
        if H.src[a] != gsrc[a] or H.tgt[a] != gtgt[a]:
            return False
    gattrs = G.attrs
    for x, s in H.attrs.items():
        if not s <= gattrs.get(x, _EMPTY):
            return False
    return True


def join_conflict(H: AttributedGraph, G: AttributedGraph) -> str | None:
    """Name the first violated joinability clause, or None if joinable."""
    if not _same_algebra(H.algebra, G.algebra):
        return "algebras differ"
    clash = (H.nodes & G.arrows) | (H.arrows & G.nodes)
    if clash:
        x = min(clash, key=item_key)
        return f"{x} is a node in one graph and an arrow in the other"
    for a in sorted(H.arrows & G.arrows, key=item_key):
        if H.src[a] != G.src[a]:
            return f"sources of arrow {a} differ"
        if H.tgt[a] != G.tgt[a]:
            return f"targets of arrow {a} differ"
    return None


def joinable(H: AttributedGraph, G: AttributedGraph) -> bool:
    return join_conflict(H, G) is None


def _require_joinable(H, G):
    problem = join_conflict(H, G)
    if problem is not None:
        raise NotJoinable(problem)


def meet(H: AttributedGraph, G: AttributedGraph) -> AttributedGraph:
    _require_joinable(H, G)
    nodes = H.nodes & G.nodes
    arrows = H.arrows & G.arrows
    attrs = {}
    for x, s in H.attrs.items():
        t = G.attrs.get(x)
        if t:
            common = s & t
            if common:
                attrs[x] = common
    return AttributedGraph(H.algebra, nodes, arrows,
                           {a: H.src[a] for a in arrows}, {a: H.tgt[a] for a in arrows}, attrs)


def join(H: AttributedGraph, G: AttributedGraph) -> AttributedGraph:
    _require_joinable(H, G)
    return join_family([H, G], H.algebra)


def join_family(graphs: Iterable[AttributedGraph], fallback_algebra=None) -> AttributedGraph:
    """Union of pairwise joinable graphs; the empty family yields the empty graph."""
    graphs = list(graphs)
    if not graphs:
        if fallback_algebra is None:
            raise ValueError("the union of an empty family needs an algebra")
        return AttributedGraph(fallback_algebra)
    algebra = graphs[0].algebra
    nodes: set = set()
    arrows: set = set()
    src: dict = {}
    tgt: dict = {}
    attrs: dict = {}
    for g in graphs:
        if not _same_algebra(g.algebra, algebra):
            raise NotJoinable("algebras differ")
        nodes |= g.nodes
        arrows |= g.arrows
        for a in g.arrows:
            s, t = g.src[a], g.tgt[a]
            if src.setdefault(a, s) != s:
                raise NotJoinable(f"sources of arrow {a} differ")
            if tgt.setdefault(a, t) != t:
                raise NotJoinable(f"targets of arrow {a} differ")
        for x, s in g.attrs.items():
            prev = attrs.get(x)
            attrs[x] = s if prev is None else prev | s
    clash = nodes & arrows
    if clash:
        x = min(clash, key=item_key)
        raise NotJoinable(f"{x} is a node in one graph and an arrow in another")
    return AttributedGraph(algebra, nodes, arrows, src, tgt, attrs)


def is_disjoint(G: AttributedGraph, V: Iterable, A: Iterable, l: Attribution) -> bool:
    V, A = set(V), set(A)
    if G.nodes & V or G.arrows & A:
        return False
    return all(not (s & l.get(x, _EMPTY)) for x, s in G.attrs.items())


def delete_disjoint(G: AttributedGraph, V: Iterable, A: Iterable, l: Attribution) -> AttributedGraph:
    """The largest subgraph of ``G`` disjoint from ``V``, ``A`` and ``l``.

    Arrows whose source or target is removed go as well; there is no gluing
    condition.
    """
    nodes = G.nodes - frozenset(V)
    arrows = frozenset(a for a in G.arrows - frozenset(A)
                       if G.src[a] in nodes and G.tgt[a] in nodes)
    attrs = {}
    for x, s in G.attrs.items():
        if x in nodes or x in arrows:
            kept = s - l.get(x, _EMPTY)
            if kept:
                attrs[x] = kept
    return AttributedGraph(G.algebra, nodes, arrows,
                           {a: G.src[a] for a in arrows}, {a: G.tgt[a] for a in arrows}, attrs)


@dataclass(frozen=True, eq=False)
class GraphMorphism:
    """Item map plus attribute homomorphism from ``source`` to ``target``.

    With ``assignment`` None the attribute part is the identity (both graphs
    share an algebra). Otherwise ``source`` is attributed by terms and the
    attribute part evaluates them in the target algebra under ``assignment``.
    """

    source: AttributedGraph
    target: AttributedGraph
    items: Mapping[ItemId, ItemId]
    assignment: Mapping | None = None

    def __post_init__(self):
        if self.assignment is None:
            if not _same_algebra(self.source.algebra, self.target.algebra):
                raise GraphError("identity attribute map between different algebras")
        elif not (self.source.algebra.is_term_algebra and not self.target.algebra.is_term_algebra):
            raise GraphError("unsupported morphism: only term-algebra to algebra assignments")

    def attr(self, v) -> Value:
        if self.assignment is None:
            return v
        return evaluate(v, self.target.algebra, self.assignment)

    def attrs(self, values: Iterable) -> frozenset:
        if self.assignment is None:
            return frozenset(values)
        alg, asg = self.target.algebra, self.assignment
        return frozenset(evaluate(v, alg, asg) for v in values)

    def check(self) -> list[str]:
        """Morphism laws, in the order they are checked."""
        H, G, f = self.source, self.target, self.items
        errors = []
        for x in sorted(H.items, key=item_key):
            if x not in f:
                errors.append(f"{x} is not mapped")
        if errors:
            return errors
        for n in H.nodes:
            if f[n] not in G.nodes:
                errors.append(f"node {n} is mapped to {f[n]}, which is not a node")
        for a in H.arrows:
            if f[a] not in G.arrows:
                errors.append(f"arrow {a} is mapped to {f[a]}, which is not an arrow")
            elif G.src[f[a]] != f[H.src[a]] or G.tgt[f[a]] != f[H.tgt[a]]:
                errors.append(f"arrow {a} does not commute with source/target")
        for x in sorted(H.items, key=item_key):
            try:
                imgs = self.attrs(H.attr(x))
            except EvaluationError as exc:
                errors.append(f"attributes of {x}: {exc}")
                continue
            if not imgs <= G.attr(f[x]):
                errors.append(f"attributes of {x} are not contained in those of {f[x]}")
        return errors

    def is_injective(self) -> bool:
        return len(set(self.items.values())) == len(self.items)


def image(m: GraphMorphism, F: AttributedGraph) -> AttributedGraph:
    """The smallest subgraph of the target through which ``m`` restricted to ``F`` factors."""
    dom = m.source
    if not is_subgraph(F, dom):
        raise GraphError("image of a graph that is not a subgraph of the morphism's domain")
    f = m.items
    nodes = frozenset(f[n] for n in F.nodes)
    arrows = frozenset(f[a] for a in F.arrows)
    tsrc, ttgt = m.target.src, m.target.tgt
    attrs: dict = defaultdict(frozenset)
    for x, s in F.attrs.items():
        attrs[f[x]] = attrs[f[x]] | m.attrs(s)
    return AttributedGraph(m.target.algebra, nodes, arrows,
                           {a: tsrc[a] for a in arrows}, {a: ttgt[a] for a in arrows}, attrs)


def rename_items(G: AttributedGraph, mapping: Mapping[ItemId, ItemId]) -> AttributedGraph:
    """Apply an injective renaming to the items of ``G`` (unmapped items keep their id)."""
    f = lambda x: mapping.get(x, x)  # noqa: E731
    return AttributedGraph(
        G.algebra,
        frozenset(map(f, G.nodes)),
        frozenset(map(f, G.arrows)),
        {f(a): f(n) for a, n in G.src.items()},
        {f(a): f(n) for a, n in G.tgt.items()},
        {f(x): s for x, s in G.attrs.items()},
    )


def _node_profile(G: AttributedGraph) -> dict:
    out_deg: dict = defaultdict(int)
    in_deg: dict = defaultdict(int)
    loops: dict = defaultdict(int)
    for a in G.arrows:
        s, t = G.src[a], G.tgt[a]
        out_deg[s] += 1
        in_deg[t] += 1
        if s == t:
            loops[s] += 1
    return {n: (G.attr(n), out_deg[n], in_deg[n], loops[n]) for n in G.nodes}


def _arrow_groups(G: AttributedGraph, f: Mapping | None = None) -> dict:
    groups: dict = defaultdict(list)
    for a in G.arrows:
        s, t = G.src[a], G.tgt[a]
        if f is not None:
            s, t = f[s], f[t]
        groups[(s, t, G.attr(a))].append(a)
    return groups


def isomorphic(G: AttributedGraph, H: AttributedGraph) -> dict | None:
    """A witness bijection ``G -> H`` preserving structure and attribute sets, or None.

    The attribute part of the isomorphism is fixed to the identity, so both
    graphs must share their algebra.
    """
    if not _same_algebra(G.algebra, H.algebra):
        return None
    if len(G.nodes) != len(H.nodes) or len(G.arrows) != len(H.arrows):
        return None
    pg, ph = _node_profile(G), _node_profile(H)
    by_profile: dict = defaultdict(list)
    for n, p in ph.items():
        by_profile[p].append(n)
    if Counter(pg.values()) != Counter(ph.values()):
        return None

    # most constrained nodes first
    order = sorted(G.nodes, key=lambda n: (len(by_profile[pg[n]]), item_key(n)))
    g_adj: dict = defaultdict(lambda: defaultdict(int))
    h_adj: dict = defaultdict(lambda: defaultdict(int))
    for a in G.arrows:
        g_adj[G.src[a]][(G.tgt[a], G.attr(a))] += 1
    for a in H.arrows:
        h_adj[H.src[a]][(H.tgt[a], H.attr(a))] += 1

    f: dict = {}
    used: set = set()

    def consistent(n, m) -> bool:
        # arrows between n and already-mapped nodes must correspond
        for (t, lab), k in g_adj[n].items():
            if t in f or t == n:
                tm = m if t == n else f[t]
                if h_adj[m].get((tm, lab), 0) != k:
                    return False
        for s in f:
            for (t, lab), k in g_adj[s].items():
                if t == n and h_adj[f[s]].get((m, lab), 0) != k:
                    return False
        return True

    def search(i: int) -> bool:
        if i == len(order):
            return True
        n = order[i]
        for m in by_profile[pg[n]]:
            if m in used or not consistent(n, m):
                continue
            f[n] = m
            used.add(m)
            if search(i + 1):
                return True
            del f[n]
            used.discard(m)
        return False

    if not search(0):
        return None
    gg, hg = _arrow_groups(G, f), _arrow_groups(H)
    if {k: len(v) for k, v in gg.items()} != {k: len(v) for k, v in hg.items()}:
        return None
    for key, arrows in gg.items():
        for a, b in zip(sorted(arrows, key=item_key), sorted(hg[key], key=item_key)):
            f[a] = b
    return f


def iter_items_sorted(G: AttributedGraph) -> Iterator[ItemId]:
    yield from sorted(G.nodes, key=item_key)
    yield from sorted(G.arrows, key=item_key)
