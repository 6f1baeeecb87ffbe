"""The parallel step and the rewriting relations built on it."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .graph import AttributedGraph, delete_disjoint, is_subgraph, item_key, join_family
from .rules import Matching, Rule, find_matchings

__all__ = [
    "DeletionSpec",
    "EffectiveDeletionViolation",
    "MatchSet",
    "apply_in_order",
    "deletion_spec",
    "edp_violations",
    "full_parallel_step",
    "parallel_apply",
    "recovered_attribution",
    "sequential_step",
]


def _union_attrs(parts: Iterable[dict]) -> dict:
    out: dict = {}
    for part in parts:
        for x, s in part.items():
            prev = out.get(x)
            out[x] = s if prev is None else prev | s
    return out


@dataclass(frozen=True)
class MatchSet:
    """A finite set of matchings in one host graph, kept sorted by id."""

    host: AttributedGraph
    matchings: tuple[Matching, ...] = ()
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        ms = tuple(sorted(self.matchings, key=lambda m: m.id))
        ids = [m.id for m in ms]
        if len(set(ids)) != len(ids):
            raise ValueError("matching ids must be distinct")
        for m in ms:
            if m.host is not self.host and m.host != self.host:
                raise ValueError(f"matching {m.id} targets a different host")
        object.__setattr__(self, "matchings", ms)

    @classmethod
    def all(cls, host: AttributedGraph, rules: Iterable[Rule]) -> "MatchSet":
        return cls(host, tuple(m for r in rules for m in find_matchings(r, host)))

    def __iter__(self) -> Iterator[Matching]:
        return iter(self.matchings)

    def __len__(self) -> int:
        return len(self.matchings)

    def __contains__(self, m) -> bool:
        return m in self.matchings

    def subset(self, ms: Iterable[Matching]) -> "MatchSet":
        return MatchSet(self.host, tuple(ms))

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(m.id for m in self.matchings)


@dataclass(frozen=True)
class DeletionSpec:
    nodes: frozenset
    arrows: frozenset
    attrs: dict

    def is_empty(self) -> bool:
        return not (self.nodes or self.arrows or self.attrs)


def deletion_spec(M: MatchSet) -> DeletionSpec:
    """Everything the matchings of ``M`` schedule for deletion."""
    nodes: set = set()
    arrows: set = set()
    for m in M:
        n, a, _ = m.deleted
        nodes |= n
        arrows |= a
    return DeletionSpec(frozenset(nodes), frozenset(arrows), _union_attrs(m.deleted[2] for m in M))


def recovered_attribution(M: MatchSet) -> dict:
    """Attributes that right-hand sides add (outside K) to items of the host."""
    return _union_attrs(m.recovered for m in M)


def parallel_apply(M: MatchSet) -> AttributedGraph:
    """Delete what every matching deletes, then join all lifted right-hand sides.

    Total: conflicts are not checked here (see :func:`edp_violations`).
    """
    key = ("ipgr", M.ids)
    cached = M._cache.get(key)
    if cached is not None:
        return cached
    spec = deletion_spec(M)
    base = delete_disjoint(M.host, spec.nodes, spec.arrows, spec.attrs)
    out = join_family([base, *(m.rhs_image for m in M)], M.host.algebra)
    M._cache[key] = out
    return out


def sequential_step(m: Matching) -> AttributedGraph:
    return parallel_apply(MatchSet(m.host, (m,)))


def apply_in_order(host: AttributedGraph, order: Sequence[Matching]) -> AttributedGraph | None:
    """Apply the matchings one at a time, each transported into the current graph.

    Returns None as soon as a matching's image of L is no longer a subgraph
    of the current graph.
    """
    current = host
    for m in order:
        if not is_subgraph(m.lhs_image, current):
            return None
        current = sequential_step(m.transport(current))
    return current


def edp_violations(M: MatchSet, result: AttributedGraph | None = None) -> list[tuple]:
    """Deleted items that survive in the parallel result, minus recovered attributes.

    Each entry is ``("node", x)``, ``("arrow", a)`` or ``("attr", x, values)``.
    """
    if result is None:
        result = parallel_apply(M)
    spec = deletion_spec(M)
    lifted = recovered_attribution(M)
    out: list[tuple] = []
    for n in sorted(result.nodes & spec.nodes, key=item_key):
        out.append(("node", n))
    for a in sorted(result.arrows & spec.arrows, key=item_key):
        out.append(("arrow", a))
    for x in sorted(result.attrs, key=item_key):
        gone = spec.attrs.get(x)
        if gone:
            bad = result.attrs[x] & (gone - lifted.get(x, frozenset()))
            if bad:
                out.append(("attr", x, bad))
    return out


class EffectiveDeletionViolation(Exception):
    """The full parallel step was refused: some deletion did not take effect."""

    def __init__(self, matchset: MatchSet, violations: list[tuple]):
        self.matchset = matchset
        self.violations = violations
        super().__init__("deletions survive: " + "; ".join(_fmt_violation(v) for v in violations))


def _fmt_violation(v: tuple) -> str:
    if v[0] == "attr":
        return f"attributes {', '.join(sorted(map(str, v[2])))} of {v[1]}"
    return f"{v[0]} {v[1]}"


def full_parallel_step(G: AttributedGraph, rules: Iterable[Rule]) -> AttributedGraph:
    """Apply all matchings of ``rules`` in ``G`` at once.

    Raises :class:`EffectiveDeletionViolation` when the set of all matchings
    lacks the effective deletion property.
    """
    M = MatchSet.all(G, rules)
    result = parallel_apply(M)
    bad = edp_violations(M, result)
    if bad:
        raise EffectiveDeletionViolation(M, bad)
    return result
