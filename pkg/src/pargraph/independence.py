"""Decision procedures relating parallel and sequential rewriting.

All checks work on a finite :class:`~pargraph.rewrite.MatchSet`. Pairwise
properties quantify over ordered pairs; parallel independence skips pairs
of a matching with itself, regularity and coherence do not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any

from .graph import Derived, is_disjoint, join, meet, rename_items, subgraph_violation
from .rewrite import MatchSet, deletion_spec, edp_violations, parallel_apply, sequential_step

__all__ = [
    "BoundExceeded",
    "LatticeViolation",
    "InternalInconsistency",
    "PairWitness",
    "PropertyReport",
    "SubsetWitness",
    "Verdict",
    "PROPERTIES",
    "effective_deletion",
    "parallel_coherent",
    "parallel_independent",
    "property_report",
    "regular",
    "regular_definitional",
    "regular_pairwise",
    "sequential_independent",
]

PROPERTIES = ("parindep", "seqindep", "regular", "coherent", "edp")

DEFAULT_SEQ_BOUND = 6


class BoundExceeded(ValueError):
    """The subset enumeration of sequential independence would be too large."""


class InternalInconsistency(RuntimeError):
    """Two algorithms for the same property disagree."""


class LatticeViolation(RuntimeError):
    """A report contradicts one of the known implications between properties."""


@dataclass(frozen=True)
class PairWitness:
    mu: str
    nu: str
    item: Any
    reason: str

    def __str__(self):
        where = "" if self.item is None else f" at {self.item}"
        return f"mu={self.mu} nu={self.nu}{where}: {self.reason}"


@dataclass(frozen=True)
class SubsetWitness:
    subset: tuple[str, ...]
    mu: str
    reason: str

    def __str__(self):
        return f"N={{{', '.join(self.subset)}}} mu={self.mu}: {self.reason}"


@dataclass(frozen=True)
class Verdict:
    """A boolean answer with the evidence for a negative one."""

    holds: bool
    witness: Any = None

    def __bool__(self) -> bool:
        return self.holds


def _pairwise(M: MatchSet, condition, distinct: bool) -> Verdict:
    for mu in M:
        for nu in M:
            if distinct and mu is nu:
                continue
            left, right = condition(mu, nu)
            bad = subgraph_violation(left, right)
            if bad is not None:
                return Verdict(False, PairWitness(mu.id, nu.id, bad[0], bad[1]))
    return Verdict(True)


def parallel_independent(M: MatchSet) -> Verdict:
    """(nu(L) ⊔ nu^(R)) ⊓ mu(L) is within mu(K) ⊔ mu^(R) for all mu != nu."""
    return _pairwise(
        M,
        lambda mu, nu: (meet(join(nu.lhs_image, nu.rhs_image), mu.lhs_image),
                        join(mu.interface_image, mu.rhs_image)),
        distinct=True,
    )


def sequential_independent(M: MatchSet, bound: int = DEFAULT_SEQ_BOUND) -> Verdict:
    """Check the swapping property for every subset N and every mu outside it.

    Exponential in ``len(M)``; refuses sets larger than ``bound``.
    """
    ms = M.matchings
    if len(ms) > bound:
        raise BoundExceeded(f"{len(ms)} matchings exceed the bound {bound}")
    results: dict = {}

    def ipgr(sub: tuple) -> Any:
        if sub not in results:
            results[sub] = parallel_apply(M.subset(ms[i] for i in sub))
        return results[sub]

    n = len(ms)
    for size in range(n):
        for N in combinations(range(n), size):
            H = ipgr(N)
            for i in range(n):
                if i in N:
                    continue
                mu = ms[i]
                witness_subset = tuple(ms[k].id for k in N)
                bad = subgraph_violation(mu.lhs_image, H)
                if bad is not None:
                    return Verdict(False, SubsetWitness(
                        witness_subset, mu.id, f"mu(L) is not a subgraph of the result of N ({bad[1]})"))
                moved = mu.transport(H)
                expected = sequential_step(moved)
                both = ipgr(tuple(sorted(N + (i,))))
                # alpha renames the items created by mu to those created by the transported matching
                if moved.id != mu.id:
                    alpha = {x: Derived(x.origin, moved.id) for x in both.items
                             if isinstance(x, Derived) and x.matching == mu.id}
                    both = rename_items(both, alpha)
                if both != expected:
                    return Verdict(False, SubsetWitness(
                        witness_subset, mu.id,
                        "applying mu after N differs from applying N and mu in parallel"))
    return Verdict(True)


def regular_definitional(M: MatchSet) -> Verdict:
    """The parallel result is disjoint from everything scheduled for deletion."""
    spec = deletion_spec(M)
    result = parallel_apply(M)
    if is_disjoint(result, spec.nodes, spec.arrows, spec.attrs):
        return Verdict(True)
    bad = [("node", n) for n in result.nodes & spec.nodes]
    bad += [("arrow", a) for a in result.arrows & spec.arrows]
    bad += [("attr", x, result.attr(x) & s) for x, s in spec.attrs.items() if result.attr(x) & s]
    return Verdict(False, sorted(bad, key=str))


def regular_pairwise(M: MatchSet) -> Verdict:
    return _pairwise(
        M,
        lambda mu, nu: (meet(nu.rhs_image, mu.lhs_image), mu.interface_image),
        distinct=False,
    )


def regular(M: MatchSet) -> Verdict:
    """Both regularity algorithms; they must agree."""
    by_definition = regular_definitional(M)
    by_pairs = regular_pairwise(M)
    if by_definition.holds != by_pairs.holds:
        raise InternalInconsistency(
            f"regularity: definition says {by_definition.holds}, pairwise check says {by_pairs.holds}")
    return by_pairs if not by_pairs.holds else by_definition


def parallel_coherent(M: MatchSet) -> Verdict:
    """nu(R ⊓ K) ⊓ mu(L) is within mu(K) for all mu, nu."""
    return _pairwise(
        M,
        lambda mu, nu: (meet(nu.kept_rhs_image, mu.lhs_image), mu.interface_image),
        distinct=False,
    )


def effective_deletion(M: MatchSet) -> Verdict:
    bad = edp_violations(M)
    return Verdict(not bad, bad or None)


@dataclass
class PropertyReport:
    parallel_independent: bool
    sequential_independent: bool | None
    regular: bool
    regular_pairwise: bool
    parallel_coherent: bool
    effective_deletion: bool
    witnesses: dict = field(default_factory=dict)

    def flags(self) -> dict[str, bool | None]:
        return {
            "parindep": self.parallel_independent,
            "seqindep": self.sequential_independent,
            "regular": self.regular,
            "coherent": self.parallel_coherent,
            "edp": self.effective_deletion,
        }

    def as_dict(self) -> dict:
        out: dict = dict(self.flags())
        out["regular_pairwise"] = self.regular_pairwise
        out["witnesses"] = {k: _plain(w) for k, w in self.witnesses.items()}
        return out


def _plain(w):
    if isinstance(w, (PairWitness, SubsetWitness)):
        return {k: (str(v) if k == "item" and v is not None else v) for k, v in vars(w).items()}
    if isinstance(w, list):
        return [[str(p) if not isinstance(p, frozenset) else sorted(map(str, p)) for p in v] for v in w]
    return w


def property_report(M: MatchSet, seq_bound: int = DEFAULT_SEQ_BOUND, check_theory: bool = True) -> PropertyReport:
    """Every property of ``M`` with witnesses.

    With ``check_theory`` the known implications are asserted and a
    contradiction raises :class:`LatticeViolation`; sequential independence is
    left as None when ``M`` exceeds ``seq_bound``.
    """
    pi = parallel_independent(M)
    si = sequential_independent(M, seq_bound) if len(M) <= seq_bound else None
    reg_def = regular_definitional(M)
    reg_pair = regular_pairwise(M)
    coh = parallel_coherent(M)
    edp = effective_deletion(M)
    witnesses = {}
    for name, v in (("parindep", pi), ("seqindep", si), ("regular", reg_pair), ("coherent", coh), ("edp", edp)):
        if v is not None and not v.holds:
            witnesses[name] = v.witness
    report = PropertyReport(pi.holds, None if si is None else si.holds, reg_def.holds, reg_pair.holds,
                            coh.holds, edp.holds, witnesses)
    if check_theory:
        _check_theory(M, report, seq_bound)
    return report


def _check_theory(M: MatchSet, rep: PropertyReport, seq_bound: int) -> None:
    problems = []
    if rep.regular != rep.regular_pairwise:
        problems.append("definitional and pairwise regularity disagree")
    if rep.sequential_independent is not None and rep.sequential_independent != rep.parallel_independent:
        problems.append("parallel and sequential independence disagree")
    if rep.regular and not rep.parallel_coherent:
        problems.append("regular but not parallel coherent")
    if rep.parallel_coherent and not rep.effective_deletion:
        problems.append("parallel coherent but without effective deletion")
    if rep.parallel_independent and not rep.effective_deletion:
        problems.append("parallel independent but without effective deletion")
    if rep.regular and len(M) <= seq_bound:
        ms = M.matchings
        for size in range(len(ms)):
            for sub in combinations(ms, size):
                if not regular_definitional(M.subset(sub)).holds:
                    problems.append(f"regular but subset {[m.id for m in sub]} is not")
    if problems:
        raise LatticeViolation("; ".join(problems))
