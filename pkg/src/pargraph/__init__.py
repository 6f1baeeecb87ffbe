"""Parallel rewriting of attributed graphs with set-valued attributes."""

from .graph import (
    AttributedGraph,
    Derived,
    GraphError,
    GraphMorphism,
    NotJoinable,
    delete_disjoint,
    image,
    is_subgraph,
    isomorphic,
    join,
    join_family,
    joinable,
    meet,
)
from .independence import (
    BoundExceeded,
    LatticeViolation,
    PropertyReport,
    effective_deletion,
    parallel_coherent,
    parallel_independent,
    property_report,
    regular,
    sequential_independent,
)
from .rewrite import (
    EffectiveDeletionViolation,
    MatchSet,
    apply_in_order,
    deletion_spec,
    full_parallel_step,
    parallel_apply,
    recovered_attribution,
    sequential_step,
)
from .rules import Matching, Rule, RuleError, UnsupportedMatching, find_matchings, is_consistent, lift_matching, validate_rule
from .sigma import Algebra, App, Lit, OpDecl, Signature, SortError, TermAlgebra, Value, Var, evaluate, validate_term, vars_of
from .syntax import Diagnostic, Document, ParseError, format_document, format_graph, parse_document, serialize_graph

__version__ = "0.1.0"
