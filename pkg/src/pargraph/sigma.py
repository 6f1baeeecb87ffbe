"""Many-sorted signatures, terms, algebras and term evaluation.

Attribute values are sort-tagged (:class:`Value`), so carriers of distinct
sorts never collide. Rule graphs are attributed by terms over a
:class:`TermAlgebra`; host graphs by values of an :class:`Algebra`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Union

__all__ = [
    "BUILTIN_OPS",
    "Algebra",
    "App",
    "EvaluationError",
    "Lit",
    "OpDecl",
    "Signature",
    "SignatureError",
    "SortError",
    "Term",
    "TermAlgebra",
    "Value",
    "Var",
    "evaluate",
    "substitute",
    "term_sort",
    "validate_term",
    "value_key",
    "vars_of",
]


class SignatureError(ValueError):
    """A signature or algebra declaration is malformed."""


class SortError(ValueError):
    """A term is not well-sorted.

    ``errors`` holds ``(path, message)`` pairs; a path is the tuple of
    argument positions leading from the root to the offending subterm.
    """

    def __init__(self, errors: list[tuple[tuple[int, ...], str]]):
        self.errors = errors
        super().__init__("; ".join(f"at {_fmt_path(p)}: {m}" for p, m in errors))


class EvaluationError(ValueError):
    """Evaluation hit an unassigned variable or a gap in an operation table."""


def _fmt_path(path: tuple[int, ...]) -> str:
    return "root" if not path else "root." + ".".join(map(str, path))


@dataclass(frozen=True)
class Value:
    """A carrier element tagged with its sort."""

    sort: str
    val: Union[str, int]

    def __str__(self) -> str:
        return str(self.val)

    def __repr__(self) -> str:
        return f"{self.val}:{self.sort}"


def value_key(v: Value) -> tuple:
    # ints before names within a sort, ints numerically
    if isinstance(v.val, int):
        return (v.sort, 0, v.val, "")
    return (v.sort, 1, 0, v.val)


@dataclass(frozen=True)
class OpDecl:
    name: str
    args: tuple[str, ...]
    result: str


class Signature:
    """Sorts plus operation symbols; constants are zero-argument operations.

    Sorts listed in ``builtin`` are interpreted as the integers by every
    algebra over this signature.
    """

    def __init__(self, name: str, sorts: Iterable[str], ops: Iterable[OpDecl] = (),
                 builtin: Iterable[str] = ()):
        self.name = name
        self.sorts = frozenset(sorts)
        self.builtin = frozenset(builtin)
        self.ops: dict[str, OpDecl] = {}
        for op in ops:
            if op.name in self.ops:
                raise SignatureError(f"operation {op.name!r} declared twice")
            self.ops[op.name] = op
        errors = self.check()
        if errors:
            raise SignatureError("; ".join(errors))

    def check(self) -> list[str]:
        errors = [f"builtin sort {s!r} is not declared" for s in sorted(self.builtin - self.sorts)]
        for op in self.ops.values():
            for s in (*op.args, op.result):
                if s not in self.sorts:
                    errors.append(f"operation {op.name!r} uses undeclared sort {s!r}")
        return errors

    def _key(self):
        return (self.name, self.sorts, self.builtin,
                tuple(sorted((o.name, o.args, o.result) for o in self.ops.values())))

    def __eq__(self, other):
        return self is other or (isinstance(other, Signature) and self._key() == other._key())

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"Signature({self.name!r})"


@dataclass(frozen=True)
class Var:
    name: str
    sort: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    op: str
    args: tuple["Term", ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.op
        return f"{self.op}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Lit:
    """A literal carrier value used as a term (integer literals in rules)."""

    value: Value

    def __str__(self) -> str:
        return str(self.value)


Term = Union[Var, App, Lit]


def validate_term(t: Term, sig: Signature, variables: Iterable[Var]) -> str:
    """Return the sort of ``t``; raise :class:`SortError` listing every problem."""
    allowed = set(variables)
    errors: list[tuple[tuple[int, ...], str]] = []

    def walk(u: Term, path: tuple[int, ...]) -> str | None:
        if isinstance(u, Var):
            if u not in allowed:
                errors.append((path, f"unknown variable {u.name!r}"))
                return None
            return u.sort
        if isinstance(u, Lit):
            if u.value.sort not in sig.sorts:
                errors.append((path, f"literal {u} has unknown sort {u.value.sort!r}"))
                return None
            return u.value.sort
        decl = sig.ops.get(u.op)
        if decl is None:
            errors.append((path, f"unknown symbol {u.op!r}"))
            for i, a in enumerate(u.args):
                walk(a, path + (i,))
            return None
        if len(u.args) != len(decl.args):
            errors.append((path, f"{u.op!r} expects {len(decl.args)} argument(s), got {len(u.args)}"))
        for i, a in enumerate(u.args):
            got = walk(a, path + (i,))
            if got is not None and i < len(decl.args) and got != decl.args[i]:
                errors.append((path + (i,), f"sort mismatch: {u.op!r} expects {decl.args[i]!r}, got {got!r}"))
        return decl.result

    sort = walk(t, ())
    if errors:
        raise SortError(errors)
    assert sort is not None
    return sort


def term_sort(t: Term, sig: Signature) -> str:
    """Sort of an already validated term."""
    if isinstance(t, Var):
        return t.sort
    if isinstance(t, Lit):
        return t.value.sort
    return sig.ops[t.op].result


def vars_of(t: Term) -> frozenset[Var]:
    if isinstance(t, Var):
        return frozenset((t,))
    if isinstance(t, Lit):
        return frozenset()
    out: set[Var] = set()
    stack = list(t.args)
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            out.add(u)
        elif isinstance(u, App):
            stack.extend(u.args)
    return frozenset(out)


# Table-free interpretations available on builtin integer sorts.
BUILTIN_OPS: dict[str, tuple[int, Callable[..., int]]] = {
    "succ": (1, lambda a: a + 1),
    "pred": (1, lambda a: a - 1),
    "neg": (1, lambda a: -a),
    "add": (2, lambda a, b: a + b),
    "sub": (2, lambda a, b: a - b),
}


class Algebra:
    """A finite-table interpretation of a signature.

    ``carriers`` gives the value names of every non-builtin sort. ``tables``
    maps operation names to ``{argument tuple: result}`` dictionaries over
    :class:`Value`; ``builtins`` maps operation names on builtin sorts to a
    key of :data:`BUILTIN_OPS`. A constant that is not interpreted otherwise
    and whose name is a value of its own sort denotes that value.
    """

    is_term_algebra = False

    def __init__(self, name: str, signature: Signature,
                 carriers: Mapping[str, Iterable[Union[str, int]]],
                 tables: Mapping[str, Mapping[tuple, Union[str, int, Value]]] | None = None,
                 builtins: Mapping[str, str] | None = None):
        self.name = name
        self.signature = signature
        self.carriers: dict[str, frozenset[Value]] = {
            s: frozenset(Value(s, v) for v in vals) for s, vals in carriers.items()
        }
        self.builtins = dict(builtins or {})
        self.tables: dict[str, dict[tuple[Value, ...], Value]] = {}
        for op, table in (tables or {}).items():
            decl = signature.ops.get(op)
            if decl is None:
                raise SignatureError(f"algebra {name!r} interprets unknown operation {op!r}")
            self.tables[op] = {
                tuple(self._coerce(s, a) for s, a in zip(decl.args, args)): self._coerce(decl.result, r)
                for args, r in table.items()
            }
        for decl in signature.ops.values():
            if decl.name in self.tables or decl.name in self.builtins or decl.args:
                continue
            default = self._default_constant(decl)
            if default is not None:
                self.tables[decl.name] = {(): default}
        errors = self.check()
        if errors:
            raise SignatureError("; ".join(errors))

    @staticmethod
    def _coerce(sort: str, v) -> Value:
        return v if isinstance(v, Value) else Value(sort, v)

    def _default_constant(self, decl: OpDecl) -> Value | None:
        if decl.result in self.signature.builtin:
            try:
                return Value(decl.result, int(decl.name))
            except ValueError:
                return None
        candidate = Value(decl.result, decl.name)
        if candidate in self.carriers.get(decl.result, ()):
            return candidate
        try:
            candidate = Value(decl.result, int(decl.name))
        except ValueError:
            return None
        return candidate if candidate in self.carriers.get(decl.result, ()) else None

    def check(self) -> list[str]:
        sig = self.signature
        errors = []
        for s in sorted(sig.sorts - sig.builtin):
            if s not in self.carriers:
                errors.append(f"no carrier for sort {s!r}")
        for s in sorted(self.carriers):
            if s in sig.builtin:
                errors.append(f"sort {s!r} is builtin and takes no carrier")
            elif s not in sig.sorts:
                errors.append(f"carrier for undeclared sort {s!r}")
        for op, kind in sorted(self.builtins.items()):
            decl = sig.ops.get(op)
            if decl is None:
                errors.append(f"builtin interpretation of unknown operation {op!r}")
                continue
            if kind not in BUILTIN_OPS:
                errors.append(f"unknown builtin {kind!r} for {op!r}")
                continue
            arity = BUILTIN_OPS[kind][0]
            if len(decl.args) != arity or not all(s in sig.builtin for s in (*decl.args, decl.result)):
                errors.append(f"builtin {kind!r} does not fit the profile of {op!r}")
        for decl in sorted(sig.ops.values(), key=lambda d: d.name):
            if decl.name in self.builtins:
                continue
            table = self.tables.get(decl.name)
            if table is None:
                errors.append(f"operation {decl.name!r} is not interpreted")
                continue
            for args, res in table.items():
                for v in (*args, res):
                    if not self.contains(v):
                        errors.append(f"table of {decl.name!r} uses {v!r} outside the carrier")
            if all(s not in sig.builtin for s in decl.args):
                expected = 1
                for s in decl.args:
                    expected *= len(self.carriers.get(s, ()))
                if len(table) != expected:
                    errors.append(f"table of {decl.name!r} is not total ({len(table)} of {expected} entries)")
        return errors

    def carrier(self, sort: str) -> frozenset[Value] | None:
        """The finite carrier of ``sort``, or None for a builtin integer sort."""
        if sort in self.signature.builtin:
            return None
        return self.carriers[sort]

    def contains(self, v: Value) -> bool:
        if v.sort in self.signature.builtin:
            return isinstance(v.val, int)
        return v in self.carriers.get(v.sort, ())

    def apply(self, op: str, args: tuple[Value, ...]) -> Value:
        kind = self.builtins.get(op)
        if kind is not None:
            result_sort = self.signature.ops[op].result
            return Value(result_sort, BUILTIN_OPS[kind][1](*(a.val for a in args)))
        try:
            return self.tables[op][args]
        except KeyError:
            raise EvaluationError(
                f"no value for {op}({', '.join(map(str, args))}) in algebra {self.name!r}") from None

    def _key(self):
        return (self.name, self.signature,
                tuple(sorted((s, frozenset(c)) for s, c in self.carriers.items())),
                tuple(sorted(self.builtins.items())),
                tuple(sorted((op, frozenset(t.items())) for op, t in self.tables.items())))

    def __eq__(self, other):
        return self is other or (isinstance(other, Algebra) and self._key() == other._key())

    def __hash__(self):
        return hash((self.name, self.signature))

    def __repr__(self):
        return f"Algebra({self.name!r} over {self.signature.name!r})"


class TermAlgebra:
    """The algebra of terms over a signature and a finite variable set."""

    is_term_algebra = True

    def __init__(self, signature: Signature, variables: Iterable[Var]):
        self.signature = signature
        self.variables = tuple(variables)

    def contains(self, t) -> bool:
        try:
            validate_term(t, self.signature, self.variables)
        except (SortError, TypeError, AttributeError):
            return False
        return True

    def __eq__(self, other):
        return self is other or (
            isinstance(other, TermAlgebra)
            and self.signature == other.signature
            and set(self.variables) == set(other.variables)
        )

    def __hash__(self):
        return hash((self.signature, frozenset(self.variables)))

    def __repr__(self):
        return f"TermAlgebra({self.signature.name!r}, {[v.name for v in self.variables]})"


def evaluate(t: Term, alg: Algebra, asg: Mapping[Var, Value]) -> Value:
    """Homomorphic evaluation of ``t`` in ``alg`` under ``asg``.

    In a :class:`TermAlgebra` evaluation is substitution.
    """
    if alg.is_term_algebra:
        return substitute(t, asg)
    if isinstance(t, Var):
        try:
            return asg[t]
        except KeyError:
            raise EvaluationError(f"variable {t.name!r} is unassigned") from None
    if isinstance(t, Lit):
        return t.value
    return alg.apply(t.op, tuple(evaluate(a, alg, asg) for a in t.args))


def substitute(t: Term, asg: Mapping[Var, Term]) -> Term:
    """Evaluation in a term algebra: replace variables by terms."""
    if isinstance(t, Var):
        return asg.get(t, t)
    if isinstance(t, Lit):
        return t
    return App(t.op, tuple(substitute(a, asg) for a in t.args))
