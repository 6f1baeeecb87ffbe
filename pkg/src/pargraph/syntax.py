"""Text format for signatures, algebras, graphs and rules.

::

    # line comment
    signature S {
      sort id; sort int builtin;
      const a : id;
      op f : int x int -> int;
    }
    algebra A over S {
      carrier id = {a, b};
      map f = add;                       # table-free builtin on int sorts
      map g : (a) -> b, (b) -> a;        # finite table
    }
    graph G over A { node x [a, 1]; arrow e : x -> y [a]; node y; }
    rule r over S vars (u : int) { L { node x [a, u]; } K { node x [a]; } R { node x [a, u]; } }

Attribute entries are terms; ``term : sort`` disambiguates a literal that
could belong to several sorts. Derived items produced by rewriting are
written ``item@rule#k``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .graph import AttributedGraph, Derived, GraphError, item_key, rename_items
from .rules import Rule, validate_rule
from .sigma import (
    BUILTIN_OPS,
    Algebra,
    App,
    EvaluationError,
    Lit,
    OpDecl,
    Signature,
    SignatureError,
    SortError,
    TermAlgebra,
    Value,
    Var,
    evaluate,
    validate_term,
    value_key,
)

__all__ = [
    "Diagnostic",
    "Document",
    "ParseError",
    "Span",
    "format_algebra",
    "format_document",
    "format_graph",
    "format_rule",
    "format_signature",
    "parse_document",
    "serialize_graph",
]


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    col: int
    end_line: int
    end_col: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    span: Span

    def __str__(self):
        return f"{self.span}: {self.severity}: {self.message}"


class ParseError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(map(str, diagnostics)))


@dataclass
class Document:
    signatures: dict[str, Signature] = field(default_factory=dict)
    algebras: dict[str, Algebra] = field(default_factory=dict)
    graphs: dict[str, AttributedGraph] = field(default_factory=dict)
    rules: dict[str, Rule] = field(default_factory=dict)
    spans: dict[tuple[str, str], Span] = field(default_factory=dict)

    def copy(self) -> "Document":
        return Document(dict(self.signatures), dict(self.algebras), dict(self.graphs),
                        dict(self.rules), dict(self.spans))

    def is_empty(self) -> bool:
        return not (self.signatures or self.algebras or self.graphs or self.rules)

    def algebra_name(self, alg) -> str | None:
        for name, a in self.algebras.items():
            if a is alg or a == alg:
                return name
        return None


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*(?:@[A-Za-z_][A-Za-z0-9_']*\#[0-9]+)?)
  | (?P<arrow>->)
  | (?P<int>-?[0-9]+)
  | (?P<comment>\#[^\n]*)
  | (?P<punct>[{}()\[\];,:=*])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int

    @property
    def end_col(self) -> int:
        return self.col + len(self.text)


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise ParseError([Diagnostic("error", f"unexpected character {text[pos]!r}",
                                         Span(filename, line, col, line, col + 1))])
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclass
class _RawTerm:
    head: Token
    args: list["_RawTerm"] | None
    ascription: Token | None = None


class _Parser:
    def __init__(self, text: str, filename: str, base: Document | None):
        self.file = filename
        self.toks = tokenize(text, filename)
        self.i = 0
        self.doc = base.copy() if base is not None else Document()

    # token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def span(self, start: Token, end: Token | None = None) -> Span:
        end = end or start
        return Span(self.file, start.line, start.col, end.line, end.end_col)

    def fail(self, message: str, tok: Token | None = None, end: Token | None = None):
        tok = tok or self.tok
        raise ParseError([Diagnostic("error", message, self.span(tok, end))])

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def name(self, what: str, allow_int: bool = False) -> Token:
        kinds = ("name", "int") if allow_int else ("name",)
        if self.tok.kind not in kinds:
            self.fail(f"expected {what}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    # declarations --------------------------------------------------------

    def document(self) -> Document:
        while self.tok.kind != "eof":
            kw = self.tok
            if kw.text == "signature":
                self.signature()
            elif kw.text == "algebra":
                self.algebra()
            elif kw.text == "graph":
                self.graph()
            elif kw.text == "rule":
                self.rule()
            else:
                self.fail(f"expected a declaration (signature, algebra, graph, rule), found {kw.text!r}")
        return self.doc

    def _declare(self, kind: str, name_tok: Token, table: dict, start: Token):
        if name_tok.text in table:
            prev = self.doc.spans.get((kind, name_tok.text))
            where = f" (first declared at {prev})" if prev else ""
            self.fail(f"{kind} {name_tok.text!r} declared twice{where}", name_tok)
        self.doc.spans[(kind, name_tok.text)] = self.span(start, name_tok)

    def _lookup(self, kind: str, table: dict, tok: Token):
        if tok.text not in table:
            self.fail(f"unknown {kind} {tok.text!r}", tok)
        return table[tok.text]

    def signature(self):
        start = self.advance()
        name = self.name("signature name")
        self._declare("signature", name, self.doc.signatures, start)
        self.expect("{")
        sorts, builtin, ops = [], [], []
        while not self.accept("}"):
            kw = self.name("'sort', 'const' or 'op'")
            if kw.text == "sort":
                s = self.name("sort name")
                sorts.append(s.text)
                if self.accept("builtin"):
                    builtin.append(s.text)
            elif kw.text == "const":
                c = self.name("constant name", allow_int=True)
                self.expect(":")
                ops.append(OpDecl(c.text, (), self.name("sort name").text))
            elif kw.text == "op":
                c = self.name("operation name", allow_int=True)
                self.expect(":")
                args = []
                if not self.at("->"):
                    args.append(self.name("sort name").text)
                    while self.at("x") or self.at("*") or self.at(","):
                        self.advance()
                        args.append(self.name("sort name").text)
                self.expect("->")
                ops.append(OpDecl(c.text, tuple(args), self.name("sort name").text))
            else:
                self.fail(f"expected 'sort', 'const' or 'op', found {kw.text!r}", kw)
            self.expect(";")
        try:
            self.doc.signatures[name.text] = Signature(name.text, sorts, ops, builtin)
        except SignatureError as exc:
            self.fail(str(exc), start, name)

    def value_token(self, sort: str, sig: Signature) -> Value:
        t = self.name("value", allow_int=True)
        if sort in sig.builtin:
            if t.kind != "int":
                self.fail(f"sort {sort!r} is builtin: expected an integer, found {t.text!r}", t)
            return Value(sort, int(t.text))
        return Value(sort, t.text)

    def algebra(self):
        start = self.advance()
        name = self.name("algebra name")
        self._declare("algebra", name, self.doc.algebras, start)
        self.expect("over")
        sig = self._lookup("signature", self.doc.signatures, self.name("signature name"))
        self.expect("{")
        carriers: dict = {}
        tables: dict = {}
        builtins: dict = {}
        while not self.accept("}"):
            kw = self.name("'carrier' or 'map'")
            if kw.text == "carrier":
                s = self.name("sort name")
                if s.text not in sig.sorts:
                    self.fail(f"unknown sort {s.text!r}", s)
                if s.text in sig.builtin:
                    self.fail(f"sort {s.text!r} is builtin and takes no carrier", s)
                self.expect("=")
                self.expect("{")
                vals = []
                if not self.at("}"):
                    vals.append(self.name("value", allow_int=True).text)
                    while self.accept(","):
                        vals.append(self.name("value", allow_int=True).text)
                self.expect("}")
                carriers[s.text] = vals
            elif kw.text == "map":
                op_tok = self.name("operation name", allow_int=True)
                decl = sig.ops.get(op_tok.text)
                if decl is None:
                    self.fail(f"unknown operation {op_tok.text!r}", op_tok)
                if self.accept("="):
                    b = self.name("builtin name")
                    if b.text not in BUILTIN_OPS:
                        self.fail(f"unknown builtin {b.text!r}; available: {', '.join(sorted(BUILTIN_OPS))}", b)
                    builtins[decl.name] = b.text
                else:
                    self.expect(":")
                    table = tables.setdefault(decl.name, {})
                    while True:
                        entry = self.tok
                        self.expect("(")
                        args = []
                        for k, s in enumerate(decl.args):
                            if k:
                                self.expect(",")
                            args.append(self.value_token(s, sig))
                        self.expect(")")
                        self.expect("->")
                        res = self.value_token(decl.result, sig)
                        if tuple(args) in table:
                            self.fail(f"duplicate table entry for {decl.name}", entry)
                        table[tuple(args)] = res
                        if not self.accept(","):
                            break
            else:
                self.fail(f"expected 'carrier' or 'map', found {kw.text!r}", kw)
            self.expect(";")
        try:
            self.doc.algebras[name.text] = Algebra(name.text, sig, carriers, tables, builtins)
        except SignatureError as exc:
            self.fail(str(exc), start, name)

    # terms -------------------------------------------------------------

    def raw_term(self) -> _RawTerm:
        head = self.name("term", allow_int=True)
        args = None
        if self.accept("("):
            args = []
            if not self.at(")"):
                args.append(self.raw_term())
                while self.accept(","):
                    args.append(self.raw_term())
            self.expect(")")
        return _RawTerm(head, args)

    def attr_list(self) -> list[_RawTerm]:
        out = []
        if self.accept("["):
            if not self.at("]"):
                while True:
                    t = self.raw_term()
                    if self.accept(":"):
                        t.ascription = self.name("sort name")
                    out.append(t)
                    if not self.accept(","):
                        break
            self.expect("]")
        return out

    def resolve(self, raw: _RawTerm, sig: Signature, variables: Mapping[str, Var],
                algebra: Algebra | None, expected: str | None):
        """Turn raw syntax into a term; carrier value names are literals in graphs."""
        if raw.ascription is not None:
            if raw.ascription.text not in sig.sorts:
                self.fail(f"unknown sort {raw.ascription.text!r}", raw.ascription)
            expected = raw.ascription.text
        head = raw.head
        if raw.args is not None:
            decl = sig.ops.get(head.text)
            if decl is None:
                self.fail(f"unknown symbol {head.text!r}", head)
            if len(raw.args) != len(decl.args):
                self.fail(f"{head.text!r} expects {len(decl.args)} argument(s), got {len(raw.args)}", head)
            return App(head.text, tuple(self.resolve(a, sig, variables, algebra, s)
                                        for a, s in zip(raw.args, decl.args)))
        v = variables.get(head.text)
        if v is not None:
            return v
        decl = sig.ops.get(head.text)
        if decl is not None and not decl.args and (expected is None or decl.result == expected):
            return App(head.text)
        candidates = []
        sorts = [expected] if expected is not None else sorted(sig.sorts)
        for s in sorts:
            if s in sig.builtin:
                if head.kind == "int":
                    candidates.append(Value(s, int(head.text)))
            elif algebra is not None and Value(s, head.text) in algebra.carriers.get(s, ()):
                candidates.append(Value(s, head.text))
        if len(candidates) == 1:
            return Lit(candidates[0])
        if not candidates:
            if decl is not None:
                self.fail(f"sort mismatch: {head.text!r} has sort {decl.result!r}, expected {expected!r}", head)
            self.fail(f"unknown symbol {head.text!r}", head)
        self.fail(f"{head.text!r} is ambiguous between sorts "
                  f"{', '.join(c.sort for c in candidates)}; write '{head.text} : SORT'", head)

    # graphs --------------------------------------------------------------

    def graph_body(self, sig: Signature, variables: Mapping[str, Var], algebra, prefix: str = ""):
        """Parse ``node``/``arrow`` declarations up to the closing brace."""
        self.expect("{")
        nodes, arrows, src, tgt, attrs = [], [], {}, {}, {}
        seen: dict = {}
        while not self.accept("}"):
            kw = self.name("'node' or 'arrow'")
            if kw.text not in ("node", "arrow"):
                self.fail(f"expected 'node' or 'arrow', found {kw.text!r}", kw)
            item = self.name("item name", allow_int=True)
            if item.text in seen:
                self.fail(f"item {item.text!r} declared twice", item)
            seen[item.text] = kw.text
            ident = prefix + item.text
            if kw.text == "arrow":
                self.expect(":")
                s_tok = self.name("source node", allow_int=True)
                self.expect("->")
                t_tok = self.name("target node", allow_int=True)
                arrows.append((ident, s_tok, t_tok, item))
            else:
                nodes.append(ident)
            values = set()
            for raw in self.attr_list():
                t = self.resolve(raw, sig, variables, algebra, None)
                if algebra is not None:
                    try:
                        validate_term(t, sig, ())
                        values.add(evaluate(t, algebra, {}))
                    except (SortError, EvaluationError) as exc:
                        self.fail(str(exc), raw.head)
                else:
                    values.add(t)
            attrs[ident] = values
            self.expect(";")
        for ident, s_tok, t_tok, item in arrows:
            for end in (s_tok, t_tok):
                if seen.get(end.text) != "node":
                    self.fail(f"arrow {item.text!r}: {end.text!r} is not a node of this graph", end)
            src[ident] = prefix + s_tok.text
            tgt[ident] = prefix + t_tok.text
        return nodes, [a[0] for a in arrows], src, tgt, attrs

    def graph(self):
        start = self.advance()
        name = self.name("graph name")
        self._declare("graph", name, self.doc.graphs, start)
        self.expect("over")
        alg = self._lookup("algebra", self.doc.algebras, self.name("algebra name"))
        nodes, arrows, src, tgt, attrs = self.graph_body(alg.signature, {}, alg)
        try:
            g = AttributedGraph(alg, frozenset(nodes), frozenset(arrows), src, tgt, attrs)
        except GraphError as exc:
            self.fail(str(exc), start, name)
        problems = g.check_values()
        if problems:
            self.fail(problems[0], start, name)
        self.doc.graphs[name.text] = g

    def rule(self):
        start = self.advance()
        name = self.name("rule name")
        self._declare("rule", name, self.doc.rules, start)
        self.expect("over")
        sig = self._lookup("signature", self.doc.signatures, self.name("signature name"))
        variables: dict[str, Var] = {}
        if self.accept("vars"):
            self.expect("(")
            while not self.accept(")"):
                if variables:
                    self.expect(",")
                v = self.name("variable name")
                self.expect(":")
                s = self.name("sort name")
                if s.text not in sig.sorts:
                    self.fail(f"unknown sort {s.text!r}", s)
                if v.text in variables:
                    self.fail(f"variable {v.text!r} declared twice", v)
                if v.text in sig.ops:
                    self.fail(f"variable {v.text!r} clashes with an operation symbol", v)
                variables[v.text] = Var(v.text, s.text)
        talg = TermAlgebra(sig, tuple(variables.values()))
        self.expect("{")
        parts = {}
        for label in ("L", "K", "R"):
            tok = self.tok
            self.expect(label)
            body = self.graph_body(sig, variables, None, prefix=name.text + ".")
            try:
                nodes, arrows, src, tgt, attrs = body
                parts[label] = AttributedGraph(talg, frozenset(nodes), frozenset(arrows), src, tgt, attrs)
            except GraphError as exc:
                self.fail(f"{label}: {exc}", tok)
        self.expect("}")
        r = Rule(name.text, sig, tuple(variables.values()), parts["L"], parts["K"], parts["R"])
        errors = validate_rule(r)
        if errors:
            sp = self.span(start, name)
            raise ParseError([Diagnostic("error", f"rule {name.text!r}: {e}", sp) for e in errors])
        self.doc.rules[name.text] = r


def parse_document(text: str, filename: str = "<input>", base: Document | None = None) -> Document:
    """Parse and validate a document; raise :class:`ParseError` with diagnostics.

    Declarations in ``base`` are visible to (and extended by) ``text``.
    """
    return _Parser(text, filename, base).document()


# serialization ------------------------------------------------------------

def format_signature(sig: Signature) -> str:
    lines = [f"signature {sig.name} {{"]
    for s in sorted(sig.sorts):
        lines.append(f"  sort {s}{' builtin' if s in sig.builtin else ''};")
    for op in sorted(sig.ops.values(), key=lambda o: o.name):
        if op.args:
            lines.append(f"  op {op.name} : {' x '.join(op.args)} -> {op.result};")
        else:
            lines.append(f"  const {op.name} : {op.result};")
    lines.append("}")
    return "\n".join(lines)


def format_algebra(alg: Algebra) -> str:
    lines = [f"algebra {alg.name} over {alg.signature.name} {{"]
    for s in sorted(alg.carriers):
        vals = sorted(alg.carriers[s], key=value_key)
        lines.append(f"  carrier {s} = {{{', '.join(map(str, vals))}}};")
    for op in sorted(alg.builtins):
        lines.append(f"  map {op} = {alg.builtins[op]};")
    for op in sorted(alg.tables):
        decl = alg.signature.ops[op]
        table = alg.tables[op]
        if not decl.args and alg._default_constant(decl) == table.get(()):
            continue
        entries = [f"({', '.join(map(str, args))}) -> {res}"
                   for args, res in sorted(table.items(), key=lambda kv: [value_key(v) for v in kv[0]])]
        lines.append(f"  map {op} : {', '.join(entries)};")
    lines.append("}")
    return "\n".join(lines)


def _value_text(v: Value, alg: Algebra) -> str:
    sig = alg.signature
    text = str(v)
    # would the bare text read back as exactly this value?
    decl = sig.ops.get(text)
    if decl is not None and not decl.args:
        try:
            if alg.apply(text, ()) == v:
                return text
        except EvaluationError:
            pass
        return f"{text} : {v.sort}"
    hits = [s for s in sig.sorts
            if (s in sig.builtin and isinstance(v.val, int)) or Value(s, text) in alg.carriers.get(s, ())]
    return text if hits == [v.sort] else f"{text} : {v.sort}"


def _derived_names(G: AttributedGraph, ordinals: Mapping[str, int] | None) -> dict:
    derived = sorted((x for x in G.items if isinstance(x, Derived)), key=item_key)
    plain = {x for x in G.items if not isinstance(x, Derived)}
    numbers = dict(ordinals or {})
    nxt = max(numbers.values(), default=-1) + 1
    for mid in sorted({d.matching for d in derived}):
        if mid not in numbers:
            numbers[mid] = nxt
            nxt += 1
    names: dict = {}
    taken = set(plain)
    for d in derived:
        origin = str(d.origin)
        rule, _, local = origin.partition(".")
        if not local:
            rule, local = "r", origin
        k = numbers[d.matching]
        name = f"{local}@{rule}#{k}"
        while name in taken:
            k += 1000
            name = f"{local}@{rule}#{k}"
        taken.add(name)
        names[d] = name
    return names


def serialize_graph(G: AttributedGraph, ordinals: Mapping[str, int] | None = None) -> str:
    """Canonical body of a graph: nodes then arrows, each sorted, attributes sorted.

    Derived items are rendered ``item@rule#k`` where ``k`` is the ordinal of
    the creating matching (taken from ``ordinals`` when given).
    """
    names = _derived_names(G, ordinals)
    show = lambda x: names.get(x, x)  # noqa: E731

    def attrs(x) -> str:
        s = G.attr(x)
        if not s:
            return ""
        if G.algebra.is_term_algebra:
            return " [" + ", ".join(sorted(map(str, s))) + "]"
        return " [" + ", ".join(_value_text(v, G.algebra) for v in sorted(s, key=value_key)) + "]"

    order = lambda xs: sorted(xs, key=lambda x: (show(x) if not isinstance(show(x), Derived) else "", item_key(x)))  # noqa: E731
    lines = [f"node {show(n)}{attrs(n)};" for n in order(G.nodes)]
    lines += [f"arrow {show(a)} : {show(G.src[a])} -> {show(G.tgt[a])}{attrs(a)};" for a in order(G.arrows)]
    return "\n".join(lines)


def format_graph(name: str, G: AttributedGraph, ordinals: Mapping[str, int] | None = None) -> str:
    body = serialize_graph(G, ordinals)
    alg_name = getattr(G.algebra, "name", "?")
    if not body:
        return f"graph {name} over {alg_name} {{\n}}"
    return f"graph {name} over {alg_name} {{\n" + "\n".join("  " + ln for ln in body.split("\n")) + "\n}"


def format_rule(r: Rule) -> str:
    decl = ", ".join(f"{v.name} : {v.sort}" for v in r.variables)
    head = f"rule {r.name} over {r.signature.name}" + (f" vars ({decl})" if decl else "") + " {"
    lines = [head]
    for label, part in (("L", r.lhs), ("K", r.interface), ("R", r.rhs)):
        body = serialize_graph(rename_items(part, {x: r.local_name(x) for x in part.items}))
        lines.append(f"  {label} {{ " + " ".join(body.split("\n")) + (" }" if body else "}"))
    lines.append("}")
    return "\n".join(lines)


def format_document(graphs: Mapping[str, AttributedGraph], ordinals: Mapping[str, int] | None = None) -> str:
    """A self-contained document: the signatures and algebras the graphs use, then the graphs."""
    algebras: dict = {}
    for g in graphs.values():
        algebras.setdefault(g.algebra.name, g.algebra)
    sigs: dict = {}
    for a in algebras.values():
        sigs.setdefault(a.signature.name, a.signature)
    blocks = [format_signature(s) for _, s in sorted(sigs.items())]
    blocks += [format_algebra(a) for _, a in sorted(algebras.items())]
    blocks += [format_graph(n, g, ordinals) for n, g in graphs.items()]
    return "\n\n".join(blocks) + "\n"


def parse_graph_body(body: str, algebra: Algebra) -> AttributedGraph:
    """Parse a bare graph body (as produced by :func:`serialize_graph`) over ``algebra``."""
    p = _Parser("{" + body + "}", "<graph>", None)
    nodes, arrows, src, tgt, attrs = p.graph_body(algebra.signature, {}, algebra)
    return AttributedGraph(algebra, frozenset(nodes), frozenset(arrows), src, tgt, attrs)


def iter_rules(doc: Document, names: Iterable[str] | None = None) -> list[Rule]:
    if names is None:
        return list(doc.rules.values())
    return [doc.rules[n] for n in names]
