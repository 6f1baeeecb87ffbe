"""Command-line front end: ``pargraph match|check|apply|run|eca``.

Exit codes: 0 success, 1 a requested property fails or a step is refused,
2 the input could not be read, parsed or validated.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .graph import AttributedGraph, item_key
from .independence import DEFAULT_SEQ_BOUND, PROPERTIES, property_report
from .rewrite import (
    EffectiveDeletionViolation,
    MatchSet,
    deletion_spec,
    edp_violations,
    full_parallel_step,
    parallel_apply,
    recovered_attribution,
)
from .rules import UnsupportedMatching
from .syntax import Document, ParseError, format_document, parse_document

EXIT_OK, EXIT_REFUSED, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: cannot read: {exc.strerror or exc}") from None


def load(args) -> tuple[str, AttributedGraph, list]:
    """Graph name, graph and rule list selected by ``-g``, ``-r`` and ``--graph``."""
    gdoc = parse_document(_read(args.graph_file), args.graph_file)
    if args.rules_file is None or Path(args.rules_file).resolve() == Path(args.graph_file).resolve():
        rules = list(gdoc.rules.values())
    else:
        rdoc = parse_document(_read(args.rules_file), args.rules_file, base=gdoc)
        rules = [r for n, r in rdoc.rules.items() if n not in gdoc.rules]
    name = args.graph
    if name is None:
        if len(gdoc.graphs) != 1:
            found = ", ".join(gdoc.graphs) or "none"
            raise UsageError(f"{args.graph_file}: expected exactly one graph (found: {found}); use --graph")
        (name,) = gdoc.graphs
    elif name not in gdoc.graphs:
        raise UsageError(f"{args.graph_file}: no graph named {name!r}")
    return name, gdoc.graphs[name], rules


def select(all_m: MatchSet, spec: str | None) -> MatchSet:
    if spec is None or spec == "all":
        return all_m
    chosen = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            k = int(part)
        except ValueError:
            raise UsageError(f"matching selection must list ordinals from 'match', got {part!r}") from None
        if not 0 <= k < len(all_m):
            raise UsageError(f"no matching with ordinal {k} (there are {len(all_m)})")
        m = all_m.matchings[k]
        if m not in chosen:
            chosen.append(m)
    return all_m.subset(chosen)


def _ordinals(M: MatchSet) -> dict[str, int]:
    return {m.id: k for k, m in enumerate(M)}


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"{path}: cannot write: {exc.strerror or exc}") from None


def _fmt_attr(d: dict) -> dict[str, list[str]]:
    return {str(x): sorted(map(str, d[x])) for x in sorted(d, key=item_key)}


# commands -------------------------------------------------------------

def cmd_match(args) -> int:
    _, G, rules = load(args)
    for k, m in enumerate(MatchSet.all(G, rules)):
        print(f"{k}\t{m.id}")
    return EXIT_OK


def cmd_check(args) -> int:
    _, G, rules = load(args)
    all_m = MatchSet.all(G, rules)
    M = select(all_m, args.matchings)
    wanted = PROPERTIES if args.props == "all" else tuple(p.strip() for p in args.props.split(","))
    unknown = [p for p in wanted if p not in PROPERTIES]
    if unknown:
        raise UsageError(f"unknown propert{'y' if len(unknown) == 1 else 'ies'} {', '.join(unknown)}; "
                         f"choose from {', '.join(PROPERTIES)}")
    report = property_report(M, seq_bound=args.seq_bound)
    flags = report.flags()
    spec = deletion_spec(M)
    lifted = recovered_attribution(M)
    failed = [p for p in wanted if flags[p] is False]
    if args.format == "json":
        out = {
            "matchings": list(M.ids),
            "properties": {p: flags[p] for p in wanted},
            "witnesses": {p: w for p, w in report.as_dict()["witnesses"].items() if p in wanted},
            "deleted": {"nodes": sorted(map(str, spec.nodes)), "arrows": sorted(map(str, spec.arrows)),
                        "attributes": _fmt_attr(spec.attrs)},
            "recovered": _fmt_attr(lifted),
        }
        print(json.dumps(out, indent=2))
    else:
        print("matchings: " + (", ".join(M.ids) or "(none)"))
        for p in wanted:
            v = flags[p]
            text = "skipped (too many matchings)" if v is None else str(v).lower()
            print(f"{p}: {text}")
            if v is False:
                print(f"  witness: {report.witnesses[p]}")
        print("deleted nodes: " + (", ".join(sorted(map(str, spec.nodes))) or "-"))
        print("deleted arrows: " + (", ".join(sorted(map(str, spec.arrows))) or "-"))
        print("deleted attributes: " + _attr_line(spec.attrs))
        print("recovered attributes: " + _attr_line(lifted))
    if any(flags[p] is None for p in wanted) and args.props != "all":
        print(f"error: sequential independence not decided: more than {args.seq_bound} matchings",
              file=sys.stderr)
        return EXIT_REFUSED
    if failed:
        print(f"error: propert{'y' if len(failed) == 1 else 'ies'} failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_REFUSED
    return EXIT_OK


def _attr_line(d: dict) -> str:
    parts = [f"{x}: {{{', '.join(vals)}}}" for x, vals in _fmt_attr(d).items()]
    return "; ".join(parts) or "-"


def _report_refusal(violations) -> None:
    print("error: effective deletion property fails; surviving deletions:", file=sys.stderr)
    for v in violations:
        if v[0] == "attr":
            print(f"  attributes of {v[1]}: {', '.join(sorted(map(str, v[2])))}", file=sys.stderr)
        else:
            print(f"  {v[0]} {v[1]}", file=sys.stderr)


def cmd_apply(args) -> int:
    name, G, rules = load(args)
    all_m = MatchSet.all(G, rules)
    M = select(all_m, args.matchings)
    result = parallel_apply(M)
    if not args.force:
        bad = edp_violations(M, result)
        if bad:
            _report_refusal(bad)
            return EXIT_REFUSED
    _write(args.output, format_document({name: result}, _ordinals(all_m)))
    return EXIT_OK


def cmd_run(args) -> int:
    name, G, rules = load(args)
    status = EXIT_OK
    for k in range(args.steps):
        all_m = MatchSet.all(G, rules)
        if not len(all_m):
            print(f"no matchings after {k} step(s)", file=sys.stderr)
            break
        try:
            G = full_parallel_step(G, rules)
        except EffectiveDeletionViolation as exc:
            print(f"step {k + 1} refused", file=sys.stderr)
            _report_refusal(exc.violations)
            status = EXIT_REFUSED
            break
    _write(args.output, format_document({name: G}))
    return status


def cmd_eca(args) -> int:
    from .eca import eca_bits, eca_build, eca_oracle

    try:
        G, rules = eca_build(args.rule, args.width, args.init)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [eca_bits(G)]
    for k in range(args.steps):
        try:
            G = full_parallel_step(G, rules)
        except EffectiveDeletionViolation as exc:
            _report_refusal(exc.violations)
            return EXIT_REFUSED
        rows.append(eca_bits(G))
    for row in rows:
        print("".join(map(str, row)))
    if args.check_oracle:
        expected = eca_oracle(args.rule, rows[0], args.steps)
        for k, (got, want) in enumerate(zip(rows, expected)):
            if got != want:
                print(f"error: step {k} differs from the array simulation: "
                      f"{''.join(map(str, got))} != {''.join(map(str, want))}", file=sys.stderr)
                return EXIT_REFUSED
        print(f"oracle: {args.steps} step(s) agree", file=sys.stderr)
    return EXIT_OK


# argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pargraph", description="Parallel rewriting of attributed graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    def inputs(sp):
        sp.add_argument("-g", "--graph-file", required=True, help="document holding the host graph")
        sp.add_argument("-r", "--rules-file", help="document holding the rules (default: the graph file)")
        sp.add_argument("--graph", help="graph name when the document has several")

    def selection(sp):
        sp.add_argument("-m", "--matchings", help="comma-separated ordinals from 'match' (default: all)")

    sp = sub.add_parser("match", help="list matchings with their ordinals and ids")
    inputs(sp)
    sp.set_defaults(func=cmd_match)

    sp = sub.add_parser("check", help="report the independence properties of a set of matchings")
    inputs(sp)
    selection(sp)
    sp.add_argument("--props", default="all", help="'all' or a comma-separated list of " + ", ".join(PROPERTIES))
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.add_argument("--seq-bound", type=int, default=DEFAULT_SEQ_BOUND,
                    help="largest set for which sequential independence is decided")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("apply", help="one parallel step, refused unless deletions take effect")
    inputs(sp)
    selection(sp)
    sp.add_argument("--force", action="store_true", help="apply even without the effective deletion property")
    sp.add_argument("-o", "--output", default="-")
    sp.set_defaults(func=cmd_apply)

    sp = sub.add_parser("run", help="iterate the full parallel step")
    inputs(sp)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("-o", "--output", default="-")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("eca", help="simulate an elementary cellular automaton by rewriting")
    sp.add_argument("--rule", type=int, required=True)
    sp.add_argument("--width", type=int, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--init", help="initial row as a bit string (default: a single 1 in the middle)")
    sp.add_argument("--check-oracle", action="store_true", help="compare with a direct array simulation")
    sp.set_defaults(func=cmd_eca)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if getattr(args, "steps", 0) is not None and getattr(args, "steps", 0) < 0:
        print("error: --steps must be non-negative", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except ParseError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        return EXIT_INPUT
    except (UsageError, UnsupportedMatching) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
