"""Elementary cellular automata as full parallel rewriting on a cycle of cells.

Each cell is a node holding its bit; arrows point to the right neighbour.
There is one rule per neighbourhood ``(l, c, r)``: the neighbour bits are
kept, the centre bit is deleted and ``step(l, c, r)`` is added. Because the
new bit is written as a term distinct from the constant, the rule is valid
even when the bit does not change; those steps are not regular but still
have the effective deletion property.
"""

from __future__ import annotations

from typing import Sequence

from .graph import AttributedGraph
from .rules import Rule
from .syntax import parse_document

__all__ = ["eca_bits", "eca_build", "eca_document", "eca_oracle", "parse_bits"]


def _table(rule_number: int) -> dict[tuple[int, int, int], int]:
    if not 0 <= rule_number <= 255:
        raise ValueError(f"rule number must be in 0..255, got {rule_number}")
    return {(l, c, r): (rule_number >> (4 * l + 2 * c + r)) & 1
            for l in (0, 1) for c in (0, 1) for r in (0, 1)}


def parse_bits(bits: str | Sequence[int]) -> list[int]:
    if isinstance(bits, str):
        bits = bits.replace(" ", "")
        if set(bits) - {"0", "1"}:
            raise ValueError(f"bit string may only contain 0 and 1: {bits!r}")
        return [int(b) for b in bits]
    out = [int(b) for b in bits]
    if any(b not in (0, 1) for b in out):
        raise ValueError("bits must be 0 or 1")
    return out


def _initial(width: int, initial) -> list[int]:
    if width < 3:
        raise ValueError(f"width must be at least 3, got {width}")
    if initial is None:
        row = [0] * width
        row[width // 2] = 1
        return row
    row = parse_bits(initial)
    if len(row) != width:
        raise ValueError(f"initial row has {len(row)} cells, expected {width}")
    return row


def _cell(i: int, width: int) -> str:
    return f"c{i:0{len(str(width - 1))}d}"


def eca_document(rule_number: int, width: int, initial=None) -> str:
    """The automaton as a document in the text format (graph ``G``, rules ``e000``..``e111``)."""
    table = _table(rule_number)
    row = _initial(width, initial)
    entries = ", ".join(f"({l}, {c}, {r}) -> {v}" for (l, c, r), v in sorted(table.items()))
    lines = [
        "signature ECA {",
        "  sort bit;",
        "  const 0 : bit;",
        "  const 1 : bit;",
        "  op step : bit x bit x bit -> bit;",
        "}",
        f"algebra Rule{rule_number} over ECA {{",
        "  carrier bit = {0, 1};",
        f"  map step : {entries};",
        "}",
        f"graph G over Rule{rule_number} {{",
    ]
    for i, b in enumerate(row):
        lines.append(f"  node {_cell(i, width)} [{b}];")
    for i in range(width):
        lines.append(f"  arrow e{_cell(i, width)[1:]} : {_cell(i, width)} -> {_cell((i + 1) % width, width)};")
    lines.append("}")
    for l, c, r in sorted(table):
        lines += [
            f"rule e{l}{c}{r} over ECA {{",
            f"  L {{ node l [{l}]; node c [{c}]; node r [{r}]; arrow lc : l -> c; arrow cr : c -> r; }}",
            f"  K {{ node l [{l}]; node c; node r [{r}]; arrow lc : l -> c; arrow cr : c -> r; }}",
            f"  R {{ node c [step({l}, {c}, {r})]; }}",
            "}",
        ]
    return "\n".join(lines) + "\n"


def eca_build(rule_number: int, width: int, initial=None) -> tuple[AttributedGraph, list[Rule]]:
    """Cycle graph of ``width`` cells and the eight rules for ``rule_number``.

    ``initial`` is a bit string or sequence; by default a single 1 in the middle.
    """
    doc = parse_document(eca_document(rule_number, width, initial), f"<eca {rule_number}>")
    return doc.graphs["G"], list(doc.rules.values())


def eca_bits(G: AttributedGraph) -> list[int]:
    """Read the row back from a graph built by :func:`eca_build` (or rewritten from one)."""
    cells = sorted(G.nodes)
    row = []
    for x in cells:
        vals = G.attr(x)
        if len(vals) != 1:
            raise ValueError(f"cell {x} holds {len(vals)} bits")
        (v,) = vals
        row.append(int(v.val))
    return row


def eca_oracle(rule_number: int, initial, steps: int) -> list[list[int]]:
    """Direct array simulation: ``steps + 1`` rows, starting with ``initial``."""
    table = _table(rule_number)
    row = parse_bits(initial)
    rows = [row]
    n = len(row)
    for _ in range(steps):
        row = [table[row[i - 1], row[i], row[(i + 1) % n]] for i in range(n)]
        rows.append(row)
    return rows
