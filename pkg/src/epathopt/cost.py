"""Symbolic cost evaluation and cheapest-variant extraction.

A sequence's cost is a polynomial in the symbolic iteration count N: each
block contributes its instruction cost plus the terminator cost at the
coefficient whose index is the block's loop-nesting depth, so every enclosing
loop multiplies the contribution by one factor of N. Comparison is
lexicographic from the highest coefficient down, i.e. by behavior for all
sufficiently large N.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cmp_to_key

from .analysis import Analyses
from .epath import EPath
from .esequence import ESequence, analyze, to_function
from .ir import OPCODE_ARITY, print_function


class Ordering(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class CostPoly:
    """Coefficients c0..cd over N^0..N^d, normalized (no trailing zeros)."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        if not self.coefficients:
            raise ValueError("coefficients must be non-empty")
        if any(c < 0 for c in self.coefficients):
            raise ValueError("coefficients must be nonnegative")
        trimmed = self.coefficients
        while len(trimmed) > 1 and trimmed[-1] == 0:
            trimmed = trimmed[:-1]
        object.__setattr__(self, "coefficients", trimmed)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def evaluate(self, n: int) -> int:
        return sum(c * n**k for k, c in enumerate(self.coefficients))

    def render(self) -> str:
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coefficients[k]
            if c == 0:
                continue
            terms.append(str(c) if k == 0 else f"{c}N^{k}")
        return " + ".join(terms) if terms else "0"


def compare(a: CostPoly, b: CostPoly) -> Ordering:
    """Total order: lexicographic from the highest coefficient downward."""
    width = max(len(a.coefficients), len(b.coefficients))
    pa = a.coefficients + (0,) * (width - len(a.coefficients))
    pb = b.coefficients + (0,) * (width - len(b.coefficients))
    for k in range(width - 1, -1, -1):
        if pa[k] != pb[k]:
            return Ordering.LESS if pa[k] < pb[k] else Ordering.GREATER
    return Ordering.EQUAL


@dataclass(frozen=True)
class CostTable:
    """Per-opcode base costs plus a flat cost for every terminator."""

    opcode_costs: dict[str, int]
    terminator_cost: int = 0

    def __post_init__(self):
        unknown = [op for op in self.opcode_costs if op not in OPCODE_ARITY]
        if unknown:
            raise ValueError(f"unknown opcodes: {', '.join(sorted(unknown))}")
        if any(c < 0 for c in self.opcode_costs.values()) or self.terminator_cost < 0:
            raise ValueError("costs must be nonnegative")

    def opcode_cost(self, opcode: str) -> int:
        return self.opcode_costs.get(opcode, 1)


def default_cost_table() -> CostTable:
    """Every instruction costs 1, terminators are free."""
    return CostTable({op: 1 for op in OPCODE_ARITY}, 0)


def load_cost_table(text: str) -> CostTable:
    """Parse a `name = integer` per line table; `terminator` sets the
    terminator cost, anything else must be a known opcode."""
    costs: dict[str, int] = {}
    terminator: int | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        name, sep, value = line.partition("=")
        name, value = name.strip(), value.strip()
        if not sep or not name or not value:
            raise ValueError(f"line {line_no}: expected 'name = integer'")
        try:
            cost = int(value)
        except ValueError:
            raise ValueError(f"line {line_no}: bad integer {value!r}") from None
        if name == "terminator":
            if terminator is not None:
                raise ValueError(f"line {line_no}: duplicate terminator entry")
            terminator = cost
        elif name in OPCODE_ARITY:
            if name in costs:
                raise ValueError(f"line {line_no}: duplicate entry for {name}")
            costs[name] = cost
        else:
            raise ValueError(f"line {line_no}: unknown opcode {name!r}")

    table = dict(default_cost_table().opcode_costs)
    table.update(costs)
    return CostTable(table, 0 if terminator is None else terminator)


def cost_of(
    s: ESequence, table: CostTable | None = None, analyses: Analyses | None = None
) -> CostPoly:
    """Sum block costs, one nesting depth per enclosing loop."""
    table = table or default_cost_table()
    analyses = analyses or analyze(s)

    depth = {
        b.id: sum(1 for loop in analyses.loops if b.id in loop.body) for b in s.blocks
    }
    coefficients = [0] * (max(depth.values(), default=0) + 1)
    for b in s.blocks:
        block_cost = table.terminator_cost
        if b.instruction:
            block_cost += table.opcode_cost(b.instruction.opcode)
        coefficients[depth[b.id]] += block_cost
    return CostPoly(tuple(coefficients))


def _cmp_keyed(a, b) -> int:
    order = compare(a[0], b[0])
    if order is not Ordering.EQUAL:
        return order.value
    return -1 if a[1] < b[1] else (0 if a[1] == b[1] else 1)


def sort_by_cost(variants: list[ESequence], table: CostTable | None = None) -> list[ESequence]:
    """Ascending cost, ties broken by canonical printed form."""
    table = table or default_cost_table()
    keyed = [
        (cost_of(s, table), print_function(to_function(s)), s) for s in variants
    ]
    keyed.sort(key=cmp_to_key(_cmp_keyed))
    return [s for _, _, s in keyed]


def extract(p: EPath, table: CostTable | None = None) -> ESequence:
    """The cheapest variant in the set (deterministic under ties)."""
    return sort_by_cost(p.variants(), table)[0]
