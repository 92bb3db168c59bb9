"""Canonicalized, immutable control-flow regions with structural hashing.

An ESequence is the unit of congruence: a whole function body whose blocks
are stored in canonical reverse postorder with densely renumbered block and
value ids. Two functions that differ only in naming canonicalize to equal
sequences with equal digests, which is what makes hash-consing work.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .analysis import Analyses, reverse_postorder, find_back_edges
from .ir import (
    Block,
    BrIf,
    Function,
    Jump,
    ValueId,
    print_function,
    remap,
    render_instruction,
    render_terminator,
    validate,
)

DIGEST_BYTES = 8


@dataclass(frozen=True)
class ESequence:
    """An immutable region; construct via `from_function` only."""

    params: tuple[ValueId, ...]
    blocks: tuple[Block, ...]
    digest: str = field(compare=False)

    def __len__(self) -> int:
        return len(self.blocks)


def from_function(f: Function) -> ESequence:
    """Canonicalize a valid, reducible function into an ESequence.

    Blocks are reordered to reverse postorder and renumbered 0..n-1; values
    are renumbered in definition order (entry params first, then each
    block's params and instruction result).
    """
    violations = validate(f)
    if violations:
        raise ValueError(f"invalid function @{f.name}: " + "; ".join(violations))
    find_back_edges(f)  # reject irreducible regions up front

    rpo = reverse_postorder(f)
    block_map = {old: new for new, old in enumerate(rpo)}
    value_map: dict[ValueId, ValueId] = {}
    for old in rpo:
        block = f.block(old)
        for v in block.params:
            value_map[v] = len(value_map)
        for instr in block.instructions:
            value_map[instr.result] = len(value_map)

    renamed = remap(f, value_map, block_map)
    blocks = tuple(sorted(renamed.blocks, key=lambda b: b.id))
    params = renamed.params
    digest = _digest(params, blocks)
    return ESequence(params, blocks, digest)


def to_function(s: ESequence, name: str = "s") -> Function:
    """Materialize the sequence as a function; inverts `from_function`."""
    return Function(name, s.params, 0, s.blocks)


def canonical_hash(s: ESequence) -> str:
    """Deterministic structural digest, stable across processes."""
    return _digest(s.params, s.blocks)


def _digest(params, blocks) -> str:
    text = print_function(Function("s", params, 0, blocks))
    return hashlib.blake2b(text.encode(), digest_size=DIGEST_BYTES).hexdigest()


def analyze(s: ESequence) -> Analyses:
    """CFG analyses of the sequence's function form."""
    return Analyses.compute(to_function(s))


def to_dot(s: ESequence, name: str = "seq") -> str:
    """Graphviz rendering: one node per block, branch edges labeled."""
    lines = [f'digraph "{name}" {{', "  node [shape=box, fontname=monospace];"]
    for b in s.blocks:
        text = [f"b{b.id}({', '.join(f'v{v}' for v in b.params)}):"]
        text.extend(render_instruction(i) for i in b.instructions)
        text.append(render_terminator(b.terminator))
        label = "\\l".join(text) + "\\l"
        lines.append(f'  b{b.id} [label="{label}"];')
    for b in s.blocks:
        term = b.terminator
        if isinstance(term, Jump):
            lines.append(f"  b{b.id} -> b{term.target};")
        elif isinstance(term, BrIf):
            lines.append(f'  b{b.id} -> b{term.then_target} [label="then"];')
            lines.append(f'  b{b.id} -> b{term.else_target} [label="else"];')
    lines.append("}")
    return "\n".join(lines)
