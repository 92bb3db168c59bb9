"""Classical CFG analyses: reverse postorder, dominators, back edges,
natural loops, and def-use chains.

Only reducible control flow is supported; irreducible graphs raise
IrreducibleError rather than being silently mishandled.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ir import Block, BlockId, Function, ValueId, terminator_targets, terminator_values


class IrreducibleError(Exception):
    """A retreating edge whose target does not dominate its source."""

    def __init__(self, edge: tuple[BlockId, BlockId]):
        src, dst = edge
        super().__init__(
            f"irreducible control flow: retreating edge b{src} -> b{dst} "
            "does not target a dominator"
        )
        self.edge = edge


@dataclass(frozen=True)
class LoopRegion:
    """A natural loop; back edges sharing a header are merged into one region."""

    header: BlockId
    body: frozenset[BlockId]
    back_edges: frozenset[tuple[BlockId, BlockId]]
    header_params: tuple[ValueId, ...]


# Definition and use sites for def-use chains.


@dataclass(frozen=True)
class ParamDef:
    block: BlockId
    index: int


@dataclass(frozen=True)
class InstrDef:
    block: BlockId


@dataclass(frozen=True)
class InstrUse:
    block: BlockId
    operand: int


@dataclass(frozen=True)
class TermUse:
    block: BlockId
    slot: int


DefSite = ParamDef | InstrDef
UseSite = InstrUse | TermUse


def successors(f: Function, bid: BlockId) -> list[BlockId]:
    return [t for t, _ in terminator_targets(f.block(bid).terminator)]


def predecessors(f: Function) -> dict[BlockId, list[BlockId]]:
    """Predecessor lists in deterministic (block, edge) order."""
    preds: dict[BlockId, list[BlockId]] = {b.id: [] for b in f.blocks}
    for b in sorted(f.blocks, key=lambda blk: blk.id):
        for target, _ in terminator_targets(b.terminator):
            if b.id not in preds[target]:
                preds[target].append(b.id)
    return preds


def reverse_postorder(f: Function) -> list[BlockId]:
    """Entry-first block order; successor ties follow terminator order
    (jump target; brif then-target before else-target)."""
    order: list[BlockId] = []
    visited = {f.entry}
    # DFS explores successors in reverse (pop from the end) so the final
    # reversed postorder lists them in terminator order.
    stack: list[tuple[BlockId, list[BlockId]]] = [(f.entry, successors(f, f.entry))]
    while stack:
        bid, pending = stack[-1]
        while pending:
            nxt = pending.pop()
            if nxt not in visited:
                visited.add(nxt)
                stack.append((nxt, successors(f, nxt)))
                break
        else:
            order.append(bid)
            stack.pop()
    order.reverse()
    return order


def dominators(f: Function) -> dict[BlockId, BlockId]:
    """Immediate dominators via fixed-point iteration over reverse postorder.

    The entry block maps to itself.
    """
    rpo = reverse_postorder(f)
    index = {bid: i for i, bid in enumerate(rpo)}
    preds = predecessors(f)
    idom: dict[BlockId, BlockId] = {f.entry: f.entry}

    def intersect(u: BlockId, v: BlockId) -> BlockId:
        while u != v:
            while index[u] > index[v]:
                u = idom[u]
            while index[v] > index[u]:
                v = idom[v]
        return u

    changed = True
    while changed:
        changed = False
        for bid in rpo[1:]:
            candidates = [p for p in preds[bid] if p in idom]
            new = candidates[0]
            for p in candidates[1:]:
                new = intersect(new, p)
            if idom.get(bid) != new:
                idom[bid] = new
                changed = True
    return idom


def dominates(idom: dict[BlockId, BlockId], a: BlockId, b: BlockId) -> bool:
    """Whether a dominates b under the given immediate-dominator map."""
    while True:
        if a == b:
            return True
        parent = idom[b]
        if parent == b:
            return False
        b = parent


def find_back_edges(f: Function) -> set[tuple[BlockId, BlockId]]:
    """Every edge whose target dominates its source.

    Raises IrreducibleError if some retreating DFS edge is not such a back
    edge, naming the offending edge.
    """
    idom = dominators(f)

    on_stack = {f.entry}
    visited = {f.entry}
    stack: list[tuple[BlockId, list[BlockId]]] = [(f.entry, successors(f, f.entry))]
    while stack:
        bid, pending = stack[-1]
        while pending:
            nxt = pending.pop(0)
            if nxt in on_stack and not dominates(idom, nxt, bid):
                raise IrreducibleError((bid, nxt))
            if nxt not in visited:
                visited.add(nxt)
                on_stack.add(nxt)
                stack.append((nxt, successors(f, nxt)))
                break
        else:
            on_stack.discard(bid)
            stack.pop()

    edges = set()
    for b in f.blocks:
        for target, _ in terminator_targets(b.terminator):
            if dominates(idom, target, b.id):
                edges.add((b.id, target))
    return edges


def natural_loop(f: Function, back_edge: tuple[BlockId, BlockId]) -> LoopRegion:
    """The loop of the given back edge; all back edges into the same header
    contribute to one merged region."""
    all_back = find_back_edges(f)
    if back_edge not in all_back:
        raise ValueError(f"{back_edge} is not a back edge of @{f.name}")
    header = back_edge[1]
    merged = frozenset(e for e in all_back if e[1] == header)

    preds = predecessors(f)
    body = {header}
    work = [src for src, _ in merged]
    while work:
        bid = work.pop()
        if bid in body:
            continue
        body.add(bid)
        work.extend(preds[bid])
    return LoopRegion(header, frozenset(body), merged, f.block(header).params)


def loop_regions(f: Function) -> list[LoopRegion]:
    """All natural loops, outermost-first (ties broken by header id)."""
    back = sorted(find_back_edges(f))
    regions = []
    for header in sorted({t for _, t in back}):
        edge = next(e for e in back if e[1] == header)
        regions.append(natural_loop(f, edge))
    return sorted(regions, key=lambda r: (-len(r.body), r.header))


def def_use(f: Function) -> dict[ValueId, tuple[DefSite, tuple[UseSite, ...]]]:
    """Complete def-use chains, keyed by value."""
    defs: dict[ValueId, DefSite] = {}
    uses: dict[ValueId, list[UseSite]] = {}
    for b in sorted(f.blocks, key=lambda blk: blk.id):
        for i, v in enumerate(b.params):
            defs[v] = ParamDef(b.id, i)
            uses.setdefault(v, [])
        for instr in b.instructions:
            defs[instr.result] = InstrDef(b.id)
            uses.setdefault(instr.result, [])
    for b in sorted(f.blocks, key=lambda blk: blk.id):
        for instr in b.instructions:
            for i, v in enumerate(instr.operands):
                uses.setdefault(v, []).append(InstrUse(b.id, i))
        for slot, v in enumerate(terminator_values(b.terminator)):
            uses.setdefault(v, []).append(TermUse(b.id, slot))
    return {v: (defs[v], tuple(uses[v])) for v in defs}


@dataclass
class Analyses:
    """Per-function analysis bundle shared by rewrites and cost evaluation."""

    function: Function
    rpo: list[BlockId]
    idom: dict[BlockId, BlockId]
    back_edges: set[tuple[BlockId, BlockId]]
    loops: list[LoopRegion]
    def_use: dict[ValueId, tuple[DefSite, tuple[UseSite, ...]]]

    @classmethod
    def compute(cls, f: Function) -> "Analyses":
        return cls(
            function=f,
            rpo=reverse_postorder(f),
            idom=dominators(f),
            back_edges=find_back_edges(f),
            loops=loop_regions(f),
            def_use=def_use(f),
        )
