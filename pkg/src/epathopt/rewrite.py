"""Rewrite rules over canonical sequences.

A rule is a pure function from one sequence to zero or more new, semantically
equivalent sequences; it never mutates its input. Shipped rules:

* ``licm``: hoist loop-invariant instructions into a preheader chain.
* ``constfold``: fold binary operations over two constants (exercises
  expression-level matching; kept deliberately small, no general dead-code
  elimination).
* ``broken``: deliberately unsound negative control for differential
  checking; never use outside tests or `check` runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .analysis import Analyses, InstrDef, LoopRegion
from .esequence import ESequence, analyze, from_function, to_function
from .ir import (
    Block,
    BlockId,
    BrIf,
    Function,
    IMPURE_OPCODES,
    Instruction,
    Jump,
    OPCODE_ARITY,
    Terminator,
    ValueId,
    terminator_targets,
    terminator_values,
    wrap64,
)


@dataclass(frozen=True)
class RewriteRule:
    name: str
    apply: Callable[[ESequence, Analyses], list[ESequence]]


@dataclass(frozen=True)
class LicmSplit:
    """Partition of a loop's instruction-bearing blocks into invariant and
    loop-dependent sets."""

    loop: LoopRegion
    invariant_blocks: tuple[BlockId, ...]
    variant_blocks: tuple[BlockId, ...]


# ---------------------------------------------------------------------------
# Expression-level matching


@dataclass(frozen=True)
class PatVar:
    """Binds any value (block parameter or instruction result)."""

    name: str


@dataclass(frozen=True)
class PatOp:
    """Matches an instruction by opcode; `imm` is an int literal, a binding
    name, or None (iconst only)."""

    opcode: str
    operands: tuple["PatOp | PatVar", ...] = ()
    imm: int | str | None = None


@dataclass(frozen=True)
class ExprPattern:
    """A linear pattern over the def-use graph; `root` names the binding that
    receives the matched root instruction's result."""

    root: str
    tree: PatOp

    def __post_init__(self):
        names = [self.root]

        def walk(node):
            if isinstance(node, PatVar):
                names.append(node.name)
                return
            if node.opcode not in OPCODE_ARITY:
                raise ValueError(f"unknown opcode in pattern: {node.opcode!r}")
            if len(node.operands) != OPCODE_ARITY[node.opcode]:
                raise ValueError(f"pattern arity mismatch for {node.opcode}")
            if node.imm is not None and node.opcode != "iconst":
                raise ValueError("only iconst patterns take an immediate")
            if isinstance(node.imm, str):
                names.append(node.imm)
            for sub in node.operands:
                walk(sub)

        walk(self.tree)
        if len(names) != len(set(names)):
            raise ValueError("pattern bindings must be linear")


def match_expression(pat: ExprPattern, s: ESequence) -> list[dict[str, int]]:
    """All embeddings of the pattern into the sequence's def-use graph.

    Operand order is respected (no commutativity); results are ordered by
    the root instruction's canonical block position. Binding values are
    ValueIds for PatVar bindings and immediates for iconst bindings.
    """
    instr_by_result: dict[ValueId, Instruction] = {}
    for b in s.blocks:
        if b.instruction:
            instr_by_result[b.instruction.result] = b.instruction

    matches = []
    for b in s.blocks:
        if not b.instruction:
            continue
        bindings: dict[str, int] = {}
        if _match_node(pat.tree, b.instruction, instr_by_result, bindings):
            bindings[pat.root] = b.instruction.result
            matches.append(bindings)
    return matches


def _match_node(p: PatOp, instr: Instruction, instr_by_result, bindings) -> bool:
    if instr.opcode != p.opcode:
        return False
    if p.opcode == "iconst" and p.imm is not None:
        if isinstance(p.imm, str):
            bindings[p.imm] = instr.imm
        elif instr.imm != p.imm:
            return False
    for sub, operand in zip(p.operands, instr.operands):
        if isinstance(sub, PatVar):
            bindings[sub.name] = operand
        else:
            defining = instr_by_result.get(operand)
            if defining is None:  # block parameter, not an instruction
                return False
            if not _match_node(sub, defining, instr_by_result, bindings):
                return False
    return True


# ---------------------------------------------------------------------------
# Control-flow matching and invariance classification


def match_loops(s: ESequence, analyses: Analyses | None = None) -> list[LoopRegion]:
    """All natural loops of the region, outermost first."""
    analyses = analyses or analyze(s)
    return list(analyses.loops)


def classify_invariance(
    loop: LoopRegion, s: ESequence, analyses: Analyses | None = None
) -> LicmSplit:
    """Fixpoint split: a block is invariant iff its instruction is pure and
    every operand is defined outside the loop or by an already-invariant
    block inside it."""
    analyses = analyses or analyze(s)
    f = analyses.function
    def_site = {v: site for v, (site, _) in analyses.def_use.items()}
    candidates = [bid for bid in sorted(loop.body) if f.block(bid).instruction]

    invariant: set[BlockId] = set()
    changed = True
    while changed:
        changed = False
        for bid in candidates:
            if bid in invariant:
                continue
            instr = f.block(bid).instruction
            if instr.opcode in IMPURE_OPCODES:
                continue
            if all(_invariant_operand(def_site[v], loop, invariant) for v in instr.operands):
                invariant.add(bid)
                changed = True

    return LicmSplit(
        loop,
        tuple(b for b in candidates if b in invariant),
        tuple(b for b in candidates if b not in invariant),
    )


def _invariant_operand(site, loop: LoopRegion, invariant: set) -> bool:
    if site.block not in loop.body:
        return True
    return isinstance(site, InstrDef) and site.block in invariant


# ---------------------------------------------------------------------------
# Function surgery shared by the rules


@dataclass
class _WorkBlock:
    params: tuple[ValueId, ...]
    instruction: Instruction | None
    terminator: Terminator


class _Editor:
    """Mutable scratch copy of a function for building one rewrite result."""

    def __init__(self, f: Function):
        self.name = f.name
        self.entry = f.entry
        self.blocks: dict[BlockId, _WorkBlock] = {
            b.id: _WorkBlock(b.params, b.instruction, b.terminator) for b in f.blocks
        }
        self._next_block = max(self.blocks) + 1
        defined = [v for b in f.blocks for v in b.params]
        defined += [b.instruction.result for b in f.blocks if b.instruction]
        self._next_value = max(defined, default=-1) + 1

    def fresh_block(self) -> BlockId:
        self._next_block += 1
        return self._next_block - 1

    def fresh_value(self) -> ValueId:
        self._next_value += 1
        return self._next_value - 1

    def preds(self, bid: BlockId) -> list[BlockId]:
        return sorted(
            p
            for p, wb in self.blocks.items()
            if any(t == bid for t, _ in terminator_targets(wb.terminator))
        )

    def use_count(self, v: ValueId) -> int:
        n = 0
        for wb in self.blocks.values():
            if wb.instruction:
                n += wb.instruction.operands.count(v)
            n += terminator_values(wb.terminator).count(v)
        return n

    def defining_block(self, v: ValueId) -> BlockId | None:
        for bid, wb in self.blocks.items():
            if wb.instruction and wb.instruction.result == v:
                return bid
        return None

    def try_splice(self, bid: BlockId) -> bool:
        """Remove a parameterless jump-only block, rewiring its predecessors
        to its target. Refuses shapes the IR cannot express (a brif whose
        branches would collapse onto one target with differing args)."""
        wb = self.blocks[bid]
        if wb.params or not isinstance(wb.terminator, Jump):
            return False
        target, args = wb.terminator.target, wb.terminator.args
        if target == bid:
            return False

        updates: dict[BlockId, Terminator] = {}
        for p in self.preds(bid):
            if p == bid:
                continue
            new_term = _redirect(self.blocks[p].terminator, bid, target, lambda _: args)
            if (
                isinstance(new_term, BrIf)
                and new_term.then_target == new_term.else_target
                and new_term.then_args != new_term.else_args
            ):
                return False
            updates[p] = new_term

        for p, new_term in updates.items():
            self.blocks[p].terminator = new_term
        if bid == self.entry:
            assert not args
            self.entry = target
        del self.blocks[bid]
        return True

    def finish(self) -> Function:
        blocks = tuple(
            Block(bid, wb.params, (wb.instruction,) if wb.instruction else (), wb.terminator)
            for bid, wb in sorted(self.blocks.items())
        )
        return Function(self.name, self.blocks[self.entry].params, self.entry, blocks)


def _redirect(term: Terminator, old: BlockId, new: BlockId, make_args) -> Terminator:
    if isinstance(term, Jump):
        if term.target == old:
            return Jump(new, make_args(term.args))
        return term
    if isinstance(term, BrIf):
        then_target, then_args = term.then_target, term.then_args
        else_target, else_args = term.else_target, term.else_args
        if then_target == old:
            then_target, then_args = new, make_args(then_args)
        if else_target == old:
            else_target, else_args = new, make_args(else_args)
        return BrIf(term.cond, then_target, then_args, else_target, else_args)
    return term


# ---------------------------------------------------------------------------
# LICM


def apply_licm(s: ESequence, analyses: Analyses | None = None) -> list[ESequence]:
    """One hoisted variant per loop with a non-empty invariant set.

    All invariant instructions of a loop move together, in dependency order,
    into a preheader chain placed on the loop-entry path; the loop keeps only
    its loop-dependent blocks. Returns [] when nothing is hoistable.
    """
    analyses = analyses or analyze(s)
    out = []
    for loop in analyses.loops:
        split = classify_invariance(loop, s, analyses)
        if split.invariant_blocks:
            out.append(from_function(_hoist(analyses.function, loop, split)))
    return out


def _hoist(f: Function, loop: LoopRegion, split: LicmSplit) -> Function:
    ed = _Editor(f)
    header = loop.header
    hoisted = [f.block(bid).instruction for bid in split.invariant_blocks]

    # Detach invariant instructions. The header must keep its place; blocks
    # that cannot be spliced out stay behind as empty pass-throughs.
    for bid in split.invariant_blocks:
        ed.blocks[bid].instruction = None
        if bid != header:
            ed.try_splice(bid)

    # The entry block has no predecessors, so it is never a loop header and
    # every header has at least one predecessor outside the body.
    entry_preds = [p for p in ed.preds(header) if p not in loop.body]
    chain = [ed.fresh_block() for _ in hoisted]

    if len(entry_preds) == 1:
        # Splice the chain onto the single entry edge; the edge's arguments
        # move to the chain's final jump.
        p = entry_preds[0]
        term = ed.blocks[p].terminator
        final_args = next(a for t, a in terminator_targets(term) if t == header)
        ed.blocks[p].terminator = _redirect(term, header, chain[0], lambda _: ())
    else:
        # Multiple entry edges merge through one forwarding block so hoisted
        # results keep dominating their uses inside the loop.
        merge = ed.fresh_block()
        fresh = tuple(ed.fresh_value() for _ in ed.blocks[header].params)
        ed.blocks[merge] = _WorkBlock(fresh, None, Jump(chain[0], ()))
        for p in entry_preds:
            ed.blocks[p].terminator = _redirect(
                ed.blocks[p].terminator, header, merge, lambda a: a
            )
        final_args = fresh

    for i, (bid, instr) in enumerate(zip(chain, hoisted)):
        term = Jump(chain[i + 1], ()) if i + 1 < len(chain) else Jump(header, final_args)
        ed.blocks[bid] = _WorkBlock((), instr, term)

    return ed.finish()


# ---------------------------------------------------------------------------
# Constant folding


_FOLDABLE = ("iadd", "isub", "imul", "icmp_slt")


def fold_constants(opcode: str, a: int, b: int) -> int:
    """Wrapping two's-complement fold; icmp_slt yields 1/0."""
    if opcode == "iadd":
        return wrap64(a + b)
    if opcode == "isub":
        return wrap64(a - b)
    if opcode == "imul":
        return wrap64(a * b)
    if opcode == "icmp_slt":
        return 1 if a < b else 0
    raise ValueError(f"not foldable: {opcode!r}")


def apply_const_fold(s: ESequence, analyses: Analyses | None = None) -> list[ESequence]:
    """One variant per `op(iconst, iconst)` match, with the matched block
    rewritten to the folded constant and dead constant feeders straightened
    out of the block chain."""
    out = []
    for opcode in _FOLDABLE:
        pattern = ExprPattern(
            "root",
            PatOp(opcode, (PatOp("iconst", imm="a"), PatOp("iconst", imm="b"))),
        )
        for m in match_expression(pattern, s):
            out.append(_fold_at(s, opcode, m))
    return out


def _fold_at(s: ESequence, opcode: str, m: dict[str, int]) -> ESequence:
    ed = _Editor(to_function(s))
    root_bid = ed.defining_block(m["root"])
    old = ed.blocks[root_bid].instruction
    folded = fold_constants(opcode, m["a"], m["b"])
    ed.blocks[root_bid].instruction = Instruction("iconst", old.result, (), folded)

    for feeder in dict.fromkeys(old.operands):
        if ed.use_count(feeder) == 0:
            feeder_bid = ed.defining_block(feeder)
            if feeder_bid is not None:
                ed.try_splice(feeder_bid)
    return from_function(ed.finish())


# ---------------------------------------------------------------------------
# Negative control


def apply_broken(s: ESequence, analyses: Analyses | None = None) -> list[ESequence]:
    """Unsound on purpose: bumps the first constant it finds. Exists so the
    differential checker has something to catch."""
    for b in s.blocks:
        instr = b.instruction
        if instr and instr.opcode == "iconst":
            ed = _Editor(to_function(s))
            ed.blocks[b.id].instruction = Instruction(
                "iconst", instr.result, (), wrap64(instr.imm + 1)
            )
            return [from_function(ed.finish())]
    return []


RULES: dict[str, RewriteRule] = {
    "licm": RewriteRule("licm", apply_licm),
    "constfold": RewriteRule("constfold", apply_const_fold),
    "broken": RewriteRule("broken", apply_broken),
}


def rules_named(names: list[str]) -> list[RewriteRule]:
    unknown = [n for n in names if n not in RULES]
    if unknown:
        raise ValueError(f"unknown rules: {', '.join(unknown)}")
    return [RULES[n] for n in names]
