"""Restricted ANF control-flow IR: types, text format, validation, interpreter.

Every basic block holds at most one instruction plus a parameterized
terminator; values are in SSA form realized with block parameters instead of
phi nodes. The textual grammar:

    file      := func+
    func      := "func" "@" ident "(" valuelist? ")" "{" block+ "}"
    block     := blockref "(" valuelist? ")" ":" instr? term
    instr     := value "=" opcode operandlist
    opcode    := "iconst" int | "iadd" | "isub" | "imul" | "icmp_slt"
               | "sideeffect"
    term      := "jump" blockarg | "brif" value "," blockarg "," blockarg
               | "ret" valuelist?
    blockarg  := blockref "(" valuelist? ")"
    value     := "v" nat        blockref := "b" nat

Comments run from ";" to end of line. Integers are 64-bit two's-complement
with wrapping arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

ValueId = int
BlockId = int

OPCODE_ARITY = {
    "iconst": 0,
    "iadd": 2,
    "isub": 2,
    "imul": 2,
    "icmp_slt": 2,
    "sideeffect": 1,
}

# The only impure opcode; everything else may be re-executed or duplicated
# freely.
IMPURE_OPCODES = frozenset({"sideeffect"})

I64_MIN = -(1 << 63)
I64_MAX = (1 << 63) - 1


def wrap64(x: int) -> int:
    """Reduce x into signed 64-bit two's-complement range."""
    return ((x - I64_MIN) & ((1 << 64) - 1)) + I64_MIN


@dataclass(frozen=True)
class Instruction:
    """A single operation. `imm` is set exactly for `iconst`."""

    opcode: str
    result: ValueId
    operands: tuple[ValueId, ...] = ()
    imm: int | None = None


@dataclass(frozen=True)
class Jump:
    target: BlockId
    args: tuple[ValueId, ...] = ()


@dataclass(frozen=True)
class BrIf:
    cond: ValueId
    then_target: BlockId
    then_args: tuple[ValueId, ...]
    else_target: BlockId
    else_args: tuple[ValueId, ...]


@dataclass(frozen=True)
class Ret:
    args: tuple[ValueId, ...] = ()


Terminator = Jump | BrIf | Ret


@dataclass(frozen=True)
class Block:
    """A basic block.

    `instructions` is meant to hold zero or one entry; longer tuples are
    representable so `validate` can flag them on programmatically built
    functions.
    """

    id: BlockId
    params: tuple[ValueId, ...]
    instructions: tuple[Instruction, ...]
    terminator: Terminator

    @property
    def instruction(self) -> Instruction | None:
        return self.instructions[0] if self.instructions else None


@dataclass(frozen=True)
class Function:
    """A control-flow graph; `params` mirrors the entry block's params."""

    name: str
    params: tuple[ValueId, ...]
    entry: BlockId
    blocks: tuple[Block, ...]
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {b.id: b for b in self.blocks})

    def block(self, bid: BlockId) -> Block:
        return self._by_id[bid]

    def has_block(self, bid: BlockId) -> bool:
        return bid in self._by_id


@dataclass(frozen=True)
class Returned:
    values: tuple[int, ...]
    effects: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class FuelExhausted:
    pass


InterpResult = Returned | FuelExhausted


def terminator_targets(term: Terminator) -> list[tuple[BlockId, tuple[ValueId, ...]]]:
    """Successor edges in canonical order (brif: then before else)."""
    if isinstance(term, Jump):
        return [(term.target, term.args)]
    if isinstance(term, BrIf):
        return [(term.then_target, term.then_args), (term.else_target, term.else_args)]
    return []


def terminator_values(term: Terminator) -> list[ValueId]:
    """Every value the terminator reads, in a fixed order."""
    if isinstance(term, Jump):
        return list(term.args)
    if isinstance(term, BrIf):
        return [term.cond, *term.then_args, *term.else_args]
    return list(term.args)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int = 1):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Parsing


class _LineScanner:
    """Cursor over one logical line, tracking columns for diagnostics."""

    def __init__(self, text: str, line_no: int):
        self.text = text
        self.line_no = line_no
        self.pos = 0

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.line_no, self.pos + 1)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def expect_end(self):
        if not self.at_end():
            raise self.error(f"trailing input: {self.text[self.pos:]!r}")

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, literal: str):
        self.skip_ws()
        if not self.text.startswith(literal, self.pos):
            raise self.error(f"expected {literal!r}")
        self.pos += len(literal)

    def try_take(self, literal: str) -> bool:
        self.skip_ws()
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def word(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "_"
        ):
            self.pos += 1
        if self.pos == start:
            raise self.error("expected identifier")
        return self.text[start : self.pos]

    def integer(self) -> int:
        self.skip_ws()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] == "-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start or self.text[start : self.pos] == "-":
            raise self.error("expected integer")
        return int(self.text[start : self.pos])

    def indexed(self, prefix: str, what: str) -> int:
        self.skip_ws()
        start = self.pos
        if not self.text.startswith(prefix, self.pos):
            raise self.error(f"expected {what}")
        self.pos += len(prefix)
        digits = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == digits:
            self.pos = start
            raise self.error(f"expected {what}")
        return int(self.text[digits : self.pos])

    def value(self) -> ValueId:
        return self.indexed("v", "value (vN)")

    def blockref(self) -> BlockId:
        return self.indexed("b", "block (bN)")

    def valuelist(self) -> tuple[ValueId, ...]:
        if self.at_end() or self.peek() in "),":
            return ()
        vals = [self.value()]
        while self.try_take(","):
            vals.append(self.value())
        return tuple(vals)

    def paren_valuelist(self) -> tuple[ValueId, ...]:
        self.take("(")
        if self.try_take(")"):
            return ()
        vals = self.valuelist()
        self.take(")")
        return vals

    def blockarg(self) -> tuple[BlockId, tuple[ValueId, ...]]:
        return self.blockref(), self.paren_valuelist()


def _logical_lines(text: str):
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0]
        if line.strip():
            yield _LineScanner(line, i)


class _FunctionParser:
    def __init__(self, lines: list[_LineScanner]):
        self.lines = lines
        self.index = 0

    def at_end(self) -> bool:
        return self.index >= len(self.lines)

    def next_line(self, expectation: str) -> _LineScanner:
        if self.at_end():
            last = self.lines[-1].line_no if self.lines else 1
            raise ParseError(f"unexpected end of input, expected {expectation}", last)
        line = self.lines[self.index]
        self.index += 1
        return line

    def parse_function(self) -> Function:
        header = self.next_line("'func'")
        header.take("func")
        header.take("@")
        name = header.word()
        params = header.paren_valuelist()
        header.take("{")
        header.expect_end()

        blocks: list[Block] = []
        while True:
            line = self.next_line("block or '}'")
            if line.try_take("}"):
                line.expect_end()
                break
            blocks.append(self.parse_block(line))
        if not blocks:
            raise ParseError("function has no blocks", header.line_no)

        f = Function(name, params, blocks[0].id, tuple(blocks))
        violations = validate(f)
        if violations:
            raise ParseError(
                f"invalid function @{name}: " + "; ".join(violations), header.line_no
            )
        return f

    def parse_block(self, line: _LineScanner) -> Block:
        bid = line.blockref()
        params = line.paren_valuelist()
        line.take(":")
        line.expect_end()

        body = self.next_line("instruction or terminator")
        instrs: tuple[Instruction, ...] = ()
        if body.peek() == "v":
            instrs = (self.parse_instruction(body),)
            body = self.next_line("terminator")
        term = self.parse_terminator(body)
        return Block(bid, params, instrs, term)

    def parse_instruction(self, line: _LineScanner) -> Instruction:
        result = line.value()
        line.take("=")
        opcode = line.word()
        if opcode not in OPCODE_ARITY:
            raise line.error(f"unknown opcode {opcode!r}")
        if opcode == "iconst":
            imm = line.integer()
            if not I64_MIN <= imm <= I64_MAX:
                raise line.error("iconst immediate out of 64-bit range")
            line.expect_end()
            return Instruction(opcode, result, (), imm)
        operands = line.valuelist()
        line.expect_end()
        if len(operands) != OPCODE_ARITY[opcode]:
            raise line.error(
                f"{opcode} expects {OPCODE_ARITY[opcode]} operands, got {len(operands)}"
            )
        return Instruction(opcode, result, operands)

    def parse_terminator(self, line: _LineScanner) -> Terminator:
        kind = line.word()
        if kind == "jump":
            target, args = line.blockarg()
            line.expect_end()
            return Jump(target, args)
        if kind == "brif":
            cond = line.value()
            line.take(",")
            then_target, then_args = line.blockarg()
            line.take(",")
            else_target, else_args = line.blockarg()
            line.expect_end()
            return BrIf(cond, then_target, then_args, else_target, else_args)
        if kind == "ret":
            args = line.valuelist()
            line.expect_end()
            return Ret(args)
        raise line.error(f"expected terminator, got {kind!r}")


def parse_file(text: str) -> list[Function]:
    """Parse every function in the text, in order."""
    parser = _FunctionParser(list(_logical_lines(text)))
    functions: list[Function] = []
    seen = set()
    while not parser.at_end():
        f = parser.parse_function()
        if f.name in seen:
            raise ParseError(f"duplicate function name @{f.name}", 1)
        seen.add(f.name)
        functions.append(f)
    if not functions:
        raise ParseError("no functions found", 1)
    return functions


def parse_function(text: str) -> Function:
    """Parse text containing exactly one function."""
    functions = parse_file(text)
    if len(functions) != 1:
        raise ParseError(f"expected exactly one function, found {len(functions)}", 1)
    return functions[0]


# ---------------------------------------------------------------------------
# Printing


def render_value(v: ValueId) -> str:
    return f"v{v}"


def _render_valuelist(vals) -> str:
    return ", ".join(render_value(v) for v in vals)


def _render_blockarg(target: BlockId, args) -> str:
    return f"b{target}({_render_valuelist(args)})"


def render_instruction(instr: Instruction) -> str:
    if instr.opcode == "iconst":
        return f"{render_value(instr.result)} = iconst {instr.imm}"
    return f"{render_value(instr.result)} = {instr.opcode} {_render_valuelist(instr.operands)}"


def render_terminator(term: Terminator) -> str:
    if isinstance(term, Jump):
        return f"jump {_render_blockarg(term.target, term.args)}"
    if isinstance(term, BrIf):
        return (
            f"brif {render_value(term.cond)}, "
            f"{_render_blockarg(term.then_target, term.then_args)}, "
            f"{_render_blockarg(term.else_target, term.else_args)}"
        )
    if term.args:
        return f"ret {_render_valuelist(term.args)}"
    return "ret"


def print_function(f: Function) -> str:
    """Canonical text: blocks in ascending id, two-space indented statements."""
    lines = [f"func @{f.name}({_render_valuelist(f.params)}) {{"]
    for block in sorted(f.blocks, key=lambda b: b.id):
        lines.append(f"b{block.id}({_render_valuelist(block.params)}):")
        for instr in block.instructions:
            lines.append(f"  {render_instruction(instr)}")
        lines.append(f"  {render_terminator(block.terminator)}")
    lines.append("}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Validation


def validate(f: Function) -> list[str]:
    """Return every violated IR invariant; an empty list means valid."""
    violations: list[str] = []

    ids = [b.id for b in f.blocks]
    for bid in sorted({i for i in ids if ids.count(i) > 1}):
        violations.append(f"duplicate block id b{bid}")
    if any(b.id < 0 for b in f.blocks):
        violations.append("negative block id")
    if violations:
        return violations

    if not f.has_block(f.entry):
        violations.append(f"entry b{f.entry} not defined")
        return violations

    entry = f.block(f.entry)
    if f.params != entry.params:
        violations.append("function params differ from entry block params")

    # Definition sites: block params and instruction results.
    defs: dict[ValueId, int] = {}
    for b in f.blocks:
        for v in b.params:
            defs[v] = defs.get(v, 0) + 1
        for instr in b.instructions:
            defs[instr.result] = defs.get(instr.result, 0) + 1
    for v in sorted(v for v, n in defs.items() if n > 1):
        violations.append(f"{render_value(v)}: defined more than once")
    if any(v < 0 for v in defs):
        violations.append("negative value id")

    targets_ok = True
    for b in sorted(f.blocks, key=lambda blk: blk.id):
        if len(b.instructions) > 1:
            violations.append(f"b{b.id}: ANF: >1 instruction")
        for instr in b.instructions:
            if instr.opcode not in OPCODE_ARITY:
                violations.append(f"b{b.id}: unknown opcode {instr.opcode!r}")
                continue
            arity = OPCODE_ARITY[instr.opcode]
            if len(instr.operands) != arity:
                violations.append(
                    f"b{b.id}: {instr.opcode} expects {arity} operands, "
                    f"got {len(instr.operands)}"
                )
            if instr.opcode == "iconst":
                if instr.imm is None:
                    violations.append(f"b{b.id}: iconst without immediate")
                elif not I64_MIN <= instr.imm <= I64_MAX:
                    violations.append(f"b{b.id}: iconst immediate out of 64-bit range")
            elif instr.imm is not None:
                violations.append(f"b{b.id}: {instr.opcode} carries an immediate")

        for target, args in terminator_targets(b.terminator):
            if not f.has_block(target):
                violations.append(f"b{b.id}: jump to undefined block b{target}")
                targets_ok = False
            elif len(args) != len(f.block(target).params):
                violations.append(
                    f"b{b.id}: terminator arity: b{target} expects "
                    f"{len(f.block(target).params)} args, got {len(args)}"
                )
        term = b.terminator
        if (
            isinstance(term, BrIf)
            and term.then_target == term.else_target
            and term.then_args != term.else_args
        ):
            violations.append(f"b{b.id}: brif targets equal but args differ")

    if not targets_ok:
        return violations

    # Reachability and predecessor structure.
    preds: dict[BlockId, set[BlockId]] = {b.id: set() for b in f.blocks}
    for b in f.blocks:
        for target, _ in terminator_targets(b.terminator):
            preds[target].add(b.id)
    reachable = {f.entry}
    stack = [f.entry]
    while stack:
        bid = stack.pop()
        for target, _ in terminator_targets(f.block(bid).terminator):
            if target not in reachable:
                reachable.add(target)
                stack.append(target)
    if preds[f.entry]:
        violations.append(f"entry block b{f.entry} has predecessors")
    for b in sorted(f.blocks, key=lambda blk: blk.id):
        if b.id not in reachable:
            violations.append(f"b{b.id}: unreachable")

    # Forward availability: a use is legal iff its value is defined on every
    # path from entry (equivalent to dominance under single definitions).
    all_defs = set(defs)
    avail_in: dict[BlockId, set[ValueId]] = {
        bid: all_defs.copy() for bid in reachable
    }
    avail_in[f.entry] = set()
    changed = True
    while changed:
        changed = False
        for bid in reachable:
            if bid == f.entry:
                continue
            incoming = [
                avail_in[p] | _block_defs(f.block(p)) for p in preds[bid] if p in reachable
            ]
            new = set.intersection(*incoming) if incoming else set()
            if new != avail_in[bid]:
                avail_in[bid] = new
                changed = True

    for b in sorted(f.blocks, key=lambda blk: blk.id):
        if b.id not in reachable:
            continue
        scope = avail_in[b.id] | set(b.params)
        for instr in b.instructions:
            for v in instr.operands:
                violations.extend(_check_use(b, v, scope, all_defs))
            scope = scope | {instr.result}
        for v in terminator_values(b.terminator):
            violations.extend(_check_use(b, v, scope, all_defs))

    return violations


def _block_defs(b: Block) -> set[ValueId]:
    out = set(b.params)
    for instr in b.instructions:
        out.add(instr.result)
    return out


def _check_use(b: Block, v: ValueId, scope: set, all_defs: set) -> list[str]:
    if v in scope:
        return []
    if v not in all_defs:
        return [f"b{b.id}: use of undefined value {render_value(v)}"]
    return [f"b{b.id}: use of {render_value(v)} not dominated by its definition"]


# ---------------------------------------------------------------------------
# Interpretation


def interpret(f: Function, args: list[int], fuel: int) -> InterpResult:
    """Small-step execution; each entered block consumes one unit of fuel."""
    if len(args) != len(f.params):
        raise ValueError(
            f"@{f.name} takes {len(f.params)} arguments, got {len(args)}"
        )
    if fuel <= 0:
        raise ValueError("fuel must be positive")

    env: dict[ValueId, int] = {}
    effects: list[tuple[str, int]] = []
    current = f.entry
    incoming = tuple(wrap64(a) for a in args)

    while True:
        if fuel == 0:
            return FuelExhausted()
        fuel -= 1
        block = f.block(current)
        env.update(zip(block.params, incoming))

        for instr in block.instructions:
            env[instr.result] = _step(instr, env, effects)

        term = block.terminator
        if isinstance(term, Ret):
            return Returned(tuple(env[v] for v in term.args), tuple(effects))
        if isinstance(term, Jump):
            current, arg_ids = term.target, term.args
        else:
            if env[term.cond] != 0:
                current, arg_ids = term.then_target, term.then_args
            else:
                current, arg_ids = term.else_target, term.else_args
        incoming = tuple(env[v] for v in arg_ids)


def _step(instr: Instruction, env: dict, effects: list) -> int:
    op = instr.opcode
    if op == "iconst":
        return wrap64(instr.imm)
    if op == "sideeffect":
        value = env[instr.operands[0]]
        effects.append(("eff", value))
        return value
    a, b = (env[v] for v in instr.operands)
    if op == "iadd":
        return wrap64(a + b)
    if op == "isub":
        return wrap64(a - b)
    if op == "imul":
        return wrap64(a * b)
    if op == "icmp_slt":
        return 1 if a < b else 0
    raise ValueError(f"unknown opcode {op!r}")


# ---------------------------------------------------------------------------
# Structural renaming (used by canonicalization and by tests)


def remap(
    f: Function,
    value_map: dict[ValueId, ValueId],
    block_map: dict[BlockId, BlockId],
    name: str | None = None,
) -> Function:
    """Rewrite every value/block id through the given total maps."""

    def vm(v: ValueId) -> ValueId:
        return value_map[v]

    def bm(b: BlockId) -> BlockId:
        return block_map[b]

    def remap_term(term: Terminator) -> Terminator:
        if isinstance(term, Jump):
            return Jump(bm(term.target), tuple(vm(v) for v in term.args))
        if isinstance(term, BrIf):
            return BrIf(
                vm(term.cond),
                bm(term.then_target),
                tuple(vm(v) for v in term.then_args),
                bm(term.else_target),
                tuple(vm(v) for v in term.else_args),
            )
        return Ret(tuple(vm(v) for v in term.args))

    blocks = tuple(
        Block(
            bm(b.id),
            tuple(vm(v) for v in b.params),
            tuple(
                Instruction(i.opcode, vm(i.result), tuple(vm(v) for v in i.operands), i.imm)
                for i in b.instructions
            ),
            remap_term(b.terminator),
        )
        for b in f.blocks
    )
    return Function(
        name if name is not None else f.name,
        tuple(vm(v) for v in f.params),
        bm(f.entry),
        blocks,
    )
