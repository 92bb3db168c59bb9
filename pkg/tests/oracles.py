"""Independent brute-force oracles shared by the unit and acceptance tests.

Each reimplements a property from first principles (graph disconnection,
exhaustive enumeration) rather than reusing the library's algorithms.
"""

import itertools

from epathopt import PatOp, PatVar, analyze, dominators, terminator_targets


def _edges(f):
    out = []
    for b in f.blocks:
        for target, _ in terminator_targets(b.terminator):
            out.append((b.id, target))
    return out


def brute_dominator_sets(f):
    """b dominates c iff removing b disconnects c from entry (plus b dom b)."""
    ids = [b.id for b in f.blocks]
    edges = _edges(f)

    def reachable_without(removed):
        seen = set()
        if f.entry == removed:
            return seen
        stack = [f.entry]
        seen.add(f.entry)
        while stack:
            cur = stack.pop()
            for s, t in edges:
                if s == cur and t != removed and t not in seen:
                    seen.add(t)
                    stack.append(t)
        return seen

    dom = {c: {c} for c in ids}
    for b in ids:
        for c in set(ids) - reachable_without(b):
            dom[c].add(b)
    return dom


def idom_to_sets(f):
    """Dominator sets derived from the immediate-dominator chain."""
    idom = dominators(f)
    sets = {}
    for b in idom:
        chain = {b}
        cur = b
        while idom[cur] != cur:
            cur = idom[cur]
            chain.add(cur)
        sets[b] = chain
    return sets


def _pattern_op_nodes(node, path=()):
    out = [(node, path)]
    for i, sub in enumerate(node.operands):
        if isinstance(sub, PatOp):
            out.extend(_pattern_op_nodes(sub, path + (i,)))
    return out


def brute_matches(pat, s):
    """Enumerate every assignment of pattern nodes to instructions and keep
    the consistent ones; independent of the recursive matcher."""
    blocks = [b for b in s.blocks if b.instruction]
    instrs = [b.instruction for b in blocks]
    position = {b.instruction.result: i for i, b in enumerate(blocks)}
    nodes = _pattern_op_nodes(pat.tree)

    found = []
    for assignment in itertools.product(instrs, repeat=len(nodes)):
        lookup = dict(zip((path for _, path in nodes), assignment))
        ok = True
        bindings = {}
        for (node, path), instr in zip(nodes, assignment):
            if instr.opcode != node.opcode:
                ok = False
                break
            if node.opcode == "iconst" and node.imm is not None:
                if isinstance(node.imm, str):
                    bindings[node.imm] = instr.imm
                elif instr.imm != node.imm:
                    ok = False
                    break
            for i, sub in enumerate(node.operands):
                if isinstance(sub, PatVar):
                    bindings[sub.name] = instr.operands[i]
                elif instr.operands[i] != lookup[path + (i,)].result:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            bindings[pat.root] = assignment[0].result
            found.append(bindings)
    found.sort(key=lambda m: position[m[pat.root]])
    return found


def brute_closure(seed, rules):
    """Exhaustive rewrite closure without any worklist bookkeeping."""
    seen = {seed.digest: seed}
    changed = True
    while changed:
        changed = False
        for s in list(seen.values()):
            for rule in rules:
                for out in rule.apply(s, analyze(s)):
                    if out.digest not in seen:
                        seen[out.digest] = out
                        changed = True
    return set(seen)
