"""Non-destructive, saturation-style optimization over a restricted ANF
control-flow IR: canonical sequences, a monotonic equivalence set, rewrite
rules (LICM, constant folding), and symbolic-cost extraction."""

from .analysis import (
    Analyses,
    InstrDef,
    InstrUse,
    IrreducibleError,
    LoopRegion,
    ParamDef,
    TermUse,
    def_use,
    dominators,
    find_back_edges,
    loop_regions,
    natural_loop,
    reverse_postorder,
)
from .cost import (
    CostPoly,
    CostTable,
    Ordering,
    compare,
    cost_of,
    default_cost_table,
    extract,
    load_cost_table,
    sort_by_cost,
)
from .epath import EPath, RewriteEdge, SaturationReport, new_epath, saturate
from .esequence import (
    ESequence,
    analyze,
    canonical_hash,
    from_function,
    to_dot,
    to_function,
)
from .ir import (
    Block,
    BrIf,
    Function,
    FuelExhausted,
    Instruction,
    InterpResult,
    Jump,
    ParseError,
    Ret,
    Returned,
    Terminator,
    interpret,
    parse_file,
    parse_function,
    print_function,
    remap,
    terminator_targets,
    terminator_values,
    validate,
    wrap64,
)
from .rewrite import (
    ExprPattern,
    LicmSplit,
    PatOp,
    PatVar,
    RULES,
    RewriteRule,
    apply_const_fold,
    apply_licm,
    classify_invariance,
    fold_constants,
    match_expression,
    match_loops,
    rules_named,
)

__all__ = [
    "Analyses",
    "Block",
    "BrIf",
    "CostPoly",
    "CostTable",
    "EPath",
    "ESequence",
    "ExprPattern",
    "Function",
    "FuelExhausted",
    "Instruction",
    "InstrDef",
    "InstrUse",
    "InterpResult",
    "IrreducibleError",
    "Jump",
    "LicmSplit",
    "LoopRegion",
    "Ordering",
    "ParamDef",
    "ParseError",
    "PatOp",
    "PatVar",
    "RULES",
    "Ret",
    "Returned",
    "RewriteEdge",
    "RewriteRule",
    "SaturationReport",
    "TermUse",
    "Terminator",
    "analyze",
    "apply_const_fold",
    "apply_licm",
    "canonical_hash",
    "classify_invariance",
    "compare",
    "cost_of",
    "def_use",
    "default_cost_table",
    "dominators",
    "extract",
    "find_back_edges",
    "fold_constants",
    "from_function",
    "interpret",
    "load_cost_table",
    "loop_regions",
    "match_expression",
    "match_loops",
    "natural_loop",
    "new_epath",
    "parse_file",
    "parse_function",
    "print_function",
    "remap",
    "terminator_targets",
    "terminator_values",
    "reverse_postorder",
    "rules_named",
    "saturate",
    "sort_by_cost",
    "to_dot",
    "to_function",
    "validate",
    "wrap64",
]
