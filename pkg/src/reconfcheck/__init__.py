"""reconfcheck: design-time checking of component reconfiguration paths.

Reconfiguration paths — finite operation sequences, optionally ending in a
forever-repeated cycle — are modelled as deterministic lasso automata and
temporal properties are verified over them by a mark-based traversal,
cross-validated against a brute-force semantic oracle.
"""

from .adl import (
    AdlSyntaxError,
    AdlValidationError,
    RecipeSet,
    model_digest,
    parse_model,
    parse_recipes,
    print_model,
    print_recipes,
)
from .checker import (
    CheckError,
    CheckOptions,
    CheckStats,
    TraceWitness,
    Verdict,
    WitnessStep,
    check,
    check_after,
    check_always,
    check_before,
    check_eventually,
    is_suffix_monotone,
)
from .ftpl import (
    After,
    Always,
    Before,
    Eventually,
    EventSpec,
    FtplFormula,
    FtplSyntaxError,
    erasure_invariant,
    event_holds,
    mentions_params,
    parse_cp,
    parse_formula,
    print_cp,
    print_formula,
)
from .model import (
    Binding,
    Component,
    ComponentModel,
    CpEvalError,
    Delegation,
    Param,
    STARTED,
    STOPPED,
    erase_param_values,
    eval_cp,
    model_equal,
    validate_model,
)
from .oracle import ConcreteLasso, LassoStep, oracle_eval, oracle_verdict, \
    unfold_to_lasso
from .pathspec import (
    Mark,
    PathAutomaton,
    PathExpr,
    PathSyntaxError,
    as_path_expr,
    build_automaton,
    fresh_marks,
    parse_path,
    print_path,
    residual_from,
)
from .reconfig import (
    AddComponent,
    ApplicationOutcome,
    Bind,
    BinOp,
    Composite,
    EvolutionOperation,
    IntLiteral,
    ParamRef,
    Primitive,
    RUN,
    RemoveComponent,
    Run,
    SetParam,
    Start,
    Stop,
    Unbind,
    apply_evolution,
    apply_primitive,
    apply_sequence,
    is_idempotent_sequence,
    operation_table,
)

__version__ = "0.1.0"
