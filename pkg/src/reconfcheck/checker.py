"""Mark-based property checking over lasso automata.

The traversal mirrors a model checker's marking discipline: every operator
instance owns a fresh mark map and walks the automaton, applying each
transition at most twice (``unchecked -> again -> checked``), so any check
costs at most 2|Q| operation applications per instance.

Soundness over the repeated cycle rests on an idempotence gate: before
checking a formula on a lasso, the composed cycle is applied twice at its
entry configuration and the results compared (parameter values erased when
the formula never reads parameters).  A cycle failing the gate yields an
``unknown`` verdict unless a step budget requests bounded checking, in
which case the path is unrolled up to the budget and the semantics
evaluated literally on the explored window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional

from .adl import model_digest
from .ftpl import (
    After,
    Always,
    Before,
    Eventually,
    EventSpec,
    FtplFormula,
    TraceProperty,
    erasure_invariant,
    event_holds,
    formula_events,
    print_cp,
)
from .model import ComponentModel, ConfigProperty, erase_param_values, eval_cp, \
    model_equal, validate_model
from .oracle import (
    ConcreteLasso,
    LassoStep,
    _unfold,
    oracle_eval_detailed,
    oracle_verdict,
)
from .pathspec import Mark, PathAutomaton, PathExpr, as_path_expr, fresh_marks, \
    residual_from
from .reconfig import EvolutionOperation, apply_evolution, apply_sequence, \
    is_idempotent_sequence

HOLDS = "holds"
FAILS = "fails"
UNKNOWN = "unknown"

REASON_BUDGET = "step-budget-exhausted"
REASON_CYCLE = "non-idempotent-cycle"


class CheckError(Exception):
    """Unresolvable inputs: unknown operation names, invalid initial model,
    or an oracle cross-check disagreement."""


@dataclass(frozen=True)
class WitnessStep:
    state: int
    label: str  # empty on the initial configuration
    digest: str


@dataclass(frozen=True)
class TraceWitness:
    steps: tuple[WitnessStep, ...]
    violation_index: int
    violated: str


@dataclass(frozen=True)
class CheckStats:
    transitions_applied: int
    cp_evaluations: int
    max_instance_transitions: int


@dataclass(frozen=True)
class CheckOptions:
    """max_steps bounds the total transitions applied while exploring (the
    idempotence gate's own applications are not charged against it).

    ignore_params forces the erased idempotence gate; that is only sound
    for formulas that cannot observe parameter values, which the checker
    otherwise establishes itself before selecting the erased comparison.
    """

    max_steps: Optional[int] = None
    ignore_params: bool = False
    oracle_crosscheck: bool = False

    def __post_init__(self):
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be at least 1 when present")


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: Optional[TraceWitness] = None
    reason: Optional[str] = None
    residual: Optional[PathExpr] = None
    reached: Optional[ComponentModel] = None
    stats: Optional[CheckStats] = None

    @classmethod
    def holds(cls, stats: CheckStats) -> "Verdict":
        return cls(HOLDS, stats=stats)

    @classmethod
    def fails(cls, witness: TraceWitness, stats: CheckStats) -> "Verdict":
        return cls(FAILS, witness=witness, stats=stats)

    @classmethod
    def unknown(cls, reason: str, residual: PathExpr, reached: ComponentModel,
                stats: CheckStats) -> "Verdict":
        return cls(UNKNOWN, reason=reason, residual=residual, reached=reached,
                   stats=stats)

    @property
    def is_holds(self) -> bool:
        return self.status == HOLDS

    @property
    def is_fails(self) -> bool:
        return self.status == FAILS

    @property
    def is_unknown(self) -> bool:
        return self.status == UNKNOWN


class _Violation(Exception):
    def __init__(self, steps: tuple[WitnessStep, ...], index: int, violated: str):
        super().__init__(violated)
        self.steps = steps
        self.index = index
        self.violated = violated


class _Budget(Exception):
    def __init__(self, state: int, model: ComponentModel):
        super().__init__("step budget exhausted")
        self.state = state
        self.model = model


class _Instance:
    """Per-operator bookkeeping for the termination instrumentation."""

    __slots__ = ("transitions", "start")

    def __init__(self, start: int):
        self.transitions = 0
        self.start = start


class _Walk:
    """Shared walk context: applies transitions, charges budgets and counters.

    ``pair_erased`` switches stabilization detection (in the unfolding
    operators) to parameter-erased comparison — the right notion when the
    cycle was admitted through the erased idempotence gate, in which case
    the formula cannot observe parameter values anyway.
    """

    def __init__(self, a: PathAutomaton, ops: Mapping[str, EvolutionOperation],
                 max_steps: Optional[int], pair_erased: bool = False):
        self.a = a
        self.ops = ops
        self.remaining = max_steps
        self.pair_erased = pair_erased
        self.transitions = 0
        self.cp_evals = 0
        self.max_instance = 0

    def pair_key(self, m: ComponentModel) -> ComponentModel:
        return erase_param_values(m) if self.pair_erased else m

    def new_instance(self, start: int) -> _Instance:
        return _Instance(start)

    def apply(self, inst: _Instance, q: int, c: ComponentModel):
        nxt = self.a.succ(q)
        assert nxt is not None, "apply() at a terminal state"
        if self.remaining is not None:
            if self.remaining == 0:
                raise _Budget(q, c)
            self.remaining -= 1
        label, q2 = nxt
        inst.transitions += 1
        self.transitions += 1
        if inst.transitions > self.max_instance:
            self.max_instance = inst.transitions
        # termination invariant: two traversals suffice for any operator
        if inst.transitions > 2 * self.a.n_states:
            raise AssertionError(
                f"operator instance applied {inst.transitions} transitions, "
                f"exceeding 2*|Q| = {2 * self.a.n_states}")
        c2 = apply_evolution(self.ops[label], c).result
        return label, q2, c2

    def eval_cp(self, cp: ConfigProperty, c: ComponentModel) -> bool:
        self.cp_evals += 1
        return eval_cp(cp, c)

    def stats(self) -> CheckStats:
        return CheckStats(self.transitions, self.cp_evals, self.max_instance)


def is_suffix_monotone(f: FtplFormula) -> bool:
    """Whether truth of ``f`` on a suffix carries over to later suffixes.

    ``always`` loses configurations as the start index grows, ``after``
    loses event occurrences, and ``before tr`` with a universal trace loses
    both occurrences and segment length — all monotone.  ``eventually``
    (bare, or as a before-trace) can lose its only witness, so the first
    event occurrence does not subsume later ones.
    """
    if isinstance(f, Eventually):
        return False
    if isinstance(f, Before):
        return isinstance(f.trace, Always)
    return True


def _after_loop(e: EventSpec,
                on_fire: Callable[[int, ComponentModel, tuple[WitnessStep, ...]], bool],
                walk: _Walk, q: int, c: ComponentModel,
                marks: dict[int, Mark], collect_all: bool) -> bool:
    """Scan for occurrences of ``e``, dispatching ``on_fire`` at each one.

    With ``collect_all`` false the first occurrence decides (the classic
    first-occurrence rule, valid for suffix-monotone continuations);
    otherwise every occurrence met during two traversals is checked.  Two
    traversals are needed because an operation that changed the model on
    the first pass can become the identity on the next (and vice versa),
    flipping which modality its transitions satisfy.
    """
    inst = walk.new_instance(q)
    steps: list[WitnessStep] = []
    pending: list[tuple[int, ComponentModel, tuple[WitnessStep, ...]]] = []
    pos = 0
    while True:
        if walk.a.succ(q) is None:
            break  # finite path exhausted: no further occurrence possible
        mk = marks[q]
        if mk is Mark.CHECKED:
            break  # both passes scanned
        if __debug__ and inst.start == 0 and mk is Mark.UNCHECKED:
            assert all(marks[j] is Mark.AGAIN for j in range(q)), \
                "first-pass invariant: all earlier states marked again"
        marks[q] = Mark.AGAIN if mk is Mark.UNCHECKED else Mark.CHECKED
        label, q2, c2 = walk.apply(inst, q, c)
        pos += 1
        steps.append(WitnessStep(q2, label, model_digest(c2)))
        if event_holds(c, c2, label, e, pos):
            if not collect_all:
                return on_fire(q2, c2, tuple(steps))
            pending.append((q2, c2, tuple(steps)))
        q, c = q2, c2
    for q2, c2, st in pending:
        if not on_fire(q2, c2, st):
            return False
    return True  # event never occurs (or every occurrence passed): vacuous truth


def _always_loop(cp: ConfigProperty, walk: _Walk, q: int, c: ComponentModel,
                 marks: dict[int, Mark], trail: tuple[WitnessStep, ...]) -> bool:
    """Check ``cp`` on every configuration from (q, c) onwards.

    The walk re-enters the cycle once: intermediate configurations of the
    second traversal are exactly the ones repeated forever afterwards
    (given the idempotence gate), so two passes cover the whole suffix.
    """
    inst = walk.new_instance(q)
    steps: list[WitnessStep] = []
    while True:
        if not walk.eval_cp(cp, c):
            raise _Violation(trail + tuple(steps), len(trail) + len(steps) - 1,
                             f"always [{print_cp(cp)}] violated")
        nxt = walk.a.succ(q)
        if nxt is None or marks[q] is Mark.CHECKED:
            return True
        if __debug__ and inst.start == 0:
            assert all(marks[j] is not Mark.UNCHECKED for j in range(q)), \
                "always invariant: all earlier states marked again or checked"
        marks[q] = Mark.AGAIN if marks[q] is Mark.UNCHECKED else Mark.CHECKED
        label, q2, c2 = walk.apply(inst, q, c)
        steps.append(WitnessStep(q2, label, model_digest(c2)))
        q, c = q2, c2


def _eventually_scan(cp: ConfigProperty, walk: _Walk, q: int, c: ComponentModel,
                     trail: tuple[WitnessStep, ...]) -> bool:
    """True as soon as one reachable configuration satisfies ``cp``.

    Unfolds until the (state, model) pair repeats or the path ends; each
    state is applied at most twice on the way.
    """
    inst = walk.new_instance(q)
    steps: list[WitnessStep] = []
    if walk.eval_cp(cp, c):
        return True
    seen: dict[int, list[ComponentModel]] = {q: [walk.pair_key(c)]}
    while True:
        nxt = walk.a.succ(q)
        if nxt is None:
            raise _Violation(trail + tuple(steps), len(trail) + len(steps) - 1,
                             f"eventually [{print_cp(cp)}] never satisfied on the finite path")
        label, q2, c2 = walk.apply(inst, q, c)
        k2 = walk.pair_key(c2)
        if any(model_equal(prev, k2) for prev in seen.get(q2, ())):
            raise _Violation(trail + tuple(steps), len(trail) + len(steps) - 1,
                             f"eventually [{print_cp(cp)}] never satisfied (cycle stabilized)")
        steps.append(WitnessStep(q2, label, model_digest(c2)))
        seen.setdefault(q2, []).append(k2)
        if walk.eval_cp(cp, c2):
            return True
        q, c = q2, c2


def _unfold_instrumented(walk: _Walk, q: int, c: ComponentModel) -> ConcreteLasso:
    inst = walk.new_instance(q)
    entries: list[LassoStep] = [LassoStep(q, c, None)]
    keys = [walk.pair_key(c)]
    by_state: dict[int, list[int]] = {q: [0]}
    while True:
        nxt = walk.a.succ(q)
        if nxt is None:
            return ConcreteLasso(walk.a, tuple(entries), None, True, walk.pair_erased)
        label, q2, c2 = walk.apply(inst, q, c)
        k2 = walk.pair_key(c2)
        for idx in by_state.get(q2, ()):
            if model_equal(keys[idx], k2):
                return ConcreteLasso(walk.a, tuple(entries), idx, False, walk.pair_erased)
        entries.append(LassoStep(q2, c2, label))
        keys.append(k2)
        by_state.setdefault(q2, []).append(len(entries) - 1)
        q, c = q2, c2


def _before_check(e: EventSpec, tr: TraceProperty, walk: _Walk, q: int,
                  c: ComponentModel, trail: tuple[WitnessStep, ...]) -> bool:
    """Every occurrence of ``e`` must be preceded by a segment satisfying
    the trace property.

    Evaluated on the stabilized concrete sequence: the unfolded window plus
    wrap-around indexing covers every occurrence whose preceding segment is
    still growing in new configurations; later occurrences only repeat
    already-checked segment contents.
    """
    lasso = _unfold_instrumented(walk, q, c)
    value, info = oracle_eval_detailed(Before(e, tr), lasso)
    if value is True:
        return True
    assert value is False, "stabilized unfolding must determine a before-property"
    steps = trail + tuple(
        WitnessStep(s.state, s.incoming_label or "", model_digest(s.model))
        for s in lasso.entries[1:])
    idx, desc = info
    return _raise_at(steps, len(trail) - 1 + idx, desc)


def _raise_at(steps: tuple[WitnessStep, ...], index: int, desc: str) -> bool:
    raise _Violation(steps, index, desc)


def _eval_formula(f: FtplFormula, walk: _Walk, q: int, c: ComponentModel,
                  trail: tuple[WitnessStep, ...]) -> bool:
    """Evaluate with a fresh mark map per operator node; violations raise."""
    if isinstance(f, After):
        def on_fire(q2: int, c2: ComponentModel, st: tuple[WitnessStep, ...]) -> bool:
            return _eval_formula(f.inner, walk, q2, c2, trail + st)

        return _after_loop(f.event, on_fire, walk, q, c, fresh_marks(walk.a),
                           collect_all=not is_suffix_monotone(f.inner))
    if isinstance(f, Before):
        return _before_check(f.event, f.trace, walk, q, c, trail)
    if isinstance(f, Always):
        return _always_loop(f.cp, walk, q, c, fresh_marks(walk.a), trail)
    if isinstance(f, Eventually):
        return _eventually_scan(f.cp, walk, q, c, trail)
    raise TypeError(f"not a formula node: {f!r}")


# --- public operator functions (continuation style, no step budgets) --------------

def check_after(e: EventSpec, check_f: Callable[[int, ComponentModel], bool],
                a: PathAutomaton, ops: Mapping[str, EvolutionOperation],
                q: int, c: ComponentModel,
                marks: Optional[dict[int, Mark]] = None) -> bool:
    """Dispatch ``check_f`` at the first occurrence of ``e`` from (q, c).

    Returns vacuous truth when the event never occurs on the lasso.
    """
    walk = _Walk(a, ops, None)
    if marks is None:
        marks = fresh_marks(a)
    return _after_loop(e, lambda q2, c2, _st: bool(check_f(q2, c2)),
                       walk, q, c, marks, collect_all=False)


def check_always(cp: ConfigProperty, a: PathAutomaton,
                 ops: Mapping[str, EvolutionOperation], q: int, c: ComponentModel,
                 marks: Optional[dict[int, Mark]] = None) -> bool:
    """Does ``cp`` hold on every configuration reachable from (q, c)?"""
    walk = _Walk(a, ops, None)
    if marks is None:
        marks = fresh_marks(a)
    trail = (WitnessStep(q, "", model_digest(c)),)
    try:
        return _always_loop(cp, walk, q, c, marks, trail)
    except _Violation:
        return False


def check_eventually(cp: ConfigProperty, a: PathAutomaton,
                     ops: Mapping[str, EvolutionOperation], c0: ComponentModel,
                     q: int = 0) -> bool:
    """Does some configuration of the (stabilized) path satisfy ``cp``?

    Stabilization is detected up to parameter erasure when ``cp`` never
    reads a parameter, mirroring the idempotence gate's comparison mode.
    """
    walk = _Walk(a, ops, None,
                 pair_erased=erasure_invariant(Eventually(cp), ops))
    trail = (WitnessStep(q, "", model_digest(c0)),)
    try:
        return _eventually_scan(cp, walk, q, c0, trail)
    except _Violation:
        return False


def check_before(e: EventSpec, tr: TraceProperty, a: PathAutomaton,
                 ops: Mapping[str, EvolutionOperation], c0: ComponentModel,
                 q: int = 0) -> bool:
    """Is every occurrence of ``e`` preceded by a segment satisfying ``tr``?"""
    walk = _Walk(a, ops, None,
                 pair_erased=erasure_invariant(Before(e, tr), ops))
    trail = (WitnessStep(q, "", model_digest(c0)),)
    try:
        return _before_check(e, tr, walk, q, c0, trail)
    except _Violation:
        return False


# --- the checker entry point -------------------------------------------------------

def formula_effective_ignore_params(f: FtplFormula, opts: CheckOptions,
                                    ops: Mapping[str, EvolutionOperation]) -> bool:
    # formulas that cannot observe parameter values (neither through
    # property leaves nor through events on parameter-updating operations)
    # may ignore parameter drift when judging cycle idempotence
    return opts.ignore_params or erasure_invariant(f, ops)


def cycle_entry_model(a: PathAutomaton, c0: ComponentModel,
                      ops: Mapping[str, EvolutionOperation]) -> ComponentModel:
    return apply_sequence([ops[l] for l in a.prefix_labels()], c0)


def check(f: FtplFormula, a: PathAutomaton, c0: ComponentModel,
          ops: Mapping[str, EvolutionOperation],
          opts: Optional[CheckOptions] = None) -> Verdict:
    """Check a temporal formula along a reconfiguration path.

    Starts from the automaton's initial state with ``c0``.  Lassos are
    admitted through the idempotence gate; a failing gate yields
    ``unknown(non-idempotent-cycle)`` unless a step budget is set, in which
    case the window explorable within the budget is evaluated literally.
    A budget exhausted mid-walk yields ``unknown(step-budget-exhausted)``
    carrying the unexplored residual path and the configuration reached, so
    the check can be relaunched from there.
    """
    opts = opts or CheckOptions()
    bad = validate_model(c0)
    if bad:
        raise CheckError("invalid initial model: " + "; ".join(bad))
    for label in a.labels:
        if label not in ops:
            raise CheckError(f"path label '{label}' is not a known operation")
    for event in formula_events(f):
        if event.op_name not in ops:
            raise CheckError(f"event operation '{event.op_name}' is not a known operation")

    gate_ok = True
    effective_ignore = False
    if a.has_cycle:
        effective_ignore = formula_effective_ignore_params(f, opts, ops)
        entry = cycle_entry_model(a, c0, ops)
        cycle_ops = [ops[l] for l in a.cycle_labels()]
        gate_ok = is_idempotent_sequence(cycle_ops, entry,
                                         ignore_params=effective_ignore)

    if not gate_ok and opts.max_steps is None:
        # nothing was explored: the residual is the whole path
        return Verdict.unknown(REASON_CYCLE, residual=as_path_expr(a), reached=c0,
                               stats=CheckStats(0, 0, 0))

    if gate_ok:
        walk = _Walk(a, ops, opts.max_steps, pair_erased=effective_ignore)
        trail = (WitnessStep(0, "", model_digest(c0)),)
        try:
            _eval_formula(f, walk, 0, c0, trail)
            verdict = Verdict.holds(walk.stats())
        except _Violation as v:
            verdict = Verdict.fails(TraceWitness(v.steps, v.index, v.violated),
                                    walk.stats())
        except _Budget as b:
            verdict = Verdict.unknown(REASON_BUDGET, residual=residual_from(a, b.state),
                                      reached=b.model, stats=walk.stats())
    else:
        # bounded checking over a non-idempotent cycle: unroll up to the
        # budget and evaluate the defining semantics on the explored window
        lasso = _unfold(a, c0, ops, max_transitions=opts.max_steps,
                        max_rounds=opts.max_steps + 1)
        applied = len(lasso.entries) - 1
        stats = CheckStats(applied, 0, applied)
        value, info = oracle_eval_detailed(f, lasso)
        if value is True:
            verdict = Verdict.holds(stats)
        elif value is False:
            steps = (WitnessStep(0, "", model_digest(c0)),) + tuple(
                WitnessStep(s.state, s.incoming_label or "", model_digest(s.model))
                for s in lasso.entries[1:])
            idx, desc = info
            verdict = Verdict.fails(TraceWitness(steps, idx, desc), stats)
        else:
            last = lasso.entries[-1]
            verdict = Verdict.unknown(REASON_BUDGET,
                                      residual=residual_from(a, last.state),
                                      reached=last.model, stats=stats)

    if opts.oracle_crosscheck and verdict.status in (HOLDS, FAILS):
        reference = oracle_verdict(f, a, c0, ops)
        if reference is not None and reference != verdict.is_holds:
            raise CheckError(
                f"oracle cross-check disagreement: checker says {verdict.status}, "
                f"oracle says {'holds' if reference else 'fails'}")
    return verdict
