"""Brute-force ground truth: unfold the lasso, evaluate the semantics literally.

The automaton is unrolled into the concrete configuration sequence until a
(state, model) pair recurs — the sequence is then ultimately periodic and
every quantifier ranges over finitely many behaviour classes — or until
the path ends or the round budget runs out.  Evaluation follows the
defining clauses of the temporal operators directly, with a third
"undetermined" outcome when a truncated unfolding cannot settle the
answer.  Deliberately naive; being obviously correct is its entire job.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .ftpl import After, Always, Before, Eventually, EventSpec, FtplFormula, \
    TraceProperty, erasure_invariant, event_holds, print_cp
from .model import ComponentModel, erase_param_values, eval_cp, model_equal
from .pathspec import PathAutomaton
from .reconfig import EvolutionOperation, apply_evolution


@dataclass(frozen=True)
class LassoStep:
    state: int
    model: ComponentModel
    incoming_label: Optional[str]  # None on the first entry


@dataclass(frozen=True)
class ConcreteLasso:
    """The unfolded sequence plus, when found, where it starts repeating.

    ``period_start = j`` means the (state, model) pair that would follow
    the last recorded entry equals the pair at index ``j``; the suffix from
    ``j`` repeats forever.  ``complete`` marks a finite path unfolded to
    its terminal state.  ``erased_compare`` records that the repetition was
    detected on parameter-erased models: the suffix then repeats only up to
    parameter values, which suffices for erasure-invariant formulas.
    """

    automaton: PathAutomaton
    entries: tuple[LassoStep, ...]
    period_start: Optional[int]
    complete: bool
    erased_compare: bool = False

    @property
    def period(self) -> Optional[int]:
        if self.period_start is None:
            return None
        return len(self.entries) - self.period_start


def unfold_to_lasso(a: PathAutomaton, c0: ComponentModel,
                    ops: Mapping[str, EvolutionOperation],
                    max_rounds: int = 64, compare_erased: bool = False) -> ConcreteLasso:
    """Apply transitions from the initial state, recording every configuration.

    Stops at a terminal state, when a (state, model) pair repeats, or after
    ``max_rounds`` traversals of the back edge.  ``compare_erased`` detects
    the repetition on parameter-erased models, which stabilizes cycles
    whose only drift is in parameter values.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    return _unfold(a, c0, ops, start=0, max_rounds=max_rounds,
                   compare_erased=compare_erased)


def _unfold(a: PathAutomaton, c0: ComponentModel,
            ops: Mapping[str, EvolutionOperation], start: int = 0,
            max_rounds: int = 64, max_transitions: Optional[int] = None,
            compare_erased: bool = False) -> ConcreteLasso:
    key = erase_param_values if compare_erased else (lambda m: m)
    entries: list[LassoStep] = [LassoStep(start, c0, None)]
    keys = [key(c0)]
    by_state: dict[int, list[int]] = {start: [0]}
    q, c = start, c0
    rounds = 0
    applied = 0
    while True:
        nxt = a.succ(q)
        if nxt is None:
            return ConcreteLasso(a, tuple(entries), None, True, compare_erased)
        if max_transitions is not None and applied >= max_transitions:
            return ConcreteLasso(a, tuple(entries), None, False, compare_erased)
        label, q2 = nxt
        c2 = apply_evolution(ops[label], c).result
        k2 = key(c2)
        applied += 1
        if q == a.q_max:
            rounds += 1
        for idx in by_state.get(q2, ()):
            if model_equal(keys[idx], k2):
                return ConcreteLasso(a, tuple(entries), idx, False, compare_erased)
        entries.append(LassoStep(q2, c2, label))
        keys.append(k2)
        by_state.setdefault(q2, []).append(len(entries) - 1)
        q, c = q2, c2
        if rounds >= max_rounds:
            return ConcreteLasso(a, tuple(entries), None, False, compare_erased)


# --- literal evaluation ------------------------------------------------------------

# (truth value or None when undetermined, (index, description) of the first
# found violation or None)
_EvalResult = tuple[Optional[bool], Optional[tuple[int, str]]]


class _Sigma:
    """Indexed access to the ultimately periodic sequence."""

    def __init__(self, l: ConcreteLasso):
        self.l = l
        self.n = len(l.entries)
        self.ps = l.period_start
        self.t = None if self.ps is None else self.n - self.ps
        self.erased = l.erased_compare

    def wrap(self, i: int) -> int:
        if i < self.n:
            return i
        assert self.ps is not None
        return self.ps + (i - self.ps) % self.t

    def cfg(self, i: int) -> ComponentModel:
        return self.l.entries[self.wrap(i)].model

    def state(self, i: int) -> int:
        return self.l.entries[self.wrap(i)].state

    def label(self, i: int) -> str:
        # label of the transition into position i = the one leaving state(i-1)
        return self.l.automaton.labels[self.state(i - 1)]

    def event(self, i: int, e: EventSpec) -> bool:
        if i <= 0:
            return False
        prev, nxt = self.cfg(i - 1), self.cfg(i)
        if self.erased:
            # the suffix repeats only up to parameter values, so a wrapped
            # representative may differ from the true configuration in its
            # parameters; erase both sides so the changed/unchanged verdict
            # is the true one for parameter-free operations
            prev, nxt = erase_param_values(prev), erase_param_values(nxt)
        return event_holds(prev, nxt, self.label(i), e, i)

    @property
    def determinate(self) -> bool:
        return self.l.complete or self.ps is not None


def _cp_range(sig: _Sigma, s: int) -> range:
    # configurations appearing in the suffix starting at s: everything from
    # s to the window end, plus the period block (which recurs forever)
    lo = s if sig.ps is None else min(s, sig.ps)
    return range(lo, sig.n)


def _segment_trace(tr: TraceProperty, sig: _Sigma, s: int, end: int) -> tuple[bool, Optional[int]]:
    """Evaluate a trace property on the finite segment [s, end]."""
    if isinstance(tr, Always):
        for j in range(s, end + 1):
            if not eval_cp(tr.cp, sig.cfg(j)):
                return False, j
        return True, None
    for j in range(s, end + 1):
        if eval_cp(tr.cp, sig.cfg(j)):
            return True, None
    return False, None


def _occurrence_indices(sig: _Sigma, s: int, e: EventSpec) -> list[int]:
    # one representative per behaviour class: the transient region plus one
    # full period, including the wrap-around transition at index n
    hi = sig.n if sig.ps is not None else sig.n - 1
    occ = [i for i in range(s + 1, hi + 1) if sig.event(i, e)]
    if sig.ps is not None and s > sig.ps:
        # classes whose representatives precede s recur after the wrap
        occ.extend(i for i in range(sig.ps + 1, s + 1) if sig.event(i, e))
    return occ


def _ev(f: FtplFormula, sig: _Sigma, s: int) -> _EvalResult:
    if sig.ps is not None and s >= sig.n:
        s = sig.ps + (s - sig.ps) % sig.t

    if isinstance(f, Always):
        for i in _cp_range(sig, s):
            if not eval_cp(f.cp, sig.cfg(i)):
                return False, (i, f"always [{print_cp(f.cp)}] violated")
        return (True, None) if sig.determinate else (None, None)

    if isinstance(f, Eventually):
        for i in _cp_range(sig, s):
            if eval_cp(f.cp, sig.cfg(i)):
                return True, None
        if sig.determinate:
            return False, (sig.n - 1, f"eventually [{print_cp(f.cp)}] never satisfied")
        return None, None

    if isinstance(f, After):
        undetermined = not sig.determinate
        for i in _occurrence_indices(sig, s, f.event):
            value, info = _ev(f.inner, sig, i)
            if value is False:
                return False, info
            if value is None:
                undetermined = True
        return (None, None) if undetermined else (True, None)

    if isinstance(f, Before):
        if sig.ps is not None:
            # beyond n + 2*period every occurrence's segment already contains
            # a full period, so its valuation equals an examined one
            hi = sig.n + 2 * sig.t
        else:
            hi = sig.n - 1
        undetermined = not sig.determinate
        for i in range(s + 1, hi + 1):
            if not sig.event(i, f.event):
                continue
            ok, bad = _segment_trace(f.trace, sig, s, i - 1)
            if not ok:
                if isinstance(f.trace, Always):
                    desc = (f"before {f.event.op_name} {f.event.modality}: "
                            f"always [{print_cp(f.trace.cp)}] violated in preceding segment")
                    return False, (bad, desc)
                desc = (f"before {f.event.op_name} {f.event.modality}: "
                        f"eventually [{print_cp(f.trace.cp)}] unsatisfied in preceding segment")
                return False, (sig.wrap(i), desc)
        return (None, None) if undetermined else (True, None)

    raise TypeError(f"not a formula node: {f!r}")


def oracle_eval(f: FtplFormula, l: ConcreteLasso) -> Optional[bool]:
    """Literal truth of the formula on the unfolded path.

    Total whenever the lasso has a period or is a complete finite path.
    On a truncated unfolding the result is None unless the explored window
    already determines it (a found violation, a found witness).
    """
    return _ev(f, _Sigma(l), 0)[0]


def oracle_eval_detailed(f: FtplFormula, l: ConcreteLasso) -> _EvalResult:
    """Like :func:`oracle_eval` but with the first violation's location."""
    value, info = _ev(f, _Sigma(l), 0)
    if info is not None:
        sig = _Sigma(l)
        info = (sig.wrap(info[0]), info[1])
    return value, info


def oracle_verdict(f: FtplFormula, a: PathAutomaton, c0: ComponentModel,
                   ops: Mapping[str, EvolutionOperation],
                   max_rounds: int = 64) -> Optional[bool]:
    """Unfold and evaluate, falling back to parameter-erased repetition
    detection when the formula cannot observe parameter values.

    Total on every lasso whose cycle is idempotent in the sense matching
    the formula (structural idempotence in general, idempotence up to
    parameter erasure for erasure-invariant formulas).
    """
    value = oracle_eval(f, unfold_to_lasso(a, c0, ops, max_rounds))
    if value is None and erasure_invariant(f, ops):
        value = oracle_eval(f, unfold_to_lasso(a, c0, ops, max_rounds,
                                               compare_erased=True))
    return value
