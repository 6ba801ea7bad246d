"""Evolution operations: primitive and composite reconfigurations plus run.

Every operation is robust: when its precondition is not satisfiable on the
input model it behaves like the identity function and the outcome reports
``changed=False``.  There is no error channel by design — a failed
reconfiguration *is* the identity reconfiguration.  A consequence is that
the topological primitives (component/binding addition and removal) are
idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence, Union

from .model import (
    STOPPED,
    STARTED,
    Binding,
    Component,
    ComponentModel,
    Param,
    erase_param_values,
    model_equal,
    parent_of,
)

RUN_NAME = "run"


# --- integer expressions for parameter updates --------------------------------

@dataclass(frozen=True)
class IntLiteral:
    value: int


@dataclass(frozen=True)
class ParamRef:
    component: str
    param: str


@dataclass(frozen=True)
class BinOp:
    op: str  # + - *
    left: "IntExpr"
    right: "IntExpr"


IntExpr = Union[IntLiteral, ParamRef, BinOp]


def eval_int_expr(expr: IntExpr, m: ComponentModel) -> Optional[int]:
    """Evaluate against current parameter values; None when any reference fails."""
    if isinstance(expr, IntLiteral):
        return expr.value
    if isinstance(expr, ParamRef):
        c = m.components.get(expr.component)
        if c is None:
            return None
        pv = c.params.get(expr.param)
        if pv is None or pv.cls != "int" or not isinstance(pv.value, int):
            return None
        return pv.value
    lhs = eval_int_expr(expr.left, m)
    rhs = eval_int_expr(expr.right, m)
    if lhs is None or rhs is None:
        return None
    if expr.op == "+":
        return lhs + rhs
    if expr.op == "-":
        return lhs - rhs
    if expr.op == "*":
        return lhs * rhs
    raise ValueError(f"unknown operator '{expr.op}'")


# --- primitive operations ------------------------------------------------------

@dataclass(frozen=True)
class AddComponent:
    # full component template; lifecycle is forced to stopped on insertion,
    # contains entries attach existing components as children of the new one
    template: Component


@dataclass(frozen=True)
class RemoveComponent:
    id: str


@dataclass(frozen=True)
class Bind:
    binding: Binding


@dataclass(frozen=True)
class Unbind:
    binding: Binding


@dataclass(frozen=True)
class SetParam:
    component: str
    param: str
    expr: IntExpr


@dataclass(frozen=True)
class Stop:
    id: str


@dataclass(frozen=True)
class Start:
    id: str


Primitive = Union[AddComponent, RemoveComponent, Bind, Unbind, SetParam, Stop, Start]

TOPOLOGICAL_KINDS = (AddComponent, RemoveComponent, Bind, Unbind)


@dataclass(frozen=True)
class Run:
    """Restart every stopped component; models the software running."""


RUN = Run()


@dataclass(frozen=True)
class Composite:
    """A named recipe: primitive steps applied left to right."""

    name: str
    steps: tuple[Primitive, ...]


EvolutionOperation = Union[Run, Primitive, Composite]


@dataclass(frozen=True)
class ApplicationOutcome:
    result: ComponentModel
    changed: bool


def _unchanged(m: ComponentModel) -> ApplicationOutcome:
    return ApplicationOutcome(m, False)


def _template_ok(t: Component, m: ComponentModel) -> bool:
    if t.id in m.components:
        return False
    names = (set(t.params), set(t.inputs), set(t.outputs))
    if names[0] & names[1] or names[0] & names[2] or names[1] & names[2]:
        return False
    if t.contains and t.params:
        return False  # composites cannot have parameters
    for pname, pv in t.params.items():
        expected = {"int": int, "string": str, "bool": bool}.get(pv.cls)
        if expected is None or type(pv.value) is not expected:
            return False
    for child in t.contains:
        if child not in m.components or parent_of(m, child) is not None:
            return False
    return True


def _apply_add(op: AddComponent, m: ComponentModel) -> ApplicationOutcome:
    if not _template_ok(op.template, m):
        return _unchanged(m)
    fresh = replace(op.template, state=STOPPED)
    comps = dict(m.components)
    comps[fresh.id] = fresh
    return ApplicationOutcome(replace(m, components=comps), True)


def _apply_remove(op: RemoveComponent, m: ComponentModel) -> ApplicationOutcome:
    if op.id not in m.components:
        return _unchanged(m)
    # the target is (implicitly) stopped first, then all bindings and
    # delegations touching it disappear with it; children become roots
    comps = {}
    for cid, c in m.components.items():
        if cid == op.id:
            continue
        comps[cid] = replace(c, contains=c.contains - {op.id}) if op.id in c.contains else c
    bindings = frozenset(b for b in m.bindings
                         if op.id not in (b.out_component, b.in_component))
    delegations = frozenset(d for d in m.delegations
                            if op.id not in (d.composite, d.inner))
    return ApplicationOutcome(
        replace(m, components=comps, bindings=bindings, delegations=delegations), True)


def _apply_bind(op: Bind, m: ComponentModel) -> ApplicationOutcome:
    b = op.binding
    src = m.components.get(b.out_component)
    dst = m.components.get(b.in_component)
    if src is None or dst is None:
        return _unchanged(m)
    if b.out_port not in src.outputs or b.in_port not in dst.inputs:
        return _unchanged(m)
    if src.outputs[b.out_port] != dst.inputs[b.in_port]:
        return _unchanged(m)
    if b in m.bindings:
        return _unchanged(m)
    if any(x.in_component == b.in_component and x.in_port == b.in_port
           for x in m.bindings):
        return _unchanged(m)  # one binding per input endpoint
    return ApplicationOutcome(replace(m, bindings=m.bindings | {b}), True)


def _apply_unbind(op: Unbind, m: ComponentModel) -> ApplicationOutcome:
    if op.binding not in m.bindings:
        return _unchanged(m)
    return ApplicationOutcome(replace(m, bindings=m.bindings - {op.binding}), True)


def _apply_set_param(op: SetParam, m: ComponentModel) -> ApplicationOutcome:
    c = m.components.get(op.component)
    if c is None:
        return _unchanged(m)
    pv = c.params.get(op.param)
    if pv is None or pv.cls != "int":
        return _unchanged(m)
    value = eval_int_expr(op.expr, m)
    if value is None:
        return _unchanged(m)
    if value == pv.value:
        return _unchanged(m)
    comps = dict(m.components)
    comps[op.component] = replace(c, params={**c.params, op.param: Param("int", value)})
    return ApplicationOutcome(replace(m, components=comps), True)


def _apply_lifecycle(cid: str, state: str, m: ComponentModel) -> ApplicationOutcome:
    c = m.components.get(cid)
    if c is None:
        return _unchanged(m)
    if c.state == state:
        return _unchanged(m)
    comps = dict(m.components)
    comps[cid] = replace(c, state=state)
    return ApplicationOutcome(replace(m, components=comps), True)


def apply_primitive(op: Primitive, m: ComponentModel) -> ApplicationOutcome:
    """Apply one primitive with robustness semantics.

    Unsatisfiable preconditions (adding an existing id, removing an absent
    one, duplicate or type-mismatched binds, updates of missing parameters)
    return the input model unchanged.
    """
    if isinstance(op, AddComponent):
        return _apply_add(op, m)
    if isinstance(op, RemoveComponent):
        return _apply_remove(op, m)
    if isinstance(op, Bind):
        return _apply_bind(op, m)
    if isinstance(op, Unbind):
        return _apply_unbind(op, m)
    if isinstance(op, SetParam):
        return _apply_set_param(op, m)
    if isinstance(op, Stop):
        return _apply_lifecycle(op.id, STOPPED, m)
    if isinstance(op, Start):
        return _apply_lifecycle(op.id, STARTED, m)
    raise TypeError(f"not a primitive operation: {op!r}")


def apply_evolution(op: EvolutionOperation, m: ComponentModel) -> ApplicationOutcome:
    """Apply run, a primitive, or a composite recipe.

    ``changed`` is always computed against the original model, so a
    composite whose steps cancel out reports ``changed=False``.
    """
    if isinstance(op, Run):
        comps = {cid: (replace(c, state=STARTED) if c.state != STARTED else c)
                 for cid, c in m.components.items()}
        result = replace(m, components=comps)
        return ApplicationOutcome(result, not model_equal(m, result))
    if isinstance(op, Composite):
        cur = m
        for step in op.steps:
            cur = apply_primitive(step, cur).result
        return ApplicationOutcome(cur, not model_equal(m, cur))
    return apply_primitive(op, m)


def apply_sequence(ops: Sequence[EvolutionOperation], m: ComponentModel) -> ComponentModel:
    for op in ops:
        m = apply_evolution(op, m).result
    return m


def is_idempotent_sequence(ops: Sequence[EvolutionOperation], m: ComponentModel,
                           ignore_params: bool = False) -> bool:
    """Does the composed sequence F satisfy F(F(m)) = F(m)?

    Decided semantically at the given entry model: apply twice and compare.
    With ``ignore_params`` the comparison erases all parameter values first,
    which is the right notion when the properties being checked never read
    parameters.
    """
    once = apply_sequence(ops, m)
    twice = apply_sequence(ops, once)
    if ignore_params:
        once = erase_param_values(once)
        twice = erase_param_values(twice)
    return model_equal(once, twice)


def operation_table(recipes: Mapping[str, Sequence[Primitive]]) -> dict[str, EvolutionOperation]:
    """Name-to-operation map for a set of recipes, with ``run`` built in."""
    table: dict[str, EvolutionOperation] = {RUN_NAME: RUN}
    for name, steps in recipes.items():
        if name == RUN_NAME:
            raise ValueError(f"recipe name '{RUN_NAME}' is reserved")
        table[name] = Composite(name, tuple(steps))
    return table
