"""The textual architecture description language.

Two file kinds share one lexer: ``.arch`` files describe component models,
``.ops`` files describe named composite reconfiguration recipes.  Both
grammars are whitespace-insensitive and allow ``//`` line comments.
Printing is canonical — components sorted by id, bindings sorted
lexicographically — so equal models print byte-identical text.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional

from .model import (
    STARTED,
    STOPPED,
    Binding,
    Component,
    ComponentModel,
    Delegation,
    Param,
    validate_model,
)
from .reconfig import (
    AddComponent,
    Bind,
    BinOp,
    IntExpr,
    IntLiteral,
    ParamRef,
    Primitive,
    RemoveComponent,
    RUN_NAME,
    SetParam,
    Start,
    Stop,
    Unbind,
)


class AdlSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class AdlValidationError(ValueError):
    def __init__(self, violations: list[str]):
        super().__init__("invalid model: " + "; ".join(violations))
        self.violations = violations


# --- lexer ---------------------------------------------------------------------

# longest first so ':=' wins over ':' and '->' over '-'
_PUNCT = (":=", "->", "<=", ">=", "!=", "{", "}", "(", ")", "[", "]",
          ":", ".", ",", "+", "-", "*", "=", "<", ">")


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | string | punct | eof
    value: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            out = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n and text[j + 1] in ('"', "\\"):
                    out.append(text[j + 1])
                    j += 2
                elif text[j] == "\n":
                    raise AdlSyntaxError("unterminated string", line, col)
                else:
                    out.append(text[j])
                    j += 1
            if j >= n:
                raise AdlSyntaxError("unterminated string", line, col)
            tokens.append(Token("string", "".join(out), line, col))
            col += j + 1 - i
            i = j + 1
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise AdlSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self._toks = tokens
        self._pos = 0

    def peek(self) -> Token:
        return self._toks[self._pos]

    def next(self) -> Token:
        tok = self._toks[self._pos]
        if tok.kind != "eof":
            self._pos += 1
        return tok

    def error(self, message: str) -> AdlSyntaxError:
        tok = self.peek()
        return AdlSyntaxError(message, tok.line, tok.col)

    def expect_punct(self, value: str) -> Token:
        tok = self.peek()
        if tok.kind != "punct" or tok.value != value:
            raise self.error(f"expected '{value}', found {tok.value or 'end of input'!r}")
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            raise self.error(f"expected {what}, found {tok.value or 'end of input'!r}")
        return self.next()

    def expect_keyword(self, *words: str) -> str:
        tok = self.peek()
        if tok.kind == "ident" and tok.value in words:
            self.next()
            return tok.value
        raise self.error(f"expected {' or '.join(repr(w) for w in words)}, "
                         f"found {tok.value or 'end of input'!r}")

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.value in words

    def at_punct(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.value == value


def _parse_literal(ts: TokenStream, cls: str):
    tok = ts.peek()
    if cls == "int":
        neg = False
        if ts.at_punct("-"):
            ts.next()
            neg = True
        tok = ts.peek()
        if tok.kind != "int":
            raise ts.error("expected integer literal")
        ts.next()
        return -int(tok.value) if neg else int(tok.value)
    if cls == "string":
        if tok.kind != "string":
            raise ts.error("expected string literal")
        ts.next()
        return tok.value
    if cls == "bool":
        word = ts.expect_keyword("true", "false")
        return word == "true"
    raise ts.error(f"unknown parameter class '{cls}'")


# --- model files (.arch) ---------------------------------------------------------

def _parse_component_block(ts: TokenStream) -> Component:
    ts.expect_keyword("component", "composite")
    cid = ts.expect_ident("component name").value
    ts.expect_punct("{")
    cls: Optional[str] = None
    params: dict[str, Param] = {}
    inputs: dict[str, str] = {}
    outputs: dict[str, str] = {}
    contains: list[str] = []
    state: Optional[str] = None
    while not ts.at_punct("}"):
        word = ts.expect_keyword("class", "input", "output", "param", "contains", "state")
        if word == "class":
            if cls is not None:
                raise ts.error(f"component '{cid}' declares class twice")
            cls = ts.expect_ident("class name").value
        elif word in ("input", "output"):
            port = ts.expect_ident("port name").value
            ts.expect_punct(":")
            pcls = ts.expect_ident("port class").value
            target = inputs if word == "input" else outputs
            if port in target:
                raise ts.error(f"duplicate {word} port '{port}' on '{cid}'")
            target[port] = pcls
        elif word == "param":
            name = ts.expect_ident("parameter name").value
            ts.expect_punct(":")
            pcls = ts.expect_keyword("int", "string", "bool")
            ts.expect_punct("=")
            value = _parse_literal(ts, pcls)
            if name in params:
                raise ts.error(f"duplicate parameter '{name}' on '{cid}'")
            params[name] = Param(pcls, value)
        elif word == "contains":
            child = ts.expect_ident("component name").value
            if child in contains:
                raise ts.error(f"duplicate contains '{child}' on '{cid}'")
            contains.append(child)
        else:  # state
            if state is not None:
                raise ts.error(f"component '{cid}' declares state twice")
            state = ts.expect_keyword(STARTED, STOPPED)
    ts.expect_punct("}")
    if cls is None:
        raise ts.error(f"component '{cid}' has no class")
    return Component(id=cid, cls=cls, params=params, inputs=inputs, outputs=outputs,
                     contains=frozenset(contains), state=state or STARTED)


def _parse_endpoint_pair(ts: TokenStream) -> tuple[str, str, str, str]:
    a = ts.expect_ident("component name").value
    ts.expect_punct(".")
    ap = ts.expect_ident("port name").value
    ts.expect_punct("->")
    b = ts.expect_ident("component name").value
    ts.expect_punct(".")
    bp = ts.expect_ident("port name").value
    return a, ap, b, bp


def parse_model(text: str, validate: bool = True) -> ComponentModel:
    """Parse an ``.arch`` model.

    Raises :class:`AdlSyntaxError` on malformed input and, when
    ``validate`` is left on, :class:`AdlValidationError` listing every
    structural violation.
    """
    ts = TokenStream(tokenize(text))
    ts.expect_keyword("model")
    name = ts.expect_ident("model name").value
    ts.expect_punct("{")
    components: dict[str, Component] = {}
    bindings: set[Binding] = set()
    delegations: set[Delegation] = set()
    while not ts.at_punct("}"):
        if ts.at_keyword("component", "composite"):
            comp = _parse_component_block(ts)
            if comp.id in components:
                raise ts.error(f"duplicate component id '{comp.id}'")
            components[comp.id] = comp
        elif ts.at_keyword("bind"):
            ts.next()
            a, ap, b, bp = _parse_endpoint_pair(ts)
            bnd = Binding(a, ap, b, bp)
            if bnd in bindings:
                raise ts.error(f"duplicate binding {a}.{ap} -> {b}.{bp}")
            bindings.add(bnd)
        elif ts.at_keyword("delegate"):
            ts.next()
            a, ap, b, bp = _parse_endpoint_pair(ts)
            dlg = Delegation(a, ap, b, bp)
            if dlg in delegations:
                raise ts.error(f"duplicate delegation {a}.{ap} -> {b}.{bp}")
            delegations.add(dlg)
        else:
            raise ts.error("expected component, composite, bind or delegate")
    ts.expect_punct("}")
    if ts.peek().kind != "eof":
        raise ts.error("trailing input after model")
    m = ComponentModel(name=name, components=components,
                       bindings=frozenset(bindings), delegations=frozenset(delegations))
    if validate:
        violations = validate_model(m)
        if violations:
            raise AdlValidationError(violations)
    return m


def _format_literal(pv: Param) -> str:
    if pv.cls == "string":
        escaped = str(pv.value).replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if pv.cls == "bool":
        return "true" if pv.value else "false"
    return str(pv.value)


def _format_component(c: Component, indent: str) -> list[str]:
    inner = indent + "  "
    keyword = "composite" if c.contains else "component"
    lines = [f"{indent}{keyword} {c.id} {{", f"{inner}class {c.cls}"]
    for name in sorted(c.params):
        lines.append(f"{inner}param {name} : {c.params[name].cls} = "
                     f"{_format_literal(c.params[name])}")
    for port in sorted(c.inputs):
        lines.append(f"{inner}input {port} : {c.inputs[port]}")
    for port in sorted(c.outputs):
        lines.append(f"{inner}output {port} : {c.outputs[port]}")
    for child in sorted(c.contains):
        lines.append(f"{inner}contains {child}")
    lines.append(f"{inner}state {c.state}")
    lines.append(f"{indent}}}")
    return lines


def print_model(m: ComponentModel) -> str:
    """Canonical text for a model; reparses to an equal model."""
    lines = [f"model {m.name} {{"]
    for cid in sorted(m.components):
        lines.extend(_format_component(m.components[cid], "  "))
    for b in sorted(m.bindings, key=lambda b: (b.out_component, b.out_port,
                                               b.in_component, b.in_port)):
        lines.append(f"  bind {b.out_component}.{b.out_port} -> {b.in_component}.{b.in_port}")
    for d in sorted(m.delegations, key=lambda d: (d.composite, d.composite_port,
                                                  d.inner, d.inner_port)):
        lines.append(f"  delegate {d.composite}.{d.composite_port} -> {d.inner}.{d.inner_port}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def model_digest(m: ComponentModel) -> str:
    """Short content hash of the canonical text; used in witness reports."""
    return hashlib.sha256(print_model(m).encode()).hexdigest()[:12]


# --- recipe files (.ops) ---------------------------------------------------------

@dataclass(frozen=True)
class RecipeSet:
    """Named composite-operation recipes, as parsed from an ``.ops`` file."""

    recipes: dict[str, tuple[Primitive, ...]] = field(default_factory=dict)

    def operation_table(self):
        from .reconfig import operation_table
        return operation_table(self.recipes)

    def names(self) -> list[str]:
        return sorted(self.recipes) + [RUN_NAME]


def _parse_int_expr(ts: TokenStream) -> IntExpr:
    expr = _parse_int_term(ts)
    while ts.at_punct("+") or ts.at_punct("-"):
        op = ts.next().value
        expr = BinOp(op, expr, _parse_int_term(ts))
    return expr


def _parse_int_term(ts: TokenStream) -> IntExpr:
    expr = _parse_int_factor(ts)
    while ts.at_punct("*"):
        ts.next()
        expr = BinOp("*", expr, _parse_int_factor(ts))
    return expr


def _parse_int_factor(ts: TokenStream) -> IntExpr:
    if ts.at_punct("("):
        ts.next()
        expr = _parse_int_expr(ts)
        ts.expect_punct(")")
        return expr
    if ts.at_punct("-"):
        ts.next()
        inner = _parse_int_factor(ts)
        if isinstance(inner, IntLiteral):
            return IntLiteral(-inner.value)
        return BinOp("-", IntLiteral(0), inner)
    if ts.at_keyword("param"):
        ts.next()
        ts.expect_punct("(")
        comp = ts.expect_ident("component name").value
        ts.expect_punct(".")
        name = ts.expect_ident("parameter name").value
        ts.expect_punct(")")
        return ParamRef(comp, name)
    tok = ts.peek()
    if tok.kind == "int":
        ts.next()
        return IntLiteral(int(tok.value))
    raise ts.error("expected integer expression")


def _parse_step(ts: TokenStream) -> Primitive:
    word = ts.expect_keyword("add", "remove", "bind", "unbind", "set", "stop", "start")
    if word == "add":
        return AddComponent(_parse_component_block(ts))
    if word == "remove":
        ts.expect_keyword("component")
        return RemoveComponent(ts.expect_ident("component name").value)
    if word in ("bind", "unbind"):
        a, ap, b, bp = _parse_endpoint_pair(ts)
        binding = Binding(a, ap, b, bp)
        return Bind(binding) if word == "bind" else Unbind(binding)
    if word == "set":
        comp = ts.expect_ident("component name").value
        ts.expect_punct(".")
        name = ts.expect_ident("parameter name").value
        ts.expect_punct(":=")
        return SetParam(comp, name, _parse_int_expr(ts))
    if word == "stop":
        return Stop(ts.expect_ident("component name").value)
    return Start(ts.expect_ident("component name").value)


def parse_recipes(text: str) -> RecipeSet:
    """Parse an ``.ops`` file into a RecipeSet; one entry per ``op`` block."""
    ts = TokenStream(tokenize(text))
    recipes: dict[str, tuple[Primitive, ...]] = {}
    while ts.peek().kind != "eof":
        ts.expect_keyword("op")
        name = ts.expect_ident("recipe name").value
        if name == RUN_NAME:
            raise ts.error(f"recipe name '{RUN_NAME}' is reserved")
        if name in recipes:
            raise ts.error(f"duplicate recipe name '{name}'")
        ts.expect_punct("{")
        steps: list[Primitive] = []
        while not ts.at_punct("}"):
            steps.append(_parse_step(ts))
        ts.expect_punct("}")
        if not steps:
            raise ts.error(f"recipe '{name}' has no steps")
        recipes[name] = tuple(steps)
    return RecipeSet(recipes)


def _format_int_expr(expr: IntExpr) -> str:
    if isinstance(expr, IntLiteral):
        return str(expr.value)
    if isinstance(expr, ParamRef):
        return f"param({expr.component}.{expr.param})"
    return f"({_format_int_expr(expr.left)} {expr.op} {_format_int_expr(expr.right)})"


def _format_step(step: Primitive, indent: str) -> list[str]:
    if isinstance(step, AddComponent):
        lines = _format_component(step.template, indent)
        lines[0] = f"{indent}add " + lines[0][len(indent):]
        return lines
    if isinstance(step, RemoveComponent):
        return [f"{indent}remove component {step.id}"]
    if isinstance(step, (Bind, Unbind)):
        verb = "bind" if isinstance(step, Bind) else "unbind"
        b = step.binding
        return [f"{indent}{verb} {b.out_component}.{b.out_port} -> "
                f"{b.in_component}.{b.in_port}"]
    if isinstance(step, SetParam):
        return [f"{indent}set {step.component}.{step.param} := {_format_int_expr(step.expr)}"]
    if isinstance(step, Stop):
        return [f"{indent}stop {step.id}"]
    if isinstance(step, Start):
        return [f"{indent}start {step.id}"]
    raise TypeError(f"not a recipe step: {step!r}")


def print_recipes(rs: RecipeSet) -> str:
    """Canonical text for a recipe set (recipes sorted by name)."""
    lines: list[str] = []
    for name in sorted(rs.recipes):
        lines.append(f"op {name} {{")
        for step in rs.recipes[name]:
            lines.extend(_format_step(step, "  "))
        lines.append("}")
    return "\n".join(lines) + ("\n" if lines else "")
