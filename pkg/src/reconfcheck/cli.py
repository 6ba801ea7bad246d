"""Command-line front end.

Four batch commands tie the file formats together:

* ``check``       verify a formula along a path (exit 0 holds / 1 fails /
                  2 unknown)
* ``simulate``    apply N path steps, dumping every configuration
* ``idempotence`` report whether the path's cycle is idempotent
* ``validate``    run the structural validator on a model

Exit codes 3 and 4 flag parse/usage errors and invalid models.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .adl import (
    AdlSyntaxError,
    AdlValidationError,
    RecipeSet,
    model_digest,
    parse_model,
    parse_recipes,
    print_model,
)
from .checker import CheckError, CheckOptions, Verdict, check, cycle_entry_model
from .ftpl import FtplSyntaxError, parse_formula, print_formula
from .model import ComponentModel, validate_model
from .pathspec import PathSyntaxError, build_automaton, parse_path, print_path
from .reconfig import apply_evolution, is_idempotent_sequence

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 3
EXIT_INVALID_MODEL = 4

_VERDICT_EXITS = {"holds": EXIT_HOLDS, "fails": EXIT_FAILS, "unknown": EXIT_UNKNOWN}


class _UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc}") from None


def _load_model(path: str) -> ComponentModel:
    return parse_model(_read(path))


def _load_recipes(path: str) -> RecipeSet:
    return parse_recipes(_read(path))


def _load_inputs(args):
    model = _load_model(args.model)
    recipes = _load_recipes(args.ops) if args.ops else RecipeSet({})
    path = parse_path(_read(args.path), known_ops=recipes.names())
    return model, recipes, path


def _formula_text(args) -> str:
    if args.formula is not None:
        return args.formula
    return _read(args.formula_file)


def _verdict_report(verdict: Verdict, formula_text: str) -> dict:
    report: dict = {
        "verdict": verdict.status,
        "formula": formula_text,
        "reason": verdict.reason,
        "witness": None,
        "residual": None,
        "reached": None,
        "stats": None,
    }
    if verdict.witness is not None:
        report["witness"] = {
            "steps": [{"state": s.state, "label": s.label, "digest": s.digest}
                      for s in verdict.witness.steps],
            "violation_index": verdict.witness.violation_index,
            "violated": verdict.witness.violated,
        }
    if verdict.residual is not None:
        report["residual"] = print_path(verdict.residual)
    if verdict.reached is not None:
        report["reached"] = print_model(verdict.reached)
    if verdict.stats is not None:
        report["stats"] = {
            "transitions_applied": verdict.stats.transitions_applied,
            "cp_evaluations": verdict.stats.cp_evaluations,
            "max_instance_transitions": verdict.stats.max_instance_transitions,
        }
    return report


def _print_verdict(verdict: Verdict, formula_text: str, as_json: bool) -> int:
    if as_json:
        print(json.dumps(_verdict_report(verdict, formula_text), indent=2, sort_keys=True))
        return _VERDICT_EXITS[verdict.status]
    print(f"verdict: {verdict.status}")
    if verdict.reason:
        print(f"reason: {verdict.reason}")
    if verdict.witness is not None:
        w = verdict.witness
        print(f"violated: {w.violated}")
        for i, s in enumerate(w.steps):
            flag = "  <-- violation" if i == w.violation_index else ""
            label = s.label or "(initial)"
            print(f"  step {i}: q{s.state} {label} [{s.digest}]{flag}")
    if verdict.residual is not None:
        print(f"residual path: {print_path(verdict.residual)}")
    if verdict.reached is not None:
        print(f"reached model digest: {model_digest(verdict.reached)}")
    if verdict.stats is not None:
        print(f"transitions applied: {verdict.stats.transitions_applied}")
    return _VERDICT_EXITS[verdict.status]


def _cmd_check(args) -> int:
    model, recipes, path = _load_inputs(args)
    formula_text = _formula_text(args).strip()
    formula = parse_formula(formula_text, known_ops=recipes.names())
    automaton = build_automaton(path)
    opts = CheckOptions(max_steps=args.max_steps, ignore_params=args.ignore_params,
                        oracle_crosscheck=args.oracle)
    verdict = check(formula, automaton, model, recipes.operation_table(), opts)
    code = _print_verdict(verdict, print_formula(formula), args.json)
    if args.dump_dir and verdict.reached is not None:
        out = Path(args.dump_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "reached.arch").write_text(print_model(verdict.reached), encoding="utf-8")
    return code


def _cmd_simulate(args) -> int:
    model, recipes, path = _load_inputs(args)
    automaton = build_automaton(path)
    ops = recipes.operation_table()
    out = Path(args.dump_dir)
    out.mkdir(parents=True, exist_ok=True)
    q, current = 0, model
    (out / "step_000.arch").write_text(print_model(current), encoding="utf-8")
    print(f"step 0: initial [{model_digest(current)}]")
    for step in range(1, args.steps + 1):
        nxt = automaton.succ(q)
        if nxt is None:
            print(f"path ends after {step - 1} steps")
            break
        label, q2 = nxt
        outcome = apply_evolution(ops[label], current)
        current = outcome.result
        q = q2
        (out / f"step_{step:03d}.arch").write_text(print_model(current), encoding="utf-8")
        changed = "changed" if outcome.changed else "unchanged"
        print(f"step {step}: {label} ({changed}) [{model_digest(current)}]")
    return 0


def _cmd_idempotence(args) -> int:
    model, recipes, path = _load_inputs(args)
    automaton = build_automaton(path)
    ops = recipes.operation_table()
    if not automaton.has_cycle:
        print("path has no cycle; idempotence does not apply")
        return 0
    entry = cycle_entry_model(automaton, model, ops)
    cycle_ops = [ops[l] for l in automaton.cycle_labels()]
    structural = is_idempotent_sequence(cycle_ops, entry, ignore_params=False)
    topological = is_idempotent_sequence(cycle_ops, entry, ignore_params=True)
    print(f"cycle: {' '.join(automaton.cycle_labels())}")
    print(f"idempotent (structural): {'yes' if structural else 'no'}")
    print(f"idempotent (ignoring parameter values): {'yes' if topological else 'no'}")
    return 0


def _cmd_validate(args) -> int:
    model = parse_model(_read(args.model), validate=False)
    violations = validate_model(model)
    if not violations:
        print(f"model '{model.name}' is well-formed "
              f"({len(model.components)} components, {len(model.bindings)} bindings)")
        return 0
    for v in violations:
        print(f"violation: {v}")
    return EXIT_INVALID_MODEL


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reconfcheck",
        description="Check temporal properties of component reconfiguration paths.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_path=True):
        p.add_argument("--model", required=True, help="architecture file (.arch)")
        p.add_argument("--ops", help="recipe file (.ops)")
        if with_path:
            p.add_argument("--path", required=True, help="reconfiguration path file (.rp)")

    p_check = sub.add_parser("check", help="check a formula along a path")
    add_common(p_check)
    group = p_check.add_mutually_exclusive_group(required=True)
    group.add_argument("--formula", help="formula text")
    group.add_argument("--formula-file", help="formula file (.ftpl)")
    p_check.add_argument("--max-steps", type=int, default=None,
                         help="bound on explored transitions (bounded checking)")
    p_check.add_argument("--ignore-params", action="store_true",
                         help="judge cycle idempotence with parameter values erased")
    p_check.add_argument("--oracle", action="store_true",
                         help="cross-check the verdict against the brute-force oracle")
    p_check.add_argument("--dump-dir", help="directory for the reached model on unknown")
    p_check.add_argument("--json", action="store_true", help="machine-readable report")

    p_sim = sub.add_parser("simulate", help="apply path steps, dumping configurations")
    add_common(p_sim)
    p_sim.add_argument("--steps", type=int, required=True, help="number of steps to apply")
    p_sim.add_argument("--dump-dir", required=True, help="output directory for .arch dumps")

    p_idem = sub.add_parser("idempotence", help="report cycle idempotence")
    add_common(p_idem)

    p_val = sub.add_parser("validate", help="validate a model file")
    p_val.add_argument("--model", required=True, help="architecture file (.arch)")

    return parser


_COMMANDS = {
    "check": _cmd_check,
    "simulate": _cmd_simulate,
    "idempotence": _cmd_idempotence,
    "validate": _cmd_validate,
}


def run_cli(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return _COMMANDS[args.command](args)
    except AdlValidationError as exc:
        for v in exc.violations:
            print(f"violation: {v}", file=sys.stderr)
        return EXIT_INVALID_MODEL
    except (AdlSyntaxError, PathSyntaxError, FtplSyntaxError, _UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
