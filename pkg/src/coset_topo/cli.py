"""Command-line entry point: job runner, acceptance table, and complex export.

Exit statuses: 0 success, 1 acceptance mismatch, 2 unreadable input or bad
parameters, 3 budget exceeded (partial report still written), 4 a group axiom
or internal invariant failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import (BudgetExceeded, GroupAxiomError, GroupConstructionError,
                     InvariantViolation, TruncationError)
from .pipeline import TASKS, Budgets, GroupContext, build_model, catalog_entry, run_task
from .topo import write_complex

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_BUDGET, EXIT_INVARIANT = 0, 1, 2, 3, 4
MODELS = ("delta", "mcover", "crosscut")


class JobError(ValueError):
    """A job spec that cannot be run as written."""


def parse_job(data: dict) -> tuple[dict, list[dict], Budgets, dict]:
    if not isinstance(data, dict):
        raise JobError("job spec must be a JSON object")
    recipe = data.get("recipe")
    if not isinstance(recipe, dict):
        raise JobError("job spec needs a 'recipe' object")
    tasks = data.get("tasks")
    if not isinstance(tasks, list) or not tasks:
        raise JobError("job spec needs a nonempty 'tasks' list")
    norm = []
    for t in tasks:
        t = {"task": t} if isinstance(t, str) else dict(t)
        if t.get("task") not in TASKS and t.get("task") != "verify-all":
            raise JobError(f"unknown task {t.get('task')!r}")
        if t["task"] == "model" and t.get("kind", "delta") not in MODELS:
            raise JobError(f"unknown model {t.get('kind')!r}")
        norm.append(t)
    budgets = Budgets.from_json(data.get("budgets"))
    output = dict(data.get("output") or {})
    if output.get("format", "json") not in ("json", "text"):
        raise JobError("output format must be 'json' or 'text'")
    return recipe, norm, budgets, output


def render_text(report, prefix: str = "") -> list[str]:
    """Flatten a JSON report into ``path: value`` lines with the same scalars."""
    lines = []
    if isinstance(report, dict):
        for key in sorted(report):
            lines += render_text(report[key], f"{prefix}.{key}" if prefix else str(key))
    elif isinstance(report, list) and any(isinstance(v, (dict, list)) for v in report):
        for i, v in enumerate(report):
            lines += render_text(v, f"{prefix}[{i}]")
    else:
        lines.append(f"{prefix}: {json.dumps(report, sort_keys=True)}")
    return lines


def emit(report: dict, output: dict) -> None:
    if output.get("format", "json") == "text":
        text = "\n".join(render_text(report)) + "\n"
    else:
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    path = output.get("path")
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _verify_task(catalog: str | None = None, only: list[int] | None = None) -> dict:
    from . import acceptance
    acceptance.use_catalog(catalog)
    results = acceptance.run_all(only, echo=None)
    return {"all_passed": all(r.passed for r in results),
            "criteria": [r.to_json() for r in results]}


def run_job(data: dict) -> tuple[dict, int]:
    recipe, tasks, budgets, output = parse_job(data)
    ctx = GroupContext.from_recipe(recipe)
    report = {
        "recipe": recipe,
        "group": {"label": ctx.group.label, "order": ctx.group.order},
        "budgets": {"simplices": budgets.simplices, "tietze_steps": budgets.tietze_steps,
                    "threads": budgets.threads},
        "tasks": [],
    }
    code = EXIT_OK
    for spec in tasks:
        if code == EXIT_BUDGET:
            report["tasks"].append({"task": spec["task"], "status": "skipped", "partial": True})
            continue
        try:
            if spec["task"] == "verify-all":
                result = _verify_task(spec.get("catalog"), spec.get("only"))
                entry = {"task": "verify-all", "params": {}, "result": result,
                         "status": "completed" if result["all_passed"] else "failed"}
                if not result["all_passed"]:
                    code = max(code, EXIT_MISMATCH)
            else:
                entry = run_task(ctx, budgets, spec)
        except (BudgetExceeded, TruncationError) as exc:
            entry = {"task": spec["task"], "status": "budget-exceeded", "partial": True,
                     "error": str(exc)}
            code = EXIT_BUDGET
        report["tasks"].append(entry)
    report["status"] = {EXIT_OK: "completed", EXIT_MISMATCH: "failed",
                        EXIT_BUDGET: "partial"}[code]
    return report, code


def cmd_run(args) -> int:
    try:
        data = json.loads(Path(args.jobspec).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(EXIT_INPUT, f"cannot read job spec: {exc}")
    output = dict(data.get("output") or {}) if isinstance(data, dict) else {}
    if args.out:
        output["path"] = args.out
    if args.format:
        output["format"] = args.format
    report, code = run_job(data)
    emit(report, output)
    return code


def cmd_verify(args) -> int:
    from . import acceptance
    acceptance.use_catalog(args.catalog)
    results = acceptance.run_all(args.only)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    if args.json:
        Path(args.json).write_text(json.dumps([r.to_json() for r in results], sort_keys=True, indent=2) + "\n")
    return EXIT_OK if passed == len(results) else EXIT_MISMATCH


def _load_recipe(ref: str) -> dict:
    path = Path(ref)
    if path.exists():
        data = json.loads(path.read_text())
        return data["recipe"] if "recipe" in data else data
    try:
        return catalog_entry(ref).recipe
    except KeyError:
        raise JobError(f"{ref!r} is neither a recipe file nor a catalog name") from None


def cmd_export(args) -> int:
    try:
        recipe = _load_recipe(args.recipe)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(EXIT_INPUT, f"cannot read recipe: {exc}")
    ctx = GroupContext.from_recipe(recipe)
    k = build_model(ctx, args.model, args.dim, args.budget)
    header = {"recipe": recipe, "model": args.model, "dim": args.dim,
              "budget": args.budget, "f_vector": list(k.f_vector)}
    if args.out == "-":
        write_complex(k, sys.stdout, header)
    else:
        with open(args.out, "w") as fh:
            write_complex(k, fh, header)
    return EXIT_OK


def _fail(code: int, message: str) -> int:
    print(f"coset-topo: {message}", file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coset-topo",
                                     description="Coset posets of finite groups: homology, Möbius invariants, simple connectivity.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a JSON job spec")
    run.add_argument("jobspec")
    run.add_argument("--out", help="override output.path")
    run.add_argument("--format", choices=("json", "text"), help="override output.format")
    run.set_defaults(func=cmd_run)

    ver = sub.add_parser("verify", help="run the acceptance table")
    ver.add_argument("--catalog", help="directory of recipe files (default: bundled catalog)")
    ver.add_argument("--only", type=int, nargs="+", metavar="N", help="criterion numbers to run")
    ver.add_argument("--json", help="also write the full results as JSON")
    ver.set_defaults(func=cmd_verify)

    exp = sub.add_parser("export-complex", help="write a complex in the flat simplex format")
    exp.add_argument("recipe", help="recipe JSON file or catalog name")
    exp.add_argument("--model", choices=MODELS, default="mcover")
    exp.add_argument("--dim", type=int, default=2, help="top dimension of the skeleton")
    exp.add_argument("--out", required=True, help="output path, or - for stdout")
    exp.add_argument("--budget", type=int, default=5_000_000, help="simplex budget")
    exp.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GroupAxiomError, InvariantViolation) as exc:
        return _fail(EXIT_INVARIANT, f"{type(exc).__name__}: {exc}")
    except BudgetExceeded as exc:
        return _fail(EXIT_BUDGET, f"budget exceeded: {exc}")
    except (GroupConstructionError, ValueError, KeyError, TypeError) as exc:
        return _fail(EXIT_INPUT, f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
