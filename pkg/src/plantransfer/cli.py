"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 I/O error.
Documents go to stdout (or ``-o``); human-readable diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .documents import Workspace, read_json, relpath, trace_to_doc, write_text
from .errors import PlanTransferError
from .fixtures import PATHS, fixture_path
from .homsearch import find_homs
from .migration import migrate_instance
from .ontology import check_ontology_map
from .rewrite import apply_action, complete_match
from .schema import dump_json
from .transfer import transfer_plan, validate_transfer

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class _UsageError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


def _ref(target: Path, out: str | None) -> str:
    """Reference to ``target`` from the output document's location (cwd for stdout)."""
    return relpath(target, out if out else Path.cwd() / "-")


def _doc_ref(doc_path: str, key: str) -> Path:
    doc = read_json(doc_path)
    if key not in doc:
        raise _UsageError(f"{doc_path}: missing field {key!r}")
    return (Path(doc_path).resolve().parent / doc[key]).resolve()


def _parse_kinds(items: Sequence[str] | None) -> dict[str, str]:
    kinds = {}
    for item in items or ():
        name, sep, kind = item.partition("=")
        if not sep:
            raise _UsageError(f"--kind expects NAME=KIND, got {item!r}")
        kinds[name] = kind
    return kinds


def _bindings(items: Sequence[str] | None) -> dict[str, str]:
    out = {}
    for item in items or ():
        k, sep, v = item.partition("=")
        if not sep:
            raise _UsageError(f"--bind expects PATTERN=STATE, got {item!r}")
        out[k] = v
    return out


# commands ------------------------------------------------------------------

def cmd_check_schema(args, ws: Workspace) -> int:
    schema = ws.schema(args.schema, _parse_kinds(args.kind))
    _emit(dump_json(schema.to_doc()), args.output)
    return EXIT_OK


def cmd_check_instance(args, ws: Workspace) -> int:
    x = ws.instance(args.instance)
    summary = {"schema": x.schema.name, "counts": x.counts(), "homTotal": x.is_hom_total(),
               "undefinedHoms": [f"{h}({e})" for h, e in x.undefined_homs()]}
    _emit(dump_json(summary), None)
    return EXIT_OK


def cmd_check_map(args, ws: Workspace) -> int:
    report = check_ontology_map(ws.ontology_map(args.map))
    _emit(dump_json({"ok": report.ok, "problems": report.problems, "assumptions": report.assumptions}), None)
    if not report.ok:
        print(report.render(), file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_find_homs(args, ws: Workspace) -> int:
    p, x = ws.instance(args.pattern), ws.instance(args.host)
    homs = find_homs(p, x, monic=args.monic, max_results=args.max)
    lines = [json.dumps(h.to_doc()["components"], ensure_ascii=False, separators=(",", ":")) + "\n" for h in homs]
    _emit("".join(lines), args.output)
    return EXIT_OK


def cmd_apply(args, ws: Workspace) -> int:
    a, x = ws.action(args.action), ws.instance(args.instance)
    m = complete_match(a, x, _bindings(args.bind))
    r = apply_action(a, m, x)
    schema_path = _doc_ref(args.instance, "schema")
    _emit(dump_json(r.Y.to_doc(_ref(schema_path, args.output))), args.output)
    return EXIT_OK


def cmd_run_plan(args, ws: Workspace) -> int:
    trace = ws.run_plan(args.plan)
    schema_path = _doc_ref(str(_doc_ref(args.plan, "initial")), "schema")
    _emit(dump_json(trace_to_doc(trace, _ref(schema_path, args.output))), args.output)
    print("; ".join(trace.step_names()), file=sys.stderr)
    return EXIT_OK


def cmd_migrate(args, ws: Workspace) -> int:
    F, x = ws.ontology_map(args.map), ws.instance(args.instance)
    res = migrate_instance(F, x)
    target = _doc_ref(args.map, "target")
    _emit(dump_json(res.instance.to_doc(_ref(target, args.output))), args.output)
    if args.provenance:
        write_text(args.provenance, dump_json(res.provenance_doc()))
    return EXIT_OK


def cmd_transfer_plan(args, ws: Workspace) -> int:
    F, trace = ws.ontology_map(args.map), ws.trace(args.trace)
    aliases = read_json(args.aliases) if args.aliases else None
    tp = transfer_plan(F, trace, mode=args.mode, aliases=aliases)
    target = _doc_ref(args.map, "target")
    _emit(dump_json(tp.to_doc(_ref(target, args.output))), args.output)
    print(f"{len(tp)} steps ({tp.mode} mode): " + "; ".join(tp.step_names()), file=sys.stderr)
    return EXIT_OK


def cmd_validate_plan(args, ws: Workspace) -> int:
    F, goal, tp = ws.ontology_map(args.map), ws.instance(args.goal), ws.transferred(args.transferred)
    target_goal = ws.instance(args.target_goal) if args.target_goal else None
    report = validate_transfer(F, goal, tp, target_goal=target_goal)
    print(repr(report.goal_satisfaction))
    print(("valid" if report.valid else "INVALID") + f" ({report.mode} mode); " + "; ".join(report.diagnostics),
          file=sys.stderr)
    return EXIT_OK if report.valid else EXIT_INVALID


def cmd_fixtures(args, ws: Workspace) -> int:
    for key in PATHS:
        print(f"{key}\t{fixture_path(key)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="plantransfer", description="Functorial plan transfer between ontologies.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-schema", help="parse a schema (JSON or @present text), print canonical JSON")
    p.add_argument("schema")
    p.add_argument("--kind", action="append", metavar="ATTRTYPE=KIND",
                   help="primitive kind of an attribute type (presentation input only)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_check_schema)

    p = sub.add_parser("check-instance", help="validate an instance document")
    p.add_argument("instance")
    p.set_defaults(func=cmd_check_instance)

    p = sub.add_parser("check-map", help="check an ontology map against the functor rules")
    p.add_argument("map")
    p.set_defaults(func=cmd_check_map)

    p = sub.add_parser("find-homs", help="enumerate morphisms PATTERN -> HOST, one JSON object per line")
    p.add_argument("pattern")
    p.add_argument("host")
    p.add_argument("--monic", action="store_true")
    p.add_argument("--max", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_find_homs)

    p = sub.add_parser("apply", help="apply one action at the unique match extending the bindings")
    p.add_argument("--action", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--bind", action="append", metavar="PATTERN=STATE")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("run-plan", help="execute a plan document and write its trace")
    p.add_argument("plan")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_run_plan)

    p = sub.add_parser("migrate", help="migrate an instance along an ontology map")
    p.add_argument("--map", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--provenance", help="also write the query bindings behind each element")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_migrate)

    p = sub.add_parser("transfer-plan", help="transfer an executed trace along an ontology map")
    p.add_argument("--map", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--aliases", help="JSON object renaming target types in step names")
    p.add_argument("--mode", choices=("delta", "trace"))
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_transfer_plan)

    p = sub.add_parser("validate-plan", help="check the migrated goal against a transferred plan")
    p.add_argument("--map", required=True)
    p.add_argument("--goal", required=True)
    p.add_argument("--transferred", required=True)
    p.add_argument("--target-goal", help="target-domain goal to use instead of the migrated one")
    p.set_defaults(func=cmd_validate_plan)

    p = sub.add_parser("fixtures", help="list the shipped case-study files")
    p.set_defaults(func=cmd_fixtures)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    ws = Workspace()
    try:
        return args.func(args, ws)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PlanTransferError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
