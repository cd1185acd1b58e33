"""JSON documents for schemas, instances, maps, actions, plans and traces.

Documents refer to each other by paths relative to the referring file. A
:class:`Workspace` loads and caches the object graph behind such references,
so two instances naming the same schema file share one Schema object.
"""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Mapping

from .errors import ParseError, PlanTransferError, RewriteError
from .instance import Instance, InstanceMorphism
from .ontology import OntologyMap
from .rewrite import ActionSpan, PlanStep, PlanTrace, RewriteResult, apply_action, run_plan
from .schema import Schema, dump_json, load_schema
from .transfer import TransferredPlan


class DocumentError(PlanTransferError):
    """A document is malformed or its references do not resolve."""


def read_json(path: str | os.PathLike) -> Any:
    text = Path(path).read_text(encoding="utf-8")   # OSError propagates: I/O failure
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", exc.lineno, exc.colno) from None


def write_text(path: str | os.PathLike, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_json(path: str | os.PathLike, doc: Any) -> None:
    write_text(path, dump_json(doc))


def relpath(target: str | os.PathLike, start_file: str | os.PathLike) -> str:
    """Reference to ``target`` as written in a document stored at ``start_file``."""
    return Path(os.path.relpath(Path(target).resolve(), Path(start_file).resolve().parent)).as_posix()


class Workspace:
    def __init__(self) -> None:
        self._schemas: dict[Path, Schema] = {}
        self._actions: dict[Path, ActionSpan] = {}

    @staticmethod
    def _ref(base: Path, ref: str) -> Path:
        return (base.parent / ref).resolve()

    def _field(self, doc: Mapping[str, Any], key: str, path: Path) -> Any:
        if key not in doc:
            raise DocumentError(f"{path}: missing field {key!r}")
        return doc[key]

    def schema(self, path: str | os.PathLike, kinds: Mapping[str, str] | None = None) -> Schema:
        p = Path(path).resolve()
        if p not in self._schemas:
            self._schemas[p] = load_schema(p.read_text(encoding="utf-8"), kinds)
        return self._schemas[p]

    def instance(self, path: str | os.PathLike) -> Instance:
        p = Path(path).resolve()
        doc = read_json(p)
        schema = self.schema(self._ref(p, self._field(doc, "schema", p)))
        return Instance.from_doc(schema, doc)

    def morphism(self, path: str | os.PathLike) -> InstanceMorphism:
        p = Path(path).resolve()
        doc = read_json(p)
        dom = self.instance(self._ref(p, self._field(doc, "domain", p)))
        cod = self.instance(self._ref(p, self._field(doc, "codomain", p)))
        return InstanceMorphism.from_doc(dom, cod, doc)

    def ontology_map(self, path: str | os.PathLike) -> OntologyMap:
        p = Path(path).resolve()
        doc = read_json(p)
        source = self.schema(self._ref(p, self._field(doc, "source", p)))
        target = self.schema(self._ref(p, self._field(doc, "target", p)))
        return OntologyMap.from_doc(source, target, doc)

    def action(self, path: str | os.PathLike) -> ActionSpan:
        p = Path(path).resolve()
        if p not in self._actions:
            doc = read_json(p)
            schema = self.schema(self._ref(p, self._field(doc, "schema", p)))
            self._actions[p] = ActionSpan.from_doc(schema, doc)
        return self._actions[p]

    def plan(self, path: str | os.PathLike) -> tuple[Instance, list[PlanStep]]:
        """Initial state and label-bound steps of a plan document."""
        p = Path(path).resolve()
        doc = read_json(p)
        x0 = self.instance(self._ref(p, self._field(doc, "initial", p)))
        actions = {name: self.action(self._ref(p, ref)) for name, ref in self._field(doc, "actions", p).items()}
        steps = []
        for i, st in enumerate(self._field(doc, "steps", p)):
            if st.get("action") not in actions:
                raise DocumentError(f"{p}: step {i} uses unknown action {st.get('action')!r}")
            steps.append(PlanStep(actions[st["action"]], dict(st.get("match", {}))))
        return x0, steps

    def run_plan(self, path: str | os.PathLike) -> PlanTrace:
        x0, steps = self.plan(path)
        return run_plan(x0, steps)

    def trace(self, path: str | os.PathLike) -> PlanTrace:
        p = Path(path).resolve()
        doc = read_json(p)
        schema = self.schema(self._ref(p, self._field(doc, "schema", p)))
        return trace_from_doc(schema, doc)

    def transferred(self, path: str | os.PathLike) -> TransferredPlan:
        p = Path(path).resolve()
        doc = read_json(p)
        schema = self.schema(self._ref(p, self._field(doc, "schema", p)))
        return TransferredPlan.from_doc(schema, doc)


def trace_to_doc(trace: PlanTrace, schema_ref: str) -> dict:
    """Self-contained trace document: the actions used are embedded."""
    doc = trace.to_doc(schema_ref)
    actions: dict[str, Any] = {}
    for r in trace.results:
        actions.setdefault(r.action.name, r.action.to_doc())
    return {"schema": doc["schema"], "actions": actions, "states": doc["states"], "steps": doc["steps"]}


def trace_from_doc(schema: Schema, doc: Mapping[str, Any]) -> PlanTrace:
    """Rebuild a trace by replaying its recorded matches; recorded states must agree."""
    actions = {name: ActionSpan.from_doc(schema, a) for name, a in doc.get("actions", {}).items()}
    states_doc = doc.get("states") or []
    if not states_doc:
        raise DocumentError("trace has no states")
    x = Instance.from_doc(schema, states_doc[0])
    initial = x
    results: list[RewriteResult] = []
    for i, st in enumerate(doc.get("steps", [])):
        a = actions.get(st.get("action"))
        if a is None:
            raise DocumentError(f"trace step {i} uses unknown action {st.get('action')!r}")
        m = InstanceMorphism.from_doc(a.pre, x, st["match"])
        try:
            r = apply_action(a, m, x)
        except RewriteError as exc:
            raise DocumentError(f"trace step {i} does not replay: {exc}") from exc
        if i + 1 < len(states_doc) and Instance.from_doc(schema, states_doc[i + 1]) != r.Y:
            raise DocumentError(f"trace step {i}: recorded state differs from the replayed one")
        results.append(r)
        x = r.Y
    return PlanTrace(initial, tuple(results))
