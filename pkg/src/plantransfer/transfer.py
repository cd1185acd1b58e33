"""Plan transfer along an ontology map, and validation of the transferred plan.

Two modes:

``delta``
    Each action span and its match are migrated and the target states are
    re-derived by rewriting in the target domain. Only available for
    delta-shaped maps, where migration preserves the pushouts involved.
``trace``
    Each executed step ``X_i <- Z_i -> X_{i+1}`` of the source trace is
    migrated as a whole. Used for conjunctive-query maps: rule patterns leave
    attributes undefined, so filtered queries cannot classify their elements,
    while the concrete states can.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .errors import OntologyMapError, PlanTransferError, RewriteError, SchemaMismatchError, TransferError
from .homsearch import exists_mono, find_isomorphism, first_hom, goal_satisfaction, is_isomorphic
from .instance import Instance, InstanceMorphism
from .migration import MigrationResult, is_delta, migrate_instance, migrate_morphism
from .ontology import OntologyMap, check_ontology_map
from .rewrite import ActionSpan, PlanTrace, RewriteResult, apply_action


@dataclass(frozen=True, eq=False)
class TransferredStep:
    name: str
    source_name: str
    X: Instance
    Z: Instance
    Y: Instance
    u: InstanceMorphism
    v: InstanceMorphism
    # delta mode only
    action: ActionSpan | None = None
    match: InstanceMorphism | None = None

    def deleted(self) -> dict[str, list[int]]:
        return {ob: sorted(set(self.X.elements(ob)) - self.u.image(ob)) for ob in self.X.schema.objects}

    def created(self) -> dict[str, list[int]]:
        return {ob: sorted(set(self.Y.elements(ob)) - self.v.image(ob)) for ob in self.Y.schema.objects}

    def to_doc(self) -> dict:
        doc: dict[str, Any] = {"name": self.name, "source": self.source_name}
        doc["deleted"] = {ob: [self.X.ref(ob, e) for e in es] for ob, es in self.deleted().items() if es}
        doc["created"] = {ob: [self.Y.ref(ob, e) for e in es] for ob, es in self.created().items() if es}
        doc["Z"] = self.Z.to_doc()
        doc["u"] = self.u.to_doc()["components"]
        doc["v"] = self.v.to_doc()["components"]
        if self.action is not None and self.match is not None:
            doc["action"] = self.action.to_doc()
            doc["match"] = self.match.to_doc()["components"]
        return doc


@dataclass(frozen=True, eq=False)
class TransferredPlan:
    mode: str
    states: tuple[Instance, ...]
    steps: tuple[TransferredStep, ...]
    source: PlanTrace | None = None

    @property
    def final(self) -> Instance:
        return self.states[-1]

    @property
    def schema(self):
        return self.states[0].schema

    def __len__(self) -> int:
        return len(self.steps)

    def step_names(self) -> list[str]:
        return [s.name for s in self.steps]

    def to_doc(self, schema_ref: str | None = None) -> dict:
        doc: dict[str, Any] = {"mode": self.mode}
        if schema_ref is not None:
            doc["schema"] = schema_ref
        doc["plan"] = "; ".join(self.step_names())
        doc["states"] = [s.to_doc() for s in self.states]
        doc["steps"] = [s.to_doc() for s in self.steps]
        return doc

    @classmethod
    def from_doc(cls, schema, doc: Mapping[str, Any]) -> "TransferredPlan":
        states = tuple(Instance.from_doc(schema, s) for s in doc["states"])
        steps = []
        for i, sd in enumerate(doc.get("steps", [])):
            x, y = states[i], states[i + 1]
            z = Instance.from_doc(schema, sd["Z"])
            action = match = None
            if "action" in sd:
                action = ActionSpan.from_doc(schema, sd["action"])
                match = InstanceMorphism.from_doc(action.pre, x, sd["match"])
            steps.append(TransferredStep(sd["name"], sd.get("source", sd["name"]), x, z, y,
                                         InstanceMorphism.from_doc(z, x, sd["u"]),
                                         InstanceMorphism.from_doc(z, y, sd["v"]), action, match))
        return cls(doc["mode"], states, tuple(steps))


@dataclass
class TransferReport:
    valid: bool
    goal_satisfaction: float
    mode: str
    diagnostics: list[str] = field(default_factory=list)
    witness: InstanceMorphism | None = None


def migrate_span(F: OntologyMap, a: ActionSpan) -> ActionSpan:
    pre, keep, eff = (migrate_instance(F, p, check=False) for p in (a.pre, a.keep, a.eff))
    l = migrate_morphism(F, a.l, keep, pre, check=False)
    r = migrate_morphism(F, a.r, keep, eff, check=False)
    return ActionSpan(a.name, pre.instance, keep.instance, eff.instance, l, r)


def _lineages(trace: PlanTrace) -> list[dict[str, list[int]]]:
    """Stable identities of elements across the states of a trace."""
    counter = 0
    first: dict[str, list[int]] = {}
    for ob in trace.schema.objects:
        first[ob] = list(range(counter, counter + trace.initial.count(ob)))
        counter += trace.initial.count(ob)
    out = [first]
    for r in trace.results:
        prev, nxt = out[-1], {}
        for ob in trace.schema.objects:
            back = {}
            for z, y in enumerate(r.v.components[ob]):
                back.setdefault(y, prev[ob][r.u.components[ob][z]])
            ids = []
            for y in r.Y.elements(ob):
                if y in back:
                    ids.append(back[y])
                else:
                    ids.append(counter)
                    counter += 1
            nxt[ob] = ids
        out.append(nxt)
    return out


def _step_names(F: OntologyMap, trace: PlanTrace, migrated: Sequence[MigrationResult],
                aliases: Mapping[str, str] | None) -> list[str]:
    aliases = aliases or {}
    lineage = _lineages(trace)
    target_rank = {ob: i for i, ob in enumerate(F.target.objects)}
    raw: list[tuple[str, list[tuple[str, int] | str]]] = []
    for i, r in enumerate(trace.results):
        args: list[tuple[str, int] | str] = []
        for ob, e in r.action.param_elements():
            host = r.match.components[ob][e]
            best = None
            for tob in F.target.objects:
                q = F.objects[tob]
                if q.root.type != ob:
                    continue
                if any(b.assignment[0] == host for b in migrated[i].provenance[tob]):
                    key = (q.specificity(), -target_rank[tob])
                    if best is None or key > best[0]:
                        best = (key, tob)
            if best is None:
                args.append(r.X.ref(ob, host))  # not visible in the target domain
            else:
                args.append((best[1], lineage[i][ob][host]))
        raw.append((r.action.name, args))
    seen: dict[str, list[int]] = {}
    for _, args in raw:
        for arg in args:
            if isinstance(arg, tuple) and arg[1] not in seen.setdefault(arg[0], []):
                seen[arg[0]].append(arg[1])
    names = []
    for action, args in raw:
        parts = []
        for arg in args:
            if isinstance(arg, str):
                parts.append(arg)
                continue
            tob, lin = arg
            stem = aliases.get(tob, tob)
            parts.append(stem if len(seen[tob]) == 1 else f"{stem}{seen[tob].index(lin) + 1}")
        names.append(f"{action}({', '.join(parts)})")
    return names


def _chain(x_prev: Instance, m: InstanceMorphism, migrated_x: Instance) -> InstanceMorphism:
    """Retarget a migrated match from Δ(X_i) to the derived target state X'_i."""
    if migrated_x == x_prev:
        return InstanceMorphism(m.dom, x_prev, m.components)
    iso = find_isomorphism(migrated_x, x_prev)
    if iso is None:
        raise TransferError("derived target state is not isomorphic to the migrated source state")
    return m.then(iso)


def transfer_plan(F: OntologyMap, trace: PlanTrace, mode: str | None = None,
                  aliases: Mapping[str, str] | None = None) -> TransferredPlan:
    """Transfer every grounded step of ``trace`` along ``F``.

    ``mode`` defaults to ``delta`` for delta-shaped maps and ``trace`` otherwise.
    ``aliases`` renames target types in the derived step names (e.g.
    ``{"BreadSliced": "bread"}``).
    """
    report = check_ontology_map(F)
    if not report.ok:
        raise OntologyMapError(report.problems)
    if trace.schema != F.source:
        raise SchemaMismatchError(f"trace is over {trace.schema.name}, map expects {F.source.name}")
    delta = is_delta(F)
    mode = mode or ("delta" if delta else "trace")
    if mode not in ("delta", "trace"):
        raise TransferError(f"unknown transfer mode {mode!r}")
    if mode == "delta" and not delta:
        raise TransferError("delta-mode transfer needs a delta-shaped ontology map")

    migrated = [migrate_instance(F, x, check=False) for x in trace.states]
    names = _step_names(F, trace, migrated, aliases)
    steps: list[TransferredStep] = []

    if mode == "trace":
        for i, r in enumerate(trace.results):
            try:
                mz = migrate_instance(F, r.Z, check=False)
                u = migrate_morphism(F, r.u, mz, migrated[i], check=False)
                v = migrate_morphism(F, r.v, mz, migrated[i + 1], check=False)
            except PlanTransferError as exc:
                raise type(exc)(f"step {i}: {exc}") if not isinstance(exc, OntologyMapError) else exc
            steps.append(TransferredStep(names[i], _source_name(r), migrated[i].instance, mz.instance,
                                         migrated[i + 1].instance, u, v))
        return TransferredPlan("trace", tuple(m.instance for m in migrated), tuple(steps), trace)

    states = [migrated[0].instance]
    for i, r in enumerate(trace.results):
        a2 = migrate_span(F, r.action)
        m2 = migrate_morphism(F, r.match, migrate_instance(F, r.action.pre, check=False), migrated[i],
                              check=False)
        m2 = InstanceMorphism(a2.pre, m2.cod, m2.components)
        m2 = _chain(states[-1], m2, migrated[i].instance)
        try:
            res = apply_action(a2, m2, states[-1])
        except RewriteError as exc:
            raise TransferError(f"step {i}: migrated action does not apply: {exc}") from exc
        if not is_isomorphic(res.Y, migrated[i + 1].instance):
            raise TransferError(f"step {i}: rewriting in the target disagrees with the migrated source state")
        states.append(res.Y)
        steps.append(TransferredStep(names[i], _source_name(r), res.X, res.Z, res.Y, res.u, res.v, a2, m2))
    return TransferredPlan("delta", tuple(states), tuple(steps), trace)


def _source_name(r: RewriteResult) -> str:
    from .rewrite import step_name
    return step_name(r)


def validate_transfer(F: OntologyMap, goal: Instance, tp: TransferredPlan,
                      target_goal: Instance | None = None) -> TransferReport:
    """Check that the migrated goal embeds monically in the final transferred state.

    In delta mode with the source trace at hand, validity follows from the
    source plan's validity; the target embedding is still searched for and must
    agree. ``target_goal`` replaces the migrated goal (for checking a transfer
    against an intended goal computed with a different map).
    """
    if tp.schema != F.target:
        raise SchemaMismatchError("transferred plan is not over the map's target schema")
    if tp.mode == "delta" and not is_delta(F):
        raise TransferError("plan was transferred in delta mode but the map is not delta-shaped")
    g2 = target_goal if target_goal is not None else migrate_instance(F, goal).instance
    final = tp.final
    witness = first_hom(g2, final, monic=True)
    found = witness is not None
    diagnostics = []
    if tp.mode == "delta" and tp.source is not None and target_goal is None:
        valid = exists_mono(goal, tp.source.final)
        diagnostics.append("delta mode: validity inherited from the source plan")
        if valid != found:
            raise TransferError("delta transfer broke goal preservation; this indicates a bug")
    else:
        valid = found
        diagnostics.append("goal embedding " + ("found" if found else "not found") + " by search")
    score = goal_satisfaction(g2, final)
    return TransferReport(valid, score, tp.mode, diagnostics, witness)


@dataclass
class PlanDiff:
    equal: bool
    first_divergence: int | None
    details: list[str]

    def __bool__(self) -> bool:
        return self.equal


def _shape(p: PlanTrace | TransferredPlan) -> tuple[list[Instance], list[Instance]]:
    if isinstance(p, PlanTrace):
        return p.states, [r.Z for r in p.results]
    return list(p.states), [s.Z for s in p.steps]


def diff_plans(a: PlanTrace | TransferredPlan, b: PlanTrace | TransferredPlan) -> PlanDiff:
    """Stepwise comparison up to isomorphism; reports the first differing step."""
    sa, za = _shape(a)
    sb, zb = _shape(b)
    if sa[0].schema != sb[0].schema:
        raise SchemaMismatchError("plans are over different schemas")
    details = []
    if len(sa) != len(sb):
        details.append(f"step counts differ: {len(sa) - 1} vs {len(sb) - 1}")
    first = None
    for i in range(min(len(sa), len(sb))):
        if not is_isomorphic(sa[i], sb[i]):
            details.append(f"state {i} differs")
            first = i if first is None else first
        if i < min(len(za), len(zb)) and not is_isomorphic(za[i], zb[i]):
            details.append(f"context of step {i} differs")
            first = i if first is None else first
    if first is None and len(sa) != len(sb):
        first = min(len(sa), len(sb)) - 1
    return PlanDiff(not details, first, details)
