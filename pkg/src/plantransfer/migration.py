"""Functorial data migration along an ontology map.

Each target object is populated with the rows (bindings) of its query,
evaluated over the source instance. A target hom sends a row to the row
obtained by precomposing with its query morphism; a target attribute is a
constant or the projected source value. For delta-shaped maps every query has
one variable, so rows are just source elements and this is precomposition
``X . F``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterator

from .errors import MigrationError, MigrationPartiality, OntologyMapError, SchemaMismatchError
from .instance import Instance, InstanceMorphism, _MISSING, same_value
from .ontology import Const, OntologyMap, Proj, Query, Term, check_ontology_map


@dataclass(frozen=True)
class MatchBinding:
    query: Query
    assignment: tuple[int, ...]   # one host element per query variable, in variable order

    def __getitem__(self, var: str) -> int:
        for i, v in enumerate(self.query.variables):
            if v.name == var:
                return self.assignment[i]
        raise KeyError(var)

    def as_dict(self) -> dict[str, int]:
        return {v.name: e for v, e in zip(self.query.variables, self.assignment)}


def _check_query_schema(q: Query, x: Instance) -> None:
    if q.schema != x.schema:
        raise SchemaMismatchError(f"query over {q.schema.name}, instance over {x.schema.name}")


def _iter_bindings(q: Query, x: Instance) -> Iterator[tuple[int, ...]]:
    names = [v.name for v in q.variables]
    pos = {n: i for i, n in enumerate(names)}
    # constraints become checkable once their last variable is bound
    hom_at: list[list] = [[] for _ in names]
    attr_at: list[list] = [[] for _ in names]
    forced: list[list] = [[] for _ in names]
    for eq in q.hom_eqs:
        i, j = pos[eq.src], pos[eq.tgt]
        hom_at[max(i, j)].append((eq.hom, i, j))
        if i < j:
            forced[j].append((eq.hom, i))
    for eq in q.attr_eqs:
        attr_at[pos[eq.var]].append((eq.attr, eq.value))
    assign: list[int] = [0] * len(names)

    def rec(k: int) -> Iterator[tuple[int, ...]]:
        if k == len(names):
            yield tuple(assign)
            return
        ob = q.variables[k].type
        cands: Any = x.elements(ob)
        for hom, i in forced[k]:
            t = x.homs[hom].get(assign[i])
            cands = () if t is None else (t,)
            break
        for c in cands:
            assign[k] = c
            ok = True
            for attr, value in attr_at[k]:
                w = x.attrs[attr].get(c, _MISSING)
                if w is _MISSING or not same_value(w, value):
                    ok = False
                    break
            if ok:
                for hom, i, j in hom_at[k]:
                    t = x.homs[hom].get(assign[i])
                    if t is None or t != assign[j]:
                        ok = False
                        break
            if ok:
                yield from rec(k + 1)

    yield from rec(0)


def evaluate_query(q: Query, x: Instance) -> list[MatchBinding]:
    """Satisfying assignments, ordered by variable order then element id.

    A constraint on an undefined host entry fails.
    """
    _check_query_schema(q, x)
    return [MatchBinding(q, a) for a in _iter_bindings(q, x)]


def follow(x: Instance, start: int, path: tuple[str, ...]) -> int | None:
    e: int | None = start
    for h in path:
        e = x.homs[h].get(e)
        if e is None:
            return None
    return e


def _eval_term(x: Instance, b: MatchBinding, term: Term) -> int | None:
    return follow(x, b[term.var], term.path)


@dataclass(frozen=True, eq=False)
class MigrationResult:
    instance: Instance
    # provenance[target object][element id] = binding it came from
    provenance: dict[str, list[MatchBinding]]
    source: Instance

    def index(self, ob: str) -> dict[tuple[int, ...], int]:
        return {b.assignment: i for i, b in enumerate(self.provenance[ob])}

    def provenance_doc(self) -> dict:
        x, out = self.source, {}
        for ob, rows in self.provenance.items():
            out[ob] = {
                self.instance.ref(ob, i): {v.name: x.ref(v.type, e) for v, e in zip(b.query.variables, b.assignment)}
                for i, b in enumerate(rows)}
        return out


def _require_valid(F: OntologyMap, check: bool) -> None:
    if check:
        report = check_ontology_map(F)
        if not report.ok:
            raise OntologyMapError(report.problems)


def migrate_instance(F: OntologyMap, x: Instance, check: bool = True) -> MigrationResult:
    _require_valid(F, check)
    if x.schema != F.source:
        raise SchemaMismatchError(f"instance is over {x.schema.name}, map expects {F.source.name}")
    T = F.target
    rows = {ob: evaluate_query(F.objects[ob], x) for ob in T.objects}
    index = {ob: {b.assignment: i for i, b in enumerate(bs)} for ob, bs in rows.items()}

    labels: dict[str, list[str | None]] = {}
    for ob, bs in rows.items():
        root = F.objects[ob].root
        labs = [x.labels[root.type][b.assignment[0]] for b in bs]
        dup = {lab for lab in labs if lab is not None and labs.count(lab) > 1}
        labels[ob] = [None if lab in dup else lab for lab in labs]

    homs: dict[str, dict[int, int]] = {}
    for h in T.homs:
        qm = F.homs[h.name]
        tq = F.objects[h.tgt]
        table = {}
        for i, b in enumerate(rows[h.src]):
            img = tuple(_eval_term(x, b, qm.var_map[v.name]) for v in tq.variables)
            if any(e is None for e in img):
                continue
            j = index[h.tgt].get(img)
            if j is None:
                raise MigrationError(
                    f"{h.name}: row {b.as_dict()} maps to {img}, which does not satisfy the query for {h.tgt}")
            table[i] = j
        homs[h.name] = table

    attrs: dict[str, dict[int, Any]] = {}
    for a in T.attrs:
        expr = F.attrs[a.name]
        table = {}
        for i, b in enumerate(rows[a.src]):
            if isinstance(expr, Const):
                table[i] = expr.value
            elif isinstance(expr, Proj):
                v = x.attrs[expr.attr].get(b[expr.var], _MISSING)
                if v is not _MISSING:
                    table[i] = v
        attrs[a.name] = table

    return MigrationResult(Instance(T, labels, homs, attrs), rows, x)


def migrate_morphism(F: OntologyMap, alpha: InstanceMorphism, dom: MigrationResult | None = None,
                     cod: MigrationResult | None = None, check: bool = True) -> InstanceMorphism:
    """Postcompose every row of the migrated domain with ``alpha``.

    Raises MigrationPartiality when an image row violates the target query.
    Morphisms preserve every defined hom and attribute entry, so this only
    happens when ``alpha`` is not actually a morphism.
    """
    _require_valid(F, check)
    dom = dom or migrate_instance(F, alpha.dom, check=False)
    cod = cod or migrate_instance(F, alpha.cod, check=False)
    comps = {}
    for ob in F.target.objects:
        q = F.objects[ob]
        index = cod.index(ob)
        img = []
        for b in dom.provenance[ob]:
            moved = tuple(alpha.components[v.type][e] for v, e in zip(q.variables, b.assignment))
            j = index.get(moved)
            if j is None:
                raise MigrationPartiality(
                    f"{ob}: image of row {b.as_dict()} under the morphism is not a row of the codomain")
            img.append(j)
        comps[ob] = img
    return InstanceMorphism(dom.instance, cod.instance, comps)


def is_delta(F: OntologyMap) -> bool:
    """Delta-shaped: bare single-variable queries, generator-valued homs, projected attrs."""
    if not all(q.is_bare() for q in F.objects.values()):
        return False
    if not all(isinstance(e, Proj) for e in F.attrs.values()):
        return False
    for qm in F.homs.values():
        if any(len(t.path) != 1 for t in qm.var_map.values()):
            return False
    return True
