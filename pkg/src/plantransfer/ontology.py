"""Conjunctive queries and ontology maps (translation functors) between schemas.

An ontology map ``F`` goes from the *target* schema to the *source* schema:
each target object becomes a conjunctive query over the source, each target hom
becomes a query morphism, each target attribute an expression (a constant or a
projection of one source attribute).

A query morphism ``Q1 -> Q2`` sends every variable of ``Q2`` to a term over
``Q1``: a ``Q1`` variable followed by a (possibly empty) path of source homs.
It is well formed when every constraint of ``Q2``, translated along the map,
is syntactically entailed by the constraints of ``Q1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, NamedTuple, Union

from .instance import same_value
from .schema import Schema, value_has_kind


class Var(NamedTuple):
    name: str
    type: str


class HomEq(NamedTuple):
    """``hom(src) == tgt`` between two query variables."""
    hom: str
    src: str
    tgt: str


class AttrEq(NamedTuple):
    """``attr(var) == value`` for a constant value."""
    attr: str
    var: str
    value: Any


class Term(NamedTuple):
    var: str
    path: tuple[str, ...] = ()

    def __str__(self) -> str:
        out = self.var
        for h in self.path:
            out = f"{h}({out})"
        return out


@dataclass(frozen=True)
class Query:
    schema: Schema
    variables: tuple[Var, ...]
    hom_eqs: tuple[HomEq, ...] = ()
    attr_eqs: tuple[AttrEq, ...] = ()

    @classmethod
    def bare(cls, schema: Schema, ob: str, var: str | None = None) -> "Query":
        return cls(schema, (Var(var or ob, ob),))

    def var_type(self, name: str) -> str | None:
        for v in self.variables:
            if v.name == name:
                return v.type
        return None

    @property
    def root(self) -> Var:
        return self.variables[0]

    def is_bare(self) -> bool:
        return len(self.variables) == 1 and not self.hom_eqs and not self.attr_eqs

    def specificity(self) -> tuple[int, int]:
        return (len(self.hom_eqs) + len(self.attr_eqs), len(self.variables))

    def problems(self) -> list[str]:
        s = self.schema
        out = []
        if not self.variables:
            out.append("query has no variables")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            out.append(f"duplicate variable names in {names}")
        for v in self.variables:
            if v.type not in s.objects:
                out.append(f"variable {v.name}: unknown type {v.type!r}")
        for eq in self.hom_eqs:
            if not s.has_hom(eq.hom):
                out.append(f"unknown hom {eq.hom!r}")
                continue
            h = s.hom(eq.hom)
            if self.var_type(eq.src) != h.src or self.var_type(eq.tgt) != h.tgt:
                out.append(f"{eq.hom}({eq.src}) == {eq.tgt}: variable types do not fit {h.src} -> {h.tgt}")
        for eq in self.attr_eqs:
            if not s.has_attr(eq.attr):
                out.append(f"unknown attr {eq.attr!r}")
                continue
            a = s.attr(eq.attr)
            if self.var_type(eq.var) != a.src:
                out.append(f"{eq.attr}({eq.var}): variable is not a {a.src}")
            kind = s.attr_kind(eq.attr)
            if not value_has_kind(eq.value, kind):
                out.append(f"{eq.attr}({eq.var}) == {eq.value!r}: constant is not a {kind}")
        return out

    def normalize(self, term: Term) -> Term:
        """Rewrite leading hom steps through this query's hom constraints."""
        var, path = term.var, term.path
        while path:
            nxt = next((eq.tgt for eq in self.hom_eqs if eq.hom == path[0] and eq.src == var), None)
            if nxt is None:
                break
            var, path = nxt, path[1:]
        return Term(var, path)

    def term_type(self, term: Term) -> str | None:
        ob = self.var_type(term.var)
        for h in term.path:
            if ob is None or not self.schema.has_hom(h) or self.schema.hom(h).src != ob:
                return None
            ob = self.schema.hom(h).tgt
        return ob

    def to_doc(self) -> dict:
        return {
            "vars": [{"name": v.name, "type": v.type} for v in self.variables],
            "homEqs": [{"hom": e.hom, "src": e.src, "tgt": e.tgt} for e in self.hom_eqs],
            "attrEqs": [{"attr": e.attr, "var": e.var, "value": e.value} for e in self.attr_eqs],
        }

    @classmethod
    def from_doc(cls, schema: Schema, doc: Mapping[str, Any] | str) -> "Query":
        if isinstance(doc, str):
            return cls.bare(schema, doc)
        return cls(
            schema,
            tuple(Var(v["name"], v["type"]) for v in doc.get("vars", ())),
            tuple(HomEq(e["hom"], e["src"], e["tgt"]) for e in doc.get("homEqs", ())),
            tuple(AttrEq(e["attr"], e["var"], e["value"]) for e in doc.get("attrEqs", ())),
        )

    def __str__(self) -> str:
        parts = [f"{v.name}::{v.type}" for v in self.variables]
        parts += [f"{e.hom}({e.src}) == {e.tgt}" for e in self.hom_eqs]
        parts += [f"{e.attr}({e.var}) == {e.value!r}" for e in self.attr_eqs]
        return "{" + "; ".join(parts) + "}"


@dataclass(frozen=True)
class QueryMorphism:
    """``source -> target`` given by ``var_map``: target variable -> term over source."""
    source: Query
    target: Query
    var_map: Mapping[str, Term]

    def problems(self) -> list[str]:
        src, tgt = self.source, self.target
        out = []
        for v in tgt.variables:
            term = self.var_map.get(v.name)
            if term is None:
                out.append(f"target variable {v.name} is not mapped")
                continue
            if src.var_type(term.var) is None:
                out.append(f"{v.name} -> {term}: {term.var} is not a variable of the source query")
                continue
            ty = src.term_type(term)
            if ty is None:
                out.append(f"{v.name} -> {term}: ill-typed hom path")
            elif ty != v.type:
                out.append(f"{v.name} -> {term}: term has type {ty}, variable has type {v.type}")
        extra = set(self.var_map) - {v.name for v in tgt.variables}
        if extra:
            out.append(f"mapping for unknown target variables {sorted(extra)}")
        if out:
            return out
        for eq in tgt.hom_eqs:
            lhs = self.var_map[eq.src]
            lhs = src.normalize(Term(lhs.var, lhs.path + (eq.hom,)))
            rhs = src.normalize(self.var_map[eq.tgt])
            if lhs != rhs:
                out.append(f"constraint {eq.hom}({eq.src}) == {eq.tgt} translates to {lhs} == {rhs}, "
                           f"which the source query does not state")
        for eq in tgt.attr_eqs:
            t = src.normalize(self.var_map[eq.var])
            ok = not t.path and any(
                a.attr == eq.attr and a.var == t.var and same_value(a.value, eq.value) for a in src.attr_eqs)
            if not ok:
                out.append(f"constraint {eq.attr}({eq.var}) == {eq.value!r} translates to "
                           f"{eq.attr}({t}) == {eq.value!r}, which the source query does not state")
        return out

    def is_identity_shaped(self) -> bool:
        """True when this is a renaming isomorphism between two copies of one query."""
        src, tgt = self.source, self.target
        if len(src.variables) != len(tgt.variables):
            return False
        if any(t.path for t in self.var_map.values()):
            return False
        ren = {v: t.var for v, t in self.var_map.items()}
        if len(set(ren.values())) != len(ren):
            return False
        mapped_homs = {HomEq(e.hom, ren[e.src], ren[e.tgt]) for e in tgt.hom_eqs}
        mapped_attrs = {(e.attr, ren[e.var], type(e.value), e.value) for e in tgt.attr_eqs}
        return (mapped_homs == set(src.hom_eqs)
                and mapped_attrs == {(e.attr, e.var, type(e.value), e.value) for e in src.attr_eqs})

    def to_doc(self) -> dict:
        return {v: (t.var if not t.path else [t.var, *t.path]) for v, t in self.var_map.items()}


def parse_term(doc: str | list) -> Term:
    if isinstance(doc, str):
        return Term(doc)
    return Term(doc[0], tuple(doc[1:]))


@dataclass(frozen=True)
class Const:
    value: Any

    def to_doc(self) -> dict:
        return {"const": self.value}


@dataclass(frozen=True)
class Proj:
    var: str
    attr: str

    def to_doc(self) -> dict:
        return {"proj": [self.var, self.attr]}


AttrExpr = Union[Const, Proj]


def parse_attr_expr(doc: Mapping[str, Any]) -> AttrExpr:
    if "const" in doc:
        return Const(doc["const"])
    if "proj" in doc:
        var, attr = doc["proj"]
        return Proj(var, attr)
    raise ValueError(f"attribute expression must be {{'const': v}} or {{'proj': [var, attr]}}, got {doc!r}")


@dataclass(frozen=True)
class OntologyMap:
    source: Schema
    target: Schema
    objects: Mapping[str, Query]
    homs: Mapping[str, QueryMorphism]
    attrtypes: Mapping[str, str] = field(default_factory=dict)
    attrs: Mapping[str, AttrExpr] = field(default_factory=dict)

    def to_doc(self, source_ref: str | None = None, target_ref: str | None = None) -> dict:
        return {
            "source": source_ref if source_ref is not None else self.source.name,
            "target": target_ref if target_ref is not None else self.target.name,
            "objects": {ob: q.to_doc() for ob, q in self.objects.items()},
            "homs": {h: qm.to_doc() for h, qm in self.homs.items()},
            "attrtypes": dict(self.attrtypes),
            "attrs": {a: e.to_doc() for a, e in self.attrs.items()},
        }

    @classmethod
    def from_doc(cls, source: Schema, target: Schema, doc: Mapping[str, Any]) -> "OntologyMap":
        objects = {ob: Query.from_doc(source, q) for ob, q in doc.get("objects", {}).items()}
        homs = {}
        for name, vm in doc.get("homs", {}).items():
            h = target.hom(name) if target.has_hom(name) else None
            empty = Query(source, ())
            src_q = objects.get(h.src, empty) if h else empty
            tgt_q = objects.get(h.tgt, empty) if h else empty
            homs[name] = QueryMorphism(src_q, tgt_q, {v: parse_term(t) for v, t in vm.items()})
        attrs = {a: parse_attr_expr(e) for a, e in doc.get("attrs", {}).items()}
        return cls(source, target, objects, homs, dict(doc.get("attrtypes", {})), attrs)


@dataclass
class MapReport:
    ok: bool
    problems: list[str]
    assumptions: list[str]

    def __bool__(self) -> bool:
        return self.ok

    def render(self) -> str:
        lines = ["ok" if self.ok else f"{len(self.problems)} problem(s)"]
        lines += [f"error: {p}" for p in self.problems]
        lines += [f"note: {a}" for a in self.assumptions]
        return "\n".join(lines)


FREE_SCHEMA_NOTE = ("schemas are free (no path equations), so checking generators suffices "
                    "for preservation of composition")


def check_ontology_map(F: OntologyMap) -> MapReport:
    """Check every rule an ontology map must satisfy; diagnostics name the target generator."""
    S, T = F.source, F.target
    problems: list[str] = []

    for ob in T.objects:
        q = F.objects.get(ob)
        if q is None:
            problems.append(f"object {ob}: not mapped")
            continue
        if q.schema != S:
            problems.append(f"object {ob}: query is not over {S.name}")
        problems += [f"object {ob}: {p}" for p in q.problems()]
    for ob in F.objects:
        if ob not in T.objects:
            problems.append(f"object {ob}: not an object of {T.name}")

    for h in T.homs:
        qm = F.homs.get(h.name)
        if qm is None:
            problems.append(f"hom {h.name}: not mapped")
            continue
        src_q, tgt_q = F.objects.get(h.src), F.objects.get(h.tgt)
        if src_q is None or tgt_q is None:
            continue
        if qm.source != src_q or qm.target != tgt_q:
            problems.append(f"hom {h.name}: query morphism endpoints differ from the images of {h.src}, {h.tgt}")
            continue
        if src_q.problems() or tgt_q.problems():
            continue
        sub = qm.problems()
        problems += [f"hom {h.name}: {p}" for p in sub]
        if not sub and qm.is_identity_shaped():
            obs = sorted({v.type for v in src_q.variables})
            paths = [p for ob in obs for p in S.paths(ob, ob)]
            hint = ("" if paths else f"; {S.name} has no hom from {' or '.join(obs)} to itself")
            problems.append(
                f"hom {h.name}: {h.src} and {h.tgt} both map to {src_q} and {h.name} collapses to an "
                f"identity, so no source predicate realizes it{hint}")
    for name in F.homs:
        if not T.has_hom(name):
            problems.append(f"hom {name}: not a hom of {T.name}")

    for t in T.attrtypes:
        kind = F.attrtypes.get(t.name)
        if kind is None:
            problems.append(f"attrtype {t.name}: not mapped")
        elif kind != t.kind:
            problems.append(f"attrtype {t.name}: mapped to {kind}, but it is declared {t.kind}")
    for name in F.attrtypes:
        if name not in {t.name for t in T.attrtypes}:
            problems.append(f"attrtype {name}: not an attrtype of {T.name}")

    for a in T.attrs:
        expr = F.attrs.get(a.name)
        if expr is None:
            problems.append(f"attr {a.name}: not mapped")
            continue
        kind = T.attr_kind(a.name)
        if isinstance(expr, Const):
            if not value_has_kind(expr.value, kind):
                problems.append(f"attr {a.name}: constant {expr.value!r} is not a {kind}")
        elif isinstance(expr, Proj):
            q = F.objects.get(a.src)
            if q is None:
                continue
            vt = q.var_type(expr.var)
            if vt is None:
                problems.append(f"attr {a.name}: {expr.var} is not a variable of the image of {a.src}")
            elif not S.has_attr(expr.attr):
                problems.append(f"attr {a.name}: {expr.attr} is not an attr of {S.name}")
            else:
                sa = S.attr(expr.attr)
                if sa.src != vt:
                    problems.append(f"attr {a.name}: {expr.attr} is defined on {sa.src}, not {vt}")
                elif S.attr_kind(expr.attr) != kind:
                    problems.append(f"attr {a.name}: {expr.attr} has kind {S.attr_kind(expr.attr)}, "
                                    f"expected {kind}")
        else:
            problems.append(f"attr {a.name}: unsupported expression {expr!r}")
    for name in F.attrs:
        if not T.has_attr(name):
            problems.append(f"attr {name}: not an attr of {T.name}")

    return MapReport(not problems, problems, [FREE_SCHEMA_NOTE])


def identity_map(D: Schema) -> OntologyMap:
    return delta_map(D, D, {ob: ob for ob in D.objects}, {h.name: h.name for h in D.homs},
                     {a.name: a.name for a in D.attrs})


def delta_map(source: Schema, target: Schema, objects: Mapping[str, str],
              homs: Mapping[str, str | tuple[str, ...]], attrs: Mapping[str, str]) -> OntologyMap:
    """Map built from generator assignments: objects to objects, homs to hom paths, attrs to attrs."""
    queries = {ob: Query.bare(source, objects[ob]) for ob in target.objects}
    qms = {}
    for h in target.homs:
        path = homs[h.name]
        path = (path,) if isinstance(path, str) else tuple(path)
        s, t = queries[h.src], queries[h.tgt]
        qms[h.name] = QueryMorphism(s, t, {t.root.name: Term(s.root.name, path)})
    exprs = {a.name: Proj(queries[a.src].root.name, attrs[a.name]) for a in target.attrs}
    kinds = {t.name: t.kind for t in target.attrtypes}
    return OntologyMap(source, target, queries, qms, kinds, exprs)
