"""Actions as spans ``Pre <-l- Keep -r-> Eff`` applied by double-pushout rewriting.

Patterns are partial, which lets a rule *redefine* an entry on a kept element
(retarget ``isHolding``, flip ``isClear``). For a kept element ``k`` and a
hom or attribute ``f``:

* if Keep defines ``f(k)``, the host entry is kept as is;
* otherwise, if Pre defines ``f(l(k))`` or Eff defines ``f(r(k))``, the host
  entry is dropped from the context Z (and reinstated by Eff if Eff defines it);
* otherwise the host entry survives untouched.

The result Y is then the pushout of ``Z <- Keep -> Eff``. The left square is
not a pushout in general, because dropped entries are absent from Z.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .errors import (AmbiguousMatch, DanglingViolation, IncompleteResult, InstanceError, InvalidMatch,
                     MorphismError, PlanError, PushoutError, RewriteError, SchemaMismatchError)
from .homsearch import find_homs
from .instance import Instance, InstanceMorphism, _MISSING, same_value
from .schema import Schema


@dataclass(frozen=True, eq=False)
class ActionSpan:
    name: str
    pre: Instance
    keep: Instance
    eff: Instance
    l: InstanceMorphism
    r: InstanceMorphism
    # labels of Pre elements that name the action's arguments, e.g. ("block", "underblock")
    params: tuple[str, ...] = ()

    def __post_init__(self):
        s = self.pre.schema
        if self.keep.schema != s or self.eff.schema != s:
            raise SchemaMismatchError(f"action {self.name}: patterns over different schemas")
        if self.l.dom is not self.keep or self.l.cod is not self.pre:
            raise MorphismError(f"action {self.name}: l must go Keep -> Pre")
        if self.r.dom is not self.keep or self.r.cod is not self.eff:
            raise MorphismError(f"action {self.name}: r must go Keep -> Eff")
        if not self.l.is_monic():
            raise MorphismError(f"action {self.name}: l is not monic")
        for which, mor in (("l", self.l), ("r", self.r)):
            bad = mor.violations()
            if bad:
                raise MorphismError(f"action {self.name}: {which} is not a morphism: {bad[0]}")
        for p in self.params:
            _find_label(self.pre, p)

    @property
    def schema(self) -> Schema:
        return self.pre.schema

    @classmethod
    def identity(cls, pattern: Instance, name: str = "id") -> "ActionSpan":
        ident = InstanceMorphism.identity(pattern)
        return cls(name, pattern, pattern, pattern, ident, ident)

    def param_elements(self) -> list[tuple[str, int]]:
        return [_find_label(self.pre, p) for p in self.params]

    def to_doc(self, schema_ref: str | None = None) -> dict:
        doc: dict[str, Any] = {"name": self.name}
        if schema_ref is not None:
            doc["schema"] = schema_ref
        doc["params"] = list(self.params)
        doc["pre"] = self.pre.to_doc()
        doc["keep"] = self.keep.to_doc()
        doc["eff"] = self.eff.to_doc()
        doc["l"] = self.l.to_doc()["components"]
        doc["r"] = self.r.to_doc()["components"]
        return doc

    @classmethod
    def from_doc(cls, schema: Schema, doc: Mapping[str, Any]) -> "ActionSpan":
        pre = Instance.from_doc(schema, doc["pre"])
        keep = Instance.from_doc(schema, doc["keep"])
        eff = Instance.from_doc(schema, doc["eff"])
        l = InstanceMorphism.from_doc(keep, pre, doc["l"])
        r = InstanceMorphism.from_doc(keep, eff, doc["r"])
        return cls(doc["name"], pre, keep, eff, l, r, tuple(doc.get("params", ())))


def build_action(schema: Schema, name: str, pre: str, keep: str, eff: str,
                 params: Sequence[str] = ()) -> ActionSpan:
    """Action from three listings; Keep elements are sent to the equally labeled Pre/Eff elements."""
    from .instance import build_instance
    p, k, e = (build_instance(schema, text) for text in (pre, keep, eff))

    def by_label(dst: Instance, which: str) -> InstanceMorphism:
        comps = {}
        for ob in schema.objects:
            img = []
            for lab in k.labels[ob]:
                if lab is None or lab not in dst.labels[ob]:
                    raise InstanceError(f"action {name}: Keep element {lab!r} has no counterpart in {which}")
                img.append(dst.labels[ob].index(lab))
            comps[ob] = img
        return InstanceMorphism(k, dst, comps)

    return ActionSpan(name, p, k, e, by_label(p, "Pre"), by_label(e, "Eff"), tuple(params))


def _find_label(inst: Instance, label: str) -> tuple[str, int]:
    hits = [(ob, inst.labels[ob].index(label)) for ob in inst.schema.objects if label in inst.labels[ob]]
    if not hits:
        raise InstanceError(f"no element labeled {label!r}")
    if len(hits) > 1:
        raise InstanceError(f"label {label!r} is used by several types")
    return hits[0]


@dataclass(frozen=True, eq=False)
class GroundedStep:
    action: ActionSpan
    match: InstanceMorphism


@dataclass(frozen=True, eq=False)
class RewriteResult:
    action: ActionSpan
    match: InstanceMorphism   # Pre -> X
    X: Instance
    Z: Instance
    Y: Instance
    u: InstanceMorphism       # Z -> X
    v: InstanceMorphism       # Z -> Y
    keep_to_z: InstanceMorphism
    comatch: InstanceMorphism  # Eff -> Y
    deleted: dict[str, list[int]] = field(default_factory=dict)   # X elements
    created: dict[str, list[int]] = field(default_factory=dict)   # Y elements


# ---------------------------------------------------------------------------
# Pushouts of partial instances


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def add(self, k):
        self.parent.setdefault(k, k)

    def find(self, k):
        while self.parent[k] != k:
            self.parent[k] = self.parent[self.parent[k]]
            k = self.parent[k]
        return k

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # keep the smaller key as representative so Z-side elements win
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def pushout(f: InstanceMorphism, g: InstanceMorphism) -> tuple[Instance, InstanceMorphism, InstanceMorphism]:
    """Pushout of ``B <-f- A -g-> C`` in partial instances.

    Returns ``(P, B -> P, C -> P)``. Elements of B come first in P (in B's
    order), then elements of C not identified with any of them. Hom entries are
    unioned; two entries forced onto the same element identify their targets
    (congruence closure). Clashing attribute values have no cocone at all and
    raise PushoutError. Labels come from B only.
    """
    if f.dom is not g.dom and f.dom != g.dom:
        raise MorphismError("pushout legs must share a domain")
    a, b, c = f.dom, f.cod, g.cod
    s = a.schema
    uf = _UnionFind()
    for ob in s.objects:
        for x in b.elements(ob):
            uf.add((ob, 0, x))
        for x in c.elements(ob):
            uf.add((ob, 1, x))
        for x in a.elements(ob):
            uf.union((ob, 0, f.components[ob][x]), (ob, 1, g.components[ob][x]))
    changed = True
    while changed:
        changed = False
        for h in s.homs:
            seen: dict = {}
            for side, inst in ((0, b), (1, c)):
                for x, y in inst.homs[h.name].items():
                    src = uf.find((h.src, side, x))
                    tgt = uf.find((h.tgt, side, y))
                    prev = seen.get(src)
                    if prev is None:
                        seen[src] = tgt
                    elif uf.find(prev) != tgt:
                        uf.union(prev, tgt)
                        changed = True
    index: dict = {}
    labels: dict[str, list[str | None]] = {}
    for ob in s.objects:
        labels[ob] = []
        for side, inst in ((0, b), (1, c)):
            for x in inst.elements(ob):
                root = uf.find((ob, side, x))
                if root not in index:
                    index[root] = len(labels[ob])
                    labels[ob].append(b.labels[ob][x] if side == 0 else None)
                elif side == 0 and labels[ob][index[root]] is None:
                    labels[ob][index[root]] = b.labels[ob][x]
    for ob in s.objects:
        # merged Z elements may carry duplicate labels; keep the first
        seen_labels = set()
        for i, lab in enumerate(labels[ob]):
            if lab is not None:
                if lab in seen_labels:
                    labels[ob][i] = None
                seen_labels.add(lab)

    def img(ob, side, x):
        return index[uf.find((ob, side, x))]

    homs: dict[str, dict[int, int]] = {}
    for h in s.homs:
        table: dict[int, int] = {}
        for side, inst in ((0, b), (1, c)):
            for x, y in inst.homs[h.name].items():
                table[img(h.src, side, x)] = img(h.tgt, side, y)
        homs[h.name] = table
    attrs: dict[str, dict[int, Any]] = {}
    for at in s.attrs:
        table: dict[int, Any] = {}
        for side, inst in ((0, b), (1, c)):
            for x, v in inst.attrs[at.name].items():
                k = img(at.src, side, x)
                old = table.get(k, _MISSING)
                if old is not _MISSING and not same_value(old, v):
                    raise PushoutError(f"{at.name}: values {old!r} and {v!r} forced onto one element")
                table[k] = v
        attrs[at.name] = table
    p = Instance(s, labels, homs, attrs)
    to_p_b = InstanceMorphism(b, p, {ob: [img(ob, 0, x) for x in b.elements(ob)] for ob in s.objects})
    to_p_c = InstanceMorphism(c, p, {ob: [img(ob, 1, x) for x in c.elements(ob)] for ob in s.objects})
    return p, to_p_b, to_p_c


# ---------------------------------------------------------------------------
# Rule application


def _check_match(a: ActionSpan, m: InstanceMorphism, x: Instance) -> None:
    if m.dom is not a.pre and m.dom != a.pre:
        raise InvalidMatch(f"{a.name}: match domain is not the rule's precondition")
    if m.cod is not x and m.cod != x:
        raise InvalidMatch(f"{a.name}: match does not land in the given state")
    if not m.is_monic():
        raise InvalidMatch(f"{a.name}: match is not monic")
    bad = m.violations()
    if bad:
        raise InvalidMatch(f"{a.name}: match is not a morphism: {'; '.join(bad[:3])}")


def _deleted(a: ActionSpan, m: InstanceMorphism) -> dict[str, set[int]]:
    s = a.schema
    return {ob: {m.components[ob][p] for p in a.pre.elements(ob)} - {
        m.components[ob][a.l.components[ob][k]] for k in a.keep.elements(ob)} for ob in s.objects}


def _released(a: ActionSpan, m: InstanceMorphism) -> tuple[set[tuple[str, int]], set[tuple[str, int]]]:
    """Host (hom, element) and (attr, element) entries a rule redefines on kept elements."""
    s = a.schema
    homs, attrs = set(), set()
    for h in s.homs:
        for k in a.keep.elements(h.src):
            if k in a.keep.homs[h.name]:
                continue
            p, e = a.l.components[h.src][k], a.r.components[h.src][k]
            if p in a.pre.homs[h.name] or e in a.eff.homs[h.name]:
                homs.add((h.name, m.components[h.src][p]))
    for at in s.attrs:
        for k in a.keep.elements(at.src):
            if k in a.keep.attrs[at.name]:
                continue
            p, e = a.l.components[at.src][k], a.r.components[at.src][k]
            if p in a.pre.attrs[at.name] or e in a.eff.attrs[at.name]:
                attrs.add((at.name, m.components[at.src][p]))
    return homs, attrs


def dangling_entries(a: ActionSpan, m: InstanceMorphism, x: Instance) -> list[tuple[str, str, str]]:
    deleted = _deleted(a, m)
    released, _ = _released(a, m)
    out = []
    for h in a.schema.homs:
        gone_src, gone_tgt = deleted[h.src], deleted[h.tgt]
        for e, t in x.homs[h.name].items():
            if t in gone_tgt and e not in gone_src and (h.name, e) not in released:
                out.append((h.name, x.ref(h.src, e), x.ref(h.tgt, t)))
    return out


def check_applicable(a: ActionSpan, m: InstanceMorphism, x: Instance) -> None:
    """Raise InvalidMatch or DanglingViolation unless ``a`` can fire at ``m``."""
    _check_match(a, m, x)
    bad = dangling_entries(a, m, x)
    if bad:
        raise DanglingViolation(bad)


def is_applicable(a: ActionSpan, m: InstanceMorphism, x: Instance) -> bool:
    try:
        check_applicable(a, m, x)
    except RewriteError:
        return False
    return True


def apply_action(a: ActionSpan, m: InstanceMorphism, x: Instance, require_total: bool | None = None) -> RewriteResult:
    """Fire ``a`` at match ``m`` in state ``x``.

    When ``x`` is hom-total (or ``require_total`` is set) the result must be
    too; otherwise IncompleteResult names the undefined entries.
    """
    check_applicable(a, m, x)
    s = a.schema
    deleted = _deleted(a, m)
    rel_homs, rel_attrs = _released(a, m)

    z_index: dict[str, dict[int, int]] = {}
    z_labels: dict[str, list[str | None]] = {}
    for ob in s.objects:
        survivors = [e for e in x.elements(ob) if e not in deleted[ob]]
        z_index[ob] = {e: i for i, e in enumerate(survivors)}
        z_labels[ob] = [x.labels[ob][e] for e in survivors]
    z_homs = {h.name: {z_index[h.src][e]: z_index[h.tgt][t] for e, t in x.homs[h.name].items()
                       if e in z_index[h.src] and (h.name, e) not in rel_homs} for h in s.homs}
    z_attrs = {at.name: {z_index[at.src][e]: v for e, v in x.attrs[at.name].items()
                         if e in z_index[at.src] and (at.name, e) not in rel_attrs} for at in s.attrs}
    z = Instance(s, z_labels, z_homs, z_attrs, validate=False)
    u = InstanceMorphism(z, x, {ob: sorted(z_index[ob], key=z_index[ob].get) for ob in s.objects})
    keep_to_z = InstanceMorphism(a.keep, z, {
        ob: [z_index[ob][m.components[ob][a.l.components[ob][k]]] for k in a.keep.elements(ob)]
        for ob in s.objects})
    try:
        y, v, comatch = pushout(keep_to_z, a.r)
    except PushoutError as exc:
        raise IncompleteResult(f"{a.name}: {exc}") from None
    if require_total is None:
        require_total = x.is_hom_total()
    if require_total and not y.is_hom_total():
        missing = ", ".join(f"{h}({e})" for h, e in y.undefined_homs())
        raise IncompleteResult(f"{a.name}: result leaves homs undefined: {missing}")
    v_img = {ob: set(v.components[ob]) for ob in s.objects}
    created = {ob: [e for e in y.elements(ob) if e not in v_img[ob]] for ob in s.objects}
    return RewriteResult(a, m, x, z, y, u, v, keep_to_z, comatch,
                         {ob: sorted(deleted[ob]) for ob in s.objects}, created)


def complete_match(a: ActionSpan, x: Instance, bindings: Mapping[str, str]) -> InstanceMorphism:
    """The unique monic match extending ``{pattern label: state ref}``.

    Raises InvalidMatch if there is none and AmbiguousMatch if there are several.
    """
    fixed: dict[str, dict[int, int]] = {}
    for plabel, sref in bindings.items():
        ob, pe = _find_label(a.pre, plabel)
        try:
            fixed.setdefault(ob, {})[pe] = x.resolve(ob, sref)
        except InstanceError as exc:
            raise InvalidMatch(f"{a.name}: {plabel} -> {sref}: {exc}") from None
    try:
        found = find_homs(a.pre, x, monic=True, fixed=fixed, max_results=2)
    except InstanceError as exc:
        raise InvalidMatch(f"{a.name}: {exc}") from None
    if not found:
        raise InvalidMatch(f"{a.name}: no match extends {dict(bindings)}")
    if len(found) > 1:
        raise AmbiguousMatch(f"{a.name}: several matches extend {dict(bindings)}")
    return found[0]


# ---------------------------------------------------------------------------
# Plans


@dataclass(frozen=True)
class PlanStep:
    """A step given by partial label bindings, resolved against the current state."""
    action: ActionSpan
    bindings: Mapping[str, str]


@dataclass(frozen=True, eq=False)
class PlanTrace:
    initial: Instance
    results: tuple[RewriteResult, ...] = ()

    @property
    def states(self) -> list[Instance]:
        return [self.initial] + [r.Y for r in self.results]

    @property
    def final(self) -> Instance:
        return self.results[-1].Y if self.results else self.initial

    @property
    def schema(self) -> Schema:
        return self.initial.schema

    def __len__(self) -> int:
        return len(self.results)

    def step_names(self) -> list[str]:
        return [step_name(r) for r in self.results]

    def to_doc(self, schema_ref: str | None = None) -> dict:
        doc: dict[str, Any] = {}
        if schema_ref is not None:
            doc["schema"] = schema_ref
        doc["states"] = [st.to_doc() for st in self.states]
        doc["steps"] = [_result_doc(r) for r in self.results]
        return doc


def step_name(r: RewriteResult) -> str:
    args = [r.X.ref(ob, r.match.components[ob][e]) for ob, e in r.action.param_elements()]
    return f"{r.action.name}({', '.join(args)})"


def _result_doc(r: RewriteResult) -> dict:
    return {
        "name": step_name(r),
        "action": r.action.name,
        "match": r.match.to_doc()["components"],
        "Z": r.Z.to_doc(),
        "u": r.u.to_doc()["components"],
        "v": r.v.to_doc()["components"],
        "comatch": r.comatch.to_doc()["components"],
    }


def run_plan(x0: Instance, steps: Sequence[GroundedStep | PlanStep]) -> PlanTrace:
    """Execute steps in order; the first failure raises PlanError with its index."""
    results: list[RewriteResult] = []
    state = x0
    for i, step in enumerate(steps):
        try:
            if isinstance(step, PlanStep):
                m = complete_match(step.action, state, step.bindings)
            else:
                m = step.match
            res = apply_action(step.action, m, state)
        except RewriteError as exc:
            raise PlanError(i, exc) from exc
        results.append(res)
        state = res.Y
    return PlanTrace(x0, tuple(results))
