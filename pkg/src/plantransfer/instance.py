"""Partial attributed C-sets and the natural transformations between them.

Elements of each object type are dense integers ``0..n-1``. Hom and attribute
tables are partial dictionaries keyed by element id; an absent key means the
entry is undefined. States are hom-total; rule patterns and goals need not be.

Morphisms follow the partial convention: wherever the domain defines an entry,
the codomain must define the same entry on the image (naturality and attribute
compatibility). Undefined domain entries constrain nothing.

Labels are optional per-element strings used only for documents and display.
Documents refer to an element by its label, or by ``#<id>`` when unlabeled.
"""
from __future__ import annotations

import re
from typing import Any, Iterable, Iterator, Mapping

from .errors import InstanceError, MorphismError, SchemaMismatchError
from .schema import Schema, value_has_kind


class Instance:
    """An instance over ``schema``. Treat as immutable once built."""

    __slots__ = ("schema", "labels", "homs", "attrs")

    def __init__(self, schema: Schema, labels: Mapping[str, Iterable[str | None]] | None = None,
                 homs: Mapping[str, Mapping[int, int]] | None = None,
                 attrs: Mapping[str, Mapping[int, Any]] | None = None, validate: bool = True):
        labels = labels or {}
        homs = homs or {}
        attrs = attrs or {}
        self.schema = schema
        self.labels: dict[str, tuple[str | None, ...]] = {
            ob: tuple(labels.get(ob, ())) for ob in schema.objects}
        self.homs: dict[str, dict[int, int]] = {h.name: dict(homs.get(h.name, {})) for h in schema.homs}
        self.attrs: dict[str, dict[int, Any]] = {a.name: dict(attrs.get(a.name, {})) for a in schema.attrs}
        if validate:
            unknown = (set(labels) - set(schema.objects)) | (set(homs) - set(self.homs)) | (
                set(attrs) - set(self.attrs))
            if unknown:
                raise InstanceError(f"names not in schema {schema.name}: {sorted(unknown)}")
            self.validate()

    @classmethod
    def empty(cls, schema: Schema) -> "Instance":
        return cls(schema)

    @classmethod
    def with_counts(cls, schema: Schema, counts: Mapping[str, int], homs=None, attrs=None,
                    validate: bool = True) -> "Instance":
        return cls(schema, {ob: [None] * counts.get(ob, 0) for ob in schema.objects}, homs, attrs,
                   validate=validate)

    def validate(self) -> None:
        s = self.schema
        for ob, labs in self.labels.items():
            seen = set()
            for lab in labs:
                if lab is None:
                    continue
                if not isinstance(lab, str) or not lab or lab.startswith("#"):
                    raise InstanceError(f"{ob}: invalid label {lab!r}")
                if lab in seen:
                    raise InstanceError(f"{ob}: duplicate label {lab!r}")
                seen.add(lab)
        for h in s.homs:
            n_src, n_tgt = self.count(h.src), self.count(h.tgt)
            for x, y in self.homs[h.name].items():
                if not (0 <= x < n_src) or not (0 <= y < n_tgt):
                    raise InstanceError(f"{h.name}: entry {x} -> {y} out of range")
        for a in s.attrs:
            kind = s.attr_kind(a.name)
            n = self.count(a.src)
            for x, v in self.attrs[a.name].items():
                if not 0 <= x < n:
                    raise InstanceError(f"{a.name}: element {x} out of range")
                if not value_has_kind(v, kind):
                    raise InstanceError(f"{a.name}({self.ref(a.src, x)}): {v!r} is not a {kind}")

    # basic access ----------------------------------------------------------

    def count(self, ob: str) -> int:
        return len(self.labels[ob])

    def counts(self) -> dict[str, int]:
        return {ob: len(labs) for ob, labs in self.labels.items()}

    def elements(self, ob: str) -> range:
        return range(len(self.labels[ob]))

    def total_elements(self) -> int:
        return sum(len(labs) for labs in self.labels.values())

    def label(self, ob: str, x: int) -> str | None:
        return self.labels[ob][x]

    def ref(self, ob: str, x: int) -> str:
        lab = self.labels[ob][x]
        return lab if lab is not None else f"#{x}"

    def resolve(self, ob: str, ref: str) -> int:
        """Element id for a document reference (label or ``#id``)."""
        if ref.startswith("#") and ref[1:].isdigit():
            x = int(ref[1:])
            if x < self.count(ob):
                return x
        else:
            try:
                return self.labels[ob].index(ref)
            except ValueError:
                pass
        raise InstanceError(f"no {ob} element {ref!r}")

    def hom_value(self, hom: str, x: int) -> int | None:
        return self.homs[hom].get(x)

    def attr_value(self, attr: str, x: int) -> Any:
        return self.attrs[attr].get(x)

    def is_hom_total(self) -> bool:
        return all(len(self.homs[h.name]) == self.count(h.src) for h in self.schema.homs)

    def undefined_homs(self) -> list[tuple[str, str]]:
        return [(h.name, self.ref(h.src, x)) for h in self.schema.homs
                for x in self.elements(h.src) if x not in self.homs[h.name]]

    def entry_count(self) -> int:
        return sum(map(len, self.homs.values())) + sum(map(len, self.attrs.values()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.schema == other.schema and self.labels == other.labels
                and self.homs == other.homs and _attrs_equal(self.attrs, other.attrs))

    def __hash__(self):
        return hash((self.schema.name, tuple(self.counts().items())))

    def __repr__(self) -> str:
        sizes = ", ".join(f"{ob}={n}" for ob, n in self.counts().items() if n)
        return f"Instance({self.schema.name}: {sizes or 'empty'})"

    # documents -------------------------------------------------------------

    def to_doc(self, schema_ref: str | None = None) -> dict:
        doc: dict[str, Any] = {}
        if schema_ref is not None:
            doc["schema"] = schema_ref
        s = self.schema
        doc["elements"] = {ob: list(self.labels[ob]) for ob in s.objects}
        doc["homs"] = {h.name: {self.ref(h.src, x): self.ref(h.tgt, y)
                                for x, y in sorted(self.homs[h.name].items())} for h in s.homs}
        doc["attrs"] = {a.name: {self.ref(a.src, x): v for x, v in sorted(self.attrs[a.name].items())}
                        for a in s.attrs}
        return doc

    @classmethod
    def from_doc(cls, schema: Schema, doc: Mapping[str, Any]) -> "Instance":
        elements = doc.get("elements", {})
        for ob in elements:
            if ob not in schema.objects:
                raise InstanceError(f"unknown object type {ob!r}")
        shell = cls(schema, {ob: elements.get(ob, []) for ob in schema.objects})
        homs: dict[str, dict[int, int]] = {}
        for name, table in doc.get("homs", {}).items():
            if not schema.has_hom(name):
                raise InstanceError(f"unknown hom {name!r}")
            h = schema.hom(name)
            homs[name] = {shell.resolve(h.src, s): shell.resolve(h.tgt, t) for s, t in table.items()}
        attrs: dict[str, dict[int, Any]] = {}
        for name, table in doc.get("attrs", {}).items():
            if not schema.has_attr(name):
                raise InstanceError(f"unknown attr {name!r}")
            a = schema.attr(name)
            attrs[name] = {shell.resolve(a.src, s): v for s, v in table.items()}
        return cls(schema, shell.labels, homs, attrs)

    def copy(self) -> "Instance":
        return Instance(self.schema, self.labels, self.homs, self.attrs, validate=False)


def _attrs_equal(a: Mapping[str, Mapping[int, Any]], b: Mapping[str, Mapping[int, Any]]) -> bool:
    # Exact comparison: 1 == True and 0.0 == 0 must not count as equal.
    if a.keys() != b.keys():
        return False
    for name in a:
        ta, tb = a[name], b[name]
        if ta.keys() != tb.keys():
            return False
        for k, v in ta.items():
            if not same_value(v, tb[k]):
                return False
    return True


def same_value(x: Any, y: Any) -> bool:
    return type(x) is type(y) and x == y


# ---------------------------------------------------------------------------
# Morphisms


class InstanceMorphism:
    """Componentwise map ``dom -> cod``; ``components[ob][x]`` is the image of x."""

    __slots__ = ("dom", "cod", "components")

    def __init__(self, dom: Instance, cod: Instance, components: Mapping[str, Iterable[int]]):
        if dom.schema != cod.schema:
            raise SchemaMismatchError(f"morphism between {dom.schema.name} and {cod.schema.name}")
        self.dom = dom
        self.cod = cod
        self.components = {ob: tuple(components.get(ob, ())) for ob in dom.schema.objects}

    @classmethod
    def identity(cls, x: Instance) -> "InstanceMorphism":
        return cls(x, x, {ob: range(x.count(ob)) for ob in x.schema.objects})

    def __call__(self, ob: str, x: int) -> int:
        return self.components[ob][x]

    def is_monic(self) -> bool:
        return all(len(set(c)) == len(c) for c in self.components.values())

    def is_bijective(self) -> bool:
        return self.is_monic() and all(
            len(self.components[ob]) == self.cod.count(ob) for ob in self.dom.schema.objects)

    def then(self, other: "InstanceMorphism") -> "InstanceMorphism":
        """Composite ``other . self`` (first self, then other)."""
        if self.cod.schema != other.dom.schema:
            raise SchemaMismatchError("composing morphisms over different schemas")
        return InstanceMorphism(self.dom, other.cod, {
            ob: [other.components[ob][y] for y in self.components[ob]] for ob in self.dom.schema.objects})

    def image(self, ob: str) -> set[int]:
        return set(self.components[ob])

    def key(self) -> tuple[tuple[int, ...], ...]:
        """Lexicographic sort key: components in schema object order."""
        return tuple(self.components[ob] for ob in self.dom.schema.objects)

    def violations(self) -> list[str]:
        dom, cod, s = self.dom, self.cod, self.dom.schema
        problems = []
        for ob in s.objects:
            comp = self.components[ob]
            if len(comp) != dom.count(ob):
                problems.append(f"{ob}: component has {len(comp)} entries for {dom.count(ob)} elements")
                return problems
            if any(not (0 <= y < cod.count(ob)) for y in comp):
                problems.append(f"{ob}: component maps outside the codomain")
                return problems
        for h in s.homs:
            ctab, ftab, gtab = dom.homs[h.name], self.components[h.src], self.components[h.tgt]
            for x, y in ctab.items():
                got = cod.homs[h.name].get(ftab[x])
                if got != gtab[y]:
                    problems.append(f"{h.name}({dom.ref(h.src, x)}) does not commute")
        for a in s.attrs:
            ftab = self.components[a.src]
            for x, v in dom.attrs[a.name].items():
                w = cod.attrs[a.name].get(ftab[x], _MISSING)
                if w is _MISSING or not same_value(v, w):
                    problems.append(f"{a.name}({dom.ref(a.src, x)}) = {v!r} not preserved")
        return problems

    def __eq__(self, other) -> bool:
        if not isinstance(other, InstanceMorphism):
            return NotImplemented
        return self.dom == other.dom and self.cod == other.cod and self.components == other.components

    def __hash__(self):
        return hash(self.key())

    def __repr__(self) -> str:
        return f"InstanceMorphism({self.dom!r} -> {self.cod!r}, {self.components})"

    def to_doc(self, domain_ref: str | None = None, codomain_ref: str | None = None) -> dict:
        doc: dict[str, Any] = {}
        if domain_ref is not None:
            doc["domain"] = domain_ref
        if codomain_ref is not None:
            doc["codomain"] = codomain_ref
        doc["components"] = {
            ob: {self.dom.ref(ob, x): self.cod.ref(ob, y) for x, y in enumerate(self.components[ob])}
            for ob in self.dom.schema.objects}
        return doc

    @classmethod
    def from_doc(cls, dom: Instance, cod: Instance, doc: Mapping[str, Any]) -> "InstanceMorphism":
        comps = doc.get("components", doc)
        out = {}
        for ob in dom.schema.objects:
            table = comps.get(ob, {})
            img = [None] * dom.count(ob)
            for s, t in table.items():
                img[dom.resolve(ob, s)] = cod.resolve(ob, t)
            if any(v is None for v in img):
                raise MorphismError(f"component {ob} is not total")
            out[ob] = img
        return cls(dom, cod, out)


_MISSING = object()


def check_morphism(alpha: InstanceMorphism) -> bool:
    """Naturality and attribute compatibility on the defined structure."""
    if alpha.dom.schema != alpha.cod.schema:
        raise SchemaMismatchError("domain and codomain have different schemas")
    return not alpha.violations()


# ---------------------------------------------------------------------------
# Declarations in the style of the state listings
#
#   gripper::Gripper
#   (A, B, C)::Block
#   hasColor(A) == "green"
#   on_l(x1) == E
#   isHolding(gripper) == isEmpty(empty)
#   isOnTable(A) == true; isClear(A) == true

_TYPED = re.compile(r"^\(?\s*([\w\s,]+?)\s*\)?\s*::\s*(\w+)$")
_APP = re.compile(r"^(\w+)\s*\((.*)\)$")
_NUMBER = re.compile(r"^-?\d+(\.\d*)?([eE][-+]?\d+)?$")


class _Builder:
    def __init__(self, schema: Schema):
        self.schema = schema
        self.labels: dict[str, list[str | None]] = {ob: [] for ob in schema.objects}
        self.homs: dict[str, dict[int, int]] = {h.name: {} for h in schema.homs}
        self.attrs: dict[str, dict[int, Any]] = {a.name: {} for a in schema.attrs}

    def declare(self, label: str, ob: str) -> None:
        if ob not in self.labels:
            raise InstanceError(f"unknown type {ob!r}")
        if label in self.labels[ob]:
            raise InstanceError(f"duplicate label {label!r} for {ob}")
        self.labels[ob].append(label)

    def fresh(self, ob: str) -> int:
        self.labels[ob].append(None)
        return len(self.labels[ob]) - 1

    def lookup(self, label: str, ob: str | None) -> tuple[str, int]:
        if ob is not None:
            if label not in self.labels[ob]:
                raise InstanceError(f"{label!r} is not a declared {ob}")
            return ob, self.labels[ob].index(label)
        hits = [o for o, labs in self.labels.items() if label in labs]
        if not hits:
            raise InstanceError(f"undeclared element {label!r}")
        if len(hits) > 1:
            raise InstanceError(f"ambiguous element {label!r} (types {hits})")
        return hits[0], self.labels[hits[0]].index(label)

    def term_type(self, term: str) -> str | None:
        m = _APP.match(term)
        if m and self.schema.has_hom(m.group(1)):
            return self.schema.hom(m.group(1)).tgt
        return None

    def evaluate(self, term: str, ob: str | None, create: bool) -> tuple[str, int] | None:
        """Element denoted by ``term``; undefined hom applications get fresh elements if ``create``."""
        m = _APP.match(term)
        if not m:
            return self.lookup(term, ob)
        name, arg = m.group(1), m.group(2).strip()
        if not self.schema.has_hom(name):
            raise InstanceError(f"{name!r} is not a hom")
        h = self.schema.hom(name)
        if ob is not None and h.tgt != ob:
            raise InstanceError(f"{name} lands in {h.tgt}, expected {ob}")
        src = self.evaluate(arg, h.src, create)
        if src is None:
            return None
        y = self.homs[name].get(src[1])
        if y is None:
            if not create:
                return None
            y = self.fresh(h.tgt)
            self.homs[name][src[1]] = y
        return h.tgt, y

    def assign(self, term: str, target: tuple[str, int]) -> None:
        m = _APP.match(term)
        if not m:
            got = self.lookup(term, target[0])
            if got != target:
                raise InstanceError(f"{term} is already a different element")
            return
        name, arg = m.group(1), m.group(2).strip()
        if not self.schema.has_hom(name):
            raise InstanceError(f"{name!r} is not a hom")
        h = self.schema.hom(name)
        if h.tgt != target[0]:
            raise InstanceError(f"{name} lands in {h.tgt}, not {target[0]}")
        _, x = self.evaluate(arg, h.src, create=True)
        old = self.homs[name].get(x)
        if old is not None and old != target[1]:
            raise InstanceError(f"{name}({arg}) is already defined differently")
        self.homs[name][x] = target[1]

    def statement(self, stmt: str) -> None:
        m = _TYPED.match(stmt)
        if m and "==" not in stmt:
            for label in (p.strip() for p in m.group(1).split(",")):
                if label:
                    self.declare(label, m.group(2))
            return
        if "==" not in stmt:
            raise InstanceError(f"cannot parse {stmt!r}")
        lhs, rhs = (p.strip() for p in stmt.split("==", 1))
        app = _APP.match(lhs)
        if app and self.schema.has_attr(app.group(1)):
            a = self.schema.attr(app.group(1))
            _, x = self.evaluate(app.group(2).strip(), a.src, create=True)
            value = parse_literal(rhs)
            kind = self.schema.attr_kind(a.name)
            if not value_has_kind(value, kind):
                raise InstanceError(f"{a.name}: {rhs} is not a {kind}")
            old = self.attrs[a.name].get(x, _MISSING)
            if old is not _MISSING and not same_value(old, value):
                raise InstanceError(f"{lhs} is already defined differently")
            self.attrs[a.name][x] = value
            return
        ob = self.term_type(lhs) or self.term_type(rhs)
        left = self.evaluate(lhs, ob, create=False)
        right = self.evaluate(rhs, ob, create=False)
        if left is not None and right is not None:
            if left != right:
                raise InstanceError(f"{stmt!r} equates two distinct elements")
        elif left is not None:
            self.assign(rhs, left)
        elif right is not None:
            self.assign(lhs, right)
        else:
            target = self.evaluate(lhs, ob, create=True)
            self.assign(rhs, target)

    def build(self) -> Instance:
        return Instance(self.schema, self.labels, self.homs, self.attrs)


def parse_literal(text: str) -> Any:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] == '"':
        return text[1:-1]
    if text in ("true", "false"):
        return text == "true"
    if _NUMBER.match(text):
        return float(text) if any(c in text for c in ".eE") else int(text)
    raise InstanceError(f"cannot parse literal {text!r}")


def _statements(declarations: str | Iterable[str]) -> Iterator[str]:
    lines = declarations.splitlines() if isinstance(declarations, str) else declarations
    for line in lines:
        line = line.split("#", 1)[0]
        for stmt in line.split(";"):
            if stmt.strip():
                yield stmt.strip()


def build_instance(schema: Schema, declarations: str | Iterable[str] = ()) -> Instance:
    """Build an instance from listing-style declarations.

    Equations between two undefined hom applications, such as
    ``isHolding(gripper) == isEmpty(empty)``, materialize one fresh unlabeled
    element of the common codomain and point both entries at it.
    """
    b = _Builder(schema)
    for stmt in _statements(declarations):
        b.statement(stmt)
    return b.build()
