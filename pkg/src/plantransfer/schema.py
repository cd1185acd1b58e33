"""Finitely presented (free) schema categories.

A schema lists object types, hom generators between them, attribute types
with a primitive kind, and attribute generators from objects to attribute
types. There are no path equations, so every path of homs is distinct.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Iterator, Mapping, NamedTuple

from .errors import DuplicateNameError, ParseError, UnknownNameError

KINDS = ("string", "boolean", "integer", "real")

# Aliases accepted wherever a primitive kind is named.
KIND_ALIASES = {
    "string": "string", "String": "string", "str": "string",
    "boolean": "boolean", "Bool": "boolean", "bool": "boolean",
    "integer": "integer", "Int": "integer", "Int64": "integer", "int": "integer",
    "real": "real", "Float64": "real", "float": "real",
}


class Hom(NamedTuple):
    name: str
    src: str
    tgt: str


class AttrType(NamedTuple):
    name: str
    kind: str


class Attr(NamedTuple):
    name: str
    src: str
    attrtype: str


def normalize_kind(kind: str) -> str:
    try:
        return KIND_ALIASES[kind]
    except KeyError:
        raise ParseError(f"unknown primitive kind {kind!r}; expected one of {', '.join(KINDS)}") from None


def value_has_kind(value: Any, kind: str) -> bool:
    """Exact kind check. Booleans are not integers and integers are not reals."""
    if kind == "boolean":
        return isinstance(value, bool)
    if kind == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == "real":
        return isinstance(value, float)
    if kind == "string":
        return isinstance(value, str)
    return False


@dataclass(frozen=True)
class Schema:
    name: str
    objects: tuple[str, ...] = ()
    homs: tuple[Hom, ...] = ()
    attrtypes: tuple[AttrType, ...] = ()
    attrs: tuple[Attr, ...] = ()

    def __post_init__(self):
        _check_unique("object", self.objects)
        _check_unique("hom/attr", [h.name for h in self.homs] + [a.name for a in self.attrs])
        _check_unique("attrtype", [t.name for t in self.attrtypes])
        obs = set(self.objects)
        for h in self.homs:
            for end in (h.src, h.tgt):
                if end not in obs:
                    raise UnknownNameError(f"hom {h.name}: unknown object {end!r}")
        kinds = {t.name for t in self.attrtypes}
        for t in self.attrtypes:
            if t.kind not in KINDS:
                raise ParseError(f"attrtype {t.name}: unknown primitive kind {t.kind!r}")
        for a in self.attrs:
            if a.src not in obs:
                raise UnknownNameError(f"attr {a.name}: unknown object {a.src!r}")
            if a.attrtype not in kinds:
                raise UnknownNameError(f"attr {a.name}: unknown attrtype {a.attrtype!r}")

    # lookups ---------------------------------------------------------------

    def hom(self, name: str) -> Hom:
        for h in self.homs:
            if h.name == name:
                return h
        raise UnknownNameError(f"{self.name}: no hom named {name!r}")

    def attr(self, name: str) -> Attr:
        for a in self.attrs:
            if a.name == name:
                return a
        raise UnknownNameError(f"{self.name}: no attr named {name!r}")

    def attrtype(self, name: str) -> AttrType:
        for t in self.attrtypes:
            if t.name == name:
                return t
        raise UnknownNameError(f"{self.name}: no attrtype named {name!r}")

    def attr_kind(self, attr_name: str) -> str:
        return self.attrtype(self.attr(attr_name).attrtype).kind

    def has_hom(self, name: str) -> bool:
        return any(h.name == name for h in self.homs)

    def has_attr(self, name: str) -> bool:
        return any(a.name == name for a in self.attrs)

    def homs_from(self, ob: str) -> list[Hom]:
        return [h for h in self.homs if h.src == ob]

    def homs_into(self, ob: str) -> list[Hom]:
        return [h for h in self.homs if h.tgt == ob]

    def attrs_of(self, ob: str) -> list[Attr]:
        return [a for a in self.attrs if a.src == ob]

    def object_index(self, ob: str) -> int:
        return self.objects.index(ob)

    def paths(self, src: str, tgt: str, max_length: int = 3) -> Iterator[tuple[str, ...]]:
        """Non-empty hom paths from ``src`` to ``tgt`` up to ``max_length`` generators."""
        frontier: list[tuple[str, tuple[str, ...]]] = [(src, ())]
        for _ in range(max_length):
            nxt = []
            for ob, path in frontier:
                for h in self.homs_from(ob):
                    p = path + (h.name,)
                    if h.tgt == tgt:
                        yield p
                    nxt.append((h.tgt, p))
            frontier = nxt

    # documents -------------------------------------------------------------

    def to_doc(self) -> dict:
        return {
            "name": self.name,
            "objects": list(self.objects),
            "homs": [{"name": h.name, "src": h.src, "tgt": h.tgt} for h in self.homs],
            "attrtypes": [{"name": t.name, "kind": t.kind} for t in self.attrtypes],
            "attrs": [{"name": a.name, "src": a.src, "attrtype": a.attrtype} for a in self.attrs],
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "Schema":
        try:
            return cls(
                name=doc["name"],
                objects=tuple(doc.get("objects", ())),
                homs=tuple(Hom(h["name"], h["src"], h["tgt"]) for h in doc.get("homs", ())),
                attrtypes=tuple(AttrType(t["name"], normalize_kind(t["kind"]))
                                for t in doc.get("attrtypes", ())),
                attrs=tuple(Attr(a["name"], a["src"], a["attrtype"]) for a in doc.get("attrs", ())),
            )
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed schema document: missing or bad field {exc}") from None


def _check_unique(what: str, names) -> None:
    seen = set()
    for n in names:
        if n in seen:
            raise DuplicateNameError(f"duplicate {what} name {n!r}")
        seen.add(n)


# ---------------------------------------------------------------------------
# Text form

_HEADER = re.compile(r"@present\s+(\w+)\s*\(\s*(\w+)\s*\)\s*begin\s*$")
_DECL = re.compile(r"(\w+)\s*::\s*(Ob|AttrType|Hom|Attr)\s*(?:\((.*)\))?\s*$")


def load_schema(text: str, kinds: Mapping[str, str] | None = None) -> Schema:
    """Parse a schema document.

    JSON documents (``{"name": ..., "objects": [...], ...}``) are detected by a
    leading brace. Anything else is read as an ``@present Name(FreeSchema)``
    presentation. Presentations carry no primitive kinds, so ``kinds`` must map
    every attribute type name to one of ``string``, ``boolean``, ``integer``,
    ``real`` (Julia spellings such as ``Float64`` are accepted).
    """
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        return Schema.from_doc(doc)
    return _parse_presentation(text, kinds or {})


def _logical_lines(text: str) -> Iterator[tuple[int, int, str]]:
    """Yield (line, column, statement) with comments stripped and open parens joined."""
    buf, start, col, depth = "", 0, 0, 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip() and not buf:
            continue
        if not buf:
            start, col = lineno, len(line) - len(line.lstrip()) + 1
        buf += " " + line.strip()
        depth += line.count("(") - line.count(")")
        if depth < 0:
            raise ParseError("unbalanced ')'", lineno)
        if depth == 0:
            yield start, col, buf.strip()
            buf = ""
    if buf:
        raise ParseError("unterminated '('", start, col)


def _parse_presentation(text: str, kinds: Mapping[str, str]) -> Schema:
    name = None
    objects: list[str] = []
    homs: list[Hom] = []
    attrtypes: list[AttrType] = []
    attrs: list[Attr] = []
    where: dict[str, tuple[int, int]] = {}
    ended = False
    for line, col, stmt in _logical_lines(text):
        if ended:
            raise ParseError(f"unexpected text after 'end': {stmt!r}", line, col)
        if name is None:
            m = _HEADER.match(stmt)
            if not m:
                raise ParseError("expected '@present Name(FreeSchema) begin'", line, col)
            if m.group(2) != "FreeSchema":
                raise ParseError(f"only FreeSchema presentations are supported, got {m.group(2)}", line, col)
            name = m.group(1)
            continue
        if stmt == "end":
            ended = True
            continue
        if "==" in stmt:
            raise ParseError("path equations are not supported (free schemas only)", line, col)
        m = _DECL.match(stmt)
        if not m:
            raise ParseError(f"cannot parse declaration {stmt!r}", line, col)
        ident, sort, args = m.group(1), m.group(2), m.group(3)
        parts = [a.strip() for a in args.split(",")] if args else []
        namespace = {"Ob": "ob", "AttrType": "type"}.get(sort, "arrow")
        if (namespace, ident) in where:
            first = where[(namespace, ident)]
            raise DuplicateNameError(
                f"line {line}, column {col}: duplicate name {ident!r} (first declared on line {first[0]})")
        where[(namespace, ident)] = (line, col)
        if sort == "Ob":
            objects.append(ident)
        elif sort == "AttrType":
            if ident not in kinds:
                raise ParseError(f"no primitive kind given for attrtype {ident}", line, col)
            attrtypes.append(AttrType(ident, normalize_kind(kinds[ident])))
        else:
            if len(parts) != 2 or not all(parts):
                raise ParseError(f"{sort} declaration needs two arguments", line, col)
            if sort == "Hom":
                homs.append(Hom(ident, *parts))
            else:
                attrs.append(Attr(ident, *parts))
    if name is None:
        raise ParseError("empty document")
    if not ended:
        raise ParseError("missing 'end'")
    obs, types = set(objects), {t.name for t in attrtypes}
    for decl in [*homs, *attrs]:
        line, col = where[("arrow", decl.name)]
        ends = [(decl.src, obs), (decl.tgt, obs)] if isinstance(decl, Hom) else [(decl.src, obs), (decl.attrtype, types)]
        for end, known in ends:
            if end not in known:
                raise UnknownNameError(f"line {line}, column {col}: {decl.name} refers to unknown {end!r}")
    return Schema(name, tuple(objects), tuple(homs), tuple(attrtypes), tuple(attrs))


def dump_json(doc: Any) -> str:
    """Canonical document text: 2-space indent, UTF-8 safe, LF, trailing newline."""
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def serialize_schema(schema: Schema) -> str:
    return dump_json(schema.to_doc())
