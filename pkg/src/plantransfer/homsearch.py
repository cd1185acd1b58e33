"""Backtracking search for (mono)morphisms between instances.

Used for match finding, goal validation and isomorphism tests. Pattern
elements are assigned most-constrained-first; an element that is the target
of a defined hom from an already-assigned element has exactly one candidate.
Whatever the internal order, results come back sorted lexicographically by
component assignment in schema object order.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping

from .errors import InstanceError, SchemaMismatchError
from .instance import Instance, InstanceMorphism, _MISSING, same_value


@dataclass
class SearchOptions:
    monic: bool = False
    max_results: int | None = None
    # fixed[ob][pattern element] = host element
    fixed: Mapping[str, Mapping[int, int]] = field(default_factory=dict)
    # host elements that may not be used, per type (for joint injectivity)
    forbidden: Mapping[str, set[int]] = field(default_factory=dict)


def _check_same_schema(p: Instance, x: Instance) -> None:
    if p.schema != x.schema:
        raise SchemaMismatchError(f"pattern over {p.schema.name}, host over {x.schema.name}")


def _search_order(p: Instance) -> list[tuple[str, int]]:
    s = p.schema
    weight: dict[tuple[str, int], int] = {(ob, x): 0 for ob in s.objects for x in p.elements(ob)}
    preds: dict[tuple[str, int], list[tuple[str, str, int]]] = {k: [] for k in weight}
    for h in s.homs:
        for x, y in p.homs[h.name].items():
            weight[(h.src, x)] += 1
            weight[(h.tgt, y)] += 1
            preds[(h.tgt, y)].append((h.name, h.src, x))
    for a in s.attrs:
        for x in p.attrs[a.name]:
            weight[(a.src, x)] += 1
    rank = {ob: i for i, ob in enumerate(s.objects)}
    order: list[tuple[str, int]] = []
    placed: set[tuple[str, int]] = set()
    remaining = sorted(weight, key=lambda k: (rank[k[0]], k[1]))
    while remaining:
        def score(k):
            forced = any((src, z) in placed for _, src, z in preds[k])
            return (not forced, -weight[k], rank[k[0]], k[1])
        best = min(remaining, key=score)
        remaining.remove(best)
        placed.add(best)
        order.append(best)
    return order


def _iter_homs(p: Instance, x: Instance, opts: SearchOptions) -> Iterator[dict[str, list[int]]]:
    s = p.schema
    order = _search_order(p)
    out_homs = {ob: [h for h in s.homs if h.src == ob] for ob in s.objects}
    # incoming defined pattern edges per element
    incoming: dict[tuple[str, int], list[tuple[str, str, int]]] = {}
    for h in s.homs:
        for a, b in p.homs[h.name].items():
            incoming.setdefault((h.tgt, b), []).append((h.name, h.src, a))
    attr_reqs: dict[tuple[str, int], list[tuple[str, object]]] = {}
    for at in s.attrs:
        for a, v in p.attrs[at.name].items():
            attr_reqs.setdefault((at.src, a), []).append((at.name, v))

    assign: dict[str, list[int | None]] = {ob: [None] * p.count(ob) for ob in s.objects}
    used: dict[str, set[int]] = {ob: set() for ob in s.objects}
    fixed = opts.fixed
    forbidden = opts.forbidden

    def candidates(ob: str, e: int) -> list[int]:
        if ob in fixed and e in fixed[ob]:
            cands = [fixed[ob][e]]
        else:
            cands = None
            for hname, src, z in incoming.get((ob, e), ()):
                hz = assign[src][z]
                if hz is not None:
                    t = x.homs[hname].get(hz)
                    cands = [] if t is None else [t]
                    break
            if cands is None:
                cands = list(x.elements(ob))
        bad = forbidden.get(ob)
        if bad:
            cands = [c for c in cands if c not in bad]
        return cands

    def consistent(ob: str, e: int, c: int) -> bool:
        if opts.monic and c in used[ob]:
            return False
        for aname, v in attr_reqs.get((ob, e), ()):
            w = x.attrs[aname].get(c, _MISSING)
            if w is _MISSING or not same_value(v, w):
                return False
        for h in out_homs[ob]:
            t = p.homs[h.name].get(e)
            if t is None:
                continue
            ht = assign[h.tgt][t]
            if ht is not None and x.homs[h.name].get(c) != ht:
                return False
        for hname, src, z in incoming.get((ob, e), ()):
            hz = assign[src][z]
            if hz is not None and x.homs[hname].get(hz) != c:
                return False
        return True

    def rec(i: int) -> Iterator[dict[str, list[int]]]:
        if i == len(order):
            yield {ob: list(v) for ob, v in assign.items()}  # type: ignore[misc]
            return
        ob, e = order[i]
        for c in candidates(ob, e):
            if not consistent(ob, e, c):
                continue
            assign[ob][e] = c
            used[ob].add(c)
            # self loops and other entries closed by this assignment
            if _closed_ok(ob, e, c):
                yield from rec(i + 1)
            used[ob].discard(c)
            assign[ob][e] = None

    def _closed_ok(ob: str, e: int, c: int) -> bool:
        for h in out_homs[ob]:
            t = p.homs[h.name].get(e)
            if t is not None and h.tgt == ob and t == e and x.homs[h.name].get(c) != c:
                return False
        return True

    yield from rec(0)


def _validate_fixed(p: Instance, x: Instance, opts: SearchOptions) -> None:
    for ob, table in opts.fixed.items():
        if ob not in p.schema.objects:
            raise InstanceError(f"fixed assignment for unknown type {ob!r}")
        for e, c in table.items():
            if not (0 <= e < p.count(ob)) or not (0 <= c < x.count(ob)):
                raise InstanceError(f"fixed assignment {ob}:{e}->{c} out of range")
        if opts.monic and len(set(table.values())) != len(table):
            raise InstanceError(f"fixed assignment for {ob} is not injective")


def find_homs(p: Instance, x: Instance, opts: SearchOptions | None = None, *, monic: bool | None = None,
              max_results: int | None = None, fixed=None) -> list[InstanceMorphism]:
    """All morphisms ``p -> x`` (monomorphisms if ``monic``), lexicographically ordered.

    ``max_results`` truncates the ordered list, so the result is always a prefix
    of the full enumeration.
    """
    opts = replace(opts) if opts else SearchOptions()
    if monic is not None:
        opts.monic = monic
    if max_results is not None:
        opts.max_results = max_results
    if fixed is not None:
        opts.fixed = fixed
    _check_same_schema(p, x)
    _validate_fixed(p, x, opts)
    found = sorted(_iter_homs(p, x, opts), key=lambda comps: [comps[ob] for ob in p.schema.objects])
    if opts.max_results is not None:
        found = found[:opts.max_results]
    return [InstanceMorphism(p, x, comps) for comps in found]


def first_hom(p: Instance, x: Instance, *, monic: bool = False, fixed=None,
              forbidden=None) -> InstanceMorphism | None:
    """Some morphism, or None. Stops at the first hit, so cheaper than find_homs."""
    _check_same_schema(p, x)
    opts = SearchOptions(monic=monic, fixed=fixed or {}, forbidden=forbidden or {})
    _validate_fixed(p, x, opts)
    for comps in _iter_homs(p, x, opts):
        return InstanceMorphism(p, x, comps)
    return None


def exists_mono(g: Instance, y: Instance) -> bool:
    return first_hom(g, y, monic=True) is not None


def find_isomorphism(x: Instance, y: Instance) -> InstanceMorphism | None:
    """A bijective morphism whose inverse is also a morphism, or None. Labels are ignored."""
    _check_same_schema(x, y)
    if x.counts() != y.counts():
        return None
    # A bijective morphism is an isomorphism iff both sides define equally many entries.
    if x.entry_count() != y.entry_count():
        return None
    return first_hom(x, y, monic=True)


def is_isomorphic(x: Instance, y: Instance) -> bool:
    return find_isomorphism(x, y) is not None


# ---------------------------------------------------------------------------
# Goal satisfaction


def components(g: Instance) -> list[list[tuple[str, int]]]:
    """Weakly connected components via defined hom entries, ordered by first element."""
    s = g.schema
    parent: dict[tuple[str, int], tuple[str, int]] = {
        (ob, e): (ob, e) for ob in s.objects for e in g.elements(ob)}

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for h in s.homs:
        for a, b in g.homs[h.name].items():
            ra, rb = find((h.src, a)), find((h.tgt, b))
            if ra != rb:
                parent[rb] = ra
    rank = {ob: i for i, ob in enumerate(s.objects)}
    groups: dict[tuple[str, int], list[tuple[str, int]]] = {}
    for k in sorted(parent, key=lambda k: (rank[k[0]], k[1])):
        groups.setdefault(find(k), []).append(k)
    return sorted(groups.values(), key=lambda grp: (rank[grp[0][0]], grp[0][1]))


def restrict(g: Instance, keep: list[tuple[str, int]]) -> tuple[Instance, InstanceMorphism]:
    """Sub-instance on ``keep`` (entries between kept elements) with its inclusion into g."""
    s = g.schema
    chosen = {ob: sorted(e for o, e in keep if o == ob) for ob in s.objects}
    index = {ob: {e: i for i, e in enumerate(es)} for ob, es in chosen.items()}
    homs = {h.name: {index[h.src][a]: index[h.tgt][b] for a, b in g.homs[h.name].items()
                     if a in index[h.src] and b in index[h.tgt]} for h in s.homs}
    attrs = {at.name: {index[at.src][a]: v for a, v in g.attrs[at.name].items() if a in index[at.src]}
             for at in s.attrs}
    labels = {ob: [g.labels[ob][e] for e in es] for ob, es in chosen.items()}
    sub = Instance(s, labels, homs, attrs, validate=False)
    return sub, InstanceMorphism(sub, g, chosen)


def goal_satisfaction(g: Instance, y: Instance) -> float:
    """Fraction of goal components that embed in ``y``.

    Components are matched greedily in order, each taking the lexicographically
    first monic embedding disjoint from the host elements already used. This
    under-approximates the best joint assignment, so the full goal is checked
    first: the result is exactly 1.0 whenever the whole goal embeds. An empty
    goal scores 1.0.
    """
    _check_same_schema(g, y)
    comps = components(g)
    if not comps:
        return 1.0
    if exists_mono(g, y):
        return 1.0
    used: dict[str, set[int]] = {ob: set() for ob in g.schema.objects}
    satisfied = 0
    for comp in comps:
        sub, _ = restrict(g, comp)
        opts = SearchOptions(monic=True, forbidden=used)
        found = sorted(_iter_homs(sub, y, opts), key=lambda c: [c[ob] for ob in g.schema.objects])
        if found:
            satisfied += 1
            for ob, imgs in found[0].items():
                used[ob].update(imgs)
    return satisfied / len(comps)
