"""Shared builders and independent oracles for the test suite."""
from __future__ import annotations

import itertools
import random
from typing import Iterator

from plantransfer.instance import Instance, InstanceMorphism
from plantransfer.ontology import delta_map
from plantransfer.rewrite import ActionSpan
from plantransfer.schema import Attr, AttrType, Hom, Schema

GRAPH = Schema("Graph", ("V", "E"), (Hom("src", "E", "V"), Hom("tgt", "E", "V")),
               (AttrType("Weight", "integer"),), (Attr("w", "E", "Weight"),))


# ---------------------------------------------------------------------------
# brute-force oracles


def brute_homs(p: Instance, x: Instance, monic: bool = False) -> list[dict[str, tuple[int, ...]]]:
    """Every type-respecting assignment that preserves all defined entries, in lexicographic order."""
    s = p.schema
    per_type = [list(itertools.product(x.elements(ob), repeat=p.count(ob))) for ob in s.objects]
    out = []
    for combo in itertools.product(*per_type):
        comps = dict(zip(s.objects, combo))
        if monic and any(len(set(c)) != len(c) for c in combo):
            continue
        ok = all(x.homs[h.name].get(comps[h.src][a]) == comps[h.tgt][b]
                 for h in s.homs for a, b in p.homs[h.name].items())
        for at in s.attrs:
            host = x.attrs[at.name]
            for a, v in p.attrs[at.name].items():
                c = comps[at.src][a]
                if c not in host or type(host[c]) is not type(v) or host[c] != v:
                    ok = False
        if ok:
            out.append(comps)
    return out


def enumerate_instances(schema: Schema, max_per_type: int, total: bool, attr_values=(None,)) -> Iterator[Instance]:
    """All instances up to the given size: each hom entry undefined (unless total) or any target."""
    for counts in itertools.product(range(max_per_type + 1), repeat=len(schema.objects)):
        size = dict(zip(schema.objects, counts))
        slots = []
        for h in schema.homs:
            choices = list(range(size[h.tgt])) + ([] if total else [None])
            slots.append([choices] * size[h.src])
        for at in schema.attrs:
            slots.append([list(attr_values)] * size[at.src])
        flat = [c for group in slots for c in group]
        for pick in itertools.product(*flat):
            it = iter(pick)
            homs = {h.name: {} for h in schema.homs}
            attrs = {a.name: {} for a in schema.attrs}
            for h in schema.homs:
                for e in range(size[h.src]):
                    t = next(it)
                    if t is not None:
                        homs[h.name][e] = t
            for at in schema.attrs:
                for e in range(size[at.src]):
                    v = next(it)
                    if v is not None:
                        attrs[at.name][e] = v
            yield Instance.with_counts(schema, size, homs, attrs)


# ---------------------------------------------------------------------------
# random generators for the pushout-preservation property


def random_schema(rng: random.Random, max_obs: int = 4, max_homs: int = 6) -> Schema:
    n = rng.randint(1, max_obs)
    obs = tuple(f"O{i}" for i in range(n))
    homs = tuple(Hom(f"h{i}", rng.choice(obs), rng.choice(obs)) for i in range(rng.randint(0, max_homs)))
    attrs = tuple(Attr(f"a{i}", rng.choice(obs), "Val") for i in range(rng.randint(0, 2)))
    return Schema(f"S{rng.randrange(10**6)}", obs, homs, (AttrType("Val", "integer"),), attrs)


def random_total_instance(rng: random.Random, s: Schema, max_per_type: int = 4) -> Instance:
    counts = {ob: rng.randint(0, max_per_type) for ob in s.objects}
    changed = True
    while changed:   # a hom out of a non-empty type needs a non-empty target
        changed = False
        for h in s.homs:
            if counts[h.src] and not counts[h.tgt]:
                counts[h.tgt] = 1
                changed = True
    homs = {h.name: {e: rng.randrange(counts[h.tgt]) for e in range(counts[h.src])} for h in s.homs}
    attrs = {a.name: {e: rng.randint(0, 1) for e in range(counts[a.src]) if rng.random() < 0.7} for a in s.attrs}
    labels = {ob: [f"{ob.lower()}_{i}" for i in range(counts[ob])] for ob in s.objects}
    return Instance(s, labels, homs, attrs)


def _sub_instance(x: Instance, keep: dict[str, list[int]], rng: random.Random, p_entry: float):
    index = {ob: {e: i for i, e in enumerate(es)} for ob, es in keep.items()}
    s = x.schema
    homs = {h.name: {index[h.src][a]: index[h.tgt][b] for a, b in x.homs[h.name].items()
                     if a in index[h.src] and b in index[h.tgt] and rng.random() < p_entry} for h in s.homs}
    attrs = {at.name: {index[at.src][a]: v for a, v in x.attrs[at.name].items()
                       if a in index[at.src] and rng.random() < p_entry} for at in s.attrs}
    return homs, attrs


def random_span(rng: random.Random, x: Instance) -> tuple[ActionSpan, InstanceMorphism]:
    """A span whose Pre is a sub-pattern of ``x``, with its inclusion match."""
    s = x.schema
    pre_els = {ob: sorted(e for e in x.elements(ob) if rng.random() < 0.5) for ob in s.objects}
    p_homs, p_attrs = _sub_instance(x, pre_els, rng, 0.8)
    pre = Instance.with_counts(s, {ob: len(es) for ob, es in pre_els.items()}, p_homs, p_attrs)
    match = InstanceMorphism(pre, x, pre_els)

    keep_idx = {ob: [i for i in pre.elements(ob) if rng.random() < 0.6] for ob in s.objects}
    kpos = {ob: {p: k for k, p in enumerate(ps)} for ob, ps in keep_idx.items()}
    k_homs = {h.name: {kpos[h.src][a]: kpos[h.tgt][b] for a, b in pre.homs[h.name].items()
                       if a in kpos[h.src] and b in kpos[h.tgt] and rng.random() < 0.7} for h in s.homs}
    k_attrs = {at.name: {kpos[at.src][a]: v for a, v in pre.attrs[at.name].items()
                         if a in kpos[at.src] and rng.random() < 0.7} for at in s.attrs}
    keep = Instance.with_counts(s, {ob: len(ps) for ob, ps in keep_idx.items()}, k_homs, k_attrs)
    l = InstanceMorphism(keep, pre, keep_idx)

    # Eff: Keep plus fresh elements; fresh elements get total homs, kept ones may be redefined
    eff_counts = {ob: keep.count(ob) + (1 if rng.random() < 0.3 else 0) for ob in s.objects}
    changed = True
    while changed:
        changed = False
        for h in s.homs:
            if eff_counts[h.src] > keep.count(h.src) and not eff_counts[h.tgt]:
                eff_counts[h.tgt] = keep.count(h.tgt) + 1
                changed = True
    e_homs = {h.name: dict(keep.homs[h.name]) for h in s.homs}
    e_attrs = {at.name: dict(keep.attrs[at.name]) for at in s.attrs}
    for h in s.homs:
        for e in range(eff_counts[h.src]):
            fresh = e >= keep.count(h.src)
            if e in e_homs[h.name] or not eff_counts[h.tgt]:
                continue
            if fresh or rng.random() < 0.3:
                e_homs[h.name][e] = rng.randrange(eff_counts[h.tgt])
    for at in s.attrs:
        for e in range(eff_counts[at.src]):
            if e not in e_attrs[at.name] and rng.random() < 0.3:
                e_attrs[at.name][e] = rng.randint(0, 1)
    eff = Instance.with_counts(s, eff_counts, e_homs, e_attrs)
    r = InstanceMorphism(keep, eff, {ob: list(range(keep.count(ob))) for ob in s.objects})
    return ActionSpan("rule", pre, keep, eff, l, r), match


def random_delta_map(rng: random.Random, source: Schema, max_obs: int = 4, max_homs: int = 6):
    """A generator-valued map into ``source`` from a random schema built over it."""
    n = rng.randint(1, max_obs)
    phi = {f"T{i}": rng.choice(source.objects) for i in range(n)}
    fibre: dict[str, list[str]] = {}
    for t, s in phi.items():
        fibre.setdefault(s, []).append(t)
    homs, hom_img = [], {}
    usable = [h for h in source.homs if h.src in fibre and h.tgt in fibre]
    for i in range(rng.randint(0, max_homs) if usable else 0):
        h = rng.choice(usable)
        homs.append(Hom(f"g{i}", rng.choice(fibre[h.src]), rng.choice(fibre[h.tgt])))
        hom_img[f"g{i}"] = h.name
    attrs, attr_img = [], {}
    for i, a in enumerate(a for a in source.attrs if a.src in fibre):
        if rng.random() < 0.7:
            attrs.append(Attr(f"b{i}", rng.choice(fibre[a.src]), "Val"))
            attr_img[f"b{i}"] = a.name
    target = Schema(f"T{rng.randrange(10**6)}", tuple(phi), tuple(homs), (AttrType("Val", "integer"),),
                    tuple(attrs))
    return delta_map(source, target, phi, hom_img, attr_img)


# ---------------------------------------------------------------------------
# pushout preservation under delta migration


def _mediators(y: Instance, q: Instance, v: InstanceMorphism, c: InstanceMorphism,
               qz: InstanceMorphism, qe: InstanceMorphism) -> int:
    """Count morphisms ``y -> q`` commuting with both cocone legs, by exhaustive search.

    Any mediator agrees with ``qz`` along ``v``, so those values are pinned; every
    other element of ``y`` ranges over all of ``q``.
    """
    from plantransfer.homsearch import find_homs
    fixed: dict[str, dict[int, int]] = {}
    for ob in y.schema.objects:
        for z, yy in enumerate(v.components[ob]):
            want = qz.components[ob][z]
            if fixed.setdefault(ob, {}).setdefault(yy, want) != want:
                return 0
    count = 0
    for med in find_homs(y, q, fixed=fixed):
        if v.then(med) == qz and c.then(med) == qe:
            count += 1
    return count


def _with_junk(y: Instance, rng: random.Random) -> tuple[Instance, InstanceMorphism]:
    s = y.schema
    counts = {ob: y.count(ob) + 1 for ob in s.objects}
    homs = {h.name: dict(y.homs[h.name]) for h in s.homs}
    for h in s.homs:
        homs[h.name][counts[h.src] - 1] = rng.randrange(counts[h.tgt])
    q = Instance.with_counts(s, counts, homs, {a.name: dict(y.attrs[a.name]) for a in s.attrs})
    return q, InstanceMorphism(y, q, {ob: list(y.elements(ob)) for ob in s.objects})


def verify_migrated_pushout(F, res, rng: random.Random) -> list[str]:
    """Migrate the right square of a rewrite and re-check its universal property."""
    from plantransfer.homsearch import find_isomorphism
    from plantransfer.migration import migrate_instance, migrate_morphism
    from plantransfer.rewrite import pushout
    k, z, e, y = (migrate_instance(F, inst) for inst in (res.action.keep, res.Z, res.action.eff, res.Y))
    f = migrate_morphism(F, res.keep_to_z, k, z)
    g = migrate_morphism(F, res.action.r, k, e)
    v = migrate_morphism(F, res.v, z, y)
    c = migrate_morphism(F, res.comatch, e, y)
    problems = []
    if f.then(v) != g.then(c):
        problems.append("migrated square does not commute")
        return problems
    p, pz, pe = pushout(f, g)
    if find_isomorphism(y.instance, p) is None:
        problems.append("migrated corner is not isomorphic to the recomputed pushout")
    cocones = [("recomputed pushout", p, pz, pe), ("itself", y.instance, v, c)]
    junk, inc = _with_junk(y.instance, rng)
    cocones.append(("with junk", junk, v.then(inc), c.then(inc)))
    for name, q, qz, qe in cocones:
        n = _mediators(y.instance, q, v, c, qz, qe)
        if n != 1:
            problems.append(f"cocone {name}: {n} mediating morphisms")
    return problems


def pushout_preservation_case(rng: random.Random):
    """One randomized case: None if the random span does not apply, else a list of problems."""
    from plantransfer.errors import RewriteError
    from plantransfer.rewrite import PlanTrace, apply_action
    from plantransfer.transfer import diff_plans, transfer_plan
    s = random_schema(rng)
    x = random_total_instance(rng, s)
    a, m = random_span(rng, x)
    try:
        res = apply_action(a, m, x)
    except RewriteError:
        return None
    F = random_delta_map(rng, s)
    trace = PlanTrace(x, (res,))
    problems = []
    try:
        by_delta = transfer_plan(F, trace, mode="delta")
        by_trace = transfer_plan(F, trace, mode="trace")
    except Exception as exc:   # any failure here is a counterexample
        return [f"transfer failed: {type(exc).__name__}: {exc}"]
    d = diff_plans(by_delta, by_trace)
    if not d.equal:
        problems += d.details
    problems += verify_migrated_pushout(F, res, rng)
    return problems


def brute_query(q, x: Instance) -> list[tuple[int, ...]]:
    """Rows of a conjunctive query by checking every assignment of its variables."""
    pos = {v.name: i for i, v in enumerate(q.variables)}
    rows = []
    for assign in itertools.product(*(x.elements(v.type) for v in q.variables)):
        ok = all(x.homs[e.hom].get(assign[pos[e.src]]) == assign[pos[e.tgt]] for e in q.hom_eqs)
        for e in q.attr_eqs:
            got = x.attrs[e.attr].get(assign[pos[e.var]], object())
            ok = ok and type(got) is type(e.value) and got == e.value
        if ok:
            rows.append(assign)
    return rows
