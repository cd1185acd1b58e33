import random

import pytest
from hypothesis import given, settings, strategies as st

from plantransfer.errors import InstanceError, MorphismError, SchemaMismatchError
from plantransfer.instance import Instance, InstanceMorphism, build_instance, check_morphism, parse_literal
from plantransfer.schema import dump_json

from helpers import GRAPH, random_schema, random_total_instance


def test_table_ii_initial_state(fx):
    x = fx.initial
    # six named blocks plus the block the empty marker points at
    assert x.counts() == {"Block": 7, "Empty": 1, "Gripper": 1, "On": 2}
    blk = {x.label("Block", e): e for e in x.elements("Block")}
    assert x.attrs["hasColor"][blk["A"]] == "green"
    assert x.attrs["hasColor"][blk["F"]] == "blue"
    marker = x.homs["isHolding"][0]
    assert x.label("Block", marker) is None
    assert x.homs["isEmpty"][0] == marker
    assert marker not in x.attrs["hasColor"]
    on = {x.label("On", e): e for e in x.elements("On")}
    assert x.homs["on_l"][on["x1"]] == blk["E"] and x.homs["on_r"][on["x1"]] == blk["D"]
    assert x.attrs["isClear"][blk["C"]] is False
    assert x.is_hom_total()


def test_builder_errors(fx):
    s = fx.blocksworld
    with pytest.raises(InstanceError, match="not a boolean"):
        build_instance(s, "A::Block; isClear(A) == 1")
    with pytest.raises(InstanceError, match="duplicate label"):
        build_instance(s, "(A, A)::Block")
    with pytest.raises(InstanceError, match="not a declared On"):
        build_instance(s, "on_l(x) == A")
    with pytest.raises(InstanceError, match="distinct"):
        build_instance(s, "(A, B)::Block; o::On; on_l(o) == A; on_l(o) == B")
    with pytest.raises(InstanceError, match="distinct"):
        build_instance(s, "(A, B)::Block; (o)::On; on_l(o) == A; on_r(o) == B; on_l(o) == on_r(o)")


def test_literals():
    assert parse_literal('"purple"') == "purple"
    assert parse_literal("true") is True
    assert parse_literal("3") == 3 and type(parse_literal("3")) is int
    assert type(parse_literal("0.0")) is float
    with pytest.raises(InstanceError):
        parse_literal("purple")


def test_validation():
    with pytest.raises(InstanceError, match="out of range"):
        Instance.with_counts(GRAPH, {"V": 1, "E": 1}, {"src": {0: 3}})
    with pytest.raises(InstanceError, match="not a integer"):
        Instance.with_counts(GRAPH, {"V": 1, "E": 1}, attrs={"w": {0: True}})
    with pytest.raises(InstanceError, match="invalid label"):
        Instance(GRAPH, {"V": ["#1"]})
    with pytest.raises(InstanceError, match="not in schema"):
        Instance(GRAPH, {"W": ["a"]})


def test_refs_and_resolution():
    x = Instance(GRAPH, {"V": ["a", None], "E": []})
    assert x.ref("V", 0) == "a" and x.ref("V", 1) == "#1"
    assert x.resolve("V", "#1") == 1 and x.resolve("V", "a") == 0
    for bad in ("#2", "b", "#x"):
        with pytest.raises(InstanceError):
            x.resolve("V", bad)


def test_equality_is_exact_on_attribute_types():
    a = Instance.with_counts(GRAPH, {"E": 1, "V": 1}, {"src": {0: 0}, "tgt": {0: 0}}, {"w": {0: 1}})
    b = Instance.with_counts(GRAPH, {"E": 1, "V": 1}, {"src": {0: 0}, "tgt": {0: 0}}, {"w": {0: 1}})
    assert a == b
    assert a != Instance.with_counts(GRAPH, {"E": 1, "V": 1}, {"src": {0: 0}, "tgt": {0: 0}})


def test_morphism_checks():
    loop = Instance.with_counts(GRAPH, {"V": 1, "E": 1}, {"src": {0: 0}, "tgt": {0: 0}})
    edge = Instance.with_counts(GRAPH, {"V": 2, "E": 1}, {"src": {0: 0}, "tgt": {0: 1}})
    collapse = InstanceMorphism(edge, loop, {"V": [0, 0], "E": [0]})
    assert check_morphism(collapse) and not collapse.is_monic()
    back = InstanceMorphism(loop, edge, {"V": [0], "E": [0]})
    assert not check_morphism(back)
    assert "tgt(#0) does not commute" in back.violations()
    ident = InstanceMorphism.identity(edge)
    assert ident.then(collapse) == collapse == collapse.then(InstanceMorphism.identity(loop))
    assert ident.is_bijective()


def test_undefined_domain_entries_impose_nothing():
    partial = Instance.with_counts(GRAPH, {"V": 2, "E": 1}, {"src": {0: 0}})
    host = Instance.with_counts(GRAPH, {"V": 2, "E": 1}, {"src": {0: 0}, "tgt": {0: 0}}, {"w": {0: 4}})
    assert check_morphism(InstanceMorphism(partial, host, {"V": [0, 1], "E": [0]}))
    # but a defined domain entry needs a defined codomain entry
    assert not check_morphism(InstanceMorphism(host, partial, {"V": [0, 1], "E": [0]}))


def test_schema_mismatch(fx):
    with pytest.raises(SchemaMismatchError):
        InstanceMorphism(fx.initial, Instance.empty(GRAPH), {})


def test_morphism_doc_round_trip(fx):
    ident = InstanceMorphism.identity(fx.initial)
    doc = ident.to_doc("a.json", "a.json")
    assert InstanceMorphism.from_doc(fx.initial, fx.initial, doc) == ident
    del doc["components"]["Block"]["A"]
    with pytest.raises(MorphismError, match="not total"):
        InstanceMorphism.from_doc(fx.initial, fx.initial, doc)


def test_instance_doc_rejects_unknown_names(fx):
    with pytest.raises(InstanceError):
        Instance.from_doc(fx.blocksworld, {"elements": {"Cup": []}})
    with pytest.raises(InstanceError):
        Instance.from_doc(fx.blocksworld, {"homs": {"under": {}}})


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_instance_doc_round_trip_is_bit_exact(seed):
    rng = random.Random(seed)
    s = random_schema(rng)
    x = random_total_instance(rng, s)
    text = dump_json(x.to_doc("s.json"))
    again = Instance.from_doc(s, __import__("json").loads(text))
    assert again == x
    assert dump_json(again.to_doc("s.json")) == text


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_composition_is_associative(seed):
    rng = random.Random(seed)
    s = random_schema(rng)
    xs = [random_total_instance(rng, s) for _ in range(4)]
    if any(xs[i + 1].count(ob) == 0 < xs[i].count(ob) for i in range(3) for ob in s.objects):
        return
    f, g, h = (InstanceMorphism(xs[i], xs[i + 1], {ob: [rng.randrange(xs[i + 1].count(ob))
                                                       for _ in xs[i].elements(ob)] for ob in s.objects})
               for i in range(3))
    assert f.then(g).then(h) == f.then(g.then(h))
