import copy

import pytest

from plantransfer.fixtures import fixture_path
from plantransfer.documents import read_json
from plantransfer.ontology import (AttrEq, Const, HomEq, OntologyMap, Proj, Query, QueryMorphism, Term, Var,
                                   check_ontology_map, delta_map, identity_map, parse_attr_expr)
from plantransfer.schema import AttrType, Hom, Schema


def load_map(fx, doc):
    return OntologyMap.from_doc(fx.blocksworld, fx.kitchenworld, doc)


@pytest.fixture
def case_doc():
    return read_json(fixture_path("map"))


def test_case_study_map_is_valid(fx):
    report = check_ontology_map(fx.case_map)
    assert report.ok, report.problems
    assert report.assumptions   # free-schema note is always attached


def test_gripper_to_block_is_rejected(fx):
    report = check_ontology_map(fx.gripper_map)
    assert not report.ok
    [problem] = report.problems
    assert problem.startswith("hom isHolding:")
    assert "no hom from Block to itself" in problem
    assert "error: hom isHolding" in report.render()


def test_swapped_map_is_valid(fx):
    assert check_ontology_map(fx.swapped_map).ok


def test_receptacle_as_subtype_of_object_is_rejected(fx):
    # Kitchenworld variant with a hom Receptacle -> Object; both map to bare Block
    k = fx.kitchenworld
    variant = Schema(k.name, k.objects, k.homs + (Hom("receptacleIsObject", "Receptacle", "Object"),),
                     k.attrtypes, k.attrs)
    doc = read_json(fixture_path("map"))
    doc["homs"]["receptacleIsObject"] = {"block": "block"}
    F = OntologyMap.from_doc(fx.blocksworld, variant, doc)
    report = check_ontology_map(F)
    assert [p.split(":")[0] for p in report.problems] == ["hom receptacleIsObject"]


@pytest.mark.parametrize("mutate, fragment", [
    (lambda d: d["objects"].pop("Plate"), "object Plate: not mapped"),
    (lambda d: d["homs"].pop("isEmpty"), "hom isEmpty: not mapped"),
    (lambda d: d["attrs"].pop("plateHasMass"), "attr plateHasMass: not mapped"),
    (lambda d: d["attrtypes"].pop("Mass"), "attrtype Mass: not mapped"),
    (lambda d: d["attrtypes"].update(Mass="string"), "attrtype Mass: mapped to string"),
    (lambda d: d["attrs"].update(plateHasMass={"const": "heavy"}), "constant 'heavy' is not a real"),
    (lambda d: d["attrs"].update(plateHasMass={"const": 0}), "constant 0 is not a real"),
    (lambda d: d["attrs"].update(plateHasMass={"proj": ["block", "hasColor"]}), "has kind string"),
    (lambda d: d["attrs"].update(plateHasMass={"proj": ["nope", "hasColor"]}), "nope is not a variable"),
    (lambda d: d["objects"].update(Cup="Block"), "object Cup: not an object"),
    (lambda d: d["objects"].update(Plate="Bowl"), "unknown type 'Bowl'"),
    (lambda d: d["homs"]["isEmpty"].update(block=["empty", "isHolding"]), "ill-typed hom path"),
    (lambda d: d["homs"]["isEmpty"].update(block="empty"), "term has type Empty"),
    (lambda d: d["homs"]["plateIsObject"].update(block="other"), "not a variable of the source query"),
    (lambda d: d["objects"]["Plate"]["attrEqs"][0].update(value=3), "constant is not a string"),
])
def test_rule_violations(fx, case_doc, mutate, fragment):
    mutate(case_doc)
    report = check_ontology_map(load_map(fx, case_doc))
    assert not report.ok
    assert any(fragment in p for p in report.problems), report.problems


def test_constraint_must_be_entailed(fx, case_doc):
    # a colored query cannot be the image of a bare object's hom into it
    case_doc["objects"]["Object"] = {"vars": [{"name": "block", "type": "Block"}], "homEqs": [],
                                     "attrEqs": [{"attr": "hasColor", "var": "block", "value": "green"}]}
    report = check_ontology_map(load_map(fx, case_doc))
    assert any("breadSlicedIsObject" in p and "does not state" in p for p in report.problems)
    # lettuce now maps to the very same query as Object, so its hom collapses to an identity
    [lettuce] = [p for p in report.problems if p.startswith("hom lettuceSlicedIsObject")]
    assert "collapses to an identity" in lettuce


def test_hom_constraint_entailment(fx):
    s = fx.blocksworld
    on_block = Query(s, (Var("o", "On"), Var("b", "Block")), (HomEq("on_l", "o", "b"),))
    bare_on = Query.bare(s, "On", "o")
    bare_block = Query.bare(s, "Block", "b")
    # On -> (On with on_l named) needs the named variable to be reached by a path
    good = QueryMorphism(bare_on, on_block, {"o": Term("o"), "b": Term("o", ("on_l",))})
    assert good.problems() == []
    bad = QueryMorphism(bare_on, on_block, {"o": Term("o"), "b": Term("o", ("on_r",))})
    assert any("does not state" in p for p in bad.problems())
    # paths through the source query's own constraints normalize
    via = QueryMorphism(on_block, bare_block, {"b": Term("o", ("on_l",))})
    assert on_block.normalize(via.var_map["b"]) == Term("b")
    assert not via.is_identity_shaped()


def test_identity_shaped():
    s = Schema("S", ("A",), (), (), ())
    q1, q2 = Query.bare(s, "A", "x"), Query.bare(s, "A", "y")
    assert QueryMorphism(q1, q2, {"y": Term("x")}).is_identity_shaped()


def test_identity_and_delta_maps(fx):
    F = identity_map(fx.blocksworld)
    assert check_ontology_map(F).ok
    G = delta_map(fx.blocksworld, fx.blocksworld, {ob: ob for ob in fx.blocksworld.objects},
                  {"on_l": "on_r", "on_r": "on_l", "isEmpty": "isEmpty", "isHolding": "isHolding"},
                  {a.name: a.name for a in fx.blocksworld.attrs})
    assert check_ontology_map(G).ok


def test_map_doc_round_trip(fx, case_doc):
    F = load_map(fx, case_doc)
    again = F.to_doc("../blocksworld/schema.json", "../kitchenworld/schema.json")
    assert again == case_doc
    assert load_map(fx, again) == F


def test_bare_string_queries(fx):
    q = Query.from_doc(fx.blocksworld, "Block")
    assert q.is_bare() and q.root == Var("Block", "Block")


def test_attr_expr_parsing():
    assert parse_attr_expr({"const": 1.5}) == Const(1.5)
    assert parse_attr_expr({"proj": ["b", "hasColor"]}) == Proj("b", "hasColor")
    with pytest.raises(ValueError):
        parse_attr_expr({"fn": "x -> 0.0"})
