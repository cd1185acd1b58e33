"""Regenerate the JSON case-study fixtures from their listings.

Run from the repository root:  python3 scripts/build_fixtures.py
The output is checked in; tests compare the shipped files against a rebuild.
"""
from __future__ import annotations

import sys
from pathlib import Path

from plantransfer.documents import write_json, write_text
from plantransfer.instance import build_instance
from plantransfer.rewrite import build_action
from plantransfer.schema import dump_json, load_schema

BLOCKS_KINDS = {"Color": "string", "Clear": "boolean", "OnTable": "boolean"}
KITCHEN_KINDS = {"Temperature": "Float64", "Mass": "Float64", "Material": "String"}

# Presentation text; the relation homs are declared on On.
BLOCKS_PRESENTATION = """\
@present OntBlocksworld(FreeSchema) begin
  # Parent Types
  Block::Ob
  Empty::Ob
  Gripper::Ob

  # Attributes
  Color::AttrType
  Clear::AttrType
  OnTable::AttrType

  # Relations
  On::Ob
  on_l::Hom(On, Block)
  on_r::Hom(On, Block)

  # Robot
  isEmpty::Hom(Empty, Block)
  isHolding::Hom(Gripper, Block)

  # Blocks
  hasColor::Attr(Block, Color)
  isClear::Attr(Block, Clear)
  isOnTable::Attr(Block, OnTable)
end
"""

KITCHEN_PRESENTATION = """\
@present KitchenWorld(FreeSchema) begin
  # Parent Types
  Object::Ob
  Receptacle::Ob
  Empty::Ob
  Gripper::Ob

  # Robot
  isHolding::Hom(Gripper, Object)
  isEmpty::Hom(Empty, Object)

  # Attributes
  Temperature::AttrType
  Mass::AttrType
  Material::AttrType

  # Relations
  InReceptacle::Ob
  inReceptacle_l::Hom(InReceptacle, Object)
  inReceptacle_r::Hom(InReceptacle, Receptacle)

  # Ingredients
  BreadSliced::Ob
  breadSlicedIsObject::Hom(BreadSliced, Object)
  breadSlicedIsReceptacle::Hom(
    BreadSliced, Receptacle)
  breadSlicedHasTemperature::Attr(
    BreadSliced, Temperature)
  breadSlicedHasMass::Attr(BreadSliced, Mass)
  breadSlicedHasMaterial::Attr(
    BreadSliced, Material)

  LettuceSliced::Ob
  lettuceSlicedIsObject::Hom(
    LettuceSliced, Object)
  lettuceSlicedIsReceptacle::Hom(
    LettuceSliced, Receptacle)
  lettuceSlicedHasTemperature::Attr(
    LettuceSliced, Temperature)
  lettuceSlicedHasMass::Attr(
    LettuceSliced, Mass)
  lettuceSlicedHasMaterial::Attr(
    LettuceSliced, Material)

  TomatoSliced::Ob
  tomatoSlicedIsObject::Hom(
    TomatoSliced, Object)
  tomatoSlicedIsReceptacle::Hom(
    TomatoSliced, Receptacle)
  tomatoSlicedHasTemperature::Attr(
    TomatoSliced, Temperature)
  tomatoSlicedHasMass::Attr(TomatoSliced, Mass)
  tomatoSlicedHasMaterial::Attr(
    TomatoSliced, Material)

  Plate::Ob
  plateIsObject::Hom(Plate, Object)
  plateIsReceptacle::Hom(Plate, Receptacle)
  plateHasTemperature::Attr(Plate, Temperature)
  plateHasMass::Attr(Plate, Mass)
  plateHasMaterial::Attr(
    Plate, Material)

  Knife::Ob
  knifeIsObject::Hom(Knife, Object)
  knifeHasTemperature::Attr(Knife, Temperature)
  knifeHasMass::Attr(Knife, Mass)
  knifeHasMaterial::Attr(
    Knife, Material)
end
"""

INITIAL = """\
gripper::Gripper
empty::Empty
isHolding(gripper) == isEmpty(empty)
(A, B, C, D, E, F)::Block
hasColor(A) == "green"
hasColor(B) == "red"
hasColor(C) == "yellow"
hasColor(D) == "purple"
hasColor(E) == "purple"
hasColor(F) == "blue"
(x1, x2)::On
on_l(x1) == E
on_r(x1) == D
on_l(x2) == D
on_r(x2) == C
isOnTable(A) == true; isClear(A) == true
isOnTable(B) == true; isClear(B) == true
isOnTable(C) == true; isClear(C) == false
isOnTable(D) == false; isClear(D) == false
isOnTable(E) == false; isClear(E) == true
isOnTable(F) == true; isClear(F) == true
"""

# Colors only, top to bottom: purple, green, red, purple, yellow.
GOAL = """\
(top, second, third, fourth, bottom)::Block
hasColor(top) == "purple"
hasColor(second) == "green"
hasColor(third) == "red"
hasColor(fourth) == "purple"
hasColor(bottom) == "yellow"
(o1, o2, o3, o4)::On
on_l(o1) == top; on_r(o1) == second
on_l(o2) == second; on_r(o2) == third
on_l(o3) == third; on_r(o3) == fourth
on_l(o4) == fourth; on_r(o4) == bottom
"""

# Authoring choices: taking a block deletes the Empty element and its fresh
# marker block; putting one down recreates both. isClear of a held block is
# released rather than set, so it is undefined until putdown or stack.
ACTIONS = {
    "unstack": dict(
        params=("block", "underblock"),
        pre="""
            gripper::Gripper
            empty::Empty
            (block, underblock)::Block
            o::On
            on_l(o) == block
            on_r(o) == underblock
            isClear(block) == true
            isHolding(gripper) == isEmpty(empty)
        """,
        keep="""
            gripper::Gripper
            (block, underblock)::Block
        """,
        eff="""
            gripper::Gripper
            (block, underblock)::Block
            isClear(underblock) == true
            isHolding(gripper) == block
        """),
    "putdown": dict(
        params=("block",),
        pre="""
            gripper::Gripper
            block::Block
            isHolding(gripper) == block
        """,
        keep="""
            gripper::Gripper
            block::Block
        """,
        eff="""
            gripper::Gripper
            block::Block
            empty::Empty
            isHolding(gripper) == isEmpty(empty)
            isClear(block) == true
            isOnTable(block) == true
        """),
    "pickup": dict(
        params=("block",),
        pre="""
            gripper::Gripper
            empty::Empty
            block::Block
            isHolding(gripper) == isEmpty(empty)
            isClear(block) == true
            isOnTable(block) == true
        """,
        keep="""
            gripper::Gripper
            block::Block
        """,
        eff="""
            gripper::Gripper
            block::Block
            isHolding(gripper) == block
            isOnTable(block) == false
        """),
    "stack": dict(
        params=("block", "underblock"),
        pre="""
            gripper::Gripper
            (block, underblock)::Block
            isHolding(gripper) == block
            isClear(underblock) == true
        """,
        keep="""
            gripper::Gripper
            (block, underblock)::Block
        """,
        eff="""
            gripper::Gripper
            (block, underblock)::Block
            empty::Empty
            o::On
            on_l(o) == block
            on_r(o) == underblock
            isHolding(gripper) == isEmpty(empty)
            isClear(block) == true
            isClear(underblock) == false
            isOnTable(block) == false
        """),
}

PLAN = [
    ("unstack", {"block": "E", "underblock": "D"}),
    ("putdown", {"block": "E"}),
    ("pickup", {"block": "B"}),
    ("stack", {"block": "B", "underblock": "D"}),
    ("pickup", {"block": "A"}),
    ("stack", {"block": "A", "underblock": "B"}),
    ("pickup", {"block": "E"}),
    ("stack", {"block": "E", "underblock": "A"}),
]

COLORS = {"BreadSliced": "purple", "LettuceSliced": "green", "TomatoSliced": "red",
          "Plate": "yellow", "Knife": "blue"}
PREFIX = {"BreadSliced": "breadSliced", "LettuceSliced": "lettuceSliced", "TomatoSliced": "tomatoSliced",
          "Plate": "plate", "Knife": "knife"}
ALIASES = {"BreadSliced": "bread", "LettuceSliced": "lettuce", "TomatoSliced": "tomato",
           "Plate": "plate", "Knife": "knife"}


def block_query(color: str | None = None) -> dict:
    q: dict = {"vars": [{"name": "block", "type": "Block"}], "homEqs": [], "attrEqs": []}
    if color:
        q["attrEqs"].append({"attr": "hasColor", "var": "block", "value": color})
    return q


def single(var: str, ob: str) -> dict:
    return {"vars": [{"name": var, "type": ob}], "homEqs": [], "attrEqs": []}


def case_study_map(swap: bool = False, gripper_to_block: bool = False) -> dict:
    objects = {
        "Object": block_query(),
        "Receptacle": block_query(),
        "Empty": single("empty", "Empty"),
        "Gripper": block_query() if gripper_to_block else single("gripper", "Gripper"),
        "InReceptacle": single("on", "On"),
    }
    for ob, color in COLORS.items():
        objects[ob] = block_query(color)
    left, right = ("on_r", "on_l") if swap else ("on_l", "on_r")
    homs = {
        "isHolding": {"block": "block" if gripper_to_block else ["gripper", "isHolding"]},
        "isEmpty": {"block": ["empty", "isEmpty"]},
        "inReceptacle_l": {"block": ["on", left]},
        "inReceptacle_r": {"block": ["on", right]},
    }
    attrs = {}
    for ob, pre in PREFIX.items():
        homs[f"{pre}IsObject"] = {"block": "block"}
        if ob != "Knife":
            homs[f"{pre}IsReceptacle"] = {"block": "block"}
        attrs[f"{pre}HasTemperature"] = {"const": 0.0}
        attrs[f"{pre}HasMass"] = {"const": 0.0}
        attrs[f"{pre}HasMaterial"] = {"const": "Unknown"}
    return {
        "source": "../blocksworld/schema.json",
        "target": "../kitchenworld/schema.json",
        "objects": objects,
        "homs": homs,
        "attrtypes": {"Temperature": "real", "Mass": "real", "Material": "string"},
        "attrs": attrs,
    }


def main(root: Path) -> None:
    fx = root / "src" / "plantransfer" / "fixtures"
    bw, kw, maps = fx / "blocksworld", fx / "kitchenworld", fx / "maps"
    for d in (bw / "actions", kw, maps):
        d.mkdir(parents=True, exist_ok=True)

    blocks = load_schema(BLOCKS_PRESENTATION, BLOCKS_KINDS)
    kitchen = load_schema(KITCHEN_PRESENTATION, KITCHEN_KINDS)
    write_text(bw / "schema.present", BLOCKS_PRESENTATION)
    write_text(kw / "schema.present", KITCHEN_PRESENTATION)
    write_json(bw / "schema.json", blocks.to_doc())
    write_json(kw / "schema.json", kitchen.to_doc())

    write_json(bw / "initial.json", build_instance(blocks, INITIAL).to_doc("schema.json"))
    write_json(bw / "goal.json", build_instance(blocks, GOAL).to_doc("schema.json"))
    for name, parts in ACTIONS.items():
        a = build_action(blocks, name, parts["pre"], parts["keep"], parts["eff"], parts["params"])
        write_json(bw / "actions" / f"{name}.json", a.to_doc("../schema.json"))
    write_json(bw / "plan.json", {
        "initial": "initial.json",
        "actions": {name: f"actions/{name}.json" for name in ACTIONS},
        "steps": [{"action": a, "match": m} for a, m in PLAN],
    })

    write_json(maps / "blocks_to_kitchen.json", case_study_map())
    write_json(maps / "swapped.json", case_study_map(swap=True))
    write_json(maps / "gripper_to_block.json", case_study_map(gripper_to_block=True))
    write_json(maps / "aliases.json", ALIASES)


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1])
