"""The shipped ColorBlocksworld / Kitchenworld case study."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .documents import Workspace
from .errors import PlanTransferError
from .instance import Instance
from .ontology import OntologyMap, check_ontology_map
from .rewrite import ActionSpan, PlanStep
from .schema import Schema

FIXTURE_DIR = Path(__file__).resolve().parent / "fixtures"

PATHS = {
    "blocksworld-schema": "blocksworld/schema.json",
    "blocksworld-presentation": "blocksworld/schema.present",
    "kitchenworld-schema": "kitchenworld/schema.json",
    "kitchenworld-presentation": "kitchenworld/schema.present",
    "initial": "blocksworld/initial.json",
    "goal": "blocksworld/goal.json",
    "plan": "blocksworld/plan.json",
    "action-pickup": "blocksworld/actions/pickup.json",
    "action-putdown": "blocksworld/actions/putdown.json",
    "action-stack": "blocksworld/actions/stack.json",
    "action-unstack": "blocksworld/actions/unstack.json",
    "map": "maps/blocks_to_kitchen.json",
    "map-swapped": "maps/swapped.json",
    "map-gripper-to-block": "maps/gripper_to_block.json",
    "aliases": "maps/aliases.json",
}


class FixtureError(PlanTransferError):
    """A shipped fixture failed to load or check."""


def fixture_path(key: str) -> Path:
    return FIXTURE_DIR / PATHS[key]


@dataclass(frozen=True, eq=False)
class FixtureSet:
    blocksworld: Schema
    kitchenworld: Schema
    actions: dict[str, ActionSpan]
    case_map: OntologyMap
    swapped_map: OntologyMap
    gripper_map: OntologyMap
    initial: Instance
    goal: Instance
    plan: list[PlanStep]
    aliases: dict[str, str]
    workspace: Workspace


def load_fixtures() -> FixtureSet:
    ws = Workspace()
    try:
        initial, plan = ws.plan(fixture_path("plan"))
        fs = FixtureSet(
            blocksworld=ws.schema(fixture_path("blocksworld-schema")),
            kitchenworld=ws.schema(fixture_path("kitchenworld-schema")),
            actions={n: ws.action(fixture_path(f"action-{n}")) for n in ("pickup", "putdown", "stack", "unstack")},
            case_map=ws.ontology_map(fixture_path("map")),
            swapped_map=ws.ontology_map(fixture_path("map-swapped")),
            gripper_map=ws.ontology_map(fixture_path("map-gripper-to-block")),
            initial=initial,
            goal=ws.instance(fixture_path("goal")),
            plan=plan,
            aliases=json.loads(fixture_path("aliases").read_text(encoding="utf-8")),
            workspace=ws,
        )
    except (OSError, PlanTransferError, KeyError, ValueError) as exc:
        raise FixtureError(f"corrupt fixture: {exc}") from exc
    for name, F in (("map", fs.case_map), ("map-swapped", fs.swapped_map)):
        report = check_ontology_map(F)
        if not report.ok:
            raise FixtureError(f"corrupt fixture {name}: {report.problems[0]}")
    return fs
