"""Functorial transfer of task plans between planning-domain ontologies.

States are partial attributed C-sets over a free schema, actions are DPO
rewrite spans, and an ontology map between two schemas migrates states,
actions and whole grounded plans from one domain to the other.
"""
from .errors import (AmbiguousMatch, DanglingViolation, DuplicateNameError, IncompleteResult, InstanceError,
                     InvalidMatch, MigrationError, MigrationPartiality, MorphismError, OntologyMapError,
                     ParseError, PlanError, PlanTransferError, PushoutError, RewriteError, SchemaError,
                     SchemaMismatchError, TransferError, UnknownNameError)
from .schema import Attr, AttrType, Hom, Schema, load_schema, serialize_schema
from .instance import Instance, InstanceMorphism, build_instance, check_morphism
from .homsearch import (SearchOptions, exists_mono, find_homs, find_isomorphism, first_hom, goal_satisfaction,
                        is_isomorphic)
from .rewrite import (ActionSpan, GroundedStep, PlanStep, PlanTrace, RewriteResult, apply_action, build_action,
                      check_applicable, complete_match, is_applicable, pushout, run_plan)
from .ontology import (AttrEq, Const, HomEq, MapReport, OntologyMap, Proj, Query, QueryMorphism, Term, Var,
                       check_ontology_map, delta_map, identity_map)
from .migration import MigrationResult, evaluate_query, is_delta, migrate_instance, migrate_morphism
from .transfer import (PlanDiff, TransferReport, TransferredPlan, TransferredStep, diff_plans, migrate_span,
                       transfer_plan, validate_transfer)
from .documents import Workspace, trace_from_doc, trace_to_doc
from .fixtures import FixtureSet, fixture_path, load_fixtures

__version__ = "0.1.0"
