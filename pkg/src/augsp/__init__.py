"""Exhaustive axiom verification for rules on the single-peaked domain
augmented with complete indifference."""

from augsp.domain import (
    Grid,
    PeakSummary,
    Preference,
    Profile,
    efficient_set,
    efficient_set_star,
    enumerate_preferences,
    enumerate_profiles,
    peak_summary,
    validate_preference,
    weakly_prefers,
)
from augsp.rules import (
    DefaultDictator,
    Rule,
    TableRule,
    TargetDefault,
    WgspExample,
    evaluate,
    materialize_table,
    recognize_target_default,
)
from augsp.axioms import AXIOMS, AxiomVerdict, check, check_all, verify_witness
from augsp.search import SearchSpec, enumerate_rules, find_counterexample_rule

__all__ = [
    "AXIOMS",
    "AxiomVerdict",
    "SearchSpec",
    "check",
    "check_all",
    "enumerate_rules",
    "find_counterexample_rule",
    "verify_witness",
    "DefaultDictator",
    "Grid",
    "PeakSummary",
    "Preference",
    "Profile",
    "Rule",
    "TableRule",
    "TargetDefault",
    "WgspExample",
    "efficient_set",
    "efficient_set_star",
    "enumerate_preferences",
    "enumerate_profiles",
    "evaluate",
    "materialize_table",
    "peak_summary",
    "recognize_target_default",
    "validate_preference",
    "weakly_prefers",
]
