"""License-aware dependency analysis for machine learning workflows.

Model a production workflow as a typed graph of works and actions,
apply encoded license rules until a fixpoint is reached, determine the
license of every derived work, and report compliance notices, warnings,
and errors for each published work.
"""

from __future__ import annotations

from .analyzer import (
    AnalysisResult,
    ExitClass,
    NotPublished,
    analyze_publication,
    check_conflicts,
    check_nonstandard_licensing,
    check_publish_restrictions,
    check_revocability,
    check_rights_granting,
    dependency_closure,
    published_targets,
)
from .interchange import (
    Document,
    InterchangeError,
    SemanticError,
    UnknownTerm,
    WorkflowSyntaxError,
    export_dot,
    parse_document,
    parse_workflow,
    serialize_graph,
)
from .kb import (
    DanglingReference,
    DuplicateLicenseId,
    KBError,
    KnowledgeBase,
    LicenseFramework,
    LicenseProfile,
    OutputDefinition,
    ParseError,
    RelicensePolicy,
    Requirement,
    Restriction,
    Revocability,
    Rule,
    UnknownLicense,
    Usage,
    are_compatible,
    bundled_rules_dir,
    load_kb,
    match_rules,
    usage_requirement,
)
from .model import (
    ActionInput,
    ActionKind,
    ActionNode,
    ArityViolation,
    CycleIntroduced,
    DependencyEdge,
    DoubleProducer,
    DuplicateId,
    EdgeKind,
    FormCategory,
    GraphError,
    InputRole,
    Origin,
    PublishManner,
    UnknownWork,
    Work,
    WorkflowGraph,
    WorkForm,
    WorkType,
    add_action,
    add_work,
    generalize_output_typing,
    toposort_actions,
    validate_graph,
)
from .reasoner import (
    DEFAULT_LICENSE,
    DeferredConflict,
    FixpointStats,
    RequestRecord,
    RulingRecord,
    derive_compositional,
    derive_requests,
    derive_rulings,
    determine_licenses,
    license_conflicts,
    run_all,
    work_members,
)
from .reports import Report, ReportCode, Severity, render, sort_reports

__version__ = "0.1.0"

__all__ = [
    "AnalysisResult",
    "ActionInput",
    "ActionKind",
    "ActionNode",
    "ArityViolation",
    "CycleIntroduced",
    "DanglingReference",
    "DEFAULT_LICENSE",
    "DeferredConflict",
    "DependencyEdge",
    "Document",
    "DoubleProducer",
    "DuplicateId",
    "DuplicateLicenseId",
    "EdgeKind",
    "ExitClass",
    "FixpointStats",
    "FormCategory",
    "GraphError",
    "InputRole",
    "InterchangeError",
    "KBError",
    "KnowledgeBase",
    "LicenseFramework",
    "LicenseProfile",
    "NotPublished",
    "Origin",
    "OutputDefinition",
    "ParseError",
    "PublishManner",
    "RelicensePolicy",
    "Report",
    "ReportCode",
    "RequestRecord",
    "Requirement",
    "Restriction",
    "Revocability",
    "Rule",
    "RulingRecord",
    "SemanticError",
    "Severity",
    "UnknownLicense",
    "UnknownTerm",
    "UnknownWork",
    "Usage",
    "Work",
    "WorkflowGraph",
    "WorkflowSyntaxError",
    "WorkForm",
    "WorkType",
    "add_action",
    "add_work",
    "analyze_publication",
    "are_compatible",
    "bundled_rules_dir",
    "check_conflicts",
    "check_nonstandard_licensing",
    "check_publish_restrictions",
    "check_revocability",
    "check_rights_granting",
    "dependency_closure",
    "derive_compositional",
    "derive_requests",
    "derive_rulings",
    "determine_licenses",
    "export_dot",
    "generalize_output_typing",
    "license_conflicts",
    "load_kb",
    "match_rules",
    "parse_document",
    "parse_workflow",
    "published_targets",
    "render",
    "run_all",
    "serialize_graph",
    "sort_reports",
    "toposort_actions",
    "usage_requirement",
    "validate_graph",
    "work_members",
]
