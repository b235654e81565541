"""Compliance analysis of published works in a reasoned workflow graph.

Every check is scoped to the dependency closure of one published work:
the works reachable backwards over containment and usage edges. Checks
never mutate the graph; analysis is a pure function of graph, knowledge
base, and target.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .kb import (
    KnowledgeBase,
    LicenseFramework,
    Requirement,
    Restriction,
    Revocability,
    Usage,
    usage_requirement,
)
from .model import (
    ActionKind,
    ActionNode,
    EdgeKind,
    PublishManner,
    WorkflowGraph,
)
from .reasoner import (
    DeferredConflict,
    RequestRecord,
    license_conflicts,
    work_members,
)
from .reports import Report, ReportCode, Severity, make_report, sort_reports


class NotPublished(ValueError):
    """Raised when the analysis target is not the output of a Publish."""


class ExitClass(Enum):
    CLEAN = 0
    WARNINGS = 1
    ERRORS = 2


@dataclass
class AnalysisResult:
    target: str
    reports: list[Report]
    deferred_conflicts: list[DeferredConflict]
    exit_class: ExitClass


_FULL_KINDS = (EdgeKind.MIXWORK, EdgeKind.SUBWORK, EdgeKind.AUXWORK)
_MS_KINDS = (EdgeKind.MIXWORK, EdgeKind.SUBWORK)

# Restrictions that render directly as notices or warnings. The rest
# gate the conflict and sale checks instead.
_PUBLISH_RESTRICTION_CODES = {
    Restriction.INCLUDE_LICENSE: ReportCode.N1,
    Restriction.INCLUDE_NOTICE: ReportCode.N2,
    Restriction.STATE_CHANGES: ReportCode.N3,
    Restriction.IMPACT_REPORT: ReportCode.N4,
    Restriction.DISCLOSE_SELF: ReportCode.W5,
    Restriction.DISCLOSE_UNMODIFIED: ReportCode.W6,
}
_USE_RESTRICTION_CODES = {
    Restriction.USE_BEHAVIOR: ReportCode.W7,
    Restriction.RUNTIME_CONTROL: ReportCode.W8,
}

_DERIVING_KINDS = {
    ActionKind.MODIFY,
    ActionKind.AMALGAMATE,
    ActionKind.TRAIN,
    ActionKind.COMBINE,
    ActionKind.DISTILL,
    ActionKind.EMBED,
}


def dependency_closure(
    graph: WorkflowGraph, work_id: str, kinds: tuple[EdgeKind, ...]
) -> set[str]:
    """The work plus everything reachable backwards over the given edges."""
    parents: dict[str, list[str]] = {}
    for edge in graph.edges:
        if edge.kind in kinds:
            parents.setdefault(edge.target, []).append(edge.source)
    closure = {work_id}
    stack = [work_id]
    while stack:
        for parent in parents.get(stack.pop(), ()):
            if parent not in closure:
                closure.add(parent)
                stack.append(parent)
    return closure


def published_targets(graph: WorkflowGraph) -> list[str]:
    """Outputs of Publish actions, in stable order."""
    return sorted(
        action.output
        for action in graph.actions.values()
        if action.kind is ActionKind.PUBLISH
    )


def _publisher_of(graph: WorkflowGraph, work_id: str) -> ActionNode:
    for action in graph.actions.values():
        if action.kind is ActionKind.PUBLISH and action.output == work_id:
            return action
    raise NotPublished(f"work '{work_id}' is not the output of a publish action")


def _report(code: ReportCode, graph: WorkflowGraph, subject: str, target: str) -> Report:
    return make_report(code, subject, graph.works[subject].name, target)


def check_nonstandard_licensing(
    graph: WorkflowGraph, kb: KnowledgeBase, scope: set[str]
) -> list[Report]:
    """W1 when a work sits under a license not meant for its material type."""
    reports = []
    for wid in sorted(scope):
        work = graph.works[wid]
        for license_id in sorted(work_members(graph, kb, wid)):
            profile = kb.licenses.get(license_id)
            if profile is None:
                continue
            if profile.framework is LicenseFramework.PUBLIC_DOMAIN_LIKE:
                continue
            if work.work_type not in profile.intended_types:
                reports.append(_report(ReportCode.W1, graph, wid, wid))
                break
    return reports


def check_revocability(
    graph: WorkflowGraph, kb: KnowledgeBase, scope: set[str]
) -> list[Report]:
    """W2 under revocable licenses, W3 where revocability is unstated."""
    reports = []
    for wid in sorted(scope):
        revocable = unstated = False
        for license_id in work_members(graph, kb, wid):
            profile = kb.licenses.get(license_id)
            if profile is None:
                continue
            if profile.revocable is Revocability.YES:
                revocable = True
            elif profile.revocable is Revocability.UNSTATED:
                unstated = True
        if revocable:
            reports.append(_report(ReportCode.W2, graph, wid, wid))
        if unstated:
            reports.append(_report(ReportCode.W3, graph, wid, wid))
    return reports


def _rights_reports(
    graph: WorkflowGraph, kb: KnowledgeBase, records: list[RequestRecord]
) -> list[Report]:
    reports = []
    for record in records:
        reserved = not_stated = False
        for license_id in work_members(graph, kb, record.target_work):
            if license_id not in kb.licenses:
                continue
            requirement = usage_requirement(kb, license_id, record.usage)
            if requirement is Requirement.RESERVED:
                reserved = True
            elif requirement is Requirement.NOT_STATED:
                not_stated = True
        if reserved:
            code = (
                ReportCode.E4
                if record.usage is Usage.SUBLICENSE
                else ReportCode.E2
            )
            reports.append(_report(code, graph, record.target_work, record.target_work))
        if not_stated:
            reports.append(
                _report(ReportCode.W4, graph, record.target_work, record.target_work)
            )
    return reports


def check_rights_granting(graph: WorkflowGraph, kb: KnowledgeBase) -> list[Report]:
    """E2/E4 for reserved rights, W4 for rights the license never mentions."""
    return _rights_reports(graph, kb, list(graph.requests))


def _sorted_rulings(graph: WorkflowGraph):
    return sorted(graph.rulings, key=lambda r: (r.work, r.relied_work, r.rule))


def check_publish_restrictions(
    graph: WorkflowGraph,
    kb: KnowledgeBase,
    published: str,
    manner: PublishManner,
) -> list[Report]:
    """Notices and warnings carried by the rulings behind a publication.

    Restrictions conditioned on publication stay silent for internal
    releases; restrictions on use apply regardless.
    """
    scope = dependency_closure(graph, published, _MS_KINDS)
    reports = []
    for record in _sorted_rulings(graph):
        if record.work not in scope:
            continue
        rule = kb.rules.get(record.rule)
        if rule is None:
            continue
        subject = record.relied_work
        if manner is not PublishManner.INTERNAL:
            for restriction in sorted(rule.publish_restrictions, key=lambda r: r.value):
                code = _PUBLISH_RESTRICTION_CODES.get(restriction)
                if code is not None:
                    reports.append(_report(code, graph, subject, published))
        for restriction in sorted(rule.use_restrictions, key=lambda r: r.value):
            code = _USE_RESTRICTION_CODES.get(restriction)
            if code is not None:
                reports.append(_report(code, graph, subject, published))
            elif (
                restriction is Restriction.NON_COMMERCIAL_OUTPUT
                and manner is PublishManner.SELL
            ):
                reports.append(_report(ReportCode.E5, graph, subject, published))
        if not rule.allow_sharing and manner in (
            PublishManner.SHARE,
            PublishManner.SELL,
        ):
            reports.append(_report(ReportCode.E3, graph, subject, published))
    return reports


def _exclusive_members(graph: WorkflowGraph, kb: KnowledgeBase, work_id: str) -> bool:
    """Whether the work's licensing adds exclusive terms of its own."""
    for license_id in work_members(graph, kb, work_id):
        profile = kb.licenses.get(license_id)
        if profile is None:
            continue
        if profile.framework is LicenseFramework.PUBLIC_DOMAIN_LIKE:
            continue
        if Usage.COMMERCIAL in profile.reserved:
            return True
        if any(rule.use_restrictions for rule in profile.rules):
            return True
    return False


def _relicense_forbidden(
    graph: WorkflowGraph, kb: KnowledgeBase, work_id: str, new_license: str
) -> bool:
    none_allowed: set[str] = set()
    compat_only: set[str] = set()
    for record in graph.rulings:
        if record.work != work_id:
            continue
        rule = kb.rules.get(record.rule)
        if rule is None:
            continue
        if rule.relicense.value == "none":
            none_allowed.add(rule.license)
        elif rule.relicense.value == "compatible":
            compat_only.add(rule.license)
    if any(license_id != new_license for license_id in none_allowed):
        return True
    if compat_only:
        allowed: set[str] | None = None
        for license_id in sorted(compat_only):
            profile = kb.licenses.get(license_id)
            if profile is None:
                continue
            allowed = (
                set(profile.compatible_with)
                if allowed is None
                else allowed & profile.compatible_with
            )
        if allowed is not None and new_license not in allowed:
            return True
    for license_id in work_members(graph, kb, work_id):
        profile = kb.licenses.get(license_id)
        if profile is not None and Usage.RELICENSE in profile.reserved:
            return True
    return False


def check_conflicts(
    graph: WorkflowGraph, kb: KnowledgeBase, published: str
) -> list[Report]:
    """Relicensing, exclusivity, and copyleft-collision errors (E6 to E10)."""
    full = dependency_closure(graph, published, _FULL_KINDS)
    ms_scope = dependency_closure(graph, published, _MS_KINDS)
    reports = []

    for action in sorted(graph.actions.values(), key=lambda a: a.id):
        if action.kind is not ActionKind.REGISTER_LICENSE:
            continue
        if action.output not in full or action.license_to_register is None:
            continue
        source = action.inputs[0].work
        if _relicense_forbidden(graph, kb, source, action.license_to_register):
            reports.append(_report(ReportCode.E6, graph, action.output, published))

    published_exclusive = _exclusive_members(graph, kb, published)
    for record in _sorted_rulings(graph):
        if record.work not in ms_scope:
            continue
        rule = kb.rules.get(record.rule)
        if rule is None:
            continue
        if published_exclusive and Restriction.GNU_FREEDOM in rule.publish_restrictions:
            reports.append(_report(ReportCode.E7, graph, record.relied_work, published))
        if published_exclusive and Restriction.CC_FREEDOM in rule.publish_restrictions:
            reports.append(_report(ReportCode.E8, graph, record.relied_work, published))

    for record in _sorted_rulings(graph):
        if record.work not in full:
            continue
        rule = kb.rules.get(record.rule)
        if rule is None or Restriction.LLAMA_EXCLUSIVE not in rule.use_restrictions:
            continue
        for action in sorted(graph.actions.values(), key=lambda a: a.id):
            if action.kind not in _DERIVING_KINDS:
                continue
            if action.output not in full:
                continue
            if all(inp.work != record.work for inp in action.inputs):
                continue
            if graph.works[action.output].license != rule.license:
                reports.append(_report(ReportCode.E9, graph, record.work, published))

    for conflict in license_conflicts(graph, kb):
        if conflict.work in full:
            reports.append(_report(ReportCode.E10, graph, conflict.work, published))
    for record in _sorted_rulings(graph):
        if record.work not in full:
            continue
        rule = kb.rules.get(record.rule)
        if rule is None or Restriction.EXCLUSIVE_TERMS not in rule.publish_restrictions:
            continue
        if graph.works[record.work].license != rule.license:
            reports.append(_report(ReportCode.E10, graph, record.work, published))
    return reports


def exit_class_of(reports: list[Report]) -> ExitClass:
    severities = {report.severity for report in reports}
    if Severity.ERROR in severities:
        return ExitClass.ERRORS
    if Severity.WARNING in severities:
        return ExitClass.WARNINGS
    return ExitClass.CLEAN


def analyze_publication(
    graph: WorkflowGraph, kb: KnowledgeBase, published: str
) -> AnalysisResult:
    """Run every compliance check against one published work."""
    if published not in graph.works:
        raise NotPublished(f"unknown work '{published}'")
    publisher = _publisher_of(graph, published)
    manner = publisher.publish_manner
    assert manner is not None
    full = dependency_closure(graph, published, _FULL_KINDS)

    reports: list[Report] = []
    reports.extend(check_nonstandard_licensing(graph, kb, full))
    reports.extend(check_revocability(graph, kb, full))
    in_scope = [
        record
        for record in graph.requests
        if graph.actions[record.action].output in full
    ]
    reports.extend(_rights_reports(graph, kb, in_scope))
    reports.extend(check_publish_restrictions(graph, kb, published, manner))
    reports.extend(check_conflicts(graph, kb, published))

    reports = sort_reports([replace(report, target=published) for report in reports])
    conflicts = [c for c in license_conflicts(graph, kb) if c.work in full]
    return AnalysisResult(
        target=published,
        reports=reports,
        deferred_conflicts=conflicts,
        exit_class=exit_class_of(reports),
    )
