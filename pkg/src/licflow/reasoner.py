"""Forward chaining reasoner over workflow graphs.

Three derivation stages run in order. The compositional stage turns
actions into dependency edges. The ruling stage matches license rules
against every action and every work it relies on, interleaved with
license determination until a fixpoint is reached. The request stage
derives the usage rights each action needs from the works it touches.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Optional

from .kb import (
    KnowledgeBase,
    OutputDefinition,
    RelicensePolicy,
    Requirement,
    Usage,
    are_compatible,
    match_rules,
    usage_requirement,
)
from .model import (
    ActionKind,
    ActionNode,
    DependencyEdge,
    EdgeKind,
    InputRole,
    Origin,
    PublishManner,
    WorkflowGraph,
    toposort_actions,
)

# Works whose licensing was never settled default to a public domain
# standing rather than blocking the analysis.
DEFAULT_LICENSE = "Unlicense"


@dataclass(frozen=True)
class RulingRecord:
    """One license rule that fired for a work, via one relied-upon input."""

    work: str
    relied_work: str
    rule: str
    output_def: OutputDefinition

    @property
    def id(self) -> str:
        return f"rul:{self.work}:{self.relied_work}:{self.rule}"


@dataclass(frozen=True)
class RequestRecord:
    """One usage right an action needs from one work it depends on."""

    action: str
    source_work: str
    target_work: str
    usage: Usage

    @property
    def id(self) -> str:
        return (
            f"req:{self.action}:{self.source_work}:"
            f"{self.target_work}:{self.usage.value}"
        )


@dataclass(frozen=True)
class DeferredConflict:
    """A work whose rulings could not be licensed consistently."""

    work: str
    implicated: tuple[str, ...]


@dataclass
class FixpointStats:
    iterations: int = 0
    records_created: int = 0


_IDENTITY_KINDS = {ActionKind.COPY, ActionKind.PUBLISH}

_KIND_USAGES = {
    ActionKind.COPY: (Usage.USE,),
    ActionKind.COMBINE: (Usage.USE,),
    ActionKind.GENERATE: (Usage.USE,),
    ActionKind.DISTILL: (Usage.USE,),
    ActionKind.EMBED: (Usage.USE,),
    ActionKind.MODIFY: (Usage.USE, Usage.MODIFY),
    ActionKind.AMALGAMATE: (Usage.USE, Usage.MODIFY),
    ActionKind.TRAIN: (Usage.USE, Usage.MODIFY),
    ActionKind.REGISTER_LICENSE: (),
}

_MANNER_USAGES = {
    PublishManner.INTERNAL: (Usage.USE,),
    PublishManner.SHARE: (Usage.USE, Usage.REDISTRIBUTE),
    PublishManner.SELL: (
        Usage.USE,
        Usage.REDISTRIBUTE,
        Usage.COMMERCIAL,
        Usage.SUBLICENSE,
    ),
}


def action_usages(action: ActionNode) -> tuple[Usage, ...]:
    """Usage rights one action requires from the works it consumes."""
    if action.kind is ActionKind.PUBLISH:
        assert action.publish_manner is not None
        return _MANNER_USAGES[action.publish_manner]
    return _KIND_USAGES[action.kind]


def derive_compositional(graph: WorkflowGraph) -> WorkflowGraph:
    """Attach one dependency edge per action input, typed by action kind."""
    edges: set[DependencyEdge] = set()
    for action in graph.actions.values():
        out = action.output
        primary = next(
            inp.work for inp in action.inputs if inp.role is InputRole.PRIMARY
        )
        if action.kind is ActionKind.REGISTER_LICENSE:
            edges.add(DependencyEdge(EdgeKind.PROVENANCE, primary, out))
            continue
        if action.kind is ActionKind.COMBINE:
            for inp in action.inputs:
                if inp.role is InputRole.PRIMARY:
                    edges.add(DependencyEdge(EdgeKind.MIXWORK, inp.work, out))
        elif action.kind in (ActionKind.GENERATE, ActionKind.DISTILL, ActionKind.EMBED):
            edges.add(DependencyEdge(EdgeKind.AUXWORK, primary, out))
        else:
            edges.add(DependencyEdge(EdgeKind.MIXWORK, primary, out))
        if action.kind is ActionKind.TRAIN:
            for inp in action.inputs:
                if inp.role is InputRole.TRAINING_DATA:
                    kind = (
                        EdgeKind.SUBWORK
                        if inp.work in action.copublish
                        else EdgeKind.AUXWORK
                    )
                    edges.add(DependencyEdge(kind, inp.work, out))
        for inp in action.inputs:
            if inp.role is InputRole.AUXILIARY:
                edges.add(DependencyEdge(EdgeKind.AUXWORK, inp.work, out))
    graph.edges = sorted(edges, key=lambda e: (e.kind.value, e.source, e.target))
    return graph


def _mixwork_parents(graph: WorkflowGraph) -> dict[str, list[str]]:
    parents: dict[str, list[str]] = {}
    for edge in graph.edges:
        if edge.kind is EdgeKind.MIXWORK:
            parents.setdefault(edge.target, []).append(edge.source)
    for sources in parents.values():
        sources.sort()
    return parents


def _user_licensed_ids(graph: WorkflowGraph) -> set[str]:
    return {
        wid
        for wid, work in graph.works.items()
        if work.license is not None and work.origin is Origin.USER_DECLARED
    }


def _registered_outputs(graph: WorkflowGraph) -> dict[str, str]:
    return {
        action.output: action.license_to_register
        for action in graph.actions.values()
        if action.kind is ActionKind.REGISTER_LICENSE
        and action.license_to_register is not None
    }


def _topo_work_order(graph: WorkflowGraph) -> list[str]:
    produced = {action.output for action in graph.actions.values()}
    ordered = sorted(wid for wid in graph.works if wid not in produced)
    ordered.extend(action.output for action in toposort_actions(graph))
    return ordered


def _normalized_kind(action: ActionNode) -> ActionKind:
    # Combining a single work adds nothing of its own; treat it as a copy.
    if action.kind is ActionKind.COMBINE:
        primaries = sum(1 for inp in action.inputs if inp.role is InputRole.PRIMARY)
        if primaries == 1:
            return ActionKind.COPY
    return action.kind


def _effective_kind(path: tuple[ActionKind, ...]) -> ActionKind:
    """Collapse a producer chain to the action kind that shaped the output.

    Copies and publications pass material through unchanged, so the last
    transforming kind wins; a chain of pure pass-throughs keeps its first
    kind.
    """
    for kind in reversed(path):
        if kind not in _IDENTITY_KINDS:
            return kind
    return path[0]


def _relied_paths(
    graph: WorkflowGraph,
    action: ActionNode,
    mix_parents: dict[str, list[str]],
    user_licensed: set[str],
    producers: dict[str, ActionNode],
) -> list[tuple[str, tuple[ActionKind, ...]]]:
    """Every work this action relies on, with the producer chain back to it.

    Each direct input is relied upon. Works without a license of their
    own are transparent: whatever they mix in is relied upon as well,
    following Mixwork edges only.
    """
    results: list[tuple[str, tuple[ActionKind, ...]]] = []
    first = _normalized_kind(action)

    def walk(work_id: str, path: tuple[ActionKind, ...]) -> None:
        results.append((work_id, path))
        if work_id in user_licensed:
            return
        producer = producers.get(work_id)
        if producer is None:
            return
        step = _normalized_kind(producer)
        for parent in mix_parents.get(work_id, ()):
            walk(parent, (step,) + path)

    for inp in action.inputs:
        walk(inp.work, (first,))
    return results


def _resolve_license(
    work_id: str,
    rulings: list[RulingRecord],
    kb: KnowledgeBase,
) -> tuple[str, Optional[DeferredConflict]]:
    """Pick the license a work's rulings force on it, or record a conflict."""
    none_allowed: set[str] = set()
    compat_only: set[str] = set()
    for record in rulings:
        rule = kb.rules.get(record.rule)
        if rule is None:
            continue
        if rule.relicense is RelicensePolicy.NONE_ALLOWED:
            none_allowed.add(rule.license)
        elif rule.relicense is RelicensePolicy.COMPATIBLE_ONLY:
            compat_only.add(rule.license)

    def conflicted() -> tuple[str, DeferredConflict]:
        implicated = tuple(sorted(none_allowed | compat_only))
        copyleft = [
            lic
            for lic in implicated
            if lic in kb.licenses and kb.licenses[lic].copyleft
        ]
        chosen = copyleft[0] if copyleft else implicated[0]
        return chosen, DeferredConflict(work_id, implicated)

    if not none_allowed and not compat_only:
        return DEFAULT_LICENSE, None
    if none_allowed:
        if len(none_allowed) > 1:
            return conflicted()
        keeper = next(iter(none_allowed))
        if compat_only:
            if are_compatible(kb, keeper, compat_only) != keeper:
                return conflicted()
        return keeper, None
    preferred = min(compat_only)
    result = are_compatible(kb, preferred, compat_only)
    if result is None:
        return conflicted()
    return result, None


def _rulings_by_work(graph: WorkflowGraph) -> dict[str, list[RulingRecord]]:
    by_work: dict[str, list[RulingRecord]] = {}
    for record in graph.rulings:
        by_work.setdefault(record.work, []).append(record)
    return by_work


def _license_snapshot(
    graph: WorkflowGraph, kb: KnowledgeBase
) -> tuple[dict[str, str], list[DeferredConflict]]:
    """Current license of every work, recomputed from the rulings."""
    user_licensed = _user_licensed_ids(graph)
    registered = _registered_outputs(graph)
    by_work = _rulings_by_work(graph)
    assigned: dict[str, str] = {}
    conflicts: list[DeferredConflict] = []
    for wid in _topo_work_order(graph):
        if wid in user_licensed:
            assigned[wid] = graph.works[wid].license  # type: ignore[assignment]
        elif wid in registered:
            assigned[wid] = registered[wid]
        else:
            license_id, conflict = _resolve_license(wid, by_work.get(wid, []), kb)
            assigned[wid] = license_id
            if conflict is not None:
                conflicts.append(conflict)
    return assigned, conflicts


def _member_licenses(
    graph: WorkflowGraph,
    kb: KnowledgeBase,
    assigned: dict[str, str],
    user_licensed: set[str],
) -> dict[str, set[str]]:
    """Licenses that can speak for each work.

    A declared license speaks alone. A derived work answers to its
    assigned license plus every license whose non-waiving rules fired on
    it, because any of those could still claim the work.
    """
    by_work = _rulings_by_work(graph)
    members: dict[str, set[str]] = {}
    for wid in graph.works:
        if wid in user_licensed:
            members[wid] = {graph.works[wid].license}  # type: ignore[arg-type]
            continue
        licenses = {assigned[wid]}
        for record in by_work.get(wid, []):
            rule = kb.rules.get(record.rule)
            if rule is not None and rule.relicense is not RelicensePolicy.ANY:
                licenses.add(rule.license)
        members[wid] = licenses
    return members


def work_members(graph: WorkflowGraph, kb: KnowledgeBase, work_id: str) -> set[str]:
    """Licenses that can speak for one work of a fully reasoned graph."""
    work = graph.works[work_id]
    if work.license is not None and work.origin is Origin.USER_DECLARED:
        return {work.license}
    members: set[str] = set()
    if work.license is not None:
        members.add(work.license)
    for record in graph.rulings:
        if record.work != work_id:
            continue
        rule = kb.rules.get(record.rule)
        if rule is not None and rule.relicense is not RelicensePolicy.ANY:
            members.add(rule.license)
    return members


def _ruling_fixpoint(graph: WorkflowGraph, kb: KnowledgeBase, fuzz: bool) -> int:
    """Accumulate rulings until neither rulings nor licenses move."""
    user_licensed = _user_licensed_ids(graph)
    producers = {a.output: a for a in graph.actions.values()}
    mix_parents = _mixwork_parents(graph)
    actions = toposort_actions(graph)
    paths_by_action = {
        action.id: _relied_paths(graph, action, mix_parents, user_licensed, producers)
        for action in actions
    }
    known = {(r.work, r.relied_work, r.rule) for r in graph.rulings}
    bound = len(graph.works) ** 2 * max(1, len(kb.rules)) + 2
    iterations = 0
    while True:
        iterations += 1
        assert iterations <= bound, "ruling fixpoint exceeded its keyspace bound"
        assigned, _ = _license_snapshot(graph, kb)
        members = _member_licenses(graph, kb, assigned, user_licensed)
        fresh: list[RulingRecord] = []
        for action in actions:
            out_form = graph.works[action.output].form
            for source, path in paths_by_action[action.id]:
                effective = _effective_kind(path)
                in_form = graph.works[source].form
                for license_id in sorted(members[source]):
                    if license_id not in kb.licenses:
                        continue
                    for rule in match_rules(
                        kb, license_id, effective, in_form, out_form, fuzz
                    ):
                        key = (action.output, source, rule.id)
                        if key not in known:
                            known.add(key)
                            fresh.append(
                                RulingRecord(
                                    work=action.output,
                                    relied_work=source,
                                    rule=rule.id,
                                    output_def=rule.output_def,
                                )
                            )
        if not fresh:
            return iterations
        graph.rulings.extend(fresh)


def derive_rulings(
    graph: WorkflowGraph, kb: KnowledgeBase, fuzz: bool = True
) -> WorkflowGraph:
    """Run the ruling stage to its fixpoint. Licenses are left unwritten."""
    _ruling_fixpoint(graph, kb, fuzz)
    return graph


def determine_licenses(
    graph: WorkflowGraph, kb: KnowledgeBase
) -> tuple[WorkflowGraph, list[DeferredConflict]]:
    """Write the license every work ends up under, keeping declared ones."""
    assigned, conflicts = _license_snapshot(graph, kb)
    for wid, work in graph.works.items():
        if work.license is None:
            work.license = assigned[wid]
            work.origin = Origin.DERIVED
    return graph, conflicts


def license_conflicts(
    graph: WorkflowGraph, kb: KnowledgeBase
) -> list[DeferredConflict]:
    """Conflicts recorded during license determination, recomputed."""
    _, conflicts = _license_snapshot(graph, kb)
    return conflicts


def _mixwork_closure(work_id: str, mix_parents: dict[str, list[str]]) -> set[str]:
    seen: set[str] = set()
    stack = [work_id]
    while stack:
        current = stack.pop()
        for parent in mix_parents.get(current, ()):
            if parent not in seen:
                seen.add(parent)
                stack.append(parent)
    return seen


def derive_requests(graph: WorkflowGraph, kb: KnowledgeBase) -> WorkflowGraph:
    """Derive the usage rights each action needs, licenses already settled."""
    mix_parents = _mixwork_parents(graph)
    known = {
        (r.action, r.source_work, r.target_work, r.usage) for r in graph.requests
    }
    for action in toposort_actions(graph):
        usages = action_usages(action)
        if not usages:
            continue
        for inp in action.inputs:
            targets = {inp.work} | _mixwork_closure(inp.work, mix_parents)
            for target in sorted(targets):
                for usage in sorted(usages, key=lambda u: u.value):
                    if usage is Usage.SUBLICENSE and _sublicense_waived(
                        graph, kb, target
                    ):
                        continue
                    key = (action.id, inp.work, target, usage)
                    if key not in known:
                        known.add(key)
                        graph.requests.append(
                            RequestRecord(
                                action=action.id,
                                source_work=inp.work,
                                target_work=target,
                                usage=usage,
                            )
                        )
    return graph


def _sublicense_waived(graph: WorkflowGraph, kb: KnowledgeBase, work_id: str) -> bool:
    """True when every license speaking for the work waives sublicensing."""
    requirements = [
        usage_requirement(kb, license_id, Usage.SUBLICENSE)
        for license_id in work_members(graph, kb, work_id)
        if license_id in kb.licenses
    ]
    return bool(requirements) and all(
        req is Requirement.WAIVED for req in requirements
    )


def run_all(
    graph: WorkflowGraph, kb: KnowledgeBase, fuzz: bool = True
) -> tuple[WorkflowGraph, FixpointStats]:
    """Run every derivation stage on a copy of the graph."""
    result = copy.deepcopy(graph)
    result.edges = []
    result.rulings = []
    result.requests = []
    for work in result.works.values():
        if work.origin is Origin.DERIVED:
            work.license = None
            work.origin = Origin.USER_DECLARED
    derive_compositional(result)
    iterations = _ruling_fixpoint(result, kb, fuzz)
    determine_licenses(result, kb)
    derive_requests(result, kb)
    stats = FixpointStats(
        iterations=iterations,
        records_created=len(result.rulings) + len(result.requests),
    )
    return result, stats
