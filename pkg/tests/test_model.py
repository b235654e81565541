"""Workflow graph construction, validation, and ordering."""

from __future__ import annotations

import pytest

from licflow import (
    ActionInput,
    ActionKind,
    ArityViolation,
    CycleIntroduced,
    DoubleProducer,
    DuplicateId,
    FormCategory,
    InputRole,
    PublishManner,
    ReportCode,
    UnknownWork,
    WorkForm,
    WorkType,
    add_action,
    add_work,
    generalize_output_typing,
    toposort_actions,
    validate_graph,
)

from _helpers import action, graph_of, inputs_of, publish, work


def _two_work_graph():
    return graph_of(
        [
            work("A", WorkType.MODEL, WorkForm.WEIGHTS, license="MIT"),
            work("B", WorkType.MODEL, WorkForm.WEIGHTS),
        ]
    )


# ---------------------------------------------------------------------------
# Form vocabulary
# ---------------------------------------------------------------------------


def test_bare_forms_are_the_category_placeholders():
    bare = {form for form in WorkForm if form.is_bare}
    assert bare == {WorkForm.RAW, WorkForm.BINARY, WorkForm.SERVICE, WorkForm.MIXED}


def test_every_form_maps_into_its_category():
    assert WorkForm.CODE.category is FormCategory.RAW
    assert WorkForm.WEIGHTS.category is FormCategory.RAW
    assert WorkForm.CORPUS.category is FormCategory.RAW
    assert WorkForm.TEXT.category is FormCategory.RAW
    assert WorkForm.IMAGE.category is FormCategory.RAW
    assert WorkForm.EXE.category is FormCategory.BINARY
    assert WorkForm.SAAS.category is FormCategory.SERVICE
    assert WorkForm.API.category is FormCategory.SERVICE
    for form in WorkForm:
        if form.is_bare:
            assert form.category.value == form.value


# ---------------------------------------------------------------------------
# Graph construction errors
# ---------------------------------------------------------------------------


def test_duplicate_work_id_rejected():
    graph = _two_work_graph()
    with pytest.raises(DuplicateId):
        add_work(graph, work("A"))


def test_action_id_may_not_shadow_a_work_id():
    graph = _two_work_graph()
    with pytest.raises(DuplicateId):
        add_action(graph, action("A", ActionKind.COPY, ["A"], "B"))


def test_action_with_unknown_input_rejected():
    graph = _two_work_graph()
    with pytest.raises(UnknownWork):
        add_action(graph, action("act", ActionKind.COPY, ["missing"], "B"))


def test_action_with_unknown_output_rejected():
    graph = _two_work_graph()
    with pytest.raises(UnknownWork):
        add_action(graph, action("act", ActionKind.COPY, ["A"], "missing"))


def test_second_producer_for_same_output_rejected():
    graph = _two_work_graph()
    add_action(graph, action("one", ActionKind.COPY, ["A"], "B"))
    with pytest.raises(DoubleProducer):
        add_action(graph, action("two", ActionKind.MODIFY, ["A"], "B"))


def test_direct_self_cycle_rejected():
    graph = _two_work_graph()
    with pytest.raises(CycleIntroduced):
        add_action(graph, action("act", ActionKind.MODIFY, ["A"], "A"))


def test_longer_cycle_rejected():
    graph = graph_of(
        [
            work("A", license="MIT"),
            work("B"),
            work("C"),
        ]
    )
    add_action(graph, action("one", ActionKind.MODIFY, ["A"], "B"))
    add_action(graph, action("two", ActionKind.MODIFY, ["B"], "C"))
    with pytest.raises(CycleIntroduced):
        add_action(graph, action("back", ActionKind.MODIFY, ["C"], "A"))


# ---------------------------------------------------------------------------
# Arity rules
# ---------------------------------------------------------------------------


def test_training_data_only_valid_on_train():
    graph = _two_work_graph()
    with pytest.raises(ArityViolation):
        add_action(
            graph,
            action("act", ActionKind.MODIFY, inputs_of(["A"], training=["A"]), "B"),
        )


def test_train_accepts_training_data_and_copublish():
    graph = graph_of(
        [
            work("M", WorkType.MODEL, WorkForm.WEIGHTS),
            work("D", WorkType.DATASET, WorkForm.TEXT, license="CC-BY-4.0"),
            work("T", WorkType.MODEL, WorkForm.WEIGHTS),
        ]
    )
    add_action(
        graph,
        action(
            "fit",
            ActionKind.TRAIN,
            inputs_of(["M"], training=["D"]),
            "T",
            copublish=["D"],
        ),
    )
    assert graph.actions["fit"].copublish == {"D"}


def test_copublish_must_name_training_inputs():
    graph = graph_of(
        [
            work("M"),
            work("D", WorkType.DATASET, WorkForm.TEXT),
            work("T"),
        ]
    )
    with pytest.raises(ArityViolation):
        add_action(
            graph,
            action(
                "fit",
                ActionKind.TRAIN,
                inputs_of(["M"], training=["D"]),
                "T",
                copublish=["M"],
            ),
        )


def test_modify_needs_exactly_one_primary():
    graph = graph_of([work("A"), work("B"), work("C")])
    with pytest.raises(ArityViolation):
        add_action(graph, action("act", ActionKind.MODIFY, ["A", "B"], "C"))


def test_combine_needs_at_least_one_primary():
    graph = graph_of([work("A"), work("B")])
    with pytest.raises(ArityViolation):
        add_action(
            graph,
            action("act", ActionKind.COMBINE, inputs_of(auxiliary=["A"]), "B"),
        )


def test_single_input_combine_is_legal():
    graph = _two_work_graph()
    add_action(graph, action("act", ActionKind.COMBINE, ["A"], "B"))
    assert "act" in graph.actions


def test_publish_takes_exactly_one_primary():
    graph = graph_of([work("A"), work("B"), work("C")])
    with pytest.raises(ArityViolation):
        add_action(
            graph,
            action(
                "pub",
                ActionKind.PUBLISH,
                ["A", "B"],
                "C",
                manner=PublishManner.SHARE,
            ),
        )


def test_publish_requires_a_manner():
    graph = _two_work_graph()
    with pytest.raises(ArityViolation):
        add_action(graph, action("pub", ActionKind.PUBLISH, ["A"], "B"))


def test_manner_is_publish_only():
    graph = _two_work_graph()
    with pytest.raises(ArityViolation):
        add_action(
            graph,
            action("act", ActionKind.COPY, ["A"], "B", manner=PublishManner.SHARE),
        )


def test_publish_form_is_publish_only():
    graph = _two_work_graph()
    with pytest.raises(ArityViolation):
        add_action(
            graph,
            action("act", ActionKind.COPY, ["A"], "B", publish_form=WorkForm.WEIGHTS),
        )


def test_publish_form_must_match_output_form():
    graph = graph_of(
        [
            work("A", WorkType.MODEL, WorkForm.WEIGHTS, license="MIT"),
            work("B", WorkType.MODEL, WorkForm.SAAS),
        ]
    )
    with pytest.raises(ArityViolation):
        add_action(
            graph,
            action(
                "pub",
                ActionKind.PUBLISH,
                ["A"],
                "B",
                manner=PublishManner.SHARE,
                publish_form=WorkForm.WEIGHTS,
            ),
        )


def test_register_license_requires_a_license_id():
    graph = _two_work_graph()
    with pytest.raises(ArityViolation):
        add_action(graph, action("reg", ActionKind.REGISTER_LICENSE, ["A"], "B"))


def test_license_to_register_is_register_only():
    graph = _two_work_graph()
    with pytest.raises(ArityViolation):
        add_action(
            graph,
            action("act", ActionKind.COPY, ["A"], "B", license_to_register="MIT"),
        )


def test_auxiliary_inputs_allowed_on_transforming_actions():
    graph = graph_of([work("A", license="MIT"), work("H"), work("B")])
    add_action(
        graph,
        action("act", ActionKind.MODIFY, inputs_of(["A"], auxiliary=["H"]), "B"),
    )
    roles = {inp.work: inp.role for inp in graph.actions["act"].inputs}
    assert roles == {"A": InputRole.PRIMARY, "H": InputRole.AUXILIARY}


# ---------------------------------------------------------------------------
# Ordering
# ---------------------------------------------------------------------------


def test_toposort_orders_actions_by_dependency_then_id():
    graph = graph_of(
        [work("A", license="MIT"), work("B"), work("C"), work("D"), work("E")]
    )
    add_action(graph, action("z-first", ActionKind.COPY, ["A"], "B"))
    add_action(graph, action("m-second", ActionKind.MODIFY, ["B"], "C"))
    add_action(graph, action("a-third", ActionKind.MODIFY, ["C"], "D"))
    add_action(graph, action("b-leaf", ActionKind.COPY, ["A"], "E"))
    ordered = [a.id for a in toposort_actions(graph)]
    assert ordered.index("z-first") < ordered.index("m-second")
    assert ordered.index("m-second") < ordered.index("a-third")
    assert ordered[0] == "b-leaf"


def test_toposort_of_empty_graph_is_empty():
    assert toposort_actions(graph_of([])) == []


# ---------------------------------------------------------------------------
# Output typing
# ---------------------------------------------------------------------------


def test_identical_labels_survive_generalization():
    assert generalize_output_typing(
        [WorkType.MODEL, WorkType.MODEL], [WorkForm.WEIGHTS, WorkForm.WEIGHTS]
    ) == (WorkType.MODEL, WorkForm.WEIGHTS)


def test_same_category_forms_collapse_to_bare_form():
    out_type, out_form = generalize_output_typing(
        [WorkType.MODEL, WorkType.DATASET], [WorkForm.WEIGHTS, WorkForm.TEXT]
    )
    assert out_type is WorkType.MIXED
    assert out_form is WorkForm.RAW


def test_cross_category_forms_collapse_to_mixed():
    _, out_form = generalize_output_typing(
        [WorkType.SOFTWARE, WorkType.SOFTWARE], [WorkForm.CODE, WorkForm.EXE]
    )
    assert out_form is WorkForm.MIXED


def test_generalize_rejects_empty_input():
    with pytest.raises(ValueError):
        generalize_output_typing([], [])


# ---------------------------------------------------------------------------
# Typing validation
# ---------------------------------------------------------------------------


def test_validate_flags_implausible_type_form_pairs():
    graph = graph_of(
        [
            work("A", WorkType.DATASET, WorkForm.EXE),
            work("B", WorkType.SOFTWARE, WorkForm.WEIGHTS),
            work("C", WorkType.MODEL, WorkForm.WEIGHTS),
        ]
    )
    reports = validate_graph(graph)
    assert [r.code for r in reports] == [ReportCode.E1, ReportCode.E1]
    assert [r.subject for r in reports] == ["A", "B"]


def test_bare_forms_and_mixed_type_always_validate():
    graph = graph_of(
        [
            work("A", WorkType.DATASET, WorkForm.RAW),
            work("B", WorkType.MODEL, WorkForm.BINARY),
            work("C", WorkType.MIXED, WorkForm.CODE),
            work("D", WorkType.SOFTWARE, WorkForm.SERVICE),
        ]
    )
    assert validate_graph(graph) == []


def test_clean_pipeline_validates_and_publishes():
    graph = graph_of(
        [
            work("A", WorkType.MODEL, WorkForm.WEIGHTS, license="MIT"),
            work("B", WorkType.MODEL, WorkForm.WEIGHTS),
            work("C", WorkType.MODEL, WorkForm.SAAS),
        ]
    )
    add_action(graph, action("tune", ActionKind.MODIFY, ["A"], "B"))
    add_action(
        graph,
        publish("pub", "B", "C", PublishManner.SELL, publish_form=WorkForm.SAAS),
    )
    assert validate_graph(graph) == []
    assert [a.id for a in toposort_actions(graph)] == ["tune", "pub"]
