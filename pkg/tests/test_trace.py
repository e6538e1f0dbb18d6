"""Trace checking, forward/backward queries, document customization."""

import pytest

from famvar.configure import Configuration, StateKind, VariantState
from famvar.errors import DanglingTraceError, IncompleteConfigurationError, UnknownIdError
from famvar.trace import (
    Element,
    ModelDocument,
    check_traces,
    customize_document,
    trace_backward,
    trace_forward,
)

from oracles import reachable


def incl(*values):
    return VariantState(StateKind.INCLUDED, selected=tuple(values))


EXCL = VariantState(StateKind.EXCLUDED)


def base_config(hall_model, **states):
    base = {vid: EXCL for vid in hall_model.variant_ids()}
    base.update(states)
    return Configuration(area="Academic", states=base)


class TestCheckTraces:
    def test_reserve_hall_doc_is_clean(self, reserve_hall_doc, hall_model):
        assert check_traces(reserve_hall_doc, hall_model) == []

    def test_dangling_tag(self, hall_model):
        doc = ModelDocument(
            "d", "activity",
            (Element("e1", "action", "x", stereotype="variant", tag="V9"),),
            (),
        )
        diags = check_traces(doc, hall_model)
        assert [(d.code, d.subject) for d in diags] == [("DANGLING_TRACE", "e1")]

    def test_stereotype_without_tag(self, hall_model):
        doc = ModelDocument("d", "activity", (Element("e1", "action", "x", stereotype="variant"),), ())
        diags = check_traces(doc, hall_model)
        assert [d.code for d in diags] == ["UNTAGGED_VARIANT_ELEMENT"]


class TestTraceQueries:
    def test_forward_variant(self, reserve_hall_doc, hall_model):
        assert trace_forward(hall_model, "V4", [reserve_hall_doc]) == ["e5", "e6", "e7", "e8"]

    def test_forward_value(self, reserve_hall_doc, hall_model):
        assert trace_forward(hall_model, "V4.3", [reserve_hall_doc]) == ["e8"]

    def test_variant_query_covers_value_queries(self, reserve_hall_doc, hall_model):
        for value_id in ("V4.1", "V4.2", "V4.3"):
            sub = set(trace_forward(hall_model, value_id, [reserve_hall_doc]))
            assert sub <= set(trace_forward(hall_model, "V4", [reserve_hall_doc]))

    def test_forward_unknown_id(self, reserve_hall_doc, hall_model):
        with pytest.raises(UnknownIdError):
            trace_forward(hall_model, "V9", [reserve_hall_doc])

    def test_backward(self, reserve_hall_doc):
        assert trace_backward([reserve_hall_doc], "e5") == "V4"
        assert trace_backward([reserve_hall_doc], "e1") is None

    def test_backward_unknown_element(self, reserve_hall_doc):
        with pytest.raises(UnknownIdError):
            trace_backward([reserve_hall_doc], "e99")


class TestCustomizeDocument:
    def test_selecting_printed_paper_removes_fax_and_email(self, reserve_hall_doc, hall_model):
        config = base_config(hall_model, V4=incl("V4.3"))
        result = customize_document(reserve_hall_doc, hall_model, config)
        ids = [el.id for el in result.elements]
        assert "e6" not in ids and "e7" not in ids
        assert "e8" in ids and "e5" in ids
        untagged_before = [el.id for el in reserve_hall_doc.elements if el.tag is None]
        untagged_after = [el.id for el in result.elements if el.tag is None]
        assert untagged_before == untagged_after

    def test_full_inclusion_is_identity(self, reserve_hall_doc, hall_model):
        config = base_config(
            hall_model,
            V1=incl("V1.1", "V1.2"),
            V2=incl("V2.1", "V2.2", "V2.3", "V2.4"),
            V3=incl("V3.1", "V3.2"),
            V4=incl("V4.1", "V4.2", "V4.3"),
            V5=incl("V5.1", "V5.2"),
        )
        assert customize_document(reserve_hall_doc, hall_model, config) == reserve_hall_doc

    def test_chain_splice(self, hall_model):
        doc = ModelDocument(
            "d", "activity",
            (
                Element("a", "action", "before"),
                Element("r", "action", "removed", stereotype="variant", tag="V2"),
                Element("b", "action", "after"),
            ),
            (("a", "r"), ("r", "b")),
        )
        result = customize_document(doc, hall_model, base_config(hall_model))
        assert result.edges == (("a", "b"),)

    def test_multi_node_chain_splice(self, hall_model):
        doc = ModelDocument(
            "d", "activity",
            (
                Element("a", "action", "before"),
                Element("r1", "action", "x", tag="V2.1"),
                Element("r2", "action", "y", tag="V2.2"),
                Element("b", "action", "after"),
            ),
            (("a", "r1"), ("r1", "r2"), ("r2", "b")),
        )
        result = customize_document(doc, hall_model, base_config(hall_model))
        assert result.edges == (("a", "b"),)

    def test_branching_removal_drops_edges(self, hall_model):
        # two outgoing edges: not a pass-through, no bridge inserted
        doc = ModelDocument(
            "d", "activity",
            (
                Element("a", "action", "before"),
                Element("r", "action", "x", tag="V2"),
                Element("b", "action", "after1"),
                Element("c", "action", "after2"),
            ),
            (("a", "r"), ("r", "b"), ("r", "c")),
        )
        result = customize_document(doc, hall_model, base_config(hall_model))
        assert result.edges == ()

    def test_reachability_preserved_through_passthrough_chains(self, reserve_hall_doc, hall_model):
        config = base_config(hall_model, V4=incl("V4.3"))
        result = customize_document(reserve_hall_doc, hall_model, config)
        removed = {"e6", "e7"}
        survivors = [el.id for el in reserve_hall_doc.elements if el.id not in removed]
        for start in survivors:
            before = reachable(reserve_hall_doc.edges, start) - removed
            after = reachable(result.edges, start)
            assert before <= after | removed  # no surviving node lost reachability
            assert before - removed <= after

    def test_monotonicity_of_selection(self, reserve_hall_doc, hall_model):
        smaller = base_config(hall_model, V4=incl("V4.3"))
        larger = base_config(hall_model, V4=incl("V4.2", "V4.3"))
        kept_small = {el.id for el in customize_document(reserve_hall_doc, hall_model, smaller).elements}
        kept_large = {el.id for el in customize_document(reserve_hall_doc, hall_model, larger).elements}
        assert kept_small <= kept_large

    def test_dangling_trace_blocks(self, hall_model):
        doc = ModelDocument("d", "activity", (Element("e1", "action", "x", tag="V9"),), ())
        with pytest.raises(DanglingTraceError):
            customize_document(doc, hall_model, base_config(hall_model))

    def test_incomplete_configuration_blocks(self, reserve_hall_doc, hall_model):
        config = Configuration(area="Academic", states={"V4": incl("V4.3")})
        with pytest.raises(IncompleteConfigurationError):
            customize_document(reserve_hall_doc, hall_model, config)

    def test_variant_tagged_element_follows_inclusion(self, reserve_hall_doc, hall_model):
        config = base_config(hall_model)  # everything excluded
        result = customize_document(reserve_hall_doc, hall_model, config)
        assert "e5" not in [el.id for el in result.elements]
