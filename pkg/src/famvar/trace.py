"""Traceability between variants and model-document elements.

Model documents stand in for design diagrams as plain element graphs.
Elements carrying the "variant" stereotype point back into the variant
model through a tag, which is what lets a finished configuration prune
the document down to the customized product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .configure import Configuration, StateKind
from .errors import DanglingTraceError, IncompleteConfigurationError, UnknownIdError
from .model import Diagnostic, FamilyModel, is_value_id, owner_id


@dataclass(frozen=True)
class Element:
    id: str
    kind: str
    label: str
    stereotype: Optional[str] = None
    tag: Optional[str] = None


@dataclass(frozen=True)
class ModelDocument:
    name: str
    kind: str
    elements: tuple[Element, ...]
    edges: tuple[tuple[str, str], ...]

    def element(self, element_id: str) -> Element:
        for el in self.elements:
            if el.id == element_id:
                return el
        raise UnknownIdError(f"no element '{element_id}' in document '{self.name}'", subject=element_id)


def check_traces(doc: ModelDocument, model: FamilyModel) -> list[Diagnostic]:
    """Report dangling tags and stereotyped elements without tags."""
    out: list[Diagnostic] = []
    for el in doc.elements:
        if el.stereotype == "variant" and el.tag is None:
            out.append(
                Diagnostic("UNTAGGED_VARIANT_ELEMENT", el.id, "variant-stereotyped element carries no tag")
            )
        if el.tag is not None and not model.has_ref(el.tag):
            out.append(Diagnostic("DANGLING_TRACE", el.id, f"tag '{el.tag}' has no target in the model"))
    return out


def trace_forward(model: FamilyModel, ref: str, docs: Iterable[ModelDocument]) -> list[str]:
    """Element ids tagged with ``ref``; a variant also matches its values' tags."""
    model.owner(ref)  # raises UnknownIdError
    matches = {ref}
    if not is_value_id(ref):
        matches.update(model.variant(ref).value_ids())
    out: list[str] = []
    for doc in docs:
        for el in doc.elements:
            if el.tag in matches:
                out.append(el.id)
    return out


def trace_backward(docs: Iterable[ModelDocument], element_id: str) -> Optional[str]:
    """The tag of an element, or None when it is untagged."""
    for doc in docs:
        for el in doc.elements:
            if el.id == element_id:
                return el.tag
    raise UnknownIdError(f"no element '{element_id}' in the given documents", subject=element_id)


def customize_document(doc: ModelDocument, model: FamilyModel, config: Configuration) -> ModelDocument:
    """Remove elements whose tags a configuration rules out.

    An element tagged with a variant survives while that variant is
    included; tagged with a value, while that value is selected.
    Untagged elements always survive. Edges touching removed elements
    are dropped, but a removed element with exactly one incoming and
    one outgoing edge is spliced: its predecessor connects straight to
    its successor, so chains of pass-through removals stay connected.
    """
    trace_diags = check_traces(doc, model)
    if trace_diags:
        raise DanglingTraceError(trace_diags)

    for v in model.variants:
        if v.id not in config.states or config.states[v.id].kind is StateKind.UNDECIDED:
            raise IncompleteConfigurationError(f"variant '{v.id}' is undecided", subject=v.id)

    def ruled_out(tag: str) -> bool:
        state = config.states.get(owner_id(tag))
        if state is None or not state.is_included():
            return True
        if is_value_id(tag):
            return tag not in state.selected
        return False

    removed = {el.id for el in doc.elements if el.tag is not None and ruled_out(el.tag)}
    edges: list[tuple[str, str]] = list(doc.edges)
    for el in doc.elements:
        if el.id not in removed:
            continue
        incoming = [e for e in edges if e[1] == el.id]
        outgoing = [e for e in edges if e[0] == el.id]
        edges = [e for e in edges if el.id not in e]
        if len(incoming) == 1 and len(outgoing) == 1:
            bridge = (incoming[0][0], outgoing[0][1])
            if bridge not in edges:
                edges.append(bridge)

    return ModelDocument(
        name=doc.name,
        kind=doc.kind,
        elements=tuple(el for el in doc.elements if el.id not in removed),
        edges=tuple(edges),
    )
