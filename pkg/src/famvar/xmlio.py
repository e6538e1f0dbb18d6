"""Reading and writing of models, requirements, configurations and documents.

All interchange is strict UTF-8 XML: unknown elements or attributes are
rejected, and serialization is canonical (fixed attribute order, two-space
indent, LF line endings) so that equal objects always produce identical
bytes. ``parse(serialize(x))`` is structurally equal to ``x`` and
``serialize`` is a fixpoint after one round trip.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

from .configure import Configuration, Requirements, StateKind, VariantState
from .errors import (
    IncompleteConfigurationError,
    InvalidModelError,
    SchemaError,
    UnknownIdError,
    XmlSyntaxError,
)
from .model import (
    ALL_AREAS,
    Diagnostic,
    FamilyModel,
    Relation,
    Variant,
    VariantValue,
    is_value_id,
    is_variant_id,
    numeric_key,
    owner_id,
    validate_model,
)
from .trace import Element, ModelDocument

__all__ = [
    "Requirements",
    "parse_family_model",
    "serialize_family_model",
    "parse_requirements",
    "serialize_requirements",
    "parse_configuration",
    "serialize_configuration",
    "parse_model_document",
    "serialize_model_document",
    "render_table",
    "render_diagnostics_xml",
]


# ---------------------------------------------------------------------------
# low-level helpers
# ---------------------------------------------------------------------------

_ATTR_ESCAPES = {
    "&": "&amp;",
    "<": "&lt;",
    ">": "&gt;",
    '"': "&quot;",
    "\t": "&#9;",
    "\n": "&#10;",
    "\r": "&#13;",
}


def _attr(value: str) -> str:
    return "".join(_ATTR_ESCAPES.get(ch, ch) for ch in value)


def _root(data: bytes | str, expected: str) -> ET.Element:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise XmlSyntaxError(f"malformed XML: {exc}") from exc
    if root.tag != expected:
        raise SchemaError(f"expected root element <{expected}>, found <{root.tag}>", subject=root.tag)
    return root


def _attrs(elem: ET.Element, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict[str, str]:
    attrib = dict(elem.attrib)
    out: dict[str, str] = {}
    for name in required:
        if name not in attrib:
            raise SchemaError(f"<{elem.tag}> is missing required attribute '{name}'", subject=elem.tag)
        out[name] = attrib.pop(name)
    for name in optional:
        if name in attrib:
            out[name] = attrib.pop(name)
    if attrib:
        unknown = sorted(attrib)[0]
        raise SchemaError(f"<{elem.tag}> has unknown attribute '{unknown}'", subject=elem.tag)
    return out


def _no_text(elem: ET.Element) -> None:
    if elem.text and elem.text.strip():
        raise SchemaError(f"<{elem.tag}> must not contain text", subject=elem.tag)
    for child in elem:
        if child.tail and child.tail.strip():
            raise SchemaError(f"<{elem.tag}> must not contain text", subject=elem.tag)


def _token(value: str, what: str, where: str) -> str:
    if not value or any(ch.isspace() for ch in value):
        raise SchemaError(f"{what} '{value}' must be a non-empty token", subject=where)
    return value


# ---------------------------------------------------------------------------
# family model
# ---------------------------------------------------------------------------

def parse_family_model(data: bytes | str) -> FamilyModel:
    """Parse variant-model XML, then surface validate_model findings as errors."""
    root = _root(data, "family")
    _no_text(root)
    name = _attrs(root, ("name",))["name"]

    children = list(root)
    if not children or children[0].tag != "areas":
        raise SchemaError("<family> must declare <areas> first", subject="family")
    areas_elem = children[0]
    _no_text(areas_elem)
    _attrs(areas_elem, ())
    areas: list[str] = []
    for area_elem in areas_elem:
        if area_elem.tag != "area":
            raise SchemaError(f"unexpected element <{area_elem.tag}> inside <areas>", subject=area_elem.tag)
        _no_text(area_elem)
        areas.append(_token(_attrs(area_elem, ("id",))["id"], "area id", "areas"))

    variant_elems = children[1:]
    if not variant_elems:
        raise SchemaError("<family> must declare at least one <variant>", subject="family")
    variants = tuple(_parse_variant(elem) for elem in variant_elems)

    model = FamilyModel(name=name, areas=tuple(areas), variants=variants)
    diagnostics = validate_model(model)
    if diagnostics:
        raise InvalidModelError(diagnostics)
    return model


def _parse_variant(elem: ET.Element) -> Variant:
    if elem.tag != "variant":
        raise SchemaError(f"unexpected element <{elem.tag}> inside <family>", subject=elem.tag)
    _no_text(elem)
    got = _attrs(elem, ("id", "name", "relation"), ("mandatory", "question"))
    if got["relation"] not in ("alternative", "or"):
        raise SchemaError(
            f"variant '{got['id']}' relation must be 'alternative' or 'or'", subject=got["id"]
        )
    mandatory = got.get("mandatory", "false")
    if mandatory not in ("true", "false"):
        raise SchemaError(f"variant '{got['id']}' mandatory must be 'true' or 'false'", subject=got["id"])

    applicable: list[str] = []
    depends: list[str] = []
    values: list[VariantValue] = []
    stage = "applicableTo"
    for child in elem:
        if child.tag == "applicableTo":
            if stage != "applicableTo":
                raise SchemaError(
                    f"<applicableTo> must precede dependencies and values in variant '{got['id']}'",
                    subject=got["id"],
                )
            _no_text(child)
            applicable.append(_token(_attrs(child, ("area",))["area"], "area", got["id"]))
        elif child.tag == "dependsOn":
            if stage == "value":
                raise SchemaError(
                    f"<dependsOn> must precede values in variant '{got['id']}'", subject=got["id"]
                )
            stage = "dependsOn"
            _no_text(child)
            depends.append(_attrs(child, ("ref",))["ref"])
        elif child.tag == "value":
            stage = "value"
            values.append(_parse_value(child))
        else:
            raise SchemaError(f"unexpected element <{child.tag}> inside <variant>", subject=got["id"])
    if not applicable:
        raise SchemaError(f"variant '{got['id']}' must declare at least one <applicableTo>", subject=got["id"])
    if not values:
        raise SchemaError(f"variant '{got['id']}' must declare at least one <value>", subject=got["id"])

    return Variant(
        id=got["id"],
        name=got["name"],
        relation=Relation(got["relation"]),
        values=tuple(values),
        question=got.get("question", ""),
        mandatory=mandatory == "true",
        applicable_areas=frozenset(applicable),
        depends_on=tuple(depends),
    )


def _parse_value(elem: ET.Element) -> VariantValue:
    _no_text(elem)
    got = _attrs(elem, ("id", "name"))
    depends: list[str] = []
    for child in elem:
        if child.tag != "dependsOn":
            raise SchemaError(f"unexpected element <{child.tag}> inside <value>", subject=got["id"])
        _no_text(child)
        depends.append(_attrs(child, ("ref",))["ref"])
    return VariantValue(id=got["id"], name=got["name"], depends_on=tuple(depends))


def serialize_family_model(model: FamilyModel) -> bytes:
    """Canonical variant-model document for a valid model."""
    diagnostics = validate_model(model)
    if diagnostics:
        raise InvalidModelError(diagnostics)
    if not model.variants:
        raise InvalidModelError([], "family must declare at least one variant")

    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    lines.append(f'<family name="{_attr(model.name)}">')
    if model.areas:
        lines.append("  <areas>")
        for area in model.areas:
            lines.append(f'    <area id="{_attr(area)}"/>')
        lines.append("  </areas>")
    else:
        lines.append("  <areas/>")
    for v in model.variants:
        attrs = f'id="{_attr(v.id)}" name="{_attr(v.name)}" relation="{v.relation.value}"'
        if v.mandatory:
            attrs += ' mandatory="true"'
        if v.question:
            attrs += f' question="{_attr(v.question)}"'
        lines.append(f"  <variant {attrs}>")
        for area in sorted(v.applicable_areas, key=model.area_sort_key):
            lines.append(f'    <applicableTo area="{_attr(area)}"/>')
        for target in v.depends_on:
            lines.append(f'    <dependsOn ref="{_attr(target)}"/>')
        for val in v.values:
            if val.depends_on:
                lines.append(f'    <value id="{_attr(val.id)}" name="{_attr(val.name)}">')
                for target in val.depends_on:
                    lines.append(f'      <dependsOn ref="{_attr(target)}"/>')
                lines.append("    </value>")
            else:
                lines.append(f'    <value id="{_attr(val.id)}" name="{_attr(val.name)}"/>')
        lines.append("  </variant>")
    lines.append("</family>")
    return ("\n".join(lines) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# requirements
# ---------------------------------------------------------------------------

def parse_requirements(data: bytes | str, model: FamilyModel | None = None) -> Requirements:
    """Parse requirements XML; with a model, unknown references are errors."""
    root = _root(data, "requirements")
    _no_text(root)
    area = _token(_attrs(root, ("area",))["area"], "area", "requirements")

    pins: list[str] = []
    excludes: list[str] = []
    for child in root:
        if child.tag == "pin":
            if excludes:
                raise SchemaError("<pin> elements must precede <exclude> elements", subject="requirements")
            _no_text(child)
            ref = _attrs(child, ("ref",))["ref"]
            if not is_value_id(ref):
                raise SchemaError(f"pin '{ref}' must reference a value (V<k>.<j>)", subject=ref)
            pins.append(ref)
        elif child.tag == "exclude":
            _no_text(child)
            ref = _attrs(child, ("ref",))["ref"]
            if not is_variant_id(ref):
                raise SchemaError(f"exclude '{ref}' must reference a variant (V<k>)", subject=ref)
            excludes.append(ref)
        else:
            raise SchemaError(f"unexpected element <{child.tag}> inside <requirements>", subject=child.tag)

    for pin in pins:
        if owner_id(pin) in excludes:
            raise SchemaError(
                f"pin '{pin}' belongs to excluded variant '{owner_id(pin)}'", subject=pin
            )
    if model is not None:
        for ref in pins + excludes:
            if not model.has_ref(ref):
                raise UnknownIdError(f"no variant or value '{ref}' in model", subject=ref)
    return Requirements(area=area, pins=frozenset(pins), excludes=frozenset(excludes))


def serialize_requirements(reqs: Requirements) -> bytes:
    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    body = []
    for pin in sorted(reqs.pins, key=numeric_key):
        body.append(f'  <pin ref="{_attr(pin)}"/>')
    for ref in sorted(reqs.excludes, key=numeric_key):
        body.append(f'  <exclude ref="{_attr(ref)}"/>')
    if body:
        lines.append(f'<requirements area="{_attr(reqs.area)}">')
        lines.extend(body)
        lines.append("</requirements>")
    else:
        lines.append(f'<requirements area="{_attr(reqs.area)}"/>')
    return ("\n".join(lines) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def parse_configuration(data: bytes | str, model: FamilyModel | None = None) -> Configuration:
    root = _root(data, "configuration")
    _no_text(root)
    area = _token(_attrs(root, ("area",))["area"], "area", "configuration")

    states: dict[str, VariantState] = {}
    for child in root:
        if child.tag != "variant":
            raise SchemaError(f"unexpected element <{child.tag}> inside <configuration>", subject=child.tag)
        _no_text(child)
        got = _attrs(child, ("ref", "state"))
        ref = got["ref"]
        if not is_variant_id(ref):
            raise SchemaError(f"configuration entry '{ref}' must reference a variant", subject=ref)
        if ref in states:
            raise SchemaError(f"variant '{ref}' configured more than once", subject=ref)
        if got["state"] not in ("included", "excluded"):
            raise SchemaError(f"variant '{ref}' state must be 'included' or 'excluded'", subject=ref)
        selected: list[str] = []
        for val_elem in child:
            if val_elem.tag != "value":
                raise SchemaError(f"unexpected element <{val_elem.tag}> inside <variant>", subject=ref)
            if got["state"] != "included":
                raise SchemaError(f"excluded variant '{ref}' must not select values", subject=ref)
            _no_text(val_elem)
            val_ref = _attrs(val_elem, ("ref",))["ref"]
            if owner_id(val_ref) != ref or not is_value_id(val_ref):
                raise SchemaError(f"value '{val_ref}' does not belong to variant '{ref}'", subject=val_ref)
            if val_ref in selected:
                raise SchemaError(f"value '{val_ref}' selected more than once", subject=val_ref)
            selected.append(val_ref)
        if got["state"] == "included":
            states[ref] = VariantState(StateKind.INCLUDED, selected=tuple(selected))
        else:
            states[ref] = VariantState(StateKind.EXCLUDED)

    if model is not None:
        for ref, state in states.items():
            if not model.has_ref(ref):
                raise UnknownIdError(f"no variant '{ref}' in model", subject=ref)
            for val in state.selected:
                if not model.has_ref(val):
                    raise UnknownIdError(f"no value '{val}' in model", subject=val)
    return Configuration(area=area, states=states)


def serialize_configuration(config: Configuration) -> bytes:
    """Canonical configuration document; undecided entries are rejected."""
    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    body = []
    for ref in sorted(config.states, key=numeric_key):
        state = config.states[ref]
        if state.kind is StateKind.UNDECIDED:
            raise IncompleteConfigurationError(f"variant '{ref}' is undecided", subject=ref)
        if state.is_included():
            if state.selected:
                body.append(f'  <variant ref="{_attr(ref)}" state="included">')
                for val in sorted(state.selected, key=numeric_key):
                    body.append(f'    <value ref="{_attr(val)}"/>')
                body.append("  </variant>")
            else:
                body.append(f'  <variant ref="{_attr(ref)}" state="included"/>')
        else:
            body.append(f'  <variant ref="{_attr(ref)}" state="excluded"/>')
    if body:
        lines.append(f'<configuration area="{_attr(config.area)}">')
        lines.extend(body)
        lines.append("</configuration>")
    else:
        lines.append(f'<configuration area="{_attr(config.area)}"/>')
    return ("\n".join(lines) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# model documents
# ---------------------------------------------------------------------------

def parse_model_document(data: bytes | str) -> ModelDocument:
    root = _root(data, "modelDoc")
    _no_text(root)
    got = _attrs(root, ("name", "kind"))

    elements: list[Element] = []
    edges: list[tuple[str, str]] = []
    ids: set[str] = set()
    stage = "element"
    for child in root:
        if child.tag == "element":
            if stage != "element":
                raise SchemaError("<element> declarations must precede <edge> declarations", subject="modelDoc")
            _no_text(child)
            attrs = _attrs(child, ("id", "kind", "label"), ("stereotype", "tag"))
            if attrs["id"] in ids:
                raise SchemaError(f"element id '{attrs['id']}' declared more than once", subject=attrs["id"])
            ids.add(attrs["id"])
            elements.append(
                Element(
                    id=attrs["id"],
                    kind=attrs["kind"],
                    label=attrs["label"],
                    stereotype=attrs.get("stereotype"),
                    tag=attrs.get("tag"),
                )
            )
        elif child.tag == "edge":
            stage = "edge"
            _no_text(child)
            attrs = _attrs(child, ("from", "to"))
            for endpoint in (attrs["from"], attrs["to"]):
                if endpoint not in ids:
                    raise SchemaError(f"edge references unknown element '{endpoint}'", subject=endpoint)
            edges.append((attrs["from"], attrs["to"]))
        else:
            raise SchemaError(f"unexpected element <{child.tag}> inside <modelDoc>", subject=child.tag)
    return ModelDocument(name=got["name"], kind=got["kind"], elements=tuple(elements), edges=tuple(edges))


def serialize_model_document(doc: ModelDocument) -> bytes:
    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    lines.append(f'<modelDoc name="{_attr(doc.name)}" kind="{_attr(doc.kind)}">')
    for el in doc.elements:
        attrs = f'id="{_attr(el.id)}" kind="{_attr(el.kind)}" label="{_attr(el.label)}"'
        if el.stereotype is not None:
            attrs += f' stereotype="{_attr(el.stereotype)}"'
        if el.tag is not None:
            attrs += f' tag="{_attr(el.tag)}"'
        lines.append(f"  <element {attrs}/>")
    for src, dst in doc.edges:
        lines.append(f'  <edge from="{_attr(src)}" to="{_attr(dst)}"/>')
    lines.append("</modelDoc>")
    return ("\n".join(lines) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# table rendering
# ---------------------------------------------------------------------------

_TABLE_HEADER = ("Variant", "Values", "Relation", "Applicable Area", "Dependency")


def render_table(model: FamilyModel) -> str:
    """Plain-text variant table, one row per variant in model order."""
    rows = [_TABLE_HEADER]
    for v in model.variants:
        if ALL_AREAS in v.applicable_areas:
            areas = "All"
        else:
            areas = ", ".join(sorted(v.applicable_areas, key=model.area_sort_key))
        rows.append(
            (
                f"{v.id}. {v.name}",
                "; ".join(f"{val.id} {val.name}" for val in v.values),
                "Alternative" if v.relation is Relation.ALTERNATIVE else "OR",
                areas,
                ", ".join(v.depends_on) if v.depends_on else "None",
            )
        )
    widths = [max(len(row[col]) for row in rows) for col in range(len(_TABLE_HEADER))]
    lines = [" | ".join(cell.ljust(widths[col]) for col, cell in enumerate(rows[0])).rstrip()]
    lines.append("-+-".join("-" * w for w in widths))
    for row in rows[1:]:
        lines.append(" | ".join(cell.ljust(widths[col]) for col, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def render_diagnostics_xml(diagnostics: list[Diagnostic]) -> str:
    if not diagnostics:
        return "<diagnostics/>\n"
    lines = ["<diagnostics>"]
    for d in diagnostics:
        lines.append(
            f'  <diagnostic code="{_attr(d.code)}" subject="{_attr(d.subject)}" message="{_attr(d.message)}"/>'
        )
    lines.append("</diagnostics>")
    return "\n".join(lines) + "\n"
