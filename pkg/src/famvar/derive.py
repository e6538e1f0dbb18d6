"""Derived views of a family model: the decision table and the feature tree.

The decision table lists the questions an application engineer still has
to answer. Variants without dependencies become roots in model order;
a dependent variant is subordinated under the variant owning its first
dependency target, keeping the table a forest, and its guard records the
full dependency conjunction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable

from .errors import MismatchedModelError
from .model import FamilyModel, Relation, Variant, owner_id, require_valid


@dataclass(frozen=True)
class DecisionEntry:
    variant: str
    description: str
    guard: tuple[str, ...]
    choices: tuple[tuple[str, str], ...]  # (value id, value name)
    trace: str
    children: tuple["DecisionEntry", ...] = ()


@dataclass(frozen=True)
class DecisionTable:
    entries: tuple[DecisionEntry, ...]

    def flattened(self) -> list[DecisionEntry]:
        out: list[DecisionEntry] = []

        def walk(entries: Iterable[DecisionEntry]) -> None:
            for entry in entries:
                out.append(entry)
                walk(entry.children)

        walk(self.entries)
        return out


class FeatureKind(Enum):
    MANDATORY = "mandatory"
    OPTIONAL = "optional"
    ALTERNATIVE_GROUP = "alternative"
    OR_GROUP = "or"
    LEAF = "leaf"


@dataclass(frozen=True)
class FeatureNode:
    name: str
    kind: FeatureKind
    children: tuple["FeatureNode", ...] = ()


# ---------------------------------------------------------------------------
# decision table
# ---------------------------------------------------------------------------

def derive_decision_table(model: FamilyModel) -> DecisionTable:
    """Build the decision forest for a valid model."""
    require_valid(model)
    children_of: dict[str, list[Variant]] = {v.id: [] for v in model.variants}
    roots: list[Variant] = []
    for v in model.variants:
        if v.depends_on:
            children_of[owner_id(v.depends_on[0])].append(v)
        else:
            roots.append(v)

    def entry(v: Variant) -> DecisionEntry:
        return DecisionEntry(
            variant=v.id,
            description=v.question,
            guard=tuple(v.depends_on),
            choices=tuple((val.id, val.name) for val in v.values),
            trace=v.id,
            children=tuple(entry(child) for child in children_of[v.id]),
        )

    return DecisionTable(entries=tuple(entry(v) for v in roots))


def filter_decision_table(table: DecisionTable, model: FamilyModel, keep: set[str]) -> DecisionTable:
    """Keep only ``keep`` entries, splicing children of dropped ones upward.

    Choices are refreshed from ``model`` so collapsed value lists show
    through; guards and order are preserved.
    """
    def rebuild(entries: tuple[DecisionEntry, ...]) -> tuple[DecisionEntry, ...]:
        out: list[DecisionEntry] = []
        for e in entries:
            children = rebuild(e.children)
            if e.variant in keep:
                v = model.variant(e.variant)
                out.append(
                    replace(
                        e,
                        guard=tuple(v.depends_on),
                        choices=tuple((val.id, val.name) for val in v.values),
                        children=children,
                    )
                )
            else:
                out.extend(children)
        return tuple(out)

    return DecisionTable(entries=rebuild(table.entries))


def reduce_decision_table(table: DecisionTable, customized: FamilyModel, reqs) -> DecisionTable:
    """Open decisions remaining after apply_requirements.

    Entries vanish for variants the customization removed and for
    variants whose pins already resolve them; everything else keeps its
    position in the forest.
    """
    from .configure import dependency_closure
    from .model import is_value_id

    table_ids = {e.variant for e in table.flattened()}
    model_ids = set(customized.variant_ids())
    if not model_ids <= table_ids:
        missing = sorted(model_ids - table_ids)
        raise MismatchedModelError(
            f"decision table does not cover variants: {', '.join(missing)}", subject=missing[0]
        )

    demanded = dependency_closure(customized, reqs.pins)
    resolved = {owner_id(ref) for ref in demanded if is_value_id(ref)}
    return filter_decision_table(table, customized, model_ids - resolved)


def render_decision_table_text(table: DecisionTable) -> str:
    """Indented text form, two spaces per subordination level."""
    lines: list[str] = []

    def walk(entries: tuple[DecisionEntry, ...], depth: int) -> None:
        for e in entries:
            head = e.variant
            if e.guard:
                head += f" [when {', '.join(e.guard)}]"
            values = ", ".join(name for _, name in e.choices)
            lines.append("  " * depth + f"{head} | {e.description} | {values} | trace {e.trace}")
            walk(e.children, depth + 1)

    walk(table.entries, 0)
    return "\n".join(lines) + ("\n" if lines else "")


def render_decision_table_xml(table: DecisionTable) -> str:
    from .xmlio import _attr

    lines = ["<decisionTable>"] if table.entries else ["<decisionTable/>"]

    def walk(entries: tuple[DecisionEntry, ...], depth: int) -> None:
        pad = "  " * depth
        for e in entries:
            lines.append(
                f'{pad}<entry variant="{_attr(e.variant)}" description="{_attr(e.description)}" trace="{_attr(e.trace)}">'
            )
            for ref in e.guard:
                lines.append(f'{pad}  <guard ref="{_attr(ref)}"/>')
            for ref, name in e.choices:
                lines.append(f'{pad}  <choice ref="{_attr(ref)}" name="{_attr(name)}"/>')
            walk(e.children, depth + 1)
            lines.append(f"{pad}</entry>")

    if table.entries:
        walk(table.entries, 1)
        lines.append("</decisionTable>")
    return "\n".join(lines) + "\n"


def render_decision_table_dot(table: DecisionTable) -> str:
    from .xmlio import _attr

    lines = ["digraph decisions {"]
    counter = [0]

    def walk(entries: tuple[DecisionEntry, ...], parent: str | None) -> None:
        for e in entries:
            node = f"n{counter[0]}"
            counter[0] += 1
            label = f"{e.variant}: {e.description}" if e.description else e.variant
            lines.append(f'  {node} [label="{_attr(label)}"];')
            if parent is not None:
                guard = ", ".join(e.guard)
                if guard:
                    lines.append(f'  {parent} -> {node} [label="{_attr(guard)}"];')
                else:
                    lines.append(f"  {parent} -> {node};")
            walk(e.children, node)

    walk(table.entries, None)
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# feature tree
# ---------------------------------------------------------------------------

def export_feature_tree(model: FamilyModel) -> FeatureNode:
    """Feature-diagram view: family root, variant nodes, value groups.

    Groups with fewer than two values collapse to a bare leaf.
    """
    require_valid(model)
    variant_nodes = []
    for v in model.variants:
        leaves = tuple(FeatureNode(val.name, FeatureKind.LEAF) for val in v.values)
        if len(leaves) >= 2:
            group_kind = (
                FeatureKind.ALTERNATIVE_GROUP
                if v.relation is Relation.ALTERNATIVE
                else FeatureKind.OR_GROUP
            )
            children: tuple[FeatureNode, ...] = (FeatureNode("", group_kind, leaves),)
        else:
            children = leaves
        kind = FeatureKind.MANDATORY if v.mandatory else FeatureKind.OPTIONAL
        variant_nodes.append(FeatureNode(v.name, kind, children))
    return FeatureNode(model.name, FeatureKind.MANDATORY, tuple(variant_nodes))


def render_feature_tree_text(node: FeatureNode) -> str:
    lines: list[str] = []

    def walk(n: FeatureNode, depth: int) -> None:
        if n.kind is FeatureKind.LEAF:
            lines.append("  " * depth + n.name)
        elif n.name:
            lines.append("  " * depth + f"{n.name} ({n.kind.value})")
        else:
            lines.append("  " * depth + f"({n.kind.value})")
        for child in n.children:
            walk(child, depth + 1)

    walk(node, 0)
    return "\n".join(lines) + "\n"


def render_feature_tree_xml(node: FeatureNode) -> str:
    from .xmlio import _attr

    lines: list[str] = []

    def walk(n: FeatureNode, depth: int) -> None:
        pad = "  " * depth
        head = f'{pad}<feature name="{_attr(n.name)}" kind="{n.kind.value}"'
        if n.children:
            lines.append(head + ">")
            for child in n.children:
                walk(child, depth + 1)
            lines.append(f"{pad}</feature>")
        else:
            lines.append(head + "/>")

    walk(node, 0)
    return "\n".join(lines) + "\n"


def render_feature_tree_dot(node: FeatureNode) -> str:
    from .xmlio import _attr

    lines = ["digraph features {"]
    counter = [0]

    def walk(n: FeatureNode, parent: str | None) -> None:
        me = f"n{counter[0]}"
        counter[0] += 1
        label = n.name if n.name else f"<{n.kind.value}>"
        shape = ' shape=diamond' if n.kind in (FeatureKind.ALTERNATIVE_GROUP, FeatureKind.OR_GROUP) else ""
        lines.append(f'  {me} [label="{_attr(label)}"{shape}];')
        if parent is not None:
            lines.append(f"  {parent} -> {me};")
        for child in n.children:
            walk(child, me)

    walk(node, None)
    lines.append("}")
    return "\n".join(lines) + "\n"
